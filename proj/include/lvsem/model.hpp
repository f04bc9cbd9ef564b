#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace lvsem {

inline constexpr double kDefaultTolerance = 1e-9;

enum class VariableKind { Unobserved, ObservedCogent, MeasuredCogent, Mleaf, Measurement };

std::string_view to_string(VariableKind kind);
VariableKind parse_kind(std::string_view text);

bool is_cogent(VariableKind kind);
bool is_measured(VariableKind kind);  // MeasuredCogent or Mleaf
bool is_structural(VariableKind kind);  // anything but Measurement

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Variable {
  std::size_t id = 0;
  std::string name;
  VariableKind kind = VariableKind::ObservedCogent;

  friend bool operator==(const Variable&, const Variable&) = default;
};

/// A weighted edge among structural variables. `text` keeps the decimal
/// spelling the weight was read from so files round-trip verbatim.
struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  double weight = 0.0;
  std::string text;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct MeasurementLink {
  std::size_t measured = 0;
  std::size_t measurement = 0;

  friend bool operator==(const MeasurementLink&, const MeasurementLink&) = default;
};

/// Canonical LV-SEM-ME: a variable partition, the structural edges among
/// H, Z and Y, and the Z -> X pairing. Ids are dense indices in insertion
/// order.
class CanonicalModel {
 public:
  std::size_t add_variable(std::string name, VariableKind kind);
  void add_edge(std::size_t src, std::size_t dst, double weight, std::string text = {});
  void add_measurement(std::size_t measured, std::size_t measurement);

  // Convenience builders used by fixtures and the generator.
  std::size_t add_unobserved(std::string name);
  std::size_t add_observed(std::string name);
  /// Adds a measured variable (cogent or mleaf) together with its measurement.
  std::size_t add_measured(std::string name, std::string measurement_name, bool mleaf);

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<MeasurementLink>& measurements() const { return measurements_; }

  std::size_t size() const { return variables_.size(); }
  const Variable& variable(std::size_t id) const;
  VariableKind kind(std::size_t id) const { return variable(id).kind; }
  const std::string& name(std::size_t id) const { return variable(id).name; }
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t id_of(std::string_view name) const;

  /// Weight of src -> dst among structural edges, 0 when absent.
  double weight(std::size_t src, std::size_t dst) const;
  bool has_edge(std::size_t src, std::size_t dst) const;

  /// Structural parents/children (measurement links excluded).
  std::vector<std::size_t> parents(std::size_t id) const;
  std::vector<std::size_t> children(std::size_t id) const;

  std::optional<std::size_t> measurement_of(std::size_t measured) const;
  std::optional<std::size_t> measured_by(std::size_t measurement) const;

  std::vector<std::size_t> of_kind(VariableKind kind) const;
  std::vector<std::size_t> unobserved() const { return of_kind(VariableKind::Unobserved); }
  std::vector<std::size_t> mleafs() const { return of_kind(VariableKind::Mleaf); }
  /// Cogent variables in [Z^C; Y] order.
  std::vector<std::size_t> cogent() const;
  /// Variables in Z u Y.
  std::vector<std::size_t> observable_sources() const;

  /// Row label used in mixing matrices: the measurement name for measured
  /// variables, the variable's own name for observed ones.
  std::string row_label(std::size_t id) const;

  friend bool operator==(const CanonicalModel&, const CanonicalModel&) = default;

 private:
  void check_id(std::size_t id) const;

  std::vector<Variable> variables_;
  std::vector<Edge> edges_;
  std::vector<MeasurementLink> measurements_;
};

/// Unweighted view over V u X, measurement links included.
struct CausalDiagram {
  std::size_t node_count = 0;
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::vector<std::size_t>> in;

  bool has_edge(std::size_t u, std::size_t v) const;
  std::size_t edge_count() const;
};

CausalDiagram causal_diagram(const CanonicalModel& model);

/// Topological order of the causal diagram, ties by smallest id. Throws
/// ModelError when the diagram has a cycle.
std::vector<std::size_t> topological_order(const CausalDiagram& diagram);

enum class Rule {
  UnknownVariable,
  DuplicateName,
  SelfLoop,
  DuplicateEdge,
  ZeroWeight,
  Cycle,
  EdgeIntoUnobserved,
  EdgeTouchesMeasurement,
  ConfounderWithOneChild,
  MleafWithExtraChild,
  MleafWithoutParents,
  MeasuredCogentWithoutChildren,
  MeasurementLinkInvalid,
  MissingMeasurement,
  DuplicateMeasurement,
};

std::string_view to_string(Rule rule);

struct Violation {
  Rule rule;
  std::vector<std::size_t> subjects;  // offending variables, or an edge (src, dst)
  std::string detail;
};

std::vector<Violation> validate_canonical(const CanonicalModel& model);

std::vector<std::size_t> ancestors(const CanonicalModel& model, std::size_t v);
std::vector<std::size_t> descendants(const CanonicalModel& model, std::size_t v);

/// An(v) \ H together with every mleaf m != v whose parents lie in An(v).
/// Defined for v in Z u Y.
std::vector<std::size_t> possible_parents(const CanonicalModel& model, std::size_t v);

/// T = (I - A)^{-1} - I over structural variables, indexed by variable id.
/// Rows and columns belonging to measurements are zero.
Eigen::MatrixXd total_effects(const CanonicalModel& model);

// ---------------------------------------------------------------------------
// Ordered groupings

enum class GroupKind { Cogent, MleafOnly, UnobservedOnly };

std::string_view to_string(GroupKind kind);

/// One ordered group. In model space `rows` holds the cogent and mleaf
/// members and `noises` the owners of the group's exogenous noises (the
/// cogent center plus unobserved members). In mixing-matrix space both
/// hold row and column indices.
struct Group {
  GroupKind kind = GroupKind::Cogent;
  std::optional<std::size_t> center;
  std::vector<std::size_t> rows;
  std::vector<std::size_t> noises;

  friend bool operator==(const Group&, const Group&) = default;
};

struct OrderedGrouping {
  std::vector<Group> groups;
  /// Edges between group positions: (i, j) when some member of group i has a
  /// directed edge into a member of group j.
  std::vector<std::pair<std::size_t, std::size_t>> dag;
};

OrderedGrouping compute_aog(const CanonicalModel& model);
OrderedGrouping compute_dog(const CanonicalModel& model);

/// Condition on an edge from a measured cogent variable into an mleaf.
bool edge_identifiable_me(const CanonicalModel& model, std::size_t cogent, std::size_t mleaf);
/// Condition on an edge from an unobserved variable into a cogent variable.
bool edge_identifiable_lv(const CanonicalModel& model, std::size_t latent, std::size_t cogent);

struct MinimalityWitness {
  std::size_t latent;
  std::size_t mleaf;
};

struct MinimalityResult {
  bool minimal = true;
  std::optional<MinimalityWitness> witness;
};

MinimalityResult is_minimal(const CanonicalModel& model);

/// True when (latent, mleaf) satisfies the non-minimality criterion.
bool is_minimality_witness(const CanonicalModel& model, std::size_t latent, std::size_t mleaf);

}  // namespace lvsem
