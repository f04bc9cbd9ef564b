#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lvsem/mixing.hpp"
#include "lvsem/model.hpp"

namespace lvsem {

/// Inconsistent input detected while recovering; `iteration` is 1-based.
struct RecoveryError : std::runtime_error {
  RecoveryError(std::size_t iteration, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what), iteration(iteration) {}
  std::size_t iteration;
};

enum class StepOutcome { CogentGroup, ObservedCogentGroup, MleafAndUnobserved };

std::string_view to_string(StepOutcome outcome);

struct RecoveryStep {
  std::size_t picked_row = 0;
  std::vector<std::size_t> z_i, z_j;  // rows
  std::vector<std::size_t> n_i, n_j;  // columns
  std::size_t n_m = 0;
  bool w0_has_zero = false;
  StepOutcome outcome = StepOutcome::CogentGroup;
};

/// Groups live in matrix space: `rows` are W* row indices and `noises`
/// column indices. Order is C_unobserved, C_cogent, C_mleaf.
struct AogRecovery {
  OrderedGrouping grouping;
  std::vector<RecoveryStep> trace;
  std::size_t iterations() const { return trace.size(); }
  std::size_t cogent_groups() const;
};

AogRecovery recover_aog(const MixingMatrix& wstar, double tol);
inline AogRecovery recover_aog(const MixingMatrix& wstar) { return recover_aog(wstar, wstar.tolerance); }

/// Maps a model-space grouping onto the rows and columns of `wstar`
/// (matched by row label and "N_<name>" column label).
OrderedGrouping project_grouping(const CanonicalModel& model, const OrderedGrouping& grouping,
                                 const MixingMatrix& wstar);

/// Groups compared as an unordered collection of (kind, row set, noise set).
bool same_groups(const OrderedGrouping& a, const OrderedGrouping& b);

struct CenterChoice {
  std::size_t row = 0;
  std::size_t col = 0;
  friend auto operator<=>(const CenterChoice&, const CenterChoice&) = default;
};

/// Parameters reconstructed for one choice of centers and noises. Cogent
/// rows (`cogent_rows`) index C, B^C and the columns of D; `mleaf_rows`
/// index B^L and the rows of D; `latent_cols` index the columns of B.
struct RecoveredModel {
  std::vector<CenterChoice> centers;
  std::vector<std::size_t> cogent_rows;
  std::vector<std::size_t> mleaf_rows;
  std::vector<std::size_t> latent_cols;
  Eigen::MatrixXd b_leaf;    // B^L
  Eigen::MatrixXd b_cogent;  // B^C
  Eigen::MatrixXd c;
  Eigen::MatrixXd d;
  /// Labels copied from the input so the model can stand alone.
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<Observability> observability;
  std::vector<std::string> row_variables;
};

struct RejectedSelection {
  std::vector<CenterChoice> centers;
  std::string reason;
};

struct ClassEnumeration {
  std::vector<RecoveredModel> models;
  std::vector<RejectedSelection> rejected;
};

ClassEnumeration enumerate_class(const MixingMatrix& wstar, const OrderedGrouping& grouping, double tol);

std::size_t edge_count(const RecoveredModel& model, double tol = kDefaultTolerance);

/// Members with the fewest entries above tol across B, C and D. Throws on
/// empty input.
std::vector<RecoveredModel> dog_filter(const std::vector<RecoveredModel>& models, double tol = kDefaultTolerance);

/// W* rebuilt from (B, C, D), rows in the input's order and columns
/// [cogent noises; latent noises].
MixingMatrix rebuild_w_star(const RecoveredModel& model);

/// Canonical model with latents named "H[<column label>]" and structural
/// variables named after the input's row variables (or row labels).
CanonicalModel to_model(const RecoveredModel& model, double tol = kDefaultTolerance);

}  // namespace lvsem
