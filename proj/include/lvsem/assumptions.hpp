#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lvsem/mixing.hpp"
#include "lvsem/model.hpp"

namespace lvsem {

/// Fewest vertices meeting every directed path from `sources` to `sinks`,
/// endpoints included. Unit-capacity max flow on the node-split graph.
std::size_t minimal_bottleneck_size(const CausalDiagram& diagram, const std::vector<std::size_t>& sources,
                                    const std::vector<std::size_t>& sinks);

/// Singular values above tol * max(sigma_max, 1). Empty input has rank 0.
std::size_t numerical_rank(const Eigen::MatrixXd& m, double tol = kDefaultTolerance);
std::size_t submatrix_rank(const Eigen::MatrixXd& w, const std::vector<std::size_t>& rows,
                           const std::vector<std::size_t>& cols, double tol = kDefaultTolerance);
std::size_t submatrix_rank(const MixingMatrix& w, const std::vector<std::size_t>& rows,
                           const std::vector<std::size_t>& cols, double tol = kDefaultTolerance);

enum class FaithfulnessKind { Conventional, LvsemmeA, LvsemmeB };

std::string_view to_string(FaithfulnessKind kind);

struct FaithfulnessViolation {
  FaithfulnessKind kind = FaithfulnessKind::Conventional;
  /// Conventional: (ancestor, descendant). LvsemmeA: the checked variable twice.
  /// LvsemmeB: (mleaf, the parent left out of its ancestor set).
  std::size_t first = 0;
  std::size_t second = 0;
  std::vector<std::size_t> j_set;
  std::vector<std::size_t> k_set;
  std::size_t rank = 0;
  std::size_t bottleneck = 0;
  double effect = 0.0;
};

struct FaithfulnessReport {
  bool passed = true;
  std::vector<FaithfulnessViolation> violations;
  std::size_t subsets_examined = 0;
  bool truncated = false;
};

FaithfulnessReport check_conventional_faithfulness(const CanonicalModel& model, double tol = kDefaultTolerance);

struct LvsemmeOptions {
  double tol = kDefaultTolerance;
  /// Largest |J| + |K| enumerated. Universes larger than this mark the
  /// report truncated.
  std::size_t subset_cap = 8;
  bool stop_at_first = false;
};

inline constexpr std::size_t kUnlimitedSubsets = std::numeric_limits<std::size_t>::max();

FaithfulnessReport check_lvsemme_faithfulness(const CanonicalModel& model, const LvsemmeOptions& options = {});

}  // namespace lvsem
