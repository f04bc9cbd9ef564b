#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "lvsem/model.hpp"

namespace lvsem {

/// A coefficient that fell to |w| <= tol during a rewrite and was dropped.
struct Cancellation {
  std::size_t src = 0;
  std::size_t dst = 0;
  double residual = 0.0;
};

struct Rewrite {
  CanonicalModel model;
  std::vector<Cancellation> cancellations;
};

/// Moves the center of `center`'s group to the mleaf `new_center` and/or
/// hands the center's exogenous noise to the unobserved `latent`. Both must
/// share the center's ancestral group. Variable ids are preserved.
Rewrite switch_center_detailed(const CanonicalModel& model, std::size_t center,
                               std::optional<std::size_t> new_center, std::optional<std::size_t> latent,
                               double tol = kDefaultTolerance);
CanonicalModel switch_center(const CanonicalModel& model, std::size_t center,
                             std::optional<std::size_t> new_center, std::optional<std::size_t> latent = std::nullopt,
                             double tol = kDefaultTolerance);

/// Every model reachable by independent per-group switches within
/// `grouping` (model space). The input comes first.
std::vector<CanonicalModel> enumerate_equivalents(const CanonicalModel& model, const OrderedGrouping& grouping,
                                                  double tol = kDefaultTolerance);

/// Removes `latent` by letting `mleaf` carry its noise. Requires a
/// minimality witness. Ids after `latent` shift down by one.
Rewrite reduce_latent_detailed(const CanonicalModel& model, std::size_t latent, std::size_t mleaf,
                               double tol = kDefaultTolerance);
CanonicalModel reduce_latent(const CanonicalModel& model, std::size_t latent, std::size_t mleaf,
                             double tol = kDefaultTolerance);

/// Kind-preserving isomorphism of the causal diagrams.
bool same_unlabeled_structure(const CanonicalModel& a, const CanonicalModel& b);

/// W*(a) and W*(b) agree up to column permutation and scaling once rows
/// are aligned by label.
bool models_equal_mixing(const CanonicalModel& a, const CanonicalModel& b, double tol = kDefaultTolerance);

/// Same named observable variables and edges; unobserved variables matched
/// by proportional child coefficients, names ignored. Weights compared with
/// relative tolerance.
bool equal_up_to_latent_scaling(const CanonicalModel& a, const CanonicalModel& b, double tol);

}  // namespace lvsem
