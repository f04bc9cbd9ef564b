#pragma once

// Hand-built models shared by the unit, property and acceptance tests.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "lvsem/mixing.hpp"
#include "lvsem/model.hpp"
#include "lvsem/simgen.hpp"

namespace fx {

using lvsem::CanonicalModel;

// H -> Z2, Z1 -> Z2, H -> Y3; Z2 is an mleaf.
inline CanonicalModel running_example(double b2 = 0.7, double a21 = -1.3, double b3 = 2.0) {
  CanonicalModel m;
  auto h = m.add_unobserved("H");
  auto z1 = m.add_measured("Z1", "X1", false);
  auto z2 = m.add_measured("Z2", "X2", true);
  auto y3 = m.add_observed("Y3");
  m.add_edge(h, z2, b2);
  m.add_edge(z1, z2, a21);
  m.add_edge(h, y3, b3);
  return m;
}

// Z1 -> Z2 (mleaf), Z1 -> Y3.
inline CanonicalModel d1(double a21 = 2.0, double a31 = 3.0) {
  CanonicalModel m;
  auto z1 = m.add_measured("Z1", "X1", false);
  auto z2 = m.add_measured("Z2", "X2", true);
  auto y3 = m.add_observed("Y3");
  m.add_edge(z1, z2, a21);
  m.add_edge(z1, y3, a31);
  return m;
}

// V1 -> V2 -> V3 plus V1 -> V3 with the direct weight cancelling the path.
inline CanonicalModel triangle_cancel(double a = 1.0, double b = 1.0) {
  CanonicalModel m;
  auto v1 = m.add_observed("Y1");
  auto v2 = m.add_observed("Y2");
  auto v3 = m.add_observed("Y3");
  m.add_edge(v1, v2, a);
  m.add_edge(v2, v3, b);
  m.add_edge(v1, v3, -a * b);
  return m;
}

// V1 -> V2 -> V3 -> V4 with V1 -> V4 cancelling; V2 is measured.
inline CanonicalModel chain4_cancel(double a, double b, double c) {
  CanonicalModel m;
  auto v1 = m.add_observed("Y1");
  auto v2 = m.add_measured("Z2", "X2", false);
  auto v3 = m.add_observed("Y3");
  auto v4 = m.add_observed("Y4");
  m.add_edge(v1, v2, a);
  m.add_edge(v2, v3, b);
  m.add_edge(v3, v4, c);
  m.add_edge(v1, v4, -a * b * c);
  return m;
}

// Two confounders with proportional columns (1,2) and (2,4) into Y1, Y2,
// plus Y1 -> Y2 so that Y1 may serve as a possible parent of Y2.
inline CanonicalModel proportional_confounders() {
  CanonicalModel m;
  auto h1 = m.add_unobserved("H1");
  auto h2 = m.add_unobserved("H2");
  auto y1 = m.add_observed("Y1");
  auto y2 = m.add_observed("Y2");
  m.add_edge(h1, y1, 1.0);
  m.add_edge(h1, y2, 2.0);
  m.add_edge(h2, y1, 2.0);
  m.add_edge(h2, y2, 4.0);
  m.add_edge(y1, y2, 0.5);
  return m;
}

// Y0 -> Y1 -> Z1 -> Z2 (mleaf) and Y0 -> Z2: one ancestral group {Z1, Z2}
// that the direct-edge criterion splits.
inline CanonicalModel aog_not_dog(double a01 = 1.1, double a1z = 0.8, double az = 1.7, double a0z = -0.6) {
  CanonicalModel m;
  auto y0 = m.add_observed("Y0");
  auto y1 = m.add_observed("Y1");
  auto z1 = m.add_measured("Z1", "X1", false);
  auto z2 = m.add_measured("Z2", "X2", true);
  m.add_edge(y0, y1, a01);
  m.add_edge(y1, z1, a1z);
  m.add_edge(z1, z2, az);
  m.add_edge(y0, z2, a0z);
  return m;
}

// Confounder whose mleaf child has no other ancestors, so the mleaf can
// absorb the confounder's noise. `extra_children` observed children get
// weights from `w`; `with_parent` adds an observed root into every child.
inline CanonicalModel non_minimal(std::size_t extra_children, const std::vector<double>& w, bool with_parent,
                                  bool measured_children = false) {
  CanonicalModel m;
  std::size_t root = 0;
  if (with_parent) root = m.add_observed("Y0");
  auto h = m.add_unobserved("H");
  auto leaf = m.add_measured("Z9", "X9", true);
  m.add_edge(h, leaf, w.at(0));
  std::vector<std::size_t> kids;
  for (std::size_t k = 0; k < extra_children; ++k) {
    const auto i = std::to_string(k + 1);
    kids.push_back(measured_children && k % 2 == 1 ? m.add_measured("Z" + i, "X" + i, true)
                                                   : m.add_observed("Y" + i));
    m.add_edge(h, kids.back(), w.at(k + 1));
    if (with_parent) m.add_edge(root, kids.back(), 0.5 + 0.25 * static_cast<double>(k));
  }
  return m;
}

inline std::vector<CanonicalModel> non_minimal_fixtures() {
  return {
      non_minimal(1, {1.0, 2.0}, false),
      non_minimal(1, {0.7, -1.4}, true),
      non_minimal(2, {1.3, 0.6, -0.9}, false),
      non_minimal(2, {-0.8, 1.2, 1.9}, true),
      non_minimal(3, {0.9, 1.1, -0.5, 0.75}, false),
      non_minimal(3, {1.5, -1.2, 0.6, 2.2}, true),
      non_minimal(2, {1.0, 1.0, 1.0}, false, true),
      non_minimal(3, {0.6, 0.8, -1.3, 1.7}, true, true),
      non_minimal(4, {1.2, 0.5, 0.6, 0.7, 0.8}, false),
      non_minimal(4, {-1.1, 1.4, -0.3, 0.9, 1.6}, true, true),
      non_minimal(1, {2.5, 0.4}, false),
      non_minimal(5, {0.55, 1.0, -1.0, 1.5, -1.5, 0.65}, true),
  };
}

// Random column permutation and nonzero rescaling.
inline lvsem::MixingMatrix shuffle_scale(const lvsem::MixingMatrix& w, std::mt19937_64& rng) {
  std::vector<std::size_t> order(static_cast<std::size_t>(w.cols()));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_real_distribution<double> mag(0.3, 3.0);
  std::bernoulli_distribution sign(0.5);
  std::vector<double> scales;
  for (std::size_t k = 0; k < order.size(); ++k) scales.push_back((sign(rng) ? 1.0 : -1.0) * mag(rng));
  return lvsem::permute_scale_columns(w, order, scales);
}

// Config of the recovery property runs: sizes cycle through p_c <= 6,
// p_ml <= 3, p_H <= 2.
inline lvsem::GeneratorConfig recovery_config(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 7919 + 17);
  lvsem::GeneratorConfig cfg;
  const std::size_t pc = 1 + rng() % 6;
  cfg.measured_cogent = rng() % (pc + 1);
  cfg.observed = pc - cfg.measured_cogent;
  cfg.mleaf = rng() % 4;
  cfg.unobserved = rng() % 3;
  if (cfg.measured_cogent > 0 && pc + cfg.mleaf < 2) cfg.mleaf = 1;
  if (cfg.unobserved > 0 && pc + cfg.mleaf < 2) cfg.unobserved = 0;
  cfg.edge_density = 0.3 + 0.1 * static_cast<double>(rng() % 5);
  cfg.seed = seed;
  cfg.enforce_minimal = true;
  cfg.enforce_conventional = true;
  return cfg;
}

// Set of variables touched by each group (rows and noise owners together).
inline std::multiset<std::pair<int, std::set<std::size_t>>> group_members(const lvsem::OrderedGrouping& g) {
  std::multiset<std::pair<int, std::set<std::size_t>>> out;
  for (const auto& grp : g.groups) {
    std::set<std::size_t> s(grp.rows.begin(), grp.rows.end());
    s.insert(grp.noises.begin(), grp.noises.end());
    out.emplace(static_cast<int>(grp.kind), s);
  }
  return out;
}

}  // namespace fx
