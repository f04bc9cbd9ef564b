#include "lvsem/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "graph_util.hpp"

namespace lvsem {

std::optional<std::size_t> MixingMatrix::row_of(const std::string& label) const {
  for (std::size_t i = 0; i < row_labels.size(); ++i)
    if (row_labels[i] == label) return i;
  return std::nullopt;
}

std::optional<std::size_t> MixingMatrix::col_of(const std::string& label) const {
  for (std::size_t j = 0; j < col_labels.size(); ++j)
    if (col_labels[j] == label) return j;
  return std::nullopt;
}

std::string noise_label(const std::string& variable) { return "N_" + variable; }

std::vector<std::size_t> w_star_row_variables(const CanonicalModel& model) {
  auto rows = model.mleafs();
  const auto zc = model.of_kind(VariableKind::MeasuredCogent);
  const auto ys = model.of_kind(VariableKind::ObservedCogent);
  rows.insert(rows.end(), zc.begin(), zc.end());
  rows.insert(rows.end(), ys.begin(), ys.end());
  return rows;
}

std::vector<std::size_t> w_star_noise_owners(const CanonicalModel& model) {
  auto cols = model.unobserved();
  const auto vc = model.cogent();
  cols.insert(cols.end(), vc.begin(), vc.end());
  return cols;
}

namespace {

using Index = Eigen::Index;

Index ix(std::size_t i) { return static_cast<Index>(i); }

}  // namespace

MixingMatrix build_w_star(const CanonicalModel& model) {
  const auto leaves = model.mleafs();
  const auto vc = model.cogent();
  const auto hs = model.unobserved();
  const auto pc = vc.size(), pl = leaves.size(), ph = hs.size();

  std::vector<std::size_t> slot(model.size(), 0);
  for (std::size_t i = 0; i < pc; ++i) slot[vc[i]] = i;
  for (std::size_t i = 0; i < pl; ++i) slot[leaves[i]] = i;
  for (std::size_t i = 0; i < ph; ++i) slot[hs[i]] = i;

  Eigen::MatrixXd bl = Eigen::MatrixXd::Zero(ix(pl), ix(ph));
  Eigen::MatrixXd bc = Eigen::MatrixXd::Zero(ix(pc), ix(ph));
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(ix(pc), ix(pc));
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(ix(pl), ix(pc));
  std::vector<std::vector<std::size_t>> cogent_out(pc);
  for (const auto& e : model.edges()) {
    const auto ks = model.kind(e.src), kd = model.kind(e.dst);
    if (ks == VariableKind::Unobserved && kd == VariableKind::Mleaf) bl(ix(slot[e.dst]), ix(slot[e.src])) += e.weight;
    else if (ks == VariableKind::Unobserved && is_cogent(kd)) bc(ix(slot[e.dst]), ix(slot[e.src])) += e.weight;
    else if (is_cogent(ks) && is_cogent(kd)) {
      c(ix(slot[e.dst]), ix(slot[e.src])) += e.weight;
      cogent_out[slot[e.src]].push_back(slot[e.dst]);
    } else if (is_cogent(ks) && kd == VariableKind::Mleaf) d(ix(slot[e.dst]), ix(slot[e.src])) += e.weight;
    else throw ModelError("edge " + model.name(e.src) + "->" + model.name(e.dst) + " is not canonical");
  }

  // (I - C)^{-1} by forward substitution in a topological order of C.
  const auto order = detail::kahn_order(cogent_out);
  if (order.size() != pc) throw ModelError("cogent subgraph is cyclic");
  Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(ix(pc), ix(pc));
  for (auto v : order) {
    inv(ix(v), ix(v)) += 1.0;
    for (std::size_t p = 0; p < pc; ++p)
      if (c(ix(v), ix(p)) != 0.0) inv.row(ix(v)) += c(ix(v), ix(p)) * inv.row(ix(p));
  }

  MixingMatrix w;
  w.values.resize(ix(pl + pc), ix(ph + pc));
  w.values.topLeftCorner(ix(pl), ix(ph)) = bl + d * inv * bc;
  w.values.topRightCorner(ix(pl), ix(pc)) = d * inv;
  w.values.bottomLeftCorner(ix(pc), ix(ph)) = inv * bc;
  w.values.bottomRightCorner(ix(pc), ix(pc)) = inv;

  for (auto v : w_star_row_variables(model)) {
    w.row_labels.push_back(model.row_label(v));
    w.row_variables.push_back(model.name(v));
    w.observability.push_back(is_measured(model.kind(v)) ? Observability::Measured : Observability::Observed);
  }
  for (auto u : w_star_noise_owners(model)) w.col_labels.push_back(noise_label(model.name(u)));
  return w;
}

MixingMatrix build_w(const CanonicalModel& model) {
  auto w = build_w_star(model);
  const auto base = w.cols();
  std::vector<std::size_t> measured_rows;
  for (std::size_t i = 0; i < w.row_labels.size(); ++i)
    if (w.measured(i)) measured_rows.push_back(i);
  w.values.conservativeResize(Eigen::NoChange, base + ix(measured_rows.size()));
  w.values.rightCols(ix(measured_rows.size())).setZero();
  for (std::size_t k = 0; k < measured_rows.size(); ++k) {
    w.values(ix(measured_rows[k]), base + ix(k)) = 1.0;
    w.col_labels.push_back(noise_label(w.row_labels[measured_rows[k]]));
  }
  return w;
}

StripResult strip_measurement_columns(const MixingMatrix& w, double tol) {
  if (w.observability.size() != static_cast<std::size_t>(w.rows()))
    throw MixingError("observability flags do not cover every row");
  const auto sp = support(w.values, tol);
  // One-hot column hitting row i, by row.
  std::vector<std::vector<std::size_t>> hits(static_cast<std::size_t>(w.rows()));
  for (Index j = 0; j < w.cols(); ++j) {
    if (sp.col_counts[static_cast<std::size_t>(j)] != 1) continue;
    for (Index i = 0; i < w.rows(); ++i)
      if (sp.mask(i, j) && w.measured(static_cast<std::size_t>(i))) hits[static_cast<std::size_t>(i)].push_back(static_cast<std::size_t>(j));
  }

  StripResult out;
  bool any = false, all = true;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (!w.measured(i)) continue;
    if (hits[i].empty()) all = false;
    else any = true;
  }
  if (!any) {
    out.matrix = w;
    out.already_stripped = true;
    return out;
  }
  if (!all) {
    for (std::size_t i = 0; i < hits.size(); ++i)
      if (w.measured(i) && hits[i].empty())
        throw MixingError("measured row '" + w.row_labels[i] + "' has no one-hot column");
  }

  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (!w.measured(i)) continue;
    out.removed.push_back(hits[i].front());
    if (hits[i].size() > 1) out.ambiguous_rows.push_back(i);
  }
  std::sort(out.removed.begin(), out.removed.end());

  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < static_cast<std::size_t>(w.cols()); ++j)
    if (!std::binary_search(out.removed.begin(), out.removed.end(), j)) keep.push_back(j);
  out.matrix = w;
  out.matrix.values.resize(w.rows(), ix(keep.size()));
  out.matrix.col_labels.clear();
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.matrix.values.col(ix(k)) = w.values.col(ix(keep[k]));
    if (keep[k] < w.col_labels.size()) out.matrix.col_labels.push_back(w.col_labels[keep[k]]);
  }
  return out;
}

SupportPattern support(const Eigen::MatrixXd& values, double tol) {
  SupportPattern sp;
  sp.mask = values.array().abs() > tol;
  sp.row_counts.assign(static_cast<std::size_t>(values.rows()), 0);
  sp.col_counts.assign(static_cast<std::size_t>(values.cols()), 0);
  for (Index i = 0; i < values.rows(); ++i)
    for (Index j = 0; j < values.cols(); ++j)
      if (sp.mask(i, j)) {
        ++sp.row_counts[static_cast<std::size_t>(i)];
        ++sp.col_counts[static_cast<std::size_t>(j)];
      }
  return sp;
}

namespace {

// Scale s with a * s == b entrywise within tol, if one exists.
std::optional<double> column_scale(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol) {
  Index pivot = 0;
  const double amax = a.cwiseAbs().maxCoeff(&pivot);
  if (amax <= tol) {
    if (b.cwiseAbs().maxCoeff() <= tol) return 1.0;
    return std::nullopt;
  }
  const double s = b(pivot) / a(pivot);
  if (s == 0.0 || !std::isfinite(s)) return std::nullopt;
  if (((a * s) - b).cwiseAbs().maxCoeff() > tol) return std::nullopt;
  return s;
}

bool augment(std::size_t u, const std::vector<std::vector<std::size_t>>& adj, std::vector<bool>& seen,
             std::vector<std::optional<std::size_t>>& owner) {
  for (auto v : adj[u]) {
    if (seen[v]) continue;
    seen[v] = true;
    if (!owner[v] || augment(*owner[v], adj, seen, owner)) {
      owner[v] = u;
      return true;
    }
  }
  return false;
}

}  // namespace

std::optional<ColumnMatch> match_up_to_permutation_scaling(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                                            double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw MixingError("matrices differ in shape: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                      " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  const auto n = static_cast<std::size_t>(a.cols());
  std::vector<std::vector<std::size_t>> adj(n);
  std::vector<std::vector<double>> scale(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      if (auto s = column_scale(a.col(ix(j)), b.col(ix(k)), tol)) {
        adj[j].push_back(k);
        scale[j][k] = *s;
      }

  std::vector<std::optional<std::size_t>> owner(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<bool> seen(n, false);
    if (!augment(j, adj, seen, owner)) return std::nullopt;
  }
  ColumnMatch m;
  m.permutation.assign(n, 0);
  m.scales.assign(n, 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto j = *owner[k];
    m.permutation[j] = k;
    m.scales[j] = scale[j][k];
  }
  return m;
}

std::optional<ColumnMatch> match_up_to_permutation_scaling(const MixingMatrix& a, const MixingMatrix& b,
                                                            double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.row_labels == b.row_labels)
    return match_up_to_permutation_scaling(a.values, b.values, tol);
  const auto aligned = align_rows(b, a.row_labels);
  if (!aligned) throw MixingError("matrices have different row labels");
  return match_up_to_permutation_scaling(a.values, aligned->values, tol);
}

MixingMatrix canonical_column_form(const MixingMatrix& w, double tol) {
  const auto n = static_cast<std::size_t>(w.cols());
  std::vector<Eigen::VectorXd> cols;
  std::vector<std::string> labels;
  for (std::size_t j = 0; j < n; ++j) {
    Eigen::VectorXd c = w.values.col(ix(j));
    Index lead = -1;
    for (Index i = 0; i < c.size(); ++i)
      if (std::abs(c(i)) > tol) {
        lead = i;
        break;
      }
    if (lead < 0)
      throw MixingError("zero column " + (j < w.col_labels.size() ? w.col_labels[j] : std::to_string(j)));
    c /= c(lead);
    cols.push_back(std::move(c));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Support bitstring compared with set rows first: a column whose first
  // differing entry is nonzero sorts earlier.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto& a = cols[x];
    const auto& b = cols[y];
    for (Index i = 0; i < a.size(); ++i) {
      const bool sa = std::abs(a(i)) > tol, sb = std::abs(b(i)) > tol;
      if (sa != sb) return sa;
    }
    for (Index i = 0; i < a.size(); ++i)
      if (std::abs(a(i) - b(i)) > tol) return a(i) < b(i);
    return false;
  });
  MixingMatrix out = w;
  out.col_labels.clear();
  for (std::size_t k = 0; k < n; ++k) {
    out.values.col(ix(k)) = cols[order[k]];
    if (order[k] < w.col_labels.size()) out.col_labels.push_back(w.col_labels[order[k]]);
  }
  return out;
}

std::optional<MixingMatrix> align_rows(const MixingMatrix& w, const std::vector<std::string>& labels) {
  if (labels.size() != w.row_labels.size()) return std::nullopt;
  MixingMatrix out = w;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto r = w.row_of(labels[i]);
    if (!r) return std::nullopt;
    out.values.row(ix(i)) = w.values.row(ix(*r));
    out.row_labels[i] = labels[i];
    if (!w.observability.empty()) out.observability[i] = w.observability[*r];
    if (!w.row_variables.empty()) out.row_variables[i] = w.row_variables[*r];
  }
  return out;
}

MixingMatrix permute_scale_columns(const MixingMatrix& w, const std::vector<std::size_t>& order,
                                   const std::vector<double>& scales) {
  MixingMatrix out = w;
  out.values.resize(w.rows(), ix(order.size()));
  out.col_labels.clear();
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.values.col(ix(k)) = w.values.col(ix(order[k])) * (k < scales.size() ? scales[k] : 1.0);
    if (order[k] < w.col_labels.size()) out.col_labels.push_back(w.col_labels[order[k]]);
  }
  return out;
}

}  // namespace lvsem
