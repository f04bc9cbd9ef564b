#include "lvsem/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "graph_util.hpp"

namespace lvsem {

namespace {

struct FlowGraph {
  struct Arc {
    std::size_t to;
    int cap;
  };
  std::vector<Arc> arcs;
  std::vector<std::vector<std::size_t>> adj;

  explicit FlowGraph(std::size_t n) : adj(n) {}

  void add(std::size_t u, std::size_t v, int cap) {
    adj[u].push_back(arcs.size());
    arcs.push_back({v, cap});
    adj[v].push_back(arcs.size());
    arcs.push_back({u, 0});
  }

  int max_flow(std::size_t s, std::size_t t) {
    int flow = 0;
    for (;;) {
      std::vector<std::optional<std::size_t>> via(adj.size());
      std::vector<bool> seen(adj.size(), false);
      std::queue<std::size_t> q;
      q.push(s);
      seen[s] = true;
      while (!q.empty() && !seen[t]) {
        const auto u = q.front();
        q.pop();
        for (auto a : adj[u]) {
          if (arcs[a].cap <= 0 || seen[arcs[a].to]) continue;
          seen[arcs[a].to] = true;
          via[arcs[a].to] = a;
          q.push(arcs[a].to);
        }
      }
      if (!seen[t]) return flow;
      for (auto v = t; v != s;) {
        const auto a = *via[v];
        arcs[a].cap -= 1;
        arcs[a ^ 1].cap += 1;
        v = arcs[a ^ 1].to;
      }
      ++flow;
    }
  }
};

}  // namespace

std::size_t minimal_bottleneck_size(const CausalDiagram& diagram, const std::vector<std::size_t>& sources,
                                    const std::vector<std::size_t>& sinks) {
  const auto n = diagram.node_count;
  for (auto v : sources)
    if (v >= n) throw ModelError("unknown source id " + std::to_string(v));
  for (auto v : sinks)
    if (v >= n) throw ModelError("unknown sink id " + std::to_string(v));
  if (sources.empty() || sinks.empty()) return 0;

  constexpr int kBig = 1 << 20;
  FlowGraph g(2 * n + 2);
  const auto s = 2 * n, t = 2 * n + 1;
  for (std::size_t v = 0; v < n; ++v) {
    g.add(2 * v, 2 * v + 1, 1);
    for (auto w : diagram.out[v]) g.add(2 * v + 1, 2 * w, kBig);
  }
  for (auto v : sources) g.add(s, 2 * v, kBig);
  for (auto v : sinks) g.add(2 * v + 1, t, kBig);
  return static_cast<std::size_t>(g.max_flow(s, t));
}

std::size_t numerical_rank(const Eigen::MatrixXd& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double cut = tol * std::max(sv.size() ? sv(0) : 0.0, 1.0);
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++r;
  return r;
}

std::size_t submatrix_rank(const Eigen::MatrixXd& w, const std::vector<std::size_t>& rows,
                           const std::vector<std::size_t>& cols, double tol) {
  if (rows.empty() || cols.empty()) return 0;
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (rows[i] >= static_cast<std::size_t>(w.rows()) || cols[j] >= static_cast<std::size_t>(w.cols()))
        throw MixingError("submatrix index out of range");
      sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          w(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
    }
  return numerical_rank(sub, tol);
}

std::size_t submatrix_rank(const MixingMatrix& w, const std::vector<std::size_t>& rows,
                           const std::vector<std::size_t>& cols, double tol) {
  return submatrix_rank(w.values, rows, cols, tol);
}

std::string_view to_string(FaithfulnessKind kind) {
  switch (kind) {
    case FaithfulnessKind::Conventional: return "conventional";
    case FaithfulnessKind::LvsemmeA: return "lvsemme-a";
    case FaithfulnessKind::LvsemmeB: return "lvsemme-b";
  }
  return "?";
}

FaithfulnessReport check_conventional_faithfulness(const CanonicalModel& model, double tol) {
  FaithfulnessReport report;
  const auto t = total_effects(model);
  const auto d = causal_diagram(model);
  for (const auto& v : model.variables()) {
    if (!is_structural(v.kind)) continue;
    for (auto a : detail::reach(d.in, v.id)) {
      if (!is_structural(model.kind(a))) continue;
      ++report.subsets_examined;
      const double effect = t(static_cast<Eigen::Index>(v.id), static_cast<Eigen::Index>(a));
      if (std::abs(effect) <= tol) {
        FaithfulnessViolation viol;
        viol.kind = FaithfulnessKind::Conventional;
        viol.first = a;
        viol.second = v.id;
        viol.effect = effect;
        report.violations.push_back(viol);
      }
    }
  }
  std::sort(report.violations.begin(), report.violations.end(), [](const auto& x, const auto& y) {
    return std::pair(x.first, x.second) < std::pair(y.first, y.second);
  });
  report.passed = report.violations.empty();
  return report;
}

namespace {

struct Context {
  const CanonicalModel& model;
  const CausalDiagram& diagram;
  const MixingMatrix& wstar;
  std::vector<std::optional<std::size_t>> row_of;    // variable -> W* row
  std::vector<std::optional<std::size_t>> noise_of;  // variable -> W* column
  const LvsemmeOptions& options;
  FaithfulnessReport& report;
};

// Walks (J, K) pairs over the two universes by increasing |J|+|K|, and
// lexicographically over the concatenated universe within one size.
// Returns false once a violation stops the walk.
bool scan(Context& ctx, FaithfulnessKind kind, std::size_t target, std::size_t parent,
          const std::vector<std::size_t>& uj, const std::vector<std::size_t>& uk) {
  const auto total = uj.size() + uk.size();
  std::size_t limit = total;
  if (total > ctx.options.subset_cap) {
    ctx.report.truncated = true;
    limit = ctx.options.subset_cap;
  }
  const auto target_row = *ctx.row_of[target];

  std::vector<std::size_t> pick;
  for (std::size_t size = 0; size <= limit; ++size) {
    pick.resize(size);
    for (std::size_t i = 0; i < size; ++i) pick[i] = i;
    for (;;) {
      std::vector<std::size_t> js, ks, rows{target_row}, cols, sinks{target};
      for (auto p : pick) {
        if (p < uj.size()) {
          js.push_back(uj[p]);
          cols.push_back(*ctx.noise_of[uj[p]]);
        } else {
          const auto k = uk[p - uj.size()];
          ks.push_back(k);
          rows.push_back(*ctx.row_of[k]);
          sinks.push_back(k);
        }
      }
      ++ctx.report.subsets_examined;
      const auto rank = submatrix_rank(ctx.wstar, rows, cols, ctx.options.tol);
      const auto neck = minimal_bottleneck_size(ctx.diagram, js, sinks);
      if (rank != neck) {
        FaithfulnessViolation v;
        v.kind = kind;
        v.first = target;
        v.second = parent;
        v.j_set = js;
        v.k_set = ks;
        v.rank = rank;
        v.bottleneck = neck;
        ctx.report.violations.push_back(std::move(v));
        if (ctx.options.stop_at_first) return false;
      }
      // Next combination of `size` indices out of `total`.
      std::size_t i = size;
      while (i > 0 && pick[i - 1] == total - size + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (auto q = i; q < size; ++q) pick[q] = pick[q - 1] + 1;
    }
  }
  return true;
}

}  // namespace

FaithfulnessReport check_lvsemme_faithfulness(const CanonicalModel& model, const LvsemmeOptions& options) {
  FaithfulnessReport report;
  const auto diagram = causal_diagram(model);
  const auto wstar = build_w_star(model);
  Context ctx{model, diagram, wstar, std::vector<std::optional<std::size_t>>(model.size()),
              std::vector<std::optional<std::size_t>>(model.size()), options, report};
  const auto rows = w_star_row_variables(model);
  const auto cols = w_star_noise_owners(model);
  for (std::size_t i = 0; i < rows.size(); ++i) ctx.row_of[rows[i]] = i;
  for (std::size_t j = 0; j < cols.size(); ++j) ctx.noise_of[cols[j]] = j;

  auto noisy_ancestors = [&](std::size_t v, std::optional<std::size_t> skip) {
    std::vector<std::size_t> out;
    for (auto a : detail::reach(diagram.in, v))
      if (ctx.noise_of[a] && a != skip) out.push_back(a);
    return out;
  };

  bool go = true;
  for (auto v : rows) {
    if (!go) break;
    go = scan(ctx, FaithfulnessKind::LvsemmeA, v, v, noisy_ancestors(v, std::nullopt),
              detail::possible_parents_unchecked(model, diagram, v));
    if (!go || model.kind(v) != VariableKind::Mleaf) continue;
    for (auto p : model.parents(v)) {
      std::vector<std::size_t> uk;
      if (model.kind(p) != VariableKind::Unobserved) uk = detail::possible_parents_unchecked(model, diagram, p);
      go = scan(ctx, FaithfulnessKind::LvsemmeB, v, p, noisy_ancestors(v, p), uk);
      if (!go) break;
    }
  }

  std::sort(report.violations.begin(), report.violations.end(), [](const auto& x, const auto& y) {
    return std::tie(x.kind, x.first, x.second, x.j_set, x.k_set) <
           std::tie(y.kind, y.first, y.second, y.j_set, y.k_set);
  });
  report.passed = report.violations.empty() && !report.truncated;
  return report;
}

}  // namespace lvsem
