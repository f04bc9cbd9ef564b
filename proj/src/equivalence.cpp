#include "lvsem/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <tuple>

#include "lvsem/mixing.hpp"

namespace lvsem {

namespace {

// Structural equations: eq[v][p] is the coefficient of parent p in v.
using Equations = std::vector<std::map<std::size_t, double>>;

Equations equations_of(const CanonicalModel& model) {
  Equations eq(model.size());
  for (const auto& e : model.edges()) eq[e.dst][e.src] += e.weight;
  return eq;
}

std::vector<std::size_t> children_in(const Equations& eq, std::size_t v) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < eq.size(); ++k)
    if (eq[k].count(v)) out.push_back(k);
  return out;
}

// eq[k] gets `factor` times the terms of `terms`.
void add_scaled(std::map<std::size_t, double>& row, const std::map<std::size_t, double>& terms, double factor) {
  for (const auto& [p, w] : terms) row[p] += factor * w;
}

std::vector<Cancellation> cancel(Equations& eq, double tol) {
  std::vector<Cancellation> out;
  for (std::size_t v = 0; v < eq.size(); ++v)
    for (auto it = eq[v].begin(); it != eq[v].end();) {
      if (std::abs(it->second) <= tol) {
        out.push_back({it->first, v, it->second});
        it = eq[v].erase(it);
      } else {
        ++it;
      }
    }
  return out;
}

// Rebuilds a model with the same variables (kinds from `kinds`) and edges
// from `eq`. Surviving edges keep their position and, when the weight is
// unchanged, their decimal text.
CanonicalModel rebuild(const CanonicalModel& model, const std::vector<VariableKind>& kinds, const Equations& eq,
                       std::optional<std::size_t> drop = std::nullopt) {
  CanonicalModel out;
  std::vector<std::size_t> id(model.size(), 0);
  for (const auto& v : model.variables()) {
    if (drop && v.id == *drop) continue;
    id[v.id] = out.add_variable(v.name, kinds[v.id]);
  }
  std::set<std::pair<std::size_t, std::size_t>> done;
  for (const auto& e : model.edges()) {
    const auto it = eq[e.dst].find(e.src);
    if (it == eq[e.dst].end()) continue;
    out.add_edge(id[e.src], id[e.dst], it->second, it->second == e.weight ? e.text : std::string{});
    done.emplace(e.src, e.dst);
  }
  for (std::size_t v = 0; v < eq.size(); ++v)
    for (const auto& [p, w] : eq[v])
      if (!done.count({p, v})) out.add_edge(id[p], id[v], w);
  for (const auto& m : model.measurements()) out.add_measurement(id[m.measured], id[m.measurement]);
  return out;
}

const Group* group_of_center(const OrderedGrouping& g, std::size_t center) {
  for (const auto& grp : g.groups)
    if (grp.kind == GroupKind::Cogent && grp.center == center) return &grp;
  return nullptr;
}

}  // namespace

Rewrite switch_center_detailed(const CanonicalModel& model, std::size_t center,
                               std::optional<std::size_t> new_center, std::optional<std::size_t> latent, double tol) {
  if (!is_cogent(model.kind(center))) throw ModelError(model.name(center) + " is not a cogent variable");
  if (new_center == center) new_center.reset();
  if (new_center || latent) {
    const auto aog = compute_aog(model);
    const auto* g = group_of_center(aog, center);
    if (!g) throw ModelError("no ancestral group centered at " + model.name(center));
    if (new_center && !std::binary_search(g->rows.begin(), g->rows.end(), *new_center))
      throw ModelError(model.name(*new_center) + " is not in the group of " + model.name(center));
    if (latent && (*latent == center || !std::binary_search(g->noises.begin(), g->noises.end(), *latent)))
      throw ModelError(model.name(*latent) + " is not a latent in the group of " + model.name(center));
  }

  auto eq = equations_of(model);
  std::vector<VariableKind> kinds;
  for (const auto& v : model.variables()) kinds.push_back(v.kind);

  if (latent) {
    const auto h = *latent;
    const double b = eq[center].count(h) ? eq[center][h] : 0.0;
    if (std::abs(b) <= tol) throw ModelError("zero coefficient from " + model.name(h) + " into " + model.name(center));
    auto rest = eq[center];
    rest.erase(h);
    for (auto k : children_in(eq, h)) {
      if (k == center) continue;
      const double ratio = eq[k][h] / b;
      eq[k].erase(h);
      eq[k][center] += ratio;
      add_scaled(eq[k], rest, -ratio);
      eq[k][h] = -ratio;
    }
    eq[center][h] = 1.0;
  }

  if (new_center) {
    const auto z = *new_center;
    const double a = eq[z].count(center) ? eq[z][center] : 0.0;
    if (std::abs(a) <= tol) throw ModelError("zero coefficient from " + model.name(center) + " into " + model.name(z));
    auto pz = eq[z];
    pz.erase(center);
    const auto kids = children_in(eq, center);
    const auto old_center = eq[center];

    eq[z] = pz;
    add_scaled(eq[z], old_center, a);
    eq[center].clear();
    eq[center][z] = 1.0 / a;
    add_scaled(eq[center], pz, -1.0 / a);
    for (auto k : kids) {
      if (k == z) continue;
      const double coef = eq[k][center];
      eq[k].erase(center);
      eq[k][z] += coef / a;
      add_scaled(eq[k], pz, -coef / a);
    }
    kinds[center] = VariableKind::Mleaf;
    kinds[z] = VariableKind::MeasuredCogent;
  }

  Rewrite out;
  out.cancellations = cancel(eq, tol);
  out.model = rebuild(model, kinds, eq);
  return out;
}

CanonicalModel switch_center(const CanonicalModel& model, std::size_t center, std::optional<std::size_t> new_center,
                             std::optional<std::size_t> latent, double tol) {
  return switch_center_detailed(model, center, new_center, latent, tol).model;
}

std::vector<CanonicalModel> enumerate_equivalents(const CanonicalModel& model, const OrderedGrouping& grouping,
                                                  double tol) {
  struct Options {
    std::size_t center;
    std::vector<std::size_t> centers;
    std::vector<std::optional<std::size_t>> latents;
  };
  std::vector<Options> groups;
  for (const auto& g : grouping.groups) {
    if (g.kind != GroupKind::Cogent || !g.center) continue;
    Options o{*g.center, {*g.center}, {std::nullopt}};
    for (auto r : g.rows)
      if (r != *g.center) o.centers.push_back(r);
    for (auto n : g.noises)
      if (n != *g.center) o.latents.push_back(n);
    groups.push_back(std::move(o));
  }

  std::vector<CanonicalModel> out;
  std::vector<std::size_t> ci(groups.size(), 0), li(groups.size(), 0);
  for (;;) {
    CanonicalModel m = model;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& o = groups[g];
      if (ci[g] == 0 && li[g] == 0) continue;
      m = switch_center(m, o.center, ci[g] ? std::optional(o.centers[ci[g]]) : std::nullopt, o.latents[li[g]], tol);
    }
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(std::move(m));

    bool more = false;
    for (std::size_t g = groups.size(); g-- > 0 && !more;) {
      if (++li[g] < groups[g].latents.size()) more = true;
      else if (li[g] = 0; ++ci[g] < groups[g].centers.size()) more = true;
      else ci[g] = 0;
    }
    if (!more) break;
  }
  return out;
}

Rewrite reduce_latent_detailed(const CanonicalModel& model, std::size_t latent, std::size_t mleaf, double tol) {
  if (!is_minimality_witness(model, latent, mleaf))
    throw ModelError("(" + model.name(latent) + ", " + model.name(mleaf) + ") is not a minimality witness");
  auto eq = equations_of(model);
  const double b = eq[mleaf][latent];
  if (std::abs(b) <= tol) throw ModelError("zero coefficient from " + model.name(latent) + " into " + model.name(mleaf));
  auto rest = eq[mleaf];
  rest.erase(latent);
  for (auto k : children_in(eq, latent)) {
    if (k == mleaf) continue;
    const double ratio = eq[k][latent] / b;
    eq[k].erase(latent);
    eq[k][mleaf] += ratio;
    add_scaled(eq[k], rest, -ratio);
  }
  eq[mleaf].erase(latent);

  std::vector<VariableKind> kinds;
  for (const auto& v : model.variables()) kinds.push_back(v.kind);
  kinds[mleaf] = VariableKind::MeasuredCogent;

  Rewrite out;
  out.cancellations = cancel(eq, tol);
  for (auto& c : out.cancellations) {
    if (c.src > latent) --c.src;
    if (c.dst > latent) --c.dst;
  }
  out.model = rebuild(model, kinds, eq, latent);
  return out;
}

CanonicalModel reduce_latent(const CanonicalModel& model, std::size_t latent, std::size_t mleaf, double tol) {
  return reduce_latent_detailed(model, latent, mleaf, tol).model;
}

// ---------------------------------------------------------------------------

namespace {

struct Iso {
  const CausalDiagram& da;
  const CausalDiagram& db;
  const CanonicalModel& a;
  const CanonicalModel& b;
  std::vector<std::size_t> order;
  std::vector<std::optional<std::size_t>> map;
  std::vector<bool> used;

  auto signature(const CanonicalModel& m, const CausalDiagram& d, std::size_t v) const {
    return std::tuple(static_cast<int>(m.kind(v)), d.in[v].size(), d.out[v].size());
  }

  bool consistent(std::size_t u, std::size_t v) const {
    for (std::size_t w = 0; w < map.size(); ++w) {
      if (!map[w]) continue;
      if (da.has_edge(u, w) != db.has_edge(v, *map[w])) return false;
      if (da.has_edge(w, u) != db.has_edge(*map[w], v)) return false;
    }
    return true;
  }

  bool search(std::size_t depth) {
    if (depth == order.size()) return true;
    const auto u = order[depth];
    for (std::size_t v = 0; v < b.size(); ++v) {
      if (used[v] || signature(a, da, u) != signature(b, db, v) || !consistent(u, v)) continue;
      map[u] = v;
      used[v] = true;
      if (search(depth + 1)) return true;
      map[u].reset();
      used[v] = false;
    }
    return false;
  }
};

}  // namespace

bool same_unlabeled_structure(const CanonicalModel& a, const CanonicalModel& b) {
  if (a.size() != b.size()) return false;
  const auto da = causal_diagram(a);
  const auto db = causal_diagram(b);
  if (da.edge_count() != db.edge_count()) return false;
  Iso iso{da, db, a, b, {}, std::vector<std::optional<std::size_t>>(a.size()), std::vector<bool>(b.size(), false)};

  std::multiset<std::tuple<int, std::size_t, std::size_t>> sa, sb;
  for (std::size_t v = 0; v < a.size(); ++v) sa.insert(iso.signature(a, da, v));
  for (std::size_t v = 0; v < b.size(); ++v) sb.insert(iso.signature(b, db, v));
  if (sa != sb) return false;

  for (std::size_t v = 0; v < a.size(); ++v) iso.order.push_back(v);
  std::stable_sort(iso.order.begin(), iso.order.end(),
                   [&](std::size_t x, std::size_t y) { return iso.signature(a, da, x) < iso.signature(a, da, y); });
  return iso.search(0);
}

bool models_equal_mixing(const CanonicalModel& a, const CanonicalModel& b, double tol) {
  const auto wa = build_w_star(a);
  const auto wb = build_w_star(b);
  if (wa.rows() != wb.rows() || wa.cols() != wb.cols()) return false;
  const auto aligned = align_rows(wb, wa.row_labels);
  if (!aligned) return false;
  return match_up_to_permutation_scaling(wa.values, aligned->values, tol).has_value();
}

namespace {

bool close(double x, double y, double tol) {
  return std::abs(x - y) <= tol * std::max({1.0, std::abs(x), std::abs(y)});
}

}  // namespace

bool equal_up_to_latent_scaling(const CanonicalModel& a, const CanonicalModel& b, double tol) {
  if (a.size() != b.size()) return false;
  std::vector<std::size_t> to_b(a.size(), 0);
  std::vector<std::size_t> la, lb;
  for (const auto& v : a.variables()) {
    if (v.kind == VariableKind::Unobserved) {
      la.push_back(v.id);
      continue;
    }
    const auto w = b.find(v.name);
    if (!w || b.kind(*w) != v.kind) return false;
    to_b[v.id] = *w;
  }
  lb = b.unobserved();
  if (la.size() != lb.size()) return false;

  for (const auto& m : a.measurements()) {
    const auto mb = b.measurement_of(to_b[m.measured]);
    if (!mb || *mb != to_b[m.measurement]) return false;
  }

  // Observable-to-observable edges must agree one to one.
  std::size_t plain_a = 0, plain_b = 0;
  for (const auto& e : a.edges()) {
    if (a.kind(e.src) == VariableKind::Unobserved) continue;
    ++plain_a;
    if (!b.has_edge(to_b[e.src], to_b[e.dst]) || !close(e.weight, b.weight(to_b[e.src], to_b[e.dst]), tol))
      return false;
  }
  for (const auto& e : b.edges())
    if (b.kind(e.src) != VariableKind::Unobserved) ++plain_b;
  if (plain_a != plain_b) return false;

  // Latents: same children, coefficients proportional.
  auto fits = [&](std::size_t ha, std::size_t hb) {
    const auto ca = a.children(ha);
    const auto cb = b.children(hb);
    if (ca.size() != cb.size()) return false;
    std::optional<double> ratio;
    for (auto c : ca) {
      const auto cm = to_b[c];
      if (!b.has_edge(hb, cm)) return false;
      const double wa = a.weight(ha, c), wb = b.weight(hb, cm);
      if (!ratio) ratio = wb / wa;
      if (!close(wa * *ratio, wb, tol)) return false;
    }
    return true;
  };
  std::vector<bool> used(lb.size(), false);
  std::function<bool(std::size_t)> assign = [&](std::size_t i) {
    if (i == la.size()) return true;
    for (std::size_t j = 0; j < lb.size(); ++j) {
      if (used[j] || !fits(la[i], lb[j])) continue;
      used[j] = true;
      if (assign(i + 1)) return true;
      used[j] = false;
    }
    return false;
  };
  return assign(0);
}

}  // namespace lvsem
