#include "lvsem/model.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <set>

#include "graph_util.hpp"

namespace lvsem {

std::string_view to_string(VariableKind kind) {
  switch (kind) {
    case VariableKind::Unobserved: return "unobserved";
    case VariableKind::ObservedCogent: return "observed";
    case VariableKind::MeasuredCogent: return "measured";
    case VariableKind::Mleaf: return "mleaf";
    case VariableKind::Measurement: return "measurement";
  }
  return "?";
}

VariableKind parse_kind(std::string_view text) {
  if (text == "unobserved") return VariableKind::Unobserved;
  if (text == "observed") return VariableKind::ObservedCogent;
  if (text == "measured") return VariableKind::MeasuredCogent;
  if (text == "mleaf") return VariableKind::Mleaf;
  if (text == "measurement") return VariableKind::Measurement;
  throw ModelError("unknown variable kind '" + std::string(text) + "'");
}

bool is_cogent(VariableKind kind) {
  return kind == VariableKind::ObservedCogent || kind == VariableKind::MeasuredCogent;
}

bool is_measured(VariableKind kind) {
  return kind == VariableKind::MeasuredCogent || kind == VariableKind::Mleaf;
}

bool is_structural(VariableKind kind) { return kind != VariableKind::Measurement; }

// ---------------------------------------------------------------------------

void CanonicalModel::check_id(std::size_t id) const {
  if (id >= variables_.size()) throw ModelError("unknown variable id " + std::to_string(id));
}

std::size_t CanonicalModel::add_variable(std::string name, VariableKind kind) {
  const std::size_t id = variables_.size();
  variables_.push_back({id, std::move(name), kind});
  return id;
}

void CanonicalModel::add_edge(std::size_t src, std::size_t dst, double weight, std::string text) {
  check_id(src);
  check_id(dst);
  edges_.push_back({src, dst, weight, std::move(text)});
}

void CanonicalModel::add_measurement(std::size_t measured, std::size_t measurement) {
  check_id(measured);
  check_id(measurement);
  measurements_.push_back({measured, measurement});
}

std::size_t CanonicalModel::add_unobserved(std::string name) {
  return add_variable(std::move(name), VariableKind::Unobserved);
}

std::size_t CanonicalModel::add_observed(std::string name) {
  return add_variable(std::move(name), VariableKind::ObservedCogent);
}

std::size_t CanonicalModel::add_measured(std::string name, std::string measurement_name, bool mleaf) {
  const auto z = add_variable(std::move(name), mleaf ? VariableKind::Mleaf : VariableKind::MeasuredCogent);
  const auto x = add_variable(std::move(measurement_name), VariableKind::Measurement);
  add_measurement(z, x);
  return z;
}

const Variable& CanonicalModel::variable(std::size_t id) const {
  check_id(id);
  return variables_[id];
}

std::optional<std::size_t> CanonicalModel::find(std::string_view name) const {
  for (const auto& v : variables_)
    if (v.name == name) return v.id;
  return std::nullopt;
}

std::size_t CanonicalModel::id_of(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw ModelError("unknown variable '" + std::string(name) + "'");
}

double CanonicalModel::weight(std::size_t src, std::size_t dst) const {
  for (const auto& e : edges_)
    if (e.src == src && e.dst == dst) return e.weight;
  return 0.0;
}

bool CanonicalModel::has_edge(std::size_t src, std::size_t dst) const {
  return std::any_of(edges_.begin(), edges_.end(),
                     [&](const Edge& e) { return e.src == src && e.dst == dst; });
}

std::vector<std::size_t> CanonicalModel::parents(std::size_t id) const {
  check_id(id);
  std::vector<std::size_t> out;
  for (const auto& e : edges_)
    if (e.dst == id) out.push_back(e.src);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> CanonicalModel::children(std::size_t id) const {
  check_id(id);
  std::vector<std::size_t> out;
  for (const auto& e : edges_)
    if (e.src == id) out.push_back(e.dst);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<std::size_t> CanonicalModel::measurement_of(std::size_t measured) const {
  for (const auto& m : measurements_)
    if (m.measured == measured) return m.measurement;
  return std::nullopt;
}

std::optional<std::size_t> CanonicalModel::measured_by(std::size_t measurement) const {
  for (const auto& m : measurements_)
    if (m.measurement == measurement) return m.measured;
  return std::nullopt;
}

std::vector<std::size_t> CanonicalModel::of_kind(VariableKind kind) const {
  std::vector<std::size_t> out;
  for (const auto& v : variables_)
    if (v.kind == kind) out.push_back(v.id);
  return out;
}

std::vector<std::size_t> CanonicalModel::cogent() const {
  auto out = of_kind(VariableKind::MeasuredCogent);
  const auto ys = of_kind(VariableKind::ObservedCogent);
  out.insert(out.end(), ys.begin(), ys.end());
  return out;
}

std::vector<std::size_t> CanonicalModel::observable_sources() const {
  std::vector<std::size_t> out;
  for (const auto& v : variables_)
    if (v.kind != VariableKind::Unobserved && v.kind != VariableKind::Measurement) out.push_back(v.id);
  return out;
}

std::string CanonicalModel::row_label(std::size_t id) const {
  if (is_measured(kind(id))) {
    if (auto x = measurement_of(id)) return name(*x);
  }
  return name(id);
}

// ---------------------------------------------------------------------------

bool CausalDiagram::has_edge(std::size_t u, std::size_t v) const {
  return std::find(out[u].begin(), out[u].end(), v) != out[u].end();
}

std::size_t CausalDiagram::edge_count() const {
  std::size_t n = 0;
  for (const auto& o : out) n += o.size();
  return n;
}

CausalDiagram causal_diagram(const CanonicalModel& model) {
  CausalDiagram d;
  d.node_count = model.size();
  d.out.assign(d.node_count, {});
  d.in.assign(d.node_count, {});
  auto link = [&](std::size_t u, std::size_t v) {
    if (u >= d.node_count || v >= d.node_count || d.has_edge(u, v)) return;
    d.out[u].push_back(v);
    d.in[v].push_back(u);
  };
  for (const auto& e : model.edges()) link(e.src, e.dst);
  for (const auto& m : model.measurements()) link(m.measured, m.measurement);
  for (auto& o : d.out) std::sort(o.begin(), o.end());
  for (auto& i : d.in) std::sort(i.begin(), i.end());
  return d;
}

std::vector<std::size_t> topological_order(const CausalDiagram& diagram) {
  auto order = detail::kahn_order(diagram.out);
  if (order.size() != diagram.node_count) throw ModelError("causal diagram has a cycle");
  return order;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::UnknownVariable: return "unknown-variable";
    case Rule::DuplicateName: return "duplicate-name";
    case Rule::SelfLoop: return "self-loop";
    case Rule::DuplicateEdge: return "duplicate-edge";
    case Rule::ZeroWeight: return "zero-weight-edge";
    case Rule::Cycle: return "cycle";
    case Rule::EdgeIntoUnobserved: return "edge-into-unobserved";
    case Rule::EdgeTouchesMeasurement: return "edge-touches-measurement";
    case Rule::ConfounderWithOneChild: return "confounder-with-one-child";
    case Rule::MleafWithExtraChild: return "mleaf-with-extra-child";
    case Rule::MleafWithoutParents: return "mleaf-without-parents";
    case Rule::MeasuredCogentWithoutChildren: return "measured-cogent-without-children";
    case Rule::MeasurementLinkInvalid: return "measurement-link-invalid";
    case Rule::MissingMeasurement: return "missing-measurement";
    case Rule::DuplicateMeasurement: return "duplicate-measurement";
  }
  return "?";
}

std::vector<Violation> validate_canonical(const CanonicalModel& model) {
  std::vector<Violation> out;
  const auto n = model.size();
  const auto& vars = model.variables();

  {
    std::map<std::string, std::size_t> seen;
    for (const auto& v : vars) {
      auto [it, fresh] = seen.emplace(v.name, v.id);
      if (!fresh) out.push_back({Rule::DuplicateName, {it->second, v.id}, v.name});
    }
  }

  std::set<std::pair<std::size_t, std::size_t>> edge_set;
  bool ids_ok = true;
  for (const auto& e : model.edges()) {
    if (e.src >= n || e.dst >= n) {
      out.push_back({Rule::UnknownVariable, {e.src, e.dst}, "edge endpoint out of range"});
      ids_ok = false;
      continue;
    }
    if (e.src == e.dst) out.push_back({Rule::SelfLoop, {e.src, e.dst}, vars[e.src].name});
    if (!edge_set.emplace(e.src, e.dst).second)
      out.push_back({Rule::DuplicateEdge, {e.src, e.dst}, vars[e.src].name + "->" + vars[e.dst].name});
    if (e.weight == 0.0)
      out.push_back({Rule::ZeroWeight, {e.src, e.dst}, vars[e.src].name + "->" + vars[e.dst].name});
    if (vars[e.dst].kind == VariableKind::Unobserved)
      out.push_back({Rule::EdgeIntoUnobserved, {e.src, e.dst}, vars[e.dst].name});
    if (vars[e.src].kind == VariableKind::Measurement || vars[e.dst].kind == VariableKind::Measurement)
      out.push_back({Rule::EdgeTouchesMeasurement, {e.src, e.dst},
                     vars[e.src].name + "->" + vars[e.dst].name});
  }
  if (!ids_ok) return out;

  // Measurement pairing: every measured variable owns exactly one measurement
  // and every measurement belongs to exactly one measured variable.
  std::vector<int> owned(n, 0), owner(n, 0);
  for (const auto& m : model.measurements()) {
    if (m.measured >= n || m.measurement >= n || !is_measured(vars[m.measured].kind) ||
        vars[m.measurement].kind != VariableKind::Measurement) {
      out.push_back({Rule::MeasurementLinkInvalid, {m.measured, m.measurement}, "bad measurement pair"});
      continue;
    }
    ++owned[m.measured];
    ++owner[m.measurement];
  }
  for (const auto& v : vars) {
    if (is_measured(v.kind) && owned[v.id] == 0) out.push_back({Rule::MissingMeasurement, {v.id}, v.name});
    if (is_measured(v.kind) && owned[v.id] > 1) out.push_back({Rule::DuplicateMeasurement, {v.id}, v.name});
    if (v.kind == VariableKind::Measurement && owner[v.id] == 0)
      out.push_back({Rule::MissingMeasurement, {v.id}, v.name});
    if (v.kind == VariableKind::Measurement && owner[v.id] > 1)
      out.push_back({Rule::DuplicateMeasurement, {v.id}, v.name});
  }

  const auto diagram = causal_diagram(model);
  const auto order = detail::kahn_order(diagram.out);
  if (order.size() != n) {
    std::vector<bool> done(n, false);
    for (auto v : order) done[v] = true;
    std::vector<std::size_t> stuck;
    for (std::size_t v = 0; v < n; ++v)
      if (!done[v]) stuck.push_back(v);
    out.push_back({Rule::Cycle, stuck, "directed cycle"});
  }

  for (const auto& v : vars) {
    const auto ch = model.children(v.id);
    const auto pa = model.parents(v.id);
    switch (v.kind) {
      case VariableKind::Unobserved:
        if (ch.size() < 2) out.push_back({Rule::ConfounderWithOneChild, {v.id}, v.name});
        break;
      case VariableKind::Mleaf:
        for (auto c : ch) out.push_back({Rule::MleafWithExtraChild, {v.id, c}, v.name + "->" + vars[c].name});
        if (pa.empty()) out.push_back({Rule::MleafWithoutParents, {v.id}, v.name});
        break;
      case VariableKind::MeasuredCogent:
        if (ch.empty()) out.push_back({Rule::MeasuredCogentWithoutChildren, {v.id}, v.name});
        break;
      default:
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> ancestors(const CanonicalModel& model, std::size_t v) {
  model.variable(v);
  const auto d = causal_diagram(model);
  return detail::reach(d.in, v);
}

std::vector<std::size_t> descendants(const CanonicalModel& model, std::size_t v) {
  model.variable(v);
  const auto d = causal_diagram(model);
  return detail::reach(d.out, v);
}

namespace detail {

std::vector<std::size_t> possible_parents_unchecked(const CanonicalModel& model, const CausalDiagram& d,
                                                    std::size_t v) {
  const auto an = reach(d.in, v);
  std::vector<std::size_t> out;
  for (auto a : an)
    if (model.kind(a) != VariableKind::Unobserved) out.push_back(a);
  for (auto m : model.mleafs()) {
    if (m == v) continue;
    const auto& pa = d.in[m];
    // The measurement link never points into an mleaf, so d.in is exactly Pa(m).
    if (std::all_of(pa.begin(), pa.end(),
                    [&](std::size_t p) { return std::binary_search(an.begin(), an.end(), p); }))
      out.push_back(m);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

std::vector<std::size_t> possible_parents(const CanonicalModel& model, std::size_t v) {
  const auto k = model.kind(v);
  if (k == VariableKind::Unobserved || k == VariableKind::Measurement)
    throw ModelError("possible_parents is defined for measured or observed variables only: " + model.name(v));
  return detail::possible_parents_unchecked(model, causal_diagram(model), v);
}

Eigen::MatrixXd total_effects(const CanonicalModel& model) {
  const auto n = model.size();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<std::vector<std::size_t>> out(n);
  for (const auto& e : model.edges()) out[e.src].push_back(e.dst);
  const auto order = detail::kahn_order(out);
  if (order.size() != n) throw ModelError("total_effects: structural graph is cyclic");
  std::vector<std::vector<const Edge*>> incoming(n);
  for (const auto& e : model.edges()) incoming[e.dst].push_back(&e);
  for (auto v : order) {
    const auto vi = static_cast<Eigen::Index>(v);
    for (const Edge* e : incoming[v]) {
      const auto p = static_cast<Eigen::Index>(e->src);
      t.row(vi) += e->weight * t.row(p);
      t(vi, p) += e->weight;
    }
  }
  return t;
}

// ---------------------------------------------------------------------------

std::string_view to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::Cogent: return "cogent";
    case GroupKind::MleafOnly: return "mleaf";
    case GroupKind::UnobservedOnly: return "unobserved";
  }
  return "?";
}

namespace {

bool subset_of(const std::vector<std::size_t>& a, const std::vector<std::size_t>& sorted_b) {
  return std::all_of(a.begin(), a.end(),
                     [&](std::size_t x) { return std::binary_search(sorted_b.begin(), sorted_b.end(), x); });
}

bool contains(const std::vector<std::size_t>& sorted, std::size_t x) {
  return std::binary_search(sorted.begin(), sorted.end(), x);
}

// Builds the grouping given, for each mleaf and unobserved variable, the
// cogent variable whose group it joins (if any).
OrderedGrouping assemble(const CanonicalModel& model, const std::map<std::size_t, std::size_t>& joins) {
  const auto n = model.size();
  std::vector<Group> groups;
  std::vector<std::optional<std::size_t>> group_of(n);

  for (auto c : model.cogent()) {
    Group g;
    g.kind = GroupKind::Cogent;
    g.center = c;
    g.rows.push_back(c);
    g.noises.push_back(c);
    group_of[c] = groups.size();
    groups.push_back(std::move(g));
  }
  for (const auto& v : model.variables()) {
    if (v.kind != VariableKind::Mleaf && v.kind != VariableKind::Unobserved) continue;
    const bool leaf = v.kind == VariableKind::Mleaf;
    if (auto it = joins.find(v.id); it != joins.end()) {
      auto& g = groups[*group_of[it->second]];
      (leaf ? g.rows : g.noises).push_back(v.id);
      group_of[v.id] = group_of[it->second];
    } else {
      Group g;
      g.kind = leaf ? GroupKind::MleafOnly : GroupKind::UnobservedOnly;
      (leaf ? g.rows : g.noises).push_back(v.id);
      group_of[v.id] = groups.size();
      groups.push_back(std::move(g));
    }
  }
  for (auto& g : groups) {
    std::sort(g.rows.begin(), g.rows.end());
    std::sort(g.noises.begin(), g.noises.end());
  }

  std::set<std::pair<std::size_t, std::size_t>> links;
  for (const auto& e : model.edges()) {
    if (!group_of[e.src] || !group_of[e.dst]) continue;
    if (*group_of[e.src] != *group_of[e.dst]) links.emplace(*group_of[e.src], *group_of[e.dst]);
  }

  std::vector<std::size_t> key(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    std::size_t k = n;
    for (auto r : groups[i].rows) k = std::min(k, r);
    for (auto r : groups[i].noises) k = std::min(k, r);
    key[i] = k;
  }
  std::vector<std::vector<std::size_t>> adj(groups.size());
  for (auto [a, b] : links) adj[a].push_back(b);
  const auto order = detail::kahn_order(adj, key);
  if (order.size() != groups.size()) throw ModelError("group graph is cyclic");

  std::vector<std::size_t> position(groups.size());
  OrderedGrouping out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    position[order[i]] = i;
    out.groups.push_back(groups[order[i]]);
  }
  for (auto [a, b] : links) out.dag.emplace_back(position[a], position[b]);
  std::sort(out.dag.begin(), out.dag.end());
  return out;
}

}  // namespace

OrderedGrouping compute_aog(const CanonicalModel& model) {
  const auto d = causal_diagram(model);
  std::map<std::size_t, std::size_t> joins;
  for (auto z : model.mleafs()) {
    const auto& pa = d.in[z];
    for (auto p : pa) {
      if (model.kind(p) != VariableKind::MeasuredCogent) continue;
      const auto an = detail::reach(d.in, p);
      std::vector<std::size_t> others;
      for (auto q : pa)
        if (q != p) others.push_back(q);
      if (subset_of(others, an)) {
        joins[z] = p;
        break;
      }
    }
  }
  for (auto h : model.unobserved()) {
    const auto ch = model.children(h);
    for (auto c : ch) {
      if (!is_cogent(model.kind(c))) continue;
      const auto de = detail::reach(d.out, c);
      std::vector<std::size_t> others;
      for (auto k : ch)
        if (k != c) others.push_back(k);
      if (subset_of(others, de)) {
        joins[h] = c;
        break;
      }
    }
  }
  return assemble(model, joins);
}

OrderedGrouping compute_dog(const CanonicalModel& model) {
  std::map<std::size_t, std::size_t> joins;
  for (auto z : model.mleafs()) {
    for (auto p : model.parents(z)) {
      if (model.kind(p) != VariableKind::MeasuredCogent) continue;
      if (!edge_identifiable_me(model, p, z)) {
        joins[z] = p;
        break;
      }
    }
  }
  // An unobserved variable joins its cogent child V_i only if swapping their
  // noises adds no edge: every other child (cogent or mleaf) already has V_i
  // and all of V_i's parents as parents.
  for (auto h : model.unobserved()) {
    const auto ch = model.children(h);
    for (auto c : ch) {
      if (!is_cogent(model.kind(c))) continue;
      const auto pa_c = model.parents(c);
      bool stuck = true;
      for (auto k : ch) {
        if (k == c) continue;
        const auto pa_k = model.parents(k);
        if (!contains(pa_k, c) || !subset_of(pa_c, pa_k)) {
          stuck = false;
          break;
        }
      }
      if (stuck) {
        joins[h] = c;
        break;
      }
    }
  }
  return assemble(model, joins);
}

bool edge_identifiable_me(const CanonicalModel& model, std::size_t cogent, std::size_t mleaf) {
  if (model.kind(cogent) != VariableKind::MeasuredCogent || model.kind(mleaf) != VariableKind::Mleaf ||
      !model.has_edge(cogent, mleaf))
    throw ModelError("edge_identifiable_me expects an edge from a measured cogent variable into an mleaf");
  const auto pa_l = model.parents(mleaf);
  const auto pa_i = model.parents(cogent);
  for (auto v : pa_l)
    if (v != cogent && !contains(pa_i, v)) return true;  // mleaf has an outside parent
  for (auto k : model.children(cogent)) {
    if (k == mleaf) continue;
    const auto pa_k = model.parents(k);
    if (!subset_of(pa_l, pa_k)) return true;  // sibling misses a parent of the mleaf
  }
  return false;
}

bool edge_identifiable_lv(const CanonicalModel& model, std::size_t latent, std::size_t cogent) {
  if (model.kind(latent) != VariableKind::Unobserved || !is_cogent(model.kind(cogent)) ||
      !model.has_edge(latent, cogent))
    throw ModelError("edge_identifiable_lv expects an edge from an unobserved into a cogent variable");
  const auto pa_i = model.parents(cogent);
  for (auto j : model.children(latent)) {
    if (j == cogent || !is_cogent(model.kind(j))) continue;
    const auto pa_j = model.parents(j);
    if (!contains(pa_j, cogent)) return true;  // sibling not a child of cogent
    if (!subset_of(pa_i, pa_j)) return true;   // parents not nested
  }
  return false;
}

bool is_minimality_witness(const CanonicalModel& model, std::size_t latent, std::size_t mleaf) {
  if (model.kind(latent) != VariableKind::Unobserved || model.kind(mleaf) != VariableKind::Mleaf ||
      !model.has_edge(latent, mleaf))
    return false;
  const auto d = causal_diagram(model);
  const auto an_z = detail::reach(d.in, mleaf);
  for (auto k : model.children(latent)) {
    if (k == mleaf) continue;
    if (!subset_of(an_z, detail::reach(d.in, k))) return false;
  }
  return true;
}

MinimalityResult is_minimal(const CanonicalModel& model) {
  for (auto h : model.unobserved())
    for (auto z : model.children(h))
      if (model.kind(z) == VariableKind::Mleaf && is_minimality_witness(model, h, z))
        return {false, MinimalityWitness{h, z}};
  return {};
}

}  // namespace lvsem
