#include "lvsem/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "graph_util.hpp"

namespace lvsem {

namespace {

using Index = Eigen::Index;

Index ix(std::size_t i) { return static_cast<Index>(i); }

}  // namespace

std::string_view to_string(StepOutcome outcome) {
  switch (outcome) {
    case StepOutcome::CogentGroup: return "cogent";
    case StepOutcome::ObservedCogentGroup: return "observed-cogent";
    case StepOutcome::MleafAndUnobserved: return "mleaf+unobserved";
  }
  return "?";
}

std::size_t AogRecovery::cogent_groups() const {
  return static_cast<std::size_t>(std::count_if(grouping.groups.begin(), grouping.groups.end(),
                                                 [](const Group& g) { return g.kind == GroupKind::Cogent; }));
}

AogRecovery recover_aog(const MixingMatrix& wstar, double tol) {
  const auto rows = static_cast<std::size_t>(wstar.rows());
  const auto cols = static_cast<std::size_t>(wstar.cols());
  if (wstar.observability.size() != rows) throw MixingError("observability flags do not cover every row");
  const auto sp = support(wstar.values, tol);
  const auto& n = sp.row_counts;
  const auto& m = sp.col_counts;

  std::vector<bool> row_alive(rows, true), col_alive(cols, true);
  std::vector<Group> unobserved, cogent, mleaf;
  AogRecovery out;

  auto live_support = [&](std::size_t r) {
    std::vector<std::size_t> s;
    for (std::size_t j = 0; j < cols; ++j)
      if (col_alive[j] && sp.mask(ix(r), ix(j))) s.push_back(j);
    return s;
  };
  auto singleton_rows = [](std::size_t r) { return Group{GroupKind::MleafOnly, std::nullopt, {r}, {}}; };
  auto singleton_noise = [](std::size_t c) { return Group{GroupKind::UnobservedOnly, std::nullopt, {}, {c}}; };

  for (std::size_t iteration = 1;; ++iteration) {
    std::optional<std::size_t> w;
    std::size_t best = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (!row_alive[r]) continue;
      const auto cnt = live_support(r).size();
      if (!w || cnt < best || (cnt == best && n[r] < n[*w])) {
        w = r;
        best = cnt;
      }
    }
    if (!w) {
      for (std::size_t j = 0; j < cols; ++j)
        if (col_alive[j]) throw RecoveryError(iteration, "column " + std::to_string(j) + " was never assigned");
      break;
    }

    RecoveryStep step;
    step.picked_row = *w;
    step.n_i = live_support(*w);
    if (step.n_i.empty())
      throw RecoveryError(iteration, "row '" + wstar.row_labels[*w] + "' has no remaining support");
    for (std::size_t r = 0; r < rows; ++r)
      if (row_alive[r] && live_support(r) == step.n_i) step.z_i.push_back(r);
    for (auto r : step.z_i)
      if (n[r] == n[*w]) step.z_j.push_back(r);
    std::size_t m_min = rows + 1;
    for (auto c : step.n_i) m_min = std::min(m_min, m[c]);
    for (auto c : step.n_i)
      if (m[c] == m_min) step.n_j.push_back(c);
    step.n_m = step.n_j.front();

    for (std::size_t r = 0; r < rows && !step.w0_has_zero; ++r) {
      if (!sp.mask(ix(r), ix(step.n_m))) continue;
      for (std::size_t c = 0; c < cols; ++c)
        if (sp.mask(ix(*w), ix(c)) && std::abs(wstar.values(ix(r), ix(c))) <= tol) {
          step.w0_has_zero = true;
          break;
        }
    }

    std::vector<std::size_t> observed_rows;
    for (auto r : step.z_j)
      if (!wstar.measured(r)) observed_rows.push_back(r);
    if (observed_rows.size() > 1)
      throw RecoveryError(iteration, "rows '" + wstar.row_labels[observed_rows[0]] + "' and '" +
                                         wstar.row_labels[observed_rows[1]] +
                                         "' are both observed and share their support");

    for (auto r : step.z_i)
      if (n[r] != n[*w]) mleaf.push_back(singleton_rows(r));
    for (auto c : step.n_i)
      if (m[c] != m_min) unobserved.push_back(singleton_noise(c));

    if (!observed_rows.empty()) {
      if (step.w0_has_zero)
        throw RecoveryError(iteration, "observed row '" + wstar.row_labels[observed_rows[0]] +
                                           "' has minimal support but the support test found a zero");
      step.outcome = StepOutcome::ObservedCogentGroup;
      cogent.push_back(Group{GroupKind::Cogent, observed_rows[0], {observed_rows[0]}, step.n_j});
      for (auto r : step.z_j)
        if (r != observed_rows[0]) mleaf.push_back(singleton_rows(r));
    } else if (step.w0_has_zero) {
      step.outcome = StepOutcome::MleafAndUnobserved;
      for (auto r : step.z_j) mleaf.push_back(singleton_rows(r));
      for (auto c : step.n_j) unobserved.push_back(singleton_noise(c));
    } else {
      step.outcome = StepOutcome::CogentGroup;
      cogent.push_back(Group{GroupKind::Cogent, *w, step.z_j, step.n_j});
    }

    for (auto r : step.z_i) row_alive[r] = false;
    for (auto c : step.n_i) col_alive[c] = false;
    out.trace.push_back(std::move(step));
  }

  auto& groups = out.grouping.groups;
  groups.insert(groups.end(), unobserved.begin(), unobserved.end());
  groups.insert(groups.end(), cogent.begin(), cogent.end());
  groups.insert(groups.end(), mleaf.begin(), mleaf.end());

  // Ancestral pairs: group a's noise reaches a row of group b.
  for (std::size_t a = 0; a < groups.size(); ++a)
    for (std::size_t b = 0; b < groups.size(); ++b) {
      if (a == b) continue;
      bool hit = false;
      for (auto c : groups[a].noises)
        for (auto r : groups[b].rows)
          hit = hit || sp.mask(ix(r), ix(c));
      if (hit) out.grouping.dag.emplace_back(a, b);
    }
  return out;
}

OrderedGrouping project_grouping(const CanonicalModel& model, const OrderedGrouping& grouping,
                                 const MixingMatrix& wstar) {
  OrderedGrouping out;
  auto row = [&](std::size_t v) {
    const auto r = wstar.row_of(model.row_label(v));
    if (!r) throw MixingError("no row for variable " + model.name(v));
    return *r;
  };
  for (const auto& g : grouping.groups) {
    Group p;
    p.kind = g.kind;
    if (g.center) p.center = row(*g.center);
    for (auto v : g.rows) p.rows.push_back(row(v));
    for (auto v : g.noises) {
      const auto c = wstar.col_of(noise_label(model.name(v)));
      if (!c) throw MixingError("no column for noise of " + model.name(v));
      p.noises.push_back(*c);
    }
    std::sort(p.rows.begin(), p.rows.end());
    std::sort(p.noises.begin(), p.noises.end());
    out.groups.push_back(std::move(p));
  }
  out.dag = grouping.dag;
  return out;
}

bool same_groups(const OrderedGrouping& a, const OrderedGrouping& b) {
  using Key = std::tuple<int, std::vector<std::size_t>, std::vector<std::size_t>>;
  auto keys = [](const OrderedGrouping& g) {
    std::multiset<Key> out;
    for (const auto& grp : g.groups) {
      auto r = grp.rows, c = grp.noises;
      std::sort(r.begin(), r.end());
      std::sort(c.begin(), c.end());
      out.emplace(static_cast<int>(grp.kind), std::move(r), std::move(c));
    }
    return out;
  };
  return keys(a) == keys(b);
}

// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd pick(const Eigen::MatrixXd& w, const std::vector<std::size_t>& r, const std::vector<std::size_t>& c) {
  Eigen::MatrixXd out(ix(r.size()), ix(c.size()));
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) out(ix(i), ix(j)) = w(ix(r[i]), ix(c[j]));
  return out;
}

bool acyclic(const Eigen::MatrixXd& c, double tol) {
  const auto p = static_cast<std::size_t>(c.rows());
  std::vector<std::vector<std::size_t>> out(p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j)
      if (i != j && std::abs(c(ix(i), ix(j))) > tol) out[j].push_back(i);
  return detail::kahn_order(out).size() == p;
}

}  // namespace

ClassEnumeration enumerate_class(const MixingMatrix& wstar, const OrderedGrouping& grouping, double tol) {
  const auto rows = static_cast<std::size_t>(wstar.rows());
  const auto cols = static_cast<std::size_t>(wstar.cols());
  std::vector<int> row_seen(rows, 0), col_seen(cols, 0);
  std::vector<const Group*> cogent;
  for (const auto& g : grouping.groups) {
    for (auto r : g.rows) {
      if (r >= rows) throw MixingError("grouping row out of range");
      ++row_seen[r];
    }
    for (auto c : g.noises) {
      if (c >= cols) throw MixingError("grouping column out of range");
      ++col_seen[c];
    }
    if (g.kind == GroupKind::Cogent) {
      if (g.rows.empty() || g.noises.empty()) throw MixingError("cogent group without a row or a noise");
      cogent.push_back(&g);
    }
  }
  for (auto s : row_seen)
    if (s != 1) throw MixingError("grouping does not partition the rows");
  for (auto s : col_seen)
    if (s != 1) throw MixingError("grouping does not partition the columns");

  std::vector<std::vector<std::size_t>> row_options, col_options;
  for (const auto* g : cogent) {
    std::vector<std::size_t> forced;
    for (auto r : g->rows)
      if (!wstar.measured(r)) forced.push_back(r);
    if (forced.size() > 1) throw MixingError("cogent group holds more than one observed row");
    row_options.push_back(forced.empty() ? g->rows : forced);
    col_options.push_back(g->noises);
  }

  ClassEnumeration out;
  const auto k = cogent.size();
  std::vector<std::size_t> ri(k, 0), ci(k, 0);
  for (;;) {
    std::vector<CenterChoice> centers(k);
    std::vector<std::size_t> r_sel(k), c_sel(k);
    for (std::size_t g = 0; g < k; ++g) {
      r_sel[g] = row_options[g][ri[g]];
      c_sel[g] = col_options[g][ci[g]];
      centers[g] = {r_sel[g], c_sel[g]};
    }

    std::vector<std::size_t> r_rest, c_rest;
    for (std::size_t r = 0; r < rows; ++r)
      if (std::find(r_sel.begin(), r_sel.end(), r) == r_sel.end()) r_rest.push_back(r);
    for (std::size_t c = 0; c < cols; ++c)
      if (std::find(c_sel.begin(), c_sel.end(), c) == c_sel.end()) c_rest.push_back(c);

    Eigen::MatrixXd wn = wstar.values;
    std::string reason;
    for (std::size_t g = 0; g < k && reason.empty(); ++g) {
      const double pivot = wstar.values(ix(r_sel[g]), ix(c_sel[g]));
      if (std::abs(pivot) <= tol) reason = "zero pivot at row " + wstar.row_labels[r_sel[g]];
      else wn.col(ix(c_sel[g])) /= pivot;
    }

    RecoveredModel rec;
    if (reason.empty()) {
      const Eigen::MatrixXd wrc = pick(wn, r_sel, c_sel);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(wrc);
      if (k > 0 && !lu.isInvertible()) reason = "singular center block";
      else {
        const Eigen::MatrixXd inv = k > 0 ? Eigen::MatrixXd(lu.inverse()) : Eigen::MatrixXd(0, 0);
        rec.c = Eigen::MatrixXd::Identity(ix(k), ix(k)) - inv;
        rec.b_cogent = inv * pick(wn, r_sel, c_rest);
        rec.d = pick(wn, r_rest, c_sel) * inv;
        rec.b_leaf = pick(wn, r_rest, c_rest) - rec.d * wrc * rec.b_cogent;
        for (std::size_t i = 0; i < k && reason.empty(); ++i)
          if (std::abs(rec.c(ix(i), ix(i))) > tol) reason = "nonzero diagonal in C";
        if (reason.empty() && !acyclic(rec.c, tol)) reason = "C is cyclic";
      }
    }

    if (reason.empty()) {
      for (std::size_t i = 0; i < k; ++i) rec.c(ix(i), ix(i)) = 0.0;
      rec.centers = centers;
      rec.cogent_rows = r_sel;
      rec.mleaf_rows = r_rest;
      rec.latent_cols = c_rest;
      rec.row_labels = wstar.row_labels;
      rec.col_labels = wstar.col_labels;
      rec.observability = wstar.observability;
      rec.row_variables = wstar.row_variables;
      out.models.push_back(std::move(rec));
    } else {
      out.rejected.push_back({centers, reason});
    }

    // Odometer over (row, col) choices, last group fastest.
    bool more = false;
    for (std::size_t g = k; g-- > 0 && !more;) {
      if (++ci[g] < col_options[g].size()) more = true;
      else if (ci[g] = 0; ++ri[g] < row_options[g].size()) more = true;
      else ri[g] = 0;
    }
    if (!more) break;
  }

  std::sort(out.models.begin(), out.models.end(),
            [](const RecoveredModel& a, const RecoveredModel& b) { return a.centers < b.centers; });
  std::sort(out.rejected.begin(), out.rejected.end(),
            [](const RejectedSelection& a, const RejectedSelection& b) { return a.centers < b.centers; });
  return out;
}

std::size_t edge_count(const RecoveredModel& model, double tol) {
  auto count = [tol](const Eigen::MatrixXd& m) {
    return static_cast<std::size_t>((m.array().abs() > tol).count());
  };
  return count(model.b_leaf) + count(model.b_cogent) + count(model.c) + count(model.d);
}

std::vector<RecoveredModel> dog_filter(const std::vector<RecoveredModel>& models, double tol) {
  if (models.empty()) throw std::invalid_argument("dog_filter: empty class");
  std::size_t best = edge_count(models.front(), tol);
  for (const auto& m : models) best = std::min(best, edge_count(m, tol));
  std::vector<RecoveredModel> out;
  for (const auto& m : models)
    if (edge_count(m, tol) == best) out.push_back(m);
  return out;
}

MixingMatrix rebuild_w_star(const RecoveredModel& model) {
  const auto k = model.cogent_rows.size();
  const auto l = model.mleaf_rows.size();
  const auto h = model.latent_cols.size();
  const auto rows = k + l;
  const Eigen::MatrixXd inv =
      k > 0 ? Eigen::MatrixXd((Eigen::MatrixXd::Identity(ix(k), ix(k)) - model.c).inverse()) : Eigen::MatrixXd(0, 0);

  MixingMatrix w;
  w.values = Eigen::MatrixXd::Zero(ix(rows), ix(h + k));
  for (std::size_t i = 0; i < k; ++i) {
    const auto r = ix(model.cogent_rows[i]);
    w.values.block(r, 0, 1, ix(h)) = (inv * model.b_cogent).row(ix(i));
    w.values.block(r, ix(h), 1, ix(k)) = inv.row(ix(i));
  }
  for (std::size_t i = 0; i < l; ++i) {
    const auto r = ix(model.mleaf_rows[i]);
    w.values.block(r, 0, 1, ix(h)) = (model.b_leaf + model.d * inv * model.b_cogent).row(ix(i));
    w.values.block(r, ix(h), 1, ix(k)) = (model.d * inv).row(ix(i));
  }
  w.row_labels = model.row_labels;
  w.observability = model.observability;
  w.row_variables = model.row_variables;
  auto col_label = [&](std::size_t c) {
    return c < model.col_labels.size() ? model.col_labels[c] : std::to_string(c);
  };
  for (auto c : model.latent_cols) w.col_labels.push_back(col_label(c));
  for (const auto& ch : model.centers) w.col_labels.push_back(col_label(ch.col));
  return w;
}

CanonicalModel to_model(const RecoveredModel& model, double tol) {
  CanonicalModel out;
  std::vector<std::size_t> latent_id;
  for (auto c : model.latent_cols) {
    const auto label = c < model.col_labels.size() ? model.col_labels[c] : std::to_string(c);
    latent_id.push_back(out.add_unobserved("H[" + label + "]"));
  }

  const auto rows = model.row_labels.size();
  std::vector<std::size_t> row_id(rows, 0);
  std::vector<bool> is_center(rows, false);
  for (auto r : model.cogent_rows) is_center[r] = true;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& label = model.row_labels[r];
    const bool measured = r < model.observability.size() && model.observability[r] == Observability::Measured;
    if (!measured) {
      if (!is_center[r]) throw ModelError("observed row '" + label + "' is not a center");
      row_id[r] = out.add_observed(label);
      continue;
    }
    std::string name = r < model.row_variables.size() && !model.row_variables[r].empty() ? model.row_variables[r]
                                                                                      : "Z[" + label + "]";
    row_id[r] = out.add_measured(std::move(name), label, !is_center[r]);
  }

  auto link = [&](std::size_t src, std::size_t dst, double w) {
    if (std::abs(w) > tol) out.add_edge(src, dst, w);
  };
  for (std::size_t i = 0; i < model.cogent_rows.size(); ++i) {
    for (std::size_t hh = 0; hh < latent_id.size(); ++hh)
      link(latent_id[hh], row_id[model.cogent_rows[i]], model.b_cogent(ix(i), ix(hh)));
    for (std::size_t j = 0; j < model.cogent_rows.size(); ++j)
      if (i != j) link(row_id[model.cogent_rows[j]], row_id[model.cogent_rows[i]], model.c(ix(i), ix(j)));
  }
  for (std::size_t i = 0; i < model.mleaf_rows.size(); ++i) {
    for (std::size_t hh = 0; hh < latent_id.size(); ++hh)
      link(latent_id[hh], row_id[model.mleaf_rows[i]], model.b_leaf(ix(i), ix(hh)));
    for (std::size_t j = 0; j < model.cogent_rows.size(); ++j)
      link(row_id[model.cogent_rows[j]], row_id[model.mleaf_rows[i]], model.d(ix(i), ix(j)));
  }
  return out;
}

}  // namespace lvsem
