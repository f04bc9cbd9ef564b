#include "lvsem/simgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "lvsem/assumptions.hpp"

namespace lvsem {

namespace {

constexpr const char* kCanonical = "canonical";
constexpr const char* kMinimal = "minimal";
constexpr const char* kConventional = "conventionalFaithful";
constexpr const char* kLvsemme = "lvsemmeFaithful";

std::string shortest(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

struct Draft {
  std::vector<std::size_t> hs, cogent, leaves;  // ids; cogent in topological order
  std::set<std::pair<std::size_t, std::size_t>> edges;
};

// One structural draw. Returns false when a required edge has no candidate.
bool draw_structure(const GeneratorConfig& cfg, std::mt19937_64& rng, CanonicalModel& model, Draft& draft) {
  std::bernoulli_distribution coin(cfg.edge_density);
  auto pick = [&](const std::vector<std::size_t>& from) {
    std::uniform_int_distribution<std::size_t> u(0, from.size() - 1);
    return from[u(rng)];
  };

  std::vector<bool> measured(cfg.observed + cfg.measured_cogent, false);
  std::fill(measured.begin(), measured.begin() + static_cast<std::ptrdiff_t>(cfg.measured_cogent), true);
  std::shuffle(measured.begin(), measured.end(), rng);

  for (std::size_t k = 0; k < cfg.unobserved; ++k) draft.hs.push_back(model.add_unobserved("H" + std::to_string(k + 1)));
  std::size_t index = 0;
  for (bool m : measured) {
    const auto i = std::to_string(++index);
    draft.cogent.push_back(m ? model.add_measured("Z" + i, "X" + i, false) : model.add_observed("Y" + i));
  }
  for (std::size_t k = 0; k < cfg.mleaf; ++k) {
    const auto i = std::to_string(++index);
    draft.leaves.push_back(model.add_measured("Z" + i, "X" + i, true));
  }

  for (std::size_t a = 0; a < draft.cogent.size(); ++a)
    for (std::size_t b = a + 1; b < draft.cogent.size(); ++b)
      if (coin(rng)) draft.edges.emplace(draft.cogent[a], draft.cogent[b]);
  for (auto c : draft.cogent)
    for (auto l : draft.leaves)
      if (coin(rng)) draft.edges.emplace(c, l);
  std::vector<std::size_t> targets = draft.cogent;
  targets.insert(targets.end(), draft.leaves.begin(), draft.leaves.end());
  for (auto h : draft.hs)
    for (auto t : targets)
      if (coin(rng)) draft.edges.emplace(h, t);

  auto has_child = [&](std::size_t v) {
    return std::any_of(draft.edges.begin(), draft.edges.end(), [&](const auto& e) { return e.first == v; });
  };
  auto has_parent = [&](std::size_t v) {
    return std::any_of(draft.edges.begin(), draft.edges.end(), [&](const auto& e) { return e.second == v; });
  };

  for (std::size_t a = 0; a < draft.cogent.size(); ++a) {
    const auto c = draft.cogent[a];
    if (model.kind(c) != VariableKind::MeasuredCogent || has_child(c)) continue;
    std::vector<std::size_t> later(draft.cogent.begin() + static_cast<std::ptrdiff_t>(a + 1), draft.cogent.end());
    later.insert(later.end(), draft.leaves.begin(), draft.leaves.end());
    if (later.empty()) return false;
    draft.edges.emplace(c, pick(later));
  }
  for (auto l : draft.leaves) {
    if (has_parent(l)) continue;
    std::vector<std::size_t> from = draft.cogent;
    from.insert(from.end(), draft.hs.begin(), draft.hs.end());
    if (from.empty()) return false;
    draft.edges.emplace(pick(from), l);
  }
  for (auto h : draft.hs) {
    for (;;) {
      std::vector<std::size_t> free;
      std::size_t have = 0;
      for (auto t : targets) {
        if (draft.edges.count({h, t})) ++have;
        else free.push_back(t);
      }
      if (have >= 2) break;
      if (free.empty()) return false;
      draft.edges.emplace(h, pick(free));
    }
  }
  return true;
}

}  // namespace

GeneratedModel generate_model_detailed(const GeneratorConfig& cfg) {
  if (!(cfg.edge_density >= 0.0 && cfg.edge_density <= 1.0))
    throw GeneratorError("edge density must lie in [0, 1]", "config");
  if (!(cfg.coef_low >= kCoefficientMargin && cfg.coef_low <= cfg.coef_high))
    throw GeneratorError("coefficient range must satisfy " + shortest(kCoefficientMargin) + " <= low <= high",
                         "config");
  const auto pc = cfg.observed + cfg.measured_cogent;
  if (cfg.unobserved > 0 && pc + cfg.mleaf < 2)
    throw GeneratorError("an unobserved variable needs two children but at most one is available", kCanonical);
  if (cfg.mleaf > 0 && pc + cfg.unobserved == 0)
    throw GeneratorError("an mleaf needs a parent but no cogent or unobserved variable exists", kCanonical);
  if (cfg.measured_cogent > 0 && pc + cfg.mleaf < 2)
    throw GeneratorError("a measured cogent variable needs a child but none is available", kCanonical);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> magnitude(cfg.coef_low, cfg.coef_high);
  std::bernoulli_distribution sign(0.5);
  std::map<std::string, std::size_t> failures;

  for (std::size_t attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
    CanonicalModel skeleton;
    Draft draft;
    if (!draw_structure(cfg, rng, skeleton, draft)) {
      ++failures[kCanonical];
      continue;
    }
    CanonicalModel model;
    for (const auto& v : skeleton.variables()) model.add_variable(v.name, v.kind);
    for (const auto& [s, d] : draft.edges) {
      const double w = (sign(rng) ? 1.0 : -1.0) * magnitude(rng);
      model.add_edge(s, d, w);
    }
    for (const auto& m : skeleton.measurements()) model.add_measurement(m.measured, m.measurement);

    const char* failed = nullptr;
    if (cfg.enforce_canonical && !validate_canonical(model).empty()) failed = kCanonical;
    else if (cfg.enforce_minimal && !is_minimal(model).minimal) failed = kMinimal;
    else if (cfg.enforce_conventional && !check_conventional_faithfulness(model, cfg.tol).passed) failed = kConventional;
    else if (cfg.enforce_lvsemme) {
      LvsemmeOptions opt;
      opt.tol = cfg.tol;
      opt.subset_cap = cfg.lvsemme_subset_cap;
      opt.stop_at_first = true;
      if (!check_lvsemme_faithfulness(model, opt).passed) failed = kLvsemme;
    }
    if (!failed) return {std::move(model), attempt};
    ++failures[failed];
  }

  std::string worst = kCanonical;
  std::size_t most = 0;
  for (const auto& [flag, n] : failures)
    if (n > most) {
      most = n;
      worst = flag;
    }
  throw GeneratorError("no model after " + std::to_string(cfg.max_attempts) + " attempts; '" + worst + "' failed " +
                           std::to_string(most) + " times",
                       worst);
}

CanonicalModel generate_model(const GeneratorConfig& config) { return generate_model_detailed(config).model; }

NoiseKind parse_noise_kind(const std::string& text) {
  if (text == "uniform") return NoiseKind::Uniform;
  if (text == "laplace") return NoiseKind::Laplace;
  if (text == "exponential" || text == "exponential-centered") return NoiseKind::CenteredExponential;
  throw std::invalid_argument("unknown noise kind '" + text + "'");
}

DataTable sample_data(const CanonicalModel& model, std::size_t n, const NoiseSpec& noise, std::uint64_t seed) {
  if (noise.scale < 0.0) throw std::invalid_argument("noise scale must be non-negative");
  std::mt19937_64 rng(seed);
  auto draw = [&]() -> double {
    if (noise.scale == 0.0) return 0.0;
    switch (noise.kind) {
      case NoiseKind::Uniform: return std::uniform_real_distribution<double>(-noise.scale, noise.scale)(rng);
      case NoiseKind::Laplace: {
        const double e = std::exponential_distribution<double>(1.0 / noise.scale)(rng);
        return std::bernoulli_distribution(0.5)(rng) ? e : -e;
      }
      case NoiseKind::CenteredExponential:
        return std::exponential_distribution<double>(1.0 / noise.scale)(rng) - noise.scale;
    }
    return 0.0;
  };

  const auto order = topological_order(causal_diagram(model));
  std::vector<std::vector<const Edge*>> incoming(model.size());
  for (const auto& e : model.edges()) incoming[e.dst].push_back(&e);

  DataTable table;
  std::vector<std::size_t> out_cols;
  for (const auto& v : model.variables())
    if (v.kind == VariableKind::ObservedCogent || v.kind == VariableKind::Measurement) {
      out_cols.push_back(v.id);
      table.columns.push_back(v.name);
    }
  table.rows.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out_cols.size()));

  std::vector<double> own(model.size()), value(model.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (const auto& v : model.variables()) own[v.id] = v.kind == VariableKind::Mleaf ? 0.0 : draw();
    for (auto v : order) {
      double x = own[v];
      if (model.kind(v) == VariableKind::Measurement) {
        if (auto z = model.measured_by(v)) x += value[*z];
      } else {
        for (const Edge* e : incoming[v]) x += e->weight * value[e->src];
      }
      value[v] = x;
    }
    for (std::size_t c = 0; c < out_cols.size(); ++c)
      table.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = value[out_cols[c]];
  }
  return table;
}

MixingMatrix perturb_matrix(const MixingMatrix& w, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
  MixingMatrix out = w;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (Eigen::Index j = 0; j < out.values.cols(); ++j)
    for (Eigen::Index i = 0; i < out.values.rows(); ++i) out.values(i, j) += noise(rng);
  return out;
}

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string export_dot(const CanonicalModel& model, const std::string& graph_name) {
  std::ostringstream os;
  os << "digraph " << quoted(graph_name) << " {\n";
  for (const auto& v : model.variables()) {
    os << "  " << quoted(v.name);
    switch (v.kind) {
      case VariableKind::Unobserved: os << " [shape=circle, style=filled, fillcolor=gray80]"; break;
      case VariableKind::Mleaf: os << " [shape=doublecircle]"; break;
      case VariableKind::Measurement: os << " [shape=box, style=dashed]"; break;
      default: os << " [shape=circle]"; break;
    }
    os << ";\n";
  }
  for (const auto& e : model.edges())
    os << "  " << quoted(model.name(e.src)) << " -> " << quoted(model.name(e.dst)) << " [label="
       << quoted(e.text.empty() ? shortest(e.weight) : e.text) << "];\n";
  for (const auto& m : model.measurements())
    os << "  " << quoted(model.name(m.measured)) << " -> " << quoted(model.name(m.measurement))
       << " [style=dashed];\n";
  os << "}\n";
  return os.str();
}

std::string export_dot(const RecoveredModel& model, double tol, const std::string& graph_name) {
  return export_dot(to_model(model, tol), graph_name);
}

}  // namespace lvsem
