// lvsem: command-line front end for the lvsem library.
//
// Exit codes: 0 success, 2 check violation or compare-unequal, 1 error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lvsem/assumptions.hpp"
#include "lvsem/equivalence.hpp"
#include "lvsem/io.hpp"
#include "lvsem/mixing.hpp"
#include "lvsem/model.hpp"
#include "lvsem/recovery.hpp"
#include "lvsem/simgen.hpp"

using namespace lvsem;
using nlohmann::json;

namespace {

struct Globals {
  std::optional<double> tol;
  std::uint64_t seed = 0;
  std::string format = "json";
};

double effective_tol(const Globals& g) {
  if (g.tol) return *g.tol;
  if (const char* env = std::getenv("LVSEM_TOL")) {
    try {
      const double t = std::stod(env);
      std::cerr << "# tol=" << format_double(t) << " (from LVSEM_TOL)\n";
      return t;
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("LVSEM_TOL is not a number: ") + env);
    }
  }
  return kDefaultTolerance;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") std::cout << text;
  else write_text(out, text);
}

MixingMatrix load_matrix(const std::string& path, const std::string& obs_path) {
  auto w = matrix_from_csv(read_text(path));
  if (!obs_path.empty()) apply_observability(w, read_text(obs_path));
  return w;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal structure recovery for linear SEMs with latent confounders and measurement error"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--tol", g.tol, "Support and rank tolerance (default 1e-9, or LVSEM_TOL)");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "text"}));

  // generate
  auto* gen = app.add_subcommand("generate", "Draw a random canonical model");
  GeneratorConfig cfg;
  std::vector<std::string> enforce;
  std::string gen_out;
  gen->add_option("--py", cfg.observed, "Observed cogent variables");
  gen->add_option("--pzc", cfg.measured_cogent, "Measured cogent variables");
  gen->add_option("--pml", cfg.mleaf, "Mleaf variables");
  gen->add_option("--ph", cfg.unobserved, "Unobserved variables");
  gen->add_option("--density", cfg.edge_density, "Edge probability");
  gen->add_option("--low", cfg.coef_low, "Smallest coefficient magnitude");
  gen->add_option("--high", cfg.coef_high, "Largest coefficient magnitude");
  gen->add_option("--attempts", cfg.max_attempts, "Rejection-sampling budget");
  gen->add_option("--enforce", enforce, "minimal, conventional, lvsemme")
      ->check(CLI::IsMember({"canonical", "minimal", "conventional", "lvsemme"}));
  gen->add_option("-o,--out", gen_out, "Output file");

  // mix
  auto* mix = app.add_subcommand("mix", "Write W* (or W with --full) for a model");
  std::string mix_model, mix_out, mix_obs;
  bool mix_full = false;
  mix->add_option("--model", mix_model, "Model file")->required();
  mix->add_flag("--full", mix_full, "Append measurement-error columns");
  mix->add_option("-o,--out", mix_out, "Matrix file");
  mix->add_option("--observability", mix_obs, "Write the observability sidecar here");

  // strip
  auto* strip = app.add_subcommand("strip", "Remove measurement-error columns");
  std::string strip_matrix, strip_obs, strip_out;
  strip->add_option("--matrix", strip_matrix, "Matrix file")->required();
  strip->add_option("--observability", strip_obs, "Observability sidecar")->required();
  strip->add_option("-o,--out", strip_out, "Output file");

  // recover
  auto* rec = app.add_subcommand("recover", "Recover the ordered grouping and equivalence class from W*");
  std::string rec_w, rec_obs, rec_emit = "aog", rec_dot;
  rec->add_option("--wstar", rec_w, "W* matrix file")->required();
  rec->add_option("--observability", rec_obs, "Observability sidecar")->required();
  rec->add_option("--emit", rec_emit, "aog, class or dog")->check(CLI::IsMember({"aog", "class", "dog"}));
  rec->add_option("--dot", rec_dot, "Directory for one graph file per recovered model");

  // check
  auto* chk = app.add_subcommand("check", "Check canonical form, minimality and faithfulness");
  std::string chk_model, chk_kind = "all";
  std::size_t chk_cap = 8;
  bool chk_first = false;
  chk->add_option("--model", chk_model, "Model file")->required();
  chk->add_option("--kind", chk_kind, "canonical, minimal, conventional, lvsemme or all")
      ->check(CLI::IsMember({"canonical", "minimal", "conventional", "lvsemme", "all"}));
  chk->add_option("--subset-cap", chk_cap, "Largest |J|+|K| enumerated");
  chk->add_flag("--stop-at-first", chk_first, "Stop at the first violation");

  // compare
  auto* cmp = app.add_subcommand("compare", "Compare two models");
  std::string cmp_a, cmp_b, cmp_mode = "mixing";
  cmp->add_option("m1", cmp_a, "First model")->required();
  cmp->add_option("m2", cmp_b, "Second model")->required();
  cmp->add_option("--mode", cmp_mode, "mixing or structure")->check(CLI::IsMember({"mixing", "structure"}));

  // equivalents
  auto* eqv = app.add_subcommand("equivalents", "Enumerate equivalent models by center switching");
  std::string eqv_model, eqv_grouping = "aog";
  eqv->add_option("--model", eqv_model, "Model file")->required();
  eqv->add_option("--grouping", eqv_grouping, "aog or dog")->check(CLI::IsMember({"aog", "dog"}));

  // sample
  auto* smp = app.add_subcommand("sample", "Sample observational data over X and Y");
  std::string smp_model, smp_noise = "uniform", smp_out;
  std::size_t smp_n = 100;
  double smp_scale = 1.0;
  smp->add_option("--model", smp_model, "Model file")->required();
  smp->add_option("-n", smp_n, "Rows");
  smp->add_option("--noise", smp_noise, "uniform, laplace or exponential")
      ->check(CLI::IsMember({"uniform", "laplace", "exponential"}));
  smp->add_option("--scale", smp_scale, "Noise scale");
  smp->add_option("-o,--out", smp_out, "Output file");

  // perturb
  auto* prt = app.add_subcommand("perturb", "Add Gaussian noise to every matrix entry");
  std::string prt_matrix, prt_out;
  double prt_sigma = 0.0;
  prt->add_option("--matrix", prt_matrix, "Matrix file")->required();
  prt->add_option("--sigma", prt_sigma, "Noise standard deviation")->required();
  prt->add_option("-o,--out", prt_out, "Output file");

  // dot
  auto* dot = app.add_subcommand("dot", "Export a model as Graphviz text");
  std::string dot_model, dot_out;
  dot->add_option("--model", dot_model, "Model file")->required();
  dot->add_option("-o,--out", dot_out, "Output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const double tol = effective_tol(g);
    const bool text = g.format == "text";

    if (*gen) {
      cfg.seed = g.seed;
      cfg.tol = tol;
      for (const auto& f : enforce) {
        if (f == "canonical") cfg.enforce_canonical = true;
        if (f == "minimal") cfg.enforce_minimal = true;
        if (f == "conventional") cfg.enforce_conventional = true;
        if (f == "lvsemme") cfg.enforce_lvsemme = true;
      }
      emit(model_to_json(generate_model(cfg)), gen_out);
      return 0;
    }

    if (*mix) {
      const auto model = model_from_json(read_text(mix_model));
      const auto w = mix_full ? build_w(model) : build_w_star(model);
      emit(matrix_to_csv(w), mix_out);
      if (!mix_obs.empty()) write_text(mix_obs, observability_to_csv(w));
      return 0;
    }

    if (*strip) {
      const auto w = load_matrix(strip_matrix, strip_obs);
      const auto r = strip_measurement_columns(w, tol);
      for (auto row : r.ambiguous_rows)
        std::cerr << "warning: several one-hot columns hit row " << w.row_labels[row] << "; removed the first\n";
      if (r.already_stripped) std::cerr << "note: no measurement columns found; input returned unchanged\n";
      emit(matrix_to_csv(r.matrix), strip_out);
      return 0;
    }

    if (*rec) {
      const auto w = load_matrix(rec_w, rec_obs);
      const auto aog = recover_aog(w, tol);
      std::vector<std::string> cols = w.col_labels;
      for (std::size_t j = cols.size(); j < static_cast<std::size_t>(w.cols()); ++j) cols.push_back(std::to_string(j));
      json out{{"grouping", grouping_to_json(aog.grouping, w.row_labels, cols)},
               {"trace", trace_to_json(aog, w)},
               {"iterations", aog.iterations()}};
      std::vector<RecoveredModel> models;
      if (rec_emit != "aog") {
        const auto cls = enumerate_class(w, aog.grouping, tol);
        models = rec_emit == "dog" && !cls.models.empty() ? dog_filter(cls.models, tol) : cls.models;
        json arr = json::array();
        for (const auto& m : models) arr.push_back(recovered_to_json(m, tol));
        out["models"] = arr;
        json rej = json::array();
        for (const auto& r : cls.rejected) rej.push_back(r.reason);
        out["rejected"] = rej;
      }
      if (!rec_dot.empty()) {
        std::filesystem::create_directories(rec_dot);
        for (std::size_t i = 0; i < models.size(); ++i)
          write_text((std::filesystem::path(rec_dot) / ("model_" + std::to_string(i) + ".dot")).string(),
                     export_dot(models[i], tol, "model_" + std::to_string(i)));
      }
      if (text) {
        std::cout << "iterations: " << aog.iterations() << "\n";
        for (const auto& grp : out["grouping"]["groups"]) std::cout << grp.dump() << "\n";
        if (out.contains("models")) std::cout << "models: " << out["models"].size() << "\n";
      } else {
        std::cout << out.dump(2) << "\n";
      }
      return 0;
    }

    if (*chk) {
      const auto model = model_from_json(read_text(chk_model));
      json out;
      bool ok = true;
      const auto viol = validate_canonical(model);
      json canon = json::array();
      for (const auto& v : viol) canon.push_back({{"rule", std::string(to_string(v.rule))}, {"detail", v.detail}});
      out["canonical"] = canon;
      ok = viol.empty();
      if (ok && (chk_kind == "minimal" || chk_kind == "all")) {
        const auto m = is_minimal(model);
        out["minimal"] = m.minimal;
        if (m.witness) out["minimality_witness"] = {model.name(m.witness->latent), model.name(m.witness->mleaf)};
        ok = ok && m.minimal;
      }
      if (viol.empty() && (chk_kind == "conventional" || chk_kind == "all")) {
        const auto r = check_conventional_faithfulness(model, tol);
        out["conventional"] = report_to_json(model, r);
        ok = ok && r.passed;
      }
      if (viol.empty() && (chk_kind == "lvsemme" || chk_kind == "all")) {
        LvsemmeOptions opt{tol, chk_cap, chk_first};
        const auto r = check_lvsemme_faithfulness(model, opt);
        out["lvsemme"] = report_to_json(model, r);
        ok = ok && r.passed;
      }
      out["passed"] = ok;
      if (text) {
        std::cout << (ok ? "PASS" : "FAIL") << "\n";
        for (const auto& [k, v] : out.items())
          if (k != "passed") std::cout << k << ": " << v.dump() << "\n";
      } else {
        std::cout << out.dump(2) << "\n";
      }
      return ok ? 0 : 2;
    }

    if (*cmp) {
      const auto a = model_from_json(read_text(cmp_a));
      const auto b = model_from_json(read_text(cmp_b));
      const bool same = cmp_mode == "mixing" ? models_equal_mixing(a, b, tol) : same_unlabeled_structure(a, b);
      std::cout << (same ? "equal" : "unequal") << "\n";
      return same ? 0 : 2;
    }

    if (*eqv) {
      const auto model = model_from_json(read_text(eqv_model));
      const auto grouping = eqv_grouping == "aog" ? compute_aog(model) : compute_dog(model);
      json arr = json::array();
      for (const auto& m : enumerate_equivalents(model, grouping, tol)) arr.push_back(json::parse(model_to_json(m)));
      std::cout << json{{"grouping", grouping_to_json(model, grouping)}, {"models", arr}}.dump(2) << "\n";
      return 0;
    }

    if (*smp) {
      const auto model = model_from_json(read_text(smp_model));
      emit(table_to_csv(sample_data(model, smp_n, {parse_noise_kind(smp_noise), smp_scale}, g.seed)), smp_out);
      return 0;
    }

    if (*prt) {
      const auto w = matrix_from_csv(read_text(prt_matrix));
      emit(matrix_to_csv(perturb_matrix(w, prt_sigma, g.seed)), prt_out);
      return 0;
    }

    if (*dot) {
      emit(export_dot(model_from_json(read_text(dot_model))), dot_out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
