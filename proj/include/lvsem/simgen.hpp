#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lvsem/mixing.hpp"
#include "lvsem/model.hpp"
#include "lvsem/recovery.hpp"

namespace lvsem {

struct GeneratorConfig {
  std::size_t observed = 0;         // p_Y
  std::size_t measured_cogent = 0;  // p_{Z^C}
  std::size_t mleaf = 0;            // p_ml
  std::size_t unobserved = 0;       // p_H
  double edge_density = 0.5;
  double coef_low = 0.5;
  double coef_high = 1.5;
  std::uint64_t seed = 0;
  bool enforce_canonical = true;
  bool enforce_minimal = false;
  bool enforce_conventional = false;
  bool enforce_lvsemme = false;
  /// subset_cap handed to the bottleneck faithfulness check.
  std::size_t lvsemme_subset_cap = static_cast<std::size_t>(-1);
  double tol = kDefaultTolerance;
  std::size_t max_attempts = 2000;
};

inline constexpr double kCoefficientMargin = 0.1;

struct GeneratorError : std::runtime_error {
  GeneratorError(const std::string& what, std::string flag)
      : std::runtime_error(what), failed_flag(std::move(flag)) {}
  std::string failed_flag;
};

struct GeneratedModel {
  CanonicalModel model;
  std::size_t attempts = 0;
};

GeneratedModel generate_model_detailed(const GeneratorConfig& config);
CanonicalModel generate_model(const GeneratorConfig& config);

enum class NoiseKind { Uniform, Laplace, CenteredExponential };

NoiseKind parse_noise_kind(const std::string& text);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::Uniform;
  double scale = 1.0;
};

struct DataTable {
  std::vector<std::string> columns;  // X and Y names, variable id order
  Eigen::MatrixXd rows;
};

DataTable sample_data(const CanonicalModel& model, std::size_t n, const NoiseSpec& noise, std::uint64_t seed);

MixingMatrix perturb_matrix(const MixingMatrix& w, double sigma, std::uint64_t seed);

/// Graphviz text. Unobserved nodes are filled, mleafs double-circled and
/// measurements dashed.
std::string export_dot(const CanonicalModel& model, const std::string& graph_name = "lvsem");
std::string export_dot(const RecoveredModel& model, double tol = kDefaultTolerance,
                       const std::string& graph_name = "lvsem");

}  // namespace lvsem
