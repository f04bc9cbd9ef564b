#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lvsem/model.hpp"

namespace lvsem {

enum class Observability { Observed, Measured };

struct MixingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Rows are observables (X or Y), columns are noises. In ground-truth mode
/// columns carry "N_<variable>" labels; recovered matrices may carry anything.
struct MixingMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<Observability> observability;
  /// Underlying variable name per row (Z_i behind X_i). Empty when unknown.
  std::vector<std::string> row_variables;
  double tolerance = kDefaultTolerance;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  std::optional<std::size_t> row_of(const std::string& label) const;
  std::optional<std::size_t> col_of(const std::string& label) const;
  bool measured(std::size_t row) const { return observability.at(row) == Observability::Measured; }
};

struct SupportPattern {
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask;
  std::vector<std::size_t> row_counts;  // n
  std::vector<std::size_t> col_counts;  // m
};

std::string noise_label(const std::string& variable);

/// W* with rows [Z^L; Z^C; Y] and columns [N_H; N_{V^C}].
MixingMatrix build_w_star(const CanonicalModel& model);
/// W* followed by one one-hot column per measured row.
MixingMatrix build_w(const CanonicalModel& model);

/// Column index of each W* column's owning variable in the model, in column
/// order, and likewise the variable behind each row.
std::vector<std::size_t> w_star_row_variables(const CanonicalModel& model);
std::vector<std::size_t> w_star_noise_owners(const CanonicalModel& model);

struct StripResult {
  MixingMatrix matrix;
  std::vector<std::size_t> removed;  // column indices in the input
  /// Measured rows hit by more than one one-hot column.
  std::vector<std::size_t> ambiguous_rows;
  /// True when no one-hot column hit any measured row and the input was
  /// passed through unchanged.
  bool already_stripped = false;
};

StripResult strip_measurement_columns(const MixingMatrix& w, double tol);
inline StripResult strip_measurement_columns(const MixingMatrix& w) {
  return strip_measurement_columns(w, w.tolerance);
}

SupportPattern support(const Eigen::MatrixXd& values, double tol);
inline SupportPattern support(const MixingMatrix& w, double tol) { return support(w.values, tol); }

struct ColumnMatch {
  std::vector<std::size_t> permutation;  // column j of A corresponds to column permutation[j] of B
  std::vector<double> scales;            // A[:, j] * scales[j] == B[:, permutation[j]]
};

/// Throws MixingError on shape mismatch.
std::optional<ColumnMatch> match_up_to_permutation_scaling(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                                            double tol);
std::optional<ColumnMatch> match_up_to_permutation_scaling(const MixingMatrix& a, const MixingMatrix& b,
                                                            double tol);

/// Scales each column so its first nonzero is +1 and sorts columns by
/// (support, values). Throws MixingError on a zero column.
MixingMatrix canonical_column_form(const MixingMatrix& w, double tol);

/// Returns `w` with rows reordered to follow `labels`; nullopt when the label
/// sets differ.
std::optional<MixingMatrix> align_rows(const MixingMatrix& w, const std::vector<std::string>& labels);

/// Same rows, columns permuted so that new column j is old column order[j],
/// each multiplied by scales[j].
MixingMatrix permute_scale_columns(const MixingMatrix& w, const std::vector<std::size_t>& order,
                                   const std::vector<double>& scales);

}  // namespace lvsem
