#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lvsem/assumptions.hpp"
#include "lvsem/mixing.hpp"
#include "lvsem/model.hpp"
#include "lvsem/recovery.hpp"
#include "lvsem/simgen.hpp"

namespace lvsem {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

/// Model document: `variables`, `edges`, `measurements`. Weights are
/// written with the decimal text they were read from.
std::string model_to_json(const CanonicalModel& model);
CanonicalModel model_from_json(const std::string& text);

/// First row holds column labels, first column row labels.
std::string matrix_to_csv(const MixingMatrix& w);
/// Rows default to observed until a sidecar is applied.
MixingMatrix matrix_from_csv(const std::string& text);

/// Sidecar lines: `row,observed|measured[,variable]`.
std::string observability_to_csv(const MixingMatrix& w);
void apply_observability(MixingMatrix& w, const std::string& text);

nlohmann::json grouping_to_json(const OrderedGrouping& grouping, const std::vector<std::string>& row_names,
                                const std::vector<std::string>& noise_names);
/// Model-space grouping, members named after model variables.
nlohmann::json grouping_to_json(const CanonicalModel& model, const OrderedGrouping& grouping);

nlohmann::json trace_to_json(const AogRecovery& recovery, const MixingMatrix& wstar);
nlohmann::json recovered_to_json(const RecoveredModel& model, double tol);
nlohmann::json report_to_json(const CanonicalModel& model, const FaithfulnessReport& report);

std::string table_to_csv(const DataTable& table);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

}  // namespace lvsem
