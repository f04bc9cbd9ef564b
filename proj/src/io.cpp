#include "lvsem/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lvsem {

using nlohmann::json;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
}

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

namespace {

double parse_double(const std::string& s) {
  double x = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (b != e && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, x);
  if (ec != std::errc() || p != e) throw IoError("not a number: '" + s + "'");
  return x;
}

// Collects the raw text of each edges[i].weight in document order.
class WeightText : public nlohmann::json_sax<json> {
 public:
  std::vector<std::string> texts;

  bool null() override { return value(""); }
  bool boolean(bool) override { return value(""); }
  bool number_integer(number_integer_t v) override { return value(std::to_string(v)); }
  bool number_unsigned(number_unsigned_t v) override { return value(std::to_string(v)); }
  bool number_float(number_float_t, const string_t& s) override { return value(s); }
  bool string(string_t&) override { return value(""); }
  bool binary(binary_t&) override { return value(""); }
  bool start_object(std::size_t) override { return open(false); }
  bool end_object() override { return close(); }
  bool start_array(std::size_t) override { return open(true); }
  bool end_array() override { return close(); }
  bool key(string_t& k) override {
    key_ = k;
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override { return false; }

 private:
  struct Frame {
    bool array;
    std::string key;
  };
  std::vector<Frame> stack_;
  std::string key_;

  std::string slot() const { return !stack_.empty() && stack_.back().array ? "[]" : key_; }
  bool open(bool array) {
    stack_.push_back({array, slot()});
    key_.clear();
    return true;
  }
  bool close() {
    stack_.pop_back();
    return true;
  }
  bool value(const std::string& text) {
    if (stack_.size() == 3 && !stack_[2].array && stack_[2].key == "[]" && stack_[1].array &&
        stack_[1].key == "edges" && key_ == "weight")
      texts.push_back(text);
    return true;
  }
};

std::size_t as_index(const json& j, const char* what) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    throw IoError(std::string("field '") + what + "' must be a non-negative integer");
  return j.get<std::size_t>();
}

}  // namespace

std::string model_to_json(const CanonicalModel& model) {
  std::ostringstream os;
  os << "{\n  \"variables\": [";
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto& v = model.variable(i);
    os << (i ? ",\n" : "\n") << "    {\"id\": " << v.id << ", \"name\": " << json(v.name).dump()
       << ", \"kind\": " << json(std::string(to_string(v.kind))).dump() << "}";
  }
  os << (model.size() ? "\n  ]" : "]") << ",\n  \"edges\": [";
  for (std::size_t i = 0; i < model.edges().size(); ++i) {
    const auto& e = model.edges()[i];
    std::string w = format_double(e.weight);
    if (!e.text.empty()) {
      double parsed = 0.0;
      try {
        parsed = parse_double(e.text);
      } catch (const IoError&) {
        parsed = std::nan("");
      }
      if (parsed == e.weight) w = e.text;
    }
    os << (i ? ",\n" : "\n") << "    {\"src\": " << e.src << ", \"dst\": " << e.dst << ", \"weight\": " << w << "}";
  }
  os << (model.edges().empty() ? "]" : "\n  ]") << ",\n  \"measurements\": [";
  for (std::size_t i = 0; i < model.measurements().size(); ++i) {
    const auto& m = model.measurements()[i];
    os << (i ? ",\n" : "\n") << "    {\"measured\": " << m.measured << ", \"measurement\": " << m.measurement << "}";
  }
  os << (model.measurements().empty() ? "]" : "\n  ]") << "\n}\n";
  return os.str();
}

CanonicalModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed model document: ") + e.what());
  }
  WeightText raw;
  json::sax_parse(text, &raw);

  for (const char* field : {"variables", "edges", "measurements"})
    if (!doc.contains(field) || !doc[field].is_array())
      throw IoError(std::string("model document needs an array '") + field + "'");

  CanonicalModel model;
  const auto& vars = doc["variables"];
  std::vector<const json*> by_id(vars.size(), nullptr);
  for (const auto& v : vars) {
    const auto id = as_index(v.at("id"), "id");
    if (id >= vars.size() || by_id[id]) throw IoError("variable ids must be 0..n-1 without repeats");
    by_id[id] = &v;
  }
  try {
    for (const auto* v : by_id) model.add_variable(v->at("name").get<std::string>(), parse_kind(v->at("kind").get<std::string>()));
    const auto& edges = doc["edges"];
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const auto& e = edges[i];
      if (!e.at("weight").is_number()) throw IoError("edge weight must be a number");
      model.add_edge(as_index(e.at("src"), "src"), as_index(e.at("dst"), "dst"), e.at("weight").get<double>(),
                     i < raw.texts.size() ? raw.texts[i] : std::string{});
    }
    for (const auto& m : doc["measurements"])
      model.add_measurement(as_index(m.at("measured"), "measured"), as_index(m.at("measurement"), "measurement"));
  } catch (const json::exception& e) {
    throw IoError(std::string("bad model document: ") + e.what());
  } catch (const ModelError& e) {
    throw IoError(std::string("bad model document: ") + e.what());
  }
  return model;
}

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    out.push_back(std::move(cells));
  }
  return out;
}

}  // namespace

std::string matrix_to_csv(const MixingMatrix& w) {
  std::ostringstream os;
  os << "row";
  for (const auto& c : w.col_labels) os << "," << c;
  os << "\n";
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    os << w.row_labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < w.cols(); ++j) os << "," << format_double(w.values(i, j));
    os << "\n";
  }
  return os.str();
}

MixingMatrix matrix_from_csv(const std::string& text) {
  const auto rows = csv_rows(text);
  if (rows.empty()) throw IoError("empty matrix file");
  MixingMatrix w;
  w.col_labels.assign(rows[0].begin() + 1, rows[0].end());
  const auto cols = w.col_labels.size();
  w.values.resize(static_cast<Eigen::Index>(rows.size() - 1), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != cols + 1)
      throw IoError("matrix row " + std::to_string(i) + " has " + std::to_string(rows[i].size() - 1) +
                    " cells, expected " + std::to_string(cols));
    w.row_labels.push_back(rows[i][0]);
    for (std::size_t j = 0; j < cols; ++j)
      w.values(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j)) = parse_double(rows[i][j + 1]);
  }
  w.observability.assign(w.row_labels.size(), Observability::Observed);
  return w;
}

std::string observability_to_csv(const MixingMatrix& w) {
  std::ostringstream os;
  for (std::size_t i = 0; i < w.row_labels.size(); ++i) {
    os << w.row_labels[i] << "," << (w.measured(i) ? "measured" : "observed");
    if (i < w.row_variables.size() && !w.row_variables[i].empty()) os << "," << w.row_variables[i];
    os << "\n";
  }
  return os.str();
}

void apply_observability(MixingMatrix& w, const std::string& text) {
  std::vector<bool> seen(w.row_labels.size(), false);
  w.row_variables.assign(w.row_labels.size(), std::string{});
  for (const auto& cells : csv_rows(text)) {
    if (cells.size() < 2) throw IoError("observability line needs 'row,observed|measured'");
    if (cells[0] == "row" && cells[1] == "kind") continue;
    const auto r = w.row_of(cells[0]);
    if (!r) throw IoError("observability names unknown row '" + cells[0] + "'");
    if (cells[1] == "observed") w.observability[*r] = Observability::Observed;
    else if (cells[1] == "measured") w.observability[*r] = Observability::Measured;
    else throw IoError("observability must be 'observed' or 'measured', got '" + cells[1] + "'");
    if (cells.size() > 2) w.row_variables[*r] = cells[2];
    seen[*r] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw IoError("no observability flag for row '" + w.row_labels[i] + "'");
  if (std::all_of(w.row_variables.begin(), w.row_variables.end(), [](const auto& s) { return s.empty(); }))
    w.row_variables.clear();
}

json grouping_to_json(const OrderedGrouping& grouping, const std::vector<std::string>& row_names,
                      const std::vector<std::string>& noise_names) {
  json groups = json::array();
  for (const auto& g : grouping.groups) {
    json item;
    item["kind"] = std::string(to_string(g.kind));
    item["center"] = g.center ? json(row_names.at(*g.center)) : json(nullptr);
    item["rows"] = json::array();
    for (auto r : g.rows) item["rows"].push_back(row_names.at(r));
    item["noises"] = json::array();
    for (auto c : g.noises) item["noises"].push_back(noise_names.at(c));
    groups.push_back(std::move(item));
  }
  json dag = json::array();
  for (auto [a, b] : grouping.dag) dag.push_back({a, b});
  return {{"groups", groups}, {"dag", dag}};
}

json grouping_to_json(const CanonicalModel& model, const OrderedGrouping& grouping) {
  std::vector<std::string> names;
  for (const auto& v : model.variables()) names.push_back(v.name);
  return grouping_to_json(grouping, names, names);
}

json trace_to_json(const AogRecovery& recovery, const MixingMatrix& wstar) {
  auto rows = [&](const std::vector<std::size_t>& v) {
    json a = json::array();
    for (auto r : v) a.push_back(wstar.row_labels.at(r));
    return a;
  };
  auto cols = [&](const std::vector<std::size_t>& v) {
    json a = json::array();
    for (auto c : v) a.push_back(c < wstar.col_labels.size() ? wstar.col_labels[c] : std::to_string(c));
    return a;
  };
  json out = json::array();
  for (const auto& s : recovery.trace)
    out.push_back({{"picked", wstar.row_labels.at(s.picked_row)},
                   {"Z_I", rows(s.z_i)},
                   {"Z_J", rows(s.z_j)},
                   {"N_I", cols(s.n_i)},
                   {"N_J", cols(s.n_j)},
                   {"N_m", cols({s.n_m})[0]},
                   {"W0_has_zero", s.w0_has_zero},
                   {"outcome", std::string(to_string(s.outcome))}});
  return out;
}

json recovered_to_json(const RecoveredModel& model, double tol) {
  json centers = json::array();
  for (const auto& c : model.centers)
    centers.push_back({{"row", model.row_labels.at(c.row)},
                       {"noise", c.col < model.col_labels.size() ? model.col_labels[c.col] : std::to_string(c.col)}});
  return {{"centers", centers},
          {"edge_count", edge_count(model, tol)},
          {"model", json::parse(model_to_json(to_model(model, tol)))}};
}

json report_to_json(const CanonicalModel& model, const FaithfulnessReport& report) {
  auto names = [&](const std::vector<std::size_t>& ids) {
    json a = json::array();
    for (auto v : ids) a.push_back(model.name(v));
    return a;
  };
  json viol = json::array();
  for (const auto& v : report.violations) {
    json item{{"kind", std::string(to_string(v.kind))}};
    if (v.kind == FaithfulnessKind::Conventional) {
      item["ancestor"] = model.name(v.first);
      item["descendant"] = model.name(v.second);
      item["effect"] = v.effect;
    } else {
      item["target"] = model.name(v.first);
      if (v.kind == FaithfulnessKind::LvsemmeB) item["parent"] = model.name(v.second);
      item["J"] = names(v.j_set);
      item["K"] = names(v.k_set);
      item["rank"] = v.rank;
      item["bottleneck"] = v.bottleneck;
    }
    viol.push_back(std::move(item));
  }
  return {{"passed", report.passed},
          {"violations", viol},
          {"subsets_examined", report.subsets_examined},
          {"truncated", report.truncated}};
}

std::string table_to_csv(const DataTable& table) {
  std::ostringstream os;
  for (std::size_t c = 0; c < table.columns.size(); ++c) os << (c ? "," : "") << table.columns[c];
  os << "\n";
  for (Eigen::Index r = 0; r < table.rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.rows.cols(); ++c) os << (c ? "," : "") << format_double(table.rows(r, c));
    os << "\n";
  }
  return os.str();
}

}  // namespace lvsem
