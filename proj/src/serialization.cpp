#include "s1mk/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace s1mk {

Json to_json(const SupportFunction& body) {
  const auto& h = body.h();
  return Json{{"n_points", body.grid().size()},
              {"h", std::vector<double>(h.data(), h.data() + h.size())}};
}

SupportFunction body_from_json(const Json& j, DiffScheme scheme) {
  try {
    const int n = j.at("n_points").get<int>();
    const auto values = j.at("h").get<std::vector<double>>();
    if (static_cast<int>(values.size()) != n) {
      throw Error(ErrorCode::invalid_argument, "body JSON: len(h) != n_points");
    }
    return SupportFunction::from_samples(
        Eigen::Map<const Eigen::VectorXd>(values.data(), n), Grid(n, scheme));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("malformed body JSON: ") + e.what());
  }
}

Json to_json(const Ellipse& e) {
  return Json{{"center", {e.center.x(), e.center.y()}},
              {"r1", e.r1},
              {"r2", e.r2},
              {"angle", e.angle}};
}

Ellipse ellipse_from_json(const Json& j) {
  try {
    const auto c = j.at("center").get<std::vector<double>>();
    if (c.size() != 2) throw Error(ErrorCode::invalid_argument, "ellipse center needs 2 entries");
    Ellipse e{Vec2(c[0], c[1]), j.at("r1").get<double>(), j.at("r2").get<double>(),
              j.at("angle").get<double>()};
    if (!(e.r1 >= e.r2 && e.r2 > 0.0) || !(e.angle >= 0.0 && e.angle < kPi)) {
      throw Error(ErrorCode::invalid_argument, "ellipse needs r1 >= r2 > 0 and angle in [0, pi)");
    }
    return e;
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::invalid_argument, std::string("malformed ellipse JSON: ") + ex.what());
  }
}

Json to_json(const ContainmentCertificate& c) {
  return Json{{"diameter", c.diameter},
              {"max_constraint_violation", c.max_constraint_violation},
              {"min_outside_e", c.min_outside_e},
              {"max_outside_2e", c.max_outside_2e},
              {"containment_factor", c.containment_factor},
              {"e_in_k", c.e_in_k},
              {"k_in_2e", c.k_in_2e}};
}

Json to_json(const SolveReport& r, bool include_trace) {
  Json j{{"converged", r.converged},
         {"residual_sup", r.residual_sup},
         {"iterations", r.iterations},
         {"min_h", r.min_h},
         {"min_curvature", r.min_curvature},
         {"body", to_json(r.body)}};
  if (include_trace) {
    Json trace = Json::array();
    for (const auto& t : r.trace) {
      trace.push_back({{"stage_t", t.stage_t},
                       {"iteration", t.iteration},
                       {"residual_sup", t.residual_sup},
                       {"residual_l2", t.residual_l2},
                       {"damping", t.damping}});
    }
    j["trace"] = std::move(trace);
  }
  return j;
}

Json to_json(const VariationalReport& r) {
  Json j{{"formula", r.formula},
         {"fd_slope", r.fd_slope},
         {"formula_value", r.formula_value},
         {"rel_error", r.rel_error},
         {"steps", r.steps},
         {"raw_slopes", r.raw_slopes},
         {"raw_errors", r.raw_errors}};
  if (!r.normalization.empty()) j["normalization"] = r.normalization;
  return j;
}

Json measure_totals_json(const std::vector<MeasureDensity>& measures) {
  Json j = Json::array();
  for (const auto& m : measures) {
    j.push_back({{"kind", to_string(m.kind)}, {"p", m.p}, {"q", m.q}, {"total", m.total}});
  }
  return j;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::invalid_argument, path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) {
    throw Error(ErrorCode::invalid_argument, "CSV row width does not match header");
  }
  rows_.push_back(std::move(row));
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return static_cast<int>(i);
  }
  throw Error(ErrorCode::invalid_argument, "no CSV column named " + name);
}

const std::string& CsvTable::cell(std::size_t row, const std::string& name) const {
  return rows_.at(row).at(column(name));
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  const std::string& s = cell(row, name);
  if (s == "nan") return std::nan("");
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::invalid_argument, "CSV cell '" + s + "' is not a number");
  }
  return v;
}

bool CsvTable::flag(std::size_t row, const std::string& name) const {
  return cell(row, name) == "true";
}

namespace {

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void append_line(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += quote(fields[i]);
  }
  out += "\r\n";
}

}  // namespace

std::string CsvTable::to_string() const {
  std::string out;
  append_line(out, header_);
  for (const auto& r : rows_) append_line(out, r);
  return out;
}

CsvTable CsvTable::parse(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::invalid_argument, "unterminated quoted CSV field");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  if (records.empty()) throw Error(ErrorCode::invalid_argument, "CSV has no header");
  CsvTable table(records.front());
  for (std::size_t i = 1; i < records.size(); ++i) table.add_row(std::move(records[i]));
  return table;
}

void CsvTable::write(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << to_string();
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

CsvTable measure_csv(const MeasureDensity& m) {
  CsvTable t({"theta", "density"});
  const Grid& g = m.density.grid();
  for (int i = 0; i < g.size(); ++i) {
    t.add_row({format_double(g.theta(i)), format_double(m.density[i])});
  }
  return t;
}

}  // namespace s1mk
