#pragma once

// JSON and CSV forms of the library types.
//
// Bodies:    {"n_points": N, "h": [...]}
// Ellipses:  {"center": [x, y], "r1": .., "r2": .., "angle": ..}
// CSV:       RFC 4180, header row, '.' decimal point, 17 significant digits.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "s1mk/john_ellipse.hpp"
#include "s1mk/measures.hpp"
#include "s1mk/solver.hpp"

namespace s1mk {

using Json = nlohmann::json;

Json to_json(const SupportFunction& body);
/// Validates the body (nonnegativity and convexity).
SupportFunction body_from_json(const Json& j, DiffScheme scheme = DiffScheme::spectral);

Json to_json(const Ellipse& e);
Ellipse ellipse_from_json(const Json& j);
Json to_json(const ContainmentCertificate& c);

Json to_json(const SolveReport& report, bool include_trace);
Json to_json(const VariationalReport& report);
Json measure_totals_json(const std::vector<MeasureDensity>& measures);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

/// Shortest decimal form that round-trips, at most 17 significant digits.
std::string format_double(double v);

class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }

  void add_row(std::vector<std::string> row);

  int column(const std::string& name) const;
  const std::string& cell(std::size_t row, const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
  bool flag(std::size_t row, const std::string& name) const;

  std::string to_string() const;
  static CsvTable parse(const std::string& text);

  void write(const std::filesystem::path& path) const;
  static CsvTable read(const std::filesystem::path& path);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// theta,density rows for one measure.
CsvTable measure_csv(const MeasureDensity& m);

}  // namespace s1mk
