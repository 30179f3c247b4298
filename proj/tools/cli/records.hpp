#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cvfid::cli {

// One output line. Params are the (canonicalized) inputs, keyed by flag name.
struct Record {
  std::map<std::string, double> params;
  std::optional<double> analytic;
  std::optional<double> pipeline;
  std::optional<double> polygauss;
  std::optional<double> mc;
  std::optional<double> mc_stderr;
  std::optional<double> gain;
  std::optional<std::uint64_t> seed;
  // JSON only.
  std::optional<std::string> rng;
  std::optional<double> tail_bound;
  std::optional<std::string> timestamp;

  bool operator==(const Record&) const = default;
};

// 12 significant digits.
std::string format_number(double x);
// x rounded to what format_number prints, so printing and re-parsing is exact.
double canonical(double x);
// Strict full-string parse; throws ValidationError naming `what` otherwise.
double parse_number(const std::string& text, const std::string& what);

extern const std::vector<std::string> kMethodColumns;

std::string csv_header(const Record& shape);
std::string csv_row(const Record& r);
std::string json_line(const Record& r);

Record parse_csv_row(const std::string& header, const std::string& row);
Record parse_json_line(const std::string& line);

}  // namespace cvfid::cli
