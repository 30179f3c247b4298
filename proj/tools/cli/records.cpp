#include "records.hpp"

#include <fmt/format.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cvfid/errors.hpp"

namespace cvfid::cli {

namespace {

using json = nlohmann::ordered_json;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(s);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string field(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

json number_or_null(const std::optional<double>& v) { return v ? json(canonical(*v)) : json(nullptr); }

std::optional<double> optional_number(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

const std::vector<std::string> kMethodColumns{"fidelity_analytic", "fidelity_pipeline", "fidelity_polygauss",
                                              "fidelity_mc", "fidelity_mc_stderr"};

std::string format_number(double x) { return fmt::format("{:.12g}", x); }

double canonical(double x) {
  if (!std::isfinite(x)) return x;
  return std::stod(format_number(x));
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ValidationError(what + ": not a number: '" + text + "'");
  }
  if (used != text.size()) throw ValidationError(what + ": not a number: '" + text + "'");
  if (!std::isfinite(v)) throw ValidationError(what + " must be finite");
  return v;
}

std::string csv_header(const Record& shape) {
  std::vector<std::string> cols;
  for (const auto& [k, v] : shape.params) cols.push_back(k);
  cols.insert(cols.end(), kMethodColumns.begin(), kMethodColumns.end());
  cols.emplace_back("gain");
  cols.emplace_back("seed");
  if (shape.timestamp) cols.emplace_back("timestamp");
  return fmt::format("{}", fmt::join(cols, ","));
}

std::string csv_row(const Record& r) {
  std::vector<std::string> cols;
  for (const auto& [k, v] : r.params) cols.push_back(format_number(v));
  for (const auto* m : {&r.analytic, &r.pipeline, &r.polygauss, &r.mc, &r.mc_stderr}) cols.push_back(field(*m));
  cols.push_back(field(r.gain));
  cols.push_back(r.seed ? std::to_string(*r.seed) : std::string());
  if (r.timestamp) cols.push_back(*r.timestamp);
  return fmt::format("{}", fmt::join(cols, ","));
}

std::string json_line(const Record& r) {
  json j;
  j["params"] = json::object();
  for (const auto& [k, v] : r.params) j["params"][k] = canonical(v);
  j["fidelity_analytic"] = number_or_null(r.analytic);
  j["fidelity_pipeline"] = number_or_null(r.pipeline);
  j["fidelity_polygauss"] = number_or_null(r.polygauss);
  j["fidelity_mc"] = number_or_null(r.mc);
  j["fidelity_mc_stderr"] = number_or_null(r.mc_stderr);
  j["gain"] = number_or_null(r.gain);
  j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
  if (r.rng) j["rng"] = *r.rng;
  if (r.tail_bound) j["tail_bound"] = canonical(*r.tail_bound);
  if (r.timestamp) j["timestamp"] = *r.timestamp;
  return j.dump();
}

Record parse_csv_row(const std::string& header, const std::string& row) {
  const auto names = split(header, ',');
  const auto values = split(row, ',');
  if (names.size() != values.size()) throw ValidationError("csv: column count mismatch");
  Record r;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto& name = names[i];
    const auto& text = values[i];
    auto number = [&]() -> std::optional<double> {
      if (text.empty()) return std::nullopt;
      return parse_number(text, name);
    };
    if (name == "fidelity_analytic") r.analytic = number();
    else if (name == "fidelity_pipeline") r.pipeline = number();
    else if (name == "fidelity_polygauss") r.polygauss = number();
    else if (name == "fidelity_mc") r.mc = number();
    else if (name == "fidelity_mc_stderr") r.mc_stderr = number();
    else if (name == "gain") r.gain = number();
    else if (name == "seed") {
      if (!text.empty()) r.seed = std::stoull(text);
    } else if (name == "timestamp") {
      r.timestamp = text;
    } else {
      r.params[name] = parse_number(text, name);
    }
  }
  return r;
}

Record parse_json_line(const std::string& line) {
  const json j = json::parse(line);
  Record r;
  for (const auto& [k, v] : j.at("params").items()) r.params[k] = v.get<double>();
  r.analytic = optional_number(j.at("fidelity_analytic"));
  r.pipeline = optional_number(j.at("fidelity_pipeline"));
  r.polygauss = optional_number(j.at("fidelity_polygauss"));
  r.mc = optional_number(j.at("fidelity_mc"));
  r.mc_stderr = optional_number(j.at("fidelity_mc_stderr"));
  r.gain = optional_number(j.at("gain"));
  if (!j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("rng")) r.rng = j.at("rng").get<std::string>();
  if (j.contains("tail_bound")) r.tail_bound = j.at("tail_bound").get<double>();
  if (j.contains("timestamp")) r.timestamp = j.at("timestamp").get<std::string>();
  return r;
}

}  // namespace cvfid::cli
