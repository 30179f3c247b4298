#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "records.hpp"

namespace cvfid::cli {

enum class Protocol { teleport, memory, fock, ensemble };

Protocol parse_protocol(const std::string& name);
// Flag names accepted as parameters by each protocol (sweepable ones included).
const std::vector<std::string>& parameter_names(Protocol p);

struct EvalOptions {
  bool optimal = false;
  std::optional<double> gain;
  std::size_t mc_samples = 0;
  std::uint64_t seed = 0;
  bool timestamp = false;
};

// Evaluates one parameter point. Inputs are canonicalized before use; a
// "gain" entry overrides options.gain. Throws ValidationError / NumericalError.
Record evaluate(Protocol p, std::map<std::string, double> inputs, EvalOptions options);

// Linear grid start..stop inclusive with `steps` intervals (a single point
// when start == stop).
struct SweepAxis {
  std::string name;
  double start = 0.0;
  double stop = 0.0;
  int steps = 1;
  std::vector<double> points() const;
};
SweepAxis parse_sweep(const std::string& spec);

// Full command line (without the program name). Returns the exit code:
// 0 success, 2 validation error, 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cvfid::cli
