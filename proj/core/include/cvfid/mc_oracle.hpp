#pragma once

// Monte Carlo fidelity estimates by explicit sampling: classical displacements
// are drawn, measurement outcomes are drawn from their marginal distribution,
// the conditional state is updated with the general-mean formula, feedback is
// applied as a literal displacement, and each sample is scored against its
// coherent target.

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>

#include "cvfid/protocols.hpp"

namespace cvfid {

enum class McProtocol { teleport, memory };

struct McConfig {
  std::uint64_t seed = 0;
  std::size_t samples = 100000;
  std::variant<TeleportationParams, MemoryParams> params;
  // Worker threads; 0 uses the hardware concurrency. Results do not depend on it.
  unsigned threads = 0;
  // Samples per RNG stream. Batch b always uses stream b.
  std::size_t batch_size = 8192;

  McProtocol protocol() const {
    return std::holds_alternative<TeleportationParams>(params) ? McProtocol::teleport : McProtocol::memory;
  }
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::string rng;
};

// Welford accumulator with pairwise merging.
struct RunningStats {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x);
  void merge(const RunningStats& other);
  double sample_variance() const;
  double std_error() const;
};

McEstimate mc_teleport(const McConfig& config);
McEstimate mc_memory(const McConfig& config);
McEstimate run_mc(const McConfig& config);

}  // namespace cvfid
