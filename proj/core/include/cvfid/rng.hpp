#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cvfid {

// Seedable generator with independent streams. Stream s of seed x is an
// mt19937_64 initialized through std::seed_seq from four splitmix64 outputs of
// (x, s); normals come from the Box-Muller transform on 53-bit uniforms. All
// steps are fully specified, so sequences are reproducible across platforms.
class StreamRng {
 public:
  static constexpr std::string_view kDescription =
      "mt19937_64/seed_seq(splitmix64(seed,stream))/box-muller";

  StreamRng(std::uint64_t seed, std::uint64_t stream);

  // Uniform in the open interval (0, 1).
  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace cvfid
