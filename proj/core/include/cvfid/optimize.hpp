#pragma once

#include <functional>

namespace cvfid {

struct GainSearchOptions {
  double lo = 0.0;
  double hi = 2.0;
  // Golden-section refinement stops once the bracket is narrower than this.
  double tolerance = 1e-8;
  // Equally spaced evaluations used to pick the refinement bracket; 0 skips the scan.
  int coarse_points = 16;
  int max_iterations = 500;
};

struct GainOptimum {
  double gain = 0.0;
  double fidelity = 0.0;
  int evaluations = 0;
};

// Maximizes f over [lo, hi] by a coarse scan followed by golden-section search.
// f is assumed unimodal on the refinement bracket. Throws NumericalError on
// non-finite evaluations and ValidationError on an empty bracket.
GainOptimum optimize_gain(const std::function<double(double)>& f, const GainSearchOptions& options = {});

}  // namespace cvfid
