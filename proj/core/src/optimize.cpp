#include "cvfid/optimize.hpp"

#include <cmath>
#include <string>

#include "cvfid/errors.hpp"

namespace cvfid {

GainOptimum optimize_gain(const std::function<double(double)>& f, const GainSearchOptions& options) {
  if (!(options.lo < options.hi) || !std::isfinite(options.lo) || !std::isfinite(options.hi)) {
    throw ValidationError("optimize_gain: bracket must satisfy lo < hi");
  }
  if (!(options.tolerance > 0.0)) throw ValidationError("optimize_gain: tolerance must be > 0");

  int evaluations = 0;
  auto eval = [&](double g) {
    ++evaluations;
    const double v = f(g);
    if (!std::isfinite(v)) {
      throw NumericalError("optimize_gain: non-finite objective at g = " + std::to_string(g));
    }
    return v;
  };

  double a = options.lo;
  double b = options.hi;
  if (options.coarse_points > 1) {
    const int m = options.coarse_points;
    const double step = (b - a) / m;
    int best = 0;
    double best_value = eval(a);
    for (int i = 1; i <= m; ++i) {
      const double v = eval(a + i * step);
      if (v > best_value) {
        best_value = v;
        best = i;
      }
    }
    const double lo = options.lo + std::max(best - 1, 0) * step;
    const double hi = options.lo + std::min(best + 1, m) * step;
    a = lo;
    b = hi;
  }

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  for (int it = 0; it < options.max_iterations && (b - a) > options.tolerance; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }

  const double g = 0.5 * (a + b);
  return GainOptimum{g, eval(g), evaluations};
}

}  // namespace cvfid
