#ifndef QSD_SCALAR_OPT_HPP
#define QSD_SCALAR_OPT_HPP

#include <functional>

namespace qsd {

struct GoldenResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
  bool at_edge = false;  // minimum pinned to a bracket end
};

/// Golden-section minimization of a unimodal (convex) function on [a, b],
/// run until the bracket width drops below xtol.
GoldenResult golden_min(const std::function<double(double)>& f, double a, double b, double xtol,
                        int max_iter = 200);

} // namespace qsd

#endif
