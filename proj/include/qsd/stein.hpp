#ifndef QSD_STEIN_HPP
#define QSD_STEIN_HPP

#include <vector>

#include "qsd/set_divergence.hpp"
#include "qsd/state_set.hpp"

namespace qsd {

/// One row of a hypothesis-testing rate table at block length n.  All values
/// are bits per copy.  `floor` and `ceiling` come from the one-shot sandwich
///   D_{P,a}(A_n||B_n) + (a/(a-1)) log(1/eps)
///     <= D_H^eps(A_n||B_n) <= D_{S,a'}(A_n||B_n) + (a'/(a'-1)) log(1/(1-eps))
/// evaluated at a = 1 - 1/sqrt(n) and a' = 1 + 1/sqrt(n) (order 0 at n = 1,
/// where the coefficient term vanishes).
struct SteinRow {
  int n = 0;
  double dh_per_n = 0.0;
  double floor = 0.0;
  double ceiling = 0.0;
};

/// Computes dh_per_n = dhypo_sets(eps, A_n, B_n)/n for n = 1..n_max together
/// with the floor/ceiling envelope above.  Throws convergence_error if a row
/// escapes its envelope by more than 1e-4, resource_limit_error when d^n_max
/// exceeds the dimension cap.
std::vector<SteinRow> stein_table(const SetFamily& afam, const SetFamily& bfam, double eps,
                                  int n_max, const Tolerances& tol = default_tolerances());

}  // namespace qsd

#endif
