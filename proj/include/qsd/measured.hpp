#ifndef QSD_MEASURED_HPP
#define QSD_MEASURED_HPP

#include "qsd/hermitian.hpp"

namespace qsd {

/// Result of a measured-divergence ascent. `value` is in bits; +infinity is
/// carried by `infinite` (the objective passed the dm_cap_bits cap, which is
/// how disjoint supports surface).
struct MeasuredResult {
  double value = 0.0;
  bool infinite = false;
  HermitianOperator witness_omega;  // positive definite optimizer (omega, or W)
  int ascent_iterations = 0;
  double gradient_norm = 0.0;
};

/// Measured relative entropy: the best classical relative entropy achievable by
/// measuring both states with a common POVM. Computed as the supremum over
/// positive definite omega of tr[rho ln omega] + 1 - tr[sigma omega] (a concave
/// problem, solved by quasi-Newton ascent in log space) and reported in bits.
MeasuredResult dm(const DensityOperator& rho, const DensityOperator& sigma,
                  const Tolerances& tol = default_tolerances());

/// Measured Renyi divergence via the three-regime variational programs over a
/// positive definite W. Orders above 50 fall back to the max-divergence limit.
MeasuredResult dm_alpha(double alpha, const DensityOperator& rho, const DensityOperator& sigma,
                        const Tolerances& tol = default_tolerances());

struct PinchingCheck {
  double lhs = 0.0;  // measured Renyi value
  double mid = 0.0;  // sandwiched Renyi value
  double rhs = 0.0;  // lhs + 2 log2 of the number of distinct eigenvalues of sigma
  bool ok = false;
};

/// Two-sided pinching bound, lhs <= mid <= rhs, checked with 1e-6 slack.
/// Requires alpha >= 1/2; alpha = 1 compares dm against the relative entropy.
PinchingCheck pinching_sandwich_check(double alpha, const DensityOperator& rho,
                                      const DensityOperator& sigma,
                                      const Tolerances& tol = default_tolerances());

/// Best two-outcome projective relative entropy over a planar grid of qubit
/// measurement axes (the plane spanned by the two Bloch vectors). A certified
/// lower bound on dm for d = 2, in bits.
double projective_grid_kl(const DensityOperator& rho, const DensityOperator& sigma, int points);

} // namespace qsd

#endif
