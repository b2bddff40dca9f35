#ifndef QSD_DIVERGENCES_HPP
#define QSD_DIVERGENCES_HPP

#include <optional>

#include "qsd/hermitian.hpp"

namespace qsd {

/// Outcome of a divergence evaluation. Values are in bits. +infinity is carried
/// by the `infinite` flag; `value` is meaningless when it is set.
struct DivergenceResult {
  double value = 0.0;
  bool infinite = false;
  int iterations = 0;
  double residual = 0.0;   // solver-specific: support leak, gap, or last step size
  double tolerance = 0.0;  // the tolerance `residual` was measured against
  std::optional<HermitianOperator> optimizer;

  static DivergenceResult infinity() {
    DivergenceResult r;
    r.infinite = true;
    return r;
  }
};

/// Compares with the sentinel treated as larger than any finite value.
bool div_less(const DivergenceResult& a, const DivergenceResult& b);

/// Binary test 0 <= M <= I with its two error rates against the tested pair.
struct TestOperator {
  HermitianOperator m;
  double type1 = 0.0;  // tr[rho (I - M)]
  double type2 = 0.0;  // tr[sigma M]
};

DivergenceResult umegaki(const DensityOperator& rho, const DensityOperator& sigma,
                         const Tolerances& tol = default_tolerances());

DivergenceResult petz(double alpha, const DensityOperator& rho, const DensityOperator& sigma,
                      const Tolerances& tol = default_tolerances());

DivergenceResult sandwiched(double alpha, const DensityOperator& rho, const DensityOperator& sigma,
                            const Tolerances& tol = default_tolerances());

DivergenceResult dmin(const DensityOperator& rho, const DensityOperator& sigma,
                      const Tolerances& tol = default_tolerances());

DivergenceResult dmax(const DensityOperator& rho, const DensityOperator& sigma,
                      const Tolerances& tol = default_tolerances());

enum class SmoothingBall { purified, trace };

/// Smoothed max-divergence: minimizes dmax over the epsilon-ball of subnormalized
/// states around rho (projected subgradient on the largest eigenvalue).
DivergenceResult dmax_smoothed(double eps, const DensityOperator& rho,
                               const DensityOperator& sigma,
                               SmoothingBall ball = SmoothingBall::purified,
                               const Tolerances& tol = default_tolerances());

struct BetaResult {
  double beta = 0.0;      // optimal type-II error
  DivergenceResult dh;    // -log2 beta
  double x_star = 0.0;    // optimal likelihood-ratio threshold of the scalar dual
  TestOperator test;      // Neyman-Pearson test achieving type1 == eps exactly
};

/// Optimal hypothesis-testing error beta_eps(rho||sigma) via golden-section on the
/// scalar dual, plus the explicit randomized test.
BetaResult beta_and_dhypo(double eps, const DensityOperator& rho, const DensityOperator& sigma,
                          const Tolerances& tol = default_tolerances());

struct NsDistributions {
  RealMatrix p;  // p(i,j) = rho_i |<u_i|v_j>|^2
  RealMatrix q;  // q(i,j) = sigma_j |<u_i|v_j>|^2
};

/// Classical pair with the same Petz divergences as (rho, sigma).
NsDistributions ns_distributions(const DensityOperator& rho, const DensityOperator& sigma,
                                 const Tolerances& tol = default_tolerances());

/// Classical Renyi divergence (base 2) with the usual support conventions.
DivergenceResult classical_renyi(double alpha, const RealVector& p, const RealVector& q);
DivergenceResult classical_relative_entropy(const RealVector& p, const RealVector& q);

struct EnvelopeResult {
  double eta = 0.0;        // distortion parameter of the applicable window
  double lower_gap = 0.0;  // distance of the Renyi value from the relative entropy
  double upper_gap = 0.0;  // remaining slack of the quadratic envelope
  bool window_ok = false;  // alpha lies inside the admissible window around 1
};

/// Quadratic continuity envelope of the Renyi families around alpha = 1.
EnvelopeResult continuity_envelopes(const DensityOperator& rho, const DensityOperator& sigma,
                                    double alpha, const Tolerances& tol = default_tolerances());

} // namespace qsd

#endif
