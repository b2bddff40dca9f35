#ifndef QSD_SET_DIVERGENCE_HPP
#define QSD_SET_DIVERGENCE_HPP

#include <optional>

#include "qsd/divergences.hpp"
#include "qsd/measured.hpp"
#include "qsd/state_set.hpp"

namespace qsd {

/// Divergence between two sets of states, D(A||B) = inf over pairs. `value` is
/// the primal (pair-achieved) side in bits; when the solver carries a dual
/// certificate it lands in dual_witness with its certified bound in dual_value,
/// and gap = |value - dual_value|. The heuristic flag is sticky: it marks any
/// result that leaned on a non-certified oracle or a best-response outer loop.
struct SetDivergenceResult {
  double value = 0.0;
  bool infinite = false;
  HermitianOperator rho_witness;    // member of the first set at witness tolerance
  HermitianOperator sigma_witness;  // member of the second set
  std::optional<HermitianOperator> dual_witness;  // W of the variational programs, or the test M
  double dual_value = 0.0;
  double gap = 0.0;  // bits
  bool heuristic = false;
  int iterations = 0;
};

/// Umegaki divergence between sets by alternating Frank-Wolfe over the two
/// coordinates (jointly convex, so the final linearization gap certifies global
/// optimality). +infinity when no member of A fits inside the support of B.
SetDivergenceResult d_sets(const StateSet& a, const StateSet& b,
                           const Tolerances& tol = default_tolerances());

/// Measured relative entropy between sets via the scale-invariant dual ascent
/// sup_W  min_{rho in A} tr[rho ln W] - ln h_B(W), cross-checked by the primal
/// pair descent; value is the primal side, dual_witness the normalized W.
SetDivergenceResult dm_sets(const StateSet& a, const StateSet& b,
                            const Tolerances& tol = default_tolerances());

/// Measured Renyi divergence between sets. Solves the regime variational
/// program over W (the companion variable is eliminated exactly through the
/// monotone support functions) and cross-checks with pair evaluations.
/// alpha in (0,1/2) is supported at smoke level only.
SetDivergenceResult dm_alpha_sets(double alpha, const StateSet& a, const StateSet& b,
                                  const Tolerances& tol = default_tolerances());

/// Max-divergence of a state against a set: bisection on t with the feasibility
/// program min_{sigma in B} lambda_max(rho - t sigma) solved by conditional
/// gradient. The set-valued overload takes the sup over A (exact on
/// generator-enumerable A since 2^dmax is convex in rho; best-response with
/// restarts otherwise, flagged heuristic).
SetDivergenceResult dmax_sets(const DensityOperator& rho, const StateSet& b,
                              const Tolerances& tol = default_tolerances());
SetDivergenceResult dmax_sets(const StateSet& a, const StateSet& b,
                              const Tolerances& tol = default_tolerances());

/// Composite hypothesis-testing divergence: beta_eps(A||B) = sup over pairs of
/// beta_eps(rho||sigma). The sup side searches mixtures (the optimum of the
/// pair problem over a hull is not a vertex in general), the test side runs the
/// convex program over M directly; the two bracket beta and dual_witness holds
/// the feasible test M. value = -log2 of the pair-side beta.
SetDivergenceResult dhypo_sets(double eps, const StateSet& a, const StateSet& b,
                               const Tolerances& tol = default_tolerances());

/// Petz / sandwiched Renyi divergence between sets: joint Frank-Wolfe on the
/// trace functional (jointly concave for alpha in (0,1), jointly convex for
/// alpha in (1,2]; outside that window the result is flagged heuristic).
SetDivergenceResult petz_sets(double alpha, const StateSet& a, const StateSet& b,
                              const Tolerances& tol = default_tolerances());
SetDivergenceResult sandwiched_sets(double alpha, const StateSet& a, const StateSet& b,
                                    const Tolerances& tol = default_tolerances());

enum class PairDivergence { umegaki, sandwiched, dmax };

/// Level values and their additivity defect for a family pair.
struct AdditivityReport {
  double level_mk = 0.0;  // D(A_{m+k} || B_{m+k})
  double level_m = 0.0;
  double level_k = 0.0;
  double difference = 0.0;  // level_mk - level_m - level_k
  bool assumptions_ok = true;
  bool ok = false;
};

/// difference >= -5e-5 for the measured families (super-additivity); the check
/// is asserted only when the sampled assumption validator passes.
AdditivityReport superadditivity_check(const SetFamily& afam, const SetFamily& bfam, int m, int k,
                                       std::optional<double> alpha = std::nullopt,
                                       const Tolerances& tol = default_tolerances());

/// difference <= +5e-5 for tensor-subadditive divergences (umegaki,
/// sandwiched(alpha), dmax).
AdditivityReport subadditivity_check(const SetFamily& afam, const SetFamily& bfam,
                                     PairDivergence which, int m, int k, double alpha = 1.5,
                                     const Tolerances& tol = default_tolerances());

}  // namespace qsd

#endif
