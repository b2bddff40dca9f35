#ifndef QSD_RESOURCE_HPP
#define QSD_RESOURCE_HPP

#include "qsd/aep.hpp"
#include "qsd/divergences.hpp"
#include "qsd/state_set.hpp"

namespace qsd {

/// Closed interval [lo, hi] of real values (bits or rates).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Global robustness R(rho) = 2^{dmax_sets(rho, free_set)} - 1, the least s
/// such that (rho + s w)/(1 + s) is free for some state w.  Returns +infinity
/// when no finite mixing works; never negative.
double global_robustness(const DensityOperator& rho, const StateSet& free_set,
                         const Tolerances& tol = default_tolerances());

/// Measure-and-prepare map X -> tr[MX] target + tr[(I-M)X] free_target.  The
/// test carries its audited error rates; target and free_target are unit
/// trace, so the map is trace preserving on states.
struct ProtocolMap {
  TestOperator test;
  DensityOperator target;
  DensityOperator free_target;
  double delta_target = 0.0;  // resource-generation budget the audit checks against

  DensityOperator apply(const DensityOperator& x,
                        const Tolerances& tol = default_tolerances()) const;
};

/// Assembles the measure-and-prepare protocol: the test is the certified dual
/// witness of dhypo_sets(eps/2, A_n, F_n); the target is the trace-ball
/// smoothed optimizer of the canonical B_m member against its best free
/// reference; the free arm is the maximally mixed state when free, else the
/// first generator of F_m.  delta sets delta_target = 2^{-n delta}.
ProtocolMap build_rng_protocol(const SetFamily& afam, const SetFamily& ffam,
                               const SetFamily& bfam, int n, int m, double eps, double delta,
                               const Tolerances& tol = default_tolerances());

/// Audit of a protocol against sampled inputs.  trans_error is the worst
/// trace distance from P(rho_n) to the target set B_m over rho_n in A_n;
/// rng_violation is the worst global robustness of P(omega) for free omega.
/// Generator enumeration makes both sups exact (the objectives are convex in
/// the input state); sampled fallbacks are flagged heuristic.
struct AuditReport {
  double trans_error = 0.0;
  double rng_violation = 0.0;
  bool heuristic = false;
};

AuditReport protocol_audit(const ProtocolMap& p, const SetFamily& afam, const SetFamily& bfam,
                           const SetFamily& ffam, int n, int m, int sample_budget,
                           unsigned seed = 17, const Tolerances& tol = default_tolerances());

/// Interval bounds on the asymptotic conversion rate r(A -> B) =
/// Dinf(A||F_A) / Dinf(B||F_B).  Numerator and denominator come from
/// regularized_estimate at block m_max; the rate interval divides them
/// conservatively.  A denominator interval touching zero is rejected.
struct RateBounds {
  Interval numerator;
  Interval denominator;
  Interval rate_interval;
};

RateBounds rate_bounds(const SetFamily& afam, const SetFamily& bfam, const SetFamily& ffam,
                       int m_max, const Tolerances& tol = default_tolerances());

/// Overload with separate free families for source and target systems (the
/// two sides may live on different local dimensions).
RateBounds rate_bounds(const SetFamily& afam, const SetFamily& bfam, const SetFamily& afree,
                       const SetFamily& bfree, int m_max,
                       const Tolerances& tol = default_tolerances());

}  // namespace qsd

#endif
