#ifndef QSD_AEP_HPP
#define QSD_AEP_HPP

#include <string>
#include <utility>
#include <vector>

#include "qsd/set_divergence.hpp"

namespace qsd {

/// One row of the finite-blocklength sandwich on the regularized divergence:
/// lower and upper are certified per-copy bounds computed at block length m,
/// and gap_guarantee is the a-priori width 2(d^2+d) log2(m+d) / m.
struct AepBounds {
  int m = 0;
  double lower = 0.0;  // certified lower bound: measured set divergence / m
  double upper = 0.0;  // certified upper bound: umegaki set divergence / m
  double gap_guarantee = 0.0;
  bool heuristic = false;  // assumption validation failed or a solver leaned on one
};

/// Policy constants for the second-order envelope assembly. C is the constant
/// budget of the alpha-window bounds; Cprime scales the envelope and is a
/// user-supplied policy value, not derived here.
struct EnvelopeParams {
  double C = 1.0;
  double Cprime = 1.0;
  int d = 2;
  double epsilon = 0.5;
};

/// Sandwich at a single block length.
AepBounds aep_sandwich(const SetFamily& afam, const SetFamily& bfam, int m,
                       const Tolerances& tol = default_tolerances());

struct RegularizedEstimate {
  double best_lower = 0.0;  // max over m of the lower bounds
  double best_upper = 0.0;  // min over m of the upper bounds
  std::vector<AepBounds> table;
  bool lower_monotone = true;  // lower(m) nondecreasing across the table
};

/// Converging interval for the regularized divergence from all block lengths
/// up to m_max. The interval is the deliverable: the limit itself is only
/// ever bracketed, never reported as a point.
RegularizedEstimate regularized_estimate(const SetFamily& afam, const SetFamily& bfam, int m_max,
                                         const Tolerances& tol = default_tolerances());

/// Envelope profile n^{2/3} log2(n) (log2(1/eps))^{1/3}; requires n >= 2.
double envelope_f(int n, double eps);

/// [n*lo - Cprime*f, n*hi + Cprime*f]: the second-order window around n times
/// the regularized divergence interval [lo, hi].
std::pair<double, double> envelope_window(const EnvelopeParams& params, int n, double dinf_lo,
                                          double dinf_hi);

/// Two-sided check of the alpha-window approximation at block length m:
/// below the window (alpha < 1) the measured Renyi term sits under the
/// regularized divergence by at most rhs; above it (alpha > 1) the sandwiched
/// term sits over by at most rhs, where
/// rhs = |1-alpha| (2+C)^2 m + 2(d^2+d) log2(m+d) / m.
struct AlphaWindowReport {
  int m = 0;
  double alpha = 0.0;
  double window_lo = 0.0, window_hi = 0.0;  // admissible alpha range used
  double term_lo = 0.0, term_hi = 0.0;      // certified interval of the Renyi term / m
  double dinf_lo = 0.0, dinf_hi = 0.0;      // regularized divergence interval
  double rhs = 0.0;
  bool left_ok = false;   // the >= 0 side against the interval endpoints
  bool right_ok = false;  // the <= rhs side against the interval endpoints
  bool ok = false;
};

AlphaWindowReport alpha_window_bounds(const SetFamily& afam, const SetFamily& bfam, int m,
                                      double alpha, double C,
                                      const Tolerances& tol = default_tolerances());

/// Checks the constant budget the alpha-window bounds assume: over a 9-point
/// grid of orders in [1/2, 1], the minimizing pairs of the Petz set divergence
/// keep D_{Petz,3/2} at most C m / 4, and every sampled member of the second
/// family keeps log2 of its trace at most C m / 4.
struct ConstantBudgetReport {
  bool ok = true;
  double max_petz32 = 0.0;     // worst D_{Petz,3/2} over the grid pairs
  double max_log_trace = 0.0;  // worst log2 tr(sigma_m) over samples
  double budget = 0.0;         // C m / 4
  std::vector<std::string> violations;
};

ConstantBudgetReport constant_budget_check(const SetFamily& afam, const SetFamily& bfam, int m,
                                           double C,
                                           const Tolerances& tol = default_tolerances());

}  // namespace qsd

#endif
