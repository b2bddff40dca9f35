#include "qsd/aep.hpp"

#include <algorithm>
#include <cmath>

namespace qsd {

namespace {

int local_dimension(const SetFamily& fam) { return fam.base().dim; }

// a-priori width of the sandwich at block length m in bits
double gap_guarantee_bits(int d, int m) {
  return 2.0 * (double(d) * d + d) * std::log2(double(m) + d) / m;
}

bool families_validate(const SetFamily& afam, const SetFamily& bfam, int m,
                       const Tolerances& tol) {
  // validate at the largest level pair that stays cheap
  int d = std::max(local_dimension(afam), 2);
  int mm = m;
  while (mm > 1 && std::pow(double(d), mm + 1) > 64.0) --mm;
  return validate_assumptions(afam, mm, 1, 2, 17, tol).all_ok() &&
         validate_assumptions(bfam, mm, 1, 2, 17, tol).all_ok();
}

void require_block(const SetFamily& fam, int m, const Tolerances& tol) {
  int d = local_dimension(fam);
  double need = std::pow(double(d), 2.0 * m);
  if (need > double(tol.dim_cap))
    throw resource_limit_error("block length exceeds the dimension cap");
}

}  // namespace

AepBounds aep_sandwich(const SetFamily& afam, const SetFamily& bfam, int m,
                       const Tolerances& tol) {
  if (m < 1) throw precondition_error("block length must be at least 1");
  require_block(afam, m, tol);

  StateSet am = afam.level(m);
  StateSet bm = bfam.level(m);

  AepBounds row;
  row.m = m;
  row.gap_guarantee = gap_guarantee_bits(local_dimension(afam), m);
  row.heuristic = !families_validate(afam, bfam, m, tol);

  SetDivergenceResult lower = dm_sets(am, bm, tol);
  SetDivergenceResult upper = d_sets(am, bm, tol);
  if (lower.infinite || upper.infinite)
    throw convergence_error("sandwich is unbounded at this block length", 0.0);
  // the certified side of each solver: the dual bound below, the primal above
  row.lower = std::min(lower.dual_value, lower.value) / m;
  row.upper = upper.value / m;
  row.heuristic = row.heuristic || lower.heuristic || upper.heuristic;
  return row;
}

RegularizedEstimate regularized_estimate(const SetFamily& afam, const SetFamily& bfam, int m_max,
                                         const Tolerances& tol) {
  if (m_max < 1) throw precondition_error("need at least one block length");
  require_block(afam, m_max, tol);

  RegularizedEstimate est;
  est.best_lower = -1e300;
  est.best_upper = 1e300;
  double prev_lower = -1e300;
  for (int m = 1; m <= m_max; ++m) {
    AepBounds row = aep_sandwich(afam, bfam, m, tol);
    est.best_lower = std::max(est.best_lower, row.lower);
    est.best_upper = std::min(est.best_upper, row.upper);
    if (row.lower < prev_lower - 1e-4) est.lower_monotone = false;
    prev_lower = std::max(prev_lower, row.lower);
    est.table.push_back(row);
  }
  return est;
}

double envelope_f(int n, double eps) {
  if (n < 2) throw precondition_error("envelope profile needs n >= 2");
  if (!(eps > 0.0 && eps < 1.0)) throw precondition_error("epsilon must lie in (0,1)");
  return std::pow(double(n), 2.0 / 3.0) * std::log2(double(n)) *
         std::cbrt(std::log2(1.0 / eps));
}

std::pair<double, double> envelope_window(const EnvelopeParams& params, int n, double dinf_lo,
                                          double dinf_hi) {
  if (!(params.C > 0.0)) throw precondition_error("constant budget must be positive");
  double f = envelope_f(n, params.epsilon);
  return {n * dinf_lo - params.Cprime * f, n * dinf_hi + params.Cprime * f};
}

AlphaWindowReport alpha_window_bounds(const SetFamily& afam, const SetFamily& bfam, int m,
                                      double alpha, double C, const Tolerances& tol) {
  if (m < 2) throw precondition_error("window bounds need block length at least 2");
  if (!(C > 0.0)) throw precondition_error("constant budget must be positive");
  double width = 1.0 / ((2.0 + C) * m);

  AlphaWindowReport rep;
  rep.m = m;
  rep.alpha = alpha;
  bool below = alpha < 1.0;
  rep.window_lo = below ? 1.0 - width : 1.0;
  rep.window_hi = below ? 1.0 : 1.0 + width;
  if (!(alpha > rep.window_lo && alpha < rep.window_hi))
    throw precondition_error("alpha lies outside the admissible window");

  StateSet am = afam.level(m);
  StateSet bm = bfam.level(m);
  // below the window the measured Renyi order applies, above it the
  // sandwiched order (which dominates the regularized value there)
  SetDivergenceResult term = below ? dm_alpha_sets(alpha, am, bm, tol)
                                   : sandwiched_sets(alpha, am, bm, tol);
  if (term.infinite) throw convergence_error("Renyi term is unbounded", 0.0);
  rep.term_lo = std::min(term.value, term.dual_value) / m;
  rep.term_hi = std::max(term.value, term.dual_value) / m;

  RegularizedEstimate est = regularized_estimate(afam, bfam, m, tol);
  rep.dinf_lo = est.best_lower;
  rep.dinf_hi = est.best_upper;

  int d = local_dimension(afam);
  rep.rhs = std::abs(1.0 - alpha) * (2.0 + C) * (2.0 + C) * m + gap_guarantee_bits(d, m);

  const double slack = 1e-4;
  if (below) {
    // 0 <= Dinf - term <= rhs, asserted against the interval endpoints
    rep.left_ok = rep.dinf_hi - rep.term_lo >= -slack;
    rep.right_ok = rep.dinf_lo - rep.term_hi <= rep.rhs + slack;
  } else {
    // 0 <= term - Dinf <= rhs
    rep.left_ok = rep.term_hi - rep.dinf_lo >= -slack;
    rep.right_ok = rep.term_lo - rep.dinf_hi <= rep.rhs + slack;
  }
  rep.ok = rep.left_ok && rep.right_ok;
  return rep;
}

ConstantBudgetReport constant_budget_check(const SetFamily& afam, const SetFamily& bfam, int m,
                                           double C, const Tolerances& tol) {
  if (m < 1) throw precondition_error("block length must be at least 1");
  if (!(C > 0.0)) throw precondition_error("constant budget must be positive");
  require_block(afam, m, tol);

  StateSet am = afam.level(m);
  StateSet bm = bfam.level(m);

  ConstantBudgetReport rep;
  rep.budget = C * m / 4.0;

  for (int i = 0; i <= 8; ++i) {
    double alpha = 0.5 + i * 0.0625;
    SetDivergenceResult pair =
        (i == 8) ? d_sets(am, bm, tol) : petz_sets(alpha, am, bm, tol);
    if (pair.infinite) {
      rep.ok = false;
      rep.violations.push_back("no finite minimizing pair at order " + std::to_string(alpha));
      continue;
    }
    // evaluate the order-3/2 divergence at the minimizing pair; unnormalized
    // second members enter through the exact scaling shift
    double c = std::max(std::real(pair.sigma_witness.entries.trace()), 1e-300);
    DensityOperator rw(pair.rho_witness);
    DensityOperator sw(HermitianOperator(Matrix(pair.sigma_witness.entries / c), {}, tol));
    DivergenceResult p32 = petz(1.5, rw, sw, tol);
    double value = p32.infinite ? 1e300 : p32.value - std::log2(c);
    rep.max_petz32 = std::max(rep.max_petz32, value);
    if (value > rep.budget) {
      rep.ok = false;
      rep.violations.push_back("order-3/2 divergence " + std::to_string(value) +
                               " exceeds the budget at order " + std::to_string(alpha));
    }
  }

  // trace growth of the second family's members
  std::vector<HermitianOperator> sigmas;
  if (auto gens = enumerate_generators(bm); gens && gens->size() <= 16) {
    sigmas = *gens;
  }
  Rng rng(23);
  for (int s = 0; s < 4; ++s) sigmas.push_back(sample_member(bm, rng, tol));
  for (const auto& s : sigmas) {
    double lt = std::log2(std::max(s.trace(), 1e-300));
    rep.max_log_trace = std::max(rep.max_log_trace, lt);
    if (lt > rep.budget) {
      rep.ok = false;
      rep.violations.push_back("member trace " + std::to_string(lt) + " exceeds the budget");
    }
  }
  return rep;
}

}  // namespace qsd
