#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qsd/aep.hpp"
#include "qsd/divergences.hpp"

using namespace qsd;

namespace {

DensityOperator diag_state(std::initializer_list<double> vals) {
  int d = static_cast<int>(vals.size());
  Matrix m = Matrix::Zero(d, d);
  int i = 0;
  for (double v : vals) {
    m(i, i) = v;
    ++i;
  }
  return DensityOperator(m);
}

DensityOperator ket_plus() {
  Matrix m = Matrix::Constant(2, 2, 0.5);
  return DensityOperator(m);
}

DensityOperator tilted_a() {
  Matrix m(2, 2);
  m << 0.7, std::complex<double>(0.2, 0.1), std::complex<double>(0.2, -0.1), 0.3;
  return DensityOperator(m);
}

DensityOperator tilted_b() {
  Matrix m(2, 2);
  m << 0.4, std::complex<double>(-0.1, 0.05), std::complex<double>(-0.1, -0.05), 0.6;
  return DensityOperator(m);
}

}  // namespace

TEST_CASE("single-copy sandwich on a fixed qubit pair") {
  SetFamily afam(StateSet::singleton(tilted_a()));
  SetFamily bfam(StateSet::singleton(tilted_b()));
  AepBounds row = aep_sandwich(afam, bfam, 1);
  double d1 = umegaki(tilted_a(), tilted_b()).value;
  CHECK(row.upper == doctest::Approx(d1).epsilon(1e-9));
  CHECK(row.lower <= row.upper + 1e-4);
  CHECK(row.gap_guarantee == doctest::Approx(12.0 * std::log2(3.0)).epsilon(1e-12));
  CHECK(row.upper - row.lower <= row.gap_guarantee + 1e-4);
  CHECK(!row.heuristic);

  AepBounds row2 = aep_sandwich(afam, bfam, 2);
  CHECK(row2.upper == doctest::Approx(d1).epsilon(1e-6));  // additive upper bound
  CHECK(row2.lower >= row.lower - 1e-4);                   // lower bounds improve
}

TEST_CASE("identical families collapse the sandwich to zero") {
  SetFamily fam(StateSet::singleton(tilted_b()));
  AepBounds row = aep_sandwich(fam, fam, 2);
  CHECK(std::abs(row.lower) <= 1e-6);
  CHECK(std::abs(row.upper) <= 1e-6);
}

TEST_CASE("regularized estimate tables") {
  SetFamily afam(StateSet::singleton(tilted_a()));
  SetFamily bfam(StateSet::singleton(tilted_b()));
  RegularizedEstimate est = regularized_estimate(afam, bfam, 2);
  REQUIRE(est.table.size() == 2);
  CHECK(est.best_upper == doctest::Approx(umegaki(tilted_a(), tilted_b()).value).epsilon(1e-6));
  CHECK(est.best_lower <= est.best_upper + 1e-4);
  CHECK(est.lower_monotone);

  // the relative entropy of coherence of |+><+| is exactly one bit, and the
  // family interval has to bracket it at every depth
  SetFamily plus_fam(StateSet::singleton(ket_plus()));
  SetFamily inc_fam(StateSet::incoherent(2));
  RegularizedEstimate coh = regularized_estimate(plus_fam, inc_fam, 2);
  CHECK(coh.best_lower <= 1.0 + 1e-6);
  CHECK(coh.best_upper >= 1.0 - 1e-6);
  CHECK(coh.best_upper - coh.best_lower <= 1e-3);
}

TEST_CASE("block length caps are enforced") {
  SetFamily afam(StateSet::singleton(tilted_a()));
  SetFamily bfam(StateSet::singleton(tilted_b()));
  CHECK_THROWS_AS(regularized_estimate(afam, bfam, 7), resource_limit_error);
  CHECK_THROWS_AS(aep_sandwich(afam, bfam, 0), precondition_error);
}

TEST_CASE("envelope profile") {
  CHECK(envelope_f(8, 0.5) == doctest::Approx(12.0).epsilon(1e-12));
  CHECK_THROWS_AS(envelope_f(1, 0.5), precondition_error);
  CHECK_THROWS_AS(envelope_f(8, 0.0), precondition_error);

  for (int n = 3; n < 10; ++n) CHECK(envelope_f(n + 1, 0.3) > envelope_f(n, 0.3));
  CHECK(envelope_f(16, 0.1) > envelope_f(16, 0.2));
  CHECK(envelope_f(8, 1.0 - 1e-9) <= 0.05);  // vanishes as epsilon approaches 1

  // sublinear growth: the per-copy contribution dies off
  double r3 = envelope_f(1000, 0.5) / 1000.0;
  double r6 = envelope_f(1000000, 0.5) / 1000000.0;
  CHECK(r6 < r3);
  CHECK(r6 < 0.2);

  EnvelopeParams params{1.0, 2.0, 2, 0.5};
  auto [lo, hi] = envelope_window(params, 8, 0.9, 1.1);
  CHECK(lo == doctest::Approx(8 * 0.9 - 2.0 * 12.0).epsilon(1e-12));
  CHECK(hi == doctest::Approx(8 * 1.1 + 2.0 * 12.0).epsilon(1e-12));
}

TEST_CASE("alpha-window bounds hold on the singleton instance") {
  SetFamily afam(StateSet::singleton(tilted_a()));
  SetFamily bfam(StateSet::singleton(tilted_b()));
  double C = 2.0;
  int m = 2;
  double width = 1.0 / ((2.0 + C) * m);

  AlphaWindowReport below = alpha_window_bounds(afam, bfam, m, 1.0 - width / 2.0, C);
  CHECK(below.ok);
  CHECK(below.term_lo <= below.dinf_hi + 1e-4);

  AlphaWindowReport above = alpha_window_bounds(afam, bfam, m, 1.0 + width / 2.0, C);
  CHECK(above.ok);
  CHECK(above.term_hi >= above.dinf_lo - 1e-4);

  // close to order one the right-hand side collapses to the dimension term
  double near = 1.0 - width / 1000.0;
  AlphaWindowReport tight = alpha_window_bounds(afam, bfam, m, near, C);
  double dim_term = 12.0 * std::log2(double(m) + 2.0) / m;
  CHECK(tight.rhs == doctest::Approx(dim_term + (1.0 - near) * 16.0 * m).epsilon(1e-9));

  CHECK_THROWS_AS(alpha_window_bounds(afam, bfam, m, 0.5, C), precondition_error);
  CHECK_THROWS_AS(alpha_window_bounds(afam, bfam, m, 1.5, C), precondition_error);
  CHECK_THROWS_AS(alpha_window_bounds(afam, bfam, 1, 1.0 - width, C), precondition_error);
}

TEST_CASE("constant budget checker") {
  SetFamily afam(StateSet::singleton(tilted_a()));
  SetFamily bfam(StateSet::singleton(tilted_b()));
  int m = 1;
  double d32 = petz(1.5, tilted_a(), tilted_b()).value;
  double C = 4.0 * std::max(d32, 0.0) / m + 1.0;
  ConstantBudgetReport good = constant_budget_check(afam, bfam, m, C);
  CHECK(good.ok);
  CHECK(good.max_petz32 == doctest::Approx(d32).epsilon(1e-6));

  // a singular second member forces an infinite order-3/2 divergence
  SetFamily pure_fam(StateSet::singleton(diag_state({1.0, 0.0})));
  ConstantBudgetReport bad = constant_budget_check(afam, pure_fam, m, 100.0);
  CHECK(!bad.ok);
  CHECK(!bad.violations.empty());

  ConstantBudgetReport same = constant_budget_check(bfam, bfam, m, 0.05);
  CHECK(same.ok);
}
