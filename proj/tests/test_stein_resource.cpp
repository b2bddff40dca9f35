#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qsd/divergences.hpp"
#include "qsd/resource.hpp"
#include "qsd/stein.hpp"

#include "oracles.hpp"

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

DensityOperator uniform_qutrit() {
  Matrix m = Matrix::Constant(3, 3, 1.0 / 3.0);
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

Eigen::VectorXd kron_prob(const Eigen::VectorXd& p, int n) {
  Eigen::VectorXd out = p;
  for (int k = 1; k < n; ++k) {
    Eigen::VectorXd next(out.size() * p.size());
    for (int i = 0; i < out.size(); ++i)
      for (int j = 0; j < p.size(); ++j) next[i * p.size() + j] = out[i] * p[j];
    out = next;
  }
  return out;
}

}  // namespace

TEST_CASE("stein table stays inside its one-shot envelope") {
  SetFamily afam(StateSet::singleton(tilted_a()));
  SetFamily bfam(StateSet::singleton(tilted_b()));
  auto rows = stein_table(afam, bfam, 0.3, 5);
  REQUIRE(rows.size() == 5);
  for (const auto& row : rows) {
    CHECK(std::isfinite(row.dh_per_n));
    CHECK(row.floor <= row.ceiling + 1e-9);
    CHECK(row.dh_per_n >= row.floor - 1e-4);
    CHECK(row.dh_per_n <= row.ceiling + 1e-4);
  }
  // block gains: n dh_per_n is nondecreasing in n for product hypotheses
  for (size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].dh_per_n * rows[i].n >= rows[i - 1].dh_per_n * rows[i - 1].n - 1e-6);
}

TEST_CASE("identical families reduce the table to the epsilon floor") {
  SetFamily fam(StateSet::singleton(tilted_b()));
  auto rows = stein_table(fam, fam, 0.4, 4);
  for (const auto& row : rows)
    CHECK(row.dh_per_n == doctest::Approx(-std::log2(0.6) / row.n).epsilon(1e-6));
}

TEST_CASE("commuting pair matches the classical likelihood-ratio oracle") {
  SetFamily afam(StateSet::singleton(diag_state({0.7, 0.3})));
  SetFamily bfam(StateSet::singleton(diag_state({0.4, 0.6})));
  Eigen::VectorXd p(2), q(2);
  p << 0.7, 0.3;
  q << 0.4, 0.6;
  const double eps = 0.25;
  auto rows = stein_table(afam, bfam, eps, 5);
  for (const auto& row : rows) {
    double beta = oracle::classical_beta(eps, kron_prob(p, row.n), kron_prob(q, row.n));
    CHECK(row.dh_per_n == doctest::Approx(-std::log2(beta) / row.n).epsilon(1e-6));
  }
}

TEST_CASE("stein table rejects bad inputs") {
  SetFamily fam(StateSet::singleton(tilted_a()));
  CHECK_THROWS_AS(stein_table(fam, fam, 0.0, 3), precondition_error);
  CHECK_THROWS_AS(stein_table(fam, fam, 0.3, 0), precondition_error);
  CHECK_THROWS_AS(stein_table(fam, fam, 0.3, 13), resource_limit_error);
}

TEST_CASE("global robustness of qubit coherence") {
  StateSet inc = StateSet::incoherent(2);
  CHECK(global_robustness(ket_plus(), inc) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(global_robustness(diag_state({0.3, 0.7}), inc) == doctest::Approx(0.0).epsilon(1e-7));
  // zero exactly when the state is free
  CHECK(contains(inc, diag_state({0.3, 0.7}).base, 1e-7));
  CHECK(!contains(inc, ket_plus().base, 1e-7));
  CHECK(global_robustness(ket_plus(), inc) > 0.5);
}

TEST_CASE("protocol construction distills the coherence test") {
  SetFamily afam(StateSet::singleton(ket_plus()));
  SetFamily bfam(StateSet::singleton(ket_plus()));
  SetFamily ffam(StateSet::incoherent(2));
  const double eps = 0.2;
  ProtocolMap p = build_rng_protocol(afam, ffam, bfam, 1, 1, eps, 1.0, Tolerances{});
  CHECK(p.test.type1 <= eps / 2.0 + 1e-9);
  CHECK(p.test.type2 <= 1.0 + 1e-9);
  CHECK(p.target.trace() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(p.free_target.trace() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(p.delta_target == doctest::Approx(0.5).epsilon(1e-12));
  // trace preservation on a probe input
  CHECK(p.apply(tilted_a()).trace() == doctest::Approx(1.0).epsilon(1e-9));

  AuditReport rep = protocol_audit(p, afam, bfam, ffam, 1, 1, 8);
  CHECK(!rep.heuristic);
  CHECK(rep.trans_error <= eps + 5e-3);
  CHECK(rep.rng_violation <= p.delta_target + 5e-3);
}

TEST_CASE("null protocol on an all-free instance generates nothing") {
  SetFamily fam(StateSet::incoherent(2));
  ProtocolMap p = build_rng_protocol(fam, fam, fam, 1, 1, 0.2, 3.0, Tolerances{});
  AuditReport rep = protocol_audit(p, fam, fam, fam, 1, 1, 8);
  CHECK(rep.trans_error <= 5e-3);
  CHECK(rep.rng_violation <= 5e-3);
}

TEST_CASE("identity protocol on a singleton is exact") {
  SetFamily fam(StateSet::singleton(tilted_a()));
  ProtocolMap p;
  p.test.m = HermitianOperator::identity(2);
  p.test.type1 = 0.0;
  p.test.type2 = 1.0;
  p.target = tilted_a();
  p.free_target = tilted_a();
  AuditReport rep = protocol_audit(p, fam, fam, fam, 1, 1, 4);
  CHECK(rep.trans_error <= 1e-7);
  CHECK(rep.rng_violation <= 1e-7);
}

TEST_CASE("audit flags a protocol whose target misses the goal set") {
  DensityOperator k0 = diag_state({1.0, 0.0});
  DensityOperator k1 = diag_state({0.0, 1.0});
  SetFamily afam(StateSet::singleton(k0));
  SetFamily bfam(StateSet::singleton(k1));
  ProtocolMap p;
  p.test.m = HermitianOperator::identity(2);
  p.target = k0;
  p.free_target = k0;
  AuditReport rep = protocol_audit(p, afam, bfam, afam, 1, 1, 2);
  CHECK(rep.trans_error == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("protocol builder rejects bad parameters") {
  SetFamily afam(StateSet::singleton(ket_plus()));
  SetFamily ffam(StateSet::incoherent(2));
  SetFamily qutrit(StateSet::incoherent(3));
  CHECK_THROWS_AS(build_rng_protocol(afam, ffam, afam, 1, 1, 1.0, 1.0, Tolerances{}),
                  precondition_error);
  CHECK_THROWS_AS(build_rng_protocol(afam, ffam, afam, 0, 1, 0.2, 1.0, Tolerances{}),
                  precondition_error);
  CHECK_THROWS_AS(build_rng_protocol(afam, ffam, afam, 1, 1, 0.2, -1.0, Tolerances{}),
                  precondition_error);
  CHECK_THROWS_AS(build_rng_protocol(afam, qutrit, afam, 1, 1, 0.2, 1.0, Tolerances{}),
                  precondition_error);
}

TEST_CASE("rate interval of a self-conversion contains one") {
  SetFamily afam(StateSet::singleton(ket_plus()));
  SetFamily ffam(StateSet::incoherent(2));
  RateBounds r1 = rate_bounds(afam, afam, ffam, 1);
  RateBounds r2 = rate_bounds(afam, afam, ffam, 2);
  for (const auto& r : {r1, r2}) {
    CHECK(r.rate_interval.lo <= 1.0 + 1e-9);
    CHECK(r.rate_interval.hi >= 1.0 - 1e-9);
    CHECK(r.numerator.lo <= r.numerator.hi + 1e-9);
    CHECK(r.denominator.lo > 0.0);
  }
  // deeper blocks can only tighten the interval
  CHECK(r2.rate_interval.lo >= r1.rate_interval.lo - 1e-9);
  CHECK(r2.rate_interval.hi <= r1.rate_interval.hi + 1e-9);
}

TEST_CASE("qubit to qutrit coherence rate brackets the dimension ratio") {
  SetFamily afam(StateSet::singleton(ket_plus()));
  SetFamily bfam(StateSet::singleton(uniform_qutrit()));
  SetFamily afree(StateSet::incoherent(2));
  SetFamily bfree(StateSet::incoherent(3));
  RateBounds r = rate_bounds(afam, bfam, afree, bfree, 2);
  const double want = 1.0 / std::log2(3.0);
  CHECK(r.rate_interval.lo <= want + 1e-9);
  CHECK(r.rate_interval.hi >= want - 1e-9);
  CHECK(r.rate_interval.hi - r.rate_interval.lo <= 0.05);
}

TEST_CASE("conversion into a free target has no defined rate") {
  SetFamily afam(StateSet::singleton(ket_plus()));
  SetFamily bfam(StateSet::singleton(diag_state({0.5, 0.5})));
  SetFamily ffam(StateSet::incoherent(2));
  CHECK_THROWS_AS(rate_bounds(afam, bfam, ffam, 1), precondition_error);
}
