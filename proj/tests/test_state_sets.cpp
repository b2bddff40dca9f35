#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qsd/error.hpp"
#include "qsd/random.hpp"
#include "qsd/state_set.hpp"

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

HermitianOperator herm(const Matrix& m, std::vector<int> factors = {}) {
  HermitianOperator out;
  out.entries = (m + m.adjoint()) / 2.0;
  out.factor_dims = factors.empty() ? std::vector<int>{static_cast<int>(m.rows())} : factors;
  return out;
}

HermitianOperator random_psd(int d, Rng& rng, std::vector<int> factors = {}) {
  Matrix g = ginibre(d, d, rng);
  Matrix x = g * g.adjoint();
  return herm(x / x.norm(), std::move(factors));
}

// projector onto the canonical maximally entangled vector on d x d
HermitianOperator entangled_projector(int d) {
  Vector v = Vector::Zero(d * d);
  for (int i = 0; i < d; ++i) v[i * d + i] = 1.0 / std::sqrt(static_cast<double>(d));
  return herm(v * v.adjoint(), {d, d});
}

std::vector<Matrix> depolarizing_kraus(double p) {
  Matrix id = Matrix::Identity(2, 2);
  Matrix sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, Complex(0, -1), Complex(0, 1), 0;
  sz << 1, 0, 0, -1;
  return {std::sqrt(1.0 - 3.0 * p / 4.0) * id, std::sqrt(p / 4.0) * sx, std::sqrt(p / 4.0) * sy,
          std::sqrt(p / 4.0) * sz};
}

StateSet make_kind(SetKind kind, Rng& rng) {
  switch (kind) {
    case SetKind::singleton:
      return StateSet::singleton(random_density(3, rng));
    case SetKind::hull:
      return StateSet::hull({random_density(3, rng), random_density(3, rng), random_density(3, rng)});
    case SetKind::conditional:
      return StateSet::conditional({2, 2}, {0}, 0.5);
    case SetKind::channel_image:
      return StateSet::channel_image(depolarizing_kraus(0.3), 2);
    case SetKind::incoherent:
      return StateSet::incoherent(3);
    case SetKind::rains:
      return StateSet::rains({2, 2}, {1});
    case SetKind::mana:
      return StateSet::mana(3);
    default:
      throw precondition_error("unsupported kind in test helper");
  }
}

}  // namespace

TEST_CASE("phase-point operators satisfy the standard algebra") {
  for (int d : {3, 5}) {
    std::vector<Matrix> ops = phase_point_operators(d);
    REQUIRE(static_cast<int>(ops.size()) == d * d);
    Matrix sum = Matrix::Zero(d, d);
    for (const Matrix& a : ops) {
      CHECK((a - a.adjoint()).norm() < 1e-12);
      CHECK(std::abs(a.trace().real() - 1.0) < 1e-12);
      sum += a;
    }
    CHECK((sum - static_cast<double>(d) * Matrix::Identity(d, d)).norm() < 1e-10);
    for (size_t u = 0; u < ops.size(); ++u)
      for (size_t v = u; v < ops.size(); ++v) {
        double expect = u == v ? static_cast<double>(d) : 0.0;
        CHECK(std::abs((ops[u] * ops[v]).trace().real() - expect) < 1e-10);
      }
  }
}

TEST_CASE("wigner coordinates reproduce trace and recover the operator") {
  Rng rng(71);
  std::vector<Matrix> ops = phase_point_operators(3);
  DensityOperator rho = random_density(3, rng);
  RealVector w = wigner_coordinates(rho.matrix(), ops);
  CHECK(std::abs(w.sum() - 1.0) < 1e-10);
  Matrix rebuilt = Matrix::Zero(3, 3);
  for (size_t u = 0; u < ops.size(); ++u) rebuilt += w[static_cast<long long>(u)] * ops[u];
  CHECK((rebuilt - rho.matrix()).norm() < 1e-10);
}

TEST_CASE("singleton support functions are the plain pairing") {
  Rng rng(11);
  DensityOperator rho = random_density(3, rng);
  StateSet s = StateSet::singleton(rho);
  HermitianOperator x = random_psd(3, rng);
  double expect = std::real((x.entries * rho.matrix()).trace());
  SupportValue up = max_linear(s, x);
  SupportValue lo = min_linear(s, x);
  CHECK(up.exact);
  CHECK(std::abs(up.value - expect) < 1e-12);
  CHECK(std::abs(lo.value - expect) < 1e-12);
  CHECK(std::abs(up.value - std::real((x.entries * up.witness.entries).trace())) < 1e-8);
}

TEST_CASE("hull support functions scan the generators") {
  StateSet s = StateSet::hull({diag_state({1, 0}), diag_state({0, 1})});
  Matrix x(2, 2);
  x << 3, 0, 0, 5;
  CHECK(max_linear(s, herm(x)).value == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(min_linear(s, herm(x)).value == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("conditional sets see the partial-trace spectrum") {
  StateSet s = StateSet::conditional({2, 3}, {0}, 1.0);
  HermitianOperator id = herm(Matrix::Identity(6, 6), {2, 3});
  CHECK(max_linear(s, id).value == doctest::Approx(2.0).epsilon(1e-12));

  Rng rng(5);
  HermitianOperator x = random_psd(6, rng, {2, 3});
  Matrix marg = partial_trace(x.entries, {2, 3}, {1});
  Eigen::SelfAdjointEigenSolver<Matrix> es(marg);
  SupportValue up = max_linear(s, x);
  SupportValue lo = min_linear(s, x);
  CHECK(up.value == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-10));
  CHECK(lo.value == doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-10));
  CHECK(contains(s, up.witness, 1e-7));
  CHECK(std::abs(up.value - std::real((x.entries * up.witness.entries).trace())) < 1e-8);

  // a scaled identity block shrinks the value by its weight
  StateSet half = StateSet::conditional({2, 3}, {0}, 0.5);
  CHECK(max_linear(half, x).value == doctest::Approx(0.5 * up.value).epsilon(1e-10));
}

TEST_CASE("channel image reduces to the adjoint channel") {
  Rng rng(9);
  StateSet s = StateSet::channel_image(depolarizing_kraus(0.35), 2);
  HermitianOperator x = random_psd(2, rng);
  SupportValue up = max_linear(s, x);
  // no image point can beat the adjoint-spectrum bound
  for (int t = 0; t < 50; ++t) {
    DensityOperator pre = random_density(2, rng);
    Matrix img = Matrix::Zero(2, 2);
    for (const Matrix& k : depolarizing_kraus(0.35)) img += k * pre.matrix() * k.adjoint();
    CHECK(std::real((x.entries * img).trace()) <= up.value + 1e-10);
  }
  CHECK(contains(s, up.witness, 1e-6));
  CHECK(std::abs(up.value - std::real((x.entries * up.witness.entries).trace())) < 1e-8);
}

TEST_CASE("incoherent sets read the diagonal") {
  StateSet s = StateSet::incoherent(2);
  Matrix x(2, 2);
  x << 0.2, 0.1, 0.1, 0.8;
  CHECK(max_linear(s, herm(x)).value == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(min_linear(s, herm(x)).value == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("rains oracle certifies the maximally entangled value") {
  for (int d : {2, 3}) {
    StateSet s = StateSet::rains({d, d}, {1});
    SupportValue res = max_linear(s, entangled_projector(d));
    CHECK_FALSE(res.exact);
    CHECK(res.gap <= 1e-7 + 1e-12);
    CHECK(std::abs(res.value - 1.0 / d) < 1e-6);
    // witness feasibility: PSD floor and partial-transpose norm cap
    Eigen::SelfAdjointEigenSolver<Matrix> es(res.witness.entries);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);
    double n1 = trace_norm_herm(partial_transpose(res.witness.entries, {d, d}, {1}));
    CHECK(n1 <= 1.0 + 1e-6);
    CHECK(contains(s, res.witness, 1e-6));
  }
}

TEST_CASE("mana oracle treats the identity as a boundary member") {
  StateSet s = StateSet::mana(3);
  SupportValue res = max_linear(s, herm(Matrix::Identity(3, 3) / 3.0));
  CHECK(res.gap <= 1e-7 + 1e-12);
  CHECK(std::abs(res.value - 1.0 / 3.0) < 1e-6);
  StateSet s2 = StateSet::mana(3);
  Matrix w = res.witness.entries;
  CHECK(wigner_coordinates(w, phase_point_operators(3)).cwiseAbs().sum() <= 1.0 + 1e-6);
  Eigen::SelfAdjointEigenSolver<Matrix> es(w);
  CHECK(es.eigenvalues().minCoeff() >= -1e-8);
  CHECK(contains(s2, res.witness, 1e-6));
}

TEST_CASE("support functions are homogeneous and ordered on every kind") {
  Rng rng(2024);
  for (SetKind kind : {SetKind::singleton, SetKind::hull, SetKind::conditional,
                       SetKind::channel_image, SetKind::incoherent, SetKind::rains,
                       SetKind::mana}) {
    StateSet s = make_kind(kind, rng);
    for (int t = 0; t < 3; ++t) {
      HermitianOperator x = random_psd(s.dim, rng, s.factor_dims);
      SupportValue up = max_linear(s, x);
      SupportValue lo = min_linear(s, x);
      CHECK(up.value >= lo.value - 1e-9);

      const double scale = 2.431;
      HermitianOperator xs = x;
      xs.entries *= scale;
      SupportValue ups = max_linear(s, xs);
      CHECK(std::abs(ups.value - scale * up.value) <= 1e-8 * std::max(1.0, std::abs(up.value)));

      double slack = up.exact ? 1e-7 : 1e-6;
      CHECK(contains(s, up.witness, slack));
    }
  }
}

TEST_CASE("polar membership matches the support value") {
  Rng rng(31);
  for (SetKind kind : {SetKind::singleton, SetKind::incoherent, SetKind::rains}) {
    StateSet s = make_kind(kind, rng);
    HermitianOperator zero = herm(Matrix::Zero(s.dim, s.dim), s.factor_dims);
    CHECK(polar_contains(s, zero, 1e-9));
  }
  Rng rng2(32);
  DensityOperator rho = random_density(3, rng2);
  StateSet s = StateSet::singleton(rho);
  double purity = std::real((rho.matrix() * rho.matrix()).trace());
  HermitianOperator w = herm(rho.matrix() / purity);
  CHECK(polar_contains(s, w, 1e-9));

  StateSet inc = StateSet::incoherent(2);
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 2.0;
  CHECK_FALSE(polar_contains(inc, herm(m), 1e-9));
}

TEST_CASE("membership tests accept members and reject outsiders") {
  Rng rng(77);
  for (SetKind kind : {SetKind::singleton, SetKind::hull, SetKind::conditional,
                       SetKind::channel_image, SetKind::incoherent, SetKind::rains,
                       SetKind::mana}) {
    StateSet s = make_kind(kind, rng);
    for (int t = 0; t < 4; ++t) {
      HermitianOperator x = sample_member(s, rng);
      CHECK(contains(s, x, 1e-7));
    }
  }
  // the maximally entangled projector breaks the partial-transpose norm cap
  StateSet r = StateSet::rains({2, 2}, {1});
  CHECK_FALSE(contains(r, entangled_projector(2), 1e-6));
  // coherence breaks diagonality
  StateSet inc = StateSet::incoherent(2);
  Matrix plus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  CHECK_FALSE(contains(inc, herm(plus), 1e-6));
  // wrong marginal structure breaks the conditional form
  StateSet cond = StateSet::conditional({2, 2}, {0}, 1.0);
  CHECK_FALSE(contains(cond, entangled_projector(2), 1e-6));
}

TEST_CASE("tensor composition follows the per-kind product rules") {
  Rng rng(123);
  DensityOperator rho = random_density(2, rng);
  DensityOperator sig = random_density(2, rng);
  StateSet prod = tensor(StateSet::singleton(rho), StateSet::singleton(sig));
  CHECK(prod.kind == SetKind::singleton);
  CHECK((prod.generators[0].entries - kron(rho.matrix(), sig.matrix())).norm() < 1e-12);

  StateSet inc2 = tensor(StateSet::incoherent(2), StateSet::incoherent(2));
  CHECK(inc2.kind == SetKind::incoherent);
  CHECK(inc2.dim == 4);

  StateSet hull2 = StateSet::hull({random_density(2, rng), random_density(2, rng)});
  CHECK_THROWS_AS(tensor(hull2, hull2), composition_error);
  StateSet mixed = tensor(hull2, StateSet::singleton(rho));
  CHECK(mixed.kind == SetKind::hull);
  CHECK(mixed.generators.size() == 2);

  StateSet cond = StateSet::conditional({2, 2}, {0}, 0.5);
  StateSet cond2 = tensor(cond, cond);
  CHECK(cond2.identity_positions == std::vector<int>({0, 2}));
  CHECK(cond2.identity_weight == doctest::Approx(0.25));
  // support values of product inputs multiply
  HermitianOperator x1 = random_psd(4, rng, {2, 2});
  HermitianOperator x2 = random_psd(4, rng, {2, 2});
  HermitianOperator x12;
  x12.entries = kron(x1.entries, x2.entries);
  x12.factor_dims = {2, 2, 2, 2};
  CHECK(max_linear(cond2, x12).value ==
        doctest::Approx(max_linear(cond, x1).value * max_linear(cond, x2).value).epsilon(1e-8));

  StateSet rr = tensor(StateSet::rains({2, 2}, {1}), StateSet::rains({2, 2}, {1}));
  CHECK(rr.transpose_positions == std::vector<int>({1, 3}));
}

TEST_CASE("family levels expand hulls into product strings") {
  Rng rng(55);
  DensityOperator a = random_density(2, rng);
  DensityOperator b = random_density(2, rng);
  SetFamily fam(StateSet::hull({a, b}));
  StateSet l2 = fam.level(2);
  CHECK(l2.kind == SetKind::hull);
  CHECK(l2.generators.size() == 4);
  CHECK((l2.generators[1].entries - kron(a.matrix(), b.matrix())).norm() < 1e-12);

  SetFamily sf(StateSet::singleton(a));
  StateSet s3 = sf.level(3);
  CHECK(s3.dim == 8);
  CHECK((s3.generators[0].entries - kron(kron(a.matrix(), a.matrix()), a.matrix())).norm() < 1e-12);
}

TEST_CASE("assumption validator passes the stock families") {
  Rng rng(99);
  SetFamily singleton_fam(StateSet::singleton(random_density(2, rng)));
  AssumptionReport r1 = validate_assumptions(singleton_fam, 1, 1, 4, 7);
  CHECK(r1.all_ok());

  SetFamily inc_fam(StateSet::incoherent(2));
  AssumptionReport r2 = validate_assumptions(inc_fam, 1, 2, 4, 7);
  CHECK(r2.all_ok());

  SetFamily cond_fam(StateSet::conditional({2, 2}, {0}, 0.5));
  AssumptionReport r3 = validate_assumptions(cond_fam, 1, 1, 4, 7);
  CHECK(r3.all_ok());

  SetFamily hull_fam(StateSet::hull({random_density(2, rng), random_density(2, rng)}));
  AssumptionReport r4 = validate_assumptions(hull_fam, 1, 1, 4, 7);
  CHECK(r4.all_ok());
}

TEST_CASE("assumption validator flags a family without closure") {
  // level one is the hull of two non-commuting pure states; higher levels
  // jump to the full density set, so the support function is lambda_max and
  // submultiplicativity against the level-one hull fails generically
  Vector v0(2), v1(2);
  v0 << 1, 0;
  v1 << std::sqrt(0.5), std::sqrt(0.5);
  DensityOperator p0{Matrix(v0 * v0.adjoint())};
  DensityOperator p1{Matrix(v1 * v1.adjoint())};
  StateSet base = StateSet::hull({p0, p1});
  SetFamily broken(base, [base](int n) {
    if (n == 1) return base;
    return StateSet::conditional(std::vector<int>(n, 2), {}, 1.0);
  });
  AssumptionReport report = validate_assumptions(broken, 1, 1, 6, 13);
  CHECK_FALSE(report.submultiplicative_ok);
  CHECK_FALSE(report.violations.empty());
}

TEST_CASE("factories reject malformed payloads") {
  CHECK_THROWS_AS(StateSet::hull({}), precondition_error);
  CHECK_THROWS_AS(StateSet::mana(4), precondition_error);
  CHECK_THROWS_AS(StateSet::mana(9), precondition_error);
  CHECK_THROWS_AS(StateSet::rains({2, 2}, {}), precondition_error);
  CHECK_THROWS_AS(StateSet::rains({2, 2}, {0, 1}), precondition_error);
  CHECK_THROWS_AS(StateSet::conditional({2, 2}, {0, 0}, 1.0), precondition_error);
  CHECK_THROWS_AS(StateSet::conditional({2, 2}, {}, 0.5), precondition_error);
  Matrix bad(2, 2);
  bad << 1, 0, 0, 0.5;
  CHECK_THROWS_AS(StateSet::channel_image({bad}, 2), precondition_error);
}
