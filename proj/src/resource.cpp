#include "qsd/resource.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "qsd/error.hpp"
#include "qsd/random.hpp"
#include "qsd/set_divergence.hpp"

namespace qsd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

HermitianOperator herm(const Matrix& m, const Tolerances& tol) {
  return HermitianOperator(m, {}, tol);
}

double inner(const Matrix& a, const Matrix& b) { return (a * b).trace().real(); }

// golden section minimization on [0,1]
double golden01(const std::function<double(double)>& f, double xtol) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0, b = 1.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > xtol) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  double mid = 0.5 * (a + b), fm = f(mid);
  if (f(0.0) <= fm) return 0.0;
  if (f(1.0) < fm) return 1.0;
  return mid;
}

DensityOperator as_state(const HermitianOperator& x, const Tolerances& tol) {
  double tr = x.trace();
  if (!(tr > 1e-12)) throw precondition_error("candidate state has nonpositive trace");
  return DensityOperator(herm(x.entries / tr, tol), TraceMode::normalized, tol);
}

// worst-case trace distance from t to the set: Frank-Wolfe on the convex
// objective (1/2)||t - sigma||_1 with the sign subgradient, linearization gap
// as the certificate
double dist_to_set(const DensityOperator& t, const StateSet& bset, const Tolerances& tol) {
  auto gens = enumerate_generators(bset);
  Matrix sig;
  if (gens && !gens->empty()) {
    sig = Matrix::Zero(bset.dim, bset.dim);
    for (const auto& g : *gens) sig += g.entries / static_cast<double>(gens->size());
  } else {
    Rng rng(29);
    sig = sample_member(bset, rng, tol).entries;
  }
  auto fval = [&](const Matrix& s) { return 0.5 * trace_norm_herm(t.matrix() - s); };
  double best = fval(sig);
  Matrix best_s = sig;
  for (int k = 0; k < 80; ++k) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(t.matrix() - sig));
    RealVector sgn(es.eigenvalues().size());
    for (int i = 0; i < sgn.size(); ++i) sgn[i] = es.eigenvalues()[i] >= 0.0 ? 1.0 : -1.0;
    Matrix grad = -0.5 * es.eigenvectors() * sgn.asDiagonal() * es.eigenvectors().adjoint();
    SupportValue dir = min_linear(bset, herm(grad, tol), tol);
    double gap = inner(grad, sig - dir.witness.entries);
    Matrix step = dir.witness.entries - sig;
    double u = golden01([&](double v) { return fval(sig + v * step); }, tol.golden_rel);
    sig += u * step;
    double cur = fval(sig);
    if (cur < best) {
      best = cur;
      best_s = sig;
    }
    if (k > 3 && gap < 1e-10) break;
  }
  return best;
}

}  // namespace

double global_robustness(const DensityOperator& rho, const StateSet& free_set,
                         const Tolerances& tol) {
  SetDivergenceResult r = dmax_sets(rho, free_set, tol);
  if (r.infinite) return kInf;
  return std::max(0.0, std::exp2(r.value) - 1.0);
}

DensityOperator ProtocolMap::apply(const DensityOperator& x, const Tolerances& tol) const {
  double pass = std::clamp(inner(test.m.entries, x.matrix()), 0.0, 1.0);
  Matrix out = pass * target.matrix() + (1.0 - pass) * free_target.matrix();
  return DensityOperator(HermitianOperator(out, target.base.factor_dims, tol),
                         TraceMode::normalized, tol);
}

ProtocolMap build_rng_protocol(const SetFamily& afam, const SetFamily& ffam,
                               const SetFamily& bfam, int n, int m, double eps, double delta,
                               const Tolerances& tol) {
  if (!(eps > 0.0 && eps < 1.0)) throw precondition_error("epsilon must lie in (0,1)");
  if (n < 1 || m < 1) throw precondition_error("block sizes must be at least 1");
  if (!(delta >= 0.0)) throw precondition_error("delta must be nonnegative");
  if (afam.base().dim != ffam.base().dim || bfam.base().dim != ffam.base().dim)
    throw precondition_error("protocol construction needs one local dimension across families");

  StateSet an = afam.level(n);
  StateSet fn = ffam.level(n);
  StateSet bm = bfam.level(m);
  StateSet fm = ffam.level(m);

  // accept/reject test: certified feasible witness of the composite
  // hypothesis test A_n vs F_n at half the error budget
  SetDivergenceResult dh = dhypo_sets(eps / 2.0, an, fn, tol);
  if (!dh.dual_witness)
    throw convergence_error("hypothesis test produced no feasible dual witness", 0.0);
  TestOperator test;
  test.m = *dh.dual_witness;
  test.type1 = std::max(0.0, 1.0 - min_linear(an, test.m, tol).value);
  test.type2 = std::max(0.0, max_linear(fn, test.m, tol).value);

  // reject arm: maximally mixed when free, else the first generator
  DensityOperator free_target = [&]() -> DensityOperator {
    HermitianOperator mix(Matrix::Identity(fm.dim, fm.dim) / static_cast<double>(fm.dim), {},
                          tol);
    if (contains(fm, mix, tol.membership, tol)) return DensityOperator(mix);
    auto gf = enumerate_generators(fm);
    if (gf && !gf->empty()) return as_state((*gf)[0], tol);
    throw precondition_error("free set offers no canonical reject-arm state");
  }();

  // accept arm: canonical member of B_m smoothed within the trace ball
  // against its best free reference
  DensityOperator sigma_m = [&]() -> DensityOperator {
    auto gb = enumerate_generators(bm);
    if (gb && !gb->empty()) return as_state((*gb)[0], tol);
    Rng rng(7);
    return as_state(sample_member(bm, rng, tol), tol);
  }();
  SetDivergenceResult ref_fit = dmax_sets(sigma_m, fm, tol);
  DensityOperator ref =
      ref_fit.infinite ? free_target : as_state(ref_fit.sigma_witness, tol);
  DivergenceResult sm = dmax_smoothed(eps / 2.0, sigma_m, ref, SmoothingBall::trace, tol);
  DensityOperator target = sm.optimizer ? as_state(*sm.optimizer, tol) : sigma_m;

  ProtocolMap p;
  p.test = test;
  p.target = target;
  p.free_target = free_target;
  p.delta_target = std::exp2(-static_cast<double>(n) * delta);
  if (std::abs(p.target.trace() - 1.0) > 1e-9 || std::abs(p.free_target.trace() - 1.0) > 1e-9)
    throw convergence_error("assembled map is not trace preserving", 0.0);
  return p;
}

AuditReport protocol_audit(const ProtocolMap& p, const SetFamily& afam, const SetFamily& bfam,
                           const SetFamily& ffam, int n, int m, int sample_budget,
                           unsigned seed, const Tolerances& tol) {
  if (n < 1 || m < 1) throw precondition_error("block sizes must be at least 1");
  if (sample_budget < 0) throw precondition_error("sample budget must be nonnegative");

  StateSet an = afam.level(n);
  StateSet bm = bfam.level(m);
  StateSet fn = ffam.level(n);
  StateSet fm = ffam.level(m);

  AuditReport rep;

  // both audited objectives are convex in the input state, so hull vertices
  // carry the sup exactly; non-enumerable sets fall back to seeded
  // dirichlet-weighted mixtures of sampled members, flagged heuristic
  auto probes = [&](const StateSet& s, unsigned salt) {
    auto g = enumerate_generators(s);
    if (g && !g->empty() && g->size() <= 64) return *g;
    rep.heuristic = true;
    Rng rng(seed + salt);
    std::vector<HermitianOperator> pool;
    for (int i = 0; i < 6; ++i) pool.push_back(sample_member(s, rng, tol));
    std::vector<HermitianOperator> list;
    int cnt = std::max(4, sample_budget);
    for (int i = 0; i < cnt; ++i) {
      RealVector w = random_simplex(static_cast<int>(pool.size()), rng);
      Matrix acc = Matrix::Zero(s.dim, s.dim);
      for (size_t j = 0; j < pool.size(); ++j) acc += w[static_cast<int>(j)] * pool[j].entries;
      list.push_back(herm(acc, tol));
    }
    return list;
  };

  for (const auto& r : probes(an, 1)) {
    DensityOperator out = p.apply(as_state(r, tol), tol);
    rep.trans_error = std::max(rep.trans_error, dist_to_set(out, bm, tol));
  }
  for (const auto& w : probes(fn, 2)) {
    DensityOperator out = p.apply(as_state(w, tol), tol);
    rep.rng_violation = std::max(rep.rng_violation, global_robustness(out, fm, tol));
  }
  return rep;
}

RateBounds rate_bounds(const SetFamily& afam, const SetFamily& bfam, const SetFamily& afree,
                       const SetFamily& bfree, int m_max, const Tolerances& tol) {
  RegularizedEstimate num = regularized_estimate(afam, afree, m_max, tol);
  RegularizedEstimate den = regularized_estimate(bfam, bfree, m_max, tol);
  RateBounds rb;
  rb.numerator = {num.best_lower, num.best_upper};
  rb.denominator = {den.best_lower, den.best_upper};
  if (!(rb.denominator.lo > 1e-9))
    throw precondition_error("denominator interval touches zero: rate undefined");
  rb.rate_interval = {rb.numerator.lo / rb.denominator.hi, rb.numerator.hi / rb.denominator.lo};
  return rb;
}

RateBounds rate_bounds(const SetFamily& afam, const SetFamily& bfam, const SetFamily& ffam,
                       int m_max, const Tolerances& tol) {
  return rate_bounds(afam, bfam, ffam, ffam, m_max, tol);
}

}  // namespace qsd
