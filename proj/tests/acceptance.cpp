// acceptance harness: one line per criterion, nonzero exit when any fails.
// every tolerance is pinned here; oracles are rebuilt inline where a criterion
// demands an independent cross-check of a solver value.

#include <qsd/aep.hpp>
#include <qsd/divergences.hpp>
#include <qsd/error.hpp>
#include <qsd/hermitian.hpp>
#include <qsd/measured.hpp>
#include <qsd/random.hpp>
#include <qsd/resource.hpp>
#include <qsd/set_divergence.hpp>
#include <qsd/state_set.hpp>
#include <qsd/stein.hpp>

#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

using namespace qsd;

#define ASSERT(cond, ...)                                   \
  do {                                                      \
    if (!(cond)) {                                          \
      std::printf("       assertion failed: %s\n", #cond);  \
      std::printf("       " __VA_ARGS__);                   \
      std::printf("\n");                                    \
      return false;                                         \
    }                                                       \
  } while (0)

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

HermitianOperator herm(const Matrix& m, std::vector<int> factors = {}) {
  return HermitianOperator(m, std::move(factors));
}

DensityOperator rnd_state(int d, Rng& rng) { return DensityOperator(random_density(d, rng)); }

StateSet single(const DensityOperator& rho) { return StateSet::singleton(rho); }

DensityOperator ket_plus() {
  Matrix m(2, 2);
  m << 0.5, 0.5, 0.5, 0.5;
  return DensityOperator(m);
}

DensityOperator uniform_qutrit() {
  return DensityOperator(Matrix::Constant(3, 3, Complex(1.0 / 3.0, 0.0)));
}

DensityOperator tilted_a() {
  Matrix m(2, 2);
  m << Complex(0.7, 0.0), Complex(0.2, 0.1), Complex(0.2, -0.1), Complex(0.3, 0.0);
  return DensityOperator(m);
}

DensityOperator tilted_b() {
  Matrix m(2, 2);
  m << Complex(0.4, 0.0), Complex(-0.1, 0.05), Complex(-0.1, -0.05), Complex(0.6, 0.0);
  return DensityOperator(m);
}

// projector onto the canonical maximally entangled vector on d x d
HermitianOperator entangled_projector(int d) {
  Vector v = Vector::Zero(d * d);
  for (int i = 0; i < d; ++i) v[i * d + i] = Complex(1.0 / std::sqrt(double(d)), 0.0);
  return herm(v * v.adjoint(), {d, d});
}

// classical Renyi divergence in bits, computed as a plain weighted power sum
double renyi_sum_bits(double alpha, const RealVector& p, const RealVector& q) {
  double s = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] <= 1e-300) continue;
    if (q[i] <= 1e-300) return kInf;
    s += std::pow(p[i], alpha) * std::pow(q[i], 1.0 - alpha);
  }
  return std::log2(s) / (alpha - 1.0);
}

// ---------------------------------------------------------------------------
// 1. ordering chain on seeded full-rank pairs at d = 2 and d = 3

bool criterion_ordering_chain() {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    int d = t < 100 ? 2 : 3;
    DensityOperator rho = rnd_state(d, rng);
    DensityOperator sigma = rnd_state(d, rng);
    DivergenceResult lo = dmin(rho, sigma);
    MeasuredResult half = dm_alpha(0.5, rho, sigma);
    MeasuredResult mid = dm(rho, sigma);
    DivergenceResult top = umegaki(rho, sigma);
    ASSERT(!lo.infinite && !half.infinite && !mid.infinite && !top.infinite,
           "pair %d (d=%d) produced an infinite value", t, d);
    ASSERT(half.value - lo.value >= -1e-6, "pair %d: dmin=%.12f dm_alpha=%.12f", t, lo.value,
           half.value);
    ASSERT(mid.value - half.value >= -1e-6, "pair %d: dm_alpha=%.12f dm=%.12f", t, half.value,
           mid.value);
    ASSERT(top.value - mid.value >= -1e-6, "pair %d: dm=%.12f umegaki=%.12f", t, mid.value,
           top.value);
  }
  return true;
}

// ---------------------------------------------------------------------------
// 2. petz values equal the classical Renyi divergence of the matched
//    classical pair built from both eigensystems

bool criterion_classical_pair_oracle() {
  Rng rng(23);
  const double alphas[] = {0.3, 0.5, 0.9, 1.5, 2.0};
  for (int t = 0; t < 100; ++t) {
    int d = 2 + (t % 2);
    DensityOperator rho = rnd_state(d, rng);
    DensityOperator sigma = rnd_state(d, rng);
    NsDistributions ns = ns_distributions(rho, sigma);
    RealVector p = Eigen::Map<const RealVector>(ns.p.data(), ns.p.size());
    RealVector q = Eigen::Map<const RealVector>(ns.q.data(), ns.q.size());
    for (double a : alphas) {
      DivergenceResult quantum = petz(a, rho, sigma);
      double classical = renyi_sum_bits(a, p, q);
      ASSERT(!quantum.infinite && std::isfinite(classical),
             "pair %d alpha=%.2f produced an infinite value", t, a);
      ASSERT(std::abs(quantum.value - classical) <= 1e-8,
             "pair %d alpha=%.2f: petz=%.12f classical=%.12f", t, a, quantum.value, classical);
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// 3. hypothesis-testing value sits between the petz floor and sandwiched
//    ceiling with the standard order-dependent offsets

bool criterion_one_shot_equivalence() {
  Rng rng(31);
  for (int t = 0; t < 100; ++t) {
    DensityOperator rho = rnd_state(2, rng);
    DensityOperator sigma = rnd_state(2, rng);
    double pz = petz(0.7, rho, sigma).value;
    double sw = sandwiched(1.5, rho, sigma).value;
    for (double eps : {0.1, 0.5}) {
      double dh = beta_and_dhypo(eps, rho, sigma).dh.value;
      double floor = pz - (0.7 / 0.3) * std::log2(1.0 / eps);
      double ceiling = sw + 3.0 * std::log2(1.0 / (1.0 - eps));
      ASSERT(dh >= floor - 1e-6, "pair %d eps=%.1f: dh=%.12f floor=%.12f", t, eps, dh, floor);
      ASSERT(dh <= ceiling + 1e-6, "pair %d eps=%.1f: dh=%.12f ceiling=%.12f", t, eps, dh,
             ceiling);
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// 4. primal test operator reproduces the dual optimal error; commuting pairs
//    match the exhaustive classical likelihood-ratio oracle

bool criterion_beta_primal_dual() {
  Rng rng(41);
  const double epses[] = {0.1, 0.3, 0.7};
  for (int t = 0; t < 100; ++t) {
    int d = 2 + (t % 2);
    DensityOperator rho = rnd_state(d, rng);
    DensityOperator sigma = rnd_state(d, rng);
    double eps = epses[t % 3];
    BetaResult res = beta_and_dhypo(eps, rho, sigma);
    double primal = (sigma.matrix() * res.test.m.entries).trace().real();
    ASSERT(std::abs(primal - res.beta) <= 1e-8, "pair %d eps=%.1f: primal=%.12g dual=%.12g", t,
           eps, primal, res.beta);
  }
  for (int t = 0; t < 40; ++t) {
    RealVector p = random_simplex(4, rng);
    RealVector q = random_simplex(4, rng);
    DensityOperator rho(Matrix(p.cast<Complex>().asDiagonal()));
    DensityOperator sigma(Matrix(q.cast<Complex>().asDiagonal()));
    double eps = epses[t % 3];
    BetaResult res = beta_and_dhypo(eps, rho, sigma);
    double want = oracle::classical_beta(eps, p, q);
    ASSERT(std::abs(res.beta - want) <= 1e-9, "diag pair %d eps=%.1f: beta=%.12g oracle=%.12g",
           t, eps, res.beta, want);
  }
  return true;
}

// ---------------------------------------------------------------------------
// 5. block sandwich on a fixed singleton qubit pair: nondecreasing lower
//    bounds, additive upper bounds, and the explicit gap guarantee

bool criterion_aep_sandwich() {
  Rng rng(42);
  DensityOperator rho = rnd_state(2, rng);
  DensityOperator sigma = rnd_state(2, rng);
  SetFamily afam((single(rho)));
  SetFamily bfam((single(sigma)));
  double rel = umegaki(rho, sigma).value;
  double prev = -kInf;
  for (int m = 1; m <= 3; ++m) {
    AepBounds b = aep_sandwich(afam, bfam, m);
    ASSERT(!b.heuristic, "m=%d leaned on a heuristic", m);
    ASSERT(b.lower >= prev - 1e-6, "m=%d: lower=%.12f previous=%.12f", m, b.lower, prev);
    prev = b.lower;
    ASSERT(std::abs(b.upper - rel) <= 1e-6, "m=%d: upper=%.12f relative entropy=%.12f", m,
           b.upper, rel);
    double guarantee = 2.0 * (4.0 + 2.0) * std::log2(double(m) + 2.0) / double(m);
    ASSERT(b.upper - b.lower <= guarantee + 1e-4, "m=%d: gap=%.12f guarantee=%.12f", m,
           b.upper - b.lower, guarantee);
  }
  return true;
}

// ---------------------------------------------------------------------------
// 6. measured set divergence is superadditive across block splits on
//    conditional families at local dimension 2

bool criterion_superadditivity() {
  SetFamily half((StateSet::conditional({2}, {0}, 0.5)));
  SetFamily full((StateSet::conditional({2}, {0}, 1.0)));
  SetFamily tilted((single(tilted_a())));
  const std::array<std::array<int, 2>, 2> splits = {{{1, 1}, {1, 2}}};
  for (const auto& mk : splits) {
    AdditivityReport rep = superadditivity_check(half, full, mk[0], mk[1]);
    ASSERT(rep.assumptions_ok, "(%d,%d) scaled-identity assumptions failed", mk[0], mk[1]);
    ASSERT(rep.difference >= -5e-5, "(%d,%d) scaled-identity: difference=%.8f", mk[0], mk[1],
           rep.difference);
    AdditivityReport mixed = superadditivity_check(tilted, full, mk[0], mk[1]);
    ASSERT(mixed.assumptions_ok, "(%d,%d) tilted assumptions failed", mk[0], mk[1]);
    ASSERT(mixed.difference >= -5e-5, "(%d,%d) tilted: difference=%.8f", mk[0], mk[1],
           mixed.difference);
  }
  return true;
}

// ---------------------------------------------------------------------------
// 7. measured Renyi values bound sandwiched values within twice the log of
//    the reference spectrum size

bool criterion_pinching_bound() {
  Rng rng(71);
  for (int t = 0; t < 100; ++t) {
    int d = 2 + (t % 2);
    DensityOperator rho = rnd_state(d, rng);
    DensityOperator sigma = rnd_state(d, rng);
    int clusters = spec_count(herm(sigma.matrix()));
    for (double a : {0.6, 1.0, 2.0}) {
      PinchingCheck pc = pinching_sandwich_check(a, rho, sigma);
      ASSERT(pc.ok, "pair %d alpha=%.1f: bound check failed internally", t, a);
      ASSERT(pc.lhs <= pc.mid + 1e-6, "pair %d alpha=%.1f: measured=%.12f sandwiched=%.12f", t,
             a, pc.lhs, pc.mid);
      ASSERT(pc.mid <= pc.lhs + 2.0 * std::log2(double(clusters)) + 1e-6,
             "pair %d alpha=%.1f: sandwiched=%.12f measured=%.12f clusters=%d", t, a, pc.mid,
             pc.lhs, clusters);
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// 8. quadratic continuity envelopes at the midpoint of the admissible
//    order window on either side of 1

bool criterion_continuity_envelopes() {
  Rng rng(83);
  for (int t = 0; t < 100; ++t) {
    DensityOperator rho = rnd_state(2, rng);
    DensityOperator sigma = rnd_state(2, rng);

    EnvelopeResult probe_lo = continuity_envelopes(rho, sigma, 0.99);
    double a_lo = 1.0 - 0.5 / std::log2(probe_lo.eta);
    EnvelopeResult below = continuity_envelopes(rho, sigma, a_lo);
    ASSERT(below.window_ok, "pair %d: alpha=%.6f escaped the lower window", t, a_lo);
    ASSERT(below.lower_gap >= -1e-8, "pair %d: petz overshoots by %.3g", t, -below.lower_gap);
    ASSERT(below.upper_gap >= -1e-8, "pair %d: lower envelope violated by %.3g", t,
           -below.upper_gap);

    EnvelopeResult probe_hi = continuity_envelopes(rho, sigma, 1.01);
    double a_hi = 1.0 + 0.5 / std::log2(probe_hi.eta);
    EnvelopeResult above = continuity_envelopes(rho, sigma, a_hi);
    ASSERT(above.window_ok, "pair %d: alpha=%.6f escaped the upper window", t, a_hi);
    ASSERT(above.lower_gap >= -1e-8, "pair %d: sandwiched undershoots by %.3g", t,
           -above.lower_gap);
    ASSERT(above.upper_gap >= -1e-8, "pair %d: upper envelope violated by %.3g", t,
           -above.upper_gap);
  }
  return true;
}

// ---------------------------------------------------------------------------
// 9. composite hypothesis-testing value against a grid-certified oracle:
//    the pair side scans hull mixtures with an exact per-pair test built by
//    threshold bisection, the test side repairs those tests to composite
//    feasibility; the two sides bracket the truth

namespace grid {

// exact two-outcome test for a qubit pair: bisect the likelihood threshold,
// then randomize on the boundary block so the type-I constraint is tight
double pair_beta(const Matrix& rho, const Matrix& sigma, double eps, Matrix* test) {
  const double need = 1.0 - eps;
  auto split = [&](double mu, Matrix* strict, Matrix* boundary) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho - mu * sigma);
    *strict = Matrix::Zero(2, 2);
    *boundary = Matrix::Zero(2, 2);
    for (int i = 0; i < 2; ++i) {
      Matrix blk = es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
      if (es.eigenvalues()[i] > 1e-11) *strict += blk;
      else if (es.eigenvalues()[i] > -1e-11) *boundary += blk;
    }
  };
  auto hit = [&](const Matrix& m) { return (rho * m).trace().real(); };
  double lo = 0.0, hi = 4096.0;
  Matrix strict, boundary;
  for (int it = 0; it < 90; ++it) {
    double mid = 0.5 * (lo + hi);
    split(mid, &strict, &boundary);
    (hit(strict) >= need ? lo : hi) = mid;
  }
  split(hi, &strict, &boundary);
  double a = hit(strict);
  double b = hit(boundary);
  Matrix m;
  if (a + b + 1e-9 >= need) {
    double theta = b > 1e-14 ? std::clamp((need - a) / b, 0.0, 1.0) : 0.0;
    m = strict + theta * boundary;
  } else {
    split(lo, &strict, &boundary);  // conservative fallback, still feasible
    m = strict + boundary;
  }
  if (test) *test = m;
  return (sigma * m).trace().real();
}

std::vector<std::array<double, 3>> bary_grid(int k) {
  std::vector<std::array<double, 3>> out;
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j + i <= k; ++j)
      out.push_back({double(i) / k, double(j) / k, double(k - i - j) / k});
  return out;
}

Matrix mix(const std::vector<Matrix>& gens, const std::array<double, 3>& w) {
  Matrix out = Matrix::Zero(2, 2);
  for (int g = 0; g < 3; ++g) out += w[g] * gens[g];
  return out;
}

// local simplex neighbourhood of a weight vector at step h
std::vector<std::array<double, 3>> neighbourhood(const std::array<double, 3>& w, double h) {
  std::vector<std::array<double, 3>> out;
  for (int di = -2; di <= 2; ++di)
    for (int dj = -2; dj <= 2; ++dj) {
      double a = std::max(0.0, w[0] + di * h);
      double b = std::max(0.0, w[1] + dj * h);
      double c = std::max(0.0, 1.0 - a - b);
      double s = a + b + c;
      out.push_back({a / s, b / s, c / s});
    }
  return out;
}

}  // namespace grid

bool criterion_composite_minimax() {
  Rng rng(5);
  std::vector<Matrix> agens, bgens;
  for (int g = 0; g < 3; ++g) agens.push_back(random_density(2, rng));
  for (int g = 0; g < 3; ++g) bgens.push_back(random_density(2, rng));
  const double eps = 0.3;

  // pair side: dense scan of hull mixtures, then local refinement
  auto coarse = grid::bary_grid(19);  // 210 weights per hull
  double best = -1.0;
  std::array<double, 3> wa{1, 0, 0}, wb{1, 0, 0};
  for (const auto& u : coarse) {
    Matrix rho = grid::mix(agens, u);
    for (const auto& v : coarse) {
      double beta = grid::pair_beta(rho, grid::mix(bgens, v), eps, nullptr);
      if (beta > best) {
        best = beta;
        wa = u;
        wb = v;
      }
    }
  }
  std::vector<std::array<std::array<double, 3>, 2>> saddle_track;
  for (double h : {0.02, 0.005, 0.00125}) {
    auto na = grid::neighbourhood(wa, h);
    auto nb = grid::neighbourhood(wb, h);
    for (const auto& u : na) {
      Matrix rho = grid::mix(agens, u);
      for (const auto& v : nb) {
        double beta = grid::pair_beta(rho, grid::mix(bgens, v), eps, nullptr);
        if (beta > best) {
          best = beta;
          wa = u;
          wb = v;
        }
      }
    }
    saddle_track.push_back({wa, wb});
  }
  double upper_value = -std::log2(best);  // >= composite value up to grid resolution

  // test side: repair the per-pair tests to composite feasibility and take
  // the best certified worst case over the target hull generators
  auto feasible_beta = [&](const Matrix& m) {
    double worst_pass = 1.0;
    for (const auto& g : agens) worst_pass = std::min(worst_pass, (Matrix(g) * m).trace().real());
    Matrix repaired = m;
    if (worst_pass < 1.0 - eps) {
      double theta = ((1.0 - eps) - worst_pass) / (1.0 - worst_pass);
      repaired = (1.0 - theta) * m + theta * Matrix::Identity(2, 2);
    }
    double beta = 0.0;
    for (const auto& g : bgens) beta = std::max(beta, (Matrix(g) * repaired).trace().real());
    return beta;
  };
  double cert = kInf;
  auto candidate_pairs = grid::bary_grid(6);  // 28 weights per hull -> 784 tests
  for (const auto& u : candidate_pairs) {
    Matrix rho = grid::mix(agens, u);
    for (const auto& v : candidate_pairs) {
      Matrix m;
      grid::pair_beta(rho, grid::mix(bgens, v), eps, &m);
      cert = std::min(cert, feasible_beta(m));
    }
  }
  for (const auto& wpair : saddle_track) {
    auto na = grid::neighbourhood(wpair[0], 0.01);
    auto nb = grid::neighbourhood(wpair[1], 0.01);
    for (const auto& u : na) {
      Matrix rho = grid::mix(agens, u);
      for (const auto& v : nb) {
        Matrix m;
        grid::pair_beta(rho, grid::mix(bgens, v), eps, &m);
        cert = std::min(cert, feasible_beta(m));
      }
    }
  }
  double lower_value = -std::log2(cert);  // <= composite value: the test is feasible

  std::vector<DensityOperator> ag, bg;
  for (const auto& g : agens) ag.emplace_back(g);
  for (const auto& g : bgens) bg.emplace_back(g);
  SetDivergenceResult sd =
      dhypo_sets(eps, StateSet::hull(ag), StateSet::hull(bg));
  ASSERT(!sd.infinite, "solver reported an infinite composite value");
  ASSERT(upper_value - lower_value >= -1e-9, "oracle bracket inverted: [%.8f, %.8f]",
         lower_value, upper_value);
  ASSERT(upper_value - lower_value <= 5e-3, "oracle bracket too wide: [%.8f, %.8f]", lower_value,
         upper_value);
  ASSERT(std::abs(sd.value - upper_value) <= 5e-3,
         "solver=%.8f grid value=%.8f certified floor=%.8f", sd.value, upper_value, lower_value);
  return true;
}

// ---------------------------------------------------------------------------
// 10. support value of the partial-transpose norm ball at the maximally
//     entangled projector

bool criterion_rains_support() {
  for (int d : {2, 3}) {
    SupportValue res = max_linear(StateSet::rains({d, d}, {1}), entangled_projector(d));
    ASSERT(std::abs(res.value - 1.0 / d) < 1e-6, "d=%d: value=%.10f expected=%.10f", d,
           res.value, 1.0 / d);
  }
  return true;
}

// ---------------------------------------------------------------------------
// 11. coherence end to end: one bit per copy for the plus state, and the
//     qubit-to-qutrit conversion rate interval

bool criterion_coherence_end_to_end() {
  SetFamily plus((single(ket_plus())));
  SetFamily inc2((StateSet::incoherent(2)));
  RegularizedEstimate est = regularized_estimate(plus, inc2, 2);
  ASSERT(est.best_lower <= 1.0 + 1e-9 && est.best_upper >= 1.0 - 1e-9,
         "interval [%.10f, %.10f] misses 1 bit", est.best_lower, est.best_upper);
  bool saw_m2 = false;
  for (const AepBounds& row : est.table) {
    if (row.m != 2) continue;
    saw_m2 = true;
    double guarantee = 2.0 * (4.0 + 2.0) * std::log2(4.0) / 2.0;
    ASSERT(row.upper - row.lower <= guarantee + 1e-9, "m=2 width %.10f exceeds %.10f",
           row.upper - row.lower, guarantee);
  }
  ASSERT(saw_m2, "estimate table has no m=2 row");

  SetFamily triple((single(uniform_qutrit())));
  SetFamily inc3((StateSet::incoherent(3)));
  RateBounds rb = rate_bounds(plus, triple, inc2, inc3, 2);
  double want = 1.0 / std::log2(3.0);
  ASSERT(rb.rate_interval.lo <= want + 1e-9 && rb.rate_interval.hi >= want - 1e-9,
         "rate interval [%.10f, %.10f] misses %.10f", rb.rate_interval.lo, rb.rate_interval.hi,
         want);
  return true;
}

// ---------------------------------------------------------------------------
// 12. block table of hypothesis-testing rates stays inside its one-shot
//     envelope and the envelope tightens with the block length

bool criterion_stein_table() {
  SetFamily afam((single(tilted_a())));
  SetFamily bfam((single(tilted_b())));
  std::vector<SteinRow> rows = stein_table(afam, bfam, 0.3, 5);
  ASSERT(rows.size() == 5, "expected 5 rows, got %zu", rows.size());
  double prev_width = kInf;
  for (const SteinRow& r : rows) {
    ASSERT(std::isfinite(r.dh_per_n) && std::isfinite(r.floor) && std::isfinite(r.ceiling),
           "n=%d has a non-finite entry", r.n);
    ASSERT(r.dh_per_n >= r.floor - 1e-6, "n=%d: rate=%.10f floor=%.10f", r.n, r.dh_per_n,
           r.floor);
    ASSERT(r.dh_per_n <= r.ceiling + 1e-6, "n=%d: rate=%.10f ceiling=%.10f", r.n, r.dh_per_n,
           r.ceiling);
    double width = r.ceiling - r.floor;
    ASSERT(width <= prev_width + 1e-9, "n=%d: width=%.10f previous=%.10f", r.n, width,
           prev_width);
    prev_width = width;
  }
  return true;
}

// ---------------------------------------------------------------------------
// 13. measure-and-prepare protocol audit on the qubit coherence instance,
//     with a fully free null control

bool criterion_protocol_audit() {
  SetFamily plus((single(ket_plus())));
  SetFamily inc2((StateSet::incoherent(2)));
  ProtocolMap p = build_rng_protocol(plus, inc2, plus, 1, 1, 0.2, 1.0);
  AuditReport rep = protocol_audit(p, plus, plus, inc2, 1, 1, 8);
  ASSERT(rep.trans_error <= 0.2 + 5e-3, "transformation error %.6f exceeds the budget",
         rep.trans_error);
  ASSERT(std::isfinite(rep.rng_violation) && rep.rng_violation >= 0.0,
         "resourceful violation not reported as a finite value: %.6g", rep.rng_violation);

  ProtocolMap null_p = build_rng_protocol(inc2, inc2, inc2, 1, 1, 0.2, 1.0);
  AuditReport null_rep = protocol_audit(null_p, inc2, inc2, inc2, 1, 1, 8);
  ASSERT(null_rep.trans_error <= 0.2 + 5e-3, "null control transformation error %.6f",
         null_rep.trans_error);
  ASSERT(null_rep.rng_violation <= 5e-3, "null control generated resource: %.6g",
         null_rep.rng_violation);
  return true;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* label;
    bool (*fn)();
  };
  const Criterion all[] = {
      {1, "ordering chain dmin <= measured(1/2) <= measured <= umegaki", criterion_ordering_chain},
      {2, "petz matches the classical Renyi value of the matched pair", criterion_classical_pair_oracle},
      {3, "one-shot equivalence floor and ceiling around dhypo", criterion_one_shot_equivalence},
      {4, "beta primal/dual agreement and the classical oracle", criterion_beta_primal_dual},
      {5, "block sandwich on a singleton qubit pair", criterion_aep_sandwich},
      {6, "superadditivity across block splits on conditional families", criterion_superadditivity},
      {7, "pinching bound between measured and sandwiched orders", criterion_pinching_bound},
      {8, "quadratic continuity envelopes at the window midpoints", criterion_continuity_envelopes},
      {9, "composite minimax against the grid-certified oracle", criterion_composite_minimax},
      {10, "support value of the partial-transpose ball at the entangled state", criterion_rains_support},
      {11, "coherence rates end to end", criterion_coherence_end_to_end},
      {12, "hypothesis-testing rate table inside its one-shot envelope", criterion_stein_table},
      {13, "protocol audit with a free null control", criterion_protocol_audit},
  };
  int failed = 0;
  for (const Criterion& c : all) {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = c.fn();
    } catch (const std::exception& e) {
      std::printf("       unexpected exception: %s\n", e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d. %s (%.1fs)\n", ok ? "PASS" : "FAIL", c.id, c.label, secs);
    std::fflush(stdout);
    if (!ok) ++failed;
  }
  if (failed != 0) std::printf("%d of 13 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
