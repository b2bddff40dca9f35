#include "qsd/set_divergence.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "qsd/random.hpp"

namespace qsd {

namespace {

constexpr double kAdditivitySlack = 5e-5;
constexpr double kInf = std::numeric_limits<double>::infinity();

double inner(const Matrix& a, const Matrix& b) { return std::real((a.adjoint() * b).trace()); }

HermitianOperator herm(const Matrix& m, const Tolerances& tol) {
  return HermitianOperator(m, {}, tol);
}

// golden-section minimization of a scalar function on [0, 1]
double golden01(const std::function<double(double)>& f, double xtol) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = 1.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > xtol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

// deterministic interior-ish member: average of a few seeded samples. for the
// shipped set kinds the average carries the maximal support of the set almost
// surely, which is what the finiteness probes below rely on.
HermitianOperator interior_start(const StateSet& set, const Tolerances& tol, unsigned seed = 11) {
  Rng rng(seed);
  Matrix acc = Matrix::Zero(set.dim, set.dim);
  const int n = 4;
  for (int i = 0; i < n; ++i) acc += sample_member(set, rng, tol).entries;
  Matrix avg = acc / static_cast<double>(n);
  return HermitianOperator(avg, set.factor_dims, tol);
}

// clip a density-like witness (tiny negative eigenvalues from solver arithmetic
// stay within the witness tolerance) and normalize its trace exactly
DensityOperator make_state(const HermitianOperator& x, const Tolerances& tol) {
  Matrix m = project_psd(x.entries);
  double tr = std::real(m.trace());
  if (tr <= 0.0) throw precondition_error("witness has nonpositive trace");
  if (std::abs(tr - 1.0) > 1e-5)
    throw precondition_error("expected a normalized state witness");
  return DensityOperator(HermitianOperator(Matrix(m / tr), x.factor_dims, tol),
                         TraceMode::normalized, tol);
}

// second arguments may be unnormalized PSD members (e.g. the identity); every
// divergence here obeys D(rho || c sigma) = D(rho || sigma) - log2 c, so pair
// evaluations run on the normalized state and shift back.
struct SigmaView {
  DensityOperator state;
  double shift_bits = 0.0;
};

SigmaView sigma_view(const HermitianOperator& s, const Tolerances& tol) {
  Matrix m = project_psd(s.entries);
  double c = std::real(m.trace());
  if (c <= 0.0) throw precondition_error("second-set witness has nonpositive trace");
  SigmaView v;
  v.state = DensityOperator(HermitianOperator(Matrix(m / c), s.factor_dims, tol),
                            TraceMode::normalized, tol);
  v.shift_bits = std::log2(c);
  return v;
}

double umegaki_raw(const HermitianOperator& r, const HermitianOperator& s, const Tolerances& tol) {
  if (support_leak(r.entries, s.entries, tol) > tol.membership) return kInf;
  Matrix lr = matrix_fn(r.entries, MatrixFn::Ln(), -1.0, true, tol);
  Matrix ls = matrix_fn(s.entries, MatrixFn::Ln(), -1.0, true, tol);
  return inner(r.entries, Matrix(lr - ls)) / kLn2;
}

struct DmPair {
  double bits = 0.0;
  bool infinite = false;
  HermitianOperator omega;  // optimizer of the normalized pair problem
};

DmPair dm_raw(const HermitianOperator& r, const HermitianOperator& s, const Tolerances& tol) {
  SigmaView v = sigma_view(s, tol);
  MeasuredResult mr = dm(make_state(r, tol), v.state, tol);
  if (mr.infinite) return {0.0, true, {}};
  return {mr.value - v.shift_bits, false, mr.witness_omega};
}

DmPair dm_alpha_raw(double alpha, const HermitianOperator& r, const HermitianOperator& s,
                    const Tolerances& tol) {
  SigmaView v = sigma_view(s, tol);
  MeasuredResult mr = dm_alpha(alpha, make_state(r, tol), v.state, tol);
  if (mr.infinite) return {0.0, true, {}};
  return {mr.value - v.shift_bits, false, mr.witness_omega};
}

// certified finiteness probe: the interior member of b carries b's maximal
// support, so min_{rho in A} tr[rho (I - Pi_b)] > 0 means every pair leaks
struct SupportProbe {
  bool finite = false;
  HermitianOperator rho0;    // member of a with no leak (when finite)
  HermitianOperator sigma0;  // interior member of b
};

SupportProbe support_probe(const StateSet& a, const StateSet& b, const Tolerances& tol) {
  SupportProbe p;
  p.sigma0 = interior_start(b, tol);
  Matrix pi = support_projector(p.sigma0.entries, tol);
  Matrix off = Matrix::Identity(a.dim, a.dim) - pi;
  SupportValue leak = min_linear(a, herm(off, tol), tol);
  p.finite = leak.value <= tol.membership;
  p.rho0 = leak.witness;
  return p;
}

SetDivergenceResult infinite_result() {
  SetDivergenceResult r;
  r.infinite = true;
  return r;
}

bool is_singleton(const StateSet& s) {
  auto g = enumerate_generators(s);
  return g && g->size() == 1;
}

// ---- Barzilai-Borwein ascent with a nonmonotone Armijo line search in the
// unconstrained log variable (fg returns the objective, fills the gradient) ----

Matrix clamp_spectrum(const Matrix& s, double bound) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.eigenvalues().minCoeff() >= -bound && es.eigenvalues().maxCoeff() <= bound) return s;
  RealVector lam = es.eigenvalues().cwiseMax(-bound).cwiseMin(bound);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

struct AscentOutcome {
  Matrix s;
  double value = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  double gradient_norm = 0.0;
  bool hit_cap = false;
};

AscentOutcome log_space_max(const std::function<double(const Matrix&, Matrix*)>& fg,
                            const Matrix& s0, double cap_value, const Tolerances& tol) {
  AscentOutcome out;
  Matrix s = clamp_spectrum(s0, 250.0);
  Matrix g;
  double f = fg(s, &g);
  Matrix best_s = s;
  double best_f = f;
  Matrix prev_s, prev_g;
  double step = 1.0;
  bool have_prev = false;
  bool reset_used = false;
  std::vector<double> recent{f};

  for (int k = 0; k < tol.max_iterations; ++k) {
    out.iterations = k;
    out.gradient_norm = g.norm();
    if (f >= cap_value) {
      out.hit_cap = true;
      best_s = s;
      best_f = f;
      break;
    }
    if (out.gradient_norm <= tol.grad_stationarity) {
      best_s = s;
      best_f = f;
      break;
    }
    if (have_prev) {
      Matrix ds = s - prev_s;
      Matrix dg = g - prev_g;
      double sg = std::abs(std::real((ds.adjoint() * dg).trace()));
      double gg = std::real((dg.adjoint() * dg).trace());
      if (gg > 1e-300) step = std::max(1e-12, std::min(1e8, sg / gg));
    }
    double g2 = out.gradient_norm * out.gradient_norm;
    double ref = *std::min_element(recent.begin(), recent.end());
    double t = step;
    bool moved = false;
    for (int bt = 0; bt < 70; ++bt) {
      Matrix cand = clamp_spectrum(s + t * g, 250.0);
      Matrix gc;
      double fc = fg(cand, &gc);
      if (fc >= ref + 1e-4 * t * g2 || fc >= cap_value) {
        prev_s = s;
        prev_g = g;
        s = cand;
        f = fc;
        g = gc;
        have_prev = true;
        moved = true;
        break;
      }
      t /= 2.0;
    }
    if (moved) {
      reset_used = false;
      recent.push_back(f);
      if (recent.size() > 10) recent.erase(recent.begin());
      if (f > best_f) {
        best_f = f;
        best_s = s;
      }
    } else if (!reset_used) {
      reset_used = true;
      have_prev = false;
      step = 1.0;
      recent.assign(1, f);
    } else {
      break;  // stagnated at numerical resolution
    }
  }
  out.s = best_s;
  out.value = best_f;
  return out;
}

Matrix exp_of(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  RealVector lam = es.eigenvalues().array().exp();
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

// objective over one coordinate of a pair problem: returns the value at the
// given member and, when asked, any positive multiple of the gradient there
using WeightFg = std::function<double(const HermitianOperator&, Matrix*)>;

// pairwise Frank-Wolfe over the weight simplex of an enumerable set. moving
// mass from the worst active vertex to the best one converges linearly, which
// plain conditional gradient does not when the optimum is interior.
HermitianOperator simplex_polish(const std::vector<HermitianOperator>& gens, const WeightFg& fg,
                                 int iters, const Tolerances& tol) {
  const int k = static_cast<int>(gens.size());
  const int d = gens[0].dim();
  std::vector<double> w(k, 1.0 / k);
  auto combine = [&]() -> HermitianOperator {
    Matrix acc = Matrix::Zero(d, d);
    for (int i = 0; i < k; ++i) acc += w[i] * gens[i].entries;
    return herm(acc, tol);
  };
  HermitianOperator op = combine();
  double cur = fg(op, nullptr);
  HermitianOperator best_op = op;
  double best = cur;
  for (int it = 0; it < iters; ++it) {
    Matrix g;
    double val = fg(op, &g);
    if (val < best) {
      best = val;
      best_op = op;
    }
    int fw = 0, away = -1;
    double sfw = 1e300, saway = -1e300;
    for (int i = 0; i < k; ++i) {
      double s = inner(gens[i].entries, g);
      if (s < sfw) {
        sfw = s;
        fw = i;
      }
      if (w[i] > 1e-14 && s > saway) {
        saway = s;
        away = i;
      }
    }
    if (away < 0 || saway - sfw < 1e-13) break;
    Matrix dir = gens[fw].entries - gens[away].entries;
    double tmax = w[away];
    Matrix base = op.entries;
    double t = tmax * golden01(
                          [&](double u) {
                            double v = fg(herm(base + u * tmax * dir, tol), nullptr);
                            return std::isinf(v) ? 1e300 : v;
                          },
                          1e-7);
    double cand = fg(herm(base + t * dir, tol), nullptr);
    if (!(cand < val)) break;
    w[fw] += t;
    w[away] -= t;
    op = herm(base + t * dir, tol);
    cur = cand;
  }
  if (cur < best) {
    best = cur;
    best_op = op;
  }
  return best_op;
}

void require_states(const StateSet& a, const Tolerances& tol) {
  double tr = interior_start(a, tol).trace();
  if (std::abs(tr - 1.0) > 1e-6)
    throw precondition_error("first set must consist of normalized states");
}

void require_same_dim(const StateSet& a, const StateSet& b) {
  if (a.dim != b.dim) throw precondition_error("sets must share a dimension");
}

}  // namespace

// ---------------------------------------------------------------------------
// Umegaki divergence between sets: alternating Frank-Wolfe on the two
// coordinates of the jointly convex objective.
// ---------------------------------------------------------------------------

SetDivergenceResult d_sets(const StateSet& a, const StateSet& b, const Tolerances& tol) {
  require_same_dim(a, b);
  require_states(a, tol);

  SupportProbe probe = support_probe(a, b, tol);
  if (!probe.finite) return infinite_result();

  SetDivergenceResult res;

  // singleton pair degenerates to the pairwise divergence
  auto ga = enumerate_generators(a);
  auto gb = enumerate_generators(b);
  if (ga && gb && ga->size() == 1 && gb->size() == 1) {
    double v = umegaki_raw((*ga)[0], (*gb)[0], tol);
    if (std::isinf(v)) return infinite_result();
    res.value = v;
    res.rho_witness = (*ga)[0];
    res.sigma_witness = (*gb)[0];
    return res;
  }

  // starting pair: interior members, falling back to the probe witness when
  // the interior of a leaks out of b
  HermitianOperator rho = interior_start(a, tol, 11);
  HermitianOperator sigma = probe.sigma0;
  if (umegaki_raw(rho, sigma, tol) == kInf) rho = probe.rho0;
  double cur = umegaki_raw(rho, sigma, tol);
  if (std::isinf(cur)) return infinite_result();

  auto grad_sigma = [&](const HermitianOperator& r, const HermitianOperator& s) -> Matrix {
    SpectralDecomposition sd = eig(s.entries, tol);
    auto lg = [](double x) { return std::log(std::max(x, 1e-18)); };
    auto dlg = [](double x) { return 1.0 / std::max(x, 1e-18); };
    return -frechet_apply(sd, lg, dlg, r.entries) / kLn2;
  };
  auto grad_rho = [&](const HermitianOperator& r, const HermitianOperator& s) -> Matrix {
    auto safe_ln = [&](const Matrix& m) -> Matrix {
      SpectralDecomposition sd = eig(m, tol);
      RealVector lam = sd.eigenvalues.cwiseMax(1e-18).array().log();
      return sd.eigenvectors * lam.asDiagonal() * sd.eigenvectors.adjoint();
    };
    return (safe_ln(r.entries) - safe_ln(s.entries)) / kLn2;
  };

  const bool move_sigma = !(gb && gb->size() == 1);
  const bool move_rho = !(ga && ga->size() == 1);
  if (!move_rho) rho = (*ga)[0];
  if (!move_sigma) sigma = (*gb)[0];
  cur = umegaki_raw(rho, sigma, tol);

  int stall = 0;
  for (int outer = 0; outer < 80 && stall < 2; ++outer) {
    double before = cur;
    if (move_sigma) {
      for (int it = 0; it < 6; ++it) {
        Matrix g = grad_sigma(rho, sigma);
        HermitianOperator dir = min_linear(b, herm(g, tol), tol).witness;
        double fwgap = inner(sigma.entries - dir.entries, g);
        if (fwgap < 1e-11) break;
        Matrix base = sigma.entries, step = dir.entries - sigma.entries;
        double t = golden01(
            [&](double u) { return umegaki_raw(rho, herm(base + u * step, tol), tol); }, 1e-9);
        HermitianOperator cand = herm(base + t * step, tol);
        double v = umegaki_raw(rho, cand, tol);
        if (v < cur) {
          sigma = cand;
          cur = v;
        } else {
          break;
        }
      }
    }
    if (move_rho) {
      for (int it = 0; it < 6; ++it) {
        Matrix g = grad_rho(rho, sigma);
        HermitianOperator dir = min_linear(a, herm(g, tol), tol).witness;
        double fwgap = inner(rho.entries - dir.entries, g);
        if (fwgap < 1e-11) break;
        Matrix base = rho.entries, step = dir.entries - rho.entries;
        double t =
            golden01([&](double u) { return umegaki_raw(herm(base + u * step, tol), sigma, tol); },
                     1e-9);
        HermitianOperator cand = herm(base + t * step, tol);
        double v = umegaki_raw(cand, sigma, tol);
        if (v < cur) {
          rho = cand;
          cur = v;
        } else {
          break;
        }
      }
    }
    res.iterations = outer + 1;
    stall = (before - cur < tol.alt_min_delta) ? stall + 1 : 0;
  }

  // joint linearization gap at the final iterate certifies global optimality
  // (the objective is jointly convex and the feasible set is a product)
  double gap = 0.0;
  if (move_rho) {
    Matrix g = grad_rho(rho, sigma);
    gap += std::max(0.0, inner(rho.entries - min_linear(a, herm(g, tol), tol).witness.entries, g));
  }
  if (move_sigma) {
    Matrix g = grad_sigma(rho, sigma);
    gap += std::max(0.0, inner(sigma.entries - min_linear(b, herm(g, tol), tol).witness.entries, g));
  }
  res.value = cur;
  res.rho_witness = rho;
  res.sigma_witness = sigma;
  res.gap = gap;
  res.dual_value = cur - gap;
  return res;
}

// ---------------------------------------------------------------------------
// Measured relative entropy between sets: scale-invariant dual ascent
//   sup_S  min_{rho in A} tr[rho S] - ln h_B(exp S),
// whose optimum is the constrained variational program with W = exp(S)
// rescaled onto the boundary h_B(W) = 1. Any S gives a certified lower bound.
// ---------------------------------------------------------------------------

namespace {

struct DualOutcome {
  double bits = -kInf;
  bool infinite = false;
  Matrix s;
  int iterations = 0;
};

DualOutcome dm_dual_ascent(const StateSet& a, const StateSet& b, const Matrix& s0,
                           const Tolerances& tol) {
  double cap = tol.dm_cap_bits * kLn2 * 1.05;
  auto fg = [&](const Matrix& s, Matrix* grad) -> double {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    RealVector lam = es.eigenvalues().array().exp();
    Matrix w = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
    SupportValue ra = min_linear(a, HermitianOperator(s, {}, tol), tol);
    SupportValue rb = max_linear(b, HermitianOperator(w, {}, tol), tol);
    double hb = std::max(rb.value, 1e-300);
    if (grad) {
      SpectralDecomposition sd{es.eigenvalues(), es.eigenvectors()};
      auto e = [](double x) { return std::exp(x); };
      *grad = ra.witness.entries - frechet_apply(sd, e, e, rb.witness.entries) / hb;
    }
    return ra.value - std::log(hb);
  };
  AscentOutcome out = log_space_max(fg, s0, cap, tol);
  DualOutcome d;
  d.infinite = out.hit_cap;
  d.bits = out.value / kLn2;
  d.s = out.s;
  d.iterations = out.iterations;
  return d;
}

// primal refinement: alternating Frank-Wolfe over the pair, descent directions
// from the pair problem's own optimizer omega
double dm_primal_refine(const StateSet& a, const StateSet& b, HermitianOperator& rho,
                        HermitianOperator& sigma, const Tolerances& tol) {
  auto eval = [&](const HermitianOperator& r, const HermitianOperator& s) -> DmPair {
    return dm_raw(r, s, tol);
  };
  DmPair cur = eval(rho, sigma);
  if (cur.infinite) return kInf;
  const bool move_rho = !is_singleton(a);
  const bool move_sigma = !is_singleton(b);
  for (int round = 0; round < 3 && (move_rho || move_sigma); ++round) {
    double before = cur.bits;
    if (move_sigma) {
      for (int it = 0; it < 2; ++it) {
        HermitianOperator dir = max_linear(b, cur.omega, tol).witness;
        Matrix base = sigma.entries, step = dir.entries - sigma.entries;
        double t = golden01(
            [&](double u) {
              DmPair p = eval(rho, herm(base + u * step, tol));
              return p.infinite ? 1e300 : p.bits;
            },
            1e-4);
        DmPair cand = eval(rho, herm(base + t * step, tol));
        if (!cand.infinite && cand.bits < cur.bits) {
          sigma = herm(base + t * step, tol);
          cur = cand;
        } else {
          break;
        }
      }
    }
    if (move_rho) {
      for (int it = 0; it < 2; ++it) {
        Matrix lw = matrix_fn(cur.omega.entries, MatrixFn::Ln(), -1.0, true, tol);
        HermitianOperator dir = min_linear(a, herm(lw, tol), tol).witness;
        Matrix base = rho.entries, step = dir.entries - rho.entries;
        double t = golden01(
            [&](double u) {
              DmPair p = eval(herm(base + u * step, tol), sigma);
              return p.infinite ? 1e300 : p.bits;
            },
            1e-4);
        DmPair cand = eval(herm(base + t * step, tol), sigma);
        if (!cand.infinite && cand.bits < cur.bits) {
          rho = herm(base + t * step, tol);
          cur = cand;
        } else {
          break;
        }
      }
    }
    if (before - cur.bits < tol.alt_min_delta) break;
  }

  // weight-space polish over enumerable coordinates; the plain conditional
  // gradient above stalls at interior optima of the simplex
  auto gb = enumerate_generators(b);
  auto ga = enumerate_generators(a);
  for (int sweep = 0; sweep < 2; ++sweep) {
    if (move_sigma && gb && gb->size() <= 16) {
      sigma = simplex_polish(
          *gb,
          [&](const HermitianOperator& s, Matrix* g) -> double {
            DmPair p = eval(rho, s);
            if (p.infinite) return 1e300;
            if (g) *g = -p.omega.entries;
            return p.bits;
          },
          60, tol);
      cur = eval(rho, sigma);
    }
    if (move_rho && ga && ga->size() <= 16) {
      rho = simplex_polish(
          *ga,
          [&](const HermitianOperator& r, Matrix* g) -> double {
            DmPair p = eval(r, sigma);
            if (p.infinite) return 1e300;
            if (g) *g = matrix_fn(p.omega.entries, MatrixFn::Ln(), -1.0, true, tol);
            return p.bits;
          },
          60, tol);
      cur = eval(rho, sigma);
    }
    if (!(move_rho && ga && ga->size() <= 16) || !move_sigma) break;
  }
  return cur.bits;
}

}  // namespace

SetDivergenceResult dm_sets(const StateSet& a, const StateSet& b, const Tolerances& tol) {
  require_same_dim(a, b);
  require_states(a, tol);

  SupportProbe probe = support_probe(a, b, tol);
  if (!probe.finite) return infinite_result();

  const int d = a.dim;
  DualOutcome dual = dm_dual_ascent(a, b, Matrix::Zero(d, d), tol);
  if (dual.infinite) return infinite_result();

  SetDivergenceResult res;
  res.iterations = dual.iterations;

  // active pair at the dual optimum
  Matrix w = exp_of(dual.s);
  HermitianOperator rho = min_linear(a, herm(dual.s, tol), tol).witness;
  HermitianOperator sigma = max_linear(b, herm(w, tol), tol).witness;
  // interiorize sigma when the active vertex starves rho's support
  {
    DmPair direct = dm_raw(rho, sigma, tol);
    if (direct.infinite) {
      Matrix mixed = 0.9 * sigma.entries + 0.1 * probe.sigma0.entries;
      sigma = herm(mixed, tol);
      if (dm_raw(rho, sigma, tol).infinite) sigma = probe.sigma0;
    }
  }
  if (dm_raw(rho, sigma, tol).infinite) rho = probe.rho0;

  double primal = dm_primal_refine(a, b, rho, sigma, tol);
  if (std::isinf(primal)) return infinite_result();

  double dual_bits = dual.bits;
  Matrix best_s = dual.s;
  if (std::abs(primal - dual_bits) > 0.5 * tol.setdiv_gap) {
    // restart the ascent from the primal pair's own optimizer
    DmPair pr = dm_raw(rho, sigma, tol);
    if (!pr.infinite && pr.omega.dim() == d) {
      Matrix s1 = matrix_fn(pr.omega.entries, MatrixFn::Ln(), -1.0, true, tol);
      DualOutcome second = dm_dual_ascent(a, b, s1, tol);
      res.iterations += second.iterations;
      if (!second.infinite && second.bits > dual_bits) {
        dual_bits = second.bits;
        best_s = second.s;
      }
    }
  }

  Matrix wbest = exp_of(best_s);
  double hb = std::max(max_linear(b, herm(wbest, tol), tol).value, 1e-300);
  res.value = primal;
  res.dual_value = dual_bits;
  res.gap = std::abs(primal - dual_bits);
  res.rho_witness = rho;
  res.sigma_witness = sigma;
  res.dual_witness = herm(wbest / hb, tol);
  return res;
}

// ---------------------------------------------------------------------------
// Measured Renyi divergence between sets. The companion variable of the
// two-variable regime programs is eliminated exactly (the support functions
// are monotone, so the operator inequality is tight at the optimum), leaving
// a scale-invariant program over W = exp(S):
//   alpha in [1/2,1):  minimize  ln h_A(W^c)       - c ln h_B(W),  c=(a-1)/a
//   alpha in (1,inf):  maximize  ln h-low_A(W^c)   - c ln h-low_B(W)
//   alpha in (0,1/2):  minimize  ln h_A(W) - (1/e) ln h_B(W^e),    e=a/(a-1)
// and D = (alpha/(alpha-1)) log2 of the optimum. Any W certifies a lower
// bound on D in every regime.
// ---------------------------------------------------------------------------

SetDivergenceResult dm_alpha_sets(double alpha, const StateSet& a, const StateSet& b,
                                  const Tolerances& tol) {
  if (!(alpha > 0.0) || alpha == 1.0)
    throw precondition_error("alpha must be positive and different from 1");
  require_same_dim(a, b);
  require_states(a, tol);

  SupportProbe probe = support_probe(a, b, tol);
  if (alpha > 1.0 && !probe.finite) return infinite_result();

  const int d = a.dim;
  const double pref = alpha / (alpha - 1.0);

  // engine objective: sign * F(S); caps map the dm_cap_bits ceiling through pref
  double cap = std::abs((alpha - 1.0) / alpha) * tol.dm_cap_bits * kLn2 * 1.05;
  auto e = [](double x) { return std::exp(x); };

  std::function<double(const Matrix&, Matrix*)> fg;
  if (alpha >= 0.5 && alpha < 1.0) {
    double c = (alpha - 1.0) / alpha;
    fg = [&, c](const Matrix& s, Matrix* grad) -> double {
      Eigen::SelfAdjointEigenSolver<Matrix> es(s);
      SpectralDecomposition sd{es.eigenvalues(), es.eigenvectors()};
      SpectralDecomposition sdc{c * es.eigenvalues(), es.eigenvectors()};
      RealVector lam = es.eigenvalues().array().exp();
      RealVector lamc = (c * es.eigenvalues()).array().exp();
      Matrix w = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
      Matrix wc = es.eigenvectors() * lamc.asDiagonal() * es.eigenvectors().adjoint();
      SupportValue ra = max_linear(a, herm(wc, tol), tol);
      SupportValue rb = max_linear(b, herm(w, tol), tol);
      double ha = std::max(ra.value, 1e-300), hb = std::max(rb.value, 1e-300);
      if (grad)
        *grad = -(c * frechet_apply(sdc, e, e, ra.witness.entries) / ha -
                  c * frechet_apply(sd, e, e, rb.witness.entries) / hb);
      return -(std::log(ha) - c * std::log(hb));
    };
  } else if (alpha > 1.0) {
    double c = (alpha - 1.0) / alpha;
    fg = [&, c](const Matrix& s, Matrix* grad) -> double {
      Eigen::SelfAdjointEigenSolver<Matrix> es(s);
      SpectralDecomposition sd{es.eigenvalues(), es.eigenvectors()};
      SpectralDecomposition sdc{c * es.eigenvalues(), es.eigenvectors()};
      RealVector lam = es.eigenvalues().array().exp();
      RealVector lamc = (c * es.eigenvalues()).array().exp();
      Matrix w = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
      Matrix wc = es.eigenvectors() * lamc.asDiagonal() * es.eigenvectors().adjoint();
      SupportValue ra = min_linear(a, herm(wc, tol), tol);
      SupportValue rb = min_linear(b, herm(w, tol), tol);
      double ha = std::max(ra.value, 1e-300), hb = std::max(rb.value, 1e-300);
      if (grad)
        *grad = c * frechet_apply(sdc, e, e, ra.witness.entries) / ha -
                c * frechet_apply(sd, e, e, rb.witness.entries) / hb;
      return std::log(ha) - c * std::log(hb);
    };
  } else {  // alpha in (0, 1/2): smoke-level support
    double ex = alpha / (alpha - 1.0);
    fg = [&, ex](const Matrix& s, Matrix* grad) -> double {
      Eigen::SelfAdjointEigenSolver<Matrix> es(s);
      SpectralDecomposition sd{es.eigenvalues(), es.eigenvectors()};
      SpectralDecomposition sde{ex * es.eigenvalues(), es.eigenvectors()};
      RealVector lam = es.eigenvalues().array().exp();
      RealVector lame = (ex * es.eigenvalues()).array().exp();
      Matrix w = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
      Matrix we = es.eigenvectors() * lame.asDiagonal() * es.eigenvectors().adjoint();
      SupportValue ra = max_linear(a, herm(w, tol), tol);
      SupportValue rb = max_linear(b, herm(we, tol), tol);
      double ha = std::max(ra.value, 1e-300), hb = std::max(rb.value, 1e-300);
      if (grad)
        *grad = -(frechet_apply(sd, e, e, ra.witness.entries) / ha -
                  frechet_apply(sde, e, e, rb.witness.entries) / hb);
      return -(std::log(ha) - (1.0 / ex) * std::log(hb));
    };
  }

  AscentOutcome out = log_space_max(fg, Matrix::Zero(d, d), cap, tol);
  if (out.hit_cap) return infinite_result();
  double star_log;  // natural log of the program optimum
  star_log = (alpha > 1.0) ? out.value : -out.value;
  double dual_bits = pref * star_log / kLn2;

  SetDivergenceResult res;
  res.iterations = out.iterations;

  // active pair at the optimum, then pair-side refinement
  double c_exp = (alpha >= 0.5) ? (alpha - 1.0) / alpha : 1.0;
  Matrix wc = exp_of(Matrix(c_exp * out.s));
  HermitianOperator rho = (alpha > 1.0 ? min_linear(a, herm(wc, tol), tol)
                                       : max_linear(a, herm(wc, tol), tol))
                              .witness;
  Matrix wfull = exp_of(out.s);
  HermitianOperator sigma = (alpha > 1.0 ? min_linear(b, herm(wfull, tol), tol)
                                         : max_linear(b, herm(wfull, tol), tol))
                                .witness;
  if (is_singleton(a)) rho = (*enumerate_generators(a))[0];
  if (is_singleton(b)) sigma = (*enumerate_generators(b))[0];

  auto eval = [&](const HermitianOperator& r, const HermitianOperator& s) -> DmPair {
    return dm_alpha_raw(alpha, r, s, tol);
  };
  DmPair cur = eval(rho, sigma);
  if (cur.infinite) {
    Matrix mixed = 0.9 * sigma.entries + 0.1 * probe.sigma0.entries;
    sigma = herm(mixed, tol);
    cur = eval(rho, sigma);
    if (cur.infinite) {
      sigma = probe.sigma0;
      rho = probe.rho0;
      cur = eval(rho, sigma);
    }
  }
  if (cur.infinite) return infinite_result();

  const bool move_rho = !is_singleton(a);
  const bool move_sigma = !is_singleton(b);
  for (int round = 0; round < 3 && (move_rho || move_sigma); ++round) {
    double before = cur.bits;
    if (move_sigma) {
      // descent direction from the pair program's optimizer W*
      Matrix wstar = cur.omega.entries;
      Matrix dir_op = (alpha < 0.5)
                          ? matrix_fn(wstar, MatrixFn::Power(alpha / (alpha - 1.0)), -1.0, true, tol)
                          : wstar;
      HermitianOperator dir = max_linear(b, herm(dir_op, tol), tol).witness;
      Matrix base = sigma.entries, step = dir.entries - sigma.entries;
      double t = golden01(
          [&](double u) {
            DmPair p = eval(rho, herm(base + u * step, tol));
            return p.infinite ? 1e300 : p.bits;
          },
          1e-4);
      DmPair cand = eval(rho, herm(base + t * step, tol));
      if (!cand.infinite && cand.bits < cur.bits) {
        sigma = herm(base + t * step, tol);
        cur = cand;
      }
    }
    if (move_rho) {
      Matrix wstar = cur.omega.entries;
      Matrix dir_op = (alpha >= 0.5)
                          ? matrix_fn(wstar, MatrixFn::Power((alpha - 1.0) / alpha), -1.0, true, tol)
                          : wstar;
      HermitianOperator dir = (alpha > 1.0 ? min_linear(a, herm(dir_op, tol), tol)
                                           : max_linear(a, herm(dir_op, tol), tol))
                                  .witness;
      Matrix base = rho.entries, step = dir.entries - rho.entries;
      double t = golden01(
          [&](double u) {
            DmPair p = eval(herm(base + u * step, tol), sigma);
            return p.infinite ? 1e300 : p.bits;
          },
          1e-4);
      DmPair cand = eval(herm(base + t * step, tol), sigma);
      if (!cand.infinite && cand.bits < cur.bits) {
        rho = herm(base + t * step, tol);
        cur = cand;
      }
    }
    if (before - cur.bits < tol.alt_min_delta) break;
  }

  // weight-space polish mirrors the measured-entropy case: gradient
  // directions come from the pair program's optimizer via Danskin
  auto gb_en = enumerate_generators(b);
  auto ga_en = enumerate_generators(a);
  if (move_sigma && gb_en && gb_en->size() <= 16) {
    sigma = simplex_polish(
        *gb_en,
        [&](const HermitianOperator& s, Matrix* g) -> double {
          DmPair p = eval(rho, s);
          if (p.infinite) return 1e300;
          if (g)
            *g = (alpha < 0.5)
                     ? Matrix(-matrix_fn(p.omega.entries,
                                         MatrixFn::Power(alpha / (alpha - 1.0)), -1.0, true, tol))
                     : Matrix(-p.omega.entries);
          return p.bits;
        },
        60, tol);
    cur = eval(rho, sigma);
  }
  if (move_rho && ga_en && ga_en->size() <= 16) {
    rho = simplex_polish(
        *ga_en,
        [&](const HermitianOperator& r, Matrix* g) -> double {
          DmPair p = eval(r, sigma);
          if (p.infinite) return 1e300;
          if (g) {
            if (alpha < 0.5) {
              *g = -p.omega.entries;
            } else {
              Matrix wc2 = matrix_fn(p.omega.entries, MatrixFn::Power((alpha - 1.0) / alpha),
                                     -1.0, true, tol);
              *g = (alpha > 1.0) ? wc2 : Matrix(-wc2);
            }
          }
          return p.bits;
        },
        60, tol);
    cur = eval(rho, sigma);
  }

  res.value = cur.bits;
  res.dual_value = dual_bits;
  res.gap = std::abs(cur.bits - dual_bits);
  res.rho_witness = rho;
  res.sigma_witness = sigma;
  double hnorm = (alpha > 1.0) ? std::max(min_linear(b, herm(wfull, tol), tol).value, 1e-300)
                               : std::max(max_linear(b, herm(wfull, tol), tol).value, 1e-300);
  res.dual_witness = herm(wfull / hnorm, tol);
  res.heuristic = alpha < 0.5;  // smoke-level regime
  return res;
}

// ---------------------------------------------------------------------------
// Max-divergence against a set: bisection on t with the convex feasibility
// program min_{sigma in B} lambda_max(rho - t sigma), solved by conditional
// gradient with exact line search.
// ---------------------------------------------------------------------------

namespace {

// +1 feasible (sigma updated to a certifying member), -1 certified infeasible,
// 0 undecided at the iteration cap (classified by the best value found)
int dmax_feasible(const Matrix& rho, double t, const StateSet& b, HermitianOperator& sigma,
                  const Tolerances& tol) {
  Matrix s = sigma.entries;
  double q = 0.0;
  for (int it = 0; it < 250; ++it) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(rho - t * s));
    int top = static_cast<int>(es.eigenvalues().size()) - 1;
    q = es.eigenvalues()[top];
    if (q <= 1e-11) {
      sigma = HermitianOperator(s, sigma.factor_dims, tol);
      return 1;
    }
    Matrix vvt = es.eigenvectors().col(top) * es.eigenvectors().col(top).adjoint();
    Matrix g = -t * vvt;
    HermitianOperator dir = min_linear(b, herm(g, tol), tol).witness;
    double fwgap = inner(Matrix(s - dir.entries), g);
    if (q - fwgap > 1e-12) return -1;  // lower bound on the minimum stays positive
    if (fwgap < 1e-14) break;
    Matrix base = s, step = dir.entries - s;
    double u = golden01(
        [&](double x) {
          Eigen::SelfAdjointEigenSolver<Matrix> ev(Matrix(rho - t * (base + x * step)));
          return ev.eigenvalues().maxCoeff();
        },
        1e-7);
    Matrix cand = base + u * step;
    Eigen::SelfAdjointEigenSolver<Matrix> ev(Matrix(rho - t * cand));
    if (ev.eigenvalues().maxCoeff() < q) {
      s = cand;
    } else {
      break;
    }
  }
  sigma = HermitianOperator(s, sigma.factor_dims, tol);
  return q <= 1e-9 ? 1 : 0;
}

}  // namespace

SetDivergenceResult dmax_sets(const DensityOperator& rho, const StateSet& b,
                              const Tolerances& tol) {
  if (rho.dim() != b.dim) throw precondition_error("state and set must share a dimension");
  const double bracket = tol.dmax_log_bracket;
  HermitianOperator sigma = interior_start(b, tol);
  HermitianOperator sigma_feas = sigma;

  double hi = bracket;
  {
    HermitianOperator probe = sigma;
    if (dmax_feasible(rho.matrix(), std::exp2(hi), b, probe, tol) != 1) return infinite_result();
    sigma_feas = probe;
  }
  double lo = -bracket;
  {
    HermitianOperator probe = sigma;
    if (dmax_feasible(rho.matrix(), std::exp2(lo), b, probe, tol) == 1) {
      SetDivergenceResult res;
      res.value = lo;
      res.rho_witness = rho.base;
      res.sigma_witness = probe;
      res.heuristic = true;  // optimum at or below the bracket edge
      return res;
    }
  }

  int iters = 0;
  while (hi - lo > 1e-9 && iters < 90) {
    double mid = 0.5 * (hi + lo);
    HermitianOperator probe = sigma_feas;
    if (dmax_feasible(rho.matrix(), std::exp2(mid), b, probe, tol) == 1) {
      hi = mid;
      sigma_feas = probe;
    } else {
      lo = mid;
    }
    ++iters;
  }

  SetDivergenceResult res;
  res.value = hi;
  res.gap = hi - lo;
  res.rho_witness = rho.base;
  res.sigma_witness = sigma_feas;
  res.iterations = iters;
  return res;
}

SetDivergenceResult dmax_sets(const StateSet& a, const StateSet& b, const Tolerances& tol) {
  require_same_dim(a, b);
  auto gens = enumerate_generators(a);
  if (gens && gens->size() <= 64) {
    // 2^dmax is convex in rho, so the sup over a hull sits at a generator
    SetDivergenceResult best;
    best.infinite = true;
    best.value = -kInf;
    bool any_finite = false;
    for (const auto& g : *gens) {
      SetDivergenceResult r = dmax_sets(make_state(g, tol), b, tol);
      if (r.infinite) return infinite_result();  // sup over A is infinite
      any_finite = true;
      if (r.value > best.value || best.infinite) {
        best = r;
        best.rho_witness = g;
      }
      best.infinite = false;
    }
    if (!any_finite) return infinite_result();
    return best;
  }

  // oracle-described a: best response on the active eigenvector, restarted
  SetDivergenceResult best;
  best.value = -kInf;
  bool found = false;
  int restarts = static_cast<int>(tol.heuristic_restarts);
  for (int r = 0; r < restarts; ++r) {
    Rng rng(101 + 37 * r);
    HermitianOperator rho = sample_member(a, rng, tol);
    // oracle kinds may hand back subnormalized members; renormalize the start
    double tr = std::max(rho.trace(), 1e-12);
    rho = herm(rho.entries / tr, tol);
    SetDivergenceResult cur;
    for (int round = 0; round < 3; ++round) {
      cur = dmax_sets(make_state(rho, tol), b, tol);
      if (cur.infinite) return infinite_result();
      Matrix gap_op = rho.entries - std::exp2(cur.value) * cur.sigma_witness.entries;
      Eigen::SelfAdjointEigenSolver<Matrix> es(gap_op);
      int top = static_cast<int>(es.eigenvalues().size()) - 1;
      Matrix vvt = es.eigenvectors().col(top) * es.eigenvectors().col(top).adjoint();
      HermitianOperator next = max_linear(a, herm(vvt, tol), tol).witness;
      double ntr = std::max(next.trace(), 1e-12);
      next = herm(next.entries / ntr, tol);
      if ((next.entries - rho.entries).norm() < 1e-10) break;
      rho = next;
    }
    if (!found || cur.value > best.value) {
      best = cur;
      best.rho_witness = rho;
      found = true;
    }
  }
  best.heuristic = true;
  return best;
}

// ---------------------------------------------------------------------------
// Composite hypothesis testing. beta_eps(A||B) = sup over pairs (the minimax
// lemma); the sup side must search mixtures of A's generators, not just the
// vertices, because beta is not convex in rho. The test side solves the convex
// program over M directly; both sides bracket beta.
// ---------------------------------------------------------------------------

namespace {

struct BetaPairEval {
  double beta = 0.0;
  TestOperator test;
};

BetaPairEval beta_raw(double eps, const HermitianOperator& r, const HermitianOperator& s,
                      const Tolerances& tol) {
  SigmaView v = sigma_view(s, tol);
  BetaResult br = beta_and_dhypo(eps, make_state(r, tol), v.state, tol);
  BetaPairEval out;
  out.beta = br.beta * std::exp2(v.shift_bits);
  out.test = br.test;
  return out;
}

Matrix clip_test(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  RealVector lam = es.eigenvalues().cwiseMax(0.0).cwiseMin(1.0);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

SetDivergenceResult dhypo_sets(double eps, const StateSet& a, const StateSet& b,
                               const Tolerances& tol) {
  if (!(eps > 0.0 && eps < 1.0)) throw precondition_error("epsilon must lie in (0,1)");
  require_same_dim(a, b);
  require_states(a, tol);

  const int d = a.dim;
  auto ga = enumerate_generators(a);
  auto gb = enumerate_generators(b);
  const bool enumerable = ga && gb && ga->size() <= 16 && gb->size() <= 16;

  SetDivergenceResult res;

  struct Best {
    double beta = -1.0;
    HermitianOperator rho, sigma;
    TestOperator test;
  } best;
  auto consider = [&](const HermitianOperator& r, const HermitianOperator& s) {
    BetaPairEval e = beta_raw(eps, r, s, tol);
    if (e.beta > best.beta) {
      best.beta = e.beta;
      best.rho = r;
      best.sigma = s;
      best.test = e.test;
    }
    return e;
  };

  // sigma best response for a fixed rho: beta is concave in sigma, so a short
  // Frank-Wolfe with exact line search converges; directions come from the
  // optimal test (the supergradient of beta in sigma)
  auto sigma_ascent = [&](const HermitianOperator& r, HermitianOperator s) -> HermitianOperator {
    BetaPairEval cur = beta_raw(eps, r, s, tol);
    for (int it = 0; it < 25; ++it) {
      HermitianOperator dir = max_linear(b, cur.test.m, tol).witness;
      double fwgap = inner(Matrix(dir.entries - s.entries), cur.test.m.entries);
      if (fwgap < 1e-11) break;
      Matrix base = s.entries, step = dir.entries - base;
      double t = golden01(
          [&](double u) { return -beta_raw(eps, r, herm(base + u * step, tol), tol).beta; }, 1e-7);
      BetaPairEval cand = beta_raw(eps, r, herm(base + t * step, tol), tol);
      if (cand.beta > cur.beta + 1e-15) {
        s = herm(base + t * step, tol);
        cur = cand;
      } else {
        break;
      }
    }
    consider(r, s);
    return s;
  };

  if (enumerable) {
    // vertex pairs first, then mixtures on the a side with sigma best-responded
    for (const auto& rg : *ga)
      for (const auto& sg : *gb) consider(rg, sg);

    std::vector<HermitianOperator> rho_seeds;
    const auto& agens = *ga;
    if (agens.size() == 1) {
      rho_seeds.push_back(agens[0]);
    } else if (agens.size() == 2) {
      for (int i = 1; i < 20; ++i) {
        double w = i / 20.0;
        rho_seeds.push_back(herm(w * agens[0].entries + (1.0 - w) * agens[1].entries, tol));
      }
    } else {
      // coarse simplex grid in steps of 1/4 plus the uniform mixture
      int n = static_cast<int>(agens.size());
      std::function<void(int, double, Matrix)> walk = [&](int i, double left, Matrix acc) {
        if (i == n - 1) {
          rho_seeds.push_back(herm(acc + left * agens[i].entries, tol));
          return;
        }
        for (int s4 = 0; s4 <= static_cast<int>(std::lround(left * 4)); ++s4) {
          double w = s4 / 4.0;
          walk(i + 1, left - w, acc + w * agens[i].entries);
        }
      };
      walk(0, 1.0, Matrix::Zero(d, d));
      Matrix unif = Matrix::Zero(d, d);
      for (const auto& g : agens) unif += g.entries / static_cast<double>(n);
      rho_seeds.push_back(herm(unif, tol));
    }

    for (const auto& r : rho_seeds) {
      HermitianOperator s0 = best.beta > 0 ? best.sigma : interior_start(b, tol);
      sigma_ascent(r, s0);
    }

    // local polish of the best pair: supergradient step on rho, then sigma
    for (int round = 0; round < 4; ++round) {
      double before = best.beta;
      HermitianOperator dir = min_linear(a, best.test.m, tol).witness;
      Matrix base = best.rho.entries, step = dir.entries - base;
      HermitianOperator sig = best.sigma;
      double t = golden01(
          [&](double u) { return -beta_raw(eps, herm(base + u * step, tol), sig, tol).beta; },
          1e-7);
      consider(herm(base + t * step, tol), sig);
      sigma_ascent(best.rho, best.sigma);
      if (best.beta - before < 1e-13) break;
    }
  } else {
    // oracle-described sets: best response with restarts, flagged heuristic
    int restarts = static_cast<int>(tol.heuristic_restarts);
    for (int rs = 0; rs < restarts; ++rs) {
      Rng rng(211 + 53 * rs);
      HermitianOperator rho = rs == 0 ? interior_start(a, tol) : sample_member(a, rng, tol);
      HermitianOperator sigma = interior_start(b, tol, 11 + rs);
      for (int round = 0; round < 4; ++round) {
        sigma = sigma_ascent(rho, sigma);
        HermitianOperator dir = min_linear(a, best.test.m, tol).witness;
        Matrix base = rho.entries, step = dir.entries - base;
        double t = golden01(
            [&](double u) { return -beta_raw(eps, herm(base + u * step, tol), sigma, tol).beta; },
            1e-6);
        BetaPairEval cand = beta_raw(eps, herm(base + t * step, tol), sigma, tol);
        if (cand.beta > best.beta) {
          rho = herm(base + t * step, tol);
          consider(rho, sigma);
        } else {
          break;
        }
      }
    }
    res.heuristic = true;
  }

  double beta_lo = std::max(best.beta, 0.0);
  if (beta_lo < std::exp2(-tol.dm_cap_bits)) return infinite_result();

  // test-side convex program: minimize h_B(M) over 0 <= M <= I with
  // h-low_A(M) >= 1 - eps, by projected subgradient with feasibility repair
  auto repaired = [&](const Matrix& m) -> Matrix {
    double ha = min_linear(a, herm(m, tol), tol).value;
    double need = 1.0 - eps;
    if (ha >= need - 1e-12) return m;
    double theta = (need - ha) / std::max(1.0 - ha, 1e-12);
    theta = std::min(1.0, std::max(0.0, theta));
    return Matrix((1.0 - theta) * m + theta * Matrix::Identity(d, d));
  };

  Matrix m = clip_test(best.test.m.entries);
  Matrix mf = repaired(m);
  double beta_hi = max_linear(b, herm(mf, tol), tol).value;
  Matrix m_best = mf;
  const double kappa = 8.0;
  for (int k = 0; k < 1200; ++k) {
    SupportValue fb = max_linear(b, herm(m, tol), tol);
    SupportValue fa = min_linear(a, herm(m, tol), tol);
    double viol = std::max(0.0, (1.0 - eps) - fa.value);
    double phi = fb.value + kappa * viol;
    Matrix g = fb.witness.entries;
    if (viol > 0.0) g -= kappa * fa.witness.entries;
    // polyak step towards the pair-side lower bound, with a diminishing cap
    double gn2 = std::max(g.squaredNorm(), 1e-12);
    double eta = std::min((phi - beta_lo) / gn2, 2.0 / std::sqrt(k + 1.0));
    if (eta <= 0.0) break;
    m = clip_test(m - eta * g);
    Matrix cand = repaired(m);
    double ub = max_linear(b, herm(cand, tol), tol).value;
    if (ub < beta_hi) {
      beta_hi = ub;
      m_best = cand;
    }
  }
  beta_hi = std::max(beta_hi, 0.0);

  res.value = -std::log2(beta_lo);
  res.dual_value = -std::log2(std::max(beta_hi, 1e-300));
  res.gap = std::abs(res.value - res.dual_value);
  res.rho_witness = best.rho;
  res.sigma_witness = best.sigma;
  res.dual_witness = herm(m_best, tol);
  return res;
}

// ---------------------------------------------------------------------------
// Petz / sandwiched Renyi divergence between sets: joint Frank-Wolfe on the
// trace functional Q (jointly concave for alpha in (0,1), jointly convex for
// alpha in (1,2], so the linearization gap certifies).
// ---------------------------------------------------------------------------

namespace {

struct QEval {
  double q = 0.0;
  Matrix grad_r, grad_s;
};

QEval petz_q(double alpha, const Matrix& r, const Matrix& s, bool want_grads,
             const Tolerances& tol) {
  QEval out;
  Matrix ra = matrix_fn(r, MatrixFn::Power(alpha), -1.0, true, tol);
  Matrix sb = matrix_fn(s, MatrixFn::Power(1.0 - alpha), -1.0, true, tol);
  out.q = inner(ra, sb);
  if (want_grads) {
    auto fa = [alpha](double x) { return std::pow(std::max(x, 0.0), alpha); };
    auto dfa = [alpha](double x) { return alpha * std::pow(std::max(x, 1e-18), alpha - 1.0); };
    auto fb = [alpha](double x) { return std::pow(std::max(x, 0.0), 1.0 - alpha); };
    auto dfb = [alpha](double x) {
      return (1.0 - alpha) * std::pow(std::max(x, 1e-18), -alpha);
    };
    out.grad_r = frechet_apply(eig(r, tol), fa, dfa, sb);
    out.grad_s = frechet_apply(eig(s, tol), fb, dfb, ra);
  }
  return out;
}

QEval sandwiched_q(double alpha, const Matrix& r, const Matrix& s, bool want_grads,
                   const Tolerances& tol) {
  QEval out;
  double ct = (1.0 - alpha) / (2.0 * alpha);
  Matrix sc = matrix_fn(s, MatrixFn::Power(ct), -1.0, true, tol);
  Matrix g = sc * r * sc;
  g = (g + g.adjoint().eval()) / 2.0;
  Matrix galpha = matrix_fn(g, MatrixFn::Power(alpha), -1.0, true, tol);
  out.q = std::real(galpha.trace());
  if (want_grads) {
    Matrix t = alpha * matrix_fn(g, MatrixFn::Power(alpha - 1.0), -1.0, true, tol);
    out.grad_r = sc * t * sc;
    out.grad_r = (out.grad_r + out.grad_r.adjoint().eval()) / 2.0;
    Matrix k = r * sc * t + t * sc * r;
    k = (k + k.adjoint().eval()) / 2.0;
    auto f = [ct](double x) { return std::pow(std::max(x, 0.0), ct); };
    auto df = [ct](double x) { return ct * std::pow(std::max(x, 1e-18), ct - 1.0); };
    out.grad_s = frechet_apply(eig(s, tol), f, df, k);
  }
  return out;
}

SetDivergenceResult renyi_sets_core(double alpha, bool sandwich_kind, const StateSet& a,
                                    const StateSet& b, const Tolerances& tol) {
  require_same_dim(a, b);
  require_states(a, tol);

  if (!sandwich_kind && alpha == 0.0) {
    // order-0 limit: -log2 max_{sigma in B} tr[Pi sigma] with Pi the support
    // projector of the first set. The value is monotone in the support, so the
    // maximal-support member of a (its interior point) is the exact minimizer.
    HermitianOperator rho = interior_start(a, tol);
    Matrix pi = support_projector(rho.entries, tol);
    SupportValue sv = max_linear(b, herm(pi, tol), tol);
    SetDivergenceResult res;
    if (sv.value < std::exp2(-tol.dm_cap_bits)) return infinite_result();
    res.value = -std::log2(sv.value);
    res.dual_value = res.value;
    res.rho_witness = rho;
    res.sigma_witness = sv.witness;
    res.dual_witness = herm(pi, tol);  // a feasible test achieving the value
    return res;
  }
  if (!(alpha > 0.0) || alpha == 1.0)
    throw precondition_error("alpha must be positive and different from 1");

  auto pair_value = [&](const HermitianOperator& r, const HermitianOperator& s) -> double {
    SigmaView v = sigma_view(s, tol);
    DivergenceResult dr = sandwich_kind ? sandwiched(alpha, make_state(r, tol), v.state, tol)
                                        : petz(alpha, make_state(r, tol), v.state, tol);
    return dr.infinite ? kInf : dr.value - v.shift_bits;
  };

  SetDivergenceResult res;
  res.heuristic = alpha > 2.0;  // joint convexity is certified only up to 2

  auto ga = enumerate_generators(a);
  auto gb = enumerate_generators(b);
  if (ga && gb && ga->size() == 1 && gb->size() == 1) {
    double v = pair_value((*ga)[0], (*gb)[0]);
    if (std::isinf(v)) return infinite_result();
    res.value = v;
    res.dual_value = v;
    res.rho_witness = (*ga)[0];
    res.sigma_witness = (*gb)[0];
    return res;
  }

  SupportProbe probe = support_probe(a, b, tol);
  if (alpha > 1.0 && !probe.finite) return infinite_result();

  HermitianOperator rho = interior_start(a, tol, 11);
  HermitianOperator sigma = probe.sigma0;
  if (alpha > 1.0 && support_leak(rho.entries, sigma.entries, tol) > tol.membership)
    rho = probe.rho0;

  const bool maximize_q = alpha < 1.0;
  auto qeval = [&](const Matrix& r, const Matrix& s, bool grads) -> QEval {
    return sandwich_kind ? sandwiched_q(alpha, r, s, grads, tol)
                         : petz_q(alpha, r, s, grads, tol);
  };
  // in the convex regime a support leak means Q should read +infinity; guard
  // the line search so it cannot chase the spurious pseudo-inverse value
  auto leak_bad = [&](const Matrix& r, const Matrix& s) -> bool {
    return alpha > 1.0 && support_leak(r, s, tol) > tol.membership;
  };

  double fwgap_q = 0.0;
  QEval cur = qeval(rho.entries, sigma.entries, true);
  for (int it = 0; it < 400; ++it) {
    res.iterations = it + 1;
    HermitianOperator dir_r = (maximize_q ? max_linear(a, herm(cur.grad_r, tol), tol)
                                          : min_linear(a, herm(cur.grad_r, tol), tol))
                                  .witness;
    HermitianOperator dir_s = (maximize_q ? max_linear(b, herm(cur.grad_s, tol), tol)
                                          : min_linear(b, herm(cur.grad_s, tol), tol))
                                  .witness;
    double sign = maximize_q ? 1.0 : -1.0;
    fwgap_q = sign * (inner(Matrix(dir_r.entries - rho.entries), cur.grad_r) +
                      inner(Matrix(dir_s.entries - sigma.entries), cur.grad_s));
    fwgap_q = std::max(fwgap_q, 0.0);
    if (fwgap_q / std::max(std::abs(cur.q), 1e-12) < 1e-10 && it > 4) break;
    Matrix base_r = rho.entries, step_r = dir_r.entries - base_r;
    Matrix base_s = sigma.entries, step_s = dir_s.entries - base_s;
    double t = golden01(
        [&](double u) {
          Matrix ru = base_r + u * step_r, su = base_s + u * step_s;
          if (leak_bad(ru, su)) return 1e300;
          double q = qeval(ru, su, false).q;
          return maximize_q ? -q : q;
        },
        1e-8);
    Matrix rt = base_r + t * step_r, st = base_s + t * step_s;
    if (leak_bad(rt, st)) break;
    QEval cand = qeval(rt, st, true);
    bool improved = maximize_q ? cand.q > cur.q : cand.q < cur.q;
    if (!improved) break;
    rho = herm(base_r + t * step_r, tol);
    sigma = herm(base_s + t * step_s, tol);
    cur = cand;
  }

  double q = std::max(cur.q, 1e-300);
  double bits = std::log2(q) / (alpha - 1.0);
  if (bits > tol.dm_cap_bits) return infinite_result();
  double gap_bits = fwgap_q / (std::abs(alpha - 1.0) * q * kLn2);

  res.value = bits;
  res.gap = gap_bits;
  res.dual_value = bits - gap_bits;
  res.rho_witness = rho;
  res.sigma_witness = sigma;
  return res;
}

}  // namespace

SetDivergenceResult petz_sets(double alpha, const StateSet& a, const StateSet& b,
                              const Tolerances& tol) {
  return renyi_sets_core(alpha, false, a, b, tol);
}

SetDivergenceResult sandwiched_sets(double alpha, const StateSet& a, const StateSet& b,
                                    const Tolerances& tol) {
  return renyi_sets_core(alpha, true, a, b, tol);
}

// ---------------------------------------------------------------------------
// Additivity harnesses over families.
// ---------------------------------------------------------------------------

AdditivityReport superadditivity_check(const SetFamily& afam, const SetFamily& bfam, int m, int k,
                                       std::optional<double> alpha, const Tolerances& tol) {
  if (m < 1 || k < 1) throw precondition_error("levels must be at least 1");
  auto value = [&](int n) -> double {
    StateSet an = afam.level(n);
    StateSet bn = bfam.level(n);
    SetDivergenceResult r =
        alpha ? dm_alpha_sets(*alpha, an, bn, tol) : dm_sets(an, bn, tol);
    return r.infinite ? 1e300 : r.value;
  };
  AdditivityReport rep;
  rep.level_m = value(m);
  rep.level_k = (k == m) ? rep.level_m : value(k);
  rep.level_mk = value(m + k);
  rep.difference = rep.level_mk - rep.level_m - rep.level_k;
  rep.assumptions_ok = validate_assumptions(afam, m, k, 3, 17, tol).all_ok() &&
                       validate_assumptions(bfam, m, k, 3, 17, tol).all_ok();
  rep.ok = !rep.assumptions_ok || rep.difference >= -kAdditivitySlack;
  return rep;
}

AdditivityReport subadditivity_check(const SetFamily& afam, const SetFamily& bfam,
                                     PairDivergence which, int m, int k, double alpha,
                                     const Tolerances& tol) {
  if (m < 1 || k < 1) throw precondition_error("levels must be at least 1");
  auto value = [&](int n) -> double {
    StateSet an = afam.level(n);
    StateSet bn = bfam.level(n);
    SetDivergenceResult r;
    switch (which) {
      case PairDivergence::umegaki:
        r = d_sets(an, bn, tol);
        break;
      case PairDivergence::sandwiched:
        r = sandwiched_sets(alpha, an, bn, tol);
        break;
      case PairDivergence::dmax:
        r = dmax_sets(an, bn, tol);
        break;
    }
    return r.infinite ? 1e300 : r.value;
  };
  AdditivityReport rep;
  rep.level_m = value(m);
  rep.level_k = (k == m) ? rep.level_m : value(k);
  rep.level_mk = value(m + k);
  rep.difference = rep.level_mk - rep.level_m - rep.level_k;
  rep.assumptions_ok = validate_assumptions(afam, m, k, 3, 17, tol).all_ok() &&
                       validate_assumptions(bfam, m, k, 3, 17, tol).all_ok();
  rep.ok = !rep.assumptions_ok || rep.difference <= kAdditivitySlack;
  return rep;
}

}  // namespace qsd
