#include "qsd/divergences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qsd/scalar_opt.hpp"

namespace qsd {

GoldenResult golden_min(const std::function<double(double)>& f, double a, double b, double xtol,
                        int max_iter) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = a, hi = b;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  int it = 0;
  while (hi - lo > xtol && it < max_iter) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
    ++it;
  }
  GoldenResult r;
  r.x = (f1 <= f2) ? x1 : x2;
  r.fx = std::min(f1, f2);
  r.iterations = it;
  double edge = 0.02 * (b - a);
  r.at_edge = (r.x - a < edge) || (b - r.x < edge);
  return r;
}

bool div_less(const DivergenceResult& a, const DivergenceResult& b) {
  if (a.infinite) return false;
  if (b.infinite) return true;
  return a.value < b.value;
}

namespace {

constexpr double kTiny = 1e-300;

double rel_floor(const RealVector& lam, double rel) {
  return rel * std::max(lam.cwiseAbs().maxCoeff(), 0.0);
}

// sum of p log2 p over the numerical support
double neg_entropy_bits(const RealVector& lam, double floor) {
  double s = 0.0;
  for (int i = 0; i < lam.size(); ++i)
    if (lam[i] > floor) s += lam[i] * std::log2(lam[i]);
  return s;
}

double generalized_fidelity(const Matrix& rho, const Matrix& sigma, const Tolerances& tol) {
  Matrix root = matrix_fn(sigma, MatrixFn::Power(0.5), -1.0, true, tol);
  Matrix m = root * rho * root;
  Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0);
  double f = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    f += std::sqrt(std::max(0.0, es.eigenvalues()[i]));
  double tr = rho.trace().real(), ts = sigma.trace().real();
  f += std::sqrt(std::max(0.0, 1.0 - tr) * std::max(0.0, 1.0 - ts));
  return std::min(1.0, f);
}

double purified_distance(const Matrix& rho, const Matrix& sigma, const Tolerances& tol) {
  double f = generalized_fidelity(rho, sigma, tol);
  return std::sqrt(std::max(0.0, 1.0 - f * f));
}

} // namespace

DivergenceResult umegaki(const DensityOperator& rho, const DensityOperator& sigma,
                         const Tolerances& tol) {
  if (rho.dim() != sigma.dim()) throw precondition_error("states must share a dimension");
  double leak = support_leak(rho.matrix(), sigma.matrix(), tol);
  if (leak > tol.membership) return DivergenceResult::infinity();

  SpectralDecomposition er = eig(rho.base, tol);
  double floor_r = rel_floor(er.eigenvalues, tol.support_floor);
  double s_rho = neg_entropy_bits(er.eigenvalues, floor_r);
  Matrix log_sigma = matrix_fn(sigma.matrix(), MatrixFn::Log2(), -1.0, true, tol);
  double cross = (rho.matrix() * log_sigma).trace().real();

  DivergenceResult out;
  out.value = s_rho - cross;
  out.residual = leak;
  out.tolerance = tol.membership;
  return out;
}

DivergenceResult petz(double alpha, const DensityOperator& rho, const DensityOperator& sigma,
                      const Tolerances& tol) {
  if (rho.dim() != sigma.dim()) throw precondition_error("states must share a dimension");
  if (alpha <= 0.0 || alpha == 1.0)
    throw precondition_error("petz order must lie in (0,1) or (1,inf)");
  double leak = 0.0;
  if (alpha > 1.0) {
    leak = support_leak(rho.matrix(), sigma.matrix(), tol);
    if (leak > tol.membership) return DivergenceResult::infinity();
  }
  Matrix ra = matrix_fn(rho.matrix(), MatrixFn::Power(alpha), -1.0, true, tol);
  Matrix sb = matrix_fn(sigma.matrix(), MatrixFn::Power(1.0 - alpha), -1.0, true, tol);
  double q = (ra * sb).trace().real();
  if (q <= kTiny) return DivergenceResult::infinity();
  DivergenceResult out;
  out.value = std::log2(q) / (alpha - 1.0);
  out.residual = leak;
  out.tolerance = tol.membership;
  return out;
}

DivergenceResult sandwiched(double alpha, const DensityOperator& rho,
                            const DensityOperator& sigma, const Tolerances& tol) {
  if (rho.dim() != sigma.dim()) throw precondition_error("states must share a dimension");
  if (alpha < 0.5 || alpha == 1.0)
    throw precondition_error("sandwiched order must lie in [1/2,1) or (1,inf)");
  double leak = 0.0;
  if (alpha > 1.0) {
    leak = support_leak(rho.matrix(), sigma.matrix(), tol);
    if (leak > tol.membership) return DivergenceResult::infinity();
  }
  double c = (1.0 - alpha) / (2.0 * alpha);
  Matrix sc = matrix_fn(sigma.matrix(), MatrixFn::Power(c), -1.0, true, tol);
  Matrix g = sc * rho.matrix() * sc;
  g = (g + g.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  double q = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    double x = es.eigenvalues()[i];
    if (x > 0) q += std::pow(x, alpha);
  }
  if (q <= kTiny) return DivergenceResult::infinity();
  DivergenceResult out;
  out.value = std::log2(q) / (alpha - 1.0);
  out.residual = leak;
  out.tolerance = tol.membership;
  return out;
}

DivergenceResult dmin(const DensityOperator& rho, const DensityOperator& sigma,
                      const Tolerances& tol) {
  if (rho.dim() != sigma.dim()) throw precondition_error("states must share a dimension");
  Matrix pi = support_projector(rho.matrix(), tol);
  double t = (pi * sigma.matrix()).trace().real();
  if (t <= kTiny) return DivergenceResult::infinity();
  DivergenceResult out;
  out.value = -std::log2(t);
  out.optimizer = HermitianOperator(pi, rho.base.factor_dims, tol);
  return out;
}

DivergenceResult dmax(const DensityOperator& rho, const DensityOperator& sigma,
                      const Tolerances& tol) {
  if (rho.dim() != sigma.dim()) throw precondition_error("states must share a dimension");
  double leak = support_leak(rho.matrix(), sigma.matrix(), tol);
  if (leak > tol.membership) return DivergenceResult::infinity();
  Matrix s = matrix_fn(sigma.matrix(), MatrixFn::Power(-0.5), -1.0, true, tol);
  Matrix m = s * rho.matrix() * s;
  Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0);
  double lam = es.eigenvalues().maxCoeff();
  DivergenceResult out;
  out.value = std::log2(std::max(lam, kTiny));
  out.residual = leak;
  out.tolerance = tol.membership;
  return out;
}

namespace {

// projection onto {A >= 0, tr A <= 1} in Frobenius norm: clip, then water-fill the excess
Matrix project_psd_trace(const Matrix& y) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((y + y.adjoint()) / 2.0);
  RealVector lam = es.eigenvalues().cwiseMax(0.0);
  double total = lam.sum();
  if (total > 1.0) {
    // largest theta with sum_i max(lam_i - theta, 0) = 1
    RealVector sorted = lam;
    std::sort(sorted.data(), sorted.data() + sorted.size(), std::greater<double>());
    double cum = 0.0;
    double theta = 0.0;
    for (int k = 0; k < sorted.size(); ++k) {
      cum += sorted[k];
      double cand = (cum - 1.0) / (k + 1);
      if (k + 1 == sorted.size() || cand >= sorted[k + 1]) {
        theta = cand;
        break;
      }
    }
    lam = (lam.array() - theta).cwiseMax(0.0);
  }
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace

DivergenceResult dmax_smoothed(double eps, const DensityOperator& rho,
                               const DensityOperator& sigma, SmoothingBall ball,
                               const Tolerances& tol) {
  if (eps < 0.0 || eps >= 1.0) throw precondition_error("smoothing radius must lie in [0,1)");
  if (eps == 0.0) return dmax(rho, sigma, tol);

  const Matrix& rho0 = rho.matrix();
  Matrix pi = support_projector(sigma.matrix(), tol);
  Matrix off = Matrix::Identity(rho.dim(), rho.dim()) - pi;
  bool singular = off.trace().real() > 0.5;
  Matrix s = matrix_fn(sigma.matrix(), MatrixFn::Power(-0.5), -1.0, true, tol);
  const double k_off = std::exp2(tol.dmax_log_bracket);

  auto in_ball = [&](const Matrix& x) {
    if (ball == SmoothingBall::trace)
      return 0.5 * trace_norm_herm(x - rho0) <= eps + 1e-12;
    return purified_distance(x, rho0, tol) <= eps + 1e-12;
  };
  // radial retraction toward rho, which sits at distance zero
  auto retract = [&](Matrix x) {
    if (in_ball(x)) return x;
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 60; ++i) {
      double mid = (lo + hi) / 2.0;
      Matrix cand = rho0 + mid * (x - rho0);
      (in_ball(cand) ? lo : hi) = mid;
    }
    return Matrix(rho0 + lo * (x - rho0));
  };
  auto feasibilize = [&](Matrix y) {
    for (int round = 0; round < 3; ++round) {
      y = project_psd_trace(y);
      if (ball == SmoothingBall::trace) y = rho0 + project_trace_ball(y - rho0, 2.0 * eps);
    }
    y = project_psd_trace(y);
    return retract(y);
  };
  auto objective = [&](const Matrix& x, Matrix* top = nullptr) {
    Matrix m = s * x * s;
    Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0);
    int last = static_cast<int>(es.eigenvalues().size()) - 1;
    if (top) *top = es.eigenvectors().col(last) * es.eigenvectors().col(last).adjoint();
    double lam = std::max(es.eigenvalues()[last], kTiny);
    double pen = singular ? k_off * (off * x).trace().real() : 0.0;
    return std::make_pair(lam, lam + pen);
  };

  Matrix cur = rho0;
  double shrink = (ball == SmoothingBall::trace) ? std::min(1.0, 2.0 * eps) : eps * eps;
  Matrix scaled = feasibilize((1.0 - shrink) * rho0);

  Matrix best = cur;
  double best_obj = objective(cur).second;
  {
    double cand = objective(scaled).second;
    if (cand < best_obj) {
      best_obj = cand;
      best = scaled;
      cur = scaled;
    }
  }

  int iters = 0;
  int stall = 0;
  for (int k = 0; k < tol.max_iterations && stall < 80; ++k, ++iters) {
    Matrix top;
    double lam = objective(cur, &top).first;
    Matrix grad = s * top * s;
    if (singular) grad += k_off * off;
    double gn = grad.norm();
    if (gn < 1e-18) break;
    double step = 0.5 * std::max(eps, 1e-3) * lam / gn / std::sqrt(static_cast<double>(k + 1));
    cur = feasibilize(cur - step * grad);
    double obj = objective(cur).second;
    if (obj < best_obj - 1e-10 * std::max(1.0, std::abs(best_obj))) {
      stall = 0;
      best_obj = obj;
      best = cur;
    } else {
      if (obj < best_obj) {
        best_obj = obj;
        best = cur;
      }
      ++stall;
    }
  }

  double lam_best = objective(best).first;
  DivergenceResult out;
  double off_mass = singular ? (off * best).trace().real() : 0.0;
  if (off_mass > tol.membership) return DivergenceResult::infinity();
  out.value = std::log2(lam_best);
  out.iterations = iters;
  out.residual = off_mass;
  out.tolerance = tol.membership;
  out.optimizer = HermitianOperator(best, rho.base.factor_dims, tol);
  return out;
}

BetaResult beta_and_dhypo(double eps, const DensityOperator& rho, const DensityOperator& sigma,
                          const Tolerances& tol) {
  if (rho.dim() != sigma.dim()) throw precondition_error("states must share a dimension");
  if (eps < 0.0 || eps > 1.0) throw precondition_error("error budget must lie in [0,1]");
  int d = rho.dim();
  BetaResult out;

  if (eps >= 1.0) {
    out.beta = 0.0;
    out.dh = DivergenceResult::infinity();
    out.test.m = HermitianOperator(Matrix::Zero(d, d), rho.base.factor_dims, tol);
    out.test.type1 = rho.trace();
    out.test.type2 = 0.0;
    return out;
  }
  if (eps == 0.0) {
    Matrix pi = support_projector(rho.matrix(), tol);
    out.beta = (pi * sigma.matrix()).trace().real();
    out.test.m = HermitianOperator(pi, rho.base.factor_dims, tol);
    out.test.type1 = std::max(0.0, rho.trace() - (pi * rho.matrix()).trace().real());
    out.test.type2 = out.beta;
    out.dh = out.beta <= kTiny ? DivergenceResult::infinity() : DivergenceResult{};
    if (!out.dh.infinite) out.dh.value = -std::log2(out.beta);
    return out;
  }

  const Matrix& r = rho.matrix();
  const Matrix& sg = sigma.matrix();
  auto dual_value = [&](double x) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sg - x * r);
    double pos = 0.0;
    for (int i = 0; i < d; ++i) pos += std::max(0.0, es.eigenvalues()[i]);
    return pos + eps * x;
  };
  // right derivative of the dual in x is eps - tr[rho P_+(x)], nondecreasing;
  // bisect its sign so the test is built exactly at the kink
  auto slope_sign = [&](double u) {
    double x = std::exp(u);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sg - x * r);
    double mass = 0.0;
    for (int i = 0; i < d; ++i)
      if (es.eigenvalues()[i] > 0)
        mass += std::real(
            (es.eigenvectors().col(i).adjoint() * r * es.eigenvectors().col(i))(0));
    return eps - mass;
  };

  double lo = std::log(1e-6), hi = std::log(1e6);
  if (slope_sign(lo) > 0 || slope_sign(hi) < 0) {
    lo = std::log(1e-9);
    hi = std::log(1e9);
    if (slope_sign(lo) > 0) {
      // the budget covers all of rho's mass on supp(sigma): zero error is attainable
      Matrix m = Matrix::Identity(d, d) - support_projector(sg, tol);
      out.beta = 0.0;
      out.dh = DivergenceResult::infinity();
      out.test.m = HermitianOperator(m, rho.base.factor_dims, tol);
      out.test.type1 = rho.trace() - (r * m).trace().real();
      out.test.type2 = 0.0;
      return out;
    }
    if (slope_sign(hi) < 0)
      throw convergence_error("hypothesis-testing dual bracket exhausted after widening",
                              dual_value(std::exp(lo)));
  }
  int bisect_iters = 0;
  while (hi - lo > 1e-14 && bisect_iters < 200) {
    double mid = (lo + hi) / 2.0;
    (slope_sign(mid) < 0 ? lo : hi) = mid;
    ++bisect_iters;
  }
  double x_star = std::exp((lo + hi) / 2.0);
  double beta_dual = sigma.trace() - dual_value(x_star);

  // randomized Neyman-Pearson test at the optimal threshold
  Eigen::SelfAdjointEigenSolver<Matrix> es(sg - x_star * r);
  struct Piece {
    double lam, weight;
    int idx;
  };
  std::vector<Piece> pieces(d);
  for (int i = 0; i < d; ++i) {
    double w = std::real((es.eigenvectors().col(i).adjoint() * r * es.eigenvectors().col(i))(0));
    pieces[i] = {es.eigenvalues()[i], std::max(w, 0.0), i};
  }
  // continuous-knapsack order: cheapest type-II cost per unit of type-I budget first
  std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) {
    double ra = a.weight > 1e-14 ? a.lam / a.weight : std::numeric_limits<double>::infinity();
    double rb = b.weight > 1e-14 ? b.lam / b.weight : std::numeric_limits<double>::infinity();
    return ra < rb;
  });
  double budget = (1.0 - eps) * rho.trace();
  Matrix m = Matrix::Zero(d, d);
  double used = 0.0;
  for (const Piece& p : pieces) {
    double remaining = budget - used;
    if (remaining <= 1e-15) break;
    if (p.weight <= 1e-14) continue;  // no budget use, and psd sigma forbids lam < 0 here
    double theta = std::min(1.0, remaining / p.weight);
    m += theta * es.eigenvectors().col(p.idx) * es.eigenvectors().col(p.idx).adjoint();
    used += theta * p.weight;
  }
  m = (m + m.adjoint()) / 2.0;

  out.beta = (sg * m).trace().real();
  out.x_star = x_star;
  out.test.m = HermitianOperator(m, rho.base.factor_dims, tol);
  out.test.type1 = rho.trace() - (r * m).trace().real();
  out.test.type2 = out.beta;
  out.dh.iterations = bisect_iters;
  out.dh.residual = std::abs(out.beta - beta_dual);
  out.dh.tolerance = 1e-8;
  if (out.beta <= kTiny) {
    out.dh.infinite = true;
  } else {
    out.dh.value = -std::log2(out.beta);
  }
  return out;
}

NsDistributions ns_distributions(const DensityOperator& rho, const DensityOperator& sigma,
                                 const Tolerances& tol) {
  if (rho.dim() != sigma.dim()) throw precondition_error("states must share a dimension");
  SpectralDecomposition er = eig(rho.base, tol);
  SpectralDecomposition es = eig(sigma.base, tol);
  int d = rho.dim();
  NsDistributions out;
  out.p.resize(d, d);
  out.q.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double overlap = std::norm((er.eigenvectors.col(i).adjoint() * es.eigenvectors.col(j))(0));
      out.p(i, j) = std::max(0.0, er.eigenvalues[i]) * overlap;
      out.q(i, j) = std::max(0.0, es.eigenvalues[j]) * overlap;
    }
  return out;
}

DivergenceResult classical_renyi(double alpha, const RealVector& p, const RealVector& q) {
  if (alpha <= 0.0 || alpha == 1.0)
    throw precondition_error("renyi order must lie in (0,1) or (1,inf)");
  if (p.size() != q.size()) throw precondition_error("distributions must share a length");
  double fp = 1e-14 * std::max(p.maxCoeff(), 0.0);
  double fq = 1e-14 * std::max(q.maxCoeff(), 0.0);
  double s = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    bool sp = p[i] > fp, sq = q[i] > fq;
    if (!sp) continue;
    if (!sq) {
      if (alpha > 1.0) return DivergenceResult::infinity();
      continue;
    }
    s += std::pow(p[i], alpha) * std::pow(q[i], 1.0 - alpha);
  }
  if (s <= kTiny) return DivergenceResult::infinity();
  DivergenceResult out;
  out.value = std::log2(s) / (alpha - 1.0);
  return out;
}

DivergenceResult classical_relative_entropy(const RealVector& p, const RealVector& q) {
  if (p.size() != q.size()) throw precondition_error("distributions must share a length");
  double fp = 1e-14 * std::max(p.maxCoeff(), 0.0);
  double fq = 1e-14 * std::max(q.maxCoeff(), 0.0);
  double s = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] <= fp) continue;
    if (q[i] <= fq) return DivergenceResult::infinity();
    s += p[i] * std::log2(p[i] / q[i]);
  }
  DivergenceResult out;
  out.value = s;
  return out;
}

EnvelopeResult continuity_envelopes(const DensityOperator& rho, const DensityOperator& sigma,
                                    double alpha, const Tolerances& tol) {
  if (alpha == 1.0) throw precondition_error("envelope order must differ from 1");
  EnvelopeResult out;
  DivergenceResult d1 = umegaki(rho, sigma, tol);
  DivergenceResult p32 = petz(1.5, rho, sigma, tol);
  DivergenceResult p12 = petz(0.5, rho, sigma, tol);
  if (d1.infinite || p32.infinite || p12.infinite) {
    out.eta = std::numeric_limits<double>::infinity();
    return out;
  }
  double base, gap;
  if (alpha < 1.0) {
    base = std::max(4.0, std::exp2(2.0 * p32.value) + std::exp2(-2.0 * p12.value) + 1.0);
    out.eta = base * base;
    double log_eta = std::log2(out.eta);
    out.window_ok = alpha > 1.0 - 1.0 / log_eta;
    gap = d1.value - petz(alpha, rho, sigma, tol).value;
    out.lower_gap = gap;
    out.upper_gap = (1.0 - alpha) * log_eta * log_eta - gap;
  } else {
    base = std::max(4.0, std::exp2(p32.value) + std::exp2(-p12.value) + 1.0);
    out.eta = base * base;
    double log_eta = std::log2(out.eta);
    out.window_ok = alpha < 1.0 + 1.0 / log_eta;
    gap = sandwiched(alpha, rho, sigma, tol).value - d1.value;
    out.lower_gap = gap;
    out.upper_gap = (alpha - 1.0) * log_eta * log_eta - gap;
  }
  return out;
}

} // namespace qsd
