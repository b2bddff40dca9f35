#include "qsd/measured.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "qsd/divergences.hpp"

namespace qsd {

namespace {

// spectral clamp keeping exp() representable along the whole ascent
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
  bool stationary = false;
};

// Barzilai-Borwein ascent with a nonmonotone Armijo line search in the
// unconstrained log variable. fg returns the objective and fills the
// euclidean gradient.
AscentOutcome log_space_max(const std::function<double(const Matrix&, Matrix*)>& fg,
                            const Matrix& s0, double cap_value, const Tolerances& tol) {
  AscentOutcome out;
  Matrix s = clamp_spectrum(s0, 250.0);
  Matrix g;
  double f = fg(s, &g);
  Matrix best_s = s, best_g = g;
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
      out.stationary = true;
      best_s = s;
      best_f = f;
      best_g = g;
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
        best_g = g;
      }
    } else if (!reset_used) {
      // drop the BB memory and retry once from a unit step
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
  if (!out.stationary) out.gradient_norm = best_g.norm();
  return out;
}

// classical optimizer of the commuting problem, used as a restart point:
// ratios of rho's diagonal to sigma's eigenvalues in sigma's eigenbasis
Matrix pinched_log_start(const DensityOperator& rho, const DensityOperator& sigma,
                         double exponent, const Tolerances& tol) {
  SpectralDecomposition es = eig(sigma.base, tol);
  int d = rho.dim();
  double qfloor = 1e-14 * std::max(es.eigenvalues.maxCoeff(), 1e-300);
  RealVector logw(d);
  for (int i = 0; i < d; ++i) {
    double r = std::real(
        (es.eigenvectors.col(i).adjoint() * rho.matrix() * es.eigenvectors.col(i))(0));
    double q = std::max(es.eigenvalues[i], qfloor);
    double ratio = std::max(r, 1e-30) / q;
    logw[i] = exponent * std::log(ratio);
  }
  return es.eigenvectors * logw.asDiagonal() * es.eigenvectors.adjoint();
}

MeasuredResult pack(const AscentOutcome& best, double bits, const Tolerances& tol,
                    const std::vector<int>& factors) {
  MeasuredResult out;
  out.ascent_iterations = best.iterations;
  out.gradient_norm = best.gradient_norm;
  if (best.hit_cap || bits > tol.dm_cap_bits) {
    out.infinite = true;
    return out;
  }
  out.value = bits;
  Eigen::SelfAdjointEigenSolver<Matrix> es(best.s);
  RealVector lam = es.eigenvalues().array().exp();
  out.witness_omega = HermitianOperator(
      Matrix(es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint()), factors, tol);
  return out;
}

} // namespace

MeasuredResult dm(const DensityOperator& rho, const DensityOperator& sigma,
                  const Tolerances& tol) {
  if (rho.dim() != sigma.dim()) throw precondition_error("states must share a dimension");
  const Matrix& r = rho.matrix();
  const Matrix& sg = sigma.matrix();
  if (support_leak(r, sg, tol) > tol.membership) {
    MeasuredResult out;
    out.infinite = true;
    return out;
  }
  double cap = tol.dm_cap_bits * kLn2 * 1.05;

  auto fg = [&](const Matrix& s, Matrix* grad) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    SpectralDecomposition sd{es.eigenvalues(), es.eigenvectors()};
    RealVector lam = es.eigenvalues().array().exp();
    Matrix omega = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
    double f = (r * s).trace().real() + 1.0 - (sg * omega).trace().real();
    if (grad) {
      auto e = [](double x) { return std::exp(x); };
      *grad = r - frechet_apply(sd, e, e, sg);
    }
    return f;
  };

  AscentOutcome best = log_space_max(fg, Matrix::Zero(rho.dim(), rho.dim()), cap, tol);
  AscentOutcome alt = log_space_max(fg, pinched_log_start(rho, sigma, 1.0, tol), cap, tol);
  if (alt.hit_cap || alt.value > best.value) best = alt;
  return pack(best, best.value / kLn2, tol, rho.base.factor_dims);
}

MeasuredResult dm_alpha(double alpha, const DensityOperator& rho, const DensityOperator& sigma,
                        const Tolerances& tol) {
  if (rho.dim() != sigma.dim()) throw precondition_error("states must share a dimension");
  if (alpha <= 0.0 || alpha == 1.0)
    throw precondition_error("measured renyi order must lie in (0,1) or (1,inf)");
  if (alpha > 50.0) {
    // conditioning of the W-power degrades; the order-infinity limit takes over
    DivergenceResult top = dmax(rho, sigma, tol);
    MeasuredResult out;
    out.infinite = top.infinite;
    out.value = top.infinite ? 0.0 : top.value;
    out.witness_omega = HermitianOperator::identity(rho.dim());
    return out;
  }

  const Matrix& r = rho.matrix();
  const Matrix& sg = sigma.matrix();
  const bool maximize = alpha > 1.0;
  if (maximize && support_leak(r, sg, tol) > tol.membership) {
    MeasuredResult out;
    out.infinite = true;
    return out;
  }
  // Q caps corresponding to dm_cap_bits in the transformed value
  double cap = maximize ? std::min(1e290, std::exp((alpha - 1.0) * tol.dm_cap_bits * kLn2 * 1.05))
                        : -std::exp((alpha - 1.0) * tol.dm_cap_bits * kLn2 * 1.05);

  std::function<double(const Matrix&, Matrix*)> fg;
  double restart_exponent;
  if (alpha >= 0.5) {
    double c = (alpha - 1.0) / alpha;
    double sign = maximize ? 1.0 : -1.0;
    fg = [&, c, sign](const Matrix& s, Matrix* grad) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(s);
      RealVector lc = (c * es.eigenvalues()).array().exp();
      RealVector l1 = es.eigenvalues().array().exp();
      Matrix wc = es.eigenvectors() * lc.asDiagonal() * es.eigenvectors().adjoint();
      Matrix w = es.eigenvectors() * l1.asDiagonal() * es.eigenvectors().adjoint();
      double q = alpha * (r * wc).trace().real() + (1.0 - alpha) * (sg * w).trace().real();
      if (grad) {
        SpectralDecomposition sc{c * es.eigenvalues(), es.eigenvectors()};
        SpectralDecomposition s1{es.eigenvalues(), es.eigenvectors()};
        auto e = [](double x) { return std::exp(x); };
        *grad = sign * (alpha * c * frechet_apply(sc, e, e, r) +
                        (1.0 - alpha) * frechet_apply(s1, e, e, sg));
      }
      return sign * q;
    };
    restart_exponent = alpha;
  } else {
    double p = alpha / (alpha - 1.0);
    fg = [&, p](const Matrix& s, Matrix* grad) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(s);
      RealVector lp = (p * es.eigenvalues()).array().exp();
      RealVector l1 = es.eigenvalues().array().exp();
      Matrix wp = es.eigenvectors() * lp.asDiagonal() * es.eigenvectors().adjoint();
      Matrix w = es.eigenvectors() * l1.asDiagonal() * es.eigenvectors().adjoint();
      double q = alpha * (r * w).trace().real() + (1.0 - alpha) * (sg * wp).trace().real();
      if (grad) {
        SpectralDecomposition sp{p * es.eigenvalues(), es.eigenvectors()};
        SpectralDecomposition s1{es.eigenvalues(), es.eigenvectors()};
        auto e = [](double x) { return std::exp(x); };
        *grad = -(alpha * frechet_apply(s1, e, e, r) +
                  (1.0 - alpha) * p * frechet_apply(sp, e, e, sg));
      }
      return -q;
    };
    restart_exponent = alpha - 1.0;
  }

  Matrix start = pinched_log_start(rho, sigma, restart_exponent, tol);
  AscentOutcome best = log_space_max(fg, start, cap, tol);
  AscentOutcome alt = log_space_max(fg, Matrix::Zero(rho.dim(), rho.dim()), cap, tol);
  if (alt.hit_cap || alt.value > best.value) best = alt;

  double q_star = maximize ? best.value : -best.value;
  double bits = std::log2(std::max(q_star, 1e-300)) / (alpha - 1.0);
  return pack(best, bits, tol, rho.base.factor_dims);
}

PinchingCheck pinching_sandwich_check(double alpha, const DensityOperator& rho,
                                      const DensityOperator& sigma, const Tolerances& tol) {
  if (alpha < 0.5) throw precondition_error("pinching bound needs order at least 1/2");
  PinchingCheck out;
  const double inf = std::numeric_limits<double>::infinity();
  if (alpha == 1.0) {
    MeasuredResult m = dm(rho, sigma, tol);
    DivergenceResult s = umegaki(rho, sigma, tol);
    out.lhs = m.infinite ? inf : m.value;
    out.mid = s.infinite ? inf : s.value;
  } else {
    MeasuredResult m = dm_alpha(alpha, rho, sigma, tol);
    DivergenceResult s = sandwiched(alpha, rho, sigma, tol);
    out.lhs = m.infinite ? inf : m.value;
    out.mid = s.infinite ? inf : s.value;
  }
  out.rhs = out.lhs + 2.0 * std::log2(static_cast<double>(spec_count(sigma.base, -1.0, tol)));
  out.ok = (out.lhs <= out.mid + 1e-6) && (out.mid <= out.rhs + 1e-6);
  return out;
}

double projective_grid_kl(const DensityOperator& rho, const DensityOperator& sigma, int points) {
  if (rho.dim() != 2 || sigma.dim() != 2)
    throw precondition_error("the measurement grid oracle is for qubits");
  if (points < 2) throw precondition_error("grid needs at least two points");
  auto bloch = [](const Matrix& m) {
    RealVector v(3);
    v[0] = 2.0 * std::real(m(0, 1));
    v[1] = -2.0 * std::imag(m(0, 1));  // tr[m sigma_y]
    v[2] = std::real(m(0, 0) - m(1, 1));
    return v;
  };
  RealVector a = bloch(rho.matrix());
  RealVector b = bloch(sigma.matrix());
  RealVector e1 = a.norm() > 1e-12 ? RealVector(a / a.norm()) : RealVector(RealVector::Unit(3, 2));
  RealVector b_perp = b - b.dot(e1) * e1;
  RealVector e2 =
      b_perp.norm() > 1e-12 ? RealVector(b_perp / b_perp.norm()) : RealVector(RealVector::Unit(3, 0));
  if (std::abs(e2.dot(e1)) > 0.5) e2 = RealVector::Unit(3, 1);

  double tr = rho.trace(), ts = sigma.trace();
  auto kl_term = [](double p, double q) {
    if (p <= 1e-15) return 0.0;
    if (q <= 1e-15) return std::numeric_limits<double>::infinity();
    return p * std::log2(p / q);
  };
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < points; ++k) {
    double theta = M_PI * k / points;
    RealVector n = std::cos(theta) * e1 + std::sin(theta) * e2;
    double p = 0.5 * (tr + a.dot(n));
    double q = 0.5 * (ts + b.dot(n));
    p = std::min(std::max(p, 0.0), tr);
    q = std::min(std::max(q, 0.0), ts);
    double kl = kl_term(p, q) + kl_term(tr - p, ts - q);
    best = std::max(best, kl);
  }
  return best;
}

} // namespace qsd
