#include "qsd/state_set.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qsd/error.hpp"

namespace qsd {

namespace {

long long product_of(const std::vector<int>& dims) {
  long long p = 1;
  for (int d : dims) p *= d;
  return p;
}

bool is_odd_prime(int d) {
  if (d < 3 || d % 2 == 0) return false;
  for (int f = 3; f * f <= d; f += 2)
    if (d % f == 0) return false;
  return true;
}

void require_same_dim(const StateSet& set, const HermitianOperator& x) {
  if (x.dim() != set.dim) throw precondition_error("operator dimension does not match the set");
}

std::vector<int> complement_positions(int nfac, const std::vector<int>& pos) {
  std::vector<char> marked(nfac, 0);
  for (int t : pos) marked[t] = 1;
  std::vector<int> out;
  for (int t = 0; t < nfac; ++t)
    if (!marked[t]) out.push_back(t);
  return out;
}

Matrix apply_channel(const std::vector<Matrix>& kraus, const Matrix& x) {
  Matrix out = Matrix::Zero(kraus[0].rows(), kraus[0].rows());
  for (const Matrix& k : kraus) out += k * x * k.adjoint();
  return (out + out.adjoint()) / 2.0;
}

Matrix apply_adjoint(const std::vector<Matrix>& kraus, const Matrix& x) {
  Matrix out = Matrix::Zero(kraus[0].cols(), kraus[0].cols());
  for (const Matrix& k : kraus) out += k.adjoint() * x * k;
  return (out + out.adjoint()) / 2.0;
}

// member of a conditional set: weight * I on the marked factors, rho_q elsewhere
Matrix embed_conditional(const StateSet& s, const Matrix& rho_q) {
  int nfac = static_cast<int>(s.factor_dims.size());
  std::vector<int> q = complement_positions(nfac, s.identity_positions);
  if (q.empty()) return s.identity_weight * Matrix::Identity(s.dim, s.dim);
  std::vector<int> p = s.identity_positions;
  std::sort(p.begin(), p.end());
  long long dp = 1;
  for (int t : p) dp *= s.factor_dims[t];
  Matrix block = kron(s.identity_weight * Matrix::Identity(dp, dp), rho_q);
  if (p.empty()) return block;
  // permute [P..., Q...] back into the original interleaving
  std::vector<int> in_dims;
  for (int t : p) in_dims.push_back(s.factor_dims[t]);
  for (int t : q) in_dims.push_back(s.factor_dims[t]);
  std::vector<int> perm(nfac);
  for (size_t j = 0; j < p.size(); ++j) perm[p[j]] = static_cast<int>(j);
  for (size_t j = 0; j < q.size(); ++j) perm[q[j]] = static_cast<int>(p.size() + j);
  // output slot t must carry original factor t, which sits at index perm[t] of the block order
  return permute_factors(block, in_dims, perm);
}

// orthonormal Hermitian basis in the Frobenius inner product
std::vector<Matrix> hermitian_basis(int d) {
  std::vector<Matrix> out;
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < d; ++i) {
    Matrix m = Matrix::Zero(d, d);
    m(i, i) = 1.0;
    out.push_back(m);
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Matrix m = Matrix::Zero(d, d);
      m(i, j) = r;
      m(j, i) = r;
      out.push_back(m);
      Matrix a = Matrix::Zero(d, d);
      a(i, j) = Complex(0, r);
      a(j, i) = Complex(0, -r);
      out.push_back(a);
    }
  return out;
}

// euclidean projection onto the probability simplex
RealVector project_simplex(const RealVector& v) {
  RealVector sorted = v;
  std::sort(sorted.data(), sorted.data() + sorted.size(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  for (int k = 0; k < sorted.size(); ++k) {
    cum += sorted[k];
    double cand = (cum - 1.0) / (k + 1);
    if (k + 1 == sorted.size() || cand >= sorted[k + 1]) {
      theta = cand;
      break;
    }
  }
  return (v.array() - theta).cwiseMax(0.0);
}

Matrix project_density(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((a + a.adjoint()) / 2.0);
  RealVector lam = project_simplex(es.eigenvalues());
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

double lambda_max(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((a + a.adjoint()) / 2.0);
  return es.eigenvalues().maxCoeff();
}

double spectral_norm_herm(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((a + a.adjoint()) / 2.0);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

HermitianOperator as_member(const StateSet& set, const Matrix& m) {
  HermitianOperator out;
  out.entries = (m + m.adjoint()) / 2.0;
  out.factor_dims = set.factor_dims;
  return out;
}

SupportValue closed_form(const StateSet& set, double value, const Matrix& witness) {
  SupportValue out;
  out.value = value;
  out.witness = as_member(set, witness);
  out.exact = true;
  return out;
}

// ---- certified oracle for the partial-transpose trace-norm ball ----
//
// maximize tr[x rho] over rho >= 0 with ||rho^Gamma||_1 <= 1.  Splitting
// rho^Gamma = gamma gives cheap projections on both blocks; the scaled dual
// variable doubles as a certificate: any hermitian y with y^Gamma + cI >= x
// bounds the value by ||y + cI||_inf, since the partial transpose preserves
// the pairing and the member's trace norm is capped at one.
SupportValue max_linear_rains(const StateSet& set, const Matrix& x, const Tolerances& tol) {
  const int d = set.dim;
  const std::vector<int>& dims = set.factor_dims;
  const std::vector<int>& tp = set.transpose_positions;
  auto pt = [&](const Matrix& m) { return partial_transpose(m, dims, tp); };

  double scale = spectral_norm_herm(x);
  SupportValue out;
  out.exact = false;
  if (scale < 1e-300) {
    out.witness = as_member(set, Matrix::Zero(d, d));
    return out;
  }
  Matrix xs = x / scale;

  Matrix rho = project_psd(xs);
  double n1 = trace_norm_herm(pt(rho));
  if (n1 > 1.0) rho /= n1;
  Matrix gamma = pt(rho);
  Matrix u = Matrix::Zero(d, d);
  double tau = 1.0;

  // every feasible member bounds the value from below, every certificate from
  // above, so the running extremes of both streams bracket the optimum
  double best_lb = -1e300, best_ub = 1e300;
  Matrix best_rho = rho;
  int it = 0;
  for (; it < tol.max_iterations; ++it) {
    rho = project_psd(pt(gamma - u) + xs / tau);
    Matrix ptr = pt(rho);
    Matrix gamma_old = gamma;
    gamma = project_trace_ball(ptr + u, 1.0);
    u += ptr - gamma;

    if ((it + 1) % 20 == 0 || it + 1 == tol.max_iterations) {
      Matrix feas = rho;
      double fn = trace_norm_herm(pt(feas));
      if (fn > 1.0) feas /= fn;
      double val = std::real((xs * feas).trace());
      if (val > best_lb) {
        best_lb = val;
        best_rho = feas;
      }
      for (double sign : {1.0, -1.0}) {
        Matrix y = sign * tau * u;
        double c = std::max(0.0, lambda_max(xs - pt(y)));
        best_ub = std::min(best_ub, spectral_norm_herm(y + c * Matrix::Identity(d, d)));
      }
      if (best_ub - best_lb <= tol.admm_gap) break;

      // residual balancing keeps the two projection streams in step
      double pr = (ptr - gamma).norm();
      double dr = tau * (gamma - gamma_old).norm();
      if (pr > 10.0 * dr && tau < 1e3) {
        tau *= 2.0;
        u /= 2.0;
      } else if (dr > 10.0 * pr && tau > 1e-3) {
        tau /= 2.0;
        u *= 2.0;
      }
    }
  }
  out.value = scale * std::real((xs * best_rho).trace());
  out.witness = as_member(set, best_rho);
  out.gap = scale * std::max(0.0, best_ub - best_lb);
  out.iterations = it + 1;
  return out;
}

// stacked orthonormalized phase-point basis: column u holds vec(A_u)/sqrt(D)
Matrix stacked_phase_basis(const std::vector<int>& factor_dims) {
  std::vector<Matrix> ops = phase_point_operators(factor_dims[0]);
  for (size_t t = 1; t < factor_dims.size(); ++t) {
    std::vector<Matrix> next = phase_point_operators(factor_dims[t]);
    std::vector<Matrix> prod;
    prod.reserve(ops.size() * next.size());
    for (const Matrix& a : ops)
      for (const Matrix& b : next) prod.push_back(kron(a, b));
    ops = std::move(prod);
  }
  long long d = ops[0].rows();
  Matrix stack(d * d, static_cast<long long>(ops.size()));
  double r = 1.0 / std::sqrt(static_cast<double>(d));
  for (size_t u = 0; u < ops.size(); ++u)
    stack.col(static_cast<long long>(u)) =
        Eigen::Map<const Eigen::VectorXcd>(ops[u].data(), d * d) * r;
  return stack;
}

// same scheme in phase-space coordinates: g = B^dag vec(rho) is an isometry,
// the wigner l1 norm is ||g||_1 / sqrt(D), and the certificate bound becomes
// sqrt(D) * max_u |y_u + c / sqrt(D)|.
SupportValue max_linear_mana(const StateSet& set, const Matrix& x, const Tolerances& tol) {
  const int d = set.dim;
  const double rootd = std::sqrt(static_cast<double>(d));
  Matrix basis = stacked_phase_basis(set.factor_dims);
  auto coords = [&](const Matrix& m) -> RealVector {
    return (basis.adjoint() * Eigen::Map<const Eigen::VectorXcd>(m.data(), d * d)).real();
  };
  auto from_coords = [&](const RealVector& g) -> Matrix {
    Eigen::VectorXcd v = basis * g.cast<Complex>();
    Matrix m = Eigen::Map<const Matrix>(v.data(), d, d);
    return (m + m.adjoint()) / 2.0;
  };

  double scale = spectral_norm_herm(x);
  SupportValue out;
  out.exact = false;
  if (scale < 1e-300) {
    out.witness = as_member(set, Matrix::Zero(d, d));
    return out;
  }
  Matrix xs = x / scale;

  Matrix rho = project_psd(xs);
  double n1 = coords(rho).cwiseAbs().sum() / rootd;
  if (n1 > 1.0) rho /= n1;
  RealVector gamma = coords(rho);
  RealVector u = RealVector::Zero(d * d);
  double tau = 1.0;

  double best_lb = -1e300, best_ub = 1e300;
  Matrix best_rho = rho;
  int it = 0;
  for (; it < tol.max_iterations; ++it) {
    rho = project_psd(from_coords(gamma - u) + xs / tau);
    RealVector g = coords(rho);
    RealVector gamma_old = gamma;
    gamma = project_l1_ball(g + u, rootd);
    u += g - gamma;

    if ((it + 1) % 20 == 0 || it + 1 == tol.max_iterations) {
      Matrix feas = rho;
      double fn = coords(feas).cwiseAbs().sum() / rootd;
      if (fn > 1.0) feas /= fn;
      double val = std::real((xs * feas).trace());
      if (val > best_lb) {
        best_lb = val;
        best_rho = feas;
      }
      for (double sign : {1.0, -1.0}) {
        RealVector y = sign * tau * u;
        double c = std::max(0.0, lambda_max(xs - from_coords(y)));
        best_ub = std::min(best_ub, rootd * (y.array() + c / rootd).abs().maxCoeff());
      }
      if (best_ub - best_lb <= tol.admm_gap) break;

      double pr = (g - gamma).norm();
      double dr = tau * (gamma - gamma_old).norm();
      if (pr > 10.0 * dr && tau < 1e3) {
        tau *= 2.0;
        u /= 2.0;
      } else if (dr > 10.0 * pr && tau > 1e-3) {
        tau /= 2.0;
        u *= 2.0;
      }
    }
  }
  out.value = scale * std::real((xs * best_rho).trace());
  out.witness = as_member(set, best_rho);
  out.gap = scale * std::max(0.0, best_ub - best_lb);
  out.iterations = it + 1;
  return out;
}

double wigner_l1(const StateSet& set, const Matrix& m) {
  Matrix basis = stacked_phase_basis(set.factor_dims);
  long long d = m.rows();
  RealVector g = (basis.adjoint() * Eigen::Map<const Eigen::VectorXcd>(m.data(), d * d)).real();
  return g.cwiseAbs().sum() / std::sqrt(static_cast<double>(d));
}

}  // namespace

const char* to_string(SetKind kind) {
  switch (kind) {
    case SetKind::singleton: return "singleton";
    case SetKind::hull: return "hull";
    case SetKind::conditional: return "conditional";
    case SetKind::channel_image: return "channel_image";
    case SetKind::incoherent: return "incoherent";
    case SetKind::rains: return "rains";
    case SetKind::mana: return "mana";
    case SetKind::tensor_power: return "tensor_power";
  }
  return "unknown";
}

StateSet StateSet::singleton(const DensityOperator& rho) {
  StateSet s;
  s.kind = SetKind::singleton;
  s.dim = rho.dim();
  s.factor_dims = rho.base.factor_dims;
  s.generators = {rho.base};
  return s;
}

StateSet StateSet::hull(const std::vector<DensityOperator>& gens) {
  if (gens.empty()) throw precondition_error("hull needs at least one generator");
  StateSet s;
  s.kind = gens.size() == 1 ? SetKind::singleton : SetKind::hull;
  s.dim = gens[0].dim();
  s.factor_dims = gens[0].base.factor_dims;
  for (const DensityOperator& g : gens) {
    if (g.dim() != s.dim) throw precondition_error("hull generators must share a dimension");
    s.generators.push_back(g.base);
    s.generators.back().factor_dims = s.factor_dims;
  }
  return s;
}

StateSet StateSet::conditional(const std::vector<int>& dims, const std::vector<int>& id_positions,
                               double identity_weight) {
  if (dims.empty()) throw precondition_error("conditional set needs factor dimensions");
  for (int d : dims)
    if (d <= 0) throw precondition_error("factor dimensions must be positive");
  std::vector<char> seen(dims.size(), 0);
  for (int t : id_positions) {
    if (t < 0 || t >= static_cast<int>(dims.size()))
      throw precondition_error("identity position out of range");
    if (seen[t]) throw precondition_error("duplicate identity position");
    seen[t] = 1;
  }
  if (!(identity_weight > 0)) throw precondition_error("identity weight must be positive");
  if (id_positions.empty() && identity_weight != 1.0)
    throw precondition_error("weight applies to the identity factors; none were marked");
  StateSet s;
  s.kind = SetKind::conditional;
  s.factor_dims = dims;
  s.dim = static_cast<int>(product_of(dims));
  s.identity_positions = id_positions;
  std::sort(s.identity_positions.begin(), s.identity_positions.end());
  s.identity_weight = identity_weight;
  return s;
}

StateSet StateSet::channel_image(const std::vector<Matrix>& kraus, int input_dim,
                                 const std::vector<int>& output_dims) {
  if (kraus.empty()) throw precondition_error("channel needs at least one Kraus operator");
  if (input_dim <= 0) throw precondition_error("channel input dimension must be positive");
  int dout = static_cast<int>(kraus[0].rows());
  Matrix comp = Matrix::Zero(input_dim, input_dim);
  for (const Matrix& k : kraus) {
    if (k.cols() != input_dim || k.rows() != dout)
      throw precondition_error("Kraus operators must share a shape matching the input dimension");
    comp += k.adjoint() * k;
  }
  if ((comp - Matrix::Identity(input_dim, input_dim)).norm() > 1e-8 * input_dim)
    throw precondition_error("channel must be trace preserving");
  StateSet s;
  s.kind = SetKind::channel_image;
  s.dim = dout;
  s.factor_dims = output_dims.empty() ? std::vector<int>{dout} : output_dims;
  if (product_of(s.factor_dims) != dout)
    throw precondition_error("output factor dimensions do not multiply to the output dimension");
  s.kraus = kraus;
  s.input_dim = input_dim;
  return s;
}

StateSet StateSet::incoherent(int dim) { return incoherent(std::vector<int>{dim}); }

StateSet StateSet::incoherent(const std::vector<int>& dims) {
  if (dims.empty()) throw precondition_error("incoherent set needs factor dimensions");
  for (int d : dims)
    if (d <= 0) throw precondition_error("factor dimensions must be positive");
  StateSet s;
  s.kind = SetKind::incoherent;
  s.factor_dims = dims;
  s.dim = static_cast<int>(product_of(dims));
  return s;
}

StateSet StateSet::rains(const std::vector<int>& dims,
                         const std::vector<int>& transpose_positions) {
  if (dims.size() < 2) throw precondition_error("rains set needs at least two factors");
  if (transpose_positions.empty() || transpose_positions.size() >= dims.size())
    throw precondition_error("partial transpose must act on a nonempty strict subset of factors");
  std::vector<char> seen(dims.size(), 0);
  for (int t : transpose_positions) {
    if (t < 0 || t >= static_cast<int>(dims.size()))
      throw precondition_error("transpose position out of range");
    if (seen[t]) throw precondition_error("duplicate transpose position");
    seen[t] = 1;
  }
  StateSet s;
  s.kind = SetKind::rains;
  s.factor_dims = dims;
  s.dim = static_cast<int>(product_of(dims));
  s.transpose_positions = transpose_positions;
  std::sort(s.transpose_positions.begin(), s.transpose_positions.end());
  return s;
}

StateSet StateSet::mana(int d) {
  if (!is_odd_prime(d)) throw precondition_error("phase-space sets need an odd prime dimension");
  StateSet s;
  s.kind = SetKind::mana;
  s.factor_dims = {d};
  s.dim = d;
  return s;
}

std::vector<Matrix> phase_point_operators(int d) {
  if (!is_odd_prime(d)) throw precondition_error("phase-point operators need an odd prime dimension");
  Matrix shift = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j) shift((j + 1) % d, j) = 1.0;
  Matrix clock = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j) clock(j, j) = std::polar(1.0, 2.0 * M_PI * j / d);

  std::vector<Matrix> shift_pow(d), clock_pow(d);
  shift_pow[0] = Matrix::Identity(d, d);
  clock_pow[0] = Matrix::Identity(d, d);
  for (int a = 1; a < d; ++a) {
    shift_pow[a] = shift_pow[a - 1] * shift;
    clock_pow[a] = clock_pow[a - 1] * clock;
  }

  Matrix a0 = Matrix::Zero(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      Complex tau_ab = std::polar(1.0, M_PI * (d + 1) * a * b / d);
      a0 += tau_ab * shift_pow[a] * clock_pow[b];
    }
  a0 /= static_cast<double>(d);
  a0 = (a0 + a0.adjoint()) / 2.0;

  std::vector<Matrix> out;
  out.reserve(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      Matrix disp = shift_pow[a] * clock_pow[b];
      Matrix au = disp * a0 * disp.adjoint();
      out.push_back((au + au.adjoint()) / 2.0);
    }
  return out;
}

RealVector wigner_coordinates(const Matrix& x, const std::vector<Matrix>& basis) {
  RealVector w(static_cast<long long>(basis.size()));
  double d = static_cast<double>(x.rows());
  for (size_t u = 0; u < basis.size(); ++u)
    w[static_cast<long long>(u)] = std::real((basis[u] * x).trace()) / d;
  return w;
}

SupportValue max_linear(const StateSet& set, const HermitianOperator& x, const Tolerances& tol) {
  require_same_dim(set, x);
  switch (set.kind) {
    case SetKind::singleton:
    case SetKind::hull: {
      int arg = 0;
      double best = -1e300;
      for (size_t i = 0; i < set.generators.size(); ++i) {
        double v = std::real((x.entries * set.generators[i].entries).trace());
        if (v > best) {
          best = v;
          arg = static_cast<int>(i);
        }
      }
      return closed_form(set, best, set.generators[arg].entries);
    }
    case SetKind::conditional: {
      std::vector<int> q =
          complement_positions(static_cast<int>(set.factor_dims.size()), set.identity_positions);
      if (q.empty()) {
        double v = set.identity_weight * std::real(x.entries.trace());
        return closed_form(set, v, embed_conditional(set, Matrix()));
      }
      Matrix y = partial_trace(x.entries, set.factor_dims, q);
      Eigen::SelfAdjointEigenSolver<Matrix> es((y + y.adjoint()) / 2.0);
      int top = static_cast<int>(es.eigenvalues().size()) - 1;
      Matrix proj = es.eigenvectors().col(top) * es.eigenvectors().col(top).adjoint();
      return closed_form(set, set.identity_weight * es.eigenvalues()[top],
                         embed_conditional(set, proj));
    }
    case SetKind::channel_image: {
      Matrix y = apply_adjoint(set.kraus, x.entries);
      Eigen::SelfAdjointEigenSolver<Matrix> es(y);
      int top = static_cast<int>(es.eigenvalues().size()) - 1;
      Matrix pre = es.eigenvectors().col(top) * es.eigenvectors().col(top).adjoint();
      return closed_form(set, es.eigenvalues()[top], apply_channel(set.kraus, pre));
    }
    case SetKind::incoherent: {
      int arg = 0;
      double best = -1e300;
      for (int i = 0; i < set.dim; ++i) {
        double v = std::real(x.entries(i, i));
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      Matrix w = Matrix::Zero(set.dim, set.dim);
      w(arg, arg) = 1.0;
      return closed_form(set, best, w);
    }
    case SetKind::rains:
      return max_linear_rains(set, x.entries, tol);
    case SetKind::mana:
      return max_linear_mana(set, x.entries, tol);
    case SetKind::tensor_power:
      break;
  }
  throw composition_error("tensor_power descriptors must be expanded before use");
}

SupportValue min_linear(const StateSet& set, const HermitianOperator& x, const Tolerances& tol) {
  require_same_dim(set, x);
  switch (set.kind) {
    case SetKind::singleton:
    case SetKind::hull: {
      int arg = 0;
      double best = 1e300;
      for (size_t i = 0; i < set.generators.size(); ++i) {
        double v = std::real((x.entries * set.generators[i].entries).trace());
        if (v < best) {
          best = v;
          arg = static_cast<int>(i);
        }
      }
      return closed_form(set, best, set.generators[arg].entries);
    }
    case SetKind::conditional: {
      std::vector<int> q =
          complement_positions(static_cast<int>(set.factor_dims.size()), set.identity_positions);
      if (q.empty()) {
        double v = set.identity_weight * std::real(x.entries.trace());
        return closed_form(set, v, embed_conditional(set, Matrix()));
      }
      Matrix y = partial_trace(x.entries, set.factor_dims, q);
      Eigen::SelfAdjointEigenSolver<Matrix> es((y + y.adjoint()) / 2.0);
      Matrix proj = es.eigenvectors().col(0) * es.eigenvectors().col(0).adjoint();
      return closed_form(set, set.identity_weight * es.eigenvalues()[0],
                         embed_conditional(set, proj));
    }
    case SetKind::channel_image: {
      Matrix y = apply_adjoint(set.kraus, x.entries);
      Eigen::SelfAdjointEigenSolver<Matrix> es(y);
      Matrix pre = es.eigenvectors().col(0) * es.eigenvectors().col(0).adjoint();
      return closed_form(set, es.eigenvalues()[0], apply_channel(set.kraus, pre));
    }
    case SetKind::incoherent: {
      int arg = 0;
      double best = 1e300;
      for (int i = 0; i < set.dim; ++i) {
        double v = std::real(x.entries(i, i));
        if (v < best) {
          best = v;
          arg = i;
        }
      }
      Matrix w = Matrix::Zero(set.dim, set.dim);
      w(arg, arg) = 1.0;
      return closed_form(set, best, w);
    }
    case SetKind::rains:
    case SetKind::mana: {
      // the zero operator is a member, so the minimum is never positive;
      // for PSD inputs it is met exactly at zero
      Eigen::SelfAdjointEigenSolver<Matrix> es(x.entries);
      if (es.eigenvalues().minCoeff() >= 0.0)
        return closed_form(set, 0.0, Matrix::Zero(set.dim, set.dim));
      HermitianOperator neg;
      neg.entries = -x.entries;
      neg.factor_dims = x.factor_dims;
      SupportValue flipped = max_linear(set, neg, tol);
      flipped.value = -flipped.value;
      return flipped;
    }
    case SetKind::tensor_power:
      break;
  }
  throw composition_error("tensor_power descriptors must be expanded before use");
}

bool polar_contains(const StateSet& set, const HermitianOperator& w, double slack,
                    const Tolerances& tol) {
  return max_linear(set, w, tol).value <= 1.0 + slack;
}

namespace {

// squared Frobenius distance from x to the convex hull of the generators,
// by accelerated projected gradient over the mixture weights with an
// active-support Newton polish
double hull_distance(const std::vector<HermitianOperator>& gens, const Matrix& x) {
  int k = static_cast<int>(gens.size());
  RealMatrix gram(k, k);
  RealVector lin(k);
  for (int i = 0; i < k; ++i) {
    lin[i] = std::real((gens[i].entries.adjoint() * x).trace());
    for (int j = i; j < k; ++j) {
      gram(i, j) = std::real((gens[i].entries.adjoint() * gens[j].entries).trace());
      gram(j, i) = gram(i, j);
    }
  }
  double cxx = std::real((x.adjoint() * x).trace());
  auto objective = [&](const RealVector& w) {
    return w.dot(gram * w) - 2.0 * lin.dot(w) + cxx;
  };

  Eigen::SelfAdjointEigenSolver<RealMatrix> ges(gram);
  double lips = std::max(2.0 * ges.eigenvalues().maxCoeff(), 1e-12);
  RealVector w = RealVector::Constant(k, 1.0 / k), v = w, w_prev = w;
  double t_mom = 1.0;
  for (int it = 0; it < 2000; ++it) {
    RealVector grad = 2.0 * (gram * v - lin);
    RealVector w_new = project_simplex(v - grad / lips);
    double t_new = (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom)) / 2.0;
    v = w_new + ((t_mom - 1.0) / t_new) * (w_new - w);
    // restart the momentum when it points uphill
    if ((v - w_new).dot(w_new - w) > 0) {
      v = w_new;
      t_new = 1.0;
    }
    w_prev = w;
    w = w_new;
    t_mom = t_new;
    if (it > 10 && (w - w_prev).norm() < 1e-15) break;
  }

  // exact KKT solve on the detected support
  std::vector<int> support;
  for (int i = 0; i < k; ++i)
    if (w[i] > 1e-9) support.push_back(i);
  if (!support.empty()) {
    int s = static_cast<int>(support.size());
    RealMatrix kkt = RealMatrix::Zero(s + 1, s + 1);
    RealVector rhs(s + 1);
    for (int a = 0; a < s; ++a) {
      rhs[a] = 2.0 * lin[support[a]];
      kkt(a, s) = 1.0;
      kkt(s, a) = 1.0;
      for (int b = 0; b < s; ++b) kkt(a, b) = 2.0 * gram(support[a], support[b]);
    }
    rhs[s] = 1.0;
    Eigen::FullPivLU<RealMatrix> lu(kkt);
    if (lu.isInvertible()) {
      RealVector sol = lu.solve(rhs);
      if (sol.head(s).minCoeff() >= -1e-12) {
        RealVector cand = RealVector::Zero(k);
        for (int a = 0; a < s; ++a) cand[support[a]] = std::max(sol[a], 0.0);
        cand /= std::max(cand.sum(), 1e-300);
        if (objective(cand) < objective(w)) w = cand;
      }
    }
  }
  return std::max(objective(w), 0.0);
}

// nearest preimage of x under the channel: exact linear least squares in an
// orthonormal hermitian basis, then a short projected-gradient polish to pull
// the preimage into the density set
double channel_image_distance(const StateSet& set, const Matrix& x) {
  int din = set.input_dim;
  int nin = din * din;
  std::vector<Matrix> basis = hermitian_basis(din);
  std::vector<Matrix> images(nin);
  RealMatrix gram(nin, nin);
  RealVector lin(nin), traces(nin);
  for (int i = 0; i < nin; ++i) {
    images[i] = apply_channel(set.kraus, basis[i]);
    traces[i] = std::real(basis[i].trace());
    lin[i] = std::real((images[i].adjoint() * x).trace());
  }
  for (int i = 0; i < nin; ++i)
    for (int j = i; j < nin; ++j) {
      gram(i, j) = std::real((images[i].adjoint() * images[j]).trace());
      gram(j, i) = gram(i, j);
    }

  // trace-one constraint handled by a stiff penalty, then a feasibility polish
  double mu = 1e8;
  RealMatrix lhs = gram + mu * (traces * traces.transpose());
  RealVector rhs = lin + mu * traces;
  RealVector wsol = lhs.ldlt().solve(rhs);
  Matrix pre = Matrix::Zero(din, din);
  for (int i = 0; i < nin; ++i) pre += wsol[i] * basis[i];
  pre = project_density(pre);

  double lips = std::max(2.0 * Eigen::SelfAdjointEigenSolver<RealMatrix>(gram).eigenvalues().maxCoeff(),
                         1e-12);
  Matrix rho = pre, vel = pre;
  double t_mom = 1.0;
  auto resid = [&](const Matrix& r) { return (apply_channel(set.kraus, r) - x).norm(); };
  double best = resid(rho);
  Matrix best_rho = rho;
  for (int it = 0; it < 400; ++it) {
    Matrix grad = apply_adjoint(set.kraus, apply_channel(set.kraus, vel) - x);
    Matrix rho_new = project_density(vel - 2.0 * grad / lips);
    double t_new = (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom)) / 2.0;
    vel = rho_new + ((t_mom - 1.0) / t_new) * (rho_new - rho);
    rho = rho_new;
    t_mom = t_new;
    double r = resid(rho);
    if (r < best) {
      best = r;
      best_rho = rho;
    }
  }
  return best;
}

}  // namespace

bool contains(const StateSet& set, const HermitianOperator& x, double slack,
              const Tolerances& tol) {
  require_same_dim(set, x);
  double scale = std::max(1.0, x.entries.norm());
  switch (set.kind) {
    case SetKind::singleton:
      return (x.entries - set.generators[0].entries).norm() <= slack * scale;
    case SetKind::hull:
      return std::sqrt(hull_distance(set.generators, x.entries)) <= slack * scale;
    case SetKind::conditional: {
      std::vector<int> q =
          complement_positions(static_cast<int>(set.factor_dims.size()), set.identity_positions);
      if (q.empty())
        return (x.entries - set.identity_weight * Matrix::Identity(set.dim, set.dim)).norm() <=
               slack * scale;
      long long dp = 1;
      for (int t : set.identity_positions) dp *= set.factor_dims[t];
      Matrix xq = partial_trace(x.entries, set.factor_dims, q) /
                  (set.identity_weight * static_cast<double>(dp));
      xq = (xq + xq.adjoint()) / 2.0;
      Eigen::SelfAdjointEigenSolver<Matrix> es(xq);
      if (es.eigenvalues().minCoeff() < -slack * scale) return false;
      if (std::abs(std::real(xq.trace()) - 1.0) > slack * scale) return false;
      return (x.entries - embed_conditional(set, xq)).norm() <= slack * scale;
    }
    case SetKind::channel_image:
      return channel_image_distance(set, x.entries) <= slack * scale;
    case SetKind::incoherent: {
      Matrix off = x.entries;
      double diag_min = 1e300;
      double tr = 0.0;
      for (int i = 0; i < set.dim; ++i) {
        diag_min = std::min(diag_min, std::real(off(i, i)));
        tr += std::real(off(i, i));
        off(i, i) = 0.0;
      }
      return off.norm() <= slack * scale && diag_min >= -slack * scale &&
             std::abs(tr - 1.0) <= slack * scale;
    }
    case SetKind::rains: {
      Eigen::SelfAdjointEigenSolver<Matrix> es(x.entries);
      if (es.eigenvalues().minCoeff() < -slack * scale) return false;
      return trace_norm_herm(partial_transpose(x.entries, set.factor_dims,
                                               set.transpose_positions)) <= 1.0 + slack;
    }
    case SetKind::mana: {
      Eigen::SelfAdjointEigenSolver<Matrix> es(x.entries);
      if (es.eigenvalues().minCoeff() < -slack * scale) return false;
      return wigner_l1(set, x.entries) <= 1.0 + slack;
    }
    case SetKind::tensor_power:
      break;
  }
  throw composition_error("tensor_power descriptors must be expanded before use");
}

StateSet tensor(const StateSet& a, const StateSet& b) {
  long long d = static_cast<long long>(a.dim) * b.dim;
  if (d > default_tolerances().dim_cap)
    throw resource_limit_error("tensor composition exceeds the dimension cap");
  const bool a_gen = a.kind == SetKind::singleton || a.kind == SetKind::hull;
  const bool b_gen = b.kind == SetKind::singleton || b.kind == SetKind::hull;
  if (a_gen && b_gen) {
    if (a.kind == SetKind::hull && b.kind == SetKind::hull)
      throw composition_error(
          "tensoring two hulls is ambiguous; build the family level instead");
    StateSet s;
    s.kind = (a.kind == SetKind::hull || b.kind == SetKind::hull) ? SetKind::hull
                                                                  : SetKind::singleton;
    s.dim = static_cast<int>(d);
    s.factor_dims = a.factor_dims;
    s.factor_dims.insert(s.factor_dims.end(), b.factor_dims.begin(), b.factor_dims.end());
    for (const HermitianOperator& ga : a.generators)
      for (const HermitianOperator& gb : b.generators) {
        HermitianOperator g;
        g.entries = kron(ga.entries, gb.entries);
        g.factor_dims = s.factor_dims;
        s.generators.push_back(g);
      }
    return s;
  }
  if (a.kind != b.kind) throw composition_error("tensor composition needs matching set kinds");
  StateSet s;
  s.kind = a.kind;
  s.dim = static_cast<int>(d);
  s.factor_dims = a.factor_dims;
  s.factor_dims.insert(s.factor_dims.end(), b.factor_dims.begin(), b.factor_dims.end());
  int offset = static_cast<int>(a.factor_dims.size());
  switch (a.kind) {
    case SetKind::conditional:
      s.identity_positions = a.identity_positions;
      for (int t : b.identity_positions) s.identity_positions.push_back(t + offset);
      s.identity_weight = a.identity_weight * b.identity_weight;
      return s;
    case SetKind::channel_image:
      s.input_dim = a.input_dim * b.input_dim;
      for (const Matrix& ka : a.kraus)
        for (const Matrix& kb : b.kraus) s.kraus.push_back(kron(ka, kb));
      return s;
    case SetKind::incoherent:
      return s;
    case SetKind::rains:
      s.transpose_positions = a.transpose_positions;
      for (int t : b.transpose_positions) s.transpose_positions.push_back(t + offset);
      return s;
    case SetKind::mana:
      return s;
    default:
      break;
  }
  throw composition_error("unsupported tensor composition");
}

HermitianOperator sample_member(const StateSet& set, Rng& rng, const Tolerances& tol) {
  switch (set.kind) {
    case SetKind::singleton:
      return set.generators[0];
    case SetKind::hull: {
      RealVector w = random_simplex(static_cast<int>(set.generators.size()), rng);
      Matrix m = Matrix::Zero(set.dim, set.dim);
      for (size_t i = 0; i < set.generators.size(); ++i) m += w[i] * set.generators[i].entries;
      return as_member(set, m);
    }
    case SetKind::conditional: {
      std::vector<int> q =
          complement_positions(static_cast<int>(set.factor_dims.size()), set.identity_positions);
      if (q.empty()) return as_member(set, embed_conditional(set, Matrix()));
      long long dq = 1;
      for (int t : q) dq *= set.factor_dims[t];
      DensityOperator rho_q = random_density(static_cast<int>(dq), rng);
      return as_member(set, embed_conditional(set, rho_q.matrix()));
    }
    case SetKind::channel_image: {
      DensityOperator pre = random_density(set.input_dim, rng);
      return as_member(set, apply_channel(set.kraus, pre.matrix()));
    }
    case SetKind::incoherent: {
      RealVector w = random_simplex(set.dim, rng);
      Matrix m = Matrix::Zero(set.dim, set.dim);
      for (int i = 0; i < set.dim; ++i) m(i, i) = w[i];
      return as_member(set, m);
    }
    case SetKind::rains: {
      DensityOperator rho = random_density(set.dim, rng);
      double n1 = trace_norm_herm(
          partial_transpose(rho.matrix(), set.factor_dims, set.transpose_positions));
      return as_member(set, rho.matrix() / std::max(1.0, n1));
    }
    case SetKind::mana: {
      DensityOperator rho = random_density(set.dim, rng);
      double n1 = wigner_l1(set, rho.matrix());
      return as_member(set, rho.matrix() / std::max(1.0, n1));
    }
    case SetKind::tensor_power:
      break;
  }
  (void)tol;
  throw composition_error("tensor_power descriptors must be expanded before use");
}

std::optional<std::vector<HermitianOperator>> enumerate_generators(const StateSet& set) {
  switch (set.kind) {
    case SetKind::singleton:
    case SetKind::hull:
      return set.generators;
    case SetKind::incoherent: {
      std::vector<HermitianOperator> out;
      for (int i = 0; i < set.dim; ++i) {
        Matrix m = Matrix::Zero(set.dim, set.dim);
        m(i, i) = 1.0;
        out.push_back(as_member(set, m));
      }
      return out;
    }
    default:
      return std::nullopt;
  }
}

SetFamily::SetFamily(StateSet base) : base_(std::move(base)) {
  if (base_.kind == SetKind::tensor_power)
    throw composition_error("family bases must be concrete sets");
}

SetFamily::SetFamily(StateSet base, std::function<StateSet(int)> custom_level)
    : base_(std::move(base)), custom_(std::move(custom_level)) {}

StateSet SetFamily::level(int n) const {
  if (n < 1) throw precondition_error("family level must be at least one");
  if (custom_) return custom_(n);
  if (n == 1) return base_;
  if (base_.kind == SetKind::hull) {
    // hull levels enumerate every n-fold product string of the generators
    double count = std::pow(static_cast<double>(base_.generators.size()), n);
    if (count > 4096) throw resource_limit_error("hull level has too many product generators");
    StateSet out;
    out.kind = SetKind::hull;
    out.factor_dims.clear();
    for (int i = 0; i < n; ++i)
      out.factor_dims.insert(out.factor_dims.end(), base_.factor_dims.begin(),
                             base_.factor_dims.end());
    out.dim = static_cast<int>(std::llround(std::pow(static_cast<double>(base_.dim), n)));
    std::vector<HermitianOperator> cur = base_.generators;
    for (int i = 1; i < n; ++i) {
      std::vector<HermitianOperator> next;
      next.reserve(cur.size() * base_.generators.size());
      for (const HermitianOperator& c : cur)
        for (const HermitianOperator& g : base_.generators) {
          HermitianOperator prod;
          prod.entries = kron(c.entries, g.entries);
          next.push_back(std::move(prod));
        }
      cur = std::move(next);
    }
    for (HermitianOperator& g : cur) g.factor_dims = out.factor_dims;
    out.generators = std::move(cur);
    return out;
  }
  StateSet out = base_;
  for (int i = 1; i < n; ++i) out = tensor(out, base_);
  return out;
}

AssumptionReport validate_assumptions(const SetFamily& family, int m, int k, int samples,
                                      unsigned seed, const Tolerances& tol) {
  if (m < 1 || k < 1) throw precondition_error("levels must be at least one");
  if (samples < 1) throw precondition_error("need at least one sample");
  AssumptionReport report;
  Rng rng(seed);
  StateSet sm = family.level(m);
  StateSet sk = family.level(k);
  StateSet smk = family.level(m + k);
  int block = static_cast<int>(family.base().factor_dims.size());

  auto random_psd = [&](int dim) -> Matrix {
    Matrix g = ginibre(dim, dim, rng);
    Matrix x = g * g.adjoint();
    return x / x.norm();
  };

  // permutation invariance of the support function at each composite level
  for (int level : {m, k, m + k}) {
    if (level < 2) continue;
    const StateSet& s = level == m ? sm : (level == k ? sk : smk);
    if (static_cast<int>(s.factor_dims.size()) != block * level) continue;
    for (int t = 0; t < samples; ++t) {
      HermitianOperator x;
      x.entries = random_psd(s.dim);
      x.factor_dims = s.factor_dims;
      std::vector<int> copy_perm(level);
      std::iota(copy_perm.begin(), copy_perm.end(), 0);
      std::shuffle(copy_perm.begin(), copy_perm.end(), rng);
      std::vector<int> perm(block * level);
      for (int c = 0; c < level; ++c)
        for (int f = 0; f < block; ++f) perm[c * block + f] = copy_perm[c] * block + f;
      HermitianOperator xp;
      xp.entries = permute_factors(x.entries, s.factor_dims, perm);
      xp.factor_dims = s.factor_dims;
      double h1 = max_linear(s, x, tol).value;
      double h2 = max_linear(s, xp, tol).value;
      if (std::abs(h1 - h2) > tol.membership * std::max(1.0, std::abs(h1))) {
        report.permutation_ok = false;
        std::ostringstream msg;
        msg << "level " << level << " sample " << t << ": support value " << h1
            << " changed to " << h2 << " under a copy permutation";
        report.violations.push_back(msg.str());
      }
    }
  }

  // tensor stability: products of sampled members stay inside the next level
  for (int t = 0; t < samples; ++t) {
    HermitianOperator xm = sample_member(sm, rng, tol);
    HermitianOperator xk = sample_member(sk, rng, tol);
    HermitianOperator prod;
    prod.entries = kron(xm.entries, xk.entries);
    prod.factor_dims = smk.factor_dims;
    if (!contains(smk, prod, tol.membership, tol)) {
      report.tensor_ok = false;
      std::ostringstream msg;
      msg << "sample " << t << ": product of level-" << m << " and level-" << k
          << " members left level " << m + k;
      report.violations.push_back(msg.str());
    }
  }

  // submultiplicativity of the support function on positive test operators
  for (int t = 0; t < samples; ++t) {
    HermitianOperator x1, x2, prod;
    x1.entries = random_psd(sm.dim);
    x1.factor_dims = sm.factor_dims;
    x2.entries = random_psd(sk.dim);
    x2.factor_dims = sk.factor_dims;
    prod.entries = kron(x1.entries, x2.entries);
    prod.factor_dims = smk.factor_dims;
    double lhs = max_linear(smk, prod, tol).value;
    double rhs = max_linear(sm, x1, tol).value * max_linear(sk, x2, tol).value;
    if (lhs > rhs * (1.0 + tol.membership) + 1e-12) {
      report.submultiplicative_ok = false;
      std::ostringstream msg;
      msg << "sample " << t << ": h_" << m + k << "(x1 (x) x2) = " << lhs
          << " exceeds h_" << m << "(x1) h_" << k << "(x2) = " << rhs;
      report.violations.push_back(msg.str());
    }
  }
  return report;
}

}  // namespace qsd
