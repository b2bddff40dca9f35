#include "qsd/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qsd {

namespace {

long long product_of(const std::vector<int>& dims) {
  long long p = 1;
  for (int d : dims) p *= d;
  return p;
}

void check_factors(const std::vector<int>& dims, int dim) {
  for (int d : dims)
    if (d <= 0) throw precondition_error("factor dimensions must be positive");
  if (product_of(dims) != dim)
    throw precondition_error("product of factor_dims does not match operator dimension");
}

// digits of index i with respect to mixed radices, most significant factor first
void decompose(long long i, const std::vector<int>& dims, std::vector<int>& out) {
  for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
    out[k] = static_cast<int>(i % dims[k]);
    i /= dims[k];
  }
}

long long compose(const std::vector<int>& digits, const std::vector<int>& dims) {
  long long i = 0;
  for (size_t k = 0; k < dims.size(); ++k) i = i * dims[k] + digits[k];
  return i;
}

} // namespace

HermitianOperator::HermitianOperator(Matrix m, std::vector<int> factors, const Tolerances& tol) {
  if (m.rows() != m.cols()) throw precondition_error("operator must be square");
  if (m.rows() == 0) throw precondition_error("operator must be nonempty");
  if (m.rows() > tol.dim_cap) throw resource_limit_error("operator exceeds the dimension cap");
  if (factors.empty()) factors = {static_cast<int>(m.rows())};
  check_factors(factors, static_cast<int>(m.rows()));
  entries = (m + m.adjoint()) / 2.0;
  factor_dims = std::move(factors);
}

HermitianOperator HermitianOperator::identity(int d) {
  return HermitianOperator(Matrix::Identity(d, d));
}

DensityOperator::DensityOperator(HermitianOperator op, TraceMode mode, const Tolerances& tol)
    : base(std::move(op)), trace_mode(mode) {
  SpectralDecomposition es = eig(base, tol);
  double scale = std::max(es.eigenvalues.cwiseAbs().maxCoeff(), 1e-300);
  double window = tol.density_negativity * scale;
  if (es.eigenvalues[0] < -window)
    throw precondition_error("density operator has a negative eigenvalue beyond tolerance");
  if (es.eigenvalues[0] < 0) {
    RealVector lam = es.eigenvalues.cwiseMax(0.0);
    base.entries = es.eigenvectors * lam.asDiagonal() * es.eigenvectors.adjoint();
    base.entries = (base.entries + base.entries.adjoint()) / 2.0;
  }
  double tr = base.trace();
  if (trace_mode == TraceMode::normalized) {
    if (std::abs(tr - 1.0) > tol.trace_window)
      throw precondition_error("normalized state must have unit trace");
  } else {
    if (tr > 1.0 + tol.trace_window)
      throw precondition_error("subnormalized state must have trace at most one");
  }
}

DensityOperator::DensityOperator(Matrix m, TraceMode mode, const Tolerances& tol)
    : DensityOperator(HermitianOperator(std::move(m), {}, tol), mode, tol) {}

SpectralDecomposition eig(const Matrix& a, const Tolerances& tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) throw convergence_error("eigendecomposition failed", 0.0);
  SpectralDecomposition out{es.eigenvalues(), es.eigenvectors()};
  double scale = std::max(a.norm(), 1e-300);
  double res = (out.eigenvectors * out.eigenvalues.asDiagonal() * out.eigenvectors.adjoint() - a)
                   .norm() / scale;
  if (res > tol.eig_residual)
    throw convergence_error("eigendecomposition residual above tolerance", res);
  return out;
}

SpectralDecomposition eig(const HermitianOperator& a, const Tolerances& tol) {
  return eig(a.entries, tol);
}

Matrix matrix_fn(const Matrix& a, const MatrixFn& fn, double clip, bool on_support,
                 const Tolerances& tol) {
  SpectralDecomposition es = eig(a, tol);
  double scale = es.eigenvalues.cwiseAbs().maxCoeff();
  double floor = (clip < 0 ? tol.support_floor : clip) * scale;
  bool singular_at_zero = fn.kind == MatrixFn::log2 || fn.kind == MatrixFn::ln ||
                          (fn.kind == MatrixFn::power && fn.exponent < 0);
  RealVector lam = es.eigenvalues;
  for (int i = 0; i < lam.size(); ++i) {
    double x = lam[i];
    if (x <= floor) {
      if (singular_at_zero && !on_support)
        throw precondition_error("matrix function singular at zero applied off support");
      lam[i] = 0.0;
      continue;
    }
    switch (fn.kind) {
      case MatrixFn::log2: lam[i] = std::log2(x); break;
      case MatrixFn::ln: lam[i] = std::log(x); break;
      case MatrixFn::power: lam[i] = std::pow(x, fn.exponent); break;
      case MatrixFn::positive_part: lam[i] = x; break;
    }
  }
  // positive_part keeps positive eigenvalues only, which the floor already arranged
  Matrix out = es.eigenvectors * lam.asDiagonal() * es.eigenvectors.adjoint();
  return (out + out.adjoint()) / 2.0;
}

HermitianOperator matrix_fn(const HermitianOperator& a, const MatrixFn& fn, double clip,
                            bool on_support, const Tolerances& tol) {
  HermitianOperator out;
  out.entries = matrix_fn(a.entries, fn, clip, on_support, tol);
  out.factor_dims = a.factor_dims;
  return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b,
                       const Tolerances& tol) {
  long long d = static_cast<long long>(a.dim()) * b.dim();
  if (d > tol.dim_cap) throw resource_limit_error("kron result exceeds the dimension cap");
  HermitianOperator out;
  out.entries = kron(a.entries, b.entries);
  out.factor_dims = a.factor_dims;
  out.factor_dims.insert(out.factor_dims.end(), b.factor_dims.begin(), b.factor_dims.end());
  return out;
}

Matrix kron_power(const Matrix& a, int n) {
  if (n < 1) throw precondition_error("kron power needs n >= 1");
  Matrix out = a;
  for (int i = 1; i < n; ++i) out = kron(out, a);
  return out;
}

HermitianOperator kron_power(const HermitianOperator& a, int n, const Tolerances& tol) {
  if (n < 1) throw precondition_error("kron power needs n >= 1");
  HermitianOperator out = a;
  for (int i = 1; i < n; ++i) out = kron(out, a, tol);
  return out;
}

Matrix partial_trace(const Matrix& a, const std::vector<int>& dims, const std::vector<int>& keep) {
  check_factors(dims, static_cast<int>(a.rows()));
  int k = static_cast<int>(dims.size());
  for (size_t t = 0; t < keep.size(); ++t) {
    if (keep[t] < 0 || keep[t] >= k) throw precondition_error("partial trace index out of range");
    if (t > 0 && keep[t] <= keep[t - 1]) throw precondition_error("keep indices must be ascending");
  }
  std::vector<int> kept_dims;
  for (int t : keep) kept_dims.push_back(dims[t]);
  long long dout = product_of(kept_dims);
  std::vector<char> is_kept(k, 0);
  for (int t : keep) is_kept[t] = 1;

  Matrix out = Matrix::Zero(dout, dout);
  long long d = a.rows();
  std::vector<int> di(k), dj(k), keep_i(keep.size()), keep_j(keep.size());
  for (long long i = 0; i < d; ++i) {
    decompose(i, dims, di);
    for (long long j = 0; j < d; ++j) {
      decompose(j, dims, dj);
      bool diag = true;
      for (int t = 0; t < k; ++t)
        if (!is_kept[t] && di[t] != dj[t]) { diag = false; break; }
      if (!diag) continue;
      for (size_t t = 0; t < keep.size(); ++t) {
        keep_i[t] = di[keep[t]];
        keep_j[t] = dj[keep[t]];
      }
      out(compose(keep_i, kept_dims), compose(keep_j, kept_dims)) += a(i, j);
    }
  }
  return out;
}

HermitianOperator partial_trace(const HermitianOperator& a, const std::vector<int>& keep) {
  HermitianOperator out;
  out.entries = partial_trace(a.entries, a.factor_dims, keep);
  for (int t : keep) out.factor_dims.push_back(a.factor_dims[t]);
  if (out.factor_dims.empty()) throw precondition_error("partial trace must keep a factor");
  return out;
}

Matrix partial_transpose(const Matrix& a, const std::vector<int>& dims,
                         const std::vector<int>& subsystems) {
  check_factors(dims, static_cast<int>(a.rows()));
  int k = static_cast<int>(dims.size());
  std::vector<char> flip(k, 0);
  for (int t : subsystems) {
    if (t < 0 || t >= k) throw precondition_error("partial transpose index out of range");
    flip[t] = 1;
  }
  long long d = a.rows();
  Matrix out(d, d);
  std::vector<int> di(k), dj(k), ri(k), rj(k);
  for (long long i = 0; i < d; ++i) {
    decompose(i, dims, di);
    for (long long j = 0; j < d; ++j) {
      decompose(j, dims, dj);
      for (int t = 0; t < k; ++t) {
        ri[t] = flip[t] ? dj[t] : di[t];
        rj[t] = flip[t] ? di[t] : dj[t];
      }
      out(compose(ri, dims), compose(rj, dims)) = a(i, j);
    }
  }
  return out;
}

HermitianOperator partial_transpose(const HermitianOperator& a,
                                    const std::vector<int>& subsystems) {
  HermitianOperator out;
  out.entries = partial_transpose(a.entries, a.factor_dims, subsystems);
  out.factor_dims = a.factor_dims;
  return out;
}

Matrix permute_factors(const Matrix& a, const std::vector<int>& dims,
                       const std::vector<int>& perm) {
  check_factors(dims, static_cast<int>(a.rows()));
  int k = static_cast<int>(dims.size());
  if (static_cast<int>(perm.size()) != k) throw precondition_error("permutation size mismatch");
  std::vector<int> out_dims(k);
  for (int t = 0; t < k; ++t) out_dims[t] = dims[perm[t]];
  long long d = a.rows();
  // map output index -> input index once, then gather
  std::vector<long long> src(d);
  std::vector<int> od(k), id(k);
  for (long long o = 0; o < d; ++o) {
    decompose(o, out_dims, od);
    for (int t = 0; t < k; ++t) id[perm[t]] = od[t];
    src[o] = compose(id, dims);
  }
  Matrix out(d, d);
  for (long long i = 0; i < d; ++i)
    for (long long j = 0; j < d; ++j) out(i, j) = a(src[i], src[j]);
  return out;
}

HermitianOperator pinch(const HermitianOperator& a, const HermitianOperator& b,
                        double cluster_tol, const Tolerances& tol) {
  if (a.dim() != b.dim()) throw precondition_error("pinch arguments must share a dimension");
  double width = cluster_tol < 0 ? tol.pinch_cluster : cluster_tol;
  SpectralDecomposition es = eig(b, tol);
  double scale = std::max(es.eigenvalues.cwiseAbs().maxCoeff(), 1e-300);
  Matrix out = Matrix::Zero(a.dim(), a.dim());
  int n = a.dim();
  int start = 0;
  for (int i = 1; i <= n; ++i) {
    if (i < n && es.eigenvalues[i] - es.eigenvalues[i - 1] <= width * scale) continue;
    Matrix block = es.eigenvectors.middleCols(start, i - start);
    Matrix proj = block * block.adjoint();
    out += proj * a.entries * proj;
    start = i;
  }
  HermitianOperator result;
  result.entries = (out + out.adjoint()) / 2.0;
  result.factor_dims = a.factor_dims;
  return result;
}

HermitianOperator twirl(const HermitianOperator& a, int n, int d, const Tolerances& tol) {
  if (n < 1 || d < 1) throw precondition_error("twirl needs positive copy count and dimension");
  if (n > tol.twirl_max_copies)
    throw resource_limit_error("twirl copy count exceeds the enumeration cap");
  long long dn = 1;
  for (int i = 0; i < n; ++i) dn *= d;
  if (dn != a.dim()) throw precondition_error("twirl dimension must equal d^n");
  std::vector<int> dims(n, d), perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Matrix acc = Matrix::Zero(a.dim(), a.dim());
  long long count = 0;
  do {
    acc += permute_factors(a.entries, dims, perm);
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  HermitianOperator out;
  out.entries = acc / static_cast<double>(count);
  out.entries = (out.entries + out.entries.adjoint()) / 2.0;
  out.factor_dims = a.factor_dims;
  return out;
}

int spec_count(const HermitianOperator& a, double cluster_tol, const Tolerances& tol) {
  double width = cluster_tol < 0 ? tol.spec_cluster : cluster_tol;
  SpectralDecomposition es = eig(a, tol);
  double scale = es.eigenvalues.cwiseAbs().maxCoeff();
  if (scale <= 0) return 1;
  int count = 1;
  for (int i = 1; i < es.eigenvalues.size(); ++i)
    if (es.eigenvalues[i] - es.eigenvalues[i - 1] > width * scale) ++count;
  return count;
}

double trace_norm_herm(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  return es.eigenvalues().cwiseAbs().sum();
}

DistancePack fidelity_and_distances(const DensityOperator& rho, const DensityOperator& sigma,
                                    const Tolerances& tol) {
  if (rho.dim() != sigma.dim()) throw precondition_error("states must share a dimension");
  Matrix root = matrix_fn(sigma.matrix(), MatrixFn::Power(0.5), -1.0, true, tol);
  Matrix m = root * rho.matrix() * root;
  Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0);
  double root_fid = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    root_fid += std::sqrt(std::max(0.0, es.eigenvalues()[i]));
  double extra = std::sqrt(std::max(0.0, 1.0 - rho.trace()) * std::max(0.0, 1.0 - sigma.trace()));
  DistancePack out;
  out.fidelity = std::min(1.0, root_fid + extra);
  out.purified = std::sqrt(std::max(0.0, 1.0 - out.fidelity * out.fidelity));
  out.trace_distance = 0.5 * trace_norm_herm(rho.matrix() - sigma.matrix());
  return out;
}

Matrix support_projector(const Matrix& a, const Tolerances& tol) {
  SpectralDecomposition es = eig(a, tol);
  double floor = tol.support_floor * std::max(es.eigenvalues.cwiseAbs().maxCoeff(), 0.0);
  Matrix out = Matrix::Zero(a.rows(), a.cols());
  for (int i = 0; i < es.eigenvalues.size(); ++i)
    if (es.eigenvalues[i] > floor) out += es.eigenvectors.col(i) * es.eigenvectors.col(i).adjoint();
  return out;
}

double support_leak(const Matrix& rho, const Matrix& sigma, const Tolerances& tol) {
  Matrix pi = support_projector(sigma, tol);
  Matrix off = Matrix::Identity(rho.rows(), rho.cols()) - pi;
  return std::max(0.0, (off * rho).trace().real());
}

Matrix project_psd(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((a + a.adjoint()) / 2.0);
  RealVector lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

RealVector project_l1_ball(const RealVector& v, double radius) {
  if (radius < 0) throw precondition_error("l1 ball radius must be nonnegative");
  if (v.cwiseAbs().sum() <= radius) return v;
  RealVector mags = v.cwiseAbs();
  std::sort(mags.data(), mags.data() + mags.size(), std::greater<double>());
  // largest theta with sum_i max(|v_i| - theta, 0) = radius
  double cum = 0.0, theta = 0.0;
  for (int k = 0; k < mags.size(); ++k) {
    cum += mags[k];
    double cand = (cum - radius) / (k + 1);
    if (k + 1 == mags.size() || cand >= mags[k + 1]) {
      theta = cand;
      break;
    }
  }
  RealVector out = v;
  for (int i = 0; i < out.size(); ++i) {
    double m = std::max(std::abs(out[i]) - theta, 0.0);
    out[i] = out[i] >= 0 ? m : -m;
  }
  return out;
}

Matrix project_trace_ball(const Matrix& a, double radius) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((a + a.adjoint()) / 2.0);
  RealVector lam = project_l1_ball(es.eigenvalues(), radius);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix frechet_apply(const SpectralDecomposition& a, const std::function<double(double)>& f,
                     const std::function<double(double)>& df, const Matrix& e) {
  int n = static_cast<int>(a.eigenvalues.size());
  Matrix em = a.eigenvectors.adjoint() * e * a.eigenvectors;
  double scale = std::max(a.eigenvalues.cwiseAbs().maxCoeff(), 1e-300);
  for (int i = 0; i < n; ++i) {
    double li = a.eigenvalues[i];
    for (int j = 0; j < n; ++j) {
      double lj = a.eigenvalues[j];
      double phi;
      if (std::abs(li - lj) <= 1e-10 * scale)
        phi = df(0.5 * (li + lj));
      else
        phi = (f(li) - f(lj)) / (li - lj);
      em(i, j) *= phi;
    }
  }
  Matrix out = a.eigenvectors * em * a.eigenvectors.adjoint();
  return (out + out.adjoint()) / 2.0;
}

} // namespace qsd
