#ifndef QSD_HERMITIAN_HPP
#define QSD_HERMITIAN_HPP

#include <functional>
#include <vector>

#include "qsd/config.hpp"
#include "qsd/error.hpp"
#include "qsd/types.hpp"

namespace qsd {

/// Hermitian operator on a tensor-product space.
///
/// factor_dims records the left-to-right tensor structure used by the partial
/// operations; its product always equals the matrix dimension. Construction
/// symmetrizes the entries, so the Hermiticity invariant holds by build.
struct HermitianOperator {
  Matrix entries;
  std::vector<int> factor_dims;

  HermitianOperator() = default;
  explicit HermitianOperator(Matrix m, std::vector<int> factors = {},
                             const Tolerances& tol = default_tolerances());

  int dim() const { return static_cast<int>(entries.rows()); }
  double trace() const { return entries.trace().real(); }

  static HermitianOperator identity(int d);
};

enum class TraceMode { normalized, subnormalized };

/// Positive semidefinite operator with trace 1 (normalized) or <= 1 (subnormalized).
/// Eigenvalues in [-density_negativity * scale, 0) are clipped to zero at construction;
/// anything more negative is a precondition violation.
struct DensityOperator {
  HermitianOperator base;
  TraceMode trace_mode = TraceMode::normalized;

  DensityOperator() = default;
  explicit DensityOperator(HermitianOperator op, TraceMode mode = TraceMode::normalized,
                           const Tolerances& tol = default_tolerances());
  DensityOperator(Matrix m, TraceMode mode = TraceMode::normalized,
                  const Tolerances& tol = default_tolerances());

  const Matrix& matrix() const { return base.entries; }
  int dim() const { return base.dim(); }
  double trace() const { return base.trace(); }
};

/// Eigenvalues ascending, eigenvectors as matching unitary columns.
struct SpectralDecomposition {
  RealVector eigenvalues;
  Matrix eigenvectors;
};

/// Self-adjoint eigendecomposition with a reconstruction-residual guard.
SpectralDecomposition eig(const Matrix& a, const Tolerances& tol = default_tolerances());
SpectralDecomposition eig(const HermitianOperator& a, const Tolerances& tol = default_tolerances());

struct MatrixFn {
  enum Kind { log2, ln, power, positive_part } kind;
  double exponent = 1.0;

  static MatrixFn Log2() { return {log2, 0.0}; }
  static MatrixFn Ln() { return {ln, 0.0}; }
  static MatrixFn Power(double p) { return {power, p}; }
  static MatrixFn PositivePart() { return {positive_part, 0.0}; }
};

/// Spectral application of fn. Eigenvalues at or below clip * max|eig| count as zero.
/// Functions singular at zero (logs, negative powers) map the kernel to zero when
/// on_support is set and throw precondition_error otherwise.
Matrix matrix_fn(const Matrix& a, const MatrixFn& fn, double clip = -1.0,
                 bool on_support = true, const Tolerances& tol = default_tolerances());
HermitianOperator matrix_fn(const HermitianOperator& a, const MatrixFn& fn, double clip = -1.0,
                            bool on_support = true, const Tolerances& tol = default_tolerances());

/// Kronecker product; concatenates factor structure and enforces the dimension cap.
HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b,
                       const Tolerances& tol = default_tolerances());
Matrix kron(const Matrix& a, const Matrix& b);

/// n-fold Kronecker power.
HermitianOperator kron_power(const HermitianOperator& a, int n,
                             const Tolerances& tol = default_tolerances());
Matrix kron_power(const Matrix& a, int n);

/// Trace out every factor not listed in keep (indices into factor_dims, ascending).
HermitianOperator partial_trace(const HermitianOperator& a, const std::vector<int>& keep);
Matrix partial_trace(const Matrix& a, const std::vector<int>& dims, const std::vector<int>& keep);

/// Transpose the listed factors in place.
HermitianOperator partial_transpose(const HermitianOperator& a, const std::vector<int>& subsystems);
Matrix partial_transpose(const Matrix& a, const std::vector<int>& dims,
                         const std::vector<int>& subsystems);

/// Reorder tensor factors: output slot t carries input factor perm[t].
Matrix permute_factors(const Matrix& a, const std::vector<int>& dims, const std::vector<int>& perm);

/// Pinching map of a with respect to the eigenspaces of b (eigenvalues clustered
/// at relative width cluster_tol, default pinch_cluster).
HermitianOperator pinch(const HermitianOperator& a, const HermitianOperator& b,
                        double cluster_tol = -1.0, const Tolerances& tol = default_tolerances());

/// Average over all permutations of n equal factors of local dimension d.
HermitianOperator twirl(const HermitianOperator& a, int n, int d,
                        const Tolerances& tol = default_tolerances());

/// Number of distinct eigenvalues at relative clustering width cluster_tol.
int spec_count(const HermitianOperator& a, double cluster_tol = -1.0,
               const Tolerances& tol = default_tolerances());

struct DistancePack {
  double fidelity;        // generalized fidelity, includes the subnormalization term
  double purified;        // sqrt(1 - F^2)
  double trace_distance;  // (1/2) ||rho - sigma||_1
};

DistancePack fidelity_and_distances(const DensityOperator& rho, const DensityOperator& sigma,
                                    const Tolerances& tol = default_tolerances());

/// Trace norm of a Hermitian matrix (sum of |eigenvalues|).
double trace_norm_herm(const Matrix& a);

/// Nearest positive semidefinite matrix in Frobenius norm (eigenvalue clip).
Matrix project_psd(const Matrix& a);

/// Nearest Hermitian matrix with trace norm at most radius (eigenvalue
/// soft-threshold onto the l1 ball).
Matrix project_trace_ball(const Matrix& a, double radius);

/// Euclidean projection of v onto the l1 ball of the given radius.
RealVector project_l1_ball(const RealVector& v, double radius);

/// Projector onto the eigenspaces above the relative support floor.
Matrix support_projector(const Matrix& a, const Tolerances& tol = default_tolerances());

/// Weight of rho outside the support of sigma, tr[(I - Pi_sigma) rho].
double support_leak(const Matrix& rho, const Matrix& sigma,
                    const Tolerances& tol = default_tolerances());

/// Directional (Frechet) derivative of the spectral function f at a, applied to e:
/// divided differences of f on the eigenbasis of a. f and df are scalar callbacks.
Matrix frechet_apply(const SpectralDecomposition& a, const std::function<double(double)>& f,
                     const std::function<double(double)>& df, const Matrix& e);

} // namespace qsd

#endif
