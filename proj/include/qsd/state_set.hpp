#ifndef QSD_STATE_SET_HPP
#define QSD_STATE_SET_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qsd/config.hpp"
#include "qsd/hermitian.hpp"
#include "qsd/random.hpp"

namespace qsd {

/// Structured families of quantum states over which linear functionals can be
/// optimized in closed form or by a certified iterative oracle.
enum class SetKind {
  singleton,      // one fixed density operator
  hull,           // convex hull of finitely many density operators
  conditional,    // scaled identity on marked factors, arbitrary state elsewhere
  channel_image,  // image of the density set under a fixed channel
  incoherent,     // diagonal density operators in the computational basis
  rains,          // PSD operators with partial-transpose trace norm at most one
  mana,           // PSD operators with phase-space l1 norm at most one
  tensor_power,   // descriptor-only tag; expanded on construction
};

const char* to_string(SetKind kind);

/// Description of one admissible set of operators on a fixed tensor product
/// space.  Construct through the factory functions, which validate payloads.
struct StateSet {
  SetKind kind = SetKind::singleton;
  int dim = 0;
  std::vector<int> factor_dims;

  // singleton (one entry) and hull (several) store their generators.
  std::vector<HermitianOperator> generators;
  // conditional: factors carrying the scaled identity, and the scale.
  std::vector<int> identity_positions;
  double identity_weight = 1.0;
  // channel image: Kraus operators mapping input_dim to dim.
  std::vector<Matrix> kraus;
  int input_dim = 0;
  // rains: factors the partial transpose acts on.
  std::vector<int> transpose_positions;

  static StateSet singleton(const DensityOperator& rho);
  static StateSet hull(const std::vector<DensityOperator>& gens);
  /// Members are identity_weight * I on the marked factors tensored with an
  /// arbitrary joint density operator on the remaining ones.
  static StateSet conditional(const std::vector<int>& dims, const std::vector<int>& id_positions,
                              double identity_weight);
  static StateSet channel_image(const std::vector<Matrix>& kraus, int input_dim,
                                const std::vector<int>& output_dims = {});
  static StateSet incoherent(int dim);
  static StateSet incoherent(const std::vector<int>& dims);
  /// Bipartite (or multipartite) operators that stay trace-norm bounded under
  /// partial transposition of the marked factors.
  static StateSet rains(const std::vector<int>& dims, const std::vector<int>& transpose_positions);
  /// Odd-prime dimension d; members have discrete Wigner l1 norm at most one.
  static StateSet mana(int d);
};

/// Value of a support-function query together with the operator achieving it.
struct SupportValue {
  double value = 0.0;
  HermitianOperator witness;
  bool exact = true;    // closed form; false when an iterative oracle produced it
  double gap = 0.0;     // certified distance to optimality for iterative kinds
  int iterations = 0;
};

/// max over members rho of tr[x rho].
SupportValue max_linear(const StateSet& set, const HermitianOperator& x,
                        const Tolerances& tol = default_tolerances());

/// min over members rho of tr[x rho].
SupportValue min_linear(const StateSet& set, const HermitianOperator& x,
                        const Tolerances& tol = default_tolerances());

/// True when w lies in the polar of the set: max_linear(set, w) <= 1 + slack.
bool polar_contains(const StateSet& set, const HermitianOperator& w, double slack,
                    const Tolerances& tol = default_tolerances());

/// Membership test with a relative residual threshold of slack.
bool contains(const StateSet& set, const HermitianOperator& x, double slack,
              const Tolerances& tol = default_tolerances());

/// Tensor composition of two sets of the same kind (singleton may combine
/// with hull).  Throws composition_error for unsupported combinations.
StateSet tensor(const StateSet& a, const StateSet& b);

/// Draw a member (used by the assumption validator and tests).
HermitianOperator sample_member(const StateSet& set, Rng& rng,
                                const Tolerances& tol = default_tolerances());

/// Extreme points when finitely many are available, otherwise nullopt.
std::optional<std::vector<HermitianOperator>> enumerate_generators(const StateSet& set);

/// Level-indexed family n -> S_n generated from a level-one set by tensor
/// composition (hull bases enumerate all n-fold products of generators).
class SetFamily {
 public:
  explicit SetFamily(StateSet base);
  SetFamily(StateSet base, std::function<StateSet(int)> custom_level);

  const StateSet& base() const { return base_; }
  StateSet level(int n) const;

 private:
  StateSet base_;
  std::function<StateSet(int)> custom_;
};

/// Checks the structural assumptions the convergence theory needs:
/// permutation invariance of each level, membership of tensor products of
/// sampled members, and submultiplicativity of the support function.
struct AssumptionReport {
  bool permutation_ok = true;
  bool tensor_ok = true;
  bool submultiplicative_ok = true;
  std::vector<std::string> violations;
  bool all_ok() const { return permutation_ok && tensor_ok && submultiplicative_ok; }
};

AssumptionReport validate_assumptions(const SetFamily& family, int m, int k, int samples,
                                      unsigned seed, const Tolerances& tol = default_tolerances());

/// Phase-point operators A_u for odd prime d (d^2 of them, tr[A_u A_v] = d delta_uv).
std::vector<Matrix> phase_point_operators(int d);

/// Wigner coordinates w_u = tr[A_u x] / D for a full product phase-point basis.
RealVector wigner_coordinates(const Matrix& x, const std::vector<Matrix>& basis);

}  // namespace qsd

#endif
