#ifndef QSD_CONFIG_HPP
#define QSD_CONFIG_HPP

#include <string>
#include <vector>

namespace qsd {

/// Every numeric knob in the library, addressable by name from the CLI (--tol name=value).
/// Defaults are the contract values; tests pin them explicitly where a criterion depends on one.
struct Tolerances {
  double support_floor = 1e-10;    // eigenvalues below support_floor * max|eig| count as zero
  double hermiticity = 1e-10;      // allowed relative asymmetry before symmetrization
  double density_negativity = 1e-10; // eigenvalue clip window for density operators
  double trace_window = 1e-8;      // |tr - 1| allowed for normalized states
  double eig_residual = 1e-9;      // ||A - V diag(w) V^+||_F / ||A||_F
  double pinch_cluster = 1e-8;     // relative eigenvalue clustering for the pinching map
  double spec_cluster = 1e-8;      // relative eigenvalue clustering for spectrum counting
  double grad_stationarity = 1e-7; // Frobenius gradient norm target in smooth ascents
  double fw_gap = 1e-7;            // Frank-Wolfe duality gap target
  double admm_gap = 1e-7;          // certified gap target for trace-norm-ball oracles
  double golden_rel = 1e-10;       // relative x-tolerance of the golden-section search
  double alt_min_delta = 1e-7;     // successive-value stop for alternating minimization
  double setdiv_gap = 1e-4;        // primal/dual agreement target for set divergences (bits)
  double membership = 1e-7;        // slack for set membership checks
  double witness_membership = 1e-6; // slack allowed for solver witnesses
  double boundary_cluster = 1e-9;  // zero-eigenvalue window for test-operator randomization
  double dm_cap_bits = 60.0;       // measured-entropy ascent above this reports +infinity
  double dmax_log_bracket = 40.0;  // bisection bracket [2^-b, 2^b] for max-divergence
  double heuristic_restarts = 4;   // best-response restarts for non-certified solvers
  int max_iterations = 5000;       // generic iteration cap for first-order solvers
  int dim_cap = 4096;              // largest operator dimension accepted
  int twirl_max_copies = 6;        // permutation average is enumerated up to this many copies

  /// Set a knob by its field name above; returns false for unknown names.
  bool set(const std::string& name, double value);

  struct Entry {
    const char* name;
    double value;
    const char* what;
  };
  /// Snapshot of the full table, for --help and the README.
  std::vector<Entry> table() const;
};

/// Library-wide default instance. CLI overrides mutate a copy, never this object.
const Tolerances& default_tolerances();

} // namespace qsd

#endif
