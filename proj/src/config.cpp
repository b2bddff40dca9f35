#include "qsd/config.hpp"

#include <cmath>

namespace qsd {

namespace {

struct Field {
  const char* name;
  double Tolerances::*ptr;
  const char* what;
};

struct IntField {
  const char* name;
  int Tolerances::*ptr;
  const char* what;
};

const Field kFields[] = {
    {"support_floor", &Tolerances::support_floor, "relative eigenvalue floor defining numerical support"},
    {"hermiticity", &Tolerances::hermiticity, "allowed relative asymmetry before symmetrization"},
    {"density_negativity", &Tolerances::density_negativity, "negative-eigenvalue clip window for states"},
    {"trace_window", &Tolerances::trace_window, "|tr-1| window for normalized states"},
    {"eig_residual", &Tolerances::eig_residual, "relative reconstruction residual of eigensolves"},
    {"pinch_cluster", &Tolerances::pinch_cluster, "relative eigenvalue clustering for pinching"},
    {"spec_cluster", &Tolerances::spec_cluster, "relative eigenvalue clustering for spectrum counts"},
    {"grad_stationarity", &Tolerances::grad_stationarity, "gradient-norm target of smooth ascents"},
    {"fw_gap", &Tolerances::fw_gap, "Frank-Wolfe gap target"},
    {"admm_gap", &Tolerances::admm_gap, "certified gap target for trace-norm-ball oracles"},
    {"golden_rel", &Tolerances::golden_rel, "relative x-tolerance of golden-section searches"},
    {"alt_min_delta", &Tolerances::alt_min_delta, "successive-value stop of alternating minimization"},
    {"setdiv_gap", &Tolerances::setdiv_gap, "primal/dual agreement target for set divergences"},
    {"membership", &Tolerances::membership, "slack for set membership checks"},
    {"witness_membership", &Tolerances::witness_membership, "slack allowed for solver witnesses"},
    {"boundary_cluster", &Tolerances::boundary_cluster, "zero-eigenvalue window for test randomization"},
    {"dm_cap_bits", &Tolerances::dm_cap_bits, "divergence cap of the measured-entropy ascent"},
    {"dmax_log_bracket", &Tolerances::dmax_log_bracket, "log2 half-width of the max-divergence bracket"},
    {"heuristic_restarts", &Tolerances::heuristic_restarts, "restarts for best-response solvers"},
};

const IntField kIntFields[] = {
    {"max_iterations", &Tolerances::max_iterations, "iteration cap for first-order solvers"},
    {"dim_cap", &Tolerances::dim_cap, "largest accepted operator dimension"},
    {"twirl_max_copies", &Tolerances::twirl_max_copies, "copy cap for the permutation average"},
};

} // namespace

bool Tolerances::set(const std::string& name, double value) {
  for (const auto& f : kFields) {
    if (name == f.name) {
      this->*f.ptr = value;
      return true;
    }
  }
  for (const auto& f : kIntFields) {
    if (name == f.name) {
      this->*f.ptr = static_cast<int>(std::lround(value));
      return true;
    }
  }
  return false;
}

std::vector<Tolerances::Entry> Tolerances::table() const {
  std::vector<Entry> out;
  for (const auto& f : kFields) out.push_back({f.name, this->*f.ptr, f.what});
  for (const auto& f : kIntFields) out.push_back({f.name, static_cast<double>(this->*f.ptr), f.what});
  return out;
}

const Tolerances& default_tolerances() {
  static const Tolerances t;
  return t;
}

} // namespace qsd
