#include "qsd/stein.hpp"

#include <cmath>
#include <limits>

#include "qsd/error.hpp"

namespace qsd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEnvelopeSlack = 1e-4;

// certified side of a bracketing solver result: never above the true value
double certified_lower(const SetDivergenceResult& r) {
  if (r.infinite) return kInf;
  return std::min(r.value, r.dual_value);
}

}  // namespace

std::vector<SteinRow> stein_table(const SetFamily& afam, const SetFamily& bfam, double eps,
                                  int n_max, const Tolerances& tol) {
  if (!(eps > 0.0 && eps < 1.0)) throw precondition_error("epsilon must lie in (0,1)");
  if (n_max < 1) throw precondition_error("n_max must be at least 1");
  const int d = afam.base().dim;
  if (d != bfam.base().dim)
    throw precondition_error("families must share the local dimension");
  if (std::pow(static_cast<double>(d), n_max) > tol.dim_cap)
    throw resource_limit_error("stein table block dimension exceeds the cap");

  std::vector<SteinRow> rows;
  rows.reserve(n_max);
  for (int n = 1; n <= n_max; ++n) {
    StateSet an = afam.level(n);
    StateSet bn = bfam.level(n);

    SetDivergenceResult dh = dhypo_sets(eps, an, bn, tol);

    // one-shot sandwich at alpha = 1 -/+ 1/sqrt(n); the floor coefficient
    // alpha/(alpha-1) vanishes at n = 1 where alpha drops to order zero
    const double rn = 1.0 / std::sqrt(static_cast<double>(n));
    const double alo = 1.0 - rn;
    const double ahi = 1.0 + rn;
    SetDivergenceResult pz = petz_sets(alo, an, bn, tol);
    SetDivergenceResult sw = sandwiched_sets(ahi, an, bn, tol);

    SteinRow row;
    row.n = n;
    row.dh_per_n = dh.infinite ? kInf : dh.value / n;
    row.floor = certified_lower(pz);
    if (std::isfinite(row.floor))
      row.floor = (row.floor + (alo / (alo - 1.0)) * std::log2(1.0 / eps)) / n;
    row.ceiling = sw.infinite
                      ? kInf
                      : (sw.value + (ahi / (ahi - 1.0)) * std::log2(1.0 / (1.0 - eps))) / n;

    if (row.dh_per_n < row.floor - kEnvelopeSlack)
      throw convergence_error("stein row fell below its one-shot floor",
                              row.floor - row.dh_per_n);
    if (row.dh_per_n > row.ceiling + kEnvelopeSlack)
      throw convergence_error("stein row escaped its one-shot ceiling",
                              row.dh_per_n - row.ceiling);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qsd
