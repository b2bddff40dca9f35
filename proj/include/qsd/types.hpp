#ifndef QSD_TYPES_HPP
#define QSD_TYPES_HPP

#include <Eigen/Dense>
#include <complex>

namespace qsd {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kLn2 = 0.6931471805599453094172321214581766;

/// Base-2 logarithm used for all reported divergence values.
inline double log2_(double x) { return std::log2(x); }

} // namespace qsd

#endif
