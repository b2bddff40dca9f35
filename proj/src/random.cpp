#include "qsd/random.hpp"

#include <cmath>

namespace qsd {

Matrix ginibre(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = Complex(g(rng), g(rng)) / std::sqrt(2.0);
  return m;
}

Matrix haar_unitary(int d, Rng& rng) {
  Matrix g = ginibre(d, d, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // fix phases so the distribution is Haar, not QR-convention biased
  for (int j = 0; j < d; ++j) {
    Complex rjj = r(j, j);
    double a = std::abs(rjj);
    q.col(j) *= (a > 0) ? rjj / a : Complex(1, 0);
  }
  return q;
}

Matrix random_density(int d, Rng& rng) {
  Matrix g = ginibre(d, d, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return (rho + rho.adjoint()) / 2.0;
}

Matrix random_hermitian(int d, Rng& rng) {
  Matrix g = ginibre(d, d, rng);
  return (g + g.adjoint()) / (2.0 * std::sqrt(static_cast<double>(d)));
}

Matrix random_pure(int d, Rng& rng) {
  Matrix g = ginibre(d, 1, rng);
  Vector v = g.col(0);
  v.normalize();
  return v * v.adjoint();
}

RealVector random_simplex(int k, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  RealVector w(k);
  double s = 0;
  for (int i = 0; i < k; ++i) {
    w[i] = e(rng);
    s += w[i];
  }
  return w / s;
}

} // namespace qsd
