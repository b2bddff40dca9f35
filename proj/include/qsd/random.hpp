#ifndef QSD_RANDOM_HPP
#define QSD_RANDOM_HPP

#include <random>

#include "qsd/types.hpp"

namespace qsd {

using Rng = std::mt19937_64;

/// Matrix with i.i.d. standard complex Gaussian entries.
Matrix ginibre(int rows, int cols, Rng& rng);

/// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
Matrix haar_unitary(int d, Rng& rng);

/// Full-rank random density matrix, Hilbert-Schmidt flavor (G G^+ normalized).
Matrix random_density(int d, Rng& rng);

/// Random Hermitian matrix with O(1) spectral radius.
Matrix random_hermitian(int d, Rng& rng);

/// Haar-random pure state projector.
Matrix random_pure(int d, Rng& rng);

/// Dirichlet(1,...,1) weights, for sampling hull mixtures.
RealVector random_simplex(int k, Rng& rng);

} // namespace qsd

#endif
