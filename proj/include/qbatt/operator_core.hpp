#pragma once

#include "qbatt/pauli.hpp"
#include "qbatt/types.hpp"

namespace qbatt {

// Dense Hermitian matrix with the invariant enforced at construction:
// input within kHermitianTol * max|entry| of Hermitian is symmetrized to
// (m + m†)/2, anything further off is rejected.
class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(Matrix m);

  const Matrix& matrix() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }

 private:
  Matrix mat_;
};

// Ascending eigenvalues with matching orthonormal eigenvector columns.
// Ties keep the solver's order, which is stable across repeated calls on
// identical input.
struct SpectralData {
  RealVector values;
  Matrix vectors;
};

// Dense matrix of a Pauli sum; site 0 is the leftmost tensor factor.
HermitianOperator to_dense(const PauliSum& p);

// True when every off-diagonal entry is below 1e-14 * max|entry|. Diagonal
// operands unlock exact O(dim^2) paths for commutators and basis changes.
bool is_diagonal(const Matrix& m);

SpectralData eigendecompose(const HermitianOperator& a);

// Ascending eigenvalues without the (more expensive) eigenvectors.
RealVector eigenvalues_of(const HermitianOperator& a);

double operator_norm(const HermitianOperator& a);
double operator_norm(const RealVector& eigenvalues);

// Spectral spread lambda_max - lambda_min, i.e. ||a - a_min|| and twice the
// distance from a to the nearest multiple of the identity.
double shifted_norm(const HermitianOperator& a);
double shifted_norm(const RealVector& eigenvalues);

// ab - ba. Anti-Hermitian up to floating-point noise.
Matrix commutator(const HermitianOperator& a, const HermitianOperator& b);

// ||i[a,b]||, the operator norm of the (Hermitian) scaled commutator.
double commutator_norm(const HermitianOperator& a, const HermitianOperator& b);

}  // namespace qbatt
