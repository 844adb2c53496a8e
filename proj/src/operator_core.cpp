#include "qbatt/operator_core.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbatt {

bool is_diagonal(const Matrix& m) {
  if (m.rows() == 0) return true;
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (r != c && std::abs(m(r, c)) > 1e-14 * scale) return false;
  return true;
}

namespace {

RealVector eigenvalues_of_matrix(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigenvalue computation did not converge (dim " +
                             std::to_string(m.rows()) + ")");
  return solver.eigenvalues();
}

}  // namespace

HermitianOperator::HermitianOperator(Matrix m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("HermitianOperator: matrix must be square");
  if (m.size() > 0) {
    const double scale = m.cwiseAbs().maxCoeff();
    const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (asym > kHermitianTol * scale)
      throw std::invalid_argument("HermitianOperator: asymmetry " + std::to_string(asym) +
                                  " exceeds tolerance " + std::to_string(kHermitianTol * scale));
    mat_ = 0.5 * (m + m.adjoint());
  } else {
    mat_ = std::move(m);
  }
}

HermitianOperator to_dense(const PauliSum& p) {
  validate(p);
  const Eigen::Index dim = Eigen::Index(1) << p.num_sites;
  Matrix m = Matrix::Zero(dim, dim);
  for (const auto& term : p.terms) {
    // Row index of the image of basis column b: flip every X/Y site.
    Eigen::Index flip_mask = 0;
    for (const auto& [site, letter] : term.letters)
      if (letter != Pauli::Z) flip_mask |= Eigen::Index(1) << (p.num_sites - 1 - site);
    for (Eigen::Index b = 0; b < dim; ++b) {
      Complex amp(term.coefficient, 0.0);
      for (const auto& [site, letter] : term.letters) {
        const bool bit = (b >> (p.num_sites - 1 - site)) & 1;
        switch (letter) {
          case Pauli::X: break;
          case Pauli::Y: amp *= bit ? Complex(0, -1) : Complex(0, 1); break;
          case Pauli::Z: amp *= bit ? -1.0 : 1.0; break;
        }
      }
      m(b ^ flip_mask, b) += amp;
    }
  }
  return HermitianOperator(std::move(m));
}

SpectralData eigendecompose(const HermitianOperator& a) {
  const Matrix& m = a.matrix();
  if (is_diagonal(m)) {
    // Exact decomposition: stable ascending sort of the diagonal, unit
    // eigenvectors. Keeps battery Hamiltonians cheap and tie order defined.
    const Eigen::Index n = m.rows();
    std::vector<Eigen::Index> order(n);
    for (Eigen::Index i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
      return m(i, i).real() < m(j, j).real();
    });
    SpectralData s;
    s.values.resize(n);
    s.vectors = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      s.values(i) = m(order[i], order[i]).real();
      s.vectors(order[i], i) = 1.0;
    }
    return s;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigendecompose: solver did not converge (dim " +
                             std::to_string(m.rows()) + ")");
  return SpectralData{solver.eigenvalues(), solver.eigenvectors()};
}

RealVector eigenvalues_of(const HermitianOperator& a) {
  const Matrix& m = a.matrix();
  if (is_diagonal(m)) {
    RealVector values = m.diagonal().real();
    std::sort(values.begin(), values.end());
    return values;
  }
  return eigenvalues_of_matrix(m);
}

double operator_norm(const RealVector& eigenvalues) {
  return eigenvalues.size() == 0 ? 0.0 : eigenvalues.cwiseAbs().maxCoeff();
}

double operator_norm(const HermitianOperator& a) {
  return operator_norm(eigenvalues_of(a));
}

double shifted_norm(const RealVector& eigenvalues) {
  if (eigenvalues.size() == 0) return 0.0;
  return eigenvalues.maxCoeff() - eigenvalues.minCoeff();
}

double shifted_norm(const HermitianOperator& a) {
  return shifted_norm(eigenvalues_of(a));
}

Matrix commutator(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("commutator: dimension mismatch (" + std::to_string(a.dim()) +
                                " vs " + std::to_string(b.dim()) + ")");
  const Matrix& ma = a.matrix();
  const Matrix& mb = b.matrix();
  if (is_diagonal(ma)) {
    // [diag(d), B]_rc = (d_r - d_c) B_rc
    const RealVector d = ma.diagonal().real();
    Matrix c = mb;
    for (Eigen::Index col = 0; col < c.cols(); ++col)
      for (Eigen::Index row = 0; row < c.rows(); ++row) c(row, col) *= d(row) - d(col);
    return c;
  }
  if (is_diagonal(mb)) {
    const RealVector d = mb.diagonal().real();
    Matrix c = ma;
    for (Eigen::Index col = 0; col < c.cols(); ++col)
      for (Eigen::Index row = 0; row < c.rows(); ++row) c(row, col) *= d(col) - d(row);
    return c;
  }
  return ma * mb - mb * ma;
}

double commutator_norm(const HermitianOperator& a, const HermitianOperator& b) {
  const Matrix c = commutator(a, b);
  const Matrix herm = Complex(0, 0.5) * (c - c.adjoint());  // i*[a,b], symmetrized
  return operator_norm(eigenvalues_of_matrix(herm));
}

}  // namespace qbatt
