#include "qbatt/hamiltonians.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "qbatt/rng.hpp"

namespace qbatt {

namespace {

constexpr Eigen::Index kMaxDim = Eigen::Index(1) << kMaxSites;

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

Matrix battery_single_site(const BatterySpec& spec) {
  if (spec.single_site) {
    const Matrix& hs = *spec.single_site;
    if (hs.rows() != hs.cols() || hs.rows() < 2)
      throw std::invalid_argument("BatterySpec: explicit cell Hamiltonian must be square, dim >= 2");
    if ((hs - hs.adjoint()).cwiseAbs().maxCoeff() >
        kHermitianTol * std::max(1.0, hs.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("BatterySpec: explicit cell Hamiltonian is not Hermitian");
    return hs;
  }
  Matrix hs(2, 2);
  hs << spec.field_strength, 0.0, 0.0, -spec.field_strength;
  return hs;
}

HermitianOperator build_battery(const BatterySpec& spec) {
  if (spec.num_sites < 1) throw std::invalid_argument("BatterySpec: num_sites must be >= 1");
  const Matrix hs = battery_single_site(spec);
  const Eigen::Index d = hs.rows();

  Eigen::Index dim = 1;
  for (int l = 0; l < spec.num_sites; ++l) {
    if (dim > kMaxDim / d)
      throw std::invalid_argument("build_battery: total dimension exceeds the limit 2^" +
                                  std::to_string(kMaxSites));
    dim *= d;
  }

  Matrix h = Matrix::Zero(dim, dim);
  for (int l = 0; l < spec.num_sites; ++l) {
    Matrix lifted = Matrix::Identity(1, 1);
    for (int s = 0; s < spec.num_sites; ++s)
      lifted = (s == l) ? kron(lifted, hs) : kron(lifted, Matrix::Identity(d, d));
    h += lifted;
  }
  return HermitianOperator(std::move(h));
}

PauliSum sy_random_sum(int num_sites, std::uint64_t seed, double coupling_std) {
  PauliSum p;
  p.num_sites = num_sites;
  GaussianStream stream(seed);
  // Draw order is fixed: i < j lexicographic, letter x, y, z innermost.
  for (int i = 0; i < num_sites; ++i) {
    for (int j = i + 1; j < num_sites; ++j) {
      for (Pauli letter : {Pauli::X, Pauli::Y, Pauli::Z}) {
        PauliTerm term;
        term.coefficient = coupling_std * stream.gaussian();
        term.letters[i] = letter;
        term.letters[j] = letter;
        p.terms.push_back(std::move(term));
      }
    }
  }
  return p;
}

PauliSum mixed_nn_global_sum(int num_sites, double amplitude) {
  PauliSum p;
  p.num_sites = num_sites;
  const double coeff = amplitude / (num_sites / 2 + 1);
  // 1-based odd pairing (1,2), (3,4), ...; 0-based below.
  for (int l = 0; l + 1 < num_sites; l += 2) {
    PauliTerm term;
    term.coefficient = coeff;
    term.letters[l] = Pauli::X;
    term.letters[l + 1] = Pauli::X;
    p.terms.push_back(std::move(term));
  }
  PauliTerm global;
  global.coefficient = coeff;
  for (int l = 0; l < num_sites; ++l) global.letters[l] = Pauli::X;
  p.terms.push_back(std::move(global));
  return p;
}

PauliSum single_qubit_parallel_sum(int num_sites, double amplitude) {
  PauliSum p;
  p.num_sites = num_sites;
  for (int l = 0; l < num_sites; ++l) {
    PauliTerm term;
    term.coefficient = amplitude;
    term.letters[l] = Pauli::X;
    p.terms.push_back(std::move(term));
  }
  return p;
}

BuiltDriving build_driving(const DrivingSpec& spec, int num_sites) {
  if (num_sites < 1) throw std::invalid_argument("build_driving: num_sites must be >= 1");

  PauliSum sum;
  if (const auto* sy = std::get_if<SYRandomDriving>(&spec.variant)) {
    sum = sy_random_sum(num_sites, sy->seed, sy->coupling_std);
  } else if (const auto* mixed = std::get_if<MixedNNGlobalDriving>(&spec.variant)) {
    sum = mixed_nn_global_sum(num_sites, mixed->amplitude);
  } else if (const auto* explicit_sum = std::get_if<ExplicitPauliSumDriving>(&spec.variant)) {
    if (explicit_sum->sum.num_sites != num_sites)
      throw std::invalid_argument("build_driving: explicit Pauli sum is defined on " +
                                  std::to_string(explicit_sum->sum.num_sites) +
                                  " sites, expected " + std::to_string(num_sites));
    sum = explicit_sum->sum;
  } else if (const auto* parallel = std::get_if<SingleQubitParallelDriving>(&spec.variant)) {
    sum = single_qubit_parallel_sum(num_sites, parallel->amplitude);
  } else {
    throw std::logic_error("build_driving: unhandled driving variant");
  }

  HermitianOperator op = to_dense(sum);
  BuiltDriving built;
  built.meta.k_locality = sum.k_locality();
  built.meta.raw_shifted_norm = shifted_norm(op);

  if (spec.normalization.mode == NormalizationMode::FixedShiftedNorm) {
    const double target = spec.normalization.target;
    if (!(target > 0.0))
      throw std::invalid_argument("build_driving: normalization target must be positive");
    if (!(built.meta.raw_shifted_norm > 0.0))
      throw std::invalid_argument(
          "build_driving: driving is proportional to the identity (zero spectral spread), "
          "cannot normalize");
    built.meta.c_applied = target / built.meta.raw_shifted_norm;
    for (auto& term : sum.terms) term.coefficient *= built.meta.c_applied;
    built.op = HermitianOperator(built.meta.c_applied * op.matrix());
  } else {
    built.meta.c_applied = 1.0;
    built.op = std::move(op);
  }
  built.meta.sum = std::move(sum);
  return built;
}

double delta_e(const SpectralData& h_spectral, const Matrix& v, double tol) {
  if (h_spectral.vectors.rows() != v.rows() || v.rows() != v.cols())
    throw std::invalid_argument("delta_e: dimension mismatch");
  const Matrix vt = h_spectral.vectors.adjoint() * v * h_spectral.vectors;
  const RealVector& e = h_spectral.values;
  double best = 0.0;
  for (Eigen::Index m = 0; m < vt.cols(); ++m)
    for (Eigen::Index j = 0; j < m; ++j)
      if (std::abs(vt(j, m)) > tol) {
        best = std::max(best, e(m) - e(j));
        break;  // rows are ascending: the first coupled j maximizes e(m) - e(j)
      }
  return best;
}

double delta_e(const HermitianOperator& H, const HermitianOperator& V,
               std::optional<double> tol) {
  if (H.dim() != V.dim()) throw std::invalid_argument("delta_e: dimension mismatch");
  const double threshold = tol ? *tol : 1e-12 * operator_norm(V);
  if (threshold < 0.0) throw std::invalid_argument("delta_e: tolerance must be >= 0");
  if (is_diagonal(H.matrix())) {
    // H's eigenbasis is the computational basis; no rotation needed.
    const RealVector d = H.matrix().diagonal().real();
    const Matrix& v = V.matrix();
    double best = 0.0;
    for (Eigen::Index m = 0; m < v.cols(); ++m)
      for (Eigen::Index j = 0; j < m; ++j)
        if (std::abs(v(j, m)) > threshold) best = std::max(best, std::abs(d(j) - d(m)));
    return best;
  }
  return delta_e(eigendecompose(H), V.matrix(), threshold);
}

std::map<int, PauliSum> k_local_parts(const PauliSum& p) {
  validate(p);
  std::map<int, PauliSum> parts;
  for (const auto& term : p.terms) {
    auto& part = parts[term.locality()];
    part.num_sites = p.num_sites;
    part.terms.push_back(term);
  }
  return parts;
}

}  // namespace qbatt
