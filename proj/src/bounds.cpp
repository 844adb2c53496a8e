#include "qbatt/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbatt {

namespace {

// Sign of h_j(e): +1/2 when floor((E_j - e) / delta_e) is odd, -1/2 when even.
double h_sign(double energy, double delta_e_value, double e) {
  const double n = std::floor((energy - e) / delta_e_value);
  const long long parity = std::llround(n);
  return (parity % 2 != 0) ? 0.5 : -0.5;
}

void check_chain(const BoundReport& r) {
  if (r.observed_commutator_norm > r.theorem1 + kBoundSlack)
    throw std::logic_error("bound chain violated: ||[H,V]|| = " +
                           std::to_string(r.observed_commutator_norm) + " > theorem1 = " +
                           std::to_string(r.theorem1));
  if (r.theorem1 > r.theorem1_unshifted + kBoundSlack)
    throw std::logic_error("bound chain violated: theorem1 > unshifted variant");
  if (r.theorem1_unshifted > r.general_bound + kBoundSlack)
    throw std::logic_error("bound chain violated: unshifted theorem1 > 2||H|| ||V||");
  if (r.observed_p_max && *r.observed_p_max > r.observed_commutator_norm + kBoundSlack)
    throw std::logic_error("bound chain violated: p_max = " +
                           std::to_string(*r.observed_p_max) + " > ||[H,V]|| = " +
                           std::to_string(r.observed_commutator_norm));
}

}  // namespace

BoundReport theorem1_bound(const HermitianOperator& H, const HermitianOperator& V,
                           std::optional<double> tol) {
  if (H.dim() != V.dim()) throw std::invalid_argument("theorem1_bound: dimension mismatch");
  const RealVector v_eigs = eigenvalues_of(V);
  const double v_norm = operator_norm(v_eigs);
  const double v_shifted = shifted_norm(v_eigs);
  const double threshold = tol ? *tol : 1e-12 * v_norm;

  BoundReport report;
  report.delta_e = delta_e(eigendecompose(H), V.matrix(), threshold);
  report.theorem1 = report.delta_e * v_shifted / 2.0;
  report.theorem1_unshifted = report.delta_e * v_norm;
  report.general_bound = 2.0 * operator_norm(H) * v_norm;
  if (report.delta_e == 0.0) {
    // V diagonal in H's eigenbasis: the commutator must vanish too.
    const double comm = commutator_norm(H, V);
    if (comm > kBoundSlack * std::max(1.0, report.general_bound))
      throw std::logic_error("theorem1_bound: delta_e = 0 but ||[H,V]|| = " +
                             std::to_string(comm));
  }
  return report;
}

double corollary_bound(int k, const Matrix& single_site, double v_shifted_norm) {
  if (k < 1) throw std::invalid_argument("corollary_bound: k must be >= 1");
  const HermitianOperator hs{single_site};
  return static_cast<double>(k) * shifted_norm(hs) * v_shifted_norm / 2.0;
}

double corollary_bound(int k, const Matrix& single_site, const HermitianOperator& V) {
  return corollary_bound(k, single_site, shifted_norm(V));
}

double decomposition_bound(const std::map<int, PauliSum>& parts, const Matrix& single_site) {
  const double hs_shifted = shifted_norm(HermitianOperator{single_site});
  double bound = 0.0;
  for (const auto& [k, part] : parts)
    bound += static_cast<double>(k) * shifted_norm(to_dense(part)) * hs_shifted / 2.0;
  return bound;
}

HofE build_h_of_e(const RealVector& energies, double delta_e_value, double e) {
  if (!(delta_e_value > 0.0))
    throw std::invalid_argument("build_h_of_e: delta_e must be positive");
  if (!(e > 0.0) || e > delta_e_value)
    throw std::invalid_argument("build_h_of_e: e must lie in (0, delta_e]");
  HofE h;
  h.e = e;
  h.diag_signs.resize(energies.size());
  for (Eigen::Index j = 0; j < energies.size(); ++j)
    h.diag_signs(j) = h_sign(energies(j), delta_e_value, e);
  return h;
}

HermitianOperator build_v_of_e(const SpectralData& h_spectral, const HermitianOperator& V,
                               double delta_e_value, double e) {
  if (h_spectral.vectors.rows() != V.dim())
    throw std::invalid_argument("build_v_of_e: dimension mismatch");
  const HofE h = build_h_of_e(h_spectral.values, delta_e_value, e);
  Matrix vt = h_spectral.vectors.adjoint() * V.matrix() * h_spectral.vectors;
  for (Eigen::Index m = 0; m < vt.cols(); ++m)
    for (Eigen::Index j = 0; j < vt.rows(); ++j)
      if (static_cast<double>(j - m) * (h.diag_signs(j) - h.diag_signs(m)) < 0.0)
        vt(j, m) = -vt(j, m);
  Matrix back = h_spectral.vectors * vt * h_spectral.vectors.adjoint();
  return HermitianOperator(0.5 * (back + back.adjoint()));
}

Matrix integral_commutator(const HermitianOperator& H, const HermitianOperator& V,
                           double delta_e_value) {
  if (H.dim() != V.dim())
    throw std::invalid_argument("integral_commutator: dimension mismatch");
  if (!(delta_e_value > 0.0))
    throw std::invalid_argument("integral_commutator: delta_e must be positive");

  const SpectralData hs = eigendecompose(H);
  const Matrix vt = hs.vectors.adjoint() * V.matrix() * hs.vectors;
  const Eigen::Index n = hs.values.size();

  // Breakpoints of the piecewise-constant integrand: the offsets
  // x_j = E_j - delta_e * floor(E_j / delta_e), plus the interval ends.
  std::vector<double> breaks{0.0, delta_e_value};
  breaks.reserve(n + 2);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double x = hs.values(j) - delta_e_value * std::floor(hs.values(j) / delta_e_value);
    if (x > 0.0 && x < delta_e_value) breaks.push_back(x);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  // [h(e), v(e)] in H's eigenbasis has entries (h_j - h_m) * (+-vt_jm); each
  // open subinterval is evaluated once at its midpoint, where no floor
  // discontinuity can sit.
  Matrix total = Matrix::Zero(n, n);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double width = breaks[i + 1] - breaks[i];
    if (width <= 0.0) continue;
    const double e_mid = breaks[i] + 0.5 * width;
    RealVector signs(n);
    for (Eigen::Index j = 0; j < n; ++j)
      signs(j) = h_sign(hs.values(j), delta_e_value, e_mid);
    for (Eigen::Index m = 0; m < n; ++m)
      for (Eigen::Index j = 0; j < n; ++j) {
        const double diff = signs(j) - signs(m);
        if (diff == 0.0) continue;
        const double flip =
            (static_cast<double>(j - m) * diff < 0.0) ? -1.0 : 1.0;
        total(j, m) += width * diff * flip * vt(j, m);
      }
  }
  return hs.vectors * total * hs.vectors.adjoint();
}

BoundReport full_report(const SpectralData& h_spectral, const HermitianOperator& H,
                        const HermitianOperator& V,
                        const std::optional<LatticeMetadata>& lattice,
                        std::optional<double> observed_p_max) {
  if (H.dim() != V.dim()) throw std::invalid_argument("full_report: dimension mismatch");
  const RealVector v_eigs = eigenvalues_of(V);
  const double v_norm = operator_norm(v_eigs);
  const double v_shifted = shifted_norm(v_eigs);

  BoundReport report;
  report.delta_e = is_diagonal(H.matrix())
                       ? delta_e(H, V, 1e-12 * v_norm)
                       : delta_e(h_spectral, V.matrix(), 1e-12 * v_norm);
  report.theorem1 = report.delta_e * v_shifted / 2.0;
  report.theorem1_unshifted = report.delta_e * v_norm;
  report.general_bound = 2.0 * operator_norm(h_spectral.values) * v_norm;
  report.observed_commutator_norm = commutator_norm(H, V);
  report.observed_p_max = observed_p_max;

  if (lattice) {
    report.corollary_klocal = corollary_bound(lattice->k_locality, lattice->single_site, v_shifted);
    if (lattice->driving_sum)
      report.decomposition_bound =
          decomposition_bound(k_local_parts(*lattice->driving_sum), lattice->single_site);
  }
  check_chain(report);
  return report;
}

BoundReport full_report(const HermitianOperator& H, const HermitianOperator& V,
                        const std::optional<LatticeMetadata>& lattice,
                        std::optional<double> observed_p_max) {
  return full_report(eigendecompose(H), H, V, lattice, observed_p_max);
}

}  // namespace qbatt
