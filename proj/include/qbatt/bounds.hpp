#pragma once

#include <map>
#include <optional>

#include "qbatt/hamiltonians.hpp"

namespace qbatt {

// Diagonal operator h(e) in H's eigenbasis: every entry is exactly +1/2 or
// -1/2, the sign given by the parity of floor((E_j - e) / delta_e).
struct HofE {
  double e = 0.0;
  RealVector diag_signs;  // aligned to ascending eigenvalues of H
};

struct BoundReport {
  double general_bound = 0.0;       // 2 ||H|| ||V||
  double delta_e = 0.0;
  double theorem1 = 0.0;            // delta_e * ||V - v_min|| / 2
  double theorem1_unshifted = 0.0;  // delta_e * ||V||
  std::optional<double> corollary_klocal;     // k ||H_s - E_s_min|| ||V - v_min|| / 2
  std::optional<double> decomposition_bound;  // sum_k k ||V_k - v_k_min|| ||H_s - E_s_min|| / 2
  double observed_commutator_norm = 0.0;
  std::optional<double> observed_p_max;
};

// Cell-level context needed for the lattice corollaries.
struct LatticeMetadata {
  int k_locality = 1;
  Matrix single_site;
  std::optional<PauliSum> driving_sum;
};

// Fills delta_e, theorem1, theorem1_unshifted and general_bound. When
// delta_e = 0 the commutator is checked to vanish.
BoundReport theorem1_bound(const HermitianOperator& H, const HermitianOperator& V,
                           std::optional<double> tol = std::nullopt);

double corollary_bound(int k, const Matrix& single_site, const HermitianOperator& V);
double corollary_bound(int k, const Matrix& single_site, double v_shifted_norm);

double decomposition_bound(const std::map<int, PauliSum>& parts, const Matrix& single_site);

// Requires 0 < e <= delta_e_value and delta_e_value > 0.
HofE build_h_of_e(const RealVector& energies, double delta_e_value, double e);

// Sign-flipped driving v(e): in H's eigenbasis the (j,m) entry of V is
// negated iff (j - m)(h_j(e) - h_m(e)) < 0. Same spectrum as V.
HermitianOperator build_v_of_e(const SpectralData& h_spectral, const HermitianOperator& V,
                               double delta_e_value, double e);

// Exact evaluation of the integral of [h(e), v(e)] over (0, delta_e_value]:
// the integrand is constant between consecutive breakpoints x_j, so each
// subinterval is evaluated once at its midpoint. Equals [H, V].
Matrix integral_commutator(const HermitianOperator& H, const HermitianOperator& V,
                           double delta_e_value);

// Populates every field available given the metadata and asserts the chain
// observed_commutator_norm <= theorem1 <= theorem1_unshifted <= general_bound
// (and observed_p_max <= observed_commutator_norm when provided).
BoundReport full_report(const HermitianOperator& H, const HermitianOperator& V,
                        const std::optional<LatticeMetadata>& lattice = std::nullopt,
                        std::optional<double> observed_p_max = std::nullopt);

// Same, reusing a precomputed eigendecomposition of H.
BoundReport full_report(const SpectralData& h_spectral, const HermitianOperator& H,
                        const HermitianOperator& V,
                        const std::optional<LatticeMetadata>& lattice,
                        std::optional<double> observed_p_max);

}  // namespace qbatt
