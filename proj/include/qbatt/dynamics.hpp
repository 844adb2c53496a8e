#pragma once

#include <optional>

#include "qbatt/operator_core.hpp"

namespace qbatt {

struct QuenchResult {
  RealVector times;
  RealVector energy;   // E(t) = tr(H rho_t)
  RealVector power;    // P(t) = tr(rho_t i[V,H])
  double p_max = 0.0;  // max |P(t)|, refined off-grid
  double t_at_max = 0.0;
  double p_at_max = 0.0;  // signed P at the maximum, for diagnostics
  double e_at_max = 0.0;
};

struct AdvantageReport {
  double p_quantum_max = 0.0;
  double p_parallel_max = 0.0;
  double gamma = 0.0;  // p_quantum_max / p_parallel_max
  int k_locality = 0;
  bool c0_satisfied = false;  // quantum potential <= parallel potential
};

struct ScanParams {
  // Grid end time; default is min(2*pi / gap_min(V), 20 / shifted_norm(V)).
  std::optional<double> t_max;
  int n_steps = 2000;  // grid points, endpoints included
};

// Normalized eigenvector of the smallest eigenvalue; on degeneracy the first
// column in the stable ascending order.
Vector ground_state(const HermitianOperator& H);
Vector ground_state(const SpectralData& h_spectral);

// rho_t = exp(-iVt) rho_0 exp(+iVt) by spectral conjugation (exact in t).
Matrix evolve(const Matrix& rho0, const HermitianOperator& V, double t);
Matrix evolve(const Matrix& rho0, const SpectralData& v_spectral, double t);
Vector evolve_state(const Vector& psi0, const SpectralData& v_spectral, double t);

// tr(rho i[V,H]) = dE/dt; the imaginary residue is checked against 1e-10.
double instantaneous_power(const HermitianOperator& H, const HermitianOperator& V,
                           const Matrix& rho);

// Uniform grid scan of E(t) and P(t) followed by golden-section refinement
// of max |P| in the bracket around the grid argmax (1e-10 tolerance in t).
QuenchResult quench_scan(const HermitianOperator& H, const HermitianOperator& V,
                         const Vector& psi0, const ScanParams& params = {});
QuenchResult quench_scan(const HermitianOperator& H, const HermitianOperator& V,
                         const Matrix& rho0, const ScanParams& params = {});
QuenchResult quench_scan(const Matrix& h_matrix, const SpectralData& v_spectral,
                         const Matrix& rho0, const ScanParams& params = {});
QuenchResult quench_scan(const Matrix& h_matrix, const SpectralData& v_spectral,
                         const Vector& psi0, const ScanParams& params = {});

// Optimal product-state charging of L independent cells with cell Hamiltonian
// h*sigma_z and per-cell potential W/L: total max power h*W.
double parallel_baseline(int num_sites, double field_strength, double total_potential);

AdvantageReport advantage_ratio(double p_quantum, int num_sites, double field_strength,
                                double w_quantum, double w_parallel, int k_locality);

}  // namespace qbatt
