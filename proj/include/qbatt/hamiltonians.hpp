#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <variant>

#include "qbatt/operator_core.hpp"

namespace qbatt {

// Battery of num_sites identical non-interacting cells. The default cell
// Hamiltonian is field_strength * sigma_z; an explicit cell matrix may be
// given instead (any dimension >= 2).
struct BatterySpec {
  int num_sites = 1;
  double field_strength = 1.0;
  std::optional<Matrix> single_site;
};

// The cell Hamiltonian a BatterySpec resolves to (explicit matrix or h*sigma_z).
Matrix battery_single_site(const BatterySpec& spec);

// Sum over cells of the lifted single-site Hamiltonian.
HermitianOperator build_battery(const BatterySpec& spec);

// Random all-to-all 2-local driving: sum over i<j and alpha in {x,y,z} of
// J_ij^alpha sigma_i^alpha sigma_j^alpha with J i.i.d. normal(0, coupling_std).
struct SYRandomDriving {
  std::uint64_t seed = 0;
  double coupling_std = 1.0;
};

// amplitude/(floor(L/2)+1) * (sum over odd l of x_l x_{l+1} + global x string),
// with 1-based odd pairing (1,2), (3,4), ...; for odd L the last site joins
// only the global term.
struct MixedNNGlobalDriving {
  double amplitude = 1.0;
};

struct ExplicitPauliSumDriving {
  PauliSum sum;
};

// Independent per-cell transverse driving: sum over sites of amplitude * x_l.
struct SingleQubitParallelDriving {
  double amplitude = 1.0;
};

using DrivingVariant = std::variant<SYRandomDriving, MixedNNGlobalDriving,
                                    ExplicitPauliSumDriving, SingleQubitParallelDriving>;

enum class NormalizationMode { None, FixedShiftedNorm };

struct Normalization {
  NormalizationMode mode = NormalizationMode::None;
  double target = 2.0;  // required shifted norm, > 0
};

struct DrivingSpec {
  DrivingVariant variant;
  Normalization normalization;
};

struct DrivingMetadata {
  int k_locality = 0;
  double c_applied = 1.0;        // target / raw_shifted_norm, or 1 when unnormalized
  double raw_shifted_norm = 0.0; // spectral spread before normalization
  PauliSum sum;                  // symbolic form with final (rescaled) coefficients
};

struct BuiltDriving {
  HermitianOperator op;
  DrivingMetadata meta;
};

PauliSum sy_random_sum(int num_sites, std::uint64_t seed, double coupling_std = 1.0);
PauliSum mixed_nn_global_sum(int num_sites, double amplitude);
PauliSum single_qubit_parallel_sum(int num_sites, double amplitude);

BuiltDriving build_driving(const DrivingSpec& spec, int num_sites);

// Largest |E_j - E_m| over eigenpairs of H coupled by a nonzero element of V
// in H's eigenbasis; 0 when V is diagonal there. Entries with magnitude at
// most tol count as zero (default tol: 1e-12 * ||V||).
double delta_e(const HermitianOperator& H, const HermitianOperator& V,
               std::optional<double> tol = std::nullopt);
double delta_e(const SpectralData& h_spectral, const Matrix& v, double tol);

// Partition of terms by locality; the values reconstruct p term-for-term.
std::map<int, PauliSum> k_local_parts(const PauliSum& p);

}  // namespace qbatt
