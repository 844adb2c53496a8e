#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "qbatt/bounds.hpp"
#include "qbatt/dynamics.hpp"

namespace qbatt {

struct EnsembleConfig {
  std::vector<int> L_values;  // nonempty, ascending
  int realizations = 1;       // per L
  std::uint64_t master_seed = 0;
  // Template driving; for SYRandomDriving the per-realization seed is
  // replaced by stream_seed(master_seed, L, realization_index).
  DrivingSpec driving;
  double battery_h = 1.0;
  ScanParams scan;
  double histogram_bin_width = 0.1;
  int workers = 1;
};

struct EnsembleRecord {
  int L = 0;
  int realization = 0;
  std::uint64_t seed = 0;
  int k_locality = 0;
  double raw_shifted_norm = 0.0;
  double c_applied = 1.0;
  double p_max = 0.0;
  double t_at_max = 0.0;
  BoundReport bounds;
};

struct ObservableStats {
  double mean = 0.0;
  double stddev = 0.0;  // population convention, 0 for a single sample
  double max = 0.0;
};

struct EnsembleLStats {
  int L = 0;
  long count = 0;
  ObservableStats p_max;
  ObservableStats commutator_norm;
  ObservableStats half_raw_shifted_norm;
  std::map<long, long> histogram;  // bin i counts commutator norms in [i*w, (i+1)*w)
};

struct EnsembleResult {
  std::vector<EnsembleRecord> records;  // ordered by (L, realization)
  std::vector<EnsembleLStats> stats;    // ordered by L
  long failed = 0;                      // realizations skipped due to errors
};

// One battery + driving + ground-state quench + bound report per (L, i).
// Deterministic for a fixed config, independent of worker count.
EnsembleResult run_ensemble(const EnsembleConfig& cfg);

// Raw half shifted norms ||V0 - v0_min|| / 2 of un-normalized SYRandom
// instances, no quench. schedule is a list of (L, realizations).
struct NormSample {
  int L = 0;
  int realization = 0;
  std::uint64_t seed = 0;
  double half_raw_shifted_norm = 0.0;
};
std::vector<NormSample> collect_norm_samples(const std::vector<std::pair<int, int>>& schedule,
                                             std::uint64_t master_seed, int workers);

// Commutator norms ||[H, V]|| of normalized SYRandom instances, no quench.
struct CommutatorSample {
  int L = 0;
  int realization = 0;
  std::uint64_t seed = 0;
  double commutator_norm = 0.0;
};
std::vector<CommutatorSample> collect_commutator_samples(
    const std::vector<std::pair<int, int>>& schedule, std::uint64_t master_seed,
    double battery_h, int workers);

// Least-squares fit of per-L means against alpha * sqrt(L^2 (L-1)).
struct ScalingFit {
  double alpha = 0.0;
  double residual_norm = 0.0;
  double analytic_constant = 0.0;  // sqrt(3 ln 2), the i.i.d. Gaussian estimate
};
ScalingFit norm_scaling_fit(const std::vector<std::pair<int, double>>& mean_by_L);

// Extreme-value estimate sqrt(3 L^2 (L-1) ln 2) for the mean half spread.
double analytic_vmax_estimate(int L);

// Pooled eigenvalue statistics of un-normalized SYRandom instances; standard
// errors are estimated from the spread of per-realization statistics.
struct SpectralVarianceResult {
  double mean = 0.0;
  double variance = 0.0;
  double mean_se = 0.0;
  double variance_se = 0.0;
  long realizations = 0;
};
SpectralVarianceResult spectral_variance_check(int L, int realizations, std::uint64_t seed);

}  // namespace qbatt
