#include "qbatt/ensembles.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

#include "qbatt/rng.hpp"

namespace qbatt {

namespace {

// Runs fn(0..count-1) on `workers` threads. Tasks own disjoint output slots,
// so scheduling order cannot influence results. The first exception thrown
// by any task is re-thrown after the pool drains.
template <typename Fn>
void parallel_for(long count, int workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto drain = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) pool.emplace_back(drain);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

ObservableStats observable_stats(const std::vector<double>& xs) {
  ObservableStats s;
  if (xs.empty()) return s;
  double sum = 0.0;
  s.max = xs.front();
  for (double x : xs) {
    sum += x;
    s.max = std::max(s.max, x);
  }
  s.mean = sum / static_cast<double>(xs.size());
  double sq = 0.0;
  for (double x : xs) sq += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(xs.size()));
  return s;
}

DrivingSpec driving_with_seed(const DrivingSpec& tmpl, std::uint64_t seed) {
  DrivingSpec spec = tmpl;
  if (auto* sy = std::get_if<SYRandomDriving>(&spec.variant)) sy->seed = seed;
  return spec;
}

void validate_schedule(const std::vector<std::pair<int, int>>& schedule) {
  if (schedule.empty()) throw std::invalid_argument("ensemble schedule is empty");
  for (const auto& [L, n] : schedule) {
    if (L < 1 || L > kMaxSites)
      throw std::invalid_argument("ensemble schedule: L out of range");
    if (n < 1) throw std::invalid_argument("ensemble schedule: realizations must be >= 1");
  }
}

}  // namespace

EnsembleResult run_ensemble(const EnsembleConfig& cfg) {
  if (cfg.L_values.empty()) throw std::invalid_argument("run_ensemble: L_values is empty");
  for (std::size_t i = 1; i < cfg.L_values.size(); ++i)
    if (cfg.L_values[i] <= cfg.L_values[i - 1])
      throw std::invalid_argument("run_ensemble: L_values must be ascending");
  if (cfg.realizations < 1)
    throw std::invalid_argument("run_ensemble: realizations must be >= 1");
  if (!(cfg.histogram_bin_width > 0.0))
    throw std::invalid_argument("run_ensemble: histogram bin width must be positive");

  struct PerL {
    int L;
    HermitianOperator battery;
    SpectralData battery_spectral;
    Matrix single_site;
    Vector ground;
  };
  std::vector<PerL> lattices;
  lattices.reserve(cfg.L_values.size());
  for (int L : cfg.L_values) {
    BatterySpec spec{L, cfg.battery_h, std::nullopt};
    PerL per;
    per.L = L;
    per.battery = build_battery(spec);
    per.battery_spectral = eigendecompose(per.battery);
    per.single_site = battery_single_site(spec);
    per.ground = ground_state(per.battery_spectral);
    lattices.push_back(std::move(per));
  }

  const long n_l = static_cast<long>(lattices.size());
  const long total = n_l * cfg.realizations;
  std::vector<std::optional<EnsembleRecord>> slots(total);
  std::atomic<long> failed{0};

  parallel_for(total, cfg.workers, [&](long task) {
    const PerL& lattice = lattices[task / cfg.realizations];
    const int realization = static_cast<int>(task % cfg.realizations);
    const std::uint64_t seed = stream_seed(cfg.master_seed, lattice.L, realization);
    try {
      const BuiltDriving driving =
          build_driving(driving_with_seed(cfg.driving, seed), lattice.L);
      const SpectralData v_spectral = eigendecompose(driving.op);
      const QuenchResult scan =
          quench_scan(lattice.battery.matrix(), v_spectral, lattice.ground, cfg.scan);
      LatticeMetadata meta;
      meta.k_locality = driving.meta.k_locality;
      meta.single_site = lattice.single_site;
      meta.driving_sum = driving.meta.sum;
      EnsembleRecord rec;
      rec.L = lattice.L;
      rec.realization = realization;
      rec.seed = seed;
      rec.k_locality = driving.meta.k_locality;
      rec.raw_shifted_norm = driving.meta.raw_shifted_norm;
      rec.c_applied = driving.meta.c_applied;
      rec.p_max = scan.p_max;
      rec.t_at_max = scan.t_at_max;
      rec.bounds = full_report(lattice.battery_spectral, lattice.battery, driving.op,
                               meta, scan.p_max);
      slots[task] = std::move(rec);
    } catch (...) {
      failed.fetch_add(1);
    }
  });

  EnsembleResult result;
  result.failed = failed.load();
  result.records.reserve(total - result.failed);
  for (auto& slot : slots)
    if (slot) result.records.push_back(std::move(*slot));

  for (const PerL& lattice : lattices) {
    EnsembleLStats stats;
    stats.L = lattice.L;
    std::vector<double> p_max, comm, half_raw;
    for (const EnsembleRecord& rec : result.records) {
      if (rec.L != lattice.L) continue;
      p_max.push_back(rec.p_max);
      comm.push_back(rec.bounds.observed_commutator_norm);
      half_raw.push_back(rec.raw_shifted_norm / 2.0);
      const long bin = static_cast<long>(
          std::floor(rec.bounds.observed_commutator_norm / cfg.histogram_bin_width));
      ++stats.histogram[bin];
    }
    stats.count = static_cast<long>(p_max.size());
    stats.p_max = observable_stats(p_max);
    stats.commutator_norm = observable_stats(comm);
    stats.half_raw_shifted_norm = observable_stats(half_raw);
    result.stats.push_back(std::move(stats));
  }
  return result;
}

std::vector<NormSample> collect_norm_samples(const std::vector<std::pair<int, int>>& schedule,
                                             std::uint64_t master_seed, int workers) {
  validate_schedule(schedule);
  std::vector<std::pair<int, int>> tasks;  // (L, realization)
  for (const auto& [L, n] : schedule)
    for (int i = 0; i < n; ++i) tasks.emplace_back(L, i);

  std::vector<NormSample> samples(tasks.size());
  parallel_for(static_cast<long>(tasks.size()), workers, [&](long t) {
    const auto [L, realization] = tasks[t];
    NormSample& s = samples[t];
    s.L = L;
    s.realization = realization;
    s.seed = stream_seed(master_seed, L, realization);
    const HermitianOperator v0 = to_dense(sy_random_sum(L, s.seed));
    s.half_raw_shifted_norm = shifted_norm(v0) / 2.0;
  });
  return samples;
}

std::vector<CommutatorSample> collect_commutator_samples(
    const std::vector<std::pair<int, int>>& schedule, std::uint64_t master_seed,
    double battery_h, int workers) {
  validate_schedule(schedule);
  std::vector<std::pair<int, int>> tasks;
  for (const auto& [L, n] : schedule)
    for (int i = 0; i < n; ++i) tasks.emplace_back(L, i);

  std::map<int, HermitianOperator> batteries;
  for (const auto& [L, n] : schedule)
    batteries.emplace(L, build_battery(BatterySpec{L, battery_h, std::nullopt}));

  DrivingSpec spec;
  spec.variant = SYRandomDriving{};
  spec.normalization = {NormalizationMode::FixedShiftedNorm, 2.0};

  std::vector<CommutatorSample> samples(tasks.size());
  parallel_for(static_cast<long>(tasks.size()), workers, [&](long t) {
    const auto [L, realization] = tasks[t];
    CommutatorSample& s = samples[t];
    s.L = L;
    s.realization = realization;
    s.seed = stream_seed(master_seed, L, realization);
    const BuiltDriving driving = build_driving(driving_with_seed(spec, s.seed), L);
    s.commutator_norm = commutator_norm(batteries.at(L), driving.op);
  });
  return samples;
}

ScalingFit norm_scaling_fit(const std::vector<std::pair<int, double>>& mean_by_L) {
  std::map<int, double> seen;
  for (const auto& [L, mean] : mean_by_L) {
    if (L < 2) throw std::invalid_argument("norm_scaling_fit: L must be >= 2");
    seen[L] = mean;
  }
  if (seen.size() < 3)
    throw std::invalid_argument("norm_scaling_fit: need at least 3 distinct L values");

  // Least squares for y = alpha * f(L), f = sqrt(L^2 (L-1)).
  double num = 0.0, den = 0.0;
  for (const auto& [L, y] : seen) {
    const double f = std::sqrt(static_cast<double>(L) * L * (L - 1));
    num += f * y;
    den += f * f;
  }
  ScalingFit fit;
  fit.alpha = num / den;
  double res = 0.0;
  for (const auto& [L, y] : seen) {
    const double f = std::sqrt(static_cast<double>(L) * L * (L - 1));
    res += (y - fit.alpha * f) * (y - fit.alpha * f);
  }
  fit.residual_norm = std::sqrt(res);
  fit.analytic_constant = std::sqrt(3.0 * std::log(2.0));
  return fit;
}

double analytic_vmax_estimate(int L) {
  if (L < 2) throw std::invalid_argument("analytic_vmax_estimate: L must be >= 2");
  return std::sqrt(3.0 * static_cast<double>(L) * L * (L - 1) * std::log(2.0));
}

SpectralVarianceResult spectral_variance_check(int L, int realizations, std::uint64_t seed) {
  if (L < 2) throw std::invalid_argument("spectral_variance_check: L must be >= 2");
  if (realizations < 2)
    throw std::invalid_argument("spectral_variance_check: need at least 2 realizations");

  std::vector<double> means(realizations), second_moments(realizations);
  parallel_for(realizations, 2, [&](long i) {
    const std::uint64_t s = stream_seed(seed, L, i);
    const RealVector eigs = eigenvalues_of(to_dense(sy_random_sum(L, s)));
    means[i] = eigs.mean();
    second_moments[i] = eigs.array().square().mean();
  });

  SpectralVarianceResult result;
  result.realizations = realizations;
  double mean_sum = 0.0, m2_sum = 0.0;
  for (int i = 0; i < realizations; ++i) {
    mean_sum += means[i];
    m2_sum += second_moments[i];
  }
  result.mean = mean_sum / realizations;
  result.variance = m2_sum / realizations - result.mean * result.mean;

  // Standard errors from the realization-to-realization scatter, which
  // respects correlations among eigenvalues of the same instance.
  double mean_var = 0.0, m2_var = 0.0;
  for (int i = 0; i < realizations; ++i) {
    mean_var += (means[i] - result.mean) * (means[i] - result.mean);
    m2_var += (second_moments[i] - m2_sum / realizations) *
              (second_moments[i] - m2_sum / realizations);
  }
  result.mean_se = std::sqrt(mean_var / realizations / realizations);
  result.variance_se = std::sqrt(m2_var / realizations / realizations);
  return result;
}

}  // namespace qbatt
