#include "qbatt/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>

#include "qbatt/csv.hpp"
#include "qbatt/rng.hpp"
#include "qbatt/svg.hpp"

namespace qbatt::experiments {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + ": expected a JSON object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw ConfigError(ctx + ": unknown field \"" + item.key() + "\"");
}

const json& require_field(const json& j, const std::string& key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(ctx + ": missing required field \"" + key + "\"");
  return *it;
}

void require_schema_version(const json& j, const std::string& ctx) {
  const json& v = require_field(j, "schema_version", ctx);
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
    throw ConfigError(ctx + ": unsupported schema_version (expected " +
                      std::to_string(kSchemaVersion) + ")");
}

template <typename T>
T get_number(const json& j, const std::string& key, const std::string& ctx) {
  const json& v = require_field(j, key, ctx);
  if (!v.is_number()) throw ConfigError(ctx + ": field \"" + key + "\" must be a number");
  return v.get<T>();
}

template <typename T>
T get_number_or(const json& j, const std::string& key, T fallback, const std::string& ctx) {
  if (!j.contains(key)) return fallback;
  return get_number<T>(j, key, ctx);
}

std::vector<int> get_int_list(const json& j, const std::string& key, const std::string& ctx) {
  const json& v = require_field(j, key, ctx);
  if (!v.is_array() || v.empty())
    throw ConfigError(ctx + ": field \"" + key + "\" must be a nonempty array");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) throw ConfigError(ctx + ": \"" + key + "\" must hold integers");
    out.push_back(e.get<int>());
  }
  return out;
}

ScanParams parse_scan(const json& j, const std::string& ctx) {
  ScanParams scan;
  if (!j.contains("scan")) return scan;
  const json& s = j.at("scan");
  check_keys(s, {"n_steps", "t_max"}, ctx + ".scan");
  scan.n_steps = get_number_or<int>(s, "n_steps", scan.n_steps, ctx + ".scan");
  if (s.contains("t_max")) scan.t_max = get_number<double>(s, "t_max", ctx + ".scan");
  return scan;
}

std::uint64_t require_seed(const json& j, const std::string& ctx) {
  const json& v = require_field(j, "seed", ctx);
  if (!v.is_number_unsigned() && !v.is_number_integer())
    throw ConfigError(ctx + ": \"seed\" must be an unsigned integer");
  if (v.is_number_integer() && v.get<long long>() < 0)
    throw ConfigError(ctx + ": \"seed\" must be non-negative");
  return v.get<std::uint64_t>();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
}

std::filesystem::path prepare_out_dir(const RunOptions& options) {
  std::filesystem::path dir(options.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string csv_optional(const std::optional<double>& v) {
  return v ? csv_double(*v) : "nan";
}

}  // namespace

DrivingSpec parse_driving_spec(const json& j) {
  const std::string ctx = "driving";
  if (!j.is_object()) throw ConfigError(ctx + ": expected a JSON object");
  const std::string variant = require_field(j, "variant", ctx).get<std::string>();

  DrivingSpec spec;
  if (variant == "sy_random") {
    check_keys(j, {"variant", "coupling_std", "normalization"}, ctx);
    SYRandomDriving sy;
    sy.coupling_std = get_number_or<double>(j, "coupling_std", 1.0, ctx);
    spec.variant = sy;
  } else if (variant == "mixed_nn_global") {
    check_keys(j, {"variant", "amplitude", "normalization"}, ctx);
    spec.variant = MixedNNGlobalDriving{get_number_or<double>(j, "amplitude", 1.0, ctx)};
  } else if (variant == "single_qubit_parallel") {
    check_keys(j, {"variant", "amplitude", "normalization"}, ctx);
    spec.variant = SingleQubitParallelDriving{get_number_or<double>(j, "amplitude", 1.0, ctx)};
  } else if (variant == "explicit_pauli_sum") {
    check_keys(j, {"variant", "pauli_sum", "normalization"}, ctx);
    try {
      spec.variant = ExplicitPauliSumDriving{pauli_sum_from_json(require_field(j, "pauli_sum", ctx))};
    } catch (const std::exception& e) {
      throw ConfigError(ctx + ".pauli_sum: " + e.what());
    }
  } else {
    throw ConfigError(ctx + ": unknown variant \"" + variant + "\"");
  }

  if (j.contains("normalization")) {
    const json& n = j.at("normalization");
    check_keys(n, {"mode", "target"}, ctx + ".normalization");
    const std::string mode = require_field(n, "mode", ctx + ".normalization").get<std::string>();
    if (mode == "none") {
      spec.normalization.mode = NormalizationMode::None;
    } else if (mode == "fixed_shifted_norm") {
      spec.normalization.mode = NormalizationMode::FixedShiftedNorm;
      spec.normalization.target =
          get_number_or<double>(n, "target", 2.0, ctx + ".normalization");
      if (!(spec.normalization.target > 0.0))
        throw ConfigError(ctx + ".normalization: target must be positive");
    } else {
      throw ConfigError(ctx + ".normalization: unknown mode \"" + mode + "\"");
    }
  }
  return spec;
}

VerifyConfig parse_verify_config(const json& j) {
  const std::string ctx = "verify config";
  check_keys(j,
             {"schema_version", "seed", "instances", "max_sites", "field_strengths",
              "e_samples", "inject_fault"},
             ctx);
  require_schema_version(j, ctx);
  VerifyConfig cfg;
  cfg.seed = require_seed(j, ctx);
  cfg.instances = get_number_or<int>(j, "instances", cfg.instances, ctx);
  cfg.max_sites = get_number_or<int>(j, "max_sites", cfg.max_sites, ctx);
  cfg.e_samples = get_number_or<int>(j, "e_samples", cfg.e_samples, ctx);
  if (j.contains("field_strengths")) {
    cfg.field_strengths.clear();
    for (const auto& e : j.at("field_strengths")) cfg.field_strengths.push_back(e.get<double>());
  }
  if (j.contains("inject_fault")) cfg.inject_fault = j.at("inject_fault").get<bool>();
  if (cfg.instances < 1) throw ConfigError(ctx + ": corpus is empty (instances < 1)");
  if (cfg.max_sites < 2 || cfg.max_sites > kMaxSites)
    throw ConfigError(ctx + ": max_sites out of range");
  if (cfg.e_samples < 1) throw ConfigError(ctx + ": e_samples must be >= 1");
  if (cfg.field_strengths.empty()) throw ConfigError(ctx + ": field_strengths is empty");
  return cfg;
}

namespace {

EnsembleConfig parse_ensemble_common(const json& j, const std::string& ctx, bool stochastic) {
  EnsembleConfig cfg;
  cfg.L_values = get_int_list(j, "L_values", ctx);
  cfg.realizations = get_number_or<int>(j, "realizations", stochastic ? 100 : 1, ctx);
  cfg.battery_h = get_number_or<double>(j, "battery_h", 1.0, ctx);
  cfg.scan = parse_scan(j, ctx);
  cfg.histogram_bin_width = get_number_or<double>(j, "histogram_bin_width", 0.1, ctx);
  cfg.workers = get_number_or<int>(j, "workers", 1, ctx);
  if (cfg.workers < 1) throw ConfigError(ctx + ": workers must be >= 1");
  return cfg;
}

}  // namespace

EnsembleConfig parse_figure1a_config(const json& j) {
  const std::string ctx = "figure1a config";
  check_keys(j,
             {"schema_version", "seed", "L_values", "realizations", "battery_h", "scan",
              "histogram_bin_width", "workers"},
             ctx);
  require_schema_version(j, ctx);
  EnsembleConfig cfg = parse_ensemble_common(j, ctx, true);
  cfg.master_seed = require_seed(j, ctx);
  cfg.driving.variant = SYRandomDriving{};
  cfg.driving.normalization = {NormalizationMode::FixedShiftedNorm, 2.0};
  return cfg;
}

EnsembleConfig parse_figure1b_config(const json& j) {
  const std::string ctx = "figure1b config";
  check_keys(j,
             {"schema_version", "seed", "L_values", "battery_h", "driving_amplitude", "scan",
              "workers"},
             ctx);
  require_schema_version(j, ctx);
  EnsembleConfig cfg = parse_ensemble_common(j, ctx, false);
  cfg.master_seed = 0;  // deterministic driving, streams unused
  cfg.driving.variant =
      MixedNNGlobalDriving{get_number_or<double>(j, "driving_amplitude", 1.0, ctx)};
  cfg.driving.normalization.mode = NormalizationMode::None;
  return cfg;
}

ScalingConfig parse_scaling_config(const json& j) {
  const std::string ctx = "scaling config";
  check_keys(j, {"schema_version", "seed", "L_values", "realizations", "realizations_by_L",
                 "workers"},
             ctx);
  require_schema_version(j, ctx);
  ScalingConfig cfg;
  cfg.seed = require_seed(j, ctx);
  cfg.workers = get_number_or<int>(j, "workers", 1, ctx);
  const std::vector<int> L_values = get_int_list(j, "L_values", ctx);
  const int base = get_number_or<int>(j, "realizations", 100, ctx);
  std::map<int, int> overrides;
  if (j.contains("realizations_by_L")) {
    for (const auto& pair : j.at("realizations_by_L")) {
      if (!pair.is_array() || pair.size() != 2)
        throw ConfigError(ctx + ": realizations_by_L must hold [L, n] pairs");
      overrides[pair.at(0).get<int>()] = pair.at(1).get<int>();
    }
  }
  for (int L : L_values) {
    const auto it = overrides.find(L);
    cfg.schedule.emplace_back(L, it == overrides.end() ? base : it->second);
  }
  if (cfg.schedule.size() < 3) throw ConfigError(ctx + ": need at least 3 L values");
  return cfg;
}

HistogramConfig parse_histogram_config(const json& j) {
  const std::string ctx = "histogram config";
  check_keys(j, {"schema_version", "seed", "L_values", "realizations", "battery_h",
                 "bin_width", "workers"},
             ctx);
  require_schema_version(j, ctx);
  HistogramConfig cfg;
  cfg.seed = require_seed(j, ctx);
  cfg.L_values = get_int_list(j, "L_values", ctx);
  cfg.realizations = get_number_or<int>(j, "realizations", cfg.realizations, ctx);
  cfg.battery_h = get_number_or<double>(j, "battery_h", 1.0, ctx);
  cfg.bin_width = get_number_or<double>(j, "bin_width", 0.1, ctx);
  cfg.workers = get_number_or<int>(j, "workers", 1, ctx);
  if (cfg.realizations < 1) throw ConfigError(ctx + ": realizations must be >= 1");
  if (!(cfg.bin_width > 0.0)) throw ConfigError(ctx + ": bin_width must be positive");
  return cfg;
}

QuenchConfig parse_quench_config(const json& j) {
  const std::string ctx = "quench config";
  check_keys(j, {"schema_version", "seed", "battery", "driving", "scan"}, ctx);
  require_schema_version(j, ctx);
  QuenchConfig cfg;
  const json& b = require_field(j, "battery", ctx);
  check_keys(b, {"num_sites", "field_strength"}, ctx + ".battery");
  cfg.battery.num_sites = get_number<int>(b, "num_sites", ctx + ".battery");
  cfg.battery.field_strength =
      get_number_or<double>(b, "field_strength", 1.0, ctx + ".battery");
  cfg.driving = parse_driving_spec(require_field(j, "driving", ctx));
  cfg.scan = parse_scan(j, ctx);
  if (j.contains("seed")) cfg.seed = require_seed(j, ctx);
  if (std::holds_alternative<SYRandomDriving>(cfg.driving.variant) && !cfg.seed)
    throw ConfigError(ctx + ": stochastic driving requires a seed");
  return cfg;
}

std::string bound_report_csv(const EnsembleRecord& record) {
  std::string row;
  row += std::to_string(record.L) + ',';
  row += std::to_string(record.seed) + ',';
  row += std::to_string(record.k_locality) + ',';
  row += csv_double(record.bounds.delta_e) + ',';
  row += csv_double(record.bounds.general_bound) + ',';
  row += csv_double(record.bounds.theorem1) + ',';
  row += csv_optional(record.bounds.corollary_klocal) + ',';
  row += csv_optional(record.bounds.decomposition_bound) + ',';
  row += csv_double(record.bounds.observed_commutator_norm) + ',';
  row += csv_double(record.p_max);
  return row;
}

std::string records_csv(const std::vector<EnsembleRecord>& records) {
  std::string out =
      "L,seed,k,delta_e,general_bound,theorem1,corollary_klocal,decomposition_bound,"
      "commutator_norm,p_max\n";
  for (const auto& rec : records) out += bound_report_csv(rec) + '\n';
  return out;
}

std::string stats_csv(const std::vector<EnsembleLStats>& stats) {
  std::string out =
      "L,count,p_max_mean,p_max_std,p_max_max,commutator_norm_mean,commutator_norm_std,"
      "commutator_norm_max,half_raw_shifted_norm_mean,half_raw_shifted_norm_std,"
      "half_raw_shifted_norm_max\n";
  for (const auto& s : stats) {
    out += std::to_string(s.L) + ',' + std::to_string(s.count) + ',';
    out += csv_double(s.p_max.mean) + ',' + csv_double(s.p_max.stddev) + ',' +
           csv_double(s.p_max.max) + ',';
    out += csv_double(s.commutator_norm.mean) + ',' + csv_double(s.commutator_norm.stddev) +
           ',' + csv_double(s.commutator_norm.max) + ',';
    out += csv_double(s.half_raw_shifted_norm.mean) + ',' +
           csv_double(s.half_raw_shifted_norm.stddev) + ',' +
           csv_double(s.half_raw_shifted_norm.max) + '\n';
  }
  return out;
}

std::string hist_csv(const std::vector<EnsembleLStats>& stats, double bin_width) {
  std::string out = "L,bin_lo,count\n";
  for (const auto& s : stats)
    for (const auto& [bin, count] : s.histogram)
      out += std::to_string(s.L) + ',' + csv_double(bin * bin_width) + ',' +
             std::to_string(count) + '\n';
  return out;
}

std::string hist_csv(const std::vector<CommutatorSample>& samples, double bin_width) {
  std::map<int, std::map<long, long>> hist;
  for (const auto& s : samples)
    ++hist[s.L][static_cast<long>(std::floor(s.commutator_norm / bin_width))];
  std::string out = "L,bin_lo,count\n";
  for (const auto& [L, bins] : hist)
    for (const auto& [bin, count] : bins)
      out += std::to_string(L) + ',' + csv_double(bin * bin_width) + ',' +
             std::to_string(count) + '\n';
  return out;
}

std::string fit_csv(const ScalingFit& fit) {
  return "alpha,residual_norm,analytic_constant\n" + csv_double(fit.alpha) + ',' +
         csv_double(fit.residual_norm) + ',' + csv_double(fit.analytic_constant) + '\n';
}

namespace {

struct ScalingAggregate {
  std::vector<std::pair<int, double>> means;           // (L, mean)
  std::map<int, std::pair<long, double>> count_mean;   // L -> (n, mean)
  std::map<int, double> stddev;
};

ScalingAggregate aggregate_norm_samples(const std::vector<NormSample>& samples) {
  ScalingAggregate agg;
  std::map<int, std::vector<double>> by_L;
  for (const auto& s : samples) by_L[s.L].push_back(s.half_raw_shifted_norm);
  for (const auto& [L, xs] : by_L) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double sq = 0.0;
    for (double x : xs) sq += (x - mean) * (x - mean);
    agg.means.emplace_back(L, mean);
    agg.count_mean[L] = {static_cast<long>(xs.size()), mean};
    agg.stddev[L] = std::sqrt(sq / static_cast<double>(xs.size()));
  }
  return agg;
}

}  // namespace

std::string scaling_points_csv(const std::vector<NormSample>& samples, const ScalingFit& fit) {
  const ScalingAggregate agg = aggregate_norm_samples(samples);
  std::string out =
      "L,realizations,mean_half_raw_norm,std_half_raw_norm,fit_value,analytic_estimate\n";
  for (const auto& [L, cm] : agg.count_mean) {
    const double f = std::sqrt(static_cast<double>(L) * L * (L - 1));
    out += std::to_string(L) + ',' + std::to_string(cm.first) + ',' + csv_double(cm.second) +
           ',' + csv_double(agg.stddev.at(L)) + ',' + csv_double(fit.alpha * f) + ',' +
           csv_double(analytic_vmax_estimate(L)) + '\n';
  }
  return out;
}

std::string figure_csv(const std::vector<EnsembleLStats>& stats,
                       const std::vector<double>& bounds) {
  std::string out = "L,max_p_max,max_commutator_norm,bound\n";
  for (std::size_t i = 0; i < stats.size(); ++i)
    out += std::to_string(stats[i].L) + ',' + csv_double(stats[i].p_max.max) + ',' +
           csv_double(stats[i].commutator_norm.max) + ',' + csv_double(bounds[i]) + '\n';
  return out;
}

std::string quench_csv(const QuenchResult& result) {
  std::string out = "row,t,energy,power\n";
  for (Eigen::Index i = 0; i < result.times.size(); ++i)
    out += "grid," + csv_double(result.times(i)) + ',' + csv_double(result.energy(i)) + ',' +
           csv_double(result.power(i)) + '\n';
  out += "max," + csv_double(result.t_at_max) + ',' + csv_double(result.e_at_max) + ',' +
         csv_double(result.p_at_max) + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// verify

namespace {

struct VerifyRow {
  std::string check;
  int instance;
  int L;
  double h;
  std::uint64_t seed;
  double observed;
  double limit;
  bool pass;
};

struct VerifyState {
  std::vector<VerifyRow> rows;
  long violations = 0;
  json offending = json::array();

  void add(const std::string& check, int instance, int L, double h, std::uint64_t seed,
           double observed, double limit) {
    const bool pass = observed <= limit;
    if (!pass) ++violations;
    rows.push_back({check, instance, L, h, seed, observed, limit, pass});
  }
};

std::size_t uniform_index(GaussianStream& g, std::size_t n) {
  return std::min<std::size_t>(n - 1, static_cast<std::size_t>(g.uniform() * n));
}

struct VerifyInstance {
  int L = 0;
  double h = 0.0;
  std::uint64_t seed = 0;
  PauliSum driving;
};

// Random lattice battery + random k-local driving with delta_e > 0; all-Z
// draws (which commute with the battery) advance the attempt counter.
VerifyInstance make_instance(const VerifyConfig& cfg, int index) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    VerifyInstance inst;
    inst.seed = stream_seed(cfg.seed, 1000 + attempt, index);
    GaussianStream g(inst.seed);
    inst.L = 2 + static_cast<int>(uniform_index(g, cfg.max_sites - 1));
    inst.h = cfg.field_strengths[uniform_index(g, cfg.field_strengths.size())];
    const int k = 1 + static_cast<int>(uniform_index(g, inst.L));
    const int n_terms = 1 + static_cast<int>(uniform_index(g, 3 * inst.L));
    inst.driving.num_sites = inst.L;
    bool has_offdiagonal = false;
    for (int t = 0; t < n_terms; ++t) {
      PauliTerm term;
      term.coefficient = g.gaussian();
      const int loc = 1 + static_cast<int>(uniform_index(g, k));
      while (static_cast<int>(term.letters.size()) < loc) {
        const int site = static_cast<int>(uniform_index(g, inst.L));
        if (term.letters.count(site)) continue;
        const Pauli letter = static_cast<Pauli>(uniform_index(g, 3));
        if (letter != Pauli::Z) has_offdiagonal = true;
        term.letters[site] = letter;
      }
      inst.driving.terms.push_back(std::move(term));
    }
    if (has_offdiagonal) return inst;
  }
}

json instance_to_json(const std::string& kind, const VerifyInstance& inst) {
  return {{"kind", kind},
          {"L", inst.L},
          {"field_strength", inst.h},
          {"seed", inst.seed},
          {"pauli_sum", to_json(inst.driving)}};
}

std::string verify_csv(const VerifyState& state) {
  std::string out = "check,instance,L,h,seed,observed,limit,pass\n";
  for (const auto& r : state.rows)
    out += r.check + ',' + std::to_string(r.instance) + ',' + std::to_string(r.L) + ',' +
           csv_double(r.h) + ',' + std::to_string(r.seed) + ',' + csv_double(r.observed) +
           ',' + csv_double(r.limit) + ',' + (r.pass ? "1" : "0") + '\n';
  return out;
}

}  // namespace

int run_verify(const json& config, const RunOptions& options) {
  VerifyConfig cfg = parse_verify_config(config);
  if (options.seed) cfg.seed = *options.seed;
  const auto out_dir = prepare_out_dir(options);

  VerifyState state;

  // Lemma 1, Lemma 2 and the bound chain over the randomized corpus.
  for (int i = 0; i < cfg.instances; ++i) {
    const VerifyInstance inst = make_instance(cfg, i);
    const HermitianOperator H =
        build_battery(BatterySpec{inst.L, inst.h, std::nullopt});
    const HermitianOperator V = to_dense(inst.driving);
    const double h_norm = operator_norm(H);
    const double v_norm = operator_norm(V);
    const double v_shifted = shifted_norm(V);
    const double de = delta_e(H, V);
    const double comm = commutator_norm(H, V);

    // Chain: ||[H,V]|| <= dE ||V - vmin||/2 <= dE ||V|| <= 2 ||H|| ||V||.
    state.add("chain_theorem1", i, inst.L, inst.h, inst.seed, comm,
              de * v_shifted / 2.0 + kBoundSlack);
    state.add("chain_unshifted", i, inst.L, inst.h, inst.seed, de * v_shifted / 2.0,
              de * v_norm + kBoundSlack);
    state.add("chain_general", i, inst.L, inst.h, inst.seed, de * v_norm,
              2.0 * h_norm * v_norm + kBoundSlack);

    if (de > 0.0) {
      const Matrix direct = commutator(H, V);
      const Matrix integral = integral_commutator(H, V, de);
      const double residual = (integral - direct).cwiseAbs().maxCoeff();
      state.add("lemma1_integral", i, inst.L, inst.h, inst.seed, residual,
                1e-9 * h_norm * v_norm);

      const SpectralData hs = eigendecompose(H);
      const RealVector v_eigs = eigenvalues_of(V);
      GaussianStream g(stream_seed(cfg.seed, 3000, i));
      double worst_spectrum = 0.0;
      double worst_h_norm = 0.0;
      for (int s = 0; s < cfg.e_samples; ++s) {
        const double e = g.uniform() * de;  // uniform() > 0 keeps e in (0, dE]
        const HermitianOperator ve = build_v_of_e(hs, V, de, e);
        worst_spectrum =
            std::max(worst_spectrum, (eigenvalues_of(ve) - v_eigs).cwiseAbs().maxCoeff());
        const HofE he = build_h_of_e(hs.values, de, e);
        worst_h_norm = std::max(worst_h_norm,
                                std::abs(he.diag_signs.cwiseAbs().maxCoeff() - 0.5));
      }
      state.add("lemma2_spectrum", i, inst.L, inst.h, inst.seed, worst_spectrum,
                1e-9 * v_norm);
      state.add("lemma2_h_norm", i, inst.L, inst.h, inst.seed, worst_h_norm, 0.0);
    }
  }

  // Normalization postcondition for SYRandom builds; the fault switch scales
  // V after the build, which these checks must catch.
  for (int L = 2; L <= cfg.max_sites; ++L) {
    const std::uint64_t seed = stream_seed(cfg.seed, 2000, L);
    DrivingSpec spec;
    spec.variant = SYRandomDriving{seed, 1.0};
    spec.normalization = {NormalizationMode::FixedShiftedNorm, 2.0};
    const BuiltDriving built = build_driving(spec, L);
    HermitianOperator v_used = built.op;
    if (cfg.inject_fault) v_used = HermitianOperator(1.5 * built.op.matrix());

    const double norm_dev = std::abs(shifted_norm(v_used) - 2.0);
    state.add("normalization_shifted_norm", -1, L, 1.0, seed, norm_dev, kBoundSlack);
    const double c_dev =
        std::abs(built.meta.c_applied - 2.0 / built.meta.raw_shifted_norm);
    state.add("normalization_c_applied", -1, L, 1.0, seed, c_dev, 0.0);
    if (norm_dev > kBoundSlack) {
      VerifyInstance inst;
      inst.L = L;
      inst.h = 1.0;
      inst.seed = seed;
      inst.driving = built.meta.sum;
      state.offending.push_back(instance_to_json("normalization", inst));
    }
  }

  // Saturation cases with closed-form maxima.
  {
    const HermitianOperator h1 = build_battery(BatterySpec{1, 1.0, std::nullopt});
    PauliSum sx;
    sx.num_sites = 1;
    sx.terms.push_back({1.0, {{0, Pauli::X}}});
    const HermitianOperator v1 = to_dense(sx);
    const QuenchResult scan1 = quench_scan(h1, v1, ground_state(h1));
    state.add("saturation_single_qubit", -1, 1, 1.0, 0, std::abs(scan1.p_max - 2.0), 1e-6);
    state.add("scan_power_vs_commutator", -1, 1, 1.0, 0, scan1.p_max,
              commutator_norm(h1, v1) + kBoundSlack);

    const HermitianOperator h2 = build_battery(BatterySpec{2, 1.0, std::nullopt});
    PauliSum sxx;
    sxx.num_sites = 2;
    sxx.terms.push_back({1.0, {{0, Pauli::X}, {1, Pauli::X}}});
    const HermitianOperator v2 = to_dense(sxx);
    const QuenchResult scan2 = quench_scan(h2, v2, ground_state(h2));
    state.add("saturation_two_qubit_global", -1, 2, 1.0, 0, std::abs(scan2.p_max - 4.0),
              1e-6);
    state.add("scan_power_vs_commutator", -1, 2, 1.0, 0, scan2.p_max,
              commutator_norm(h2, v2) + kBoundSlack);
  }

  write_file(out_dir / "verify_report.csv", verify_csv(state));
  if (!state.offending.empty())
    write_file(out_dir / "offending_instances.json", state.offending.dump(2) + "\n");

  std::cout << "verify: " << state.rows.size() << " checks, " << state.violations
            << " violations\n";
  if (state.violations > 0) {
    std::cout << "offending instances dumped to "
              << (out_dir / "offending_instances.json").string() << "\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// figure1a / figure1b

namespace {

int run_figure(const EnsembleConfig& cfg, const RunOptions& options, bool mixed_variant,
               const std::string& figure_name) {
  EnsembleConfig run_cfg = cfg;
  if (options.seed) run_cfg.master_seed = *options.seed;
  if (options.workers) run_cfg.workers = *options.workers;
  const auto out_dir = prepare_out_dir(options);

  const EnsembleResult result = run_ensemble(run_cfg);
  if (result.failed > 0) {
    std::cout << figure_name << ": " << result.failed << " realizations failed\n";
    return 1;
  }

  std::vector<double> bounds;
  for (const auto& s : result.stats) {
    double bound = std::numeric_limits<double>::quiet_NaN();
    for (const auto& rec : result.records) {
      if (rec.L != s.L) continue;
      bound = mixed_variant ? rec.bounds.decomposition_bound.value_or(bound)
                            : rec.bounds.corollary_klocal.value_or(bound);
      break;
    }
    bounds.push_back(bound);
  }

  write_file(out_dir / "records.csv", records_csv(result.records));
  write_file(out_dir / "stats.csv", stats_csv(result.stats));
  if (!mixed_variant)
    write_file(out_dir / "hist.csv", hist_csv(result.stats, run_cfg.histogram_bin_width));
  write_file(out_dir / (figure_name + ".csv"), figure_csv(result.stats, bounds));

  if (options.svg) {
    PlotSeries p_series{"max P_max", {}, {}, true, true};
    PlotSeries c_series{"max ||[H,V]||", {}, {}, true, true};
    PlotSeries b_series{"bound", {}, {}, true, false};
    for (std::size_t i = 0; i < result.stats.size(); ++i) {
      p_series.x.push_back(result.stats[i].L);
      p_series.y.push_back(result.stats[i].p_max.max);
      c_series.x.push_back(result.stats[i].L);
      c_series.y.push_back(result.stats[i].commutator_norm.max);
      b_series.x.push_back(result.stats[i].L);
      b_series.y.push_back(bounds[i]);
    }
    write_file(out_dir / (figure_name + ".svg"),
               render_svg_plot(figure_name, "L", "power / norm",
                               {p_series, c_series, b_series}));
  }

  for (std::size_t i = 0; i < result.stats.size(); ++i)
    std::cout << figure_name << ": L=" << result.stats[i].L
              << " max_p_max=" << result.stats[i].p_max.max
              << " max_comm=" << result.stats[i].commutator_norm.max
              << " bound=" << bounds[i] << "\n";
  return 0;
}

}  // namespace

int run_figure1a(const json& config, const RunOptions& options) {
  return run_figure(parse_figure1a_config(config), options, false, "figure1a");
}

int run_figure1b(const json& config, const RunOptions& options) {
  return run_figure(parse_figure1b_config(config), options, true, "figure1b");
}

// ---------------------------------------------------------------------------
// scaling / histogram / quench

int run_scaling(const json& config, const RunOptions& options) {
  ScalingConfig cfg = parse_scaling_config(config);
  if (options.seed) cfg.seed = *options.seed;
  if (options.workers) cfg.workers = *options.workers;
  const auto out_dir = prepare_out_dir(options);

  const std::vector<NormSample> samples =
      collect_norm_samples(cfg.schedule, cfg.seed, cfg.workers);
  const ScalingAggregate agg = aggregate_norm_samples(samples);
  const ScalingFit fit = norm_scaling_fit(agg.means);

  write_file(out_dir / "fit.csv", fit_csv(fit));
  write_file(out_dir / "scaling_points.csv", scaling_points_csv(samples, fit));

  if (options.svg) {
    PlotSeries data{"mean ||V0 - v0min||/2", {}, {}, false, true};
    PlotSeries fitted{"alpha sqrt(L^2(L-1))", {}, {}, true, false};
    for (const auto& [L, mean] : agg.means) {
      data.x.push_back(L);
      data.y.push_back(mean);
      fitted.x.push_back(L);
      fitted.y.push_back(fit.alpha * std::sqrt(static_cast<double>(L) * L * (L - 1)));
    }
    write_file(out_dir / "scaling.svg",
               render_svg_plot("norm scaling", "L", "half shifted norm", {data, fitted}));
  }

  // Log-log slope of mean vs L, reported (not asserted) next to the ansatz:
  // the asymptotic exponent of sqrt(L^2 (L-1)) is 3/2.
  double lx = 0.0, ly = 0.0, lxx = 0.0, lxy = 0.0;
  for (const auto& [L, mean] : agg.means) {
    lx += std::log(L);
    ly += std::log(mean);
    lxx += std::log(L) * std::log(L);
    lxy += std::log(L) * std::log(mean);
  }
  const double n = static_cast<double>(agg.means.size());
  const double slope = (n * lxy - lx * ly) / (n * lxx - lx * lx);

  std::cout << "scaling: alpha=" << fit.alpha << " residual_norm=" << fit.residual_norm
            << " analytic_constant=" << fit.analytic_constant
            << " loglog_slope=" << slope << "\n";
  return 0;
}

int run_histogram(const json& config, const RunOptions& options) {
  HistogramConfig cfg = parse_histogram_config(config);
  if (options.seed) cfg.seed = *options.seed;
  if (options.workers) cfg.workers = *options.workers;
  const auto out_dir = prepare_out_dir(options);

  std::vector<std::pair<int, int>> schedule;
  for (int L : cfg.L_values) schedule.emplace_back(L, cfg.realizations);
  const std::vector<CommutatorSample> samples =
      collect_commutator_samples(schedule, cfg.seed, cfg.battery_h, cfg.workers);

  write_file(out_dir / "hist.csv", hist_csv(samples, cfg.bin_width));

  if (options.svg) {
    std::map<int, std::map<long, long>> hist;
    for (const auto& s : samples)
      ++hist[s.L][static_cast<long>(std::floor(s.commutator_norm / cfg.bin_width))];
    std::vector<PlotSeries> series;
    for (const auto& [L, bins] : hist) {
      PlotSeries ps{"L=" + std::to_string(L), {}, {}, true, true};
      for (const auto& [bin, count] : bins) {
        ps.x.push_back(bin * cfg.bin_width);
        ps.y.push_back(static_cast<double>(count));
      }
      series.push_back(std::move(ps));
    }
    write_file(out_dir / "histogram.svg",
               render_svg_plot("commutator norm histogram", "||[H,V]||", "count", series));
  }

  std::cout << "histogram: " << samples.size() << " samples over " << cfg.L_values.size()
            << " lattice sizes\n";
  return 0;
}

int run_quench(const json& config, const RunOptions& options) {
  QuenchConfig cfg = parse_quench_config(config);
  if (options.seed) cfg.seed = *options.seed;
  if (std::holds_alternative<SYRandomDriving>(cfg.driving.variant)) {
    if (!cfg.seed) throw ConfigError("quench: stochastic driving requires a seed");
    std::get<SYRandomDriving>(cfg.driving.variant).seed = *cfg.seed;
  }
  const auto out_dir = prepare_out_dir(options);

  const HermitianOperator H = build_battery(cfg.battery);
  const BuiltDriving driving = build_driving(cfg.driving, cfg.battery.num_sites);
  const SpectralData h_spectral = eigendecompose(H);
  const SpectralData v_spectral = eigendecompose(driving.op);
  const QuenchResult scan =
      quench_scan(H.matrix(), v_spectral, ground_state(h_spectral), cfg.scan);

  LatticeMetadata meta;
  meta.k_locality = driving.meta.k_locality;
  meta.single_site = battery_single_site(cfg.battery);
  meta.driving_sum = driving.meta.sum;

  EnsembleRecord record;
  record.L = cfg.battery.num_sites;
  record.realization = 0;
  record.seed = cfg.seed.value_or(0);
  record.k_locality = driving.meta.k_locality;
  record.raw_shifted_norm = driving.meta.raw_shifted_norm;
  record.c_applied = driving.meta.c_applied;
  record.p_max = scan.p_max;
  record.t_at_max = scan.t_at_max;
  record.bounds = full_report(h_spectral, H, driving.op, meta, scan.p_max);

  write_file(out_dir / "quench.csv", quench_csv(scan));
  write_file(out_dir / "bounds.csv", records_csv({record}));

  std::cout << "quench: p_max=" << scan.p_max << " at t=" << scan.t_at_max
            << " theorem1=" << record.bounds.theorem1 << "\n";
  return 0;
}

}  // namespace qbatt::experiments
