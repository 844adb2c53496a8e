// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. CSV artifacts land under
// ./acceptance_out in the working directory (the build tree under ctest).

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "qbatt/bounds.hpp"
#include "qbatt/dynamics.hpp"
#include "qbatt/ensembles.hpp"
#include "qbatt/experiments.hpp"
#include "qbatt/rng.hpp"
#include "support/oracles.hpp"

using namespace qbatt;

namespace {

constexpr std::uint64_t kMasterSeed = 20260808ULL;

struct Criterion {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string fmt(double x) {
  std::ostringstream out;
  out.precision(6);
  out << x;
  return out.str();
}

struct CorpusInstance {
  int L = 0;
  double h = 0.0;
  std::uint64_t seed = 0;
  PauliSum driving;
};

// Lattice battery with h in {0.5, 1, 2}, L in [2, 6], random k-local driving
// with k <= L. Instances whose driving commutes with the battery (all-Z
// draws) are re-drawn from the next attempt stream.
CorpusInstance make_corpus_instance(int index) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    CorpusInstance inst;
    inst.seed = stream_seed(kMasterSeed, 5000 + attempt, index);
    GaussianStream g(inst.seed);
    inst.L = 2 + static_cast<int>(oracles::uniform_index(g, 5));
    const double fields[3] = {0.5, 1.0, 2.0};
    inst.h = fields[oracles::uniform_index(g, 3)];
    const int k = 1 + static_cast<int>(oracles::uniform_index(g, inst.L));
    inst.driving = oracles::random_pauli_sum(inst.L, k, 3 * inst.L, g);
    bool offdiagonal = false;
    for (const auto& term : inst.driving.terms)
      for (const auto& [site, letter] : term.letters)
        if (letter != Pauli::Z) offdiagonal = true;
    if (offdiagonal) return inst;
  }
}

struct ChainSample {
  std::string source;
  double p_max = 0.0;
  double commutator_norm = 0.0;
  double theorem1 = 0.0;
  double theorem1_unshifted = 0.0;
  double general_bound = 0.0;
};

long chain_violations(const std::vector<ChainSample>& samples) {
  long bad = 0;
  for (const auto& s : samples) {
    if (s.p_max > s.commutator_norm + kBoundSlack) ++bad;
    if (s.commutator_norm > s.theorem1 + kBoundSlack) ++bad;
    if (s.theorem1 > s.theorem1_unshifted + kBoundSlack) ++bad;
    if (s.theorem1_unshifted > s.general_bound + kBoundSlack) ++bad;
  }
  return bad;
}

void append_chain(std::vector<ChainSample>& chain, const std::string& source,
                  const std::vector<EnsembleRecord>& records) {
  for (const auto& rec : records)
    chain.push_back({source, rec.p_max, rec.bounds.observed_commutator_norm,
                     rec.bounds.theorem1, rec.bounds.theorem1_unshifted,
                     rec.bounds.general_bound});
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

int main() {
  const std::filesystem::path out_dir = "acceptance_out";
  std::filesystem::create_directories(out_dir);
  const int workers = 2;

  std::vector<Criterion> results;
  std::vector<ChainSample> chain;
  std::ostringstream log;
  const Stopwatch total;

  // ----- criteria 1 and 2: Lemma oracles over the randomized corpus -------
  {
    const Stopwatch timer;
    const int instances = 220;
    double worst_lemma1 = 0.0;  // residual / (1e-9 ||H|| ||V||)
    double worst_lemma2 = 0.0;  // spectrum deviation / (1e-9 ||V||)
    bool signs_exact = true;
    long checked = 0;

    for (int i = 0; i < instances; ++i) {
      const CorpusInstance inst = make_corpus_instance(i);
      const HermitianOperator H = build_battery({inst.L, inst.h, std::nullopt});
      const HermitianOperator V = to_dense(inst.driving);
      const double de = delta_e(H, V);
      const double h_norm = operator_norm(H);
      const double v_norm = operator_norm(V);
      if (de == 0.0) continue;
      ++checked;

      const Matrix residual = integral_commutator(H, V, de) - commutator(H, V);
      worst_lemma1 = std::max(worst_lemma1, residual.cwiseAbs().maxCoeff() /
                                                (1e-9 * h_norm * v_norm));

      const SpectralData hs = eigendecompose(H);
      const RealVector v_eigs = eigenvalues_of(V);
      GaussianStream g(stream_seed(kMasterSeed, 6000, i));
      for (int s = 0; s < 10; ++s) {
        const double e = g.uniform() * de;
        const HermitianOperator ve = build_v_of_e(hs, V, de, e);
        worst_lemma2 = std::max(worst_lemma2, (eigenvalues_of(ve) - v_eigs)
                                                      .cwiseAbs()
                                                      .maxCoeff() /
                                                  (1e-9 * v_norm));
        const HofE he = build_h_of_e(hs.values, de, e);
        for (Eigen::Index j = 0; j < he.diag_signs.size(); ++j)
          if (std::abs(he.diag_signs(j)) != 0.5) signs_exact = false;
      }
    }

    results.push_back({1, "lemma1 integral identity", worst_lemma1 <= 1.0 && checked >= 200,
                       std::to_string(checked) + " instances, worst residual " +
                           fmt(worst_lemma1) + "x tolerance",
                       timer.seconds()});
    results.push_back({2, "lemma2 spectrum preservation",
                       worst_lemma2 <= 1.0 && signs_exact && checked >= 200,
                       "worst spectrum deviation " + fmt(worst_lemma2) +
                           "x tolerance, h(e) signs exactly +-1/2: " +
                           (signs_exact ? "yes" : "no"),
                       timer.seconds()});
  }

  // ----- criterion 4: closed-form saturation cases -------------------------
  double p_two_qubit = 0.0;
  {
    const Stopwatch timer;
    const HermitianOperator h1 = build_battery({1, 1.0, std::nullopt});
    PauliSum sx;
    sx.num_sites = 1;
    sx.terms.push_back({1.0, {{0, Pauli::X}}});
    const HermitianOperator v1 = to_dense(sx);
    const QuenchResult scan1 = quench_scan(h1, v1, ground_state(h1));
    const BoundReport r1 =
        full_report(h1, v1, LatticeMetadata{1, battery_single_site({1, 1.0, {}}), sx},
                    scan1.p_max);
    chain.push_back({"saturation-1q", scan1.p_max, r1.observed_commutator_norm, r1.theorem1,
                     r1.theorem1_unshifted, r1.general_bound});

    const HermitianOperator h2 = build_battery({2, 1.0, std::nullopt});
    PauliSum sxx;
    sxx.num_sites = 2;
    sxx.terms.push_back({1.0, {{0, Pauli::X}, {1, Pauli::X}}});
    const HermitianOperator v2 = to_dense(sxx);
    const QuenchResult scan2 = quench_scan(h2, v2, ground_state(h2));
    const BoundReport r2 =
        full_report(h2, v2, LatticeMetadata{2, battery_single_site({2, 1.0, {}}), sxx},
                    scan2.p_max);
    chain.push_back({"saturation-2q", scan2.p_max, r2.observed_commutator_norm, r2.theorem1,
                     r2.theorem1_unshifted, r2.general_bound});
    p_two_qubit = scan2.p_max;

    const bool pass = std::abs(scan1.p_max - 2.0) <= 1e-6 &&
                      std::abs(r1.theorem1 - 2.0) <= 1e-6 &&
                      std::abs(scan2.p_max - 4.0) <= 1e-6 &&
                      std::abs(r2.theorem1 - 4.0) <= 1e-6;
    results.push_back({4, "saturation cases match the closed forms", pass,
                       "p_max(1 qubit) = " + fmt(scan1.p_max) + " vs bound 2, p_max(2 qubit) = " +
                           fmt(scan2.p_max) + " vs bound 4",
                       timer.seconds()});
  }

  // ----- criterion 5: SY-like random driving ensemble ---------------------
  {
    const Stopwatch timer;
    EnsembleConfig cfg;
    cfg.L_values = {4, 5, 6, 7, 8};
    cfg.realizations = 100;
    cfg.master_seed = kMasterSeed;
    cfg.driving.variant = SYRandomDriving{};
    cfg.driving.normalization = {NormalizationMode::FixedShiftedNorm, 2.0};
    cfg.battery_h = 1.0;
    cfg.workers = workers;
    const EnsembleResult ens = run_ensemble(cfg);
    append_chain(chain, "figure1a", ens.records);

    const auto fig_dir = out_dir / "figure1a";
    std::filesystem::create_directories(fig_dir);
    write_text(fig_dir / "records.csv", experiments::records_csv(ens.records));
    write_text(fig_dir / "stats.csv", experiments::stats_csv(ens.stats));
    write_text(fig_dir / "hist.csv", experiments::hist_csv(ens.stats, 0.1));

    double worst_p = 0.0, worst_comm = 0.0;
    for (const auto& s : ens.stats) {
      worst_p = std::max(worst_p, s.p_max.max);
      worst_comm = std::max(worst_comm, s.commutator_norm.max);
      log << "criterion5: L=" << s.L << " max_p_max=" << fmt(s.p_max.max)
          << " max_comm=" << fmt(s.commutator_norm.max)
          << " comm_std=" << fmt(s.commutator_norm.stddev) << "\n";
    }
    // Qualitative finite-size trends (soft assertions, documented slack):
    // per-L maxima do not grow with L beyond one standard deviation of the
    // smallest-L distribution, and the distribution sharpens with L.
    const double noise = ens.stats.front().commutator_norm.stddev;
    const bool trend =
        ens.stats.back().p_max.max <= ens.stats.front().p_max.max + noise &&
        ens.stats.back().commutator_norm.max <=
            ens.stats.front().commutator_norm.max + noise;
    const bool sharpens = ens.stats.back().commutator_norm.stddev <=
                          1.2 * ens.stats.front().commutator_norm.stddev;
    const bool pass = ens.failed == 0 && worst_p <= 4.0 + kBoundSlack &&
                      worst_comm <= 4.0 + kBoundSlack && trend && sharpens;
    results.push_back({5, "SY random ensemble bounded by the k=2 corollary", pass,
                       "500 realizations, max p_max " + fmt(worst_p) + ", max ||[H,V]|| " +
                           fmt(worst_comm) + " vs bound 4; non-increase within noise " +
                           fmt(noise) + ": " + (trend ? "yes" : "no") +
                           "; distribution sharpens: " + (sharpens ? "yes" : "no"),
                       timer.seconds()});
  }

  // ----- criterion 6: mixed nearest-neighbor + global driving -------------
  {
    const Stopwatch timer;
    EnsembleConfig cfg;
    cfg.L_values = {4, 5, 6, 7, 8, 9, 10};
    cfg.realizations = 1;
    cfg.master_seed = 0;
    cfg.driving.variant = MixedNNGlobalDriving{1.0};
    cfg.battery_h = 1.0;
    cfg.workers = workers;
    const EnsembleResult ens = run_ensemble(cfg);
    append_chain(chain, "figure1b", ens.records);

    const auto fig_dir = out_dir / "figure1b";
    std::filesystem::create_directories(fig_dir);
    write_text(fig_dir / "records.csv", experiments::records_csv(ens.records));
    write_text(fig_dir / "stats.csv", experiments::stats_csv(ens.stats));

    bool pass = ens.failed == 0;
    std::string detail;
    for (const auto& rec : ens.records) {
      const double half = rec.L / 2;
      const double closed_form = 4.0 / (1.0 + 1.0 / half) + 2.0 * rec.L / (half + 1.0);
      const double bound = rec.bounds.decomposition_bound.value_or(-1.0);
      if (std::abs(bound - closed_form) > 1e-9) pass = false;
      if (rec.p_max > bound + kBoundSlack) pass = false;
      if (bound > 8.0 + kBoundSlack) pass = false;
      log << "criterion6: L=" << rec.L << " p_max=" << fmt(rec.p_max)
          << " bound=" << fmt(bound) << " (closed form " << fmt(closed_form) << ")\n";
      if (rec.L == 10)
        detail = "p_max(L=10) = " + fmt(rec.p_max) + " vs bound " + fmt(bound) +
                 " approaching 8";
    }
    results.push_back(
        {6, "mixed driving bounded by the k-local decomposition", pass, detail,
         timer.seconds()});
  }

  // ----- criterion 3: bound chain across every scan above ------------------
  {
    const long bad = chain_violations(chain);
    results.push_back({3, "bound chain |P| <= ||[H,V]|| <= dE||V-vmin||/2 <= dE||V|| <= 2||H||||V||",
                       bad == 0,
                       std::to_string(chain.size()) + " scans, " + std::to_string(bad) +
                           " violations",
                       0.0});
  }

  // ----- criterion 7: pooled eigenvalue variance of raw SY instances ------
  {
    const Stopwatch timer;
    const SpectralVarianceResult r = spectral_variance_check(6, 200, kMasterSeed);
    const double target = 3.0 * 6 * 5 / 2.0;  // 45
    const bool pass = std::abs(r.variance - target) <= 3.0 * r.variance_se &&
                      std::abs(r.mean) <= std::max(3.0 * r.mean_se, 1e-9);
    results.push_back({7, "spectral variance of the raw SY ensemble", pass,
                       "variance " + fmt(r.variance) + " vs 45 +- " +
                           fmt(3.0 * r.variance_se) + " (3 SE), mean " + fmt(r.mean),
                       timer.seconds()});
  }

  // ----- criterion 8: norm scaling fit -------------------------------------
  {
    const Stopwatch timer;
    // Desk-scale schedule: full 1000 realizations through L=8, downscaled
    // above to keep dense eigensolves within the runtime budget. The spec's
    // tolerance window [0.90, 1.02] already accounts for the reduction.
    const std::vector<std::pair<int, int>> schedule = {
        {4, 1000}, {5, 1000}, {6, 1000}, {7, 1000}, {8, 1000},
        {9, 400},  {10, 150}, {11, 40},  {12, 12}};
    for (const auto& [L, n] : schedule)
      log << "criterion8: schedule L=" << L << " realizations=" << n << "\n";

    const auto samples = collect_norm_samples(schedule, kMasterSeed, workers);
    std::map<int, std::pair<double, long>> acc;
    for (const auto& s : samples) {
      acc[s.L].first += s.half_raw_shifted_norm;
      acc[s.L].second += 1;
    }
    std::vector<std::pair<int, double>> means;
    for (const auto& [L, a] : acc) {
      means.emplace_back(L, a.first / a.second);
      log << "criterion8: L=" << L << " mean_half_norm=" << fmt(a.first / a.second)
          << " ansatz_ratio="
          << fmt(a.first / a.second / std::sqrt(static_cast<double>(L) * L * (L - 1)))
          << "\n";
    }
    const ScalingFit fit = norm_scaling_fit(means);
    write_text(out_dir / "fit.csv", experiments::fit_csv(fit));
    write_text(out_dir / "scaling_points.csv", experiments::scaling_points_csv(samples, fit));

    const bool pass = fit.alpha >= 0.90 && fit.alpha <= 1.02;
    results.push_back({8, "norm scaling fit alpha in [0.90, 1.02]", pass,
                       "alpha = " + fmt(fit.alpha) + " (analytic overestimate " +
                           fmt(fit.analytic_constant) + ")",
                       timer.seconds()});
  }

  // ----- criterion 9: determinism across repeats and worker counts ---------
  {
    const Stopwatch timer;
    EnsembleConfig cfg;
    cfg.L_values = {4, 5};
    cfg.realizations = 30;
    cfg.master_seed = kMasterSeed + 1;
    cfg.driving.variant = SYRandomDriving{};
    cfg.driving.normalization = {NormalizationMode::FixedShiftedNorm, 2.0};
    cfg.battery_h = 1.0;
    cfg.scan.n_steps = 500;

    cfg.workers = 1;
    const EnsembleResult a = run_ensemble(cfg);
    const EnsembleResult b = run_ensemble(cfg);
    cfg.workers = 2;
    const EnsembleResult c = run_ensemble(cfg);

    const std::string rec_a = experiments::records_csv(a.records);
    const bool identical = rec_a == experiments::records_csv(b.records) &&
                           rec_a == experiments::records_csv(c.records) &&
                           experiments::stats_csv(a.stats) == experiments::stats_csv(c.stats) &&
                           experiments::hist_csv(a.stats, 0.1) ==
                               experiments::hist_csv(c.stats, 0.1);
    write_text(out_dir / "determinism_records.csv", rec_a);
    results.push_back({9, "byte-identical CSV artifacts across reruns and worker counts",
                       identical,
                       "repeated stochastic run (60 realizations), workers 1 and 2",
                       timer.seconds()});
  }

  // ----- criterion 10: advantage bookkeeping at the saturation point -------
  {
    const AdvantageReport report = advantage_ratio(p_two_qubit, 2, 1.0, 2.0, 2.0, 2);
    const bool pass = std::abs(report.gamma - 2.0) <= 1e-6 && report.c0_satisfied &&
                      report.k_locality == 2;
    results.push_back({10, "advantage ratio reports gamma = k = 2", pass,
                       "gamma = " + fmt(report.gamma) + ", C0 satisfied: " +
                           (report.c0_satisfied ? "yes" : "no"),
                       0.0});
  }

  // ----- report -------------------------------------------------------------
  std::sort(results.begin(), results.end(),
            [](const Criterion& a, const Criterion& b) { return a.id < b.id; });
  bool all_pass = true;
  std::ostringstream report;
  for (const auto& r : results) {
    all_pass = all_pass && r.pass;
    report << (r.pass ? "PASS" : "FAIL") << " criterion " << r.id << ": " << r.name << " ["
           << fmt(r.seconds) << "s] - " << r.detail << "\n";
  }
  report << (all_pass ? "ACCEPTANCE: all criteria passed" : "ACCEPTANCE: FAILURES present")
         << " (total " << fmt(total.seconds()) << "s)\n";

  std::cout << report.str();
  write_text(out_dir / "run_log.txt", log.str() + report.str());
  return all_pass ? 0 : 1;
}
