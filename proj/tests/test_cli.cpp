#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qbatt/experiments.hpp"

using namespace qbatt;
using namespace qbatt::experiments;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

#ifdef QBATT_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string(QBATT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2);
}
#endif

}  // namespace

TEST_CASE("parse_driving_spec") {
  SUBCASE("sy_random with normalization") {
    const DrivingSpec spec = parse_driving_spec(json::parse(
        R"({"variant":"sy_random","coupling_std":1.5,
            "normalization":{"mode":"fixed_shifted_norm","target":2.0}})"));
    REQUIRE(std::holds_alternative<SYRandomDriving>(spec.variant));
    CHECK(std::get<SYRandomDriving>(spec.variant).coupling_std == 1.5);
    CHECK(spec.normalization.mode == NormalizationMode::FixedShiftedNorm);
    CHECK(spec.normalization.target == 2.0);
  }

  SUBCASE("explicit pauli sum round trip") {
    PauliSum p;
    p.num_sites = 2;
    p.terms.push_back({0.5, {{0, Pauli::X}, {1, Pauli::X}}});
    json j = {{"variant", "explicit_pauli_sum"}, {"pauli_sum", to_json(p)}};
    const DrivingSpec spec = parse_driving_spec(j);
    REQUIRE(std::holds_alternative<ExplicitPauliSumDriving>(spec.variant));
    CHECK(std::get<ExplicitPauliSumDriving>(spec.variant).sum.terms.size() == 1);
  }

  SUBCASE("rejections") {
    CHECK_THROWS_AS(parse_driving_spec(json::parse(R"({"variant":"bogus"})")), ConfigError);
    CHECK_THROWS_AS(
        parse_driving_spec(json::parse(R"({"variant":"sy_random","amplitud":1})")),
        ConfigError);
    CHECK_THROWS_AS(parse_driving_spec(json::parse(
                        R"({"variant":"sy_random","normalization":{"mode":"nope"}})")),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_driving_spec(json::parse(
            R"({"variant":"sy_random","normalization":{"mode":"fixed_shifted_norm","target":0}})")),
        ConfigError);
  }
}

TEST_CASE("strict config parsing") {
  const json verify_ok = json::parse(
      R"({"schema_version":1,"seed":3,"instances":5,"max_sites":4,
          "field_strengths":[1.0],"e_samples":3,"inject_fault":false})");

  SUBCASE("verify config defaults and limits") {
    const VerifyConfig cfg = parse_verify_config(verify_ok);
    CHECK(cfg.instances == 5);
    CHECK(cfg.max_sites == 4);

    json missing_seed = verify_ok;
    missing_seed.erase("seed");
    CHECK_THROWS_AS(parse_verify_config(missing_seed), ConfigError);

    json unknown = verify_ok;
    unknown["extra"] = 1;
    CHECK_THROWS_AS(parse_verify_config(unknown), ConfigError);

    json bad_version = verify_ok;
    bad_version["schema_version"] = 99;
    CHECK_THROWS_AS(parse_verify_config(bad_version), ConfigError);

    json empty = verify_ok;
    empty["instances"] = 0;
    CHECK_THROWS_AS(parse_verify_config(empty), ConfigError);
  }

  SUBCASE("figure1a requires a seed, figure1b does not") {
    const json a = json::parse(
        R"({"schema_version":1,"seed":11,"L_values":[3,4],"realizations":2})");
    const EnsembleConfig cfg_a = parse_figure1a_config(a);
    CHECK(cfg_a.master_seed == 11);
    CHECK(std::holds_alternative<SYRandomDriving>(cfg_a.driving.variant));
    CHECK(cfg_a.driving.normalization.mode == NormalizationMode::FixedShiftedNorm);

    json a_missing = a;
    a_missing.erase("seed");
    CHECK_THROWS_AS(parse_figure1a_config(a_missing), ConfigError);

    const json b = json::parse(R"({"schema_version":1,"L_values":[4,5]})");
    const EnsembleConfig cfg_b = parse_figure1b_config(b);
    CHECK(cfg_b.realizations == 1);
    CHECK(std::holds_alternative<MixedNNGlobalDriving>(cfg_b.driving.variant));
  }

  SUBCASE("scaling schedule with per-L overrides") {
    const json s = json::parse(
        R"({"schema_version":1,"seed":5,"L_values":[4,5,6],"realizations":10,
            "realizations_by_L":[[6,2]]})");
    const ScalingConfig cfg = parse_scaling_config(s);
    REQUIRE(cfg.schedule.size() == 3);
    CHECK(cfg.schedule[0] == std::pair<int, int>{4, 10});
    CHECK(cfg.schedule[2] == std::pair<int, int>{6, 2});

    const json too_few = json::parse(
        R"({"schema_version":1,"seed":5,"L_values":[4,5],"realizations":10})");
    CHECK_THROWS_AS(parse_scaling_config(too_few), ConfigError);
  }

  SUBCASE("quench config demands a seed only for stochastic driving") {
    const json deterministic = json::parse(
        R"({"schema_version":1,"battery":{"num_sites":2,"field_strength":1.0},
            "driving":{"variant":"mixed_nn_global","amplitude":1.0}})");
    CHECK_NOTHROW(parse_quench_config(deterministic));

    const json stochastic = json::parse(
        R"({"schema_version":1,"battery":{"num_sites":2,"field_strength":1.0},
            "driving":{"variant":"sy_random"}})");
    CHECK_THROWS_AS(parse_quench_config(stochastic), ConfigError);
  }
}

TEST_CASE("CSV schemas are pinned") {
  CHECK(records_csv({}) ==
        "L,seed,k,delta_e,general_bound,theorem1,corollary_klocal,decomposition_bound,"
        "commutator_norm,p_max\n");
  CHECK(stats_csv({}) ==
        "L,count,p_max_mean,p_max_std,p_max_max,commutator_norm_mean,commutator_norm_std,"
        "commutator_norm_max,half_raw_shifted_norm_mean,half_raw_shifted_norm_std,"
        "half_raw_shifted_norm_max\n");
  CHECK(hist_csv(std::vector<EnsembleLStats>{}, 0.1) == "L,bin_lo,count\n");
  CHECK(fit_csv({0.5, 0.25, 1.0}) ==
        "alpha,residual_norm,analytic_constant\n0.5,0.25,1\n");

  EnsembleRecord rec;
  rec.L = 4;
  rec.seed = 7;
  rec.k_locality = 2;
  rec.p_max = 1.5;
  rec.bounds.delta_e = 4.0;
  rec.bounds.general_bound = 8.0;
  rec.bounds.theorem1 = 4.0;
  rec.bounds.observed_commutator_norm = 2.25;
  CHECK(bound_report_csv(rec) == "4,7,2,4,8,4,nan,nan,2.25,1.5");

  QuenchResult q;
  q.times = RealVector::Zero(1);
  q.energy = RealVector::Constant(1, -1.0);
  q.power = RealVector::Zero(1);
  q.t_at_max = 0.25;
  q.e_at_max = -0.5;
  q.p_at_max = 2.0;
  CHECK(quench_csv(q) == "row,t,energy,power\ngrid,0,-1,0\nmax,0.25,-0.5,2\n");
}

#ifdef QBATT_CLI_PATH

TEST_CASE("CLI end-to-end: quench dump is deterministic") {
  TempDir dir("qbatt_cli_quench");
  const json cfg = {{"schema_version", 1},
                    {"seed", 9},
                    {"battery", {{"num_sites", 2}, {"field_strength", 1.0}}},
                    {"driving",
                     {{"variant", "sy_random"},
                      {"normalization", {{"mode", "fixed_shifted_norm"}, {"target", 2.0}}}}},
                    {"scan", {{"n_steps", 300}}}};
  write_json(dir.path / "cfg.json", cfg);

  const std::string out1 = (dir.path / "run1").string();
  const std::string out2 = (dir.path / "run2").string();
  REQUIRE(run_cli("quench --config " + (dir.path / "cfg.json").string() + " --out " + out1) ==
          0);
  REQUIRE(run_cli("quench --config " + (dir.path / "cfg.json").string() + " --out " + out2) ==
          0);

  const std::string quench1 = slurp(fs::path(out1) / "quench.csv");
  CHECK(quench1 == slurp(fs::path(out2) / "quench.csv"));
  CHECK(quench1.rfind("row,t,energy,power\n", 0) == 0);
  CHECK(quench1.find("\nmax,") != std::string::npos);
  CHECK(slurp(fs::path(out1) / "bounds.csv") == slurp(fs::path(out2) / "bounds.csv"));
}

TEST_CASE("CLI end-to-end: verify exits 0 on a clean corpus and 1 on a fault") {
  TempDir dir("qbatt_cli_verify");
  json cfg = {{"schema_version", 1}, {"seed", 12}, {"instances", 8},
              {"max_sites", 3},     {"e_samples", 3}};
  write_json(dir.path / "ok.json", cfg);
  cfg["inject_fault"] = true;
  write_json(dir.path / "fault.json", cfg);

  CHECK(run_cli("verify --config " + (dir.path / "ok.json").string() + " --out " +
                (dir.path / "ok_out").string()) == 0);
  CHECK(run_cli("verify --config " + (dir.path / "fault.json").string() + " --out " +
                (dir.path / "fault_out").string()) == 1);
  CHECK(fs::exists(dir.path / "fault_out" / "offending_instances.json"));
  CHECK(fs::exists(dir.path / "ok_out" / "verify_report.csv"));
}

TEST_CASE("CLI end-to-end: usage and config errors exit with 2") {
  TempDir dir("qbatt_cli_errors");
  CHECK(run_cli("verify --config " + (dir.path / "missing.json").string()) == 2);

  write_json(dir.path / "unknown.json",
             json::parse(R"({"schema_version":1,"seed":1,"bogus_field":true})"));
  CHECK(run_cli("verify --config " + (dir.path / "unknown.json").string() + " --out " +
                (dir.path / "out").string()) == 2);

  CHECK(run_cli("") == 2);               // missing subcommand
  CHECK(run_cli("figure1a") == 2);       // missing --config
}

TEST_CASE("CLI end-to-end: figure1a artifacts with svg") {
  TempDir dir("qbatt_cli_fig1a");
  const json cfg = {{"schema_version", 1},
                    {"seed", 21},
                    {"L_values", {3, 4}},
                    {"realizations", 3},
                    {"scan", {{"n_steps", 300}}}};
  write_json(dir.path / "cfg.json", cfg);
  const std::string out = (dir.path / "out").string();
  REQUIRE(run_cli("figure1a --config " + (dir.path / "cfg.json").string() + " --out " + out +
                  " --workers 2 --svg") == 0);
  for (const char* name : {"records.csv", "stats.csv", "hist.csv", "figure1a.csv",
                           "figure1a.svg"})
    CHECK(fs::exists(fs::path(out) / name));
  const std::string figure = slurp(fs::path(out) / "figure1a.csv");
  CHECK(figure.rfind("L,max_p_max,max_commutator_norm,bound\n", 0) == 0);
}

TEST_CASE("CLI end-to-end: figure1b, scaling and histogram artifacts") {
  TempDir dir("qbatt_cli_misc");

  write_json(dir.path / "fig1b.json",
             json{{"schema_version", 1}, {"L_values", {4, 5}}, {"scan", {{"n_steps", 300}}}});
  const std::string fig_out = (dir.path / "fig1b").string();
  REQUIRE(run_cli("figure1b --config " + (dir.path / "fig1b.json").string() + " --out " +
                  fig_out) == 0);
  CHECK(fs::exists(fs::path(fig_out) / "figure1b.csv"));
  CHECK(fs::exists(fs::path(fig_out) / "records.csv"));

  write_json(dir.path / "scaling.json",
             json{{"schema_version", 1},
                  {"seed", 33},
                  {"L_values", {3, 4, 5}},
                  {"realizations", 5}});
  const std::string sc_out = (dir.path / "scaling").string();
  REQUIRE(run_cli("scaling --config " + (dir.path / "scaling.json").string() + " --out " +
                  sc_out + " --svg") == 0);
  const std::string fit = slurp(fs::path(sc_out) / "fit.csv");
  CHECK(fit.rfind("alpha,residual_norm,analytic_constant\n", 0) == 0);
  CHECK(fs::exists(fs::path(sc_out) / "scaling_points.csv"));
  CHECK(fs::exists(fs::path(sc_out) / "scaling.svg"));

  write_json(dir.path / "hist.json", json{{"schema_version", 1},
                                          {"seed", 44},
                                          {"L_values", {4}},
                                          {"realizations", 20}});
  const std::string hist_out = (dir.path / "hist").string();
  REQUIRE(run_cli("histogram --config " + (dir.path / "hist.json").string() + " --out " +
                  hist_out) == 0);
  const std::string hist = slurp(fs::path(hist_out) / "hist.csv");
  CHECK(hist.rfind("L,bin_lo,count\n", 0) == 0);
  // counts over all bins add up to the realization count
  long total = 0;
  std::istringstream lines(hist);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line))
    total += std::stol(line.substr(line.rfind(',') + 1));
  CHECK(total == 20);
}

#endif  // QBATT_CLI_PATH
