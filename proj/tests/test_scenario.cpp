#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "wavesel/scenario.hpp"

using namespace wavesel;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("wavesel_test_" + tag);
  fs::remove_all(dir);
  return dir;
}

std::string tiny_config(const std::string& name, const fs::path& out, int p_n = 4) {
  std::ostringstream os;
  os << "{\n"
     << "  \"name\": \"" << name << "\",\n"
     << "  \"kind\": \"poisson\",\n"
     << "  \"mu_targets\": [50],\n"
     << "  \"p_n\": " << p_n << ",\n"
     << "  \"J\": 1,\n"
     << "  \"dummy_count\": 64,\n"
     << "  \"replicates\": 1,\n"
     << "  \"master_seed\": 9,\n"
     << "  \"methods\": [\"LASSO\"],\n"
     << "  \"grf\": {\"resolution\": 16},\n"
     << "  \"output_dir\": \"" << out.generic_string() << "\"\n"
     << "}\n";
  return os.str();
}

}  // namespace

TEST_CASE("scenario kinds round-trip") {
  for (auto k : {ScenarioKind::Poisson, ScenarioKind::ThomasModerate, ScenarioKind::ThomasHigh})
    CHECK(scenario_kind_from_name(scenario_kind_name(k)) == k);
  CHECK(std::string(scenario_kind_name(ScenarioKind::Poisson)) == "poisson");
  CHECK(std::string(scenario_kind_name(ScenarioKind::ThomasModerate)) == "thomas_moderate");
  CHECK(std::string(scenario_kind_name(ScenarioKind::ThomasHigh)) == "thomas_high");
  CHECK_THROWS_AS(scenario_kind_from_name("hawkes"), ConfigError);
}

TEST_CASE("config parsing: defaults and full round-trip") {
  const ScenarioConfig c = parse_scenario_config(R"({"name": "s"})");
  CHECK(c.name == "s");
  CHECK(c.kind == ScenarioKind::Poisson);
  CHECK(c.mu_targets == std::vector<double>{100.0, 500.0});
  CHECK(c.p_n == 50);
  CHECK(c.J == 2);
  CHECK(c.dummy_count == 256);
  CHECK(c.replicates == 20);
  CHECK(c.methods.size() == 5);
  CHECK(c.grf.resolution == 64);
  CHECK(c.output_dir == "runs");

  const ScenarioConfig f = parse_scenario_config(R"({
    "name": "full", "kind": "thomas_high", "mu_targets": [10, 20], "p_n": 7,
    "j0": 1, "J": 2, "dummy_count": 49, "replicates": 3, "master_seed": 123,
    "methods": ["LLI", "SCAD"], "grf": {"sill": 2.0, "range": 0.1, "resolution": 32},
    "thomas": {"kappa": 40, "sigma": 0.05}, "rmspe_grid": 32,
    "mu_hat": "window_area", "output_dir": "out", "scad_shape": 3.1,
    "solver": {"path_length": 17, "kkt_tol": 1e-6, "stall_patience": 11}
  })");
  CHECK(f.kind == ScenarioKind::ThomasHigh);
  CHECK(f.mu_targets == std::vector<double>{10.0, 20.0});
  CHECK(f.p_n == 7);
  CHECK(f.j0 == 1);
  CHECK(f.dummy_count == 49);
  CHECK(f.replicates == 3);
  CHECK(f.master_seed == 123);
  REQUIRE(f.methods.size() == 2);
  CHECK(f.methods[0] == Method::LLI);
  CHECK(f.methods[1] == Method::Scad);
  CHECK(f.grf.sill == 2.0);
  CHECK(f.grf.resolution == 32);
  CHECK(f.thomas_kappa == 40.0);
  CHECK(f.thomas_sigma == 0.05);
  CHECK(f.rmspe_grid == 32);
  CHECK(f.control.mu_hat_rule == MuHatRule::WindowArea);
  CHECK(f.scad_shape == 3.1);
  CHECK(f.path.length == 17);
  CHECK(f.control.kkt_tol == 1e-6);
  CHECK(f.control.stall_patience == 11);

  // Thomas kinds auto-select their clustering parameters.
  const ScenarioConfig tm = parse_scenario_config(R"({"name":"m","kind":"thomas_moderate"})");
  CHECK(tm.thomas_kappa == 80.0);
  CHECK(tm.thomas_sigma == 0.12);
  const ScenarioConfig th = parse_scenario_config(R"({"name":"h","kind":"thomas_high"})");
  CHECK(th.thomas_kappa == 30.0);
  CHECK(th.thomas_sigma == 0.06);
}

TEST_CASE("config errors are specific and line-anchored") {
  // Malformed JSON: the message names the line.
  try {
    parse_scenario_config("{\n  \"name\": \"x\",\n  bad\n}");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  // Unknown method lists the valid names.
  try {
    parse_scenario_config(R"({"name":"x","methods":["FOO"]})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("valid: LLI, LLS, LASSO, SCAD, AL") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_scenario_config("[1,2]"), ConfigError);
  CHECK_THROWS_AS(parse_scenario_config(R"({"name":""})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario_config(R"({"name":"x","mu_targets":[]})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario_config(R"({"name":"x","mu_targets":[-5]})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario_config(R"({"name":"x","p_n":0})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario_config(R"({"name":"x","replicates":0})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario_config(R"({"name":"x","j0":2,"J":1})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario_config(R"({"name":"x","methods":["LLI","LLI"]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario_config(R"({"name":"x","kind":"weird"})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario_config(R"({"name":"x","typo_key":1})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario_config(R"({"name":"x","grf":{"resolution":500}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario_config(R"({"name":"x","scad_shape":2.0})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario_config(R"({"name":"x","mu_hat":"guess"})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario_config(R"({"name":"x","solver":{"path_length":0}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario_config(R"({"name":"x","solver":{"stall_patience":0}})"),
                  ConfigError);
  // Thomas parameters are rejected for a Poisson scenario.
  try {
    parse_scenario_config(R"({"name":"x","kind":"poisson","thomas":{"kappa":10}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("thomas") != std::string::npos);
  }
  CHECK_THROWS_AS(load_scenario_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("CSV writers: fabricated records") {
  ReplicateRecord ok1;
  ok1.mu = 50;
  ok1.replicate = 1;
  ok1.method = Method::Lasso;
  ok1.seed = 7;
  ok1.ok = true;
  ok1.report.rmspe = 0.5;
  ok1.report.tpr_global = 0.4;
  ok1.report.runtime_seconds = 1.5;
  ReplicateRecord ok2 = ok1;
  ok2.replicate = 2;
  ok2.seed = 8;
  ok2.report.rmspe = 0.7;
  ok2.report.tpr_global = 0.6;
  ok2.report.tpr_local = 0.9;  // ignored for the mean: LASSO is global, but
                               // the writer just averages what is present
  ReplicateRecord bad = ok1;
  bad.replicate = 3;
  bad.seed = 9;
  bad.ok = false;
  bad.error = "boom, with a comma";
  const std::vector<ReplicateRecord> records{ok1, ok2, bad};

  std::ostringstream rep;
  write_replicates_csv(rep, "s", records);
  std::istringstream ris(rep.str());
  std::string line;
  std::getline(ris, line);
  CHECK(line == "scenario,mu_n,method,seed,rmspe,tpr_global,tpr_local,runtime_s");
  std::getline(ris, line);
  CHECK(line == "s,50,LASSO,7,0.5,0.4,,1.5");
  std::getline(ris, line);
  CHECK(line == "s,50,LASSO,8,0.7,0.6,0.9,1.5");
  CHECK(!std::getline(ris, line));  // failed rows are not replicate rows

  std::ostringstream err;
  write_errors_csv(err, "s", records);
  std::istringstream eis(err.str());
  std::getline(eis, line);
  CHECK(line == "scenario,mu_n,method,seed,error");
  std::getline(eis, line);
  CHECK(line == "s,50,LASSO,9,boom; with a comma");

  std::ostringstream sum;
  write_summary_csv(sum, "s", {50.0}, {Method::Lasso}, records);
  std::istringstream sis(sum.str());
  std::getline(sis, line);
  CHECK(line ==
        "scenario,mu_n,method,replicates_ok,errors,rmspe_mean,tpr_global_mean,tpr_local_mean");
  std::getline(sis, line);
  CHECK(line == "s,50,LASSO,2,1,0.6,0.5,0.9");
}

TEST_CASE("run_scenario: records, artifacts, and byte determinism") {
  const fs::path out1 = fresh_dir("run1");
  const fs::path out2 = fresh_dir("run2");
  const ScenarioConfig c1 = parse_scenario_config(tiny_config("tiny", out1));
  const ScenarioConfig c2 = parse_scenario_config(tiny_config("tiny", out2));

  const ScenarioRunResult r1 = run_scenario(c1);
  CHECK(r1.tasks == 1);
  CHECK(r1.runs == 1);
  CHECK(r1.errors == 0);
  REQUIRE(r1.records.size() == 1);
  const ReplicateRecord& rec = r1.records.front();
  CHECK(rec.ok);
  CHECK(rec.mu == 50.0);
  CHECK(rec.method == Method::Lasso);
  CHECK(rec.n_points > 0);
  CHECK(rec.report.rmspe > 0.0);
  CHECK(fs::exists(out1 / "summary.csv"));
  CHECK(fs::exists(out1 / "replicates.csv"));
  CHECK(fs::exists(out1 / "errors.csv"));
  CHECK(fs::exists(out1 / "timings.csv"));
  CHECK(fs::exists(out1 / "run_mu50_LASSO_rep1.json"));

  const ScenarioRunResult r2 = run_scenario(c2);
  CHECK(slurp(out1 / "summary.csv") == slurp(out2 / "summary.csv"));
  CHECK(slurp(out1 / "errors.csv") == slurp(out2 / "errors.csv"));
  CHECK(r1.records.front().seed == r2.records.front().seed);
  CHECK(r1.records.front().n_points == r2.records.front().n_points);

  fs::remove_all(out1);
  fs::remove_all(out2);
}

TEST_CASE("patterns are invariant to the number of noise covariates") {
  // The simulated pattern draws only on covariate streams 1..10, so adding
  // noise predictors must not change the data (p_n >= 10).
  const fs::path outA = fresh_dir("pnA");
  const fs::path outB = fresh_dir("pnB");
  const ScenarioConfig a = parse_scenario_config(tiny_config("pn", outA, 10));
  const ScenarioConfig b = parse_scenario_config(tiny_config("pn", outB, 12));
  const ScenarioRunResult ra = run_scenario(a);
  const ScenarioRunResult rb = run_scenario(b);
  REQUIRE(ra.records.size() == 1);
  REQUIRE(rb.records.size() == 1);
  CHECK(ra.records.front().seed == rb.records.front().seed);
  CHECK(ra.records.front().n_points == rb.records.front().n_points);
  fs::remove_all(outA);
  fs::remove_all(outB);
}
