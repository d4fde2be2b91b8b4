#include "wavesel/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "wavesel/io.hpp"

namespace fs = std::filesystem;

namespace wavesel {

const char* scenario_kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Poisson: return "poisson";
    case ScenarioKind::ThomasModerate: return "thomas_moderate";
    case ScenarioKind::ThomasHigh: return "thomas_high";
  }
  throw std::logic_error("scenario_kind_name: bad enum");
}

ScenarioKind scenario_kind_from_name(const std::string& name) {
  if (name == "poisson") return ScenarioKind::Poisson;
  if (name == "thomas_moderate") return ScenarioKind::ThomasModerate;
  if (name == "thomas_high") return ScenarioKind::ThomasHigh;
  throw ConfigError("unknown scenario kind \"" + name +
                    "\" (valid: poisson, thomas_moderate, thomas_high)");
}

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return it.key() == a; }) != allowed.end())
      continue;
    std::string msg = "unknown key \"" + it.key() + "\" in " + where + " (valid:";
    bool first = true;
    for (const char* a : allowed) {
      msg += first ? " " : ", ";
      msg += a;
      first = false;
    }
    throw ConfigError(msg + ")");
  }
}

double get_number(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError("\"" + key + "\" must be a number");
  return j.at(key).get<double>();
}

int get_int(const json& j, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer())
    throw ConfigError("\"" + key + "\" must be an integer");
  return j.at(key).get<int>();
}

std::uint64_t get_uint64(const json& j, const std::string& key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_unsigned() && !j.at(key).is_number_integer())
    throw ConfigError("\"" + key + "\" must be a non-negative integer");
  if (j.at(key).is_number_integer() && j.at(key).get<long long>() < 0)
    throw ConfigError("\"" + key + "\" must be a non-negative integer");
  return j.at(key).get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ConfigError("\"" + key + "\" must be a string");
  return j.at(key).get<std::string>();
}

}  // namespace

ScenarioConfig parse_scenario_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t stop = e.byte > 0 ? std::min<std::size_t>(e.byte - 1, json_text.size())
                                        : std::size_t{0};
    for (std::size_t i = 0; i < stop; ++i)
      if (json_text[i] == '\n') ++line;
    throw ConfigError("config parse error at line " + std::to_string(line) + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  check_keys(j, "config",
             {"name", "kind", "mu_targets", "p_n", "j0", "J", "dummy_count", "replicates",
              "master_seed", "methods", "grf", "thomas", "rmspe_grid", "mu_hat", "output_dir",
              "scad_shape", "solver"});

  ScenarioConfig c;
  c.name = get_string(j, "name", c.name);
  if (c.name.empty()) throw ConfigError("\"name\" must be a non-empty string");
  c.kind = scenario_kind_from_name(get_string(j, "kind", "poisson"));
  if (c.kind == ScenarioKind::ThomasModerate) {
    c.thomas_kappa = 80.0;
    c.thomas_sigma = 0.12;
  } else if (c.kind == ScenarioKind::ThomasHigh) {
    c.thomas_kappa = 30.0;
    c.thomas_sigma = 0.06;
  }

  if (j.contains("mu_targets")) {
    if (!j.at("mu_targets").is_array() || j.at("mu_targets").empty())
      throw ConfigError("\"mu_targets\" must be a non-empty array of positive numbers");
    c.mu_targets.clear();
    for (const auto& v : j.at("mu_targets")) {
      if (!v.is_number() || v.get<double>() <= 0.0)
        throw ConfigError("\"mu_targets\" must be a non-empty array of positive numbers");
      c.mu_targets.push_back(v.get<double>());
    }
  }

  c.p_n = get_int(j, "p_n", c.p_n);
  if (c.p_n < 1) throw ConfigError("\"p_n\" must be >= 1");
  c.j0 = get_int(j, "j0", c.j0);
  c.J = get_int(j, "J", c.J);
  if (c.j0 < 0 || c.j0 > c.J) throw ConfigError("\"j0\"/\"J\" must satisfy 0 <= j0 <= J");
  c.dummy_count = get_int(j, "dummy_count", c.dummy_count);
  if (c.dummy_count < 1) throw ConfigError("\"dummy_count\" must be >= 1");
  c.replicates = get_int(j, "replicates", c.replicates);
  if (c.replicates < 1) throw ConfigError("\"replicates\" must be >= 1");
  c.master_seed = get_uint64(j, "master_seed", c.master_seed);

  if (j.contains("methods")) {
    if (!j.at("methods").is_array() || j.at("methods").empty())
      throw ConfigError("\"methods\" must be a non-empty array of method names");
    c.methods.clear();
    for (const auto& v : j.at("methods")) {
      if (!v.is_string())
        throw ConfigError("\"methods\" must be a non-empty array of method names");
      Method m;
      try {
        m = method_from_name(v.get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      if (std::find(c.methods.begin(), c.methods.end(), m) != c.methods.end())
        throw ConfigError("duplicate method \"" + v.get<std::string>() + "\" in \"methods\"");
      c.methods.push_back(m);
    }
  }

  if (j.contains("grf")) {
    const json& g = j.at("grf");
    if (!g.is_object()) throw ConfigError("\"grf\" must be an object");
    check_keys(g, "\"grf\"", {"sill", "range", "resolution"});
    c.grf.sill = get_number(g, "sill", c.grf.sill);
    c.grf.range = get_number(g, "range", c.grf.range);
    c.grf.resolution = get_int(g, "resolution", c.grf.resolution);
    if (c.grf.sill <= 0.0) throw ConfigError("\"grf.sill\" must be > 0");
    if (c.grf.range <= 0.0) throw ConfigError("\"grf.range\" must be > 0");
    if (c.grf.resolution < 1 || c.grf.resolution > 128)
      throw ConfigError("\"grf.resolution\" must be in [1, 128]");
  }

  if (j.contains("thomas")) {
    if (c.kind == ScenarioKind::Poisson)
      throw ConfigError(
          "\"thomas\" parameters are only valid for kind thomas_moderate or thomas_high");
    const json& t = j.at("thomas");
    if (!t.is_object()) throw ConfigError("\"thomas\" must be an object");
    check_keys(t, "\"thomas\"", {"kappa", "sigma"});
    c.thomas_kappa = get_number(t, "kappa", c.thomas_kappa);
    c.thomas_sigma = get_number(t, "sigma", c.thomas_sigma);
    if (c.thomas_kappa <= 0.0) throw ConfigError("\"thomas.kappa\" must be > 0");
    if (c.thomas_sigma <= 0.0) throw ConfigError("\"thomas.sigma\" must be > 0");
  }

  c.rmspe_grid = get_int(j, "rmspe_grid", c.rmspe_grid);
  if (c.rmspe_grid < 1) throw ConfigError("\"rmspe_grid\" must be >= 1");

  if (j.contains("mu_hat")) {
    const std::string rule = get_string(j, "mu_hat", "observed_count");
    if (rule == "observed_count") c.control.mu_hat_rule = MuHatRule::ObservedCount;
    else if (rule == "window_area") c.control.mu_hat_rule = MuHatRule::WindowArea;
    else
      throw ConfigError("unknown \"mu_hat\" rule \"" + rule +
                        "\" (valid: observed_count, window_area)");
  }

  c.output_dir = get_string(j, "output_dir", c.output_dir);
  if (c.output_dir.empty()) throw ConfigError("\"output_dir\" must be a non-empty string");
  c.scad_shape = get_number(j, "scad_shape", c.scad_shape);
  if (c.scad_shape <= 2.0) throw ConfigError("\"scad_shape\" must be > 2");

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    if (!s.is_object()) throw ConfigError("\"solver\" must be an object");
    check_keys(s, "\"solver\"",
               {"path_length", "path_min_ratio", "max_outer", "max_cd_passes",
                "full_sweep_every", "tol_inner", "kkt_tol", "stall_patience", "newton_tol",
                "max_newton", "separation_cap"});
    c.path.length = get_int(s, "path_length", c.path.length);
    if (c.path.length < 1) throw ConfigError("\"solver.path_length\" must be >= 1");
    c.path.min_ratio = get_number(s, "path_min_ratio", c.path.min_ratio);
    if (!(c.path.min_ratio > 0.0 && c.path.min_ratio <= 1.0))
      throw ConfigError("\"solver.path_min_ratio\" must be in (0, 1]");
    c.control.max_outer = get_int(s, "max_outer", c.control.max_outer);
    c.control.max_cd_passes = get_int(s, "max_cd_passes", c.control.max_cd_passes);
    c.control.full_sweep_every = get_int(s, "full_sweep_every", c.control.full_sweep_every);
    c.control.tol_inner = get_number(s, "tol_inner", c.control.tol_inner);
    c.control.kkt_tol = get_number(s, "kkt_tol", c.control.kkt_tol);
    c.control.stall_patience = get_int(s, "stall_patience", c.control.stall_patience);
    c.control.newton_tol = get_number(s, "newton_tol", c.control.newton_tol);
    c.control.max_newton = get_int(s, "max_newton", c.control.max_newton);
    c.control.separation_cap = get_number(s, "separation_cap", c.control.separation_cap);
    if (c.control.max_outer < 1 || c.control.max_cd_passes < 1 ||
        c.control.full_sweep_every < 1 || c.control.max_newton < 1 ||
        c.control.stall_patience < 1)
      throw ConfigError("\"solver\" iteration limits must be >= 1");
    if (c.control.tol_inner <= 0.0 || c.control.kkt_tol <= 0.0 ||
        c.control.newton_tol <= 0.0 || c.control.separation_cap <= 0.0)
      throw ConfigError("\"solver\" tolerances must be > 0");
  }
  return c;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file \"" + path + "\"");
  std::ostringstream buf;
  buf << is.rdbuf();
  try {
    return parse_scenario_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

namespace {

double scenario_truth(int p, Point t) {
  return p <= kActiveBetaCount ? true_beta(p, t) : 0.0;
}

int worker_count_from_env() {
  if (const char* env = std::getenv("WAVESEL_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != nullptr && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

std::string run_json_name(double mu, Method m, int rep1) {
  return "run_mu" + fmt_double(mu) + "_" + method_name(m) + "_rep" + std::to_string(rep1) +
         ".json";
}

json run_json_body(const ScenarioConfig& cfg, const ReplicateRecord& rec,
                   const SelectionResult& sel) {
  json j;
  j["scenario"] = cfg.name;
  j["kind"] = scenario_kind_name(cfg.kind);
  j["mu_n"] = rec.mu;
  j["replicate"] = rec.replicate;
  j["seed"] = rec.seed;
  j["method"] = method_name(sel.method);
  j["n_points"] = rec.n_points;
  j["mu_hat"] = sel.mu_hat;
  if (sel.lambda_index >= 0) {
    j["lambda_star"] = sel.lambda_star;
    j["lambda_index"] = sel.lambda_index + 1;  // 1-based, matching path CSVs
    j["qbic_star"] = sel.selection_scores[sel.lambda_index];
  } else {
    j["lambda_star"] = nullptr;  // zero-event pattern: intercept-only model
  }
  j["intercept"] = sel.path_fit.intercept;
  j["refit_intercept"] = sel.refit.intercept;
  j["global_active"] = sel.global_active;
  json coefs = json::array();
  const auto& atoms = sel.basis->atoms();
  for (int k : sel.active_columns) {
    const int p = k / sel.R + 1;
    const int r = k % sel.R;
    const WaveletIndex& a = atoms[static_cast<std::size_t>(r)];
    coefs.push_back({{"predictor", p},
                     {"name", sel.names[static_cast<std::size_t>(p - 1)]},
                     {"r", r + 1},
                     {"j", a.j},
                     {"orientation", orientation_name(a.orientation)},
                     {"k1", a.k1},
                     {"k2", a.k2},
                     {"estimate", sel.path_fit.coefficients[k]},
                     {"refit_estimate", sel.refit.coefficients[k]}});
  }
  j["coefficients"] = coefs;
  j["diagnostics"] = {{"path_points", sel.diagnostics.path_points},
                      {"nonconverged", sel.diagnostics.nonconverged},
                      {"max_kkt_violation", sel.diagnostics.max_kkt_violation},
                      {"ascent_violations", sel.diagnostics.ascent_violations},
                      {"truncated", sel.diagnostics.truncated},
                      {"error", sel.diagnostics.error}};
  j["metrics"] = {{"rmspe", rec.report.rmspe},
                  {"tpr_global", rec.report.tpr_global},
                  {"tpr_local", rec.report.tpr_local ? json(*rec.report.tpr_local)
                                                     : json(nullptr)},
                  {"tpr_local_used", rec.report.tpr_local_used},
                  {"tpr_local_skipped", rec.report.tpr_local_skipped},
                  {"runtime_s", rec.report.runtime_seconds}};
  return j;
}

struct TaskOutput {
  std::vector<ReplicateRecord> records;                      // one per method
  std::vector<std::pair<std::string, std::string>> files;   // (name, JSON text)
};

TaskOutput run_task(const ScenarioConfig& cfg, const GrfSampler& sampler, int mu_idx,
                    int rep0) {
  const double mu = cfg.mu_targets[static_cast<std::size_t>(mu_idx)];
  const std::uint64_t task_index =
      static_cast<std::uint64_t>(mu_idx) * static_cast<std::uint64_t>(cfg.replicates) +
      static_cast<std::uint64_t>(rep0);
  const std::uint64_t task_seed = cfg.master_seed ^ task_index;

  TaskOutput out;
  out.records.reserve(cfg.methods.size());
  auto fail_all = [&](const std::string& why) {
    out.records.clear();
    for (Method m : cfg.methods) {
      ReplicateRecord rec;
      rec.mu = mu;
      rec.replicate = rep0 + 1;
      rec.method = m;
      rec.seed = task_seed;
      rec.ok = false;
      rec.error = why;
      out.records.push_back(std::move(rec));
    }
  };

  std::vector<GridImage> fields;
  std::vector<std::string> names;
  PointPattern pattern;
  try {
    fields.reserve(static_cast<std::size_t>(cfg.p_n));
    names.reserve(static_cast<std::size_t>(cfg.p_n));
    for (int p = 1; p <= cfg.p_n; ++p) {
      fields.push_back(sampler.sample(split_seed(task_seed, static_cast<std::uint64_t>(p))));
      names.push_back("x" + std::to_string(p));
    }

    const int n = sampler.resolution();
    GridImage log_field(n, n, Window::unit());
    const int active = std::min(kActiveBetaCount, cfg.p_n);
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const Point center = log_field.cell_center(ix, iy);
        double v = 0.0;
        for (int p = 1; p <= active; ++p)
          v += true_beta(p, center) * fields[static_cast<std::size_t>(p - 1)].values(iy, ix);
        log_field.values(iy, ix) = v;
      }
    const double b0 = calibrate_intercept(mu, log_field);
    log_field.values.array() += b0;

    if (cfg.kind == ScenarioKind::Poisson) {
      GridImage intensity = log_field;
      intensity.values = intensity.values.array().exp();
      pattern = simulate_ipp(intensity, split_seed(task_seed, 0));
    } else {
      ThomasSpec spec;
      spec.kappa = cfg.thomas_kappa;
      spec.sigma = cfg.thomas_sigma;
      pattern = simulate_thomas(log_field, spec, split_seed(task_seed, 0)).pattern;
    }
  } catch (const std::exception& e) {
    fail_all(std::string("simulation failed: ") + e.what());
    return out;
  }

  for (Method m : cfg.methods) {
    ReplicateRecord rec;
    rec.mu = mu;
    rec.replicate = rep0 + 1;
    rec.method = m;
    rec.seed = task_seed;
    rec.n_points = static_cast<int>(pattern.points.size());
    try {
      MethodConfig mc;
      mc.method = m;
      mc.j0 = cfg.j0;
      mc.J = cfg.J;
      mc.dummy_count = cfg.dummy_count;
      mc.scad_shape = cfg.scad_shape;
      mc.path = cfg.path;
      mc.control = cfg.control;
      const SelectionResult sel = run_method(pattern, fields, names, mc);
      rec.report = evaluate(sel, pattern, scenario_truth, cfg.rmspe_grid);
      rec.diagnostics = sel.diagnostics;
      rec.ok = true;
      out.files.emplace_back(run_json_name(mu, m, rep0 + 1),
                             run_json_body(cfg, rec, sel).dump(2) + "\n");
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::string csv_optional(const std::optional<double>& v) {
  return v ? fmt_double(*v) : std::string();
}

}  // namespace

void write_replicates_csv(std::ostream& os, const std::string& scenario,
                          const std::vector<ReplicateRecord>& records) {
  os << "scenario,mu_n,method,seed,rmspe,tpr_global,tpr_local,runtime_s\n";
  for (const ReplicateRecord& r : records) {
    if (!r.ok) continue;
    os << scenario << ',' << fmt_double(r.mu) << ',' << method_name(r.method) << ',' << r.seed
       << ',' << fmt_double(r.report.rmspe) << ',' << fmt_double(r.report.tpr_global) << ','
       << csv_optional(r.report.tpr_local) << ',' << fmt_double(r.report.runtime_seconds)
       << '\n';
  }
}

void write_errors_csv(std::ostream& os, const std::string& scenario,
                      const std::vector<ReplicateRecord>& records) {
  os << "scenario,mu_n,method,seed,error\n";
  for (const ReplicateRecord& r : records) {
    if (r.ok) continue;
    std::string msg = r.error;
    for (char& ch : msg)
      if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    os << scenario << ',' << fmt_double(r.mu) << ',' << method_name(r.method) << ',' << r.seed
       << ',' << msg << '\n';
  }
}

namespace {

struct GroupStats {
  int ok = 0;
  int errors = 0;
  double rmspe_sum = 0.0;
  double tpr_global_sum = 0.0;
  double tpr_local_sum = 0.0;
  int tpr_local_n = 0;
  double runtime_sum = 0.0;
};

GroupStats group_stats(const std::vector<ReplicateRecord>& records, double mu, Method m) {
  GroupStats g;
  for (const ReplicateRecord& r : records) {
    if (r.mu != mu || r.method != m) continue;
    if (!r.ok) {
      ++g.errors;
      continue;
    }
    ++g.ok;
    g.rmspe_sum += r.report.rmspe;
    g.tpr_global_sum += r.report.tpr_global;
    g.runtime_sum += r.report.runtime_seconds;
    if (r.report.tpr_local) {
      g.tpr_local_sum += *r.report.tpr_local;
      ++g.tpr_local_n;
    }
  }
  return g;
}

}  // namespace

void write_summary_csv(std::ostream& os, const std::string& scenario,
                       const std::vector<double>& mu_targets, const std::vector<Method>& methods,
                       const std::vector<ReplicateRecord>& records) {
  os << "scenario,mu_n,method,replicates_ok,errors,rmspe_mean,tpr_global_mean,tpr_local_mean\n";
  for (double mu : mu_targets)
    for (Method m : methods) {
      const GroupStats g = group_stats(records, mu, m);
      os << scenario << ',' << fmt_double(mu) << ',' << method_name(m) << ',' << g.ok << ','
         << g.errors << ',';
      if (g.ok > 0)
        os << fmt_double(g.rmspe_sum / g.ok) << ',' << fmt_double(g.tpr_global_sum / g.ok);
      else
        os << ',';
      os << ',';
      if (g.tpr_local_n > 0) os << fmt_double(g.tpr_local_sum / g.tpr_local_n);
      os << '\n';
    }
}

ScenarioRunResult run_scenario(const ScenarioConfig& config, std::ostream* progress) {
  if (config.mu_targets.empty()) throw std::invalid_argument("run_scenario: no mu targets");
  if (config.methods.empty()) throw std::invalid_argument("run_scenario: no methods");
  const fs::path outdir(config.output_dir);
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory \"" + outdir.string() +
                             "\": " + ec.message());

  const GrfSampler sampler(config.grf.sill, config.grf.range, config.grf.resolution);
  const int n_mu = static_cast<int>(config.mu_targets.size());
  const int n_tasks = n_mu * config.replicates;
  std::vector<TaskOutput> slots(static_cast<std::size_t>(n_tasks));
  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex progress_mutex;
  const auto t0 = std::chrono::steady_clock::now();

  auto work = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_tasks) return;
      const int mu_idx = i / config.replicates;
      const int rep0 = i % config.replicates;
      try {
        slots[static_cast<std::size_t>(i)] = run_task(config, sampler, mu_idx, rep0);
      } catch (const std::exception& e) {
        // run_task catches per-stage failures itself; this is a last resort.
        TaskOutput fallback;
        for (Method m : config.methods) {
          ReplicateRecord rec;
          rec.mu = config.mu_targets[static_cast<std::size_t>(mu_idx)];
          rec.replicate = rep0 + 1;
          rec.method = m;
          rec.seed = config.master_seed ^ static_cast<std::uint64_t>(i);
          rec.error = std::string("task failed: ") + e.what();
          fallback.records.push_back(std::move(rec));
        }
        slots[static_cast<std::size_t>(i)] = std::move(fallback);
      }
      const int finished = done.fetch_add(1) + 1;
      if (progress != nullptr) {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::lock_guard<std::mutex> lock(progress_mutex);
        *progress << "[" << config.name << "] task " << finished << "/" << n_tasks << " (mu="
                  << fmt_double(config.mu_targets[static_cast<std::size_t>(mu_idx)]) << ", rep "
                  << rep0 + 1 << ") done, " << fmt_double(elapsed, 4) << "s elapsed"
                  << std::endl;
      }
    }
  };

  const int n_workers = std::min(worker_count_from_env(), n_tasks);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers > 0 ? n_workers - 1 : 0));
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(work);
  work();
  for (std::thread& th : pool) th.join();

  ScenarioRunResult out;
  out.tasks = n_tasks;
  out.output_dir = outdir.string();
  for (TaskOutput& slot : slots) {
    for (ReplicateRecord& rec : slot.records) {
      ++out.runs;
      if (!rec.ok) ++out.errors;
      out.records.push_back(std::move(rec));
    }
    for (auto& [name, text] : slot.files) {
      std::ofstream os(outdir / name, std::ios::binary);
      if (!os) throw std::runtime_error("cannot write " + (outdir / name).string());
      os << text;
    }
  }

  {
    std::ofstream os(outdir / "replicates.csv", std::ios::binary);
    if (!os) throw std::runtime_error("cannot write replicates.csv");
    write_replicates_csv(os, config.name, out.records);
  }
  {
    std::ofstream os(outdir / "errors.csv", std::ios::binary);
    if (!os) throw std::runtime_error("cannot write errors.csv");
    write_errors_csv(os, config.name, out.records);
  }
  {
    std::ofstream os(outdir / "summary.csv", std::ios::binary);
    if (!os) throw std::runtime_error("cannot write summary.csv");
    write_summary_csv(os, config.name, config.mu_targets, config.methods, out.records);
  }
  {
    // Wall-clock means live apart from summary.csv so the latter is
    // byte-reproducible for a fixed seed.
    std::ofstream os(outdir / "timings.csv", std::ios::binary);
    if (!os) throw std::runtime_error("cannot write timings.csv");
    os << "scenario,mu_n,method,replicates_ok,runtime_s_mean\n";
    for (double mu : config.mu_targets)
      for (Method m : config.methods) {
        const GroupStats g = group_stats(out.records, mu, m);
        os << config.name << ',' << fmt_double(mu) << ',' << method_name(m) << ',' << g.ok
           << ',';
        if (g.ok > 0) os << fmt_double(g.runtime_sum / g.ok);
        os << '\n';
      }
  }
  return out;
}

}  // namespace wavesel
