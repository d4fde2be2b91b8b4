// wavesel: command-line front end for the wavelet-localized point-process
// variable-selection toolkit.
//
// Subcommands:
//   scenario   run a simulation study from a JSON configuration
//   fit        fit one observed point pattern with covariates
//   export     rasterize fitted coefficient surfaces and the intensity
//
// Exit codes: 0 success, 1 usage/input error, 2 scenario completed with
// per-run errors or truncated paths.

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "CLI11.hpp"
#include "json.hpp"

#include "wavesel/design.hpp"
#include "wavesel/geometry.hpp"
#include "wavesel/io.hpp"
#include "wavesel/scenario.hpp"
#include "wavesel/select.hpp"
#include "wavesel/wavelet.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wavesel;

namespace {

[[noreturn]] void fail(const std::string& message) {
  throw std::runtime_error(message);
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

std::ifstream open_or_fail(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail("cannot open " + path);
  return is;
}

// ---------------------------------------------------------------------------
// scenario
// ---------------------------------------------------------------------------

struct ScenarioArgs {
  std::string config_path;
  std::string output_dir;
  int workers = 0;
};

int cmd_scenario(const ScenarioArgs& args) {
  ScenarioConfig config = load_scenario_config(args.config_path);
  if (!args.output_dir.empty()) config.output_dir = args.output_dir;
  if (args.workers > 0) {
#ifdef _WIN32
    _putenv_s("WAVESEL_WORKERS", std::to_string(args.workers).c_str());
#else
    setenv("WAVESEL_WORKERS", std::to_string(args.workers).c_str(), 1);
#endif
  }

  ScenarioRunResult result = run_scenario(config, &std::cerr);

  bool truncated = false;
  for (const ReplicateRecord& rec : result.records)
    truncated = truncated || rec.diagnostics.truncated;
  std::cerr << "scenario " << config.name << ": " << result.tasks << " tasks, " << result.runs
            << " runs, " << result.errors << " errors -> " << result.output_dir << "\n";
  return (result.errors > 0 || truncated) ? 2 : 0;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitArgs {
  std::string points_path;
  std::string covariates_path;                // long-form samples (x,y,name,value)
  std::vector<std::string> covariate_grids;   // NAME=FILE grid CSVs
  std::string method = "lli";
  int j0 = 0;
  int J = 2;
  int dummies = 256;
  int raster_grid = 64;
  std::string window_spec;
  std::string out_dir = "fit_out";
};

int find_column(const std::vector<std::string>& header, const std::string& name,
                const std::string& path) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  fail(path + ": header is missing column \"" + name + "\"");
}

std::vector<Point> read_points_file(const std::string& path) {
  std::ifstream is = open_or_fail(path);
  std::string line;
  if (!std::getline(is, line)) fail(path + ": empty file (expected a header row)");
  const std::vector<std::string> header = split_csv_line(line);
  const int cx = find_column(header, "x", path);
  const int cy = find_column(header, "y", path);
  std::vector<Point> pts;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (static_cast<int>(f.size()) <= std::max(cx, cy))
      fail(path + ": row " + std::to_string(row) + " has too few fields");
    try {
      pts.push_back({std::stod(f[static_cast<std::size_t>(cx)]),
                     std::stod(f[static_cast<std::size_t>(cy)])});
    } catch (const std::exception&) {
      fail(path + ": row " + std::to_string(row) + " has a non-numeric coordinate");
    }
  }
  return pts;
}

struct LongSamples {
  std::vector<std::string> names;  // first-appearance order
  std::map<std::string, std::vector<std::pair<Point, double>>> samples;
};

LongSamples read_long_covariates(const std::string& path) {
  std::ifstream is = open_or_fail(path);
  std::string line;
  if (!std::getline(is, line)) fail(path + ": empty file (expected a header row)");
  const std::vector<std::string> header = split_csv_line(line);
  const int cx = find_column(header, "x", path);
  const int cy = find_column(header, "y", path);
  const int cn = find_column(header, "name", path);
  const int cv = find_column(header, "value", path);
  const int need = std::max({cx, cy, cn, cv});
  LongSamples out;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (static_cast<int>(f.size()) <= need)
      fail(path + ": row " + std::to_string(row) + " has too few fields");
    const std::string& name = f[static_cast<std::size_t>(cn)];
    if (name.empty()) fail(path + ": row " + std::to_string(row) + " has an empty name");
    double x = 0, y = 0, v = 0;
    try {
      x = std::stod(f[static_cast<std::size_t>(cx)]);
      y = std::stod(f[static_cast<std::size_t>(cy)]);
      v = std::stod(f[static_cast<std::size_t>(cv)]);
    } catch (const std::exception&) {
      fail(path + ": row " + std::to_string(row) + " has a non-numeric field");
    }
    auto [it, inserted] = out.samples.try_emplace(name);
    if (inserted) out.names.push_back(name);
    it->second.push_back({Point{x, y}, v});
  }
  if (out.names.empty()) fail(path + ": no covariate samples");
  return out;
}

Window parse_window_spec(const std::string& spec) {
  const std::vector<std::string> f = split_csv_line(spec);
  if (f.size() != 4) fail("--window expects \"x0,x1,y0,y1\"");
  Window w;
  try {
    w.x0 = std::stod(f[0]);
    w.x1 = std::stod(f[1]);
    w.y0 = std::stod(f[2]);
    w.y1 = std::stod(f[3]);
  } catch (const std::exception&) {
    fail("--window expects four numbers \"x0,x1,y0,y1\"");
  }
  w.validate();
  return w;
}

Window bbox_window(const std::vector<Point>& pts) {
  if (pts.empty()) return Window::unit();
  double x0 = pts[0].x, x1 = pts[0].x, y0 = pts[0].y, y1 = pts[0].y;
  for (const Point& p : pts) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  // Expand each side by 1% of the span; degenerate spans get a fixed pad so
  // the window is never empty.
  const double px = x1 > x0 ? 0.01 * (x1 - x0) : 0.5;
  const double py = y1 > y0 ? 0.01 * (y1 - y0) : 0.5;
  return Window{x0 - px, x1 + px, y0 - py, y1 + py};
}

json window_json(const Window& w) {
  return {{"x0", w.x0}, {"x1", w.x1}, {"y0", w.y0}, {"y1", w.y1}};
}

Window window_from_json(const json& j) {
  Window w;
  w.x0 = j.at("x0").get<double>();
  w.x1 = j.at("x1").get<double>();
  w.y0 = j.at("y0").get<double>();
  w.y1 = j.at("y1").get<double>();
  w.validate();
  return w;
}

void write_selection_json(const std::string& path, const SelectionResult& sel,
                          const FitArgs& args, const Window& window,
                          const std::string& window_source, int n_points) {
  json j;
  j["tool"] = "wavesel fit";
  j["method"] = method_name(sel.method);
  j["names"] = sel.names;
  j["P"] = sel.P;
  j["R"] = sel.R;
  j["basis"] = {{"j0", sel.basis->j0()}, {"J", sel.basis->J()}};
  j["dummy_count"] = args.dummies;
  j["window"] = window_json(window);
  j["window_source"] = window_source;
  j["n_points"] = n_points;
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
  j["runtime_s"] = sel.runtime_seconds;
  std::ofstream os(path);
  if (!os) fail("cannot write " + path);
  os << j.dump(2) << "\n";
}

void write_coefficients_csv(const std::string& path, const SelectionResult& sel) {
  std::ofstream os(path);
  if (!os) fail("cannot write " + path);
  const bool local = method_is_local(sel.method);
  // Global baselines have a single constant atom per predictor, so the atom
  // columns carry no information and are omitted.
  os << (local ? "predictor,name,j,orientation,k1,k2,estimate,refit_estimate"
               : "predictor,name,estimate,refit_estimate")
     << "\n";
  const auto& atoms = sel.basis->atoms();
  for (int k : sel.active_columns) {
    const int p = k / sel.R + 1;
    const int r = k % sel.R;
    os << p << "," << sel.names[static_cast<std::size_t>(p - 1)];
    if (local) {
      const WaveletIndex& a = atoms[static_cast<std::size_t>(r)];
      os << "," << a.j << "," << orientation_name(a.orientation) << "," << a.k1 << "," << a.k2;
    }
    os << "," << fmt_double(sel.path_fit.coefficients[k]) << ","
       << fmt_double(sel.refit.coefficients[k]) << "\n";
  }
}

GridImage predicted_intensity_grid(const SelectionResult& sel,
                                   const std::vector<GridImage>& images, const Window& window,
                                   int grid) {
  GridImage out;
  out.nx = grid;
  out.ny = grid;
  out.window = window;
  out.values.setZero(grid, grid);
  Eigen::VectorXd cov(static_cast<int>(images.size()));
  for (int iy = 0; iy < grid; ++iy) {
    for (int ix = 0; ix < grid; ++ix) {
      const Point s = out.cell_center(ix, iy);
      for (std::size_t p = 0; p < images.size(); ++p)
        cov[static_cast<int>(p)] = images[p].bilinear(s);
      out.at(ix, iy) = predict_intensity(sel.refit, *sel.basis, cov, affine_to_unit(window, s));
    }
  }
  return out;
}

int cmd_fit(const FitArgs& args) {
  if (args.J < args.j0 || args.j0 < 0) fail("--j0/--J must satisfy 0 <= j0 <= J");
  if (args.dummies < 1) fail("--dummies must be >= 1");
  if (args.raster_grid < 1) fail("--raster-grid must be >= 1");
  const Method method = method_from_name(upper(args.method));

  const std::vector<Point> points = read_points_file(args.points_path);
  if (points.empty())
    std::cerr << "warning: " << args.points_path
              << " has no points; fitting the intercept-only model\n";

  // Grid-form covariates are read first because, absent --window, they are
  // the preferred source of the observation window.
  std::vector<std::string> names;
  std::vector<GridImage> images;
  if (!args.covariate_grids.empty()) {
    for (const std::string& spec : args.covariate_grids) {
      const std::size_t eq = spec.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
        fail("--covariate-grid expects NAME=FILE, got \"" + spec + "\"");
      const std::string name = spec.substr(0, eq);
      if (std::find(names.begin(), names.end(), name) != names.end())
        fail("duplicate covariate name \"" + name + "\"");
      names.push_back(name);
      images.push_back(read_grid_csv(spec.substr(eq + 1)));
    }
  }

  Window window;
  std::string window_source;
  if (!args.window_spec.empty()) {
    window = parse_window_spec(args.window_spec);
    window_source = "flag";
  } else if (!images.empty()) {
    window = images.front().window;
    window_source = "covariate-grid";
  } else {
    window = bbox_window(points);
    window_source = "bbox+1%";
  }

  for (std::size_t i = 0; i < images.size(); ++i)
    if (!images[i].window.approx_equal(window, 1e-9))
      fail("covariate grid \"" + names[i] + "\" has a different window than the fit window");

  int outside = 0;
  for (const Point& p : points) outside += window.contains(p) ? 0 : 1;
  if (outside > 0)
    fail(std::to_string(outside) + " point(s) fall outside the observation window");

  if (!args.covariates_path.empty()) {
    LongSamples longform = read_long_covariates(args.covariates_path);
    for (const std::string& name : longform.names) {
      if (std::find(names.begin(), names.end(), name) != names.end())
        fail("duplicate covariate name \"" + name + "\"");
      names.push_back(name);
      images.push_back(rasterize_covariate(longform.samples.at(name), window, args.raster_grid,
                                           args.raster_grid));
    }
  }
  if (images.empty())
    fail("no covariates given (use --covariates or --covariate-grid)");

  PointPattern pattern{points, window};
  MethodConfig config;
  config.method = method;
  config.j0 = args.j0;
  config.J = args.J;
  config.dummy_count = args.dummies;
  SelectionResult sel = run_method(pattern, images, names, config);

  const fs::path out(args.out_dir);
  fs::create_directories(out / "covariates");
  write_pattern_csv((out / "points.csv").string(), pattern);
  for (std::size_t p = 0; p < images.size(); ++p)
    write_grid_csv((out / "covariates" / (names[p] + ".csv")).string(), images[p]);
  write_selection_json((out / "selection.json").string(), sel, args, window, window_source,
                       pattern.n());
  write_coefficients_csv((out / "coefficients.csv").string(), sel);
  write_grid_csv((out / "intensity.csv").string(),
                 predicted_intensity_grid(sel, images, window, args.raster_grid));

  std::cerr << "fit " << method_name(method) << ": n=" << pattern.n() << ", "
            << sel.global_active.size() << " predictor(s) selected -> " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// export
// ---------------------------------------------------------------------------

struct ExportArgs {
  std::string run_dir;
  int grid = 64;
  std::string out_dir;
};

int cmd_export(const ExportArgs& args) {
  if (args.grid < 1) fail("--grid must be >= 1");
  const fs::path run(args.run_dir);
  const fs::path selection_path = run / "selection.json";
  if (!fs::exists(selection_path) || !fs::is_directory(run / "covariates"))
    fail(args.run_dir + ": missing run artifacts (selection.json and covariates/)");

  json j;
  {
    std::ifstream is = open_or_fail(selection_path.string());
    try {
      j = json::parse(is);
    } catch (const json::parse_error& e) {
      fail(selection_path.string() + ": " + e.what());
    }
  }

  const Window window = window_from_json(j.at("window"));
  const std::vector<std::string> names = j.at("names").get<std::vector<std::string>>();
  const int P = j.at("P").get<int>();
  const int R = j.at("R").get<int>();
  HaarBasis basis(j.at("basis").at("j0").get<int>(), j.at("basis").at("J").get<int>());
  if (P != static_cast<int>(names.size()) || R != basis.size())
    fail(selection_path.string() + ": inconsistent P/R/basis fields");

  FitResult refit;
  refit.intercept = j.at("refit_intercept").get<double>();
  refit.coefficients.setZero(P * R);
  for (const json& c : j.at("coefficients")) {
    const int p = c.at("predictor").get<int>();
    const int r = c.at("r").get<int>();
    if (p < 1 || p > P || r < 1 || r > R)
      fail(selection_path.string() + ": coefficient entry out of range");
    refit.coefficients[(p - 1) * R + (r - 1)] = c.at("refit_estimate").get<double>();
  }
  const std::set<int> active = j.at("global_active").get<std::set<int>>();

  std::vector<GridImage> images;
  for (const std::string& name : names) {
    const fs::path grid_path = run / "covariates" / (name + ".csv");
    if (!fs::exists(grid_path))
      fail(args.run_dir + ": missing run artifacts (covariates/" + name + ".csv)");
    images.push_back(read_grid_csv(grid_path.string()));
    if (!images.back().window.approx_equal(window, 1e-9))
      fail("covariate grid \"" + name + "\" has a different window than selection.json");
  }

  const fs::path out = args.out_dir.empty() ? run / "export" : fs::path(args.out_dir);
  fs::create_directories(out);

  // Cell centers of the export grid, traversed row iy = 0 first.
  GridImage frame;
  frame.nx = args.grid;
  frame.ny = args.grid;
  frame.window = window;

  for (int p : active) {
    const std::string& name = names[static_cast<std::size_t>(p - 1)];
    std::ofstream os(out / ("surface_" + name + ".csv"));
    if (!os) fail("cannot write surface_" + name + ".csv");
    os << "x,y,beta_hat\n";
    for (int iy = 0; iy < args.grid; ++iy)
      for (int ix = 0; ix < args.grid; ++ix) {
        const Point s = frame.cell_center(ix, iy);
        const double b =
            beta_hat_surface(refit.coefficients, basis, p, affine_to_unit(window, s));
        os << fmt_double(s.x) << "," << fmt_double(s.y) << "," << fmt_double(b) << "\n";
      }
  }

  {
    std::ofstream os(out / "intensity.csv");
    if (!os) fail("cannot write intensity.csv");
    os << "x,y,pi_hat\n";
    Eigen::VectorXd cov(P);
    for (int iy = 0; iy < args.grid; ++iy)
      for (int ix = 0; ix < args.grid; ++ix) {
        const Point s = frame.cell_center(ix, iy);
        for (int p = 0; p < P; ++p) cov[p] = images[static_cast<std::size_t>(p)].bilinear(s);
        const double v = predict_intensity(refit, basis, cov, affine_to_unit(window, s));
        os << fmt_double(s.x) << "," << fmt_double(s.y) << "," << fmt_double(v) << "\n";
      }
  }

  std::cerr << "export: " << active.size() << " surface(s) + intensity on " << args.grid << "x"
            << args.grid << " -> " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelet-localized variable selection for spatial point-process intensity"};
  app.require_subcommand(1);

  ScenarioArgs sargs;
  CLI::App* sc = app.add_subcommand("scenario", "Run a simulation study from a JSON config");
  sc->add_option("-c,--config", sargs.config_path, "Scenario configuration JSON")
      ->required();
  sc->add_option("-o,--output-dir", sargs.output_dir, "Override the config's output directory");
  sc->add_option("-w,--workers", sargs.workers, "Worker pool size (default: WAVESEL_WORKERS)");

  FitArgs fargs;
  CLI::App* fc = app.add_subcommand("fit", "Fit one point pattern with covariates");
  fc->add_option("-p,--points", fargs.points_path, "Point pattern CSV (header x,y)")
      ->required();
  fc->add_option("--covariates", fargs.covariates_path,
                 "Long-form covariate samples CSV (header x,y,name,value)");
  fc->add_option("--covariate-grid", fargs.covariate_grids,
                 "Covariate grid CSV as NAME=FILE (repeatable)");
  fc->add_option("-m,--method", fargs.method, "LLI, LLS, LASSO, SCAD, or AL (default LLI)");
  fc->add_option("--j0", fargs.j0, "Coarsest wavelet level (default 0)");
  fc->add_option("-J,--J", fargs.J, "Finest wavelet level bound (default 2)");
  fc->add_option("--dummies", fargs.dummies,
                 "Requested dummy point count, rounded up to a square (default 256)");
  fc->add_option("--raster-grid", fargs.raster_grid,
                 "Rasterization / intensity grid resolution (default 64)");
  fc->add_option("--window", fargs.window_spec,
                 "Observation window \"x0,x1,y0,y1\" (default: covariate-grid window, else "
                 "point bounding box + 1%)");
  fc->add_option("-o,--out", fargs.out_dir, "Output directory (default fit_out)");

  ExportArgs eargs;
  CLI::App* ec = app.add_subcommand("export", "Rasterize surfaces from a fit output directory");
  ec->add_option("-r,--run", eargs.run_dir, "Fit output directory")->required();
  ec->add_option("-g,--grid", eargs.grid, "Export grid resolution (default 64)");
  ec->add_option("-o,--out", eargs.out_dir, "Output directory (default RUN/export)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sc->parsed()) return cmd_scenario(sargs);
    if (fc->parsed()) return cmd_fit(fargs);
    return cmd_export(eargs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
