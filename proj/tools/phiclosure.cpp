// Command-line harness around the library: builds renormalization maps,
// tabulates fit errors over (K, interval), and runs the spherical benchmark
// inversions (beam, double beam, six-Gaussian). Every command reads a flat
// JSON config, accepts flag overrides, and writes a JSON report plus, in the
// default csv format, a data table with '#'-prefixed metadata lines. Output
// is byte-stable for a fixed config and seed: no timestamps, no locale
// formatting, doubles through format_double.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.

#include <phiclosure/closure.hpp>
#include <phiclosure/serialization.hpp>
#include <phiclosure/sos_fit.hpp>
#include <phiclosure/sphere.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using namespace phiclosure;
using Eigen::Vector3d;

constexpr const char* kVersion = "phiclosure 1.0.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string target = "BS";
  std::string family = "beta";
  int K = 1;  // valid for every family; beta needs odd K
  int N = 1;
  double x0 = 0.0;
  bool has_interval = false;
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t seed = 0;
  std::string out = "phiclosure_out";
  std::string format = "csv";
  int exactness = 0;  // 0: smallest exact rule for the model
  double plot_lo = 0.0;
  double plot_hi = 0.0;  // lo == hi: plot over the map's declared domain
  int plot_points = 401;
  std::vector<int> K_values;
  std::vector<double> L_values;
  std::vector<int> N_values;
  std::string lebedev_file;
  int lebedev_exactness = 0;
};

// ---- config loading ----------------------------------------------------

template <typename T>
T get_as(const json& value, const std::string& key, const char* type_name) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' must be " + type_name);
  }
}

void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " +
                      e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "command") {
      const auto c = get_as<std::string>(value, key, "a string");
      if (c != cfg.command)
        throw ConfigError("config command '" + c +
                          "' does not match invoked command '" + cfg.command +
                          "'");
    } else if (key == "target") {
      cfg.target = get_as<std::string>(value, key, "a string");
    } else if (key == "family") {
      cfg.family = get_as<std::string>(value, key, "a string");
    } else if (key == "K") {
      cfg.K = get_as<int>(value, key, "an integer");
    } else if (key == "N") {
      cfg.N = get_as<int>(value, key, "an integer");
    } else if (key == "x0") {
      cfg.x0 = get_as<double>(value, key, "a number");
    } else if (key == "interval") {
      const auto v = get_as<std::vector<double>>(value, key,
                                                 "an array of two numbers");
      if (v.size() != 2)
        throw ConfigError("config key 'interval' must be [lo, hi]");
      cfg.has_interval = true;
      cfg.lo = v[0];
      cfg.hi = v[1];
    } else if (key == "seed") {
      cfg.seed = get_as<std::uint64_t>(value, key, "a nonnegative integer");
    } else if (key == "out") {
      cfg.out = get_as<std::string>(value, key, "a string");
    } else if (key == "format") {
      cfg.format = get_as<std::string>(value, key, "a string");
    } else if (key == "exactness") {
      cfg.exactness = get_as<int>(value, key, "an integer");
    } else if (key == "plot_lo") {
      cfg.plot_lo = get_as<double>(value, key, "a number");
    } else if (key == "plot_hi") {
      cfg.plot_hi = get_as<double>(value, key, "a number");
    } else if (key == "plot_points") {
      cfg.plot_points = get_as<int>(value, key, "an integer");
    } else if (key == "K_values") {
      cfg.K_values = get_as<std::vector<int>>(value, key,
                                              "an array of integers");
    } else if (key == "L_values") {
      cfg.L_values = get_as<std::vector<double>>(value, key,
                                                 "an array of numbers");
    } else if (key == "N_values") {
      cfg.N_values = get_as<std::vector<int>>(value, key,
                                              "an array of integers");
    } else if (key == "lebedev_file") {
      cfg.lebedev_file = get_as<std::string>(value, key, "a string");
    } else if (key == "lebedev_exactness") {
      cfg.lebedev_exactness = get_as<int>(value, key, "an integer");
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

Target parse_target(const RunConfig& cfg) {
  try {
    return target_from_name(cfg.target);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

MapFamily parse_family(const RunConfig& cfg) {
  try {
    return family_from_name(cfg.family);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void validate(const RunConfig& cfg) {
  const Target target = parse_target(cfg);
  if (cfg.format != "csv" && cfg.format != "json")
    throw ConfigError("format must be 'csv' or 'json', got '" + cfg.format +
                      "'");
  if (cfg.K < 0) throw ConfigError("K must be nonnegative");
  if (cfg.N < 0) throw ConfigError("N must be nonnegative");
  // compare-maps sweeps its own optimized fits; the single-map settings
  // only bind for the other commands
  if (cfg.command != "compare-maps") {
    const MapFamily family = parse_family(cfg);
    if (family == MapFamily::PhiDivergence && (cfg.K < 1 || cfg.K % 2 == 0))
      throw ConfigError("family=beta requires odd K >= 1");
    if (family == MapFamily::Optimized) {
      if (!cfg.has_interval)
        throw ConfigError("family=optimized requires an interval [lo, hi]");
      if (!(cfg.lo < cfg.hi))
        throw ConfigError("interval must satisfy lo < hi");
      if (target == Target::BoseEinstein && cfg.hi >= 0.0)
        throw ConfigError(
            "target=BE requires a strictly negative interval (hi < 0)");
    }
    if (family == MapFamily::Taylor && target == Target::BoseEinstein &&
        cfg.x0 >= 0.0)
      throw ConfigError("target=BE requires x0 < 0");
  }
  if (cfg.exactness < 0) throw ConfigError("exactness must be nonnegative");
  if (cfg.plot_points < 2) throw ConfigError("plot_points must be >= 2");
  if (cfg.plot_lo != cfg.plot_hi && !(cfg.plot_lo < cfg.plot_hi))
    throw ConfigError("plot window must satisfy plot_lo < plot_hi");
  if (cfg.command == "invert-double-beam" && cfg.N < 2)
    throw ConfigError("invert-double-beam requires N >= 2");
  if (!cfg.lebedev_file.empty() && cfg.lebedev_exactness < 1)
    throw ConfigError("lebedev_file requires lebedev_exactness >= 1");
  for (int k : cfg.K_values)
    if (k < 0) throw ConfigError("K_values entries must be nonnegative");
  for (int n : cfg.N_values)
    if (n < 0) throw ConfigError("N_values entries must be nonnegative");
  for (double l : cfg.L_values)
    if (!(l > 0.0)) throw ConfigError("L_values entries must be positive");
}

// Effective-config echo placed in every output. The output path is omitted:
// it has no bearing on the numbers, and leaving it out keeps outputs
// byte-identical when only the destination changes.
json config_echo(const RunConfig& cfg) {
  json j;
  j["command"] = cfg.command;
  j["target"] = cfg.target;
  j["family"] = cfg.family;
  j["K"] = cfg.K;
  j["N"] = cfg.N;
  j["x0"] = cfg.x0;
  if (cfg.has_interval) j["interval"] = {cfg.lo, cfg.hi};
  j["seed"] = cfg.seed;
  j["format"] = cfg.format;
  j["exactness"] = cfg.exactness;
  if (cfg.command == "fit-map") {
    j["plot_lo"] = cfg.plot_lo;
    j["plot_hi"] = cfg.plot_hi;
    j["plot_points"] = cfg.plot_points;
  }
  if (!cfg.K_values.empty()) j["K_values"] = cfg.K_values;
  if (!cfg.L_values.empty()) j["L_values"] = cfg.L_values;
  if (!cfg.N_values.empty()) j["N_values"] = cfg.N_values;
  if (!cfg.lebedev_file.empty()) {
    j["lebedev_file"] = cfg.lebedev_file;
    j["lebedev_exactness"] = cfg.lebedev_exactness;
  }
  return j;
}

// ---- output helpers ----------------------------------------------------

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open output file: " + path);
  return os;
}

void finish_output(std::ofstream& os, const std::string& path) {
  os.flush();
  if (!os) throw IoError("error while writing: " + path);
}

void write_metadata(std::ostream& os, const RunConfig& cfg,
                    const std::vector<std::string>& provenance) {
  os << "# " << kVersion << "\n";
  os << "# command: " << cfg.command << "\n";
  os << "# config: " << config_echo(cfg).dump() << "\n";
  for (const std::string& line : provenance) os << "# " << line << "\n";
}

void write_json_report(const RunConfig& cfg, const json& body) {
  json j = body;
  j["version"] = kVersion;
  j["command"] = cfg.command;
  j["config"] = config_echo(cfg);
  std::ofstream os = open_output(cfg.out + ".json");
  os << j.dump(2) << "\n";
  finish_output(os, cfg.out + ".json");
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ',';
    row += cells[i];
  }
  row += '\n';
  return row;
}

// ---- model construction ------------------------------------------------

RenormalizationMap build_map(const RunConfig& cfg, FitResult* fit_out) {
  const Target target = parse_target(cfg);
  switch (parse_family(cfg)) {
    case MapFamily::PhiDivergence:
      return phi_divergence_map(cfg.K);
    case MapFamily::Taylor:
      return taylor_map(target, cfg.K, cfg.x0);
    case MapFamily::Optimized: {
      FitOptions options;
      options.seed = cfg.seed;
      FitResult result =
          fit(build_fit_problem(target, cfg.K, cfg.lo, cfg.hi), options);
      if (fit_out) *fit_out = result;
      return result.map;
    }
  }
  throw ConfigError("unknown family");
}

SphericalQuadrature inversion_rule(const RunConfig& cfg,
                                   const RenormalizationMap& map) {
  const int required = required_exactness(cfg.N, map_degree(map));
  if (!cfg.lebedev_file.empty()) {
    const SphericalQuadrature rule =
        load_lebedev_rule(cfg.lebedev_file, cfg.lebedev_exactness);
    if (rule.exactness < required)
      throw ConfigError("lebedev rule exactness " +
                        std::to_string(rule.exactness) +
                        " is below the required " + std::to_string(required));
    return rule;
  }
  if (cfg.exactness > 0 && cfg.exactness < required)
    throw ConfigError("exactness override " + std::to_string(cfg.exactness) +
                      " is below the required " + std::to_string(required));
  return product_quadrature(std::max(required, cfg.exactness));
}

std::string rule_provenance(const SphericalQuadrature& rule) {
  return "quadrature: " + rule.provenance + ", exactness " +
         std::to_string(rule.exactness) + ", " +
         std::to_string(rule.size()) + " nodes";
}

// ---- reconstruction export ---------------------------------------------

struct GridSummary {
  double peak = 0.0;
  Vector3d peak_at = Vector3d::Zero();
  double min = 0.0;
  Vector3d min_at = Vector3d::Zero();
};

// 181 x 360 latitude-longitude table sampled at cell centers; any plotting
// tool can consume it directly.
GridSummary export_grid(const RunConfig& cfg,
                        const std::function<double(const Vector3d&)>& value,
                        const std::vector<std::string>& provenance) {
  GridSummary s;
  s.peak = -std::numeric_limits<double>::infinity();
  s.min = std::numeric_limits<double>::infinity();
  std::optional<std::ofstream> os;
  if (cfg.format == "csv") {
    os = open_output(cfg.out + ".csv");
    write_metadata(*os, cfg, provenance);
    *os << "# columns: theta,phi,x,y,z,value\n";
  }
  for (int it = 0; it < 181; ++it) {
    const double theta = (it + 0.5) * M_PI / 181.0;
    for (int ip = 0; ip < 360; ++ip) {
      const double phi = (ip + 0.5) * 2.0 * M_PI / 360.0;
      const Vector3d omega(std::sin(theta) * std::cos(phi),
                           std::sin(theta) * std::sin(phi), std::cos(theta));
      const double v = value(omega);
      if (v > s.peak) {
        s.peak = v;
        s.peak_at = omega;
      }
      if (v < s.min) {
        s.min = v;
        s.min_at = omega;
      }
      if (os)
        *os << csv_row({format_double(theta), format_double(phi),
                        format_double(omega.x()), format_double(omega.y()),
                        format_double(omega.z()), format_double(v)});
    }
  }
  if (os) finish_output(*os, cfg.out + ".csv");
  return s;
}

json summary_json(const GridSummary& s) {
  return json{{"peak_value", s.peak},
              {"peak_location", {s.peak_at.x(), s.peak_at.y(), s.peak_at.z()}},
              {"min_value", s.min},
              {"min_location", {s.min_at.x(), s.min_at.y(), s.min_at.z()}}};
}

// Shared tail of the inversion commands: invert, export, report. Writes the
// report (with diagnostics) even when the solve fails, then signals the
// failure through the exit code.
void run_inversion(const RunConfig& cfg, const RenormalizationMap& map,
                   const MomentVector& U, json extra) {
  const SphericalBasis basis = build_basis(cfg.N);
  const SphericalQuadrature rule = inversion_rule(cfg, map);
  const InversionReport report = invert(map, U, basis, rule);

  json body = std::move(extra);
  body["label"] = model_label(map, cfg.N);
  body["map"] = to_json(map);
  body["moments"] = std::vector<double>(U.begin(), U.end());
  body["inversion"] = to_json(report);
  if (report.converged) {
    const auto recon = reconstruct(map, report.lambda, basis);
    const GridSummary s =
        export_grid(cfg, recon, {rule_provenance(rule)});
    body["reconstruction"] = summary_json(s);
  }
  write_json_report(cfg, body);
  if (!report.converged)
    throw NumericalError("inversion did not converge (see " + cfg.out +
                         ".json for diagnostics)");
}

// ---- commands ----------------------------------------------------------

void cmd_fit_map(const RunConfig& cfg) {
  FitResult fit_result;
  fit_result.starts_tried = -1;  // sentinel: not an optimized fit
  const RenormalizationMap map = build_map(cfg, &fit_result);
  const Target target = parse_target(cfg);

  double lo = cfg.plot_lo, hi = cfg.plot_hi;
  if (lo == hi) {
    lo = map.domain_lo;
    hi = map.domain_hi;
  }

  json body;
  body["label"] = model_label(map, cfg.N);
  body["map"] = to_json(map);
  if (fit_result.starts_tried >= 0) {
    body["fit"] = json{{"objective", fit_result.objective},
                       {"starts_tried", fit_result.starts_tried},
                       {"converged_starts", fit_result.converged_starts},
                       {"seed", fit_result.seed}};
    body["l2_error"] =
        target_l2_error(map.p, target, cfg.lo, cfg.hi);
  }

  // sampled curve (x, map(x), target(x)); the target column is nan where
  // the target is undefined (Planckian at x >= 0)
  json curve = json::array();
  std::optional<std::ofstream> os;
  if (cfg.format == "csv") {
    os = open_output(cfg.out + ".csv");
    write_metadata(*os, cfg, {});
    *os << "# columns: x,map,target\n";
  }
  for (int i = 0; i < cfg.plot_points; ++i) {
    const double x = lo + (hi - lo) * i / (cfg.plot_points - 1);
    const double m = map(x);
    double t = std::numeric_limits<double>::quiet_NaN();
    try {
      t = target_value(target, x);
    } catch (const std::exception&) {
    }
    if (os)
      *os << csv_row({format_double(x), format_double(m), format_double(t)});
    else
      curve.push_back({x, m, std::isnan(t) ? json() : json(t)});
  }
  if (os) finish_output(*os, cfg.out + ".csv");
  if (!os) body["curve"] = std::move(curve);
  write_json_report(cfg, body);
}

void cmd_compare_maps(const RunConfig& cfg) {
  const Target target = parse_target(cfg);
  std::vector<int> Ks = cfg.K_values;
  if (Ks.empty()) Ks = {1, 2, 3, 4, 5, 6};
  std::vector<double> Ls = cfg.L_values;
  if (Ls.empty())
    Ls = target == Target::BoltzmannShannon ? std::vector<double>{1, 3, 5}
                                            : std::vector<double>{2, 6, 10};

  json rows = json::array();
  std::optional<std::ofstream> os;
  if (cfg.format == "csv") {
    os = open_output(cfg.out + ".csv");
    write_metadata(*os, cfg, {});
    *os << "# columns: target,K,L,lo,hi,l2_error,status\n";
  }
  for (double L : Ls) {
    const double lo = -L;
    const double hi = target == Target::BoltzmannShannon ? L : -1.0 / L;
    for (int K : Ks) {
      std::string status = "ok";
      double err = std::numeric_limits<double>::quiet_NaN();
      try {
        FitOptions options;
        options.seed = cfg.seed;
        const FitResult result =
            fit(build_fit_problem(target, K, lo, hi), options);
        err = target_l2_error(result.map.p, target, lo, hi);
      } catch (const std::exception&) {
        status = "fit-failed";  // marked per row, the sweep continues
      }
      if (os)
        *os << csv_row({cfg.target, std::to_string(K), format_double(L),
                        format_double(lo), format_double(hi),
                        format_double(err), status});
      rows.push_back({{"target", cfg.target},
                      {"K", K},
                      {"L", L},
                      {"lo", lo},
                      {"hi", hi},
                      {"l2_error", std::isnan(err) ? json() : json(err)},
                      {"status", status}});
    }
  }
  if (os) finish_output(*os, cfg.out + ".csv");
  write_json_report(cfg, {{"rows", std::move(rows)}});
}

void cmd_invert_beam(const RunConfig& cfg) {
  const RenormalizationMap map = build_map(cfg, nullptr);
  const SphericalBasis basis = build_basis(cfg.N);
  // Dirac beam at the north pole: sifting gives U = m(e3) exactly
  const MomentVector U = basis(Vector3d(0, 0, 1));
  run_inversion(cfg, map, U, json::object());
}

void cmd_invert_double_beam(const RunConfig& cfg) {
  const RenormalizationMap map = build_map(cfg, nullptr);
  const SphericalBasis basis = build_basis(cfg.N);
  const MomentVector U =
      basis(Vector3d(0, 0, 1)) + basis(Vector3d(1, 0, 0));
  run_inversion(cfg, map, U, json::object());
}

double six_gaussian_intensity(const Vector3d& omega) {
  static const std::vector<Vector3d> centers = {
      {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  double sum = 0.0;
  for (const Vector3d& c : centers)
    sum += std::exp(-5.0 * (omega - c).squaredNorm());
  return sum;
}

MomentVector project_intensity(const std::function<double(const Vector3d&)>& f,
                               const SphericalBasis& basis, int exactness) {
  const SphericalQuadrature rule = product_quadrature(exactness);
  const Eigen::MatrixXd phi = evaluate_basis(basis, rule);
  Eigen::VectorXd values(rule.size());
  for (Eigen::Index q = 0; q < rule.size(); ++q)
    values[q] = f(rule.nodes.col(q));
  return phi.transpose() * rule.weights.cwiseProduct(values);
}

void cmd_invert_six_gaussian(const RunConfig& cfg) {
  const RenormalizationMap map = build_map(cfg, nullptr);
  const SphericalBasis basis = build_basis(cfg.N);
  const int project_exactness = 2 * cfg.N + 20;
  const MomentVector U =
      project_intensity(six_gaussian_intensity, basis, project_exactness);

  const SphericalQuadrature rule = inversion_rule(cfg, map);
  const InversionReport report = invert(map, U, basis, rule);

  json body;
  body["label"] = model_label(map, cfg.N);
  body["map"] = to_json(map);
  body["projection_exactness"] = project_exactness;
  body["inversion"] = to_json(report);
  if (report.converged) {
    const auto recon = reconstruct(map, report.lambda, basis);
    const GridSummary s = export_grid(cfg, recon, {rule_provenance(rule)});
    body["reconstruction"] = summary_json(s);
    const SphericalQuadrature metric = product_quadrature(
        std::max(60, required_exactness(cfg.N, map_degree(map))));
    body["l2_error"] =
        sphere_l2_distance(recon, six_gaussian_intensity, metric);
    json axes = json::array();
    for (const Vector3d& a :
         {Vector3d(1, 0, 0), Vector3d(-1, 0, 0), Vector3d(0, 1, 0),
          Vector3d(0, -1, 0), Vector3d(0, 0, 1), Vector3d(0, 0, -1)})
      axes.push_back(recon(a));
    body["axis_values"] = std::move(axes);
  }
  write_json_report(cfg, body);
  if (!report.converged)
    throw NumericalError("inversion did not converge (see " + cfg.out +
                         ".json for diagnostics)");
}

void cmd_error_decay(const RunConfig& cfg) {
  RunConfig base = cfg;
  std::vector<int> Ns = cfg.N_values;
  if (Ns.empty()) Ns = {1, 3, 5, 7, 9};

  // the map does not depend on N; build it once
  const RenormalizationMap map = build_map(cfg, nullptr);

  json rows = json::array();
  std::optional<std::ofstream> os;
  if (cfg.format == "csv") {
    os = open_output(cfg.out + ".csv");
    write_metadata(*os, cfg, {});
    *os << "# columns: label,N,l2_error,iterations,status\n";
  }
  for (int N : Ns) {
    base.N = N;
    const SphericalBasis basis = build_basis(N);
    const MomentVector U =
        project_intensity(six_gaussian_intensity, basis, 2 * N + 20);
    std::string status = "ok";
    double err = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    try {
      const SphericalQuadrature rule = inversion_rule(base, map);
      const InversionReport report = invert(map, U, basis, rule);
      iterations = report.iterations;
      if (!report.converged) {
        status = "not-converged";
      } else {
        const auto recon = reconstruct(map, report.lambda, basis);
        const SphericalQuadrature metric = product_quadrature(
            std::max(60, required_exactness(N, map_degree(map))));
        err = sphere_l2_distance(recon, six_gaussian_intensity, metric);
      }
    } catch (const std::exception&) {
      status = "failed";
    }
    const std::string label = model_label(map, N);
    if (os)
      *os << csv_row({label, std::to_string(N), format_double(err),
                      std::to_string(iterations), status});
    rows.push_back({{"label", label},
                    {"N", N},
                    {"l2_error", std::isnan(err) ? json() : json(err)},
                    {"iterations", iterations},
                    {"status", status}});
  }
  if (os) finish_output(*os, cfg.out + ".csv");
  write_json_report(cfg, {{"rows", std::move(rows)}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "phiclosure: monotone renormalization maps and spherical moment "
      "closures"};
  app.get_formatter()->column_width(28);

  std::string command;
  app.add_option("command", command, "one of: fit-map, compare-maps, "
                                     "invert-beam, invert-double-beam, "
                                     "invert-six-gaussian, error-decay")
      ->required()
      ->check(CLI::IsMember({"fit-map", "compare-maps", "invert-beam",
                             "invert-double-beam", "invert-six-gaussian",
                             "error-decay"}));
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");

  std::string target, family, out, format;
  int K = 0, N = 0;
  double x0 = 0.0;
  std::vector<double> interval;
  std::uint64_t seed = 0;
  app.add_option("--target", target, "BS (exponential) or BE (planckian)");
  app.add_option("--family", family, "beta, taylor, or optimized");
  app.add_option("--K", K, "map order (polynomial degree 2K+1)");
  app.add_option("--N", N, "harmonic truncation degree");
  app.add_option("--interval", interval, "fit interval lo hi")->expected(2);
  app.add_option("--x0", x0, "taylor expansion point");
  app.add_option("--seed", seed, "multistart seed");
  app.add_option("--out", out, "output path prefix");
  app.add_option("--format", format, "csv (table + report) or json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help exits 0, any parse error is a config error
  }

  try {
    RunConfig cfg;
    cfg.command = command;
    if (!config_path.empty()) load_config_file(config_path, cfg);
    if (app.count("--target")) cfg.target = target;
    if (app.count("--family")) cfg.family = family;
    if (app.count("--K")) cfg.K = K;
    if (app.count("--N")) cfg.N = N;
    if (app.count("--interval")) {
      cfg.has_interval = true;
      cfg.lo = interval[0];
      cfg.hi = interval[1];
    }
    if (app.count("--x0")) cfg.x0 = x0;
    if (app.count("--seed")) cfg.seed = seed;
    if (app.count("--out")) cfg.out = out;
    if (app.count("--format")) cfg.format = format;
    validate(cfg);

    if (command == "fit-map") {
      cmd_fit_map(cfg);
    } else if (command == "compare-maps") {
      cmd_compare_maps(cfg);
    } else if (command == "invert-beam") {
      cmd_invert_beam(cfg);
    } else if (command == "invert-double-beam") {
      cmd_invert_double_beam(cfg);
    } else if (command == "invert-six-gaussian") {
      cmd_invert_six_gaussian(cfg);
    } else if (command == "error-decay") {
      cmd_error_decay(cfg);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}
