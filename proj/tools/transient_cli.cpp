#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "transient/basin.hpp"
#include "transient/boundary.hpp"
#include "transient/error.hpp"
#include "transient/forcing.hpp"
#include "transient/geometry.hpp"
#include "transient/ingest.hpp"
#include "transient/integrator.hpp"
#include "transient/io.hpp"
#include "transient/manifold.hpp"
#include "transient/model.hpp"

namespace fs = std::filesystem;
using namespace transient;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitIo = 3;

constexpr std::size_t kOverlapSamples = 250'000;

struct RunConfig {
  double m = 1.0, c = 0.25, k1 = 1.0, k2 = 1.0, k3 = 1.0;
  std::string transient = "auto";  // off | on | accel | none | auto
  double a0 = 0.2;
  double omega = 3.0;
  double t_end = 2.0 * M_PI / 3.0;
  double cap_v = 1.0;
  std::vector<double> window{-3.0, 3.0, -3.0, 3.0};
  std::vector<int> res{200, 200};
  double tol = 1e-8;
  std::string accel;
  std::vector<double> accel_window;
  double accel_scale = 1.0;
  bool forced = false;
  std::size_t verify = 0;
  std::vector<std::string> ics;
  double duration = 100.0;
  std::string param = "a0";
  std::vector<std::string> values;
  std::string out = ".";
  int jobs = 1;
  bool svg = false;
};

struct Setup {
  SystemParamsd params;
  IntegratorSettingsd settings;
  PhaseWindow window;
  ForcingProfile profile;
  std::string kind;
  double t_end = 0.0;
};

std::string num(double v) { return format_number(v); }

std::string join(const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "," : "") + num(values[i]);
  return s;
}

std::shared_ptr<const Accelerogram> load_record(const RunConfig& cfg) {
  Accelerogram record = cfg.accel.empty() ? synthetic_record() : read_accelerogram(cfg.accel);
  if (!cfg.accel_window.empty()) {
    record = window_and_scale(record, cfg.accel_window[0], cfg.accel_window[1], cfg.accel_scale);
  } else if (cfg.accel_scale != 1.0) {
    record = window_and_scale(record, record.start(), record.stop(), cfg.accel_scale);
  }
  return std::make_shared<const Accelerogram>(std::move(record));
}

std::string resolved_kind(const RunConfig& cfg) {
  if (cfg.transient != "auto") return cfg.transient;
  return cfg.accel.empty() ? "off" : "accel";
}

Setup make_setup(const RunConfig& cfg) {
  Setup s;
  s.params = {cfg.m, cfg.c, cfg.k1, cfg.k2, cfg.k3};
  s.params.validate();
  s.settings.rel_tol = s.settings.abs_tol = cfg.tol;
  s.settings.validate();
  s.window = {cfg.window[0], cfg.window[1], cfg.window[2], cfg.window[3], cfg.res[0], cfg.res[1]};
  s.window.validate();
  s.kind = resolved_kind(cfg);
  if (s.kind == "off") {
    s.profile = ForcingProfile::switching_off(cfg.a0, cfg.omega, cfg.t_end);
    s.t_end = cfg.t_end;
  } else if (s.kind == "on") {
    s.profile = ForcingProfile::switching_on(cfg.a0, cfg.omega, cfg.t_end);
    s.t_end = cfg.t_end;
  } else if (s.kind == "accel") {
    s.profile = ForcingProfile::accelerogram(load_record(cfg));
    s.t_end = s.profile.t_end;
  } else {
    s.profile = ForcingProfile::zero();
    s.t_end = 0.0;
  }
  s.profile.validate();
  return s;
}

/// Effective configuration, excluding options that do not affect results.
std::string config_line(const RunConfig& cfg, const Setup& s) {
  std::string line = "config: m=" + num(cfg.m) + " c=" + num(cfg.c) + " k1=" + num(cfg.k1) + " k2=" + num(cfg.k2) +
                     " k3=" + num(cfg.k3) + " transient=" + s.kind + " a0=" + num(cfg.a0) +
                     " omega=" + num(cfg.omega) + " t_end=" + num(s.t_end) + " cap_v=" + num(cfg.cap_v) +
                     " window=" + join(cfg.window) + " res=" + std::to_string(cfg.res[0]) + "," +
                     std::to_string(cfg.res[1]) + " tol=" + num(cfg.tol);
  if (s.kind == "accel") {
    line += " accel=" + (cfg.accel.empty() ? std::string("synthetic") : cfg.accel);
    if (!cfg.accel_window.empty()) line += " accel_window=" + join(cfg.accel_window);
    line += " accel_scale=" + num(cfg.accel_scale);
  }
  return line;
}

fs::path output_path(const RunConfig& cfg, const std::string& name) {
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create output directory " + cfg.out);
  return fs::path(cfg.out) / name;
}

void emit(const RunConfig& cfg, const std::string& name, const std::string& content) {
  const fs::path path = output_path(cfg, name);
  write_text_file(path, content);
  std::cout << "wrote " << path.string() << '\n';
}

Stated plus_attractor(const SystemParamsd& params) {
  const auto eq = attracting_equilibria(params);
  if (!eq[0]) throw Error(ErrorCode::no_reference, "the unforced system has no attracting equilibrium");
  return *eq[0];
}

/// Basin of the system in force before the transient starts.
ForcingProfile initial_profile(const Setup& s, const RunConfig& cfg) {
  if (s.kind == "off") return ForcingProfile::steady_harmonic(cfg.a0, cfg.omega);
  return ForcingProfile::zero();
}

/// Basin of the system in force after the transient ends.
ForcingProfile final_profile(const Setup& s, const RunConfig& cfg) {
  if (s.kind == "on") return ForcingProfile::steady_harmonic(cfg.a0, cfg.omega);
  return ForcingProfile::zero();
}

BasinSettings basin_settings(const RunConfig& cfg) {
  BasinSettings b;
  b.jobs = cfg.jobs;
  return b;
}

struct ZoneBundle {
  BasinGrid grid;
  std::array<ManifoldBranch, 2> branches;
  SafeZone zone;
};

ZoneBundle unforced_zone(const RunConfig& cfg, const Setup& s) {
  ZoneBundle z;
  z.branches = stable_manifold(s.params, s.settings, s.window);
  z.grid = basin_grid(s.params, ForcingProfile::zero(), s.window, s.settings, basin_settings(cfg));
  z.zone = build_safe_zone(z.grid, z.branches, cfg.cap_v, plus_attractor(s.params));
  return z;
}

std::vector<Stated> ring_states(const BoundaryPolyline& b) { return b.states(); }

// ---------------------------------------------------------------- commands

int cmd_fixed_points(const RunConfig& cfg) {
  SystemParamsd params{cfg.m, cfg.c, cfg.k1, cfg.k2, cfg.k3};
  params.validate();
  std::cout << "# config: m=" << num(cfg.m) << " c=" << num(cfg.c) << " k1=" << num(cfg.k1) << " k2=" << num(cfg.k2)
            << " k3=" << num(cfg.k3) << '\n';
  std::cout << "x,v,re1,im1,re2,im2,kind\n";
  for (const auto& fp : fixed_points(params)) {
    std::cout << num(fp.location.x()) << ',' << num(fp.location.y()) << ',' << num(fp.eigenvalues[0].real()) << ','
              << num(fp.eigenvalues[0].imag()) << ',' << num(fp.eigenvalues[1].real()) << ','
              << num(fp.eigenvalues[1].imag()) << ',' << to_string(fp.kind) << '\n';
  }
  return 0;
}

int cmd_basin(const RunConfig& cfg) {
  Setup s = make_setup(cfg);
  const ForcingProfile profile = cfg.forced ? ForcingProfile::steady_harmonic(cfg.a0, cfg.omega) : ForcingProfile::zero();
  const BasinGrid grid = basin_grid(s.params, profile, s.window, s.settings, basin_settings(cfg));
  const std::string stem = cfg.forced ? "basin_forced" : "basin";

  std::ostringstream csv;
  write_grid_csv(csv, grid,
                 {config_line(cfg, s), "profile=" + profile.description(),
                  "labels: 0=undecided 1=plus 2=minus 3=escaped; rows ordered from v_min to v_max"});
  emit(cfg, stem + ".csv", csv.str());
  if (cfg.svg) {
    SvgCanvas canvas(s.window);
    canvas.cells(grid, BasinLabel::plus, "#202020");
    canvas.cells(grid, BasinLabel::undecided, "#d04040");
    emit(cfg, stem + ".svg", canvas.str());
  }
  std::cout << "plus " << grid.count(BasinLabel::plus) << " minus " << grid.count(BasinLabel::minus) << " undecided "
            << grid.count(BasinLabel::undecided) << " escaped " << grid.count(BasinLabel::escaped) << '\n';
  return 0;
}

int cmd_manifold(const RunConfig& cfg) {
  Setup s = make_setup(cfg);
  const auto branches = stable_manifold(s.params, s.settings, s.window);
  const std::size_t n0 = branches[0].points.size();
  const std::size_t n1 = branches[1].points.size();
  std::ostringstream csv;
  write_polyline_csv(csv,
                     {config_line(cfg, s), "stable manifold of the origin saddle",
                      std::string("branch ") + to_string(branches[0].side) + ": rows 1-" + std::to_string(n0) +
                          ", arc length " + num(branches[0].arc_length()),
                      std::string("branch ") + to_string(branches[1].side) + ": rows " + std::to_string(n0 + 1) + "-" +
                          std::to_string(n0 + n1) + ", arc length " + num(branches[1].arc_length()),
                      "x,v"},
                     {branches[0].points, branches[1].points});
  emit(cfg, "manifold.csv", csv.str());
  if (cfg.svg) {
    SvgCanvas canvas(s.window);
    canvas.polyline(branches[0].points, "black");
    canvas.polyline(branches[1].points, "black");
    emit(cfg, "manifold.svg", canvas.str());
  }
  return 0;
}

int cmd_safe_zone(const RunConfig& cfg) {
  Setup s = make_setup(cfg);
  const ZoneBundle z = unforced_zone(cfg, s);
  std::ostringstream csv;
  write_polyline_csv(csv, {config_line(cfg, s), "safe zone: " + z.zone.description, "x,v"},
                     {ring_states(z.zone.boundary)});
  emit(cfg, "safe_zone.csv", csv.str());
  if (cfg.svg) {
    SvgCanvas canvas(s.window);
    canvas.cells(z.grid, BasinLabel::plus, "#c0c0c0");
    canvas.polyline(ring_states(z.zone.boundary), "black");
    emit(cfg, "safe_zone.svg", canvas.str());
  }
  std::cout << "vertices " << z.zone.boundary.vertices.size() << " area " << num(z.zone.polygon().signed_area())
            << '\n';
  return 0;
}

struct MappingReport {
  BoundaryPolyline transformed;
  OverlapResult overlap;
  double danger = 0.0;
};

MappingReport run_mapping(const RunConfig& cfg, const Setup& s, const SafeZone& zone) {
  MappingReport r;
  MappingSettings mapping;
  mapping.jobs = cfg.jobs;
  r.transformed = map_boundary_backward(s.params, s.profile, zone, s.t_end, s.settings, mapping);
  const Polygon initial = zone.polygon();
  const Polygon image = r.transformed.polygon();
  r.overlap = overlap_area(initial, image, s.window, kOverlapSamples, cfg.jobs);
  r.danger = danger_index(initial, image, s.window, kOverlapSamples, cfg.jobs);
  return r;
}

int cmd_map_boundary(const RunConfig& cfg) {
  Setup s = make_setup(cfg);
  if (s.kind == "on") {
    std::cerr << "map-boundary: the safe zone is built for an unforced final system; use --transient off or accel\n";
    return kExitUsage;
  }
  const ZoneBundle z = unforced_zone(cfg, s);
  const MappingReport r = run_mapping(cfg, s, z.zone);

  std::ostringstream csv;
  write_polyline_csv(csv,
                     {"t=0 preimage of safe zone; profile=" + s.profile.description(), config_line(cfg, s),
                      "escaped " + std::to_string(r.transformed.escaped) +
                          (r.transformed.unreliable ? " (unreliable)" : "") +
                          (r.transformed.depth_limited ? "; refinement depth limit reached" : ""),
                      "x,v"},
                     {ring_states(r.transformed)});
  emit(cfg, "transformed_boundary.csv", csv.str());

  const ForcingProfile before = initial_profile(s, cfg);
  const BasinGrid initial_grid =
      before.kind == ForcingKind::zero ? z.grid
                                       : basin_grid(s.params, before, s.window, s.settings, basin_settings(cfg));
  const SafeZone initial_zone = before.kind == ForcingKind::zero
                                    ? z.zone
                                    : build_safe_zone(initial_grid, z.branches, cfg.cap_v, plus_attractor(s.params));
  const DiscriminatingPoints dp = find_discriminating_points(r.transformed, initial_grid, initial_zone);

  std::cout << "overlap_area " << num(r.overlap.area) << '\n';
  std::cout << "overlap_empty " << (r.overlap.empty ? "true" : "false") << '\n';
  std::cout << "danger_index " << num(r.danger) << '\n';
  std::cout << "escaped " << r.transformed.escaped << (r.transformed.unreliable ? " unreliable" : "") << '\n';
  std::cout << "a_candidates " << dp.a_candidates << '\n';
  std::cout << "b_candidates " << dp.b_candidates << '\n';
  if (dp.a_like) std::cout << "A " << num(dp.a_like->x()) << ',' << num(dp.a_like->y()) << '\n';
  if (dp.b_like) std::cout << "B " << num(dp.b_like->x()) << ',' << num(dp.b_like->y()) << '\n';

  int status = 0;
  if (cfg.verify > 0) {
    const VerificationResult vr = verify_transformed_boundary(s.params, s.profile, z.zone, r.transformed, s.t_end,
                                                              s.window, cfg.verify, s.settings, 0.05, 20130527,
                                                              cfg.jobs);
    std::cout << "verify " << vr.agreed << '/' << vr.tested << ' ' << num(vr.fraction()) << '\n';
    if (vr.fraction() < 0.99) {
      std::cerr << "map-boundary: homeomorphism check below 0.99\n";
      status = kExitNumeric;
    }
  }

  if (cfg.svg) {
    SvgCanvas canvas(s.window);
    canvas.cells(initial_grid, BasinLabel::plus, "#c0c0c0");
    canvas.polyline(ring_states(z.zone.boundary), "black");
    canvas.polyline(ring_states(r.transformed), "black", true);
    if (dp.a_like) canvas.marker(*dp.a_like, "#1060d0");
    if (dp.b_like) canvas.marker(*dp.b_like, "#d03020", true);
    emit(cfg, "transformed_boundary.svg", canvas.str());
  }
  return status;
}

Stated parse_ic(const std::string& text) {
  const auto comma = text.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    const double x = std::stod(text.substr(0, comma), &used);
    const std::string rest = text.substr(comma + 1);
    std::size_t used_v = 0;
    const double v = std::stod(rest, &used_v);
    if (used != comma || used_v != rest.size()) throw std::invalid_argument(text);
    return {x, v};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--ic", "expected x,v but got '" + text + "'");
  }
}

int cmd_simulate(const RunConfig& cfg) {
  Setup s = make_setup(cfg);
  if (cfg.ics.empty()) throw CLI::ValidationError("--ic", "at least one initial condition is required");
  if (!(cfg.duration > 0)) throw CLI::ValidationError("--duration", "must be positive");
  const double t_stop = s.t_end + cfg.duration;
  const AttractorClassifier classifier(s.params, final_profile(s, cfg), s.settings, basin_settings(cfg));
  SvgCanvas canvas(s.window);
  for (std::size_t k = 0; k < cfg.ics.size(); ++k) {
    const Stated ic = parse_ic(cfg.ics[k]);
    const Trajectory traj = integrate(s.params, s.profile, ic, 0.0, t_stop, s.settings);
    std::ostringstream csv;
    csv << "# trajectory from x=" << num(ic.x()) << " v=" << num(ic.y()) << "; profile=" << s.profile.description()
        << '\n';
    csv << "# " << config_line(cfg, s) << '\n';
    csv << "# transient_end t=" << num(s.t_end) << '\n';
    csv << "# status " << to_string(traj.status) << '\n';
    csv << "t,x,v\n";
    for (const auto& sample : traj.samples)
      csv << num(sample.t) << ',' << num(sample.state.x()) << ',' << num(sample.state.y()) << '\n';
    emit(cfg, "trajectory_" + std::to_string(k) + ".csv", csv.str());
    const Stated end = traj.final_state();
    std::string label = "escaped";
    if (traj.status == TerminalStatus::reached_t_final) label = to_string(classifier.classify_final(end));
    std::cout << "ic " << num(ic.x()) << ',' << num(ic.y()) << " final " << num(end.x()) << ',' << num(end.y())
              << " status " << to_string(traj.status) << " label " << label << '\n';
    if (cfg.svg) {
      std::vector<Stated> pts;
      pts.reserve(traj.samples.size());
      for (const auto& sample : traj.samples) pts.push_back(sample.state);
      canvas.polyline(pts, k % 2 ? "#d03020" : "#1060d0");
      canvas.marker(ic, k % 2 ? "#d03020" : "#1060d0", k % 2 == 1);
    }
  }
  if (cfg.svg) emit(cfg, "trajectories.svg", canvas.str());
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  std::vector<double> values;
  for (const std::string& token : cfg.values) {
    if (token.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw CLI::ValidationError("--values", "not a number: '" + token + "'");
    values.push_back(v);
  }
  if (values.empty()) throw CLI::ValidationError("--values", "the sweep range is empty");
  if (cfg.param != "a0" && cfg.param != "scale") throw CLI::ValidationError("--param", "must be a0 or scale");
  Setup base = make_setup(cfg);
  const ZoneBundle z = unforced_zone(cfg, base);
  std::ostringstream csv;
  csv << "# " << config_line(cfg, base) << '\n';
  csv << "# sweep over " << cfg.param << "; initial safe zone = unforced capped safe zone\n";
  csv << cfg.param << ",overlap_area,overlap_empty,danger_index,escaped,status\n";
  for (const double value : values) {
    RunConfig row = cfg;
    if (cfg.param == "a0")
      row.a0 = value;
    else
      row.accel_scale = value;
    csv << num(value) << ',';
    try {
      const Setup s = make_setup(row);
      const MappingReport r = run_mapping(row, s, z.zone);
      csv << num(r.overlap.area) << ',' << (r.overlap.empty ? "true" : "false") << ',' << num(r.danger) << ','
          << r.transformed.escaped << ',' << (r.transformed.unreliable ? "unreliable" : "ok") << '\n';
    } catch (const Error& e) {
      std::string what = e.what();
      for (char& ch : what)
        if (ch == ',' || ch == '\n') ch = ';';
      csv << ",,,,error: " << what << '\n';
    }
  }
  emit(cfg, "sweep.csv", csv.str());
  std::cout << csv.str();
  return 0;
}

int cmd_ingest_check(const RunConfig& cfg) {
  const auto record = load_record(cfg);
  double peak = 0.0;
  for (double a : record->a) peak = std::max(peak, std::abs(a));
  std::cout << "source " << (record->source.empty() ? "synthetic" : record->source) << '\n';
  std::cout << "samples " << record->size() << '\n';
  std::cout << "start " << num(record->start()) << '\n';
  std::cout << "stop " << num(record->stop()) << '\n';
  std::cout << "duration " << num(record->duration()) << '\n';
  std::cout << "peak " << num(peak) << '\n';
  if (cfg.out != ".") emit(cfg, "accelerogram.txt", serialize_accelerogram(*record));
  return 0;
}

// ---------------------------------------------------------------- config

using ConfigMap = std::vector<std::pair<std::string, std::string>>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

ConfigMap read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot read config " + path);
  ConfigMap entries;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--config", path + ": line " + std::to_string(number) + " is not key = value");
    std::string key = trim(line.substr(0, eq));
    for (char& ch : key)
      if (ch == '_') ch = '-';
    entries.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return entries;
}

/// Finds "--config <path>" or "--config=<path>" ahead of CLI11 parsing.
std::optional<std::string> config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

/// Applies config entries to options the command line left unset. Keys that
/// belong to other commands are skipped so one file can serve every command.
void apply_config(CLI::App& app, CLI::App& sub, const ConfigMap& entries) {
  for (const auto& [key, value] : entries) {
    CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (opt == nullptr) {
      bool known = false;
      for (const CLI::App* other : app.get_subcommands({}))
        known = known || other->get_option_no_throw("--" + key) != nullptr;
      if (!known) throw CLI::ValidationError("--config", "unknown key '" + key + "'");
      continue;
    }
    if (key == "config" || opt->count() > 0) continue;
    if (opt->get_type_size() == 0) {
      if (value == "true" || value == "1" || value == "yes") opt->add_result(std::string("true"));
    } else {
      opt->add_result(value);
    }
    opt->run_callback();
  }
}

void add_model_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--config", "Flat key = value file; command-line flags take precedence");
  sub->add_option("--m", cfg.m, "Mass")->capture_default_str();
  sub->add_option("--c", cfg.c, "Damping")->capture_default_str();
  sub->add_option("--k1", cfg.k1, "Linear (negative) stiffness")->capture_default_str();
  sub->add_option("--k2", cfg.k2, "Quadratic stiffness")->capture_default_str();
  sub->add_option("--k3", cfg.k3, "Cubic stiffness")->capture_default_str();
}

void add_run_options(CLI::App* sub, RunConfig& cfg) {
  add_model_options(sub, cfg);
  sub->add_option("--transient", cfg.transient, "off | on | accel | none (auto: accel when --accel is given)")
      ->check(CLI::IsMember({"auto", "off", "on", "accel", "none"}))
      ->capture_default_str();
  sub->add_option("--a0", cfg.a0, "Harmonic forcing amplitude")->capture_default_str();
  sub->add_option("--omega", cfg.omega, "Harmonic forcing frequency")->capture_default_str();
  sub->add_option("--t-end", cfg.t_end, "Switching duration (default 2*pi/3; 2.0 is the alternative)")
      ->capture_default_str();
  sub->add_option("--cap-v", cfg.cap_v, "Velocity cap of the safe zone")->capture_default_str();
  sub->add_option("--window", cfg.window, "Phase window x0,x1,v0,v1")->delimiter(',')->expected(4);
  sub->add_option("--res", cfg.res, "Grid resolution nx,nv")->delimiter(',')->expected(2);
  sub->add_option("--tol", cfg.tol, "Integrator tolerance")->capture_default_str();
  sub->add_option("--accel", cfg.accel, "Accelerogram file (default: bundled synthetic record)");
  sub->add_option("--accel-window", cfg.accel_window, "Accelerogram window t0,t1")->delimiter(',')->expected(2);
  sub->add_option("--accel-scale", cfg.accel_scale, "Accelerogram scale factor")->capture_default_str();
  sub->add_option("--out", cfg.out, "Output directory")->capture_default_str();
  sub->add_option("--jobs", cfg.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  sub->add_flag("--svg", cfg.svg, "Also write an SVG rendering");
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
      return kExitUsage;
    case ErrorCode::io_error:
    case ErrorCode::parse_error:
    case ErrorCode::format_error:
    case ErrorCode::ordering_error:
    case ErrorCode::missing_data:
      return kExitIo;
    default:
      return kExitNumeric;
  }
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Transient basin and safe-zone toolkit for a two-well oscillator"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* fixed = app.add_subcommand("fixed-points", "Equilibria, eigenvalues and stability");
  add_model_options(fixed, cfg);

  auto* basin = app.add_subcommand("basin", "Basin-of-attraction grid");
  add_run_options(basin, cfg);
  basin->add_flag("--forced", cfg.forced, "Stroboscopic basin of the steady harmonic system");

  auto* manifold = app.add_subcommand("manifold", "Stable manifold of the saddle");
  add_run_options(manifold, cfg);

  auto* safe = app.add_subcommand("safe-zone", "Capped safe zone of the unforced system");
  add_run_options(safe, cfg);

  auto* map = app.add_subcommand("map-boundary", "Time-0 preimage of the safe-zone boundary");
  add_run_options(map, cfg);
  map->add_option("--verify", cfg.verify, "Homeomorphism spot-check with N random points");

  auto* simulate = app.add_subcommand("simulate", "Trajectories through the transient and final regimes");
  add_run_options(simulate, cfg);
  simulate->add_option("--ic", cfg.ics, "Initial condition x,v (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  simulate->add_option("--duration", cfg.duration, "Time simulated after the transient")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Overlap and danger index over a parameter range");
  add_run_options(sweep, cfg);
  sweep->add_option("--param", cfg.param, "a0 or scale")->capture_default_str();
  sweep->add_option("--values", cfg.values, "Comma-separated parameter values")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  auto* ingest = app.add_subcommand("ingest-check", "Parse, window and summarize an accelerogram");
  ingest->add_option("--config", "Flat key = value file; command-line flags take precedence");
  ingest->add_option("--accel", cfg.accel, "Accelerogram file (default: bundled synthetic record)");
  ingest->add_option("--accel-window", cfg.accel_window, "Window t0,t1")->delimiter(',')->expected(2);
  ingest->add_option("--accel-scale", cfg.accel_scale, "Scale factor")->capture_default_str();
  ingest->add_option("--out", cfg.out, "Directory for the processed record");

  try {
    try {
      app.parse(argc, argv);
      std::vector<std::string> args(argv + 1, argv + argc);
      if (const auto path = config_path(args)) {
        const ConfigMap entries = read_config(*path);
        for (CLI::App* sub : app.get_subcommands()) apply_config(app, *sub, entries);
      }
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? 0 : kExitUsage;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "fixed-points") return cmd_fixed_points(cfg);
    if (name == "basin") return cmd_basin(cfg);
    if (name == "manifold") return cmd_manifold(cfg);
    if (name == "safe-zone") return cmd_safe_zone(cfg);
    if (name == "map-boundary") return cmd_map_boundary(cfg);
    if (name == "simulate") return cmd_simulate(cfg);
    if (name == "sweep") return cmd_sweep(cfg);
    if (name == "ingest-check") return cmd_ingest_check(cfg);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}
