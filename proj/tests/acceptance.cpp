// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only if all pass.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "transient/basin.hpp"
#include "transient/boundary.hpp"
#include "transient/geometry.hpp"
#include "transient/io.hpp"
#include "transient/manifold.hpp"

namespace fs = std::filesystem;
using namespace transient;

namespace {

const double kX2 = (-1.0 + std::sqrt(5.0)) / 2.0;
const double kX3 = (-1.0 - std::sqrt(5.0)) / 2.0;
const double kSwitch = 2.0 * M_PI / 3.0;

const fs::path kWork = fs::temp_directory_path() / "transient_acceptance";

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(TRANSIENT_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::string value_after(const std::string& text, const std::string& key) {
  for (const auto& line : lines(text))
    if (line.rfind(key + " ", 0) == 0) return line.substr(key.size() + 1);
  return {};
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

fs::path dir(const std::string& name) {
  const fs::path d = kWork / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

BasinGrid read_grid(const fs::path& path) {
  std::istringstream in(slurp(path));
  return read_grid_csv(in);
}

double decided_agreement(const BasinGrid& a, const BasinGrid& b) {
  std::size_t decided = 0, agree = 0;
  auto ok = [](BasinLabel l) { return l == BasinLabel::plus || l == BasinLabel::minus; };
  for (std::size_t k = 0; k < a.labels.size(); ++k) {
    if (!ok(a.labels[k]) || !ok(b.labels[k])) continue;
    ++decided;
    agree += a.labels[k] == b.labels[k];
  }
  return decided == 0 ? 0.0 : double(agree) / double(decided);
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ------------------------------------------------------------------ criteria

Outcome fixed_points_report() {
  const Run r = cli("fixed-points");
  if (r.code != 0) return {false, "exit code " + std::to_string(r.code)};
  const auto rows = lines(r.out);
  if (rows.size() != 5) return {false, "unexpected report shape"};
  const double expected[3] = {kX3, 0.0, kX2};
  const char* kinds[3] = {"stable-focus", "saddle", "stable-focus"};
  double loc_err = 0, eig_err = 0;
  bool kinds_ok = true;
  for (int k = 0; k < 3; ++k) {
    const auto f = split(rows[2 + k], ',');
    if (f.size() != 7) return {false, "unexpected row " + rows[2 + k]};
    const double x = std::stod(f[0]);
    loc_err = std::max(loc_err, std::abs(x - expected[k]));
    kinds_ok = kinds_ok && f[6] == kinds[k];
    // Oracle: roots of lambda^2 + c lambda - (k1 - 2 k2 x - 3 k3 x^2) = 0.
    const double s = 1.0 - 2.0 * expected[k] - 3.0 * expected[k] * expected[k];
    const std::complex<double> disc = std::sqrt(std::complex<double>(0.0625 + 4.0 * s, 0.0));
    std::complex<double> l1 = (-0.25 + disc) / 2.0, l2 = (-0.25 - disc) / 2.0;
    if (l1.imag() < l2.imag() || (l1.imag() == l2.imag() && l1.real() < l2.real())) std::swap(l1, l2);
    const std::complex<double> got1(std::stod(f[2]), std::stod(f[3])), got2(std::stod(f[4]), std::stod(f[5]));
    eig_err = std::max({eig_err, std::abs(got1 - l1), std::abs(got2 - l2)});
  }
  const bool pass = loc_err <= 1e-12 && eig_err <= 1e-9 && kinds_ok;
  return {pass, "location error " + fmt("%.2e", loc_err) + ", eigenvalue error " + fmt("%.2e", eig_err) +
                    (kinds_ok ? ", kinds saddle/stable-focus" : ", wrong kinds")};
}

Outcome roundtrip_defect() {
  const SystemParamsd p;
  IntegratorSettingsd s;
  s.rel_tol = s.abs_tol = 1e-8;
  const ForcingProfile profile = ForcingProfile::switching_off(0.2, 3, kSwitch);
  std::mt19937_64 rng(20130527);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const Stated y0(u(rng), u(rng));
    const FlowResult back = flow_backward(p, profile, y0, kSwitch, s);
    const FlowResult fwd = flow(p, profile, back.state, 0.0, kSwitch, s);
    if (back.status != TerminalStatus::reached_t_final || fwd.status != TerminalStatus::reached_t_final)
      return {false, "integration stopped early"};
    worst = std::max(worst, (fwd.state - y0).norm());
  }
  return {worst < 1e-5, "max defect " + fmt("%.2e", worst) + " over 100 states"};
}

Outcome energy_dissipation() {
  const SystemParamsd p;
  const IntegratorSettingsd s;
  const PhaseWindow w;
  std::size_t trajectories = 0, steps = 0;
  double worst_rise = 0;
  for (int j = 0; j < w.nv; j += 10) {
    for (int i = 0; i < w.nx; i += 10) {
      const Trajectory traj = integrate(p, ForcingProfile::zero(), w.cell_center(i, j), 0.0, 60.0, s);
      for (std::size_t k = 1; k < traj.samples.size(); ++k) {
        const double rise = energy(p, traj.samples[k].state) - energy(p, traj.samples[k - 1].state);
        worst_rise = std::max(worst_rise, rise);
        ++steps;
      }
      ++trajectories;
    }
  }
  return {worst_rise <= 1e-9, "largest per-step energy rise " + fmt("%.2e", worst_rise) + " over " +
                                  std::to_string(steps) + " steps of " + std::to_string(trajectories) +
                                  " trajectories"};
}

Outcome basin_reproduction(const fs::path& out) {
  const Run r = cli("basin --jobs 1 --out " + out.string());
  if (r.code != 0) return {false, "basin exit code " + std::to_string(r.code)};
  const BasinGrid grid = read_grid(out / "basin.csv");
  const double undecided = grid.fraction(BasinLabel::undecided);
  const bool both = grid.count(BasinLabel::plus) > 0 && grid.count(BasinLabel::minus) > 0;
  const auto branches = stable_manifold(SystemParamsd{}, IntegratorSettingsd{}, grid.window);
  const double tracking = interface_tracking_fraction(branches, grid);
  return {undecided < 0.01 && both && tracking >= 0.95,
          "undecided " + fmt("%.4f", undecided) + ", plus " + std::to_string(grid.count(BasinLabel::plus)) +
              ", minus " + std::to_string(grid.count(BasinLabel::minus)) + ", manifold tracking " +
              fmt("%.4f", tracking)};
}

Outcome forced_basin(const fs::path& out) {
  const Run a = cli("basin --res 100,100 --out " + out.string());
  const Run b = cli("basin --forced --a0 0.2 --omega 3 --res 100,100 --out " + out.string());
  if (a.code != 0 || b.code != 0) return {false, "basin command failed"};
  const double agree = decided_agreement(read_grid(out / "basin.csv"), read_grid(out / "basin_forced.csv"));
  return {agree >= 0.90, "agreement on decided cells " + fmt("%.4f", agree)};
}

double verified_fraction(const Run& r) {
  const std::string v = value_after(r.out, "verify");
  if (v.empty()) return -1;
  return std::stod(v.substr(v.find(' ') + 1));
}

struct MapRuns {
  Run switching;
  Run accel;
  double switching_seconds = 0;
  double accel_seconds = 0;
};

Outcome homeomorphism(const fs::path& off_dir, const fs::path& accel_dir, MapRuns& runs) {
  auto t0 = std::chrono::steady_clock::now();
  runs.switching = cli("map-boundary --jobs 1 --verify 1000 --out " + off_dir.string());
  runs.switching_seconds = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  runs.accel = cli("map-boundary --jobs 1 --transient accel --accel " + std::string(TRANSIENT_DATA_DIR) +
                   "/synthetic_accelerogram.txt --verify 1000 --out " + accel_dir.string());
  runs.accel_seconds = seconds_since(t0);
  const double f1 = verified_fraction(runs.switching);
  const double f2 = verified_fraction(runs.accel);
  const bool in_time = runs.switching_seconds < 120 && runs.accel_seconds < 120;
  return {f1 >= 0.99 && f2 >= 0.99 && in_time,
          "switching-off " + fmt("%.3f", f1) + " (" + fmt("%.1f", runs.switching_seconds) + " s), synthetic record " +
              fmt("%.3f", f2) + " (" + fmt("%.1f", runs.accel_seconds) + " s) of 1000 points"};
}

Outcome ab_phenomenon(const MapRuns& runs, const fs::path& out) {
  const std::string a = value_after(runs.switching.out, "A");
  const std::string b = value_after(runs.switching.out, "B");
  if (a.empty() || b.empty()) return {false, "map-boundary reported no A-like or B-like point"};
  const Run sim = cli("simulate --ic=" + a + " --ic=" + b + " --out " + out.string());
  if (sim.code != 0) return {false, "simulate exit code " + std::to_string(sim.code)};
  auto final_x = [&](const std::string& file) {
    const auto rows = lines(slurp(out / file));
    return std::stod(split(rows.back(), ',')[1]);
  };
  const double xa = final_x("trajectory_0.csv");
  const double xb = final_x("trajectory_1.csv");
  const bool pass = std::abs(xa - kX2) <= 1e-3 && std::abs(xb - kX3) <= 1e-3;
  return {pass, "A=(" + a + ") ends at x=" + fmt("%.6f", xa) + ", B=(" + b + ") ends at x=" + fmt("%.6f", xb)};
}

Outcome identity_transient(const fs::path& grid_file) {
  const SystemParamsd p;
  const IntegratorSettingsd s;
  const BasinGrid grid = read_grid(grid_file);
  const auto branches = stable_manifold(p, s, grid.window);
  const SafeZone zone = build_safe_zone(grid, branches, 1.0, Stated(kX2, 0));
  const auto t0 = std::chrono::steady_clock::now();
  const BoundaryPolyline same = map_boundary_backward(p, ForcingProfile::switching_off(0.2, 3, 0.0), zone, 0.0, s);
  const double danger = danger_index(zone.polygon(), same.polygon(), grid.window, 250000);
  const double elapsed = seconds_since(t0);
  double worst = same.vertices.size() == zone.boundary.vertices.size() ? 0.0 : INFINITY;
  for (std::size_t k = 0; std::isfinite(worst) && k < same.vertices.size(); ++k)
    worst = std::max(worst, (same.vertices[k].state - zone.boundary.vertices[k].state).norm());
  return {worst <= 1e-12 && danger == 0.0 && elapsed < 1.0,
          "max displacement " + fmt("%.1e", worst) + ", danger index " + fmt("%g", danger) + " (" +
              fmt("%.2f", elapsed) + " s)"};
}

Outcome determinism(const fs::path& basin1, const fs::path& off1, const fs::path& accel1) {
  const fs::path basin8 = dir("c9_basin"), off8 = dir("c9_switching"), accel8 = dir("c9_accel");
  const Run a = cli("basin --jobs 8 --out " + basin8.string());
  const Run b = cli("map-boundary --jobs 8 --verify 1000 --out " + off8.string());
  const Run c = cli("map-boundary --jobs 8 --transient accel --accel " + std::string(TRANSIENT_DATA_DIR) +
                    "/synthetic_accelerogram.txt --verify 1000 --out " + accel8.string());
  if (a.code != 0 || b.code != 0 || c.code != 0) return {false, "rerun failed"};
  const bool grid_same = slurp(basin1 / "basin.csv") == slurp(basin8 / "basin.csv");
  const bool off_same =
      slurp(off1 / "transformed_boundary.csv") == slurp(off8 / "transformed_boundary.csv");
  const bool accel_same =
      slurp(accel1 / "transformed_boundary.csv") == slurp(accel8 / "transformed_boundary.csv");
  auto word = [](bool same) { return same ? "identical" : "DIFFERENT"; };
  return {grid_same && off_same && accel_same, std::string("basin.csv ") + word(grid_same) +
                                                   ", switching-off boundary " + word(off_same) +
                                                   ", synthetic-record boundary " + word(accel_same)};
}

}  // namespace

int main() {
  fs::create_directories(kWork);
  int failures = 0;
  auto report = [&](int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = seconds_since(t0);
    const bool in_time = limit_s <= 0 || elapsed < limit_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("[%s] %d %s: %s; %.1f s%s\n", pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), elapsed,
                in_time ? "" : " (over time limit)");
    std::fflush(stdout);
  };

  const fs::path c4 = dir("c4"), c5 = dir("c5"), c6_off = dir("c6_switching"), c6_accel = dir("c6_accel"),
                 c7 = dir("c7");
  MapRuns runs;

  report(1, "fixed points", 1.0, fixed_points_report);
  report(2, "integrator roundtrip", 10.0, roundtrip_defect);
  report(3, "energy dissipation", 0.0, energy_dissipation);
  report(4, "basin reproduction", 120.0, [&] { return basin_reproduction(c4); });
  report(5, "forced basin approximation", 300.0, [&] { return forced_basin(c5); });
  report(6, "transformed boundary homeomorphism", 0.0, [&] { return homeomorphism(c6_off, c6_accel, runs); });
  report(7, "A/B phenomenon", 180.0, [&] {
    Outcome o = ab_phenomenon(runs, c7);
    o.pass = o.pass && runs.switching_seconds < 180.0;
    o.detail += "; map-boundary took " + fmt("%.1f", runs.switching_seconds) + " s";
    return o;
  });
  report(8, "identity transient", 0.0, [&] { return identity_transient(c4 / "basin.csv"); });
  report(9, "determinism across --jobs", 0.0, [&] { return determinism(c4, c6_off, c6_accel); });

  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
