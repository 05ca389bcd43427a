#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "transient/io.hpp"

namespace fs = std::filesystem;
using namespace transient;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(TRANSIENT_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "transient_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
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

}  // namespace

TEST_CASE("fixed-points report") {
  const Run r = run("fixed-points");
  CHECK(r.code == 0);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 5u);
  CHECK(rows[1] == "x,v,re1,im1,re2,im2,kind");
  CHECK(std::abs(std::stod(rows[2]) - (-1.0 - std::sqrt(5.0)) / 2.0) < 1e-12);
  CHECK(std::stod(rows[3]) == 0.0);
  CHECK(std::abs(std::stod(rows[4]) - (-1.0 + std::sqrt(5.0)) / 2.0) < 1e-12);
  CHECK(rows[3].find("saddle") != std::string::npos);
  CHECK(rows[2].find("stable-focus") != std::string::npos);
  CHECK(rows[4].find("stable-focus") != std::string::npos);

  CHECK(run("fixed-points --c 0.25").out == r.out);
  const Run degenerate = run("fixed-points --k1 0 --k2 0 --k3 0");
  CHECK(degenerate.code != 0);
  CHECK(degenerate.code == 2);
}

TEST_CASE("usage and I/O failures") {
  CHECK(run("").code == 1);
  CHECK(run("fixed-points --bogus 1").code == 1);
  CHECK(run("basin --res 1,1").code == 1);
  CHECK(run("sweep --values \"\"").code == 1);
  CHECK(run("sweep").code == 1);
  CHECK(run("ingest-check --accel /nonexistent/record.txt").code == 3);
  CHECK(run("fixed-points --config /nonexistent/config.txt").code == 3);
}

TEST_CASE("basin grid file") {
  const fs::path dir = scratch("basin");
  const Run r = run("basin --res 20,16 --out " + dir.string());
  CHECK(r.code == 0);
  const std::string text = slurp(dir / "basin.csv");
  const auto rows = lines(text);
  REQUIRE(rows.size() > 17u);
  CHECK(rows[0] == "# -3 3 20 -3 3 16");
  for (int j = 1; j <= 16; ++j) {
    std::istringstream row(rows[j]);
    int code = 0, count = 0;
    while (row >> code) {
      CHECK(code >= 0);
      CHECK(code <= 3);
      ++count;
    }
    CHECK(count == 20);
  }
  CHECK(text.find("config: m=1 c=0.25 k1=1 k2=1 k3=1") != std::string::npos);

  std::istringstream in(text);
  const BasinGrid grid = read_grid_csv(in);
  CHECK(grid.window.nx == 20);
  CHECK(grid.window.nv == 16);
  std::ostringstream again;
  write_grid_csv(again, grid);
  CHECK(text.rfind(again.str(), 0) == 0);

  const fs::path parallel = scratch("basin_jobs");
  CHECK(run("basin --res 20,16 --jobs 3 --out " + parallel.string()).code == 0);
  CHECK(slurp(parallel / "basin.csv") == text);

  CHECK(run("basin --forced --res 12,12 --svg --out " + dir.string()).code == 0);
  CHECK(slurp(dir / "basin_forced.csv").rfind("# -3 3 12 -3 3 12\n", 0) == 0);
  CHECK(slurp(dir / "basin_forced.svg").rfind("<svg", 0) == 0);
}

TEST_CASE("config file with command-line override") {
  const fs::path dir = scratch("config");
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "# shared settings\nc = 0.5\nk3 = 2   # stiffer\nres = 10,10\n";
  }
  const Run from_file = run("fixed-points --config " + (dir / "run.cfg").string());
  CHECK(from_file.code == 0);
  CHECK(from_file.out.find("c=0.5 k1=1 k2=1 k3=2") != std::string::npos);

  const Run overridden = run("fixed-points --config " + (dir / "run.cfg").string() + " --c 0.25");
  CHECK(overridden.out.find("c=0.25 k1=1 k2=1 k3=2") != std::string::npos);

  {
    std::ofstream bad(dir / "bad.cfg");
    bad << "colour = blue\n";
  }
  CHECK(run("fixed-points --config " + (dir / "bad.cfg").string()).code == 1);
}

TEST_CASE("manifold and safe-zone files") {
  const fs::path dir = scratch("zone");
  CHECK(run("manifold --out " + dir.string()).code == 0);
  const std::string manifold = slurp(dir / "manifold.csv");
  CHECK(manifold.find("# branch eigvec-plus: rows 1-") != std::string::npos);
  std::istringstream in(manifold);
  const auto pts = read_polyline_csv(in);
  CHECK(pts.size() > 1000u);
  CHECK(pts.front().norm() < 1e-5);

  const Run zone = run("safe-zone --res 60,60 --svg --out " + dir.string());
  CHECK(zone.code == 0);
  std::istringstream ring_in(slurp(dir / "safe_zone.csv"));
  const auto ring = read_polyline_csv(ring_in);
  REQUIRE(ring.size() > 10u);
  CHECK(ring.front() == ring.back());
  CHECK(fs::exists(dir / "safe_zone.svg"));
}

TEST_CASE("map-boundary report") {
  const fs::path dir = scratch("map");
  const Run identity = run("map-boundary --t-end 0 --res 60,60 --out " + dir.string());
  CHECK(identity.code == 0);
  CHECK(value_after(identity.out, "danger_index") == "0");
  CHECK(value_after(identity.out, "overlap_empty") == "false");
  const std::string csv = slurp(dir / "transformed_boundary.csv");
  CHECK(csv.rfind("# t=0 preimage of safe zone; profile=switching-off a0=0.2 omega=3 t_end=0\n", 0) == 0);

  const Run accel = run("map-boundary --transient accel --accel " + std::string(TRANSIENT_DATA_DIR) +
                        "/synthetic_accelerogram.txt --res 60,60 --verify 200 --out " + dir.string());
  CHECK(accel.code == 0);
  const std::string verify = value_after(accel.out, "verify");
  REQUIRE_FALSE(verify.empty());
  CHECK(std::stod(verify.substr(verify.find(' ') + 1)) >= 0.99);
  CHECK(slurp(dir / "transformed_boundary.csv").find("profile=accelerogram scale=1 t_end=3") != std::string::npos);

  CHECK(run("map-boundary --transient on --res 20,20 --out " + dir.string()).code == 1);
}

TEST_CASE("simulate writes one trajectory per initial condition") {
  const fs::path dir = scratch("simulate");
  const Run r = run("simulate --transient none --ic 0.618034,0 --ic=-1,0.5 --duration 20 --out " + dir.string());
  CHECK(r.code == 0);
  const std::string traj = slurp(dir / "trajectory_0.csv");
  CHECK(traj.find("# transient_end t=0\n") != std::string::npos);
  std::size_t rows = 0;
  double worst = 0;
  for (const auto& line : lines(traj)) {
    if (line.empty() || line[0] == '#' || line[0] == 't') continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    worst = std::max(worst, std::abs(std::stod(line.substr(c1 + 1, c2 - c1 - 1)) - 0.618034));
    worst = std::max(worst, std::abs(std::stod(line.substr(c2 + 1))));
    ++rows;
  }
  CHECK(rows > 10u);
  CHECK(worst < 1e-6);
  CHECK(fs::exists(dir / "trajectory_1.csv"));

  CHECK(run("simulate --ic 0.5,0 --duration 1 --out " + dir.string()).code == 0);
  CHECK(slurp(dir / "trajectory_0.csv").find("# transient_end t=2.0943951023931953\n") != std::string::npos);
  CHECK(run("simulate --ic 0.5 --out " + dir.string()).code == 1);
}

TEST_CASE("sweep table") {
  const fs::path dir = scratch("sweep");
  const Run one = run("sweep --values 0 --res 60,60 --out " + dir.string());
  CHECK(one.code == 0);
  auto rows = lines(slurp(dir / "sweep.csv"));
  REQUIRE(rows.size() == 4u);
  CHECK(rows[2] == "a0,overlap_area,overlap_empty,danger_index,escaped,status");
  CHECK(rows[3].rfind("0,", 0) == 0);
  CHECK(rows[3].find(",false,0,0,ok") != std::string::npos);

  CHECK(run("sweep --values 0,0.2 --res 60,60 --out " + dir.string()).code == 0);
  rows = lines(slurp(dir / "sweep.csv"));
  CHECK(rows.size() == 5u);
  CHECK(rows[4].rfind("0.2,", 0) == 0);

  // A failing row is recorded and the run continues.
  CHECK(run("sweep --values 250,0 --t-end 3 --res 60,60 --out " + dir.string()).code == 0);
  rows = lines(slurp(dir / "sweep.csv"));
  REQUIRE(rows.size() == 5u);
  CHECK(rows[3].find("error") != std::string::npos);
  CHECK(rows[4].find(",ok") != std::string::npos);
}

TEST_CASE("ingest-check") {
  const Run r = run("ingest-check --accel " + std::string(TRANSIENT_DATA_DIR) + "/synthetic_accelerogram.txt");
  CHECK(r.code == 0);
  CHECK(value_after(r.out, "samples") == "301");
  CHECK(value_after(r.out, "duration") == "3");
  CHECK(value_after(r.out, "peak") == "0.3");

  const fs::path dir = scratch("ingest");
  const Run w = run("ingest-check --accel-window 1,2.5 --accel-scale -2 --out " + dir.string());
  CHECK(w.code == 0);
  CHECK(value_after(w.out, "duration") == "1.5");
  CHECK(fs::exists(dir / "accelerogram.txt"));

  {
    std::ofstream bad(dir / "bad.txt");
    bad << "0 1\n0.5 oops\n";
  }
  CHECK(run("ingest-check --accel " + (dir / "bad.txt").string()).code == 3);
}
