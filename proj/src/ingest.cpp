#include "transient/ingest.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "transient/error.hpp"
#include "transient/io.hpp"

namespace transient {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_number(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size() && std::isfinite(out);
}

std::string at_line(std::size_t line) { return " (line " + std::to_string(line) + ")"; }

// "# dt=0.02", "#dt = 0.02"
bool parse_dt_comment(std::string_view comment, double& dt, std::size_t line) {
  comment = trim(comment.substr(1));
  if (comment.substr(0, 2) != "dt") return false;
  comment = trim(comment.substr(2));
  if (comment.empty() || comment.front() != '=') return false;
  if (!parse_number(trim(comment.substr(1)), dt) || !(dt > 0))
    throw Error(ErrorCode::format_error, "invalid dt declaration" + at_line(line));
  return true;
}

}  // namespace

Accelerogram parse_accelerogram(std::string_view text, std::string source) {
  Accelerogram rec;
  rec.source = std::move(source);
  double dt = 0;
  bool have_dt = false;
  int columns = 0;
  std::vector<double> single;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      double value = 0;
      if (parse_dt_comment(line, value, line_no)) {
        dt = value;
        have_dt = true;
      }
      continue;
    }

    std::array<double, 3> fields{};
    int count = 0;
    std::size_t p = 0;
    while (p < line.size()) {
      while (p < line.size() && (line[p] == ' ' || line[p] == '\t' || line[p] == ',')) ++p;
      if (p >= line.size()) break;
      std::size_t q = p;
      while (q < line.size() && line[q] != ' ' && line[q] != '\t' && line[q] != ',') ++q;
      if (count == 2) throw Error(ErrorCode::parse_error, "too many columns" + at_line(line_no));
      if (!parse_number(line.substr(p, q - p), fields[count]))
        throw Error(ErrorCode::parse_error, "malformed number '" + std::string(line.substr(p, q - p)) + "'" +
                                                at_line(line_no));
      ++count;
      p = q;
    }
    if (columns == 0) columns = count;
    if (count != columns) throw Error(ErrorCode::format_error, "inconsistent column count" + at_line(line_no));

    if (count == 1) {
      single.push_back(fields[0]);
      continue;
    }
    if (fields[0] < 0) throw Error(ErrorCode::ordering_error, "negative time" + at_line(line_no));
    if (!rec.t.empty() && !(fields[0] > rec.t.back()))
      throw Error(ErrorCode::ordering_error, "time not strictly increasing" + at_line(line_no));
    rec.t.push_back(fields[0]);
    rec.a.push_back(fields[1]);
  }

  if (columns == 1) {
    if (!have_dt) throw Error(ErrorCode::format_error, "one-column record needs a '# dt=<value>' header");
    for (std::size_t i = 0; i < single.size(); ++i) {
      rec.t.push_back(double(i) * dt);
      rec.a.push_back(single[i]);
    }
  }
  if (rec.empty()) throw Error(ErrorCode::missing_data, "accelerogram has no samples");
  return rec;
}

Accelerogram read_accelerogram(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_accelerogram(buf.str(), path.filename().string());
}

std::string serialize_accelerogram(const Accelerogram& record) {
  std::string out;
  if (!record.source.empty()) out += "# source=" + record.source + "\n";
  for (std::size_t i = 0; i < record.size(); ++i) out += format_number(record.t[i]) + " " + format_number(record.a[i]) + "\n";
  return out;
}

Accelerogram window_and_scale(const Accelerogram& record, double t_start, double t_stop, double scale) {
  if (record.empty()) throw Error(ErrorCode::missing_data, "accelerogram has no samples");
  if (!(t_start < t_stop) || t_start < record.start() || t_stop > record.stop())
    throw Error(ErrorCode::invalid_argument, "empty or out-of-support accelerogram window");
  Accelerogram out;
  out.source = record.source;
  auto push = [&](double t, double a) {
    out.t.push_back(t - t_start);
    out.a.push_back(a * scale + 0.0);  // + 0.0 turns -0 into 0
  };
  push(t_start, record.interpolate(t_start));
  for (std::size_t i = 0; i < record.size(); ++i)
    if (record.t[i] > t_start && record.t[i] < t_stop) push(record.t[i], record.a[i]);
  push(t_stop, record.interpolate(t_stop));
  out.t.back() = t_stop - t_start;
  return out;
}

Accelerogram synthetic_record() {
  struct Mode {
    double amplitude, decay, omega, phase;
  };
  constexpr std::array<Mode, 3> modes{{{1.0, 0.6, 9.0, 0.0}, {0.7, 0.9, 4.4, 0.8}, {0.45, 0.4, 2.1, 0.0}}};
  constexpr int n = 301;
  constexpr double dt = 0.01;
  std::vector<double> raw(n);
  double peak = 0;
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    double a = 0;
    for (const Mode& m : modes) a += m.amplitude * std::exp(-m.decay * t) * std::sin(m.omega * t + m.phase);
    a *= std::sin(std::min(1.0, t / 0.1) * M_PI / 2);  // start from rest
    if (t > 2.5) a *= 0.5 * (1 + std::cos(M_PI * (t - 2.5) / 0.5));
    raw[i] = a;
    peak = std::max(peak, std::abs(a));
  }
  Accelerogram rec;
  rec.source = "synthetic";
  for (int i = 0; i < n; ++i) {
    rec.t.push_back(std::round(i * dt * 100.0) / 100.0);
    rec.a.push_back(std::round(raw[i] * 0.3 / peak * 1e6) / 1e6 + 0.0);
  }
  return rec;
}

}  // namespace transient
