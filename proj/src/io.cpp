#include "transient/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "transient/error.hpp"

namespace transient {

std::string format_number(double value) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error(ErrorCode::invalid_argument, "unformattable number");
  return std::string(buf, ptr);
}

void write_grid_csv(std::ostream& out, const BasinGrid& grid, const std::vector<std::string>& trailer) {
  const PhaseWindow& w = grid.window;
  out << "# " << format_number(w.x_min) << ' ' << format_number(w.x_max) << ' ' << w.nx << ' '
      << format_number(w.v_min) << ' ' << format_number(w.v_max) << ' ' << w.nv << '\n';
  std::string row;
  for (int j = 0; j < w.nv; ++j) {
    row.clear();
    for (int i = 0; i < w.nx; ++i) {
      if (i) row += ' ';
      row += char('0' + static_cast<int>(grid.at(i, j)));
    }
    out << row << '\n';
  }
  for (const auto& line : trailer) out << "# " << line << '\n';
}

BasinGrid read_grid_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw Error(ErrorCode::format_error, "grid file lacks its geometry header");
  BasinGrid grid;
  std::istringstream head(line.substr(2));
  PhaseWindow& w = grid.window;
  if (!(head >> w.x_min >> w.x_max >> w.nx >> w.v_min >> w.v_max >> w.nv))
    throw Error(ErrorCode::format_error, "malformed grid geometry header");
  w.validate();
  grid.labels.reserve(static_cast<std::size_t>(w.nx) * w.nv);
  for (int j = 0; j < w.nv; ++j) {
    if (!std::getline(in, line)) throw Error(ErrorCode::format_error, "grid file has too few rows");
    std::istringstream row(line);
    int code = 0;
    int count = 0;
    while (row >> code) {
      if (code < 0 || code > 3) throw Error(ErrorCode::format_error, "unknown label code");
      grid.labels.push_back(static_cast<BasinLabel>(code));
      ++count;
    }
    if (count != w.nx) throw Error(ErrorCode::format_error, "grid row has the wrong length");
  }
  return grid;
}

void write_polyline_csv(std::ostream& out, const std::vector<std::string>& header,
                        const std::vector<std::vector<Stated>>& pieces) {
  for (const auto& line : header) out << "# " << line << '\n';
  for (const auto& piece : pieces)
    for (const Stated& p : piece) out << format_number(p.x()) << ',' << format_number(p.y()) << '\n';
}

std::vector<Stated> read_polyline_csv(std::istream& in) {
  std::vector<Stated> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::format_error, "polyline row lacks a comma");
    double x = 0, v = 0;
    const auto rx = std::from_chars(line.data(), line.data() + comma, x);
    const auto rv = std::from_chars(line.data() + comma + 1, line.data() + line.size(), v);
    if (rx.ec != std::errc() || rv.ec != std::errc()) throw Error(ErrorCode::format_error, "malformed polyline row");
    out.emplace_back(x, v);
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

SvgCanvas::SvgCanvas(const PhaseWindow& window, int width_px) : window_(window), width_(width_px) {
  height_ = static_cast<int>(width_px * (window.v_max - window.v_min) / (window.x_max - window.x_min));
}

double SvgCanvas::px(double x) const { return (x - window_.x_min) / (window_.x_max - window_.x_min) * width_; }
double SvgCanvas::py(double v) const { return (window_.v_max - v) / (window_.v_max - window_.v_min) * height_; }

void SvgCanvas::cells(const BasinGrid& grid, BasinLabel label, const std::string& fill) {
  const PhaseWindow& w = grid.window;
  const double cw = w.dx() / (window_.x_max - window_.x_min) * width_;
  const double ch = w.dv() / (window_.v_max - window_.v_min) * height_;
  char buf[160];
  for (int j = 0; j < w.nv; ++j) {
    // Merge horizontal runs to keep the file small.
    int i = 0;
    while (i < w.nx) {
      if (grid.at(i, j) != label) {
        ++i;
        continue;
      }
      int k = i;
      while (k < w.nx && grid.at(k, j) == label) ++k;
      std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n",
                    px(w.x_min + i * w.dx()), py(w.v_min + (j + 1) * w.dv()), cw * (k - i) + 0.3, ch + 0.3,
                    fill.c_str());
      body_ += buf;
      i = k;
    }
  }
}

void SvgCanvas::polyline(const std::vector<Stated>& points, const std::string& stroke, bool dashed) {
  body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"1.2\"";
  if (dashed) body_ += " stroke-dasharray=\"2,2\"";
  body_ += " points=\"";
  char buf[48];
  for (const Stated& p : points) {
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(p.x()), py(p.y()));
    body_ += buf;
  }
  body_ += "\"/>\n";
}

void SvgCanvas::marker(const Stated& p, const std::string& fill, bool square) {
  char buf[160];
  if (square)
    std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"8\" height=\"8\" fill=\"%s\"/>\n",
                  px(p.x()) - 4, py(p.y()) - 4, fill.c_str());
  else
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" fill=\"%s\"/>\n", px(p.x()), py(p.y()),
                  fill.c_str());
  body_ += buf;
}

std::string SvgCanvas::str() const {
  char head[200];
  std::snprintf(head, sizeof head,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\">\n"
                "<rect width=\"100%%\" height=\"100%%\" fill=\"white\"/>\n",
                width_, height_, width_, height_);
  return std::string(head) + body_ + "</svg>\n";
}

}  // namespace transient
