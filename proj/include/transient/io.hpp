#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "transient/basin.hpp"
#include "transient/model.hpp"

namespace transient {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

/// Grid CSV: the line "# x_min x_max nx v_min v_max nv", then nv rows (v_min
/// first) of nx space-separated label codes. `trailer` lines are appended
/// after the rows as '#' comments.
void write_grid_csv(std::ostream& out, const BasinGrid& grid, const std::vector<std::string>& trailer = {});
BasinGrid read_grid_csv(std::istream& in);

/// Polyline CSV: '#' header lines, then one "x,v" row per point.
void write_polyline_csv(std::ostream& out, const std::vector<std::string>& header,
                        const std::vector<std::vector<Stated>>& pieces);
std::vector<Stated> read_polyline_csv(std::istream& in);

void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Minimal SVG renderer in phase-plane coordinates.
class SvgCanvas {
 public:
  SvgCanvas(const PhaseWindow& window, int width_px = 600);

  void cells(const BasinGrid& grid, BasinLabel label, const std::string& fill);
  void polyline(const std::vector<Stated>& points, const std::string& stroke, bool dashed = false);
  void marker(const Stated& p, const std::string& fill, bool square = false);

  std::string str() const;

 private:
  double px(double x) const;
  double py(double v) const;

  PhaseWindow window_;
  int width_;
  int height_;
  std::string body_;
};

}  // namespace transient
