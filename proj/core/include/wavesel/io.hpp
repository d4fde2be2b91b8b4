#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "wavesel/geometry.hpp"

namespace wavesel {

/// Shortest round-trip decimal form of a double ("%.17g" verified, trimmed).
std::string fmt_double(double v);
/// Fixed "%.*g" form used for report tables.
std::string fmt_double(double v, int significant);

/// Point pattern CSV: header "x,y", one row per point.
void write_pattern_csv(std::ostream& os, const PointPattern& p);
void write_pattern_csv(const std::string& path, const PointPattern& p);
PointPattern read_pattern_csv(std::istream& is, const Window& window);
PointPattern read_pattern_csv(const std::string& path, const Window& window);

/// Grid CSV: two header lines ("nx,ny" then "x0,x1,y0,y1") followed by ny
/// rows of nx comma-separated cell values, row iy = 0 first.
void write_grid_csv(std::ostream& os, const GridImage& g);
void write_grid_csv(const std::string& path, const GridImage& g);
GridImage read_grid_csv(std::istream& is);
GridImage read_grid_csv(const std::string& path);

/// Split one CSV record on commas (no quoting; formats here never need it).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace wavesel
