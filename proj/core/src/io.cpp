#include "wavesel/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace wavesel {

std::string fmt_double(double v) {
  // Try increasing precision until the value round-trips; keeps files compact
  // while remaining lossless.
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string fmt_double(double v, int significant) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", significant, v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

void write_pattern_csv(std::ostream& os, const PointPattern& p) {
  os << "x,y\n";
  for (const Point& q : p.points) os << fmt_double(q.x) << ',' << fmt_double(q.y) << '\n';
}

void write_pattern_csv(const std::string& path, const PointPattern& p) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_pattern_csv(os, p);
}

PointPattern read_pattern_csv(std::istream& is, const Window& window) {
  PointPattern p;
  p.window = window;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("pattern CSV: empty file");
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "x" || header[1] != "y")
    throw std::runtime_error("pattern CSV: expected header \"x,y\"");
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() < 2)
      throw std::runtime_error("pattern CSV: line " + std::to_string(lineno) + ": expected two fields");
    char* end = nullptr;
    double x = std::strtod(f[0].c_str(), &end);
    if (end == f[0].c_str()) throw std::runtime_error("pattern CSV: line " + std::to_string(lineno) + ": bad x");
    double y = std::strtod(f[1].c_str(), &end);
    if (end == f[1].c_str()) throw std::runtime_error("pattern CSV: line " + std::to_string(lineno) + ": bad y");
    p.points.push_back({x, y});
  }
  return p;
}

PointPattern read_pattern_csv(const std::string& path, const Window& window) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_pattern_csv(is, window);
}

void write_grid_csv(std::ostream& os, const GridImage& g) {
  os << g.nx << ',' << g.ny << '\n';
  os << fmt_double(g.window.x0) << ',' << fmt_double(g.window.x1) << ','
     << fmt_double(g.window.y0) << ',' << fmt_double(g.window.y1) << '\n';
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      if (ix) os << ',';
      os << fmt_double(g.values(iy, ix));
    }
    os << '\n';
  }
}

void write_grid_csv(const std::string& path, const GridImage& g) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_grid_csv(os, g);
}

GridImage read_grid_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("grid CSV: empty file");
  auto res = split_csv_line(line);
  if (res.size() != 2) throw std::runtime_error("grid CSV: header line 1 must be \"nx,ny\"");
  int nx = std::atoi(res[0].c_str()), ny = std::atoi(res[1].c_str());
  if (nx <= 0 || ny <= 0) throw std::runtime_error("grid CSV: non-positive resolution");
  if (!std::getline(is, line)) throw std::runtime_error("grid CSV: missing window line");
  auto wf = split_csv_line(line);
  if (wf.size() != 4) throw std::runtime_error("grid CSV: header line 2 must be \"x0,x1,y0,y1\"");
  Window w{std::strtod(wf[0].c_str(), nullptr), std::strtod(wf[1].c_str(), nullptr),
           std::strtod(wf[2].c_str(), nullptr), std::strtod(wf[3].c_str(), nullptr)};
  GridImage g(nx, ny, w);
  for (int iy = 0; iy < ny; ++iy) {
    if (!std::getline(is, line))
      throw std::runtime_error("grid CSV: expected " + std::to_string(ny) + " value rows");
    auto f = split_csv_line(line);
    if (static_cast<int>(f.size()) != nx)
      throw std::runtime_error("grid CSV: row " + std::to_string(iy) + ": expected " +
                               std::to_string(nx) + " values");
    for (int ix = 0; ix < nx; ++ix) g.values(iy, ix) = std::strtod(f[ix].c_str(), nullptr);
  }
  return g;
}

GridImage read_grid_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_grid_csv(is);
}

}  // namespace wavesel
