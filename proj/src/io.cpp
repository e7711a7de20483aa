#include "nlhom/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace nlhom {

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

void write_field_csv(std::ostream& os, const MaskedField& f) {
  const Grid& g = f.grid;
  os << std::setprecision(17);
  os << "# grid " << g.n[0] << ' ' << g.n[1] << ' ' << g.h[0] << ' ' << (g.dim == 2 ? g.h[1] : 0.0) << '\n';
  for (int i = 0; i < g.n[0]; ++i) {
    for (int j = 0; j < g.n[1]; ++j) {
      if (j) os << ',';
      os << f.values[g.index(i, j)];
    }
    os << '\n';
  }
}

void write_field_csv(const std::filesystem::path& path, const MaskedField& f) {
  auto os = open_output(path);
  write_field_csv(os, f);
}

MaskedField read_field_csv(std::istream& is, const Grid& g) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# grid", 0) != 0) throw std::runtime_error("field csv: missing header");
  std::istringstream hdr(line.substr(6));
  int nx = 0, ny = 0;
  hdr >> nx >> ny;
  if (nx != g.n[0] || ny != g.n[1]) throw std::runtime_error("field csv: axis sizes do not match the grid");
  MaskedField f(g);
  for (int i = 0; i < g.n[0]; ++i) {
    if (!std::getline(is, line)) throw std::runtime_error("field csv: truncated");
    std::istringstream row(line);
    std::string cell;
    for (int j = 0; j < g.n[1]; ++j) {
      if (!std::getline(row, cell, ',')) throw std::runtime_error("field csv: short row");
      const double v = std::stod(cell);
      f.values[g.index(i, j)] = v;
      f.mask[g.index(i, j)] = v != 0.0;
    }
  }
  return f;
}

void write_pgm(std::ostream& os, const MaskedField& f, double lo, double hi) {
  const Grid& g = f.grid;
  // Image rows run along the second axis, top row = largest coordinate.
  const int width = g.n[0], height = g.n[1];
  os << "P5\n" << width << ' ' << height << "\n255\n";
  for (int j = height - 1; j >= 0; --j)
    for (int i = 0; i < width; ++i) {
      const double v = std::clamp((f.values[g.index(i, j)] - lo) / (hi - lo), 0.0, 1.0);
      os.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
    }
}

void write_pgm(const std::filesystem::path& path, const MaskedField& f, double lo, double hi) {
  auto os = open_output(path);
  write_pgm(os, f, lo, hi);
}

} // namespace nlhom
