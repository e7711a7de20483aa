#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "nlhom/grid.hpp"

namespace nlhom {

/// "# grid nx ny hx hy" followed by one row of values per first-axis index.
void write_field_csv(std::ostream& os, const MaskedField& f);
void write_field_csv(const std::filesystem::path& path, const MaskedField& f);
/// Reads the values back into a field on `g`; the mask is set where values != 0.
MaskedField read_field_csv(std::istream& is, const Grid& g);

/// Binary 8-bit PGM. Values are clamped to [lo, hi] and mapped to 0..255, so a
/// chi_eps indicator renders holes (and the exterior) black and Omega^eps white.
void write_pgm(std::ostream& os, const MaskedField& f, double lo = 0.0, double hi = 1.0);
void write_pgm(const std::filesystem::path& path, const MaskedField& f, double lo = 0.0, double hi = 1.0);

/// Opens `path` for writing, creating parent directories; throws on failure.
std::ofstream open_output(const std::filesystem::path& path);

} // namespace nlhom
