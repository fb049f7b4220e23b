#pragma once

#include <string>
#include <vector>

#include "logschro/grid.hpp"

// Flat binary field format: four little-endian uint32 header words
// (dim, L, M, field count) followed by count * sites little-endian IEEE-754
// doubles in row-major site order. CSV export writes one row per site:
// coordinates then value.

namespace logschro::io {

void write_fields(const std::string& path, const std::vector<GridField>& fields);
std::vector<GridField> read_fields(const std::string& path);

void write_csv(const std::string& path, const GridField& field);

}  // namespace logschro::io
