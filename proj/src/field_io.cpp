#include "logschro/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace logschro::io {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("field read: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t u = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("field read: truncated data");
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(u);
}

}  // namespace

void write_fields(const std::string& path, const std::vector<GridField>& fields) {
  if (fields.empty()) throw std::invalid_argument("write_fields: no fields");
  const PeriodicGrid& g = fields.front().grid;
  for (const GridField& f : fields)
    if (!(f.grid == g)) throw std::invalid_argument("write_fields: mixed grids");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_fields: cannot open " + path);
  put_u32(os, static_cast<std::uint32_t>(g.dim));
  put_u32(os, static_cast<std::uint32_t>(g.halfwidth));
  put_u32(os, static_cast<std::uint32_t>(g.points_per_unit));
  put_u32(os, static_cast<std::uint32_t>(fields.size()));
  for (const GridField& f : fields)
    for (double v : f.values) put_f64(os, v);
  if (!os) throw std::runtime_error("write_fields: write failed for " + path);
}

std::vector<GridField> read_fields(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_fields: cannot open " + path);
  std::uint32_t dim = get_u32(is), L = get_u32(is), M = get_u32(is), count = get_u32(is);
  PeriodicGrid g = build_grid(static_cast<int>(dim), static_cast<int>(L), static_cast<int>(M));
  std::vector<GridField> fields;
  fields.reserve(count);
  for (std::uint32_t c = 0; c < count; ++c) {
    GridField f(g);
    for (std::size_t i = 0; i < g.sites; ++i) f.values[i] = get_f64(is);
    require_finite(f, "read_fields");
    fields.push_back(std::move(f));
  }
  return fields;
}

void write_csv(const std::string& path, const GridField& field) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_csv: cannot open " + path);
  os.precision(std::numeric_limits<double>::max_digits10);
  const PeriodicGrid& g = field.grid;
  for (int d = 0; d < g.dim; ++d) os << "x" << d << ",";
  os << "value\n";
  for (std::size_t i = 0; i < g.sites; ++i) {
    auto x = g.position(i);
    for (int d = 0; d < g.dim; ++d) os << x[d] << ",";
    os << field.values[i] << "\n";
  }
}

}  // namespace logschro::io
