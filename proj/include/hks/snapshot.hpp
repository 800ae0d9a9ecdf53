#pragma once

// Binary field snapshots:
//   "HKS1" | u32 dim | u32 n | n^dim float64 values, all little-endian, row-major.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hks/errors.hpp"
#include "hks/spectral.hpp"

namespace hks {

class SnapshotError : public Error {
 public:
  using Error::Error;
};

namespace detail {

template <class T>
T to_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::array<unsigned char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &v, sizeof(T));
    std::reverse(bytes.begin(), bytes.end());
    std::memcpy(&v, bytes.data(), sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little_endian(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
bool get(std::istream& is, T& v) {
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) return false;
  v = to_little_endian(v);
  return true;
}

inline constexpr std::array<char, 4> kSnapshotMagic = {'H', 'K', 'S', '1'};

}  // namespace detail

inline void write_snapshot(std::ostream& os, const RealField& f) {
  os.write(detail::kSnapshotMagic.data(), detail::kSnapshotMagic.size());
  detail::put(os, static_cast<std::uint32_t>(f.grid().dim()));
  detail::put(os, static_cast<std::uint32_t>(f.grid().n()));
  for (double v : f.values()) detail::put(os, v);
}

inline void write_snapshot(const std::filesystem::path& path, const RealField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw SnapshotError("cannot open " + path.string() + " for writing");
  write_snapshot(os, f);
  if (!os) throw SnapshotError("write failed: " + path.string());
}

inline RealField read_snapshot(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != detail::kSnapshotMagic) {
    throw SnapshotError("snapshot: bad magic");
  }
  std::uint32_t dim = 0, n = 0;
  if (!detail::get(is, dim) || !detail::get(is, n)) throw SnapshotError("snapshot: truncated header");
  TorusGrid grid = [&] {
    try {
      return TorusGrid(static_cast<int>(dim), static_cast<int>(n));
    } catch (const DomainError& e) {
      throw SnapshotError(std::string("snapshot: invalid grid: ") + e.what());
    }
  }();
  std::vector<double> values(grid.size());
  for (auto& v : values) {
    if (!detail::get(is, v)) throw SnapshotError("snapshot: truncated payload");
  }
  if (is.peek() != std::char_traits<char>::eof()) throw SnapshotError("snapshot: trailing bytes");
  return RealField(grid, std::move(values));
}

inline RealField read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw SnapshotError("cannot open " + path.string());
  return read_snapshot(is);
}

}  // namespace hks
