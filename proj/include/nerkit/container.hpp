#ifndef NERKIT_CONTAINER_HPP
#define NERKIT_CONTAINER_HPP

// Flat binary container for named f64 arrays plus text metadata.
//
// Layout (all integers little-endian):
//   "NERKIT"             6-byte magic
//   version              1 byte (kContainerVersion)
//   header_length        u64
//   header               UTF-8 text, one record per line:
//                          meta <key> <value...>
//                          section <name> <line count>   followed by the lines
//                          param <name> <rows> <cols>
//   payload              every param's values as f64, row-major, in header order
//   checksum             u32 CRC-32 of header + payload

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nerkit/tensor.hpp"

namespace nerkit {

inline constexpr std::uint8_t kContainerVersion = 1;

struct NamedArray {
  std::string name;
  Matrix value;

  bool operator==(const NamedArray& o) const {
    return name == o.name && value.rows() == o.value.rows() && value.cols() == o.value.cols() &&
           value == o.value;
  }
};

struct Container {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::pair<std::string, std::vector<std::string>>> sections;
  std::vector<NamedArray> arrays;

  const std::string* find_meta(std::string_view key) const;
  const std::vector<std::string>* find_section(std::string_view name) const;
  const NamedArray* find_array(std::string_view name) const;

  bool operator==(const Container&) const = default;
};

std::string encode_container(const Container& c);
// Throws FormatError on bad magic, unsupported version, truncation,
// checksum mismatch or a malformed header.
Container decode_container(std::string_view bytes);

std::string read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, std::string_view bytes);

}  // namespace nerkit

#endif  // NERKIT_CONTAINER_HPP
