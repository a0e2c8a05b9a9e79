#include "nerkit/container.hpp"

#include <zlib.h>

#include <array>
#include <bit>
#include <charconv>
#include <fstream>
#include <sstream>

#include "nerkit/error.hpp"

namespace nerkit {

namespace {

constexpr std::string_view kMagic = "NERKIT";

void put_u64(std::string& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(std::string_view in, std::size_t at) {
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) {
    x |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  }
  return x;
}

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

bool has_line_break(std::string_view s) { return s.find('\n') != std::string_view::npos; }

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    out.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

std::int64_t parse_count(std::string_view s) {
  std::int64_t v = -1;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v < 0) {
    throw FormatError("malformed count '" + std::string(s) + "' in container header");
  }
  return v;
}

// "word rest of line" -> ("word", "rest of line")
std::pair<std::string_view, std::string_view> head_tail(std::string_view s) {
  const std::size_t sp = s.find(' ');
  if (sp == std::string_view::npos) return {s, {}};
  return {s.substr(0, sp), s.substr(sp + 1)};
}

}  // namespace

const std::string* Container::find_meta(std::string_view key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return &v;
  }
  return nullptr;
}

const std::vector<std::string>* Container::find_section(std::string_view name) const {
  for (const auto& [k, v] : sections) {
    if (k == name) return &v;
  }
  return nullptr;
}

const NamedArray* Container::find_array(std::string_view name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

std::string encode_container(const Container& c) {
  std::string header;
  for (const auto& [k, v] : c.meta) {
    if (k.empty() || k.find(' ') != std::string::npos || has_line_break(k) || has_line_break(v)) {
      throw FormatError("metadata key/value not encodable: '" + k + "'");
    }
    header += "meta " + k + " " + v + "\n";
  }
  for (const auto& [name, lines] : c.sections) {
    header += "section " + name + " " + std::to_string(lines.size()) + "\n";
    for (const auto& l : lines) {
      if (has_line_break(l)) throw FormatError("section line contains a line break");
      header += l + "\n";
    }
  }
  for (const auto& a : c.arrays) {
    if (a.name.empty() || a.name.find(' ') != std::string::npos) {
      throw FormatError("array name not encodable: '" + a.name + "'");
    }
    header += "param " + a.name + " " + std::to_string(a.value.rows()) + " " +
              std::to_string(a.value.cols()) + "\n";
  }

  std::string body = header;
  for (const auto& a : c.arrays) {
    const double* data = a.value.data();
    for (Index i = 0; i < a.value.size(); ++i) put_u64(body, std::bit_cast<std::uint64_t>(data[i]));
  }

  std::string out(kMagic);
  out.push_back(static_cast<char>(kContainerVersion));
  put_u64(out, header.size());
  out += body;
  const std::uint32_t crc = crc32_of(body);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((crc >> (8 * i)) & 0xff));
  return out;
}

Container decode_container(std::string_view bytes) {
  const std::size_t prefix = kMagic.size() + 1 + 8;
  if (bytes.size() < prefix + 4) throw FormatError("container truncated");
  if (bytes.substr(0, kMagic.size()) != kMagic) throw FormatError("not a model container");
  const auto version = static_cast<std::uint8_t>(bytes[kMagic.size()]);
  if (version != kContainerVersion) {
    throw FormatError("unsupported container version " + std::to_string(version) +
                      " (expected " + std::to_string(kContainerVersion) + ")");
  }
  const std::uint64_t header_len = get_u64(bytes, kMagic.size() + 1);
  if (header_len > bytes.size() - prefix - 4) throw FormatError("container truncated");

  const std::string_view body = bytes.substr(prefix, bytes.size() - prefix - 4);
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) {
    stored |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[bytes.size() - 4 + i]))
              << (8 * i);
  }

  if (crc32_of(body) != stored) throw FormatError("container checksum mismatch");

  const std::string_view header = body.substr(0, header_len);
  Container c;
  std::vector<std::pair<std::string, std::array<Index, 2>>> shapes;
  const auto lines = split_lines(header);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto [kind, rest] = head_tail(lines[i]);
    if (kind == "meta") {
      const auto [k, v] = head_tail(rest);
      c.meta.emplace_back(std::string(k), std::string(v));
    } else if (kind == "section") {
      const auto [name, count] = head_tail(rest);
      const auto n = static_cast<std::size_t>(parse_count(count));
      if (n > lines.size() - i - 1) {
        throw FormatError("section '" + std::string(name) + "' truncated");
      }
      std::vector<std::string> sec;
      sec.reserve(n);
      for (std::size_t k = 0; k < n; ++k) sec.emplace_back(lines[++i]);
      c.sections.emplace_back(std::string(name), std::move(sec));
    } else if (kind == "param") {
      const auto [name, dims] = head_tail(rest);
      const auto [r, cc] = head_tail(dims);
      shapes.push_back({std::string(name), {parse_count(r), parse_count(cc)}});
    } else {
      throw FormatError("unknown container record '" + std::string(kind) + "'");
    }
  }

  std::uint64_t payload = 0;
  for (const auto& s : shapes) payload += static_cast<std::uint64_t>(s.second[0] * s.second[1]) * 8;
  if (body.size() - header_len < payload) throw FormatError("container payload truncated");
  if (body.size() - header_len > payload) throw FormatError("trailing bytes in container");

  std::size_t at = header_len;
  for (const auto& [name, shape] : shapes) {
    NamedArray a{name, Matrix(shape[0], shape[1])};
    double* data = a.value.data();
    for (Index i = 0; i < a.value.size(); ++i, at += 8) {
      data[i] = std::bit_cast<double>(get_u64(body, at));
    }
    c.arrays.push_back(std::move(a));
  }
  return c;
}

std::string read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_binary_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace nerkit
