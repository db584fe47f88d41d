#include "mvfill/binary.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "mvfill/errors.hpp"

namespace mvfill {

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

void ByteWriter::f32s(std::span<const float> v) {
  for (float x : v) f32(x);
}

void ByteWriter::short_string(const std::string& s) {
  if (s.size() > 0xFFFF) {
    throw DataError("id longer than 65535 bytes: '" + s.substr(0, 32) + "...'");
  }
  u16(static_cast<std::uint16_t>(s.size()));
  bytes(s);
}

void ByteReader::expect_magic(std::string_view magic) {
  need(magic.size());
  for (std::size_t i = 0; i < magic.size(); ++i) {
    if (data_[pos_ + i] != static_cast<std::uint8_t>(magic[i])) {
      throw FormatError("bad magic, expected \"" + std::string(magic) + "\"",
                        pos_);
    }
  }
  pos_ += magic.size();
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }

std::string ByteReader::short_string() {
  const std::uint16_t len = u16();
  need(len);
  std::string s(reinterpret_cast<const char*>(data_.data() + pos_), len);
  pos_ += len;
  return s;
}

void ByteReader::expect_end() const {
  if (pos_ != data_.size()) {
    throw FormatError("trailing bytes after last record", pos_);
  }
}

std::uint64_t ByteReader::get(int n) {
  need(static_cast<std::uint64_t>(n));
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) {
    v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
  }
  pos_ += n;
  return v;
}

void ByteReader::need(std::uint64_t n) const {
  if (remaining() < n) throw FormatError("unexpected end of data", pos_);
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace mvfill
