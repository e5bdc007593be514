// Copyright 2026 The ssinfer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian byte serialization helpers for bundle and share files.

#ifndef SSINFER_BYTES_HPP_
#define SSINFER_BYTES_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ssinfer/error.hpp"
#include "ssinfer/ring.hpp"

namespace ssinfer {

class ByteWriter {
 public:
  void U8(std::uint8_t v) { out_.push_back(v); }
  void U16(std::uint16_t v) { Uint(v, 2); }
  void U32(std::uint32_t v) { Uint(v, 4); }
  void U64(std::uint64_t v) { Uint(v, 8); }
  void Raw(std::span<const std::uint8_t> bytes) {
    out_.insert(out_.end(), bytes.begin(), bytes.end());
  }
  // Ring words at l/8 bytes each.
  void RingWords(std::span<const Word> words, const RingParams& ring) {
    for (Word w : words) Uint(w, ring.bytes());
  }
  void BitVector(std::span<const std::uint8_t> bits) {
    const std::size_t start = out_.size();
    out_.resize(start + (bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
      out_[start + i / 8] |= static_cast<std::uint8_t>((bits[i] & 1) << (i % 8));
    }
  }
  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  void Uint(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

// Throws kIntegrity on short input.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t U8() { return static_cast<std::uint8_t>(Uint(1)); }
  std::uint16_t U16() { return static_cast<std::uint16_t>(Uint(2)); }
  std::uint32_t U32() { return static_cast<std::uint32_t>(Uint(4)); }
  std::uint64_t U64() { return Uint(8); }
  std::span<const std::uint8_t> Raw(std::size_t n) {
    Need(n);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::span<const std::uint8_t> Peek(std::size_t n) {
    Need(n);
    return bytes_.subspan(pos_, n);
  }
  Words RingWords(std::size_t n, const RingParams& ring) {
    Need(n * ring.bytes());
    Words out(n);
    for (Word& w : out) w = Uint(ring.bytes());
    return out;
  }
  std::vector<std::uint8_t> BitVector(std::size_t n) {
    auto raw = Raw((n + 7) / 8);
    std::vector<std::uint8_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (raw[i / 8] >> (i % 8)) & 1;
    return out;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  void Need(std::size_t n) {
    Require(pos_ + n <= bytes_.size(), ErrorKind::kIntegrity, "unexpected end of data");
  }
  std::uint64_t Uint(int n) {
    Need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += n;
    return v;
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, std::span<const std::uint8_t> bytes);
std::uint32_t Crc32(std::span<const std::uint8_t> bytes);

}  // namespace ssinfer

#endif  // SSINFER_BYTES_HPP_
