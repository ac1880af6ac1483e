// Copyright 2026 The PESS Authors.
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

#include "pess/random.h"

#include <random>
#include <stdexcept>
#include <vector>

namespace pess {

Rng::Rng(std::span<const uint8_t> seed) {
  Sha256 h;
  h.update(std::string_view("pess/rng/v1"));
  h.update(seed);
  key_ = h.finish();
}

Rng::Rng(uint64_t seed) {
  ByteWriter w;
  w.u64(seed);
  *this = Rng(std::span<const uint8_t>(w.bytes()));
}

Rng Rng::from_os_entropy(uint64_t* recorded_seed) {
  std::random_device rd;
  uint64_t seed = (static_cast<uint64_t>(rd()) << 32) ^ rd();
  if (recorded_seed) *recorded_seed = seed;
  return Rng(seed);
}

void Rng::refill() {
  uint8_t buf[40];
  std::copy(key_.begin(), key_.end(), buf);
  for (int i = 0; i < 8; ++i) buf[32 + i] = static_cast<uint8_t>(counter_ >> (56 - 8 * i));
  ++counter_;
  block_ = sha256(std::span<const uint8_t>(buf, sizeof(buf)));
  used_ = 0;
}

void Rng::fill(std::span<uint8_t> out) {
  for (auto& b : out) {
    if (used_ == block_.size()) refill();
    b = block_[used_++];
  }
}

uint64_t Rng::next_u64() {
  uint8_t b[8];
  fill(b);
  uint64_t v = 0;
  for (uint8_t x : b) v = v << 8 | x;
  return v;
}

uint64_t Rng::below(uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below: zero bound");
  uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

mpz_class Rng::below(const mpz_class& bound) {
  if (bound <= 0) throw std::invalid_argument("Rng::below: non-positive bound");
  size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
  size_t nbytes = (bits + 7) / 8;
  std::vector<uint8_t> buf(nbytes);
  unsigned top_mask = bits % 8 == 0 ? 0xff : (1u << (bits % 8)) - 1;
  mpz_class v;
  for (;;) {
    fill(buf);
    buf[0] &= static_cast<uint8_t>(top_mask);
    mpz_import(v.get_mpz_t(), nbytes, 1, 1, 1, 0, buf.data());
    if (v < bound) return v;
  }
}

Rng Rng::fork(std::string_view label) const {
  ByteWriter w;
  w.raw(key_);
  w.str(label);
  return Rng(std::span<const uint8_t>(w.bytes()));
}

}  // namespace pess
