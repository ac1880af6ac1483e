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

#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <string_view>

#include "pess/hash.h"

namespace pess {

// Deterministic byte stream: SHA-256 in counter mode over a 32-byte key.
// Every party, prover and dealer draws from its own forked instance so a
// fixed seed reproduces a run byte for byte.
class Rng {
 public:
  explicit Rng(std::span<const uint8_t> seed);
  explicit Rng(uint64_t seed);

  static Rng from_os_entropy(uint64_t* recorded_seed = nullptr);

  void fill(std::span<uint8_t> out);
  uint64_t next_u64();
  // Uniform in [0, bound) by rejection sampling; bound > 0.
  mpz_class below(const mpz_class& bound);
  uint64_t below(uint64_t bound);

  // Independent child stream; does not advance this one.
  Rng fork(std::string_view label) const;

 private:
  void refill();

  Digest key_{};
  uint64_t counter_ = 0;
  Digest block_{};
  size_t used_ = sizeof(Digest);
};

}  // namespace pess
