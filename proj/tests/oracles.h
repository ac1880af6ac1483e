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

// Independent reference computations for tests. Nothing here calls into the
// library's arithmetic; everything is schoolbook integer math.

#include <cstdint>
#include <vector>

namespace pess::oracle {

inline uint64_t mulmod(uint64_t a, uint64_t b, uint64_t m) {
  return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

// base^e mod m by e repeated multiplications.
inline uint64_t slow_pow(uint64_t base, uint64_t e, uint64_t m) {
  uint64_t r = 1 % m;
  for (uint64_t i = 0; i < e; ++i) r = mulmod(r, base % m, m);
  return r;
}

inline uint64_t inv_mod(uint64_t a, uint64_t m) {
  for (uint64_t x = 1; x < m; ++x) {
    if (mulmod(a, x, m) == 1) return x;
  }
  return 0;
}

}  // namespace pess::oracle
