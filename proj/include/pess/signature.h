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

#include <span>

#include "pess/bytes.h"
#include "pess/random.h"

namespace pess {

// Ed25519 through OpenSSL.
struct KeyPair {
  Bytes secret;  // 32-byte seed
  Bytes public_key;
};

KeyPair generate_keypair(Rng& rng);
KeyPair keypair_from_seed(std::span<const uint8_t> seed);
Bytes sign(std::span<const uint8_t> message, const KeyPair& key);
// False for malformed keys or signatures as well as for bad ones.
bool verify_sig(std::span<const uint8_t> message, std::span<const uint8_t> signature,
                std::span<const uint8_t> public_key);

}  // namespace pess
