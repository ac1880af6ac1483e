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

#include "pess/signature.h"

#include <openssl/evp.h>

#include <memory>
#include <stdexcept>

namespace pess {

namespace {

using PkeyPtr = std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

PkeyPtr private_key(std::span<const uint8_t> seed) {
  return PkeyPtr(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size()),
                 &EVP_PKEY_free);
}

}  // namespace

KeyPair keypair_from_seed(std::span<const uint8_t> seed) {
  if (seed.size() != 32) throw std::invalid_argument("Ed25519 seed must be 32 bytes");
  PkeyPtr key = private_key(seed);
  if (!key) throw std::runtime_error("Ed25519 key generation failed");
  KeyPair kp;
  kp.secret.assign(seed.begin(), seed.end());
  size_t len = 32;
  kp.public_key.resize(len);
  if (EVP_PKEY_get_raw_public_key(key.get(), kp.public_key.data(), &len) != 1 || len != 32) {
    throw std::runtime_error("Ed25519 public key export failed");
  }
  return kp;
}

KeyPair generate_keypair(Rng& rng) {
  Bytes seed(32);
  rng.fill(seed);
  return keypair_from_seed(seed);
}

Bytes sign(std::span<const uint8_t> message, const KeyPair& key) {
  PkeyPtr pk = private_key(key.secret);
  MdCtxPtr ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!pk || !ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, pk.get()) != 1) {
    throw std::runtime_error("Ed25519 sign init failed");
  }
  Bytes sig(64);
  size_t len = sig.size();
  if (EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1) {
    throw std::runtime_error("Ed25519 sign failed");
  }
  sig.resize(len);
  return sig;
}

bool verify_sig(std::span<const uint8_t> message, std::span<const uint8_t> signature,
                std::span<const uint8_t> public_key) {
  if (public_key.size() != 32 || signature.size() != 64) return false;
  PkeyPtr pk(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, public_key.data(),
                                         public_key.size()),
             &EVP_PKEY_free);
  MdCtxPtr ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!pk || !ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, pk.get()) != 1) {
    return false;
  }
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(),
                          message.size()) == 1;
}

}  // namespace pess
