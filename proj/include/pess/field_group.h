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
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "pess/bytes.h"
#include "pess/rational.h"

namespace pess {

using BigInt = mpz_class;
// Exponents live in Z_q, commitments and other group values in the order-q
// subgroup of Z_p*. Both are plain integers; GroupParams does the reduction.
using FieldElement = mpz_class;
using GroupElement = mpz_class;

class SetupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EncodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Comb table for one base: entry [i][d] = base^(d * 2^(8i)) mod p.
class FixedBaseTable {
 public:
  FixedBaseTable(const BigInt& base, const BigInt& p, size_t exp_bits);
  BigInt pow(const BigInt& e, const BigInt& p) const;

 private:
  std::vector<std::vector<BigInt>> rows_;
};

struct GroupParams {
  BigInt modulus_p;
  BigInt order_q;
  GroupElement gen_g;
  GroupElement gen_h;
  int64_t fixed_point_scale = 10000;
  std::string profile;

  std::shared_ptr<const FixedBaseTable> table_g;
  std::shared_ptr<const FixedBaseTable> table_h;

  // Z_q
  FieldElement reduce(const BigInt& x) const;
  FieldElement from_int(int64_t v) const { return reduce(BigInt(static_cast<long>(v))); }
  FieldElement add(const FieldElement& a, const FieldElement& b) const;
  FieldElement sub(const FieldElement& a, const FieldElement& b) const;
  FieldElement mul(const FieldElement& a, const FieldElement& b) const;
  FieldElement neg(const FieldElement& a) const;
  FieldElement inv(const FieldElement& a) const;
  bool is_field_element(const BigInt& x) const { return x >= 0 && x < order_q; }

  // Order-q subgroup of Z_p*
  GroupElement gmul(const GroupElement& a, const GroupElement& b) const;
  GroupElement ginv(const GroupElement& a) const;
  GroupElement gdiv(const GroupElement& a, const GroupElement& b) const;
  GroupElement pow(const GroupElement& base, const BigInt& e) const;
  GroupElement pow_g(const FieldElement& e) const;
  GroupElement pow_h(const FieldElement& e) const;
  bool is_group_element(const BigInt& x) const;

  size_t field_bytes() const;
  size_t group_bytes() const;
  void write_field(ByteWriter& w, const FieldElement& x) const;
  void write_group(ByteWriter& w, const GroupElement& x) const;
  FieldElement read_field(ByteReader& r) const;
  GroupElement read_group(ByteReader& r) const;

  void validate() const;
};

GroupParams setup_group(int bit_length, std::span<const uint8_t> seed);
GroupParams make_group(BigInt p, BigInt q, BigInt g, BigInt h, std::string profile);

// p=23, q=11, g=4, h=9. Small enough to enumerate every exponent.
const GroupParams& tiny_group();
// 255-bit safe prime produced by setup_group(255, "pess/prod/v1").
const GroupParams& prod_group();
const GroupParams& group_by_name(const std::string& name);

inline constexpr int64_t kRawLimit = int64_t{1} << 31;

FieldElement encode_raw(int64_t raw, const GroupParams& params);
FieldElement encode_fixed(const Rational& real, const GroupParams& params);
// Signed representative in (-q/2, q/2].
BigInt decode_raw(const FieldElement& x, const GroupParams& params);
Rational decode_fixed(const FieldElement& x, const GroupParams& params);

GroupElement mod_exp(const GroupElement& base, const FieldElement& exp,
                     const GroupParams& params);

// Fixed-width big-endian bytes, width = ceil(bits(modulus)/8).
Bytes to_fixed_bytes(const BigInt& x, size_t width);
BigInt from_bytes(std::span<const uint8_t> data);

}  // namespace pess
