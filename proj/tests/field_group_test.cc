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

#include "pess/field_group.h"

#include <gtest/gtest.h>

#include "oracles.h"
#include "pess/random.h"

namespace pess {
namespace {

Bytes seed_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

TEST(FieldGroup, TinyGeneratorsHaveOrderQ) {
  const auto& gp = tiny_group();
  EXPECT_EQ(oracle::slow_pow(4, 11, 23), 1u);
  EXPECT_EQ(oracle::slow_pow(9, 11, 23), 1u);
  EXPECT_EQ(gp.modulus_p, 23);
  EXPECT_EQ(gp.order_q, 11);
  EXPECT_EQ(gp.gen_g, 4);
  EXPECT_EQ(gp.gen_h, 9);
  EXPECT_NE(gp.gen_g, 1);
  EXPECT_NE(gp.gen_h, 1);
}

TEST(FieldGroup, ModExpMatchesRepeatedMultiplication) {
  const auto& gp = tiny_group();
  EXPECT_EQ(mod_exp(4, 3, gp), 18);
  EXPECT_EQ(oracle::slow_pow(4, 3, 23), 18u);
  EXPECT_EQ(mod_exp(4, 11, gp), 1);
  for (uint64_t base = 1; base < 23; ++base) {
    EXPECT_EQ(mod_exp(BigInt(static_cast<unsigned long>(base)), 0, gp), 1);
    for (uint64_t e = 0; e < 11; ++e) {
      EXPECT_EQ(mod_exp(BigInt(static_cast<unsigned long>(base)),
                        BigInt(static_cast<unsigned long>(e)), gp),
                oracle::slow_pow(base, e, 23));
    }
  }
}

TEST(FieldGroup, ExponentHomomorphism) {
  for (const GroupParams* gp : {&tiny_group(), &prod_group()}) {
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
      FieldElement x = rng.below(gp->order_q);
      FieldElement y = rng.below(gp->order_q);
      EXPECT_EQ(gp->gmul(mod_exp(gp->gen_g, x, *gp), mod_exp(gp->gen_g, y, *gp)),
                mod_exp(gp->gen_g, gp->add(x, y), *gp));
    }
  }
}

TEST(FieldGroup, FixedBaseTableAgreesWithPowm) {
  const auto& gp = prod_group();
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    FieldElement e = rng.below(gp.order_q);
    BigInt g_ref, h_ref;
    mpz_powm(g_ref.get_mpz_t(), gp.gen_g.get_mpz_t(), e.get_mpz_t(), gp.modulus_p.get_mpz_t());
    mpz_powm(h_ref.get_mpz_t(), gp.gen_h.get_mpz_t(), e.get_mpz_t(), gp.modulus_p.get_mpz_t());
    EXPECT_EQ(gp.pow_g(e), g_ref);
    EXPECT_EQ(gp.pow_h(e), h_ref);
  }
  EXPECT_EQ(gp.pow_g(0), 1);
  EXPECT_EQ(gp.pow_g(gp.order_q - 1), gp.ginv(gp.gen_g));
}

TEST(FieldGroup, FieldOpsMatchIntegerArithmetic) {
  const auto& gp = tiny_group();
  for (long a = 0; a < 11; ++a) {
    EXPECT_EQ(gp.neg(a), (11 - a) % 11);
    if (a != 0) EXPECT_EQ(gp.inv(a), static_cast<long>(oracle::inv_mod(a, 11)));
    for (long b = 0; b < 11; ++b) {
      EXPECT_EQ(gp.add(a, b), (a + b) % 11);
      EXPECT_EQ(gp.sub(a, b), (a - b + 11) % 11);
      EXPECT_EQ(gp.mul(a, b), a * b % 11);
    }
  }
  EXPECT_THROW(gp.inv(0), std::domain_error);
}

TEST(FieldGroup, SetupIsDeterministicAndValid) {
  Bytes seed = seed_bytes("unit");
  GroupParams a = setup_group(32, seed);
  GroupParams b = setup_group(32, seed);
  EXPECT_EQ(a.modulus_p, b.modulus_p);
  EXPECT_EQ(a.gen_h, b.gen_h);
  EXPECT_EQ(mpz_sizeinbase(a.modulus_p.get_mpz_t(), 2), 32u);
  EXPECT_EQ(a.modulus_p, 2 * a.order_q + 1);
  EXPECT_NE(mpz_probab_prime_p(a.modulus_p.get_mpz_t(), 64), 0);
  EXPECT_NE(mpz_probab_prime_p(a.order_q.get_mpz_t(), 64), 0);
  EXPECT_EQ(a.pow(a.gen_h, a.order_q), 1);
  EXPECT_NE(a.gen_h, 1);

  GroupParams c = setup_group(32, seed_bytes("other"));
  EXPECT_NE(a.gen_h, c.gen_h);
  EXPECT_THROW(setup_group(8, seed), SetupError);
}

TEST(FieldGroup, ProdProfileIsReproducible) {
  GroupParams regen = setup_group(255, seed_bytes("pess/prod/v1"));
  const auto& gp = prod_group();
  EXPECT_EQ(regen.modulus_p, gp.modulus_p);
  EXPECT_EQ(regen.order_q, gp.order_q);
  EXPECT_EQ(regen.gen_h, gp.gen_h);
  EXPECT_EQ(mpz_sizeinbase(gp.modulus_p.get_mpz_t(), 2), 255u);
  EXPECT_NO_THROW(gp.validate());
}

TEST(FieldGroup, SubgroupMembership) {
  const auto& gp = tiny_group();
  int members = 0;
  for (long x = 1; x < 23; ++x) {
    bool expected = oracle::slow_pow(static_cast<uint64_t>(x), 11, 23) == 1;
    EXPECT_EQ(gp.is_group_element(x), expected) << x;
    members += expected;
  }
  EXPECT_EQ(members, 11);
  EXPECT_FALSE(gp.is_group_element(0));
  EXPECT_FALSE(gp.is_group_element(23));
}

TEST(FixedPoint, EncodeExamples) {
  const auto& prod = prod_group();
  EXPECT_EQ(encode_fixed(0, prod), 0);
  EXPECT_EQ(encode_fixed(parse_rational("1.5"), prod), 15000);
  EXPECT_EQ(encode_fixed(parse_rational("-0.0001"), prod), prod.order_q - 1);
  EXPECT_THROW(encode_fixed(parse_rational("-2.5"), tiny_group()), EncodingError);
  EXPECT_THROW(encode_fixed(Rational(300000), prod), EncodingError);
  EXPECT_EQ(encode_fixed(parse_rational("0.00005"), prod), 1);
  EXPECT_EQ(encode_fixed(parse_rational("-0.00005"), prod), prod.order_q - 1);
}

TEST(FixedPoint, RoundTripWithinHalfUnit) {
  const auto& gp = prod_group();
  Rng rng(3);
  Rational half_unit(1, 2 * gp.fixed_point_scale);
  for (int i = 0; i < 500; ++i) {
    long num = static_cast<long>(rng.below(uint64_t{2000000000})) - 1000000000;
    long den = static_cast<long>(rng.below(uint64_t{9999})) + 1;
    Rational x(num, den * 10);
    x.canonicalize();
    if (abs(x) * gp.fixed_point_scale >= Rational(static_cast<long>(kRawLimit) - 1)) continue;
    Rational back = decode_fixed(encode_fixed(x, gp), gp);
    EXPECT_LE(abs(back - x), half_unit);
    EXPECT_EQ(decode_fixed(encode_fixed(back, gp), gp), back);
  }
}

TEST(Serialization, FixedWidthBigEndian) {
  const auto& gp = prod_group();
  ByteWriter w;
  gp.write_field(w, 258);
  EXPECT_EQ(w.bytes().size(), 32u);
  EXPECT_EQ(w.bytes()[30], 1);
  EXPECT_EQ(w.bytes()[31], 2);
  ByteReader r(w.bytes());
  EXPECT_EQ(gp.read_field(r), 258);
  EXPECT_TRUE(r.done());

  ByteWriter bad;
  bad.raw(to_fixed_bytes(gp.order_q, gp.field_bytes()));
  ByteReader rb(bad.bytes());
  EXPECT_THROW(gp.read_field(rb), DecodeError);
}

}  // namespace
}  // namespace pess
