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

#include "pess/hash.h"

#include <array>
#include <mutex>

namespace pess {

namespace {

constexpr int kComb = 8;

std::vector<unsigned long> small_primes(unsigned long limit) {
  std::vector<bool> sieve(limit + 1, true);
  std::vector<unsigned long> out;
  for (unsigned long i = 3; i <= limit; i += 2) {
    if (!sieve[i]) continue;
    out.push_back(i);
    for (unsigned long j = i * i; j <= limit; j += 2 * i) sieve[j] = false;
  }
  return out;
}

BigInt hash_to_int(std::span<const uint8_t> data) {
  Digest d = sha256(data);
  return from_bytes(d);
}

}  // namespace

Bytes to_fixed_bytes(const BigInt& x, size_t width) {
  if (x < 0) throw EncodingError("negative value in fixed-width encoding");
  size_t n = (mpz_sizeinbase(x.get_mpz_t(), 2) + 7) / 8;
  if (x == 0) n = 0;
  if (n > width) throw EncodingError("value too wide for fixed-width encoding");
  Bytes out(width, 0);
  size_t written = 0;
  mpz_export(out.data() + (width - n), &written, 1, 1, 1, 0, x.get_mpz_t());
  return out;
}

BigInt from_bytes(std::span<const uint8_t> data) {
  BigInt v;
  if (!data.empty()) mpz_import(v.get_mpz_t(), data.size(), 1, 1, 1, 0, data.data());
  return v;
}

FixedBaseTable::FixedBaseTable(const BigInt& base, const BigInt& p, size_t exp_bits) {
  size_t n_rows = (exp_bits + kComb - 1) / kComb;
  rows_.resize(n_rows);
  BigInt row_base = base;
  for (size_t i = 0; i < n_rows; ++i) {
    auto& row = rows_[i];
    row.resize(1 << kComb);
    row[0] = 1;
    for (size_t d = 1; d < row.size(); ++d) {
      row[d] = row[d - 1] * row_base % p;
    }
    row_base = row[row.size() - 1] * row_base % p;
  }
}

BigInt FixedBaseTable::pow(const BigInt& e, const BigInt& p) const {
  BigInt acc = 1;
  size_t limbs_bits = mpz_sizeinbase(e.get_mpz_t(), 2);
  if (e == 0) return acc;
  size_t n = (limbs_bits + kComb - 1) / kComb;
  if (n > rows_.size()) {
    BigInt r;
    mpz_powm(r.get_mpz_t(), rows_[0][1].get_mpz_t(), e.get_mpz_t(), p.get_mpz_t());
    return r;
  }
  BigInt tmp;
  for (size_t i = 0; i < n; ++i) {
    unsigned long d = 0;
    for (int b = kComb - 1; b >= 0; --b) {
      d = d << 1 | mpz_tstbit(e.get_mpz_t(), i * kComb + b);
    }
    if (d == 0) continue;
    mpz_mul(tmp.get_mpz_t(), acc.get_mpz_t(), rows_[i][d].get_mpz_t());
    mpz_mod(acc.get_mpz_t(), tmp.get_mpz_t(), p.get_mpz_t());
  }
  return acc;
}

FieldElement GroupParams::reduce(const BigInt& x) const {
  BigInt r;
  mpz_mod(r.get_mpz_t(), x.get_mpz_t(), order_q.get_mpz_t());
  return r;
}

FieldElement GroupParams::add(const FieldElement& a, const FieldElement& b) const {
  BigInt r = a + b;
  if (r >= order_q) r -= order_q;
  return r;
}

FieldElement GroupParams::sub(const FieldElement& a, const FieldElement& b) const {
  BigInt r = a - b;
  if (r < 0) r += order_q;
  return r;
}

FieldElement GroupParams::mul(const FieldElement& a, const FieldElement& b) const {
  return reduce(a * b);
}

FieldElement GroupParams::neg(const FieldElement& a) const {
  return a == 0 ? BigInt(0) : BigInt(order_q - a);
}

FieldElement GroupParams::inv(const FieldElement& a) const {
  BigInt r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), order_q.get_mpz_t()) == 0) {
    throw std::domain_error("inverse of zero in Z_q");
  }
  return r;
}

GroupElement GroupParams::gmul(const GroupElement& a, const GroupElement& b) const {
  BigInt r = a * b;
  mpz_mod(r.get_mpz_t(), r.get_mpz_t(), modulus_p.get_mpz_t());
  return r;
}

GroupElement GroupParams::ginv(const GroupElement& a) const {
  BigInt r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), modulus_p.get_mpz_t()) == 0) {
    throw std::domain_error("inverse of non-unit in Z_p");
  }
  return r;
}

GroupElement GroupParams::gdiv(const GroupElement& a, const GroupElement& b) const {
  return gmul(a, ginv(b));
}

GroupElement GroupParams::pow(const GroupElement& base, const BigInt& e) const {
  BigInt r;
  BigInt ee = e;
  if (ee < 0 || ee >= order_q) ee = reduce(ee);
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), ee.get_mpz_t(), modulus_p.get_mpz_t());
  return r;
}

GroupElement GroupParams::pow_g(const FieldElement& e) const {
  if (table_g && e >= 0 && e < order_q) return table_g->pow(e, modulus_p);
  return pow(gen_g, e);
}

GroupElement GroupParams::pow_h(const FieldElement& e) const {
  if (table_h && e >= 0 && e < order_q) return table_h->pow(e, modulus_p);
  return pow(gen_h, e);
}

bool GroupParams::is_group_element(const BigInt& x) const {
  if (x <= 0 || x >= modulus_p) return false;
  // Safe prime: the order-q subgroup is exactly the quadratic residues.
  if (modulus_p == 2 * order_q + 1) return mpz_jacobi(x.get_mpz_t(), modulus_p.get_mpz_t()) == 1;
  BigInt r;
  mpz_powm(r.get_mpz_t(), x.get_mpz_t(), order_q.get_mpz_t(), modulus_p.get_mpz_t());
  return r == 1;
}

size_t GroupParams::field_bytes() const {
  return (mpz_sizeinbase(order_q.get_mpz_t(), 2) + 7) / 8;
}

size_t GroupParams::group_bytes() const {
  return (mpz_sizeinbase(modulus_p.get_mpz_t(), 2) + 7) / 8;
}

void GroupParams::write_field(ByteWriter& w, const FieldElement& x) const {
  w.raw(to_fixed_bytes(x, field_bytes()));
}

void GroupParams::write_group(ByteWriter& w, const GroupElement& x) const {
  w.raw(to_fixed_bytes(x, group_bytes()));
}

FieldElement GroupParams::read_field(ByteReader& r) const {
  BigInt v = from_bytes(r.raw(field_bytes()));
  if (v >= order_q) throw DecodeError("field element out of range");
  return v;
}

GroupElement GroupParams::read_group(ByteReader& r) const {
  BigInt v = from_bytes(r.raw(group_bytes()));
  if (v <= 0 || v >= modulus_p) throw DecodeError("group element out of range");
  return v;
}

void GroupParams::validate() const {
  if (mpz_probab_prime_p(modulus_p.get_mpz_t(), 64) == 0) throw SetupError("p not prime");
  if (mpz_probab_prime_p(order_q.get_mpz_t(), 64) == 0) throw SetupError("q not prime");
  BigInt rem = (modulus_p - 1) % order_q;
  if (rem != 0) throw SetupError("q does not divide p-1");
  if (gen_g == 1 || !is_group_element(gen_g)) throw SetupError("g not of order q");
  if (gen_h == 1 || !is_group_element(gen_h)) throw SetupError("h not of order q");
  if (fixed_point_scale <= 0) throw SetupError("scale must be positive");
}

GroupParams make_group(BigInt p, BigInt q, BigInt g, BigInt h, std::string profile) {
  GroupParams gp;
  gp.modulus_p = std::move(p);
  gp.order_q = std::move(q);
  gp.gen_g = std::move(g);
  gp.gen_h = std::move(h);
  gp.profile = std::move(profile);
  gp.validate();
  size_t qbits = mpz_sizeinbase(gp.order_q.get_mpz_t(), 2);
  if (qbits >= 64) {
    gp.table_g = std::make_shared<FixedBaseTable>(gp.gen_g, gp.modulus_p, qbits);
    gp.table_h = std::make_shared<FixedBaseTable>(gp.gen_h, gp.modulus_p, qbits);
  }
  return gp;
}

GroupParams setup_group(int bit_length, std::span<const uint8_t> seed) {
  if (bit_length < 16) throw SetupError("bit_length must be at least 16");
  const int qbits = bit_length - 1;
  static const std::vector<unsigned long> primes = small_primes(4096);

  ByteWriter start;
  start.str("pess/setup/q");
  start.u32(static_cast<uint32_t>(bit_length));
  start.blob(seed);
  // Stretch the hash to qbits by chained blocks.
  BigInt q = 0;
  Digest block = sha256(start.bytes());
  for (int have = 0; have < qbits; have += 256) {
    q = (q << 256) + from_bytes(block);
    block = sha256(block);
  }
  q >>= static_cast<unsigned long>(mpz_sizeinbase(q.get_mpz_t(), 2) - qbits);
  mpz_setbit(q.get_mpz_t(), qbits - 1);
  mpz_setbit(q.get_mpz_t(), 0);

  const long budget = 1L << 22;
  BigInt p;
  bool found = false;
  for (long iter = 0; iter < budget; ++iter, q += 2) {
    if (mpz_sizeinbase(q.get_mpz_t(), 2) != static_cast<size_t>(qbits)) break;
    bool sieved = false;
    for (unsigned long s : primes) {
      if (q <= s) break;
      unsigned long r = mpz_fdiv_ui(q.get_mpz_t(), s);
      // q ≡ 0 or 2q+1 ≡ 0 (mod s)
      if (r == 0 || (2 * r + 1) % s == 0) {
        sieved = true;
        break;
      }
    }
    if (sieved) continue;
    if (mpz_probab_prime_p(q.get_mpz_t(), 1) == 0) continue;
    p = 2 * q + 1;
    if (mpz_probab_prime_p(p.get_mpz_t(), 1) == 0) continue;
    if (mpz_probab_prime_p(q.get_mpz_t(), 64) == 0) continue;
    if (mpz_probab_prime_p(p.get_mpz_t(), 64) == 0) continue;
    found = true;
    break;
  }
  if (!found) throw SetupError("no safe prime within iteration budget");

  BigInt g = 4;
  BigInt h;
  for (uint32_t ctr = 0;; ++ctr) {
    ByteWriter w;
    w.str("pess/setup/h");
    w.raw(to_fixed_bytes(g, (mpz_sizeinbase(p.get_mpz_t(), 2) + 7) / 8));
    w.blob(seed);
    w.u32(ctr);
    BigInt v = hash_to_int(w.bytes()) % p;
    h = v * v % p;
    if (h != 0 && h != 1 && h != g) break;
  }
  return make_group(p, q, g, h, "custom");
}

const GroupParams& tiny_group() {
  static const GroupParams gp = make_group(23, 11, 4, 9, "tiny");
  return gp;
}

// Output of setup_group(255, "pess/prod/v1"); a unit test regenerates it.
constexpr const char* kProdP =
    "53439861029932202923271270377909223500295464640755038399664429594087882068299";
constexpr const char* kProdQ =
    "26719930514966101461635635188954611750147732320377519199832214797043941034149";
constexpr const char* kProdH =
    "24901653869084537461266481630110976712490456791909468283150537801750934350155";

const GroupParams& prod_group() {
  static const GroupParams gp =
      make_group(BigInt(kProdP, 10), BigInt(kProdQ, 10), 4, BigInt(kProdH, 10), "prod");
  return gp;
}

const GroupParams& group_by_name(const std::string& name) {
  if (name == "tiny") return tiny_group();
  if (name == "prod") return prod_group();
  throw SetupError("unknown group profile: " + name);
}

FieldElement encode_raw(int64_t raw, const GroupParams& params) {
  int64_t mag = raw < 0 ? -raw : raw;
  if (mag >= kRawLimit) throw EncodingError("fixed-point value exceeds 2^31");
  if (BigInt(static_cast<long>(2 * mag)) >= params.order_q) {
    throw EncodingError("fixed-point value does not fit the field");
  }
  return params.from_int(raw);
}

FieldElement encode_fixed(const Rational& real, const GroupParams& params) {
  BigInt raw = round_half_away(real * Rational(static_cast<long>(params.fixed_point_scale)));
  if (abs(raw) >= BigInt(static_cast<long>(kRawLimit))) {
    throw EncodingError("fixed-point value exceeds 2^31");
  }
  return encode_raw(raw.get_si(), params);
}

BigInt decode_raw(const FieldElement& x, const GroupParams& params) {
  BigInt v = params.reduce(x);
  if (2 * v > params.order_q) v -= params.order_q;
  return v;
}

Rational decode_fixed(const FieldElement& x, const GroupParams& params) {
  Rational r(decode_raw(x, params), BigInt(static_cast<long>(params.fixed_point_scale)));
  r.canonicalize();
  return r;
}

GroupElement mod_exp(const GroupElement& base, const FieldElement& exp,
                     const GroupParams& params) {
  return params.pow(base, exp);
}

}  // namespace pess
