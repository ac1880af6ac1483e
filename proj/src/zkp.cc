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

#include "pess/zkp.h"

#include "pess/hash.h"

namespace pess {

Transcript::Transcript(std::string_view domain) {
  ByteWriter w;
  w.str(domain);
  buf_ = std::move(w).take();
}

void Transcript::append(std::string_view label, std::span<const uint8_t> data) {
  ByteWriter w;
  w.str(label);
  w.blob(data);
  const Bytes& b = w.bytes();
  buf_.insert(buf_.end(), b.begin(), b.end());
}

void Transcript::append_u64(std::string_view label, uint64_t v) {
  ByteWriter w;
  w.u64(v);
  append(label, w.bytes());
}

void Transcript::append_field(std::string_view label, const FieldElement& x,
                              const GroupParams& params) {
  append(label, to_fixed_bytes(x, params.field_bytes()));
}

void Transcript::append_group(std::string_view label, const GroupElement& x,
                              const GroupParams& params) {
  append(label, to_fixed_bytes(x, params.group_bytes()));
}

FieldElement fiat_shamir(const Transcript& t, const GroupParams& params) {
  return params.reduce(from_bytes(sha256(t.bytes())));
}

namespace {

bool fields_ok(const GroupParams& params, std::initializer_list<const FieldElement*> xs) {
  for (const FieldElement* x : xs) {
    if (!params.is_field_element(*x)) return false;
  }
  return true;
}

}  // namespace

FieldElement draw_challenge(Transcript& t, const GroupParams& params) {
  FieldElement beta = fiat_shamir(t, params);
  t.append_field("beta", beta, params);
  return beta;
}

// ---- Cm -----------------------------------------------------------------

CmProverState cm_announce(Rng& rng, const GroupParams& params) {
  CmProverState st;
  st.mask = {rng.below(params.order_q), rng.below(params.order_q)};
  st.announce = commit(st.mask, params);
  return st;
}

ProofCm cm_respond(const CmProverState& st, const Opening& witness, const FieldElement& beta,
                   const GroupParams& params) {
  return {st.announce, params.add(st.mask.value, params.mul(beta, witness.value)),
          params.add(st.mask.randomness, params.mul(beta, witness.randomness)), beta};
}

bool cm_check(const Commitment& c, const Commitment& announce, const FieldElement& z_value,
              const FieldElement& z_rand, const FieldElement& beta, const GroupParams& params) {
  if (!fields_ok(params, {&z_value, &z_rand, &beta})) return false;
  if (!params.is_group_element(announce.point)) return false;
  GroupElement lhs = commit(z_value, z_rand, params).point;
  GroupElement rhs = params.gmul(announce.point, params.pow(c.point, beta));
  return lhs == rhs;
}

ProofCm prove_cm(const Opening& opening, const GroupParams& params, Transcript& t, Rng& rng) {
  CmProverState st = cm_announce(rng, params);
  t.append_commitment("cm.C", commit(opening, params), params);
  t.append_commitment("cm.C'", st.announce, params);
  FieldElement beta = draw_challenge(t, params);
  return cm_respond(st, opening, beta, params);
}

bool verify_cm(const Commitment& c, const ProofCm& proof, const GroupParams& params,
               Transcript& t) {
  if (!params.is_group_element(proof.announce.point)) return false;
  t.append_commitment("cm.C", c, params);
  t.append_commitment("cm.C'", proof.announce, params);
  FieldElement beta = draw_challenge(t, params);
  if (beta != proof.challenge) return false;
  return cm_check(c, proof.announce, proof.z_value, proof.z_rand, beta, params);
}

// ---- Sum ----------------------------------------------------------------

SumProverState sum_announce(Rng& rng, const GroupParams& params) {
  SumProverState st;
  st.mask_rand = rng.below(params.order_q);
  st.announce = {params.pow_h(st.mask_rand)};
  return st;
}

ProofSum sum_respond(const SumProverState& st, std::span<const Opening> openings,
                     const FieldElement& beta, const GroupParams& params) {
  FieldElement r_sum = 0;
  for (const auto& o : openings) r_sum = params.add(r_sum, o.randomness);
  return {st.announce, params.add(st.mask_rand, params.mul(beta, r_sum)), beta};
}

bool sum_check(std::span<const Commitment> commitments, const FieldElement& claimed_sum,
               const Commitment& announce, const FieldElement& z_rand, const FieldElement& beta,
               const GroupParams& params) {
  if (!fields_ok(params, {&claimed_sum, &z_rand, &beta})) return false;
  if (!params.is_group_element(announce.point)) return false;
  GroupElement prod = 1;
  for (const auto& c : commitments) prod = params.gmul(prod, c.point);
  GroupElement lhs = commit(params.mul(beta, claimed_sum), z_rand, params).point;
  GroupElement rhs = params.gmul(announce.point, params.pow(prod, beta));
  return lhs == rhs;
}

void sum_append_statement(Transcript& t, std::span<const Commitment> commitments,
                          const FieldElement& claimed_sum, const GroupParams& params) {
  t.append_u64("sum.n", commitments.size());
  for (const auto& c : commitments) t.append_commitment("sum.C", c, params);
  t.append_field("sum.y", claimed_sum, params);
}

ProofSum prove_sum(std::span<const Opening> openings, const FieldElement& claimed_sum,
                   const GroupParams& params, Transcript& t, Rng& rng) {
  std::vector<Commitment> cs;
  cs.reserve(openings.size());
  for (const auto& o : openings) cs.push_back(commit(o, params));
  SumProverState st = sum_announce(rng, params);
  sum_append_statement(t, cs, claimed_sum, params);
  t.append_commitment("sum.C'", st.announce, params);
  FieldElement beta = draw_challenge(t, params);
  return sum_respond(st, openings, beta, params);
}

bool verify_sum(std::span<const Commitment> commitments, const FieldElement& claimed_sum,
                const ProofSum& proof, const GroupParams& params, Transcript& t) {
  if (!params.is_field_element(claimed_sum)) return false;
  if (!params.is_group_element(proof.announce.point)) return false;
  sum_append_statement(t, commitments, claimed_sum, params);
  t.append_commitment("sum.C'", proof.announce, params);
  FieldElement beta = draw_challenge(t, params);
  if (beta != proof.challenge) return false;
  return sum_check(commitments, claimed_sum, proof.announce, proof.z_rand, beta, params);
}

// ---- Mbs ----------------------------------------------------------------

MbsProverState mbs_announce(const Opening& opening, std::span<const FieldElement> members,
                            Rng& rng, const GroupParams& params) {
  const size_t n = members.size();
  MbsProverState st;
  st.index = n;
  for (size_t j = 0; j < n; ++j) {
    if (params.reduce(members[j]) == opening.value) {
      st.index = j;
      break;
    }
  }
  if (st.index == n) throw InputError("membership proof: value not in set");

  const FieldElement& x = opening.value;
  st.mask_rand.resize(n);
  st.proof.announces.resize(n);
  st.proof.z_values.resize(n);
  st.proof.z_rands.resize(n);
  st.proof.challenges.assign(n, FieldElement(0));
  for (size_t j = 0; j < n; ++j) {
    FieldElement xm = rng.below(params.order_q);
    st.mask_rand[j] = rng.below(params.order_q);
    st.proof.announces[j] = commit(xm, st.mask_rand[j], params);
    if (j == st.index) {
      st.proof.z_values[j] = xm;
    } else {
      FieldElement bj = rng.below(params.order_q);
      st.proof.challenges[j] = bj;
      st.proof.z_values[j] =
          params.add(xm, params.mul(params.sub(x, params.reduce(members[j])), bj));
    }
  }
  return st;
}

ProofMbs mbs_respond(MbsProverState st, const Opening& opening, const FieldElement& beta,
                     const GroupParams& params) {
  const size_t n = st.proof.announces.size();
  FieldElement rest = 0;
  for (size_t j = 0; j < n; ++j) {
    if (j != st.index) rest = params.add(rest, st.proof.challenges[j]);
  }
  st.proof.challenges[st.index] = params.sub(beta, rest);
  for (size_t j = 0; j < n; ++j) {
    st.proof.z_rands[j] =
        params.add(st.mask_rand[j], params.mul(opening.randomness, st.proof.challenges[j]));
  }
  return std::move(st.proof);
}

bool mbs_check(const Commitment& c, std::span<const FieldElement> members, const ProofMbs& proof,
               const FieldElement& beta, const GroupParams& params) {
  const size_t n = members.size();
  if (n == 0 || proof.announces.size() != n || proof.z_values.size() != n ||
      proof.z_rands.size() != n || proof.challenges.size() != n) {
    return false;
  }
  FieldElement sum = 0;
  for (size_t j = 0; j < n; ++j) {
    if (!fields_ok(params, {&proof.z_values[j], &proof.z_rands[j], &proof.challenges[j]})) {
      return false;
    }
    sum = params.add(sum, proof.challenges[j]);
  }
  if (sum != beta) return false;
  for (size_t j = 0; j < n; ++j) {
    if (!params.is_group_element(proof.announces[j].point)) return false;
    GroupElement shifted = params.gmul(c.point, params.pow_g(params.neg(params.reduce(members[j]))));
    GroupElement lhs = commit(proof.z_values[j], proof.z_rands[j], params).point;
    GroupElement rhs =
        params.gmul(proof.announces[j].point, params.pow(shifted, proof.challenges[j]));
    if (lhs != rhs) return false;
  }
  return true;
}

void mbs_append_first_move(Transcript& t, const ProofMbs& proof, const GroupParams& params) {
  t.append_u64("mbs.n", proof.announces.size());
  for (const auto& a : proof.announces) t.append_commitment("mbs.A", a, params);
  for (const auto& z : proof.z_values) t.append_field("mbs.zx", z, params);
}

void mbs_append_statement(Transcript& t, const Commitment& c,
                          std::span<const FieldElement> members, const GroupParams& params) {
  t.append_commitment("mbs.C", c, params);
  t.append_u64("mbs.k", members.size());
  for (const auto& x : members) t.append_field("mbs.x", params.reduce(x), params);
}

ProofMbs prove_mbs(const Opening& opening, std::span<const FieldElement> members,
                   const GroupParams& params, Transcript& t, Rng& rng) {
  MbsProverState st = mbs_announce(opening, members, rng, params);
  mbs_append_statement(t, commit(opening, params), members, params);
  mbs_append_first_move(t, st.proof, params);
  FieldElement beta = draw_challenge(t, params);
  return mbs_respond(std::move(st), opening, beta, params);
}

bool verify_mbs(const Commitment& c, std::span<const FieldElement> members,
                const ProofMbs& proof, const GroupParams& params, Transcript& t) {
  if (proof.z_values.size() != proof.announces.size()) return false;
  for (const auto& z : proof.z_values) {
    if (!params.is_field_element(z)) return false;
  }
  mbs_append_statement(t, c, members, params);
  mbs_append_first_move(t, proof, params);
  FieldElement beta = draw_challenge(t, params);
  return mbs_check(c, members, proof, beta, params);
}

// ---- NN -----------------------------------------------------------------

namespace {

const std::vector<FieldElement>& bit_set() {
  static const std::vector<FieldElement> s{FieldElement(0), FieldElement(1)};
  return s;
}

}  // namespace

std::vector<int> bit_decompose(const FieldElement& x, int m) {
  std::vector<int> bits(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) bits[static_cast<size_t>(i)] = mpz_tstbit(x.get_mpz_t(), i);
  return bits;
}

NnProverState nn_announce(std::span<const int> bits, Rng& rng, const GroupParams& params) {
  NnProverState st;
  const size_t m = bits.size();
  st.bits.reserve(m);
  st.bit_states.reserve(m);
  st.proof.bit_commitments.reserve(m);
  for (size_t i = 0; i < m; ++i) {
    Opening o{FieldElement(bits[i]), rng.below(params.order_q)};
    st.proof.bit_commitments.push_back(commit(o, params));
    st.bit_states.push_back(mbs_announce(o, bit_set(), rng, params));
    st.bits.push_back(std::move(o));
  }
  st.mask_rand = rng.below(params.order_q);
  st.proof.announce = {params.pow_h(st.mask_rand)};
  return st;
}

ProofNN nn_respond(NnProverState st, const Opening& opening, const FieldElement& beta,
                   const GroupParams& params) {
  const size_t m = st.bits.size();
  st.proof.bit_proofs.reserve(m);
  // sum_i r_i 2^(i-1) - r
  FieldElement acc = 0;
  for (size_t k = m; k-- > 0;) {
    acc = params.add(params.add(acc, acc), st.bits[k].randomness);
  }
  acc = params.sub(acc, opening.randomness);
  for (size_t i = 0; i < m; ++i) {
    st.proof.bit_proofs.push_back(
        mbs_respond(std::move(st.bit_states[i]), st.bits[i], beta, params));
  }
  st.proof.z_rand = params.add(st.mask_rand, params.mul(beta, acc));
  return std::move(st.proof);
}

bool nn_check(const Commitment& c, const ProofNN& proof, int m, const FieldElement& beta,
              const GroupParams& params) {
  const size_t mm = static_cast<size_t>(m);
  if (m <= 0 || proof.bit_commitments.size() != mm || proof.bit_proofs.size() != mm) {
    return false;
  }
  if (!params.is_field_element(proof.z_rand) || !params.is_field_element(beta)) return false;
  if (!params.is_group_element(proof.announce.point)) return false;
  for (size_t i = 0; i < mm; ++i) {
    if (!params.is_group_element(proof.bit_commitments[i].point)) return false;
    if (!mbs_check(proof.bit_commitments[i], bit_set(), proof.bit_proofs[i], beta, params)) {
      return false;
    }
  }
  // prod_i B_i^(2^(i-1)) by Horner from the top bit.
  GroupElement recomposed = proof.bit_commitments[mm - 1].point;
  for (size_t k = mm - 1; k-- > 0;) {
    recomposed = params.gmul(params.gmul(recomposed, recomposed), proof.bit_commitments[k].point);
  }
  GroupElement lhs = params.pow_h(proof.z_rand);
  GroupElement rhs = params.gmul(proof.announce.point,
                                 params.pow(params.gdiv(recomposed, c.point), beta));
  return lhs == rhs;
}

void nn_append_first_move(Transcript& t, const Commitment& c, const ProofNN& proof,
                          const GroupParams& params) {
  t.append_commitment("nn.C", c, params);
  t.append_u64("nn.m", proof.bit_commitments.size());
  for (const auto& b : proof.bit_commitments) t.append_commitment("nn.B", b, params);
  for (const auto& p : proof.bit_proofs) mbs_append_first_move(t, p, params);
  t.append_commitment("nn.C'", proof.announce, params);
}

ProofNN prove_nn_with_bits(const Opening& opening, std::span<const int> bits,
                           const GroupParams& params, Transcript& t, Rng& rng) {
  NnProverState st = nn_announce(bits, rng, params);
  // First move is complete except for the challenge-dependent fields.
  ProofNN first = st.proof;
  for (const auto& bs : st.bit_states) first.bit_proofs.push_back(bs.proof);
  nn_append_first_move(t, commit(opening, params), first, params);
  FieldElement beta = draw_challenge(t, params);
  return nn_respond(std::move(st), opening, beta, params);
}

ProofNN prove_nn(const Opening& opening, int m, const GroupParams& params, Transcript& t,
                 Rng& rng) {
  if (m <= 0 || opening.value < 0 ||
      mpz_sizeinbase(opening.value.get_mpz_t(), 2) > static_cast<size_t>(m)) {
    throw InputError("non-negativity proof: value outside [0, 2^m)");
  }
  std::vector<int> bits = bit_decompose(opening.value, m);
  return prove_nn_with_bits(opening, bits, params, t, rng);
}

bool verify_nn(const Commitment& c, const ProofNN& proof, int m, const GroupParams& params,
               Transcript& t) {
  if (proof.bit_proofs.size() != proof.bit_commitments.size()) return false;
  for (const auto& p : proof.bit_proofs) {
    if (p.z_values.size() != p.announces.size()) return false;
    for (const auto& z : p.z_values) {
      if (!params.is_field_element(z)) return false;
    }
  }
  nn_append_first_move(t, c, proof, params);
  FieldElement beta = draw_challenge(t, params);
  return nn_check(c, proof, m, beta, params);
}

// ---- serialization ------------------------------------------------------

namespace {

void write_fields(ByteWriter& w, const std::vector<FieldElement>& xs, const GroupParams& params) {
  for (const auto& x : xs) params.write_field(w, x);
}

std::vector<FieldElement> read_fields(ByteReader& r, size_t n, const GroupParams& params) {
  std::vector<FieldElement> out(n);
  for (auto& x : out) x = params.read_field(r);
  return out;
}

uint32_t read_count(ByteReader& r, size_t min_bytes_each) {
  uint32_t n = r.u32();
  if (n > (1u << 20) || min_bytes_each == 0) throw DecodeError("implausible list length");
  return n;
}

}  // namespace

void write_proof(ByteWriter& w, const ProofCm& p, const GroupParams& params) {
  write_commitment(w, p.announce, params);
  params.write_field(w, p.z_value);
  params.write_field(w, p.z_rand);
  params.write_field(w, p.challenge);
}

void write_proof(ByteWriter& w, const ProofSum& p, const GroupParams& params) {
  write_commitment(w, p.announce, params);
  params.write_field(w, p.z_rand);
  params.write_field(w, p.challenge);
}

void write_proof(ByteWriter& w, const ProofMbs& p, const GroupParams& params) {
  const size_t n = p.announces.size();
  if (p.z_values.size() != n || p.z_rands.size() != n || p.challenges.size() != n) {
    throw EncodingError("membership proof lists differ in length");
  }
  w.u32(static_cast<uint32_t>(n));
  for (const auto& a : p.announces) write_commitment(w, a, params);
  write_fields(w, p.z_values, params);
  write_fields(w, p.z_rands, params);
  write_fields(w, p.challenges, params);
}

void write_proof(ByteWriter& w, const ProofNN& p, const GroupParams& params) {
  if (p.bit_proofs.size() != p.bit_commitments.size()) {
    throw EncodingError("range proof lists differ in length");
  }
  w.u32(static_cast<uint32_t>(p.bit_commitments.size()));
  for (const auto& b : p.bit_commitments) write_commitment(w, b, params);
  for (const auto& bp : p.bit_proofs) write_proof(w, bp, params);
  write_commitment(w, p.announce, params);
  params.write_field(w, p.z_rand);
}

ProofCm read_proof_cm(ByteReader& r, const GroupParams& params) {
  ProofCm p;
  p.announce = read_commitment(r, params);
  p.z_value = params.read_field(r);
  p.z_rand = params.read_field(r);
  p.challenge = params.read_field(r);
  return p;
}

ProofSum read_proof_sum(ByteReader& r, const GroupParams& params) {
  ProofSum p;
  p.announce = read_commitment(r, params);
  p.z_rand = params.read_field(r);
  p.challenge = params.read_field(r);
  return p;
}

ProofMbs read_proof_mbs(ByteReader& r, const GroupParams& params) {
  ProofMbs p;
  uint32_t n = read_count(r, params.group_bytes());
  p.announces.resize(n);
  for (auto& a : p.announces) a = read_commitment(r, params);
  p.z_values = read_fields(r, n, params);
  p.z_rands = read_fields(r, n, params);
  p.challenges = read_fields(r, n, params);
  return p;
}

ProofNN read_proof_nn(ByteReader& r, const GroupParams& params) {
  ProofNN p;
  uint32_t m = read_count(r, params.group_bytes());
  p.bit_commitments.resize(m);
  for (auto& b : p.bit_commitments) b = read_commitment(r, params);
  p.bit_proofs.reserve(m);
  for (uint32_t i = 0; i < m; ++i) p.bit_proofs.push_back(read_proof_mbs(r, params));
  p.announce = read_commitment(r, params);
  p.z_rand = params.read_field(r);
  return p;
}

}  // namespace pess
