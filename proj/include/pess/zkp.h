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
#include <string_view>
#include <vector>

#include "pess/commitments.h"
#include "pess/errors.h"

namespace pess {

// Append-only Fiat-Shamir transcript. Every entry is length-prefixed so
// distinct message sequences never collide.
class Transcript {
 public:
  explicit Transcript(std::string_view domain);

  void append(std::string_view label, std::span<const uint8_t> data);
  void append_u64(std::string_view label, uint64_t v);
  void append_field(std::string_view label, const FieldElement& x, const GroupParams& params);
  void append_group(std::string_view label, const GroupElement& x, const GroupParams& params);
  void append_commitment(std::string_view label, const Commitment& c,
                         const GroupParams& params) {
    append_group(label, c.point, params);
  }

  const Bytes& bytes() const { return buf_; }

 private:
  Bytes buf_;
};

// SHA-256 of the transcript bytes, big-endian, reduced mod q.
FieldElement fiat_shamir(const Transcript& t, const GroupParams& params);
// fiat_shamir, then absorb the challenge so later challenges depend on it.
FieldElement draw_challenge(Transcript& t, const GroupParams& params);

// ---- knowledge of an opening --------------------------------------------

struct ProofCm {
  Commitment announce;
  FieldElement z_value;
  FieldElement z_rand;
  FieldElement challenge;
  bool operator==(const ProofCm&) const = default;
};

struct CmProverState {
  Opening mask;
  Commitment announce;
};

CmProverState cm_announce(Rng& rng, const GroupParams& params);
ProofCm cm_respond(const CmProverState& st, const Opening& witness, const FieldElement& beta,
                   const GroupParams& params);
// g^{z_x} h^{z_r} == C' * C^beta
bool cm_check(const Commitment& c, const Commitment& announce, const FieldElement& z_value,
              const FieldElement& z_rand, const FieldElement& beta, const GroupParams& params);

ProofCm prove_cm(const Opening& opening, const GroupParams& params, Transcript& t, Rng& rng);
bool verify_cm(const Commitment& c, const ProofCm& proof, const GroupParams& params,
               Transcript& t);

// ---- public sum of committed values -------------------------------------

struct ProofSum {
  Commitment announce;
  FieldElement z_rand;
  FieldElement challenge;
  bool operator==(const ProofSum&) const = default;
};

struct SumProverState {
  FieldElement mask_rand;
  Commitment announce;
};

SumProverState sum_announce(Rng& rng, const GroupParams& params);
ProofSum sum_respond(const SumProverState& st, std::span<const Opening> openings,
                     const FieldElement& beta, const GroupParams& params);
// g^{beta y} h^{z_r} == C' * prod C_i^beta
bool sum_check(std::span<const Commitment> commitments, const FieldElement& claimed_sum,
               const Commitment& announce, const FieldElement& z_rand, const FieldElement& beta,
               const GroupParams& params);
void sum_append_statement(Transcript& t, std::span<const Commitment> commitments,
                          const FieldElement& claimed_sum, const GroupParams& params);

ProofSum prove_sum(std::span<const Opening> openings, const FieldElement& claimed_sum,
                   const GroupParams& params, Transcript& t, Rng& rng);
bool verify_sum(std::span<const Commitment> commitments, const FieldElement& claimed_sum,
                const ProofSum& proof, const GroupParams& params, Transcript& t);

// ---- set membership ------------------------------------------------------

struct ProofMbs {
  std::vector<Commitment> announces;
  std::vector<FieldElement> z_values;  // sent with the announces
  std::vector<FieldElement> z_rands;
  std::vector<FieldElement> challenges;  // per-member beta_j, sum to beta
  bool operator==(const ProofMbs&) const = default;
};

struct MbsProverState {
  size_t index = 0;
  std::vector<FieldElement> mask_rand;
  ProofMbs proof;  // announces, z_values and simulated challenges filled
};

MbsProverState mbs_announce(const Opening& opening, std::span<const FieldElement> members,
                            Rng& rng, const GroupParams& params);
ProofMbs mbs_respond(MbsProverState st, const Opening& opening, const FieldElement& beta,
                     const GroupParams& params);
bool mbs_check(const Commitment& c, std::span<const FieldElement> members, const ProofMbs& proof,
               const FieldElement& beta, const GroupParams& params);
void mbs_append_first_move(Transcript& t, const ProofMbs& proof, const GroupParams& params);
void mbs_append_statement(Transcript& t, const Commitment& c,
                          std::span<const FieldElement> members, const GroupParams& params);

ProofMbs prove_mbs(const Opening& opening, std::span<const FieldElement> members,
                   const GroupParams& params, Transcript& t, Rng& rng);
bool verify_mbs(const Commitment& c, std::span<const FieldElement> members,
                const ProofMbs& proof, const GroupParams& params, Transcript& t);

// ---- non-negativity by bit decomposition --------------------------------

inline constexpr int kRangeBits = 32;

struct ProofNN {
  std::vector<Commitment> bit_commitments;  // least significant first
  std::vector<ProofMbs> bit_proofs;
  Commitment announce;
  FieldElement z_rand;
  bool operator==(const ProofNN&) const = default;
};

struct NnProverState {
  std::vector<Opening> bits;
  std::vector<MbsProverState> bit_states;
  FieldElement mask_rand;
  ProofNN proof;
};

// `bits` is taken as given; prove_nn derives it from the opening.
NnProverState nn_announce(std::span<const int> bits, Rng& rng, const GroupParams& params);
ProofNN nn_respond(NnProverState st, const Opening& opening, const FieldElement& beta,
                   const GroupParams& params);
bool nn_check(const Commitment& c, const ProofNN& proof, int m, const FieldElement& beta,
              const GroupParams& params);
void nn_append_first_move(Transcript& t, const Commitment& c, const ProofNN& proof,
                          const GroupParams& params);

std::vector<int> bit_decompose(const FieldElement& x, int m);

// Throws InputError unless 0 <= value < 2^m.
ProofNN prove_nn(const Opening& opening, int m, const GroupParams& params, Transcript& t,
                 Rng& rng);
// No range check: proves whatever bits are supplied. Used to build forgeries.
ProofNN prove_nn_with_bits(const Opening& opening, std::span<const int> bits,
                           const GroupParams& params, Transcript& t, Rng& rng);
bool verify_nn(const Commitment& c, const ProofNN& proof, int m, const GroupParams& params,
               Transcript& t);

// ---- serialization ------------------------------------------------------

void write_proof(ByteWriter& w, const ProofCm& p, const GroupParams& params);
void write_proof(ByteWriter& w, const ProofSum& p, const GroupParams& params);
void write_proof(ByteWriter& w, const ProofMbs& p, const GroupParams& params);
void write_proof(ByteWriter& w, const ProofNN& p, const GroupParams& params);
ProofCm read_proof_cm(ByteReader& r, const GroupParams& params);
ProofSum read_proof_sum(ByteReader& r, const GroupParams& params);
ProofMbs read_proof_mbs(ByteReader& r, const GroupParams& params);
ProofNN read_proof_nn(ByteReader& r, const GroupParams& params);

template <typename Proof>
Bytes serialize(const Proof& p, const GroupParams& params) {
  ByteWriter w;
  write_proof(w, p, params);
  return std::move(w).take();
}

}  // namespace pess
