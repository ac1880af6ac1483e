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

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pess/bus.h"
#include "pess/commitments.h"
#include "pess/random.h"
#include "pess/zkp.h"

namespace pess {

// One party's slice of an authenticated value: x_i and gamma(x)_i.
struct AuthShare {
  FieldElement value_share;
  FieldElement mac_share;
  bool operator==(const AuthShare&) const = default;
};

struct MacKeyShare {
  FieldElement alpha_share;
};

// All parties' slices of one value, indexed by party. In the simulator each
// party only ever reads and writes its own slot.
using Shared = std::vector<AuthShare>;

struct Triple {
  Shared a, b, c;
  bool used = false;
};

struct InputMask {
  int owner = 0;
  Shared shared;
  FieldElement plain_for_owner;
  bool used = false;
};

struct PreprocessingPool {
  std::vector<MacKeyShare> mac_key_shares;
  std::vector<Triple> triples;
  std::vector<std::vector<InputMask>> masks;  // [owner][k]
};

class PoolExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dealer-mode stand-in for the offline phase.
PreprocessingPool deal_preprocessing(const GroupParams& gp, int n_parties, size_t n_triples,
                                     size_t n_masks_per_party, Rng& rng);
// Fresh random sharing of x under the pool's MAC key.
Shared deal_shared(const GroupParams& gp, const std::vector<MacKeyShare>& keys,
                   const FieldElement& x, Rng& rng);

// Local operations on one party's share.
AuthShare share_add(const AuthShare& x, const AuthShare& y, const GroupParams& gp);
AuthShare share_sub(const AuthShare& x, const AuthShare& y, const GroupParams& gp);
AuthShare share_scale(const FieldElement& c, const AuthShare& x, const GroupParams& gp);
// Party 0 adds c to its value share; every party adds c * alpha_i to its MAC share.
AuthShare share_add_const(const FieldElement& c, const AuthShare& x, int party,
                          const MacKeyShare& key, const GroupParams& gp);

// Reconstruction helpers for tests and dealer checks; never used by a party.
FieldElement reconstruct(const Shared& x, const GroupParams& gp);
FieldElement reconstruct_mac(const Shared& x, const GroupParams& gp);
FieldElement reconstruct_key(const std::vector<MacKeyShare>& keys, const GroupParams& gp);

// Adversary hooks. `party` is the party whose outgoing data is exposed.
struct MpcHooks {
  // Points: "input.local" (shares right after input), "open.share" (shares
  // about to be committed and revealed).
  std::function<void(int party, std::string_view point, std::vector<AuthShare>& shares,
                     const MacKeyShare& key)>
      on_shares;
  // Points: "input.broadcast" (z values), "open.reveal" (after commitment),
  // "coin.reveal", "mac.sigma".
  std::function<void(int party, std::string_view point, std::vector<FieldElement>& values)>
      on_values;
};

// An SPDZ session among the first n bus parties.
class Spdz {
 public:
  Spdz(const GroupParams& gp, Bus& bus, int n_parties, PreprocessingPool pool,
       std::vector<Rng> party_rngs, MpcHooks hooks = {});

  int n() const { return n_; }
  const GroupParams& params() const { return gp_; }
  Bus& bus() { return bus_; }
  const MacKeyShare& key(int party) const { return pool_.mac_key_shares[party]; }
  Rng& rng(int party) { return rngs_[party]; }
  MpcHooks& hooks() { return hooks_; }
  void set_stage_number(int stage) { stage_number_ = stage; }

  // Owner secret-shares a batch of values with one broadcast of z = x - r.
  std::vector<Shared> input(int owner, std::span<const FieldElement> secrets);
  Shared input(int owner, const FieldElement& secret);

  Shared add(const Shared& x, const Shared& y) const;
  Shared sub(const Shared& x, const Shared& y) const;
  Shared scale(const FieldElement& c, const Shared& x) const;
  Shared add_const(const FieldElement& c, const Shared& x) const;
  Shared zero() const;

  // Commit-then-reveal opening of a batch. Values are queued for the next
  // mac_check; nothing is verified here beyond the hash commitments.
  std::vector<FieldElement> open(const std::vector<Shared>& xs);
  FieldElement open(const Shared& x);

  std::vector<Shared> mul(const std::vector<Shared>& xs, const std::vector<Shared>& ys);
  Shared mul(const Shared& x, const Shared& y);

  // Random-linear-combination check over every value opened since the last
  // check. Aborts with MAC-failed on failure.
  void mac_check(std::string_view step);
  size_t pending_checks() const { return pending_.size(); }

  // Commit-then-reveal coin toss among all parties; k outputs in Z_q.
  std::vector<FieldElement> coin_toss(size_t k, std::string_view label);
  FieldElement coin_toss(std::string_view label) { return coin_toss(1, label)[0]; }

  size_t triples_left() const;
  size_t masks_left(int owner) const;

 private:
  struct Opened {
    FieldElement value;
    Shared shares;
  };

  // Commit round + reveal round for one vector of field elements per party.
  std::vector<std::vector<FieldElement>> commit_reveal(std::vector<std::vector<FieldElement>> vals,
                                                       std::string_view tag,
                                                       std::string_view reveal_point,
                                                       AbortKind on_mismatch,
                                                       std::string_view step);
  InputMask& take_mask(int owner);
  Triple& take_triple();

  const GroupParams& gp_;
  Bus& bus_;
  int n_;
  PreprocessingPool pool_;
  std::vector<Rng> rngs_;
  MpcHooks hooks_;
  std::vector<size_t> next_mask_;
  size_t next_triple_ = 0;
  std::vector<Opened> pending_;
  int stage_number_ = 0;
  uint64_t session_counter_ = 0;
};

// Stand-alone input step for one mask.
Shared input_value(int owner, const FieldElement& secret, InputMask& mask,
                   const std::vector<MacKeyShare>& keys, const GroupParams& gp,
                   FieldElement* broadcast_z = nullptr);

// ---- proofs computed over shared witnesses ------------------------------

// Everything one party-owned zkpCm needs, already secret-shared.
struct SharedCmWitness {
  Commitment commitment;  // public C = Cm(x, r)
  Commitment announce;    // public C' = Cm(x', r')
  Shared value, rand;     // <<x>>, <<r>>
  Shared mask_value, mask_rand;  // <<x'>>, <<r'>>
};

struct DistributedCmResult {
  std::vector<FieldElement> z_value, z_rand;
  std::vector<bool> accepted;
};

// Computes <<z_x>> = <<x'>> + beta <<x>>, <<z_r>> likewise, opens them in
// one batch and has every party check g^{z_x} h^{z_r} = C' C^beta.
DistributedCmResult distributed_prove_cm(Spdz& mpc, std::span<const SharedCmWitness> items,
                                         std::span<const FieldElement> betas);

struct DistributedSumResult {
  ProofSum proof;
  bool accepted = false;
};

// nzkpSum over commitments whose randomness is shared: C' = prod Cm(0, r'_i),
// beta = H(statement, C'), <<z_r>> = sum <<r'_i>> + beta sum <<r_i>>.
DistributedSumResult distributed_prove_sum(Spdz& mpc,
                                           std::span<const Commitment> payment_commitments,
                                           std::span<const Shared> rands,
                                           std::span<const Commitment> mask_announces,
                                           std::span<const Shared> mask_rands,
                                           const FieldElement& public_total, Transcript& t);

}  // namespace pess
