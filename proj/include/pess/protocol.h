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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pess/bus.h"
#include "pess/commitments.h"
#include "pess/errors.h"
#include "pess/scheduler.h"
#include "pess/zkp.h"

namespace pess {

// One scripted deviation. `party` is a user index, or n_users for the
// storage operator. `step` names the protocol step it fires in; `slot` and
// `target` refine mutations that touch one value or one victim.
//
// Mutations:
//   negative-demand  stage 1 commit        commits -1 kWh with forged range bits
//   share-mismatch   stage 1 input         shares a value other than the committed one
//   tamper-share     any step with opens   adds 1 to the party's opened value share
//   tamper-coin      any step with tosses  reveals a coin that does not match its commitment
//   stale-prices     stage 2 payment       prices its payment with p(t) instead of p^(t)
//   commit-mismatch  stage 2 payment       commits P_i + 1 unit but shares P_i
//   drain-balance    stage 0 funding       never tops up its account
//   tamper-receipt   stage 3 receipt       operator signs a wrong commitment for `target`
//   inflate-claim    stage 3 claim         claims one more unit than the receipt holds
struct AdversaryAction {
  int party = 0;
  int stage = 1;
  std::string step;
  std::string mutation;
  int target = 0;
  uint32_t slot = 0;
};

struct ProtocolConfig {
  std::string group = "prod";
  int64_t scale = 0;  // 0: the group's default
  Scheme scheme = Scheme::kProportional;
  std::optional<Rational> epsilon;  // default (N + T) / scale
  DemandProfiles demands;           // demands[i][t], private to user i
  PricePlan prices;
  StorageParams storage;
  std::vector<Rational> initial_balance;  // per user; default covers the user's bill
  uint64_t seed = 1;
  std::vector<AdversaryAction> adversary;

  size_t n_users() const { return demands.size(); }
  size_t slots() const { return prices.prices.size(); }
};

// Throws InputError on inconsistent configs.
void validate_config(const ProtocolConfig& cfg);
// The named group with the configured fixed-point scale.
GroupParams protocol_group(const ProtocolConfig& cfg);

struct PartyIds {
  int n_users;
  int op() const { return n_users; }
  int grid() const { return n_users + 1; }
  int ledger() const { return n_users + 2; }
  int total() const { return n_users + 3; }
};

struct UserOutcome {
  std::string address;
  Rational payment;           // P_i as committed, in $
  Rational credit;            // approved VNM credit, in $
  bool credited = false;
  std::vector<Rational> discharge;  // committed x-_i(t), in kWh
  Opening balance;            // tracked opening of the account after settlement
};

struct StageStats {
  double wall_seconds = 0;        // simulator time for the stage
  double max_party_seconds = 0;   // slowest party's local compute
  StageTraffic traffic;
};

struct ProtocolRun {
  int n_users = 0;
  bool settled = false;
  std::optional<AbortReason> abort;
  // Stage-3 failures: recorded per user, the rest still settle.
  std::vector<AbortReason> rejections;

  std::vector<Rational> aggregate_demand;
  ScheduleSolution schedule;
  Rational cost_ess, cost_org;
  std::vector<Rational> effective_prices;
  Rational payment_total;
  std::vector<UserOutcome> users;
  Opening operator_balance;
  bool conserved = false;  // ledger balances still open to the tracked sum
  std::string ledger_digest_before_execute, ledger_digest_final;

  std::vector<Message> transcript;
  std::map<std::string, StageStats> stages;
  std::vector<nlohmann::json> ledger_log;
  uint64_t seed = 0;

  // Abort kind, else the first rejection's kind, else empty.
  std::string failure_kind() const;
};

ProtocolRun run_full(const ProtocolConfig& cfg);

// Transcript of user `user`'s range proof on its slot-`slot` demand commitment.
Transcript demand_range_transcript(int user, size_t slot);

bool visible_to(const Message& m, int party);

// Plaintext pipeline on the same fixed-point demands the protocol commits to.
struct PlainOutcome {
  std::vector<Rational> aggregate_demand;
  ScheduleSolution schedule;
  CostBreakdown costs;
  std::vector<Rational> credits;  // sum_t x-_i(t) p(t)
};

DemandProfiles quantize_demands(const DemandProfiles& d, int64_t scale);
PlainOutcome run_plaintext(const ProtocolConfig& cfg);

}  // namespace pess
