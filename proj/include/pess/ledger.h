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
#include "pess/commitments.h"
#include "pess/rational.h"
#include "pess/signature.h"
#include "pess/zkp.h"

namespace pess {

// Hex of SHA-256(public key).
std::string address_of(std::span<const uint8_t> public_key);

struct Account {
  std::string address;
  Bytes public_key;
  Commitment balance;
  uint64_t nonce = 0;
};

struct MtxEntry {
  std::string sender;
  std::string recipient;
  Commitment value;
};

struct MultiTransaction {
  std::string id;  // mtx_id(entries, public_total)
  std::vector<MtxEntry> entries;
  FieldElement public_total;
  ProofSum sum_proof;
};

std::string mtx_id(const std::vector<MtxEntry>& entries, const FieldElement& public_total,
                   const GroupParams& gp);
Bytes mtx_body(const MultiTransaction& mtx, const GroupParams& gp);
// Transcripts the ledger re-derives challenges from.
Transcript mtx_sum_transcript(const std::string& id);
Transcript balance_transcript(const std::string& id, const std::string& sender);

struct Confirmation {
  std::string sender;
  uint64_t nonce = 0;
  ProofNN balance_proof;  // Bal - val >= 0
  Bytes signature;
};

Bytes confirmation_message(const MultiTransaction& mtx, const std::string& sender, uint64_t nonce,
                           const ProofNN& proof, const GroupParams& gp);

struct Receipt {
  std::string mtx_id;
  std::string issuer;  // operator address
  std::string user;
  uint32_t slot = 0;
  Commitment commitment;  // to the user's discharge in that slot
  Bytes signature;
};

Bytes receipt_message(const Receipt& r, const GroupParams& gp);
Bytes demand_upload_message(const std::string& user, const std::vector<Commitment>& cs,
                            const GroupParams& gp);

struct LedgerVerdict {
  bool ok = true;
  std::string code;  // "", "pending", "sum-proof", "balance-proof", "signature", ...
  std::string detail;

  static LedgerVerdict pass() { return {}; }
  static LedgerVerdict fail(std::string code, std::string detail) {
    return {false, std::move(code), std::move(detail)};
  }
};

// In-process stand-in for the chain: accounts with committed balances,
// proof-gated multi-transactions, receipts, and a hash-chained log.
class Ledger {
 public:
  Ledger(const GroupParams& gp, Rng rng);

  const GroupParams& params() const { return gp_; }

  std::string create_account(const Bytes& public_key);
  // Adds a fresh commitment to `amount` (raw units, >= 0); returns its opening
  // for the owner to fold into the balance opening it tracks.
  Opening top_up(const std::string& address, const mpz_class& amount);
  const Account& account(const std::string& address) const;
  bool has_account(const std::string& address) const { return accounts_.count(address) != 0; }

  LedgerVerdict upload_demand_commitments(const std::string& user, std::vector<Commitment> cs,
                                          const Bytes& signature);
  const std::vector<Commitment>* demand_commitments(const std::string& user) const;

  LedgerVerdict submit_mtx(const MultiTransaction& mtx, const std::string& submitter);
  LedgerVerdict confirm_mtx(const std::string& id, const Confirmation& c);
  // "pending" until every sender submitted and confirmed. Any failed check
  // rejects the whole transaction and leaves balances untouched.
  LedgerVerdict execute_mtx(const std::string& id);
  bool executed(const std::string& id) const { return done_.count(id) && done_.at(id); }

  LedgerVerdict attach_receipt(const Receipt& r);
  const Receipt* find_receipt(const std::string& user, uint32_t slot) const;
  size_t receipt_count(const std::string& user) const;

  const std::vector<nlohmann::json>& log() const { return log_; }
  // Digest over every account's balance and nonce.
  std::string state_digest() const;
  // Product of all balance commitments.
  Commitment balance_product() const;

 private:
  struct Pending {
    MultiTransaction mtx;
    Bytes body;
    std::map<std::string, bool> submitted;
    std::map<std::string, Confirmation> confirmations;
  };

  void append_log(std::string type, nlohmann::json payload);

  const GroupParams& gp_;
  Rng rng_;
  std::map<std::string, Account> accounts_;
  std::map<std::string, std::vector<Commitment>> demand_uploads_;
  std::map<std::string, Pending> pending_;
  std::map<std::string, bool> done_;  // id -> executed (false = rejected)
  std::map<std::pair<std::string, uint32_t>, Receipt> receipts_;
  std::vector<nlohmann::json> log_;
};

// ---- VNM audit by the grid operator --------------------------------------

struct VnmClaimItem {
  std::string receipt_user;
  uint32_t slot = 0;
  Opening opening;  // of the receipt commitment
};

struct VnmClaim {
  std::string claimant;
  std::vector<VnmClaimItem> items;
  Bytes signature;  // by the claimant's account key
};

Bytes vnm_claim_message(const VnmClaim& c, const GroupParams& gp);

struct VnmDecision {
  bool approved = false;
  Rational credit = 0;
  std::string detail;
};

// Checks signatures, receipt ownership, openings, and the per-slot cap
// against the announced export x-(t). `denominator` converts claimed
// integers to kWh. `claimed` carries per-slot totals across claims.
VnmDecision audit_vnm(const Ledger& ledger, const std::string& operator_address,
                      const VnmClaim& claim, const std::vector<Rational>& aggregate_export,
                      const std::vector<Rational>& prices, const mpz_class& denominator,
                      std::vector<mpz_class>& claimed);

// ---- log replay -----------------------------------------------------------

struct LogReplay {
  bool chain_ok = true;
  size_t entries = 0;
  size_t proofs_checked = 0;
  size_t signatures_checked = 0;
  std::vector<std::string> failures;
};

LogReplay replay_ledger_log(const std::vector<nlohmann::json>& log, const GroupParams& gp);

}  // namespace pess
