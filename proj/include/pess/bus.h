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

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pess/bytes.h"

namespace pess {

enum class AbortKind {
  kNnProofFailed,
  kZkpCmFailed,
  kMacFailed,
  kCostMismatch,
  kSumProofFailed,
  kBalanceProofFailed,
  kCoinTossMismatch,
  kReceiptInvalid,
  kVnmRejected,
};

std::string_view abort_kind_name(AbortKind k);
std::optional<AbortKind> abort_kind_from_name(std::string_view name);

struct AbortReason {
  int stage = 0;
  std::string step;
  AbortKind kind = AbortKind::kMacFailed;
  int detected_by = -1;
  std::string detail;
};

class ProtocolAbort : public std::runtime_error {
 public:
  explicit ProtocolAbort(AbortReason r);
  const AbortReason& reason() const { return reason_; }

 private:
  AbortReason reason_;
};

inline constexpr int kBroadcast = -1;

struct Message {
  uint64_t round = 0;
  int sender = 0;
  int recipient = kBroadcast;
  std::string tag;
  Bytes payload;
  std::string stage;
};

struct StageTraffic {
  uint64_t messages = 0;
  uint64_t bytes = 0;
};

// Synchronous-round message bus. Messages sent during round k become visible
// only after barrier(); barrier() also turns a pending abort into a
// ProtocolAbort thrown at every caller.
class Bus {
 public:
  explicit Bus(int n_parties);

  int n_parties() const { return n_parties_; }
  void set_stage(std::string stage) { stage_ = std::move(stage); }
  const std::string& stage() const { return stage_; }
  uint64_t round() const { return round_; }

  void send(int sender, int recipient, std::string tag, Bytes payload);
  void broadcast(int sender, std::string tag, Bytes payload) {
    send(sender, kBroadcast, std::move(tag), std::move(payload));
  }
  // Broadcasts an abort notice; the next barrier() throws.
  void announce_abort(int sender, AbortReason reason);
  [[noreturn]] void abort_now(int sender, AbortReason reason);
  bool aborted() const { return abort_.has_value(); }

  void barrier();

  // Messages delivered to `party` in the last completed round with this tag,
  // ordered by sender.
  std::vector<const Message*> inbox(int party, std::string_view tag) const;
  // The single message from `sender` with `tag` visible to `party`.
  const Message& receive(int party, int sender, std::string_view tag) const;

  const std::vector<Message>& transcript() const { return log_; }
  // Everything `party` sent or could read.
  std::vector<const Message*> view(int party) const;
  const std::map<std::string, StageTraffic>& traffic() const { return traffic_; }

  // Per-party wall time spent in local computation, keyed by stage. A clock
  // over several parties charges each of them the full elapsed time; it is
  // used for deterministic work on public data that every one of them would
  // repeat, which the simulator evaluates once.
  class Clock {
   public:
    Clock(Bus& bus, std::vector<int> parties);
    ~Clock();
    Clock(const Clock&) = delete;
    Clock& operator=(const Clock&) = delete;

   private:
    Bus& bus_;
    std::vector<int> parties_;
    std::chrono::steady_clock::time_point start_;
  };
  Clock clock(int party) { return Clock(*this, {party}); }
  Clock clock_all(std::vector<int> parties) { return Clock(*this, std::move(parties)); }
  double party_seconds(int party, const std::string& stage) const;

 private:
  int n_parties_;
  std::string stage_ = "setup";
  uint64_t round_ = 0;
  size_t delivered_begin_ = 0;
  size_t delivered_end_ = 0;
  std::vector<Message> log_;
  std::vector<Message> pending_;
  std::optional<AbortReason> abort_;
  std::map<std::string, StageTraffic> traffic_;
  std::map<std::pair<int, std::string>, double> seconds_;
};

}  // namespace pess
