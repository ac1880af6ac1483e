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

#include "pess/bus.h"

#include <array>

namespace pess {

namespace {

constexpr std::array<std::pair<AbortKind, std::string_view>, 9> kKindNames{{
    {AbortKind::kNnProofFailed, "NN-proof-failed"},
    {AbortKind::kZkpCmFailed, "zkpCm-failed"},
    {AbortKind::kMacFailed, "MAC-failed"},
    {AbortKind::kCostMismatch, "cost-mismatch"},
    {AbortKind::kSumProofFailed, "sum-proof-failed"},
    {AbortKind::kBalanceProofFailed, "balance-proof-failed"},
    {AbortKind::kCoinTossMismatch, "coin-toss-mismatch"},
    {AbortKind::kReceiptInvalid, "receipt-invalid"},
    {AbortKind::kVnmRejected, "vnm-rejected"},
}};

}  // namespace

std::string_view abort_kind_name(AbortKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "unknown";
}

std::optional<AbortKind> abort_kind_from_name(std::string_view name) {
  for (const auto& [kind, n] : kKindNames) {
    if (n == name) return kind;
  }
  return std::nullopt;
}

ProtocolAbort::ProtocolAbort(AbortReason r)
    : std::runtime_error("abort: " + std::string(abort_kind_name(r.kind)) + " at stage " +
                         std::to_string(r.stage) + " " + r.step),
      reason_(std::move(r)) {}

Bus::Bus(int n_parties) : n_parties_(n_parties) {}

void Bus::send(int sender, int recipient, std::string tag, Bytes payload) {
  if (abort_) throw std::logic_error("bus: send after abort");
  if (sender < 0 || sender >= n_parties_ || recipient < kBroadcast || recipient >= n_parties_) {
    throw std::out_of_range("bus: bad party id");
  }
  Message m;
  m.round = round_;
  m.sender = sender;
  m.recipient = recipient;
  m.tag = std::move(tag);
  m.payload = std::move(payload);
  m.stage = stage_;
  pending_.push_back(std::move(m));
}

void Bus::announce_abort(int sender, AbortReason reason) {
  if (abort_) return;
  reason.detected_by = sender;
  ByteWriter w;
  w.str(abort_kind_name(reason.kind));
  w.u32(static_cast<uint32_t>(reason.stage));
  w.str(reason.step);
  send(sender, kBroadcast, "abort", std::move(w).take());
  abort_ = std::move(reason);
}

void Bus::abort_now(int sender, AbortReason reason) {
  announce_abort(sender, std::move(reason));
  barrier();
  throw std::logic_error("unreachable");
}

void Bus::barrier() {
  delivered_begin_ = log_.size();
  for (auto& m : pending_) {
    auto& t = traffic_[m.stage];
    t.messages++;
    t.bytes += m.payload.size();
    log_.push_back(std::move(m));
  }
  pending_.clear();
  delivered_end_ = log_.size();
  ++round_;
  if (abort_) throw ProtocolAbort(*abort_);
}

std::vector<const Message*> Bus::inbox(int party, std::string_view tag) const {
  std::vector<const Message*> out;
  for (size_t i = delivered_begin_; i < delivered_end_; ++i) {
    const Message& m = log_[i];
    if (m.tag != tag) continue;
    if (m.recipient == kBroadcast || m.recipient == party) out.push_back(&m);
  }
  return out;
}

const Message& Bus::receive(int party, int sender, std::string_view tag) const {
  for (size_t i = delivered_begin_; i < delivered_end_; ++i) {
    const Message& m = log_[i];
    if (m.sender == sender && m.tag == tag &&
        (m.recipient == kBroadcast || m.recipient == party)) {
      return m;
    }
  }
  throw std::runtime_error("bus: missing message '" + std::string(tag) + "' from party " +
                           std::to_string(sender));
}

std::vector<const Message*> Bus::view(int party) const {
  std::vector<const Message*> out;
  for (const auto& m : log_) {
    if (m.sender == party || m.recipient == kBroadcast || m.recipient == party) {
      out.push_back(&m);
    }
  }
  return out;
}

Bus::Clock::Clock(Bus& bus, std::vector<int> parties)
    : bus_(bus), parties_(std::move(parties)), start_(std::chrono::steady_clock::now()) {}

Bus::Clock::~Clock() {
  std::chrono::duration<double> d = std::chrono::steady_clock::now() - start_;
  for (int p : parties_) bus_.seconds_[{p, bus_.stage_}] += d.count();
}

double Bus::party_seconds(int party, const std::string& stage) const {
  auto it = seconds_.find({party, stage});
  return it == seconds_.end() ? 0.0 : it->second;
}

}  // namespace pess
