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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pess/protocol.h"

namespace pess {

// Synthetic day: time-of-use prices with an evening peak, per-user load
// curves with noise, storage sized with the number of users.
ProtocolConfig synthetic_scenario(int n_users, int slots, uint64_t seed, Scheme scheme,
                                  const std::string& group);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct BenchOptions {
  std::vector<int> n_values{5, 10, 15, 20, 25};
  int slots = 144;
  std::string group = "prod";
  int repetitions = 1;
  uint64_t seed = 1;
  Scheme scheme = Scheme::kProportional;
};

struct BenchRow {
  int n_users = 0;
  bool settled = true;
  // Averages over repetitions, keyed by stage.
  std::map<std::string, double> party_seconds;  // slowest party's compute
  std::map<std::string, double> wall_seconds;   // simulator time
  std::map<std::string, double> bytes;
  std::map<std::string, double> messages;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  // "<stage>.seconds", "<stage>.wall_seconds", "<stage>.bytes" against N.
  std::map<std::string, LinearFit> fits;
};

BenchResult run_bench(const BenchOptions& opt,
                      const std::function<void(const BenchRow&)>& progress = {});
nlohmann::json bench_report(const BenchOptions& opt, const BenchResult& res);

}  // namespace pess
