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

#include <random>

#include "pess/protocol.h"

namespace pess::test {

// Demands in 0.01 kWh steps, all strictly positive so no aggregate equals a
// single user's value by accident. Prices spread enough that storage is used.
inline ProtocolConfig random_config(std::mt19937_64& gen, int n, int T, Scheme scheme) {
  std::uniform_int_distribution<int> demand(5, 500), price(5, 60), cap(50, 200);
  ProtocolConfig cfg;
  cfg.scheme = scheme;
  cfg.seed = gen();
  cfg.demands.assign(static_cast<size_t>(n), {});
  for (auto& row : cfg.demands) {
    for (int t = 0; t < T; ++t) row.push_back(ratio(demand(gen), 100));
  }
  for (int t = 0; t < T; ++t) {
    cfg.prices.prices.push_back(ratio(price(gen), 100));
    cfg.storage.capacity.push_back(ratio(cap(gen), 10));
  }
  cfg.prices.prices[0] = ratio(2, 100);  // a cheap slot to charge in
  cfg.storage.service_fee = ratio(1, 100);
  cfg.storage.eff_charge = ratio(9, 10);
  cfg.storage.eff_discharge = ratio(11, 10);
  cfg.storage.rate_charge = 8;
  cfg.storage.rate_discharge = 8;
  return cfg;
}

}  // namespace pess::test
