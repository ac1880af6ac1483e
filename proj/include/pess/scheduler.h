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

#include <gmpxx.h>

#include <span>
#include <string_view>
#include <vector>

#include "pess/rational.h"

namespace pess {

struct PricePlan {
  std::vector<Rational> prices;  // $/kWh per slot
};

struct StorageParams {
  std::vector<Rational> capacity;  // kWh per slot
  Rational service_fee = 0;        // $/kWh charged
  Rational eff_charge = 1;         // in (0, 1]
  Rational eff_discharge = 1;      // >= 1
  Rational rate_charge = 1;
  Rational rate_discharge = 1;
  Rational vnm_fee_fraction = 0;   // in [0, 1)
};

// demands[i][t]
using DemandProfiles = std::vector<std::vector<Rational>>;

struct ScheduleSolution {
  std::vector<Rational> charge;     // x+(t)
  std::vector<Rational> discharge;  // x-(t)
  std::vector<Rational> residual;   // y(t)
  std::vector<Rational> soc;        // b(0..T+1)
  Rational objective;
  size_t pivots = 0;
};

void validate_inputs(std::span<const Rational> total_demand, const PricePlan& prices,
                     const StorageParams& storage);

ScheduleSolution solve_p2(std::span<const Rational> total_demand, const PricePlan& prices,
                          const StorageParams& storage);

std::vector<Rational> aggregate_demand(const DemandProfiles& profiles);

struct UserSchedule {
  std::vector<Rational> discharge;  // x-_i(t)
  std::vector<Rational> residual;   // y_i(t)
};

std::vector<UserSchedule> disaggregate(const ScheduleSolution& sol, const DemandProfiles& profiles);

enum class Scheme { kProportional, kEgalitarian };
std::string_view scheme_name(Scheme s);
Scheme parse_scheme(std::string_view name);

struct CostBreakdown {
  Rational cost_ess;
  Rational cost_org;
  std::vector<Rational> effective_prices;  // p^(t)
  std::vector<Rational> user_costs;        // Cost_i
  std::vector<Rational> payments;
  std::vector<Rational> savings;
};

CostBreakdown cost_sharing(const ScheduleSolution& sol, const DemandProfiles& profiles,
                           const PricePlan& prices, const StorageParams& storage, Scheme scheme);

// Payment of one user from public quantities and its own demand only.
Rational user_payment(std::span<const Rational> own_demand,
                      std::span<const Rational> effective_prices, const Rational& cost_ess,
                      const Rational& cost_org, size_t n_users, Scheme scheme);

// rho(t) = floor(x-(t) / a(t) * unit) with unit = scale^2; 0 where a(t) = 0.
// A user's discharge in units of 1/(scale * unit) is a_i_raw(t) * rho(t).
struct DischargeRatios {
  mpz_class unit;
  std::vector<mpz_class> ratio;
};

DischargeRatios quantize_ratios(const ScheduleSolution& sol, std::span<const Rational> total_demand,
                                const mpz_class& scale);

// P1 objective of a disaggregated solution.
Rational p1_objective(const ScheduleSolution& sol, const std::vector<UserSchedule>& users,
                      const PricePlan& prices, const StorageParams& storage);

}  // namespace pess
