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

#include "pess/scheduler.h"

#include "pess/errors.h"
#include "pess/lp.h"

namespace pess {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InputError(what);
}

}  // namespace

void validate_inputs(std::span<const Rational> total_demand, const PricePlan& prices,
                     const StorageParams& storage) {
  const size_t T = total_demand.size();
  require(T >= 1, "schedule needs at least one slot");
  require(prices.prices.size() == T, "price plan length differs from demand length");
  require(storage.capacity.size() == T, "capacity length differs from demand length");
  for (size_t t = 0; t < T; ++t) {
    require(total_demand[t] >= 0, "demand must be non-negative");
    require(prices.prices[t] >= 0, "prices must be non-negative");
    require(storage.capacity[t] >= 0, "capacity must be non-negative");
  }
  require(storage.service_fee >= 0, "service fee must be non-negative");
  require(storage.eff_charge > 0 && storage.eff_charge <= 1, "charging efficiency must be in (0,1]");
  require(storage.eff_discharge >= 1, "discharging efficiency must be >= 1");
  require(storage.rate_charge > 0, "charge rate must be positive");
  require(storage.rate_discharge > 0, "discharge rate must be positive");
  require(storage.vnm_fee_fraction >= 0 && storage.vnm_fee_fraction < 1,
          "VNM fee fraction must be in [0,1)");
}

ScheduleSolution solve_p2(std::span<const Rational> total_demand, const PricePlan& prices,
                          const StorageParams& storage) {
  validate_inputs(total_demand, prices, storage);
  const size_t T = total_demand.size();
  const Rational drain = storage.eff_discharge / (1 - storage.vnm_fee_fraction);

  // Columns: x+(t) at t, x-(t) at T+t, state after slot t at 2T+t. y(t) is
  // a(t) - x-(t), so x-(t) <= a(t) carries y(t) >= 0.
  BoundedLp<Rational> lp;
  const size_t n = 3 * T;
  lp.a.assign(T, std::vector<Rational>(n, Rational(0)));
  lp.b.assign(T, Rational(0));
  lp.c.assign(n, Rational(0));
  lp.lower.assign(n, Rational(0));
  lp.upper.assign(n, std::nullopt);
  for (size_t t = 0; t < T; ++t) {
    lp.a[t][2 * T + t] = 1;
    if (t > 0) lp.a[t][2 * T + t - 1] = -1;
    lp.a[t][t] = -storage.eff_charge;
    lp.a[t][T + t] = drain;
    lp.c[t] = prices.prices[t] + storage.service_fee;
    lp.c[T + t] = -prices.prices[t];
    lp.upper[t] = storage.rate_charge;
    lp.upper[T + t] = total_demand[t] < storage.rate_discharge ? total_demand[t]
                                                                : storage.rate_discharge;
    // b(t+1) <= B(t+1); the last state is b(T+1) = 0.
    lp.upper[2 * T + t] = t + 1 < T ? storage.capacity[t + 1] : Rational(0);
  }
  std::vector<size_t> basis(T);
  for (size_t t = 0; t < T; ++t) basis[t] = 2 * T + t;
  LpResult<Rational> r = solve_bounded_lp(lp, basis);

  ScheduleSolution sol;
  sol.pivots = r.pivots;
  sol.objective = r.objective;
  sol.soc.assign(T + 2, Rational(0));
  for (size_t t = 0; t < T; ++t) {
    sol.charge.push_back(r.x[t]);
    sol.discharge.push_back(r.x[T + t]);
    sol.residual.push_back(total_demand[t] - r.x[T + t]);
    sol.objective += prices.prices[t] * total_demand[t];
    sol.soc[t + 2] = r.x[2 * T + t];
  }
  return sol;
}

std::vector<Rational> aggregate_demand(const DemandProfiles& profiles) {
  require(!profiles.empty(), "no demand profiles");
  const size_t T = profiles[0].size();
  std::vector<Rational> a(T, Rational(0));
  for (const auto& p : profiles) {
    require(p.size() == T, "demand profiles differ in length");
    for (size_t t = 0; t < T; ++t) a[t] += p[t];
  }
  return a;
}

std::vector<UserSchedule> disaggregate(const ScheduleSolution& sol, const DemandProfiles& profiles) {
  std::vector<Rational> a = aggregate_demand(profiles);
  const size_t T = a.size();
  require(sol.discharge.size() == T, "schedule length differs from demand length");
  for (size_t t = 0; t < T; ++t) {
    require(sol.discharge[t] + sol.residual[t] == a[t], "profiles do not sum to the solved demand");
  }
  std::vector<UserSchedule> out(profiles.size());
  for (size_t i = 0; i < profiles.size(); ++i) {
    for (size_t t = 0; t < T; ++t) {
      if (a[t] == 0) {
        out[i].discharge.push_back(0);
        out[i].residual.push_back(0);
        continue;
      }
      Rational share = profiles[i][t] / a[t];
      out[i].discharge.push_back(share * sol.discharge[t]);
      out[i].residual.push_back(share * sol.residual[t]);
    }
  }
  return out;
}

std::string_view scheme_name(Scheme s) {
  return s == Scheme::kProportional ? "proportional" : "egalitarian";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "proportional" || name == "pp") return Scheme::kProportional;
  if (name == "egalitarian" || name == "ega") return Scheme::kEgalitarian;
  throw InputError("unknown cost-sharing scheme '" + std::string(name) + "'");
}

Rational user_payment(std::span<const Rational> own_demand,
                      std::span<const Rational> effective_prices, const Rational& cost_ess,
                      const Rational& cost_org, size_t n_users, Scheme scheme) {
  if (cost_org == 0) return 0;
  Rational base = 0;
  for (size_t t = 0; t < own_demand.size(); ++t) base += own_demand[t] * effective_prices[t];
  if (scheme == Scheme::kProportional) return cost_ess / cost_org * base;
  return base - (cost_org - cost_ess) / Rational(static_cast<long>(n_users));
}

CostBreakdown cost_sharing(const ScheduleSolution& sol, const DemandProfiles& profiles,
                           const PricePlan& prices, const StorageParams& storage, Scheme scheme) {
  std::vector<Rational> a = aggregate_demand(profiles);
  const size_t T = a.size();
  require(prices.prices.size() == T && sol.charge.size() == T, "length mismatch in cost sharing");
  CostBreakdown cb;
  cb.cost_ess = 0;
  cb.cost_org = 0;
  for (size_t t = 0; t < T; ++t) {
    cb.cost_ess += (prices.prices[t] + storage.service_fee) * sol.charge[t];
    cb.cost_org += sol.discharge[t] * prices.prices[t];
    cb.effective_prices.push_back(a[t] == 0 ? Rational(0)
                                            : sol.discharge[t] * prices.prices[t] / a[t]);
  }
  for (const auto& p : profiles) {
    Rational cost = 0;
    for (size_t t = 0; t < T; ++t) cost += p[t] * cb.effective_prices[t];
    Rational pay = user_payment(p, cb.effective_prices, cb.cost_ess, cb.cost_org, profiles.size(),
                                scheme);
    cb.user_costs.push_back(cost);
    cb.payments.push_back(pay);
    cb.savings.push_back(cb.cost_org == 0 ? Rational(0) : cost - pay);
  }
  return cb;
}

DischargeRatios quantize_ratios(const ScheduleSolution& sol, std::span<const Rational> total_demand,
                                const mpz_class& scale) {
  require(sol.discharge.size() == total_demand.size(), "length mismatch in ratio quantization");
  DischargeRatios r;
  r.unit = scale * scale;
  for (size_t t = 0; t < total_demand.size(); ++t) {
    if (total_demand[t] == 0) {
      r.ratio.push_back(0);
    } else {
      r.ratio.push_back(floor_rational(sol.discharge[t] / total_demand[t] * Rational(r.unit)));
    }
  }
  return r;
}

Rational p1_objective(const ScheduleSolution& sol, const std::vector<UserSchedule>& users,
                      const PricePlan& prices, const StorageParams& storage) {
  Rational obj = 0;
  for (size_t t = 0; t < sol.charge.size(); ++t) {
    Rational y = 0;
    for (const auto& u : users) y += u.residual[t];
    obj += prices.prices[t] * (sol.charge[t] + y) + storage.service_fee * sol.charge[t];
  }
  return obj;
}

}  // namespace pess
