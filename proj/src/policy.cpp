#include "affinity/policy.hpp"

#include <cmath>

#include "affinity/errors.hpp"

namespace affinity {

void HouseholdParams::validate() const {
  if (!(delta >= 0.0)) throw ValidationError("delta must be nonnegative");
  if (!(w_m > 0.0) || !(w_f > 0.0)) throw ValidationError("wages must be positive");
  if (!(psi > 0.0)) throw ValidationError("psi must be positive");
  if (!(phi > 0.0)) throw ValidationError("phi must be positive");
  if (!(s >= 0.0 && s < 1.0)) throw ValidationError("s must lie in [0, 1)");
}

namespace {

double preference_weight(double delta) { return delta / (1.0 + delta); }

double cost_denominator(const HouseholdParams& p) {
  return p.psi + (1.0 - p.s) * p.w_f * p.phi;
}

}  // namespace

double fertility(const HouseholdParams& p) {
  p.validate();
  const double n = preference_weight(p.delta) * (p.w_m + p.w_f) / cost_denominator(p);
  const double implied_lf = 1.0 - (1.0 - p.s) * n * p.phi;
  if (implied_lf < 0.0) throw InfeasibleLabor(implied_lf);
  return n;
}

double labor_supply(const HouseholdParams& p) {
  return 1.0 - (1.0 - p.s) * fertility(p) * p.phi;
}

double consumption(const HouseholdParams& p) {
  const double n = fertility(p);
  const double lf = 1.0 - (1.0 - p.s) * n * p.phi;
  return p.w_m + p.w_f * lf - p.psi * n;
}

ChildcareEffects childcare_effects(const HouseholdParams& p) {
  p.validate();
  fertility(p);  // feasibility check
  const double denom = cost_denominator(p);
  const double shared = preference_weight(p.delta) * (p.w_m + p.w_f) / (denom * denom);
  ChildcareEffects out;
  out.dn_ds = shared * p.w_f * p.phi;
  out.dlf_ds = shared * p.psi * p.phi;
  return out;
}

WageEffects wage_effects(const HouseholdParams& p) {
  p.validate();
  fertility(p);
  const double denom = cost_denominator(p);
  const double core = preference_weight(p.delta) * (p.psi - (1.0 - p.s) * p.w_m * p.phi) /
                      (denom * denom);
  WageEffects out;
  out.dn_dwf = core;
  out.dlf_dwf = -(1.0 - p.s) * p.phi * core;
  return out;
}

void PreferenceMixture::validate() const {
  if (!(delta_L >= 0.0)) throw ValidationError("delta_L must be nonnegative");
  if (!(delta_L < delta_H)) throw ValidationError("mixture needs delta_L < delta_H");
  if (!(p_H > 0.0 && p_H < 1.0)) throw ValidationError("p_H must lie in (0, 1)");
}

MixtureEffects mixture_effects(const std::vector<PreferenceType>& types,
                               const HouseholdParams& base) {
  if (types.size() < 2) throw ValidationError("mixture needs at least 2 types");
  double weight_sum = 0.0;
  double mean_delta = 0.0;
  double het_weight = 0.0;
  for (const auto& t : types) {
    if (!(t.weight > 0.0)) throw ValidationError("mixture weights must be positive");
    if (!(t.delta >= 0.0)) throw ValidationError("mixture deltas must be nonnegative");
    weight_sum += t.weight;
    mean_delta += t.weight * t.delta;
    het_weight += t.weight * preference_weight(t.delta);
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) throw ValidationError("mixture weights must sum to 1");
  if (het_weight <= 0.0)
    throw ValidationError("mixture has no fertility response (all deltas zero)");

  // Every type must be interior for the comparative statics to apply.
  for (const auto& t : types) {
    HouseholdParams p = base;
    p.delta = t.delta;
    fertility(p);
  }
  HouseholdParams at_mean = base;
  at_mean.delta = mean_delta;
  fertility(at_mean);

  const double hom_weight = preference_weight(mean_delta);
  const double denom = cost_denominator(base);
  const double base_n = (base.w_m + base.w_f) * base.w_f * base.phi / (denom * denom);
  const double base_lf = (base.w_m + base.w_f) * base.psi * base.phi / (denom * denom);

  MixtureEffects out;
  out.fertility.heterogeneous = het_weight * base_n;
  out.fertility.homogeneous = hom_weight * base_n;
  out.fertility.bias_ratio = out.fertility.homogeneous / out.fertility.heterogeneous;
  out.labor_supply.heterogeneous = het_weight * base_lf;
  out.labor_supply.homogeneous = hom_weight * base_lf;
  out.labor_supply.bias_ratio = out.labor_supply.homogeneous / out.labor_supply.heterogeneous;
  return out;
}

MixtureEffects mixture_effects(const PreferenceMixture& mix, const HouseholdParams& base) {
  mix.validate();
  return mixture_effects(
      std::vector<PreferenceType>{{mix.delta_L, 1.0 - mix.p_H}, {mix.delta_H, mix.p_H}}, base);
}

}  // namespace affinity
