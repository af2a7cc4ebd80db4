#pragma once

#include <vector>

namespace affinity {

// Static household problem: choose consumption c and children n to maximize
// log(c) + delta*log(n) subject to c + psi*n = w_m + w_f*(1 - (1-s)*phi*n).
// Interior solutions only: an implied female labor supply outside [0, 1]
// raises InfeasibleLabor rather than being clipped.
struct HouseholdParams {
  double delta = 0.0;  // child-preference weight, >= 0
  double w_m = 1.0;    // male wage, > 0
  double w_f = 1.0;    // female wage, > 0
  double psi = 1.0;    // monetary cost per child, > 0
  double phi = 0.0;    // time cost per child, > 0
  double s = 0.0;      // childcare provision, in [0, 1)

  void validate() const;
};

double fertility(const HouseholdParams& p);
double labor_supply(const HouseholdParams& p);
double consumption(const HouseholdParams& p);

struct ChildcareEffects {
  double dn_ds = 0.0;
  double dlf_ds = 0.0;
};

ChildcareEffects childcare_effects(const HouseholdParams& p);

struct WageEffects {
  double dn_dwf = 0.0;
  double dlf_dwf = 0.0;
};

WageEffects wage_effects(const HouseholdParams& p);

// Two preference types with delta_L < delta_H; p_H is the high-type share.
struct PreferenceMixture {
  double delta_L = 0.0;
  double delta_H = 1.0;
  double p_H = 0.5;

  void validate() const;
  double mean_delta() const { return (1.0 - p_H) * delta_L + p_H * delta_H; }
};

// General K-type mixture; weights must be positive and sum to one.
struct PreferenceType {
  double delta;
  double weight;
};

struct MixtureComparison {
  double heterogeneous = 0.0;  // mixture-weighted policy effect
  double homogeneous = 0.0;    // effect at the mean preference
  double bias_ratio = 0.0;     // homogeneous / heterogeneous, > 1 strictly
};

struct MixtureEffects {
  MixtureComparison fertility;      // for dn/ds
  MixtureComparison labor_supply;   // for dlf/ds
};

// Compares the mixture-averaged childcare effects against the effects of a
// homogeneous economy at the mean preference. The concavity of
// delta/(1+delta) makes the homogeneous effect strictly larger whenever the
// types differ. `base.delta` is ignored.
MixtureEffects mixture_effects(const PreferenceMixture& mix, const HouseholdParams& base);
MixtureEffects mixture_effects(const std::vector<PreferenceType>& types,
                               const HouseholdParams& base);

}  // namespace affinity
