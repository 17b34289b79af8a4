#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "strana/game.hpp"
#include "strana/witness.hpp"

namespace strana {

// Closed-form price scheme from a small registry so regularity can be
// checked symbolically: power means scale * x^exponent, poly means
// sum_j coeffs[j] * x^(j+1) (no constant term, so P(0) = 0 by shape).
struct Tariff {
  enum class Kind { kPower, kPoly };
  Kind kind = Kind::kPower;
  double scale = 1.0;
  double exponent = 2.0;
  std::vector<double> coeffs;

  double operator()(double x) const;
  // Continuous, strictly increasing, strictly convex, zero at zero.
  void check_regular() const;
  std::string describe() const;

  static Tariff power(double scale, double exponent);
  static Tariff poly(std::vector<double> coeffs);
};

struct FamilySpec {
  std::string family;  // posted_price, fpa, dutch, kpa, kec, one_half_price,
                       // all_pay_translated, scoring_linear, scoring_ratio,
                       // input_pricing, output_pricing
  int n_agents = 2;
  int k = 1;
  double reserve = 0.0;
  double entry_cost = 0.0;
  double price = 0.0;  // posted price
  double bbar = 0.0;   // clock ceiling
  double rate = 1.0;   // clock speed
  double shift = 0.0;  // all-pay translation
  double weight = 0.5; // score weight on price
  std::vector<double> quality;
  double efficacy = 1.0;
  double gamma = 0.5;  // curve power for pricing type grids
  Tariff tariff;
  std::vector<double> bids;                    // shared action grid
  std::vector<std::vector<double>> bids_each;  // per-agent action grids
  std::vector<double> types;                   // scalar type values
  std::vector<double> thetas;                  // curve type scales
  std::string tie = "uniform";                 // or "first"

  void validate() const;
};

// How the utility table is generated from structured outcomes.
enum class UtilityFamily {
  kValueAuction,  // u_i = value * [winner == i] - payment_i
  kProcurement,   // u_i = (payment_i - cost) * [winner == i]
  kPricing,       // u_i = v(quantity_i) - payment_i
};

struct StructOutcome {
  std::optional<int> winner;
  std::vector<double> payments;
  std::vector<double> quantities;

  std::string label() const;
};

// Structural mechanism description, finalized against an environment once
// all mechanisms sharing that environment are known.
struct MechDraft {
  std::string name;
  std::vector<std::vector<std::string>> action_sets;
  std::vector<std::vector<std::pair<StructOutcome, double>>> rule;  // per profile
};

struct Assembled {
  EnvPtr env;
  std::vector<MechPtr> mechs;
};

// Interns the union of the drafts' outcomes, fills the utility table from
// the family rule, and finalizes every mechanism against the shared
// environment. Agents default to "1".."n".
Assembled assemble(std::vector<std::vector<TypePoint>> type_grids, UtilityFamily family,
                   std::vector<MechDraft> drafts);
Assembled assemble(std::vector<std::string> agents,
                   std::vector<std::vector<TypePoint>> type_grids, UtilityFamily family,
                   std::vector<MechDraft> drafts);

TypePoint scalar_type(double value);
TypePoint curve_type(double theta, double gamma);
std::vector<TypePoint> scalar_grid(const std::vector<double>& values);
std::vector<TypePoint> curve_grid(const std::vector<double>& thetas, double gamma);

// Generates the action sets and outcome rule for one family instance.
MechDraft draft_mechanism(const FamilySpec& spec);

UtilityFamily utility_family_for(const std::string& family);

// Standalone constructor: fresh single-mechanism environment from the
// spec's own type grid.
std::pair<EnvPtr, MechPtr> make_mechanism(const FamilySpec& spec);

// Reads the numeric payload off a generated action label ("out", "buy" and
// "pass" carry none).
std::optional<double> action_value(const Mechanism& mech, int agent, int action);

// ---------------------------------------------------------------------------
// Canonical witnesses. Each builder matches grid points by value and fails
// with GridError when the grids do not support the construction; nothing is
// snapped.

AnalogyWitness witness_posted_price(const Mechanism& x, const Mechanism& xp,
                                    double p, double pp);
EquivalenceWitness witness_fpa_dutch(const Mechanism& fpa, const Mechanism& dutch,
                                     double bbar, double rate);
AnalogyWitness witness_kpa(const Mechanism& x, const Mechanism& xp, double r,
                           double rp);
AnalogyWitness witness_kec(const Mechanism& x, const Mechanism& xp, double c,
                           double cp);
AnalogyWitness witness_all_pay_translation(const Mechanism& x, const Mechanism& xp,
                                           double shift_x, double shift_xp);
AnalogyWitness witness_scoring_linear(const Mechanism& x, const Mechanism& xp,
                                      double weight_x, double weight_xp,
                                      const std::vector<double>& quality);
AnalogyWitness witness_input_pricing(const Mechanism& x, const Mechanism& xp,
                                     double e, double ep);
AnalogyWitness witness_output_isoelastic(const Mechanism& x, const Mechanism& xp,
                                         double e, double ep, double rho);

// ---------------------------------------------------------------------------
// Paired instances: shared environment, both mechanisms, and the canonical
// witness, with grids derived so the construction is exact by construction.

struct FamilyPair {
  EnvPtr env;
  MechPtr x, xp;
  AnalogyWitness witness;
  std::string provenance;
};

struct EquivalencePair {
  EnvPtr env;
  MechPtr x, xp;
  EquivalenceWitness witness;
  std::string provenance;
};

EquivalencePair fpa_dutch_pair(double bbar, double rate, int n,
                               const std::vector<double>& bids,
                               const std::vector<double>& types);

// xp-side grids are given; x-side grids are derived through the canonical
// maps, and the environment holds the union.
FamilyPair posted_price_pair(double p, double pp, const std::vector<double>& xp_types);
FamilyPair kpa_pair(int k, double r, double rp, int n, const std::vector<double>& x_bids,
                    const std::vector<double>& xp_types);
FamilyPair kec_pair(int k, double c, double cp, int n, const std::vector<double>& x_bids,
                    const std::vector<double>& xp_types);
FamilyPair all_pay_pair(int n, const std::vector<double>& base_bids, double shift_x,
                        double shift_xp, const std::vector<double>& xp_types);
FamilyPair scoring_linear_pair(double weight_x, double weight_xp,
                               const std::vector<double>& quality,
                               const std::vector<std::vector<double>>& x_bids,
                               const std::vector<std::vector<double>>& xp_costs);
FamilyPair input_pricing_pair(double e, double ep, const Tariff& tariff, double gamma,
                              int n, const std::vector<double>& actions,
                              const std::vector<double>& xp_thetas);
FamilyPair output_pricing_pair(double e, double ep, double scale, double rho,
                               double gamma, int n,
                               const std::vector<double>& x_actions,
                               const std::vector<double>& xp_thetas);

// ---------------------------------------------------------------------------
// Reserve-price solver for a one-dimensional prior sampled on a grid.

struct GridPrior {
  std::vector<double> v;
  std::vector<double> pdf;
  std::vector<double> cdf;
};

// Smallest grid point where the virtual value v - (1 - F(v)) / f(v) crosses
// zero, refined by linear interpolation. Requires the virtual value to be
// weakly increasing on the sampled support.
double optimal_reserve(const GridPrior& prior);

// One-line description per family, shown by the catalog command.
std::vector<std::pair<std::string, std::string>> catalog_families();

}  // namespace strana
