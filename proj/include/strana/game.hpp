#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "strana/errors.hpp"

namespace strana {

// Default tolerances. Optimality gaps use kDefaultTol, probability
// normalization kProbTol, payoff-comparison truth kTruthTol. All entry
// points that care accept an explicit tolerance as well.
inline constexpr double kDefaultTol = 1e-9;
inline constexpr double kProbTol = 1e-12;
inline constexpr double kTruthTol = 1e-12;

// Mixed-radix flattening shared by action profiles and type profiles.
// Digit 0 varies slowest, so flat indices enumerate profiles in
// lexicographic order of the declared grids.
struct MixedRadix {
  std::vector<int> sizes;
  std::vector<long long> strides;
  long long total = 1;

  MixedRadix() = default;
  explicit MixedRadix(std::vector<int> s);

  long long index(std::span<const int> digits) const;
  void decode(long long idx, std::vector<int>& out) const;
  std::vector<int> decode(long long idx) const;
};

// A value-function payload for environments whose types are curves
// v(x) = theta * x^gamma rather than scalars.
struct PowerFn {
  double theta = 0.0;
  double gamma = 1.0;

  double operator()(double x) const;
};

struct TypePoint {
  std::string label;
  std::optional<double> value;  // scalar payoff payload
  std::optional<PowerFn> fn;    // curve payload
};

// Finite-support lottery over indices into some domain (outcomes or one
// agent's actions).
struct Lottery {
  std::vector<std::pair<int, double>> mass;  // sorted by index, entries may be zero

  static Lottery point(int index);
  void validate(int domain_size, double prob_tol = kProbTol) const;
  double prob(int index) const;
  bool approx_equal(const Lottery& other, double tol) const;
};

struct Environment {
  std::vector<std::string> agents;
  std::vector<std::string> outcomes;
  std::vector<std::vector<TypePoint>> type_grids;   // per agent
  // utility[agent][type][outcome]
  std::vector<std::vector<std::vector<double>>> utility;

  MixedRadix type_radix;  // built by finalize()

  void finalize();  // validates invariants, builds the type radix

  int num_agents() const { return static_cast<int>(agents.size()); }
  int agent_index(std::string_view label) const;
  int type_index(int agent, std::string_view label) const;
  int outcome_index(std::string_view label) const;
};

using EnvPtr = std::shared_ptr<const Environment>;

class Mechanism {
 public:
  EnvPtr env;
  std::string name;
  std::vector<std::vector<std::string>> action_sets;  // per agent
  std::vector<Lottery> outcome_rule;                  // indexed by flat profile

  void finalize();  // validates invariants, builds radix and payoff tensor

  int num_agents() const { return static_cast<int>(action_sets.size()); }
  int num_actions(int agent) const { return static_cast<int>(action_sets[agent].size()); }
  long long num_profiles() const { return profile_radix_.total; }
  const MixedRadix& profile_radix() const { return profile_radix_; }
  const MixedRadix& opposing_radix(int agent) const { return opposing_radix_[agent]; }

  int action_index(int agent, std::string_view label) const;

  int profile_index(std::span<const int> actions) const;
  // Inserts agent's own action into a flat opposing-profile index.
  int combine(int agent, int own_action, long long opposing_idx) const;

  // Expected payoff of a pure action profile: sum over the outcome lottery.
  double payoff(int agent, int type_idx, long long profile_idx) const {
    return payoff_[agent][type_idx][static_cast<size_t>(profile_idx)];
  }

 private:
  MixedRadix profile_radix_;
  std::vector<MixedRadix> opposing_radix_;              // per agent
  std::vector<std::vector<std::vector<double>>> payoff_;  // [agent][type][profile]
};

using MechPtr = std::shared_ptr<const Mechanism>;

// Mixed action profile: finite-support distribution over flat profile indices.
struct MixedProfile {
  std::vector<std::pair<long long, double>> mass;  // sorted by index

  static MixedProfile pure(long long profile_idx);
  void validate(long long num_profiles, double prob_tol = kProbTol) const;
  bool approx_equal(const MixedProfile& other, double tol) const;
};

// Distribution over opposing action profiles (flat indices in the
// opposing radix of some agent).
struct OpponentDist {
  int agent = -1;
  std::vector<std::pair<long long, double>> mass;
};

// sigma[agent][type] = lottery over that agent's actions.
struct StrategyProfile {
  std::vector<std::vector<Lottery>> act;

  void validate(const Mechanism& mech, double prob_tol = kProbTol) const;
};

struct Prior {
  std::vector<std::pair<long long, double>> pmf;  // flat type-profile index
  // Optional product shortcut; must reproduce pmf exactly when present.
  std::optional<std::vector<std::vector<double>>> ipv_marginals;

  void validate(const Environment& env, double prob_tol = kProbTol) const;
  double marginal(const Environment& env, int agent, int type_idx) const;

  static Prior from_marginals(const Environment& env,
                              std::vector<std::vector<double>> marginals);
};

// ---------------------------------------------------------------------------
// Operations

double expected_utility(const Mechanism& mech, int agent, int type_idx,
                        const MixedProfile& profile);

MixedProfile product_profile(const Mechanism& mech, int agent, const Lottery& own,
                             const OpponentDist& opposing);

OpponentDist opponent_distribution(const Mechanism& mech, const Prior& prior,
                                   const StrategyProfile& sigma, int agent,
                                   int type_idx);

struct BneViolation {
  int agent = -1;
  int type_idx = -1;
  int best_action = -1;
  double gap = 0.0;
};

struct BneReport {
  bool ok = false;
  double worst_gap = 0.0;
  std::vector<BneViolation> violations;
  std::vector<std::pair<int, int>> skipped_types;  // zero-marginal (agent, type)
};

BneReport check_bne(const Mechanism& mech, const Prior& prior,
                    const StrategyProfile& sigma, double tol);

// Exhaustive enumeration of pure strategy profiles over positive-marginal
// types; zero-marginal types are pinned to the first action so results are
// deterministic. Throws BudgetError when the profile count exceeds `cap`.
std::vector<StrategyProfile> find_pure_bne(const Mechanism& mech, const Prior& prior,
                                           double tol, double cap = 1e7,
                                           int jobs = 0);

// Map type index -> action index, tol-optimal against every pure opposing
// profile; ties break toward the earliest action in grid order.
std::optional<std::vector<int>> dominant_strategy(const Mechanism& mech, int agent,
                                                  double tol);

bool has_dominant_strategies(const Mechanism& mech, double tol);

// Checks that `actions[t]` is tol-optimal against every pure opposing profile
// for each type index in `types` (all grid types when `types` is empty).
bool is_dominant_for(const Mechanism& mech, int agent,
                     std::span<const int> actions, double tol,
                     std::span<const int> types = {});

}  // namespace strana
