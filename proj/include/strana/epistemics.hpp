#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "strana/game.hpp"
#include "strana/witness.hpp"

namespace strana {

// Mechanisms referenced by id from payoff situations. All registered
// mechanisms must share one environment.
class MechanismRegistry {
 public:
  void add(std::string id, MechPtr mech);
  const Mechanism& get(const std::string& id) const;
  bool contains(const std::string& id) const { return mechs_.count(id) > 0; }
  const std::map<std::string, MechPtr>& all() const { return mechs_; }

 private:
  std::map<std::string, MechPtr> mechs_;
};

struct PayoffSituation {
  std::string mech_id;
  int agent = -1;
  int type_idx = -1;
  MixedProfile profile;
};

// Ordered weak inequality between two situations sharing mechanism, agent,
// and type: U[type, left] >= U[type, right].
struct PayoffComparison {
  std::string mech_id;
  int agent = -1;
  int type_idx = -1;
  MixedProfile left;
  MixedProfile right;
};

bool comparison_truth(const MechanismRegistry& registry, const PayoffComparison& c,
                      double truth_tol = kTruthTol);

struct ComparisonUniverse {
  std::vector<PayoffComparison> items;
  std::vector<bool> truth;

  void cache_truth(const MechanismRegistry& registry, double truth_tol = kTruthTol);
  // Finds a comparison by identity (same heads, profiles equal within tol).
  std::optional<int> find(const PayoffComparison& c, double tol = kProbTol) const;
};

// A claimed cross-mechanism correspondence used for closure: relabels
// actions through alpha and types through tau. Built from analogy witnesses
// in normal use; adversarial links can be supplied directly for probing.
struct ClosureLink {
  std::string x_id;
  std::string xp_id;
  std::vector<std::vector<int>> alpha;  // X action -> X' action per agent
  std::vector<TypeMap> tau;             // X'-side type -> X-side type

  static ClosureLink from_witness(std::string x_id, std::string xp_id,
                                  const AnalogyWitness& w);
};

struct ClosureResult {
  std::set<int> closed;
  // Images licensed by a link but not present in the universe.
  std::vector<PayoffComparison> out_of_universe;
};

// Least fixpoint of the transfer rule over the universe: a comparison at
// head (X, tau_i(t)) maps to the comparison at head (X', t) between the
// alpha-pushforward profiles, and symmetrically through the inverse link.
// Pushforwards act on whole mixed profiles, which realizes the mixture
// extension implicitly.
ClosureResult close_comparisons(const std::set<int>& generators,
                                const std::vector<ClosureLink>& links,
                                const ComparisonUniverse& universe,
                                const MechanismRegistry& registry);

bool is_closed_under(const std::set<int>& comparisons,
                     const std::vector<ClosureLink>& links,
                     const ComparisonUniverse& universe,
                     const MechanismRegistry& registry);

struct ValidityViolation {
  int trial = -1;
  int derived_index = -1;  // index into the universe
};

struct ValidityReport {
  int trials = 0;
  int violations = 0;
  std::optional<ValidityViolation> first;
};

// Draws `trials` random subsets of the true comparisons, closes each under
// the links, and checks that every derived comparison is true.
ValidityReport validity_probe(const std::vector<ClosureLink>& links,
                              const ComparisonUniverse& universe,
                              const MechanismRegistry& registry, int trials,
                              std::uint64_t seed);

// Awareness profile: per agent, the sorted comparison indices the agent is
// aware of.
using AwarenessProfile = std::vector<std::vector<int>>;

// Per agent, the nonempty set of awareness profiles the agent considers
// possible.
struct KnowledgeStructure {
  std::vector<std::vector<AwarenessProfile>> possible;

  void validate(int num_agents, int universe_size) const;
};

bool aware_of(const AwarenessProfile& profile, int agent, int comparison);

bool knows(const std::vector<AwarenessProfile>& knowledge_set,
           const std::function<bool(const AwarenessProfile&)>& event);

// True iff for every agent i, every profile in K_i has the comparison in
// every agent's awareness set.
bool is_common_knowledge(int comparison, const KnowledgeStructure& k);

// Emits, for every agent, every positive-probability type, and every
// deviation lottery (all pure deviations plus the declared extras), the
// comparison "sigma beats the deviation against the induced opponents".
ComparisonUniverse equilibrium_comparison_universe(
    const MechanismRegistry& registry, const std::string& mech_id, const Prior& prior,
    const StrategyProfile& sigma,
    const std::vector<std::vector<Lottery>>& extra_deviations = {},
    double tol = kDefaultTol);

struct CkFailure {
  int comparison = -1;
  int agent_i = -1;    // whose knowledge set fails
  int profile_pos = -1;  // which possible awareness profile
  int agent_j = -1;    // whose awareness set misses the comparison
};

struct CkReport {
  bool ok = false;
  ComparisonUniverse universe;
  std::vector<CkFailure> failures;
};

CkReport check_ck_equilibrium(const MechanismRegistry& registry,
                              const std::string& mech_id, const Prior& prior,
                              const StrategyProfile& sigma,
                              const KnowledgeStructure& k,
                              const std::vector<std::vector<Lottery>>& extra_deviations,
                              double tol);

}  // namespace strana
