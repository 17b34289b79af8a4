#include "strana/epistemics.hpp"

#include <algorithm>
#include <deque>
#include <random>

namespace strana {

void MechanismRegistry::add(std::string id, MechPtr mech) {
  if (!mech) throw InvalidInputError("cannot register a null mechanism");
  if (!mechs_.empty() && mechs_.begin()->second->env.get() != mech->env.get()) {
    throw InvalidInputError("registered mechanisms must share one environment");
  }
  if (mechs_.count(id)) throw InvalidInputError("duplicate mechanism id '" + id + "'");
  mechs_.emplace(std::move(id), std::move(mech));
}

const Mechanism& MechanismRegistry::get(const std::string& id) const {
  auto it = mechs_.find(id);
  if (it == mechs_.end()) throw InvalidInputError("unknown mechanism id '" + id + "'");
  return *it->second;
}

bool comparison_truth(const MechanismRegistry& registry, const PayoffComparison& c,
                      double truth_tol) {
  const Mechanism& mech = registry.get(c.mech_id);
  double lhs = expected_utility(mech, c.agent, c.type_idx, c.left);
  double rhs = expected_utility(mech, c.agent, c.type_idx, c.right);
  return lhs >= rhs - truth_tol;
}

void ComparisonUniverse::cache_truth(const MechanismRegistry& registry,
                                     double truth_tol) {
  truth.resize(items.size());
  for (size_t i = 0; i < items.size(); ++i) {
    truth[i] = comparison_truth(registry, items[i], truth_tol);
  }
}

std::optional<int> ComparisonUniverse::find(const PayoffComparison& c,
                                            double tol) const {
  for (size_t i = 0; i < items.size(); ++i) {
    const PayoffComparison& o = items[i];
    if (o.mech_id == c.mech_id && o.agent == c.agent && o.type_idx == c.type_idx &&
        o.left.approx_equal(c.left, tol) && o.right.approx_equal(c.right, tol)) {
      return static_cast<int>(i);
    }
  }
  return std::nullopt;
}

ClosureLink ClosureLink::from_witness(std::string x_id, std::string xp_id,
                                      const AnalogyWitness& w) {
  return ClosureLink{std::move(x_id), std::move(xp_id), w.alpha, w.tau};
}

namespace {

std::vector<std::vector<int>> invert_alpha(const std::vector<std::vector<int>>& alpha,
                                           const Mechanism& xp) {
  std::vector<std::vector<int>> inv(alpha.size());
  for (size_t i = 0; i < alpha.size(); ++i) {
    inv[i].assign(xp.num_actions(static_cast<int>(i)), -1);
    for (size_t a = 0; a < alpha[i].size(); ++a) inv[i][alpha[i][a]] = static_cast<int>(a);
  }
  return inv;
}

}  // namespace

ClosureResult close_comparisons(const std::set<int>& generators,
                                const std::vector<ClosureLink>& links,
                                const ComparisonUniverse& universe,
                                const MechanismRegistry& registry) {
  ClosureResult result;
  std::deque<int> worklist;
  for (int g : generators) {
    if (g < 0 || g >= static_cast<int>(universe.items.size())) {
      throw InvalidInputError("generator index out of range");
    }
    if (result.closed.insert(g).second) worklist.push_back(g);
  }

  auto emit = [&](PayoffComparison image) {
    if (auto idx = universe.find(image)) {
      if (result.closed.insert(*idx).second) worklist.push_back(*idx);
    } else {
      result.out_of_universe.push_back(std::move(image));
    }
  };

  while (!worklist.empty()) {
    const PayoffComparison c = universe.items[worklist.front()];
    worklist.pop_front();
    for (const ClosureLink& link : links) {
      const Mechanism& x = registry.get(link.x_id);
      const Mechanism& xp = registry.get(link.xp_id);
      if (c.mech_id == link.x_id) {
        // Forward: head (X, tau(t)) to head (X', t).
        if (auto d = link.tau[c.agent].preimage(c.type_idx)) {
          emit(PayoffComparison{link.xp_id, c.agent, *d,
                                push_profile(x, xp, link.alpha, c.left),
                                push_profile(x, xp, link.alpha, c.right)});
        }
      }
      if (c.mech_id == link.xp_id) {
        // Inverse: head (X', t) back to head (X, tau(t)).
        if (auto s = link.tau[c.agent].image(c.type_idx)) {
          auto inv = invert_alpha(link.alpha, xp);
          emit(PayoffComparison{link.x_id, c.agent, *s,
                                push_profile(xp, x, inv, c.left),
                                push_profile(xp, x, inv, c.right)});
        }
      }
    }
  }
  return result;
}

bool is_closed_under(const std::set<int>& comparisons,
                     const std::vector<ClosureLink>& links,
                     const ComparisonUniverse& universe,
                     const MechanismRegistry& registry) {
  return close_comparisons(comparisons, links, universe, registry).closed == comparisons;
}

ValidityReport validity_probe(const std::vector<ClosureLink>& links,
                              const ComparisonUniverse& universe,
                              const MechanismRegistry& registry, int trials,
                              std::uint64_t seed) {
  if (universe.truth.size() != universe.items.size()) {
    throw InvalidInputError("universe truth cache is not populated");
  }
  std::vector<int> true_indices;
  for (size_t i = 0; i < universe.items.size(); ++i) {
    if (universe.truth[i]) true_indices.push_back(static_cast<int>(i));
  }

  ValidityReport report;
  report.trials = trials;
  std::mt19937_64 rng(seed);
  for (int trial = 0; trial < trials; ++trial) {
    std::set<int> generators;
    for (int idx : true_indices) {
      if (rng() & 1) generators.insert(idx);
    }
    ClosureResult closure = close_comparisons(generators, links, universe, registry);
    for (int idx : closure.closed) {
      if (!universe.truth[idx]) {
        ++report.violations;
        if (!report.first) report.first = ValidityViolation{trial, idx};
        break;
      }
    }
  }
  return report;
}

void KnowledgeStructure::validate(int num_agents, int universe_size) const {
  if (static_cast<int>(possible.size()) != num_agents) {
    throw InvalidInputError("knowledge structure agent count mismatch");
  }
  for (const auto& set : possible) {
    if (set.empty()) throw InvalidInputError("knowledge sets must be nonempty");
    for (const AwarenessProfile& omega : set) {
      if (static_cast<int>(omega.size()) != num_agents) {
        throw InvalidInputError("awareness profile agent count mismatch");
      }
      for (const auto& indices : omega) {
        for (int idx : indices) {
          if (idx < 0 || idx >= universe_size) {
            throw InvalidInputError("awareness index out of range");
          }
        }
      }
    }
  }
}

bool aware_of(const AwarenessProfile& profile, int agent, int comparison) {
  const auto& v = profile[agent];
  return std::binary_search(v.begin(), v.end(), comparison);
}

bool knows(const std::vector<AwarenessProfile>& knowledge_set,
           const std::function<bool(const AwarenessProfile&)>& event) {
  if (knowledge_set.empty()) {
    throw InvalidInputError("knowledge sets must be nonempty");
  }
  return std::all_of(knowledge_set.begin(), knowledge_set.end(), event);
}

bool is_common_knowledge(int comparison, const KnowledgeStructure& k) {
  for (const auto& set : k.possible) {
    for (const AwarenessProfile& omega : set) {
      for (size_t j = 0; j < omega.size(); ++j) {
        if (!aware_of(omega, static_cast<int>(j), comparison)) return false;
      }
    }
  }
  return true;
}

ComparisonUniverse equilibrium_comparison_universe(
    const MechanismRegistry& registry, const std::string& mech_id, const Prior& prior,
    const StrategyProfile& sigma,
    const std::vector<std::vector<Lottery>>& extra_deviations, double tol) {
  const Mechanism& mech = registry.get(mech_id);
  BneReport bne = check_bne(mech, prior, sigma, tol);
  if (!bne.ok) {
    throw InvalidInputError("strategy profile is not an equilibrium at tol " +
                            std::to_string(tol));
  }

  ComparisonUniverse universe;
  for (int j = 0; j < mech.num_agents(); ++j) {
    std::vector<Lottery> deviations;
    for (int a = 0; a < mech.num_actions(j); ++a) deviations.push_back(Lottery::point(a));
    if (j < static_cast<int>(extra_deviations.size())) {
      for (const Lottery& l : extra_deviations[j]) deviations.push_back(l);
    }
    for (int t = 0; t < static_cast<int>(mech.env->type_grids[j].size()); ++t) {
      if (prior.marginal(*mech.env, j, t) <= 0.0) continue;
      OpponentDist opp = opponent_distribution(mech, prior, sigma, j, t);
      MixedProfile on_path = product_profile(mech, j, sigma.act[j][t], opp);
      for (const Lottery& dev : deviations) {
        universe.items.push_back(PayoffComparison{
            mech_id, j, t, on_path, product_profile(mech, j, dev, opp)});
      }
    }
  }
  universe.cache_truth(registry);
  return universe;
}

CkReport check_ck_equilibrium(const MechanismRegistry& registry,
                              const std::string& mech_id, const Prior& prior,
                              const StrategyProfile& sigma,
                              const KnowledgeStructure& k,
                              const std::vector<std::vector<Lottery>>& extra_deviations,
                              double tol) {
  CkReport report;
  report.universe =
      equilibrium_comparison_universe(registry, mech_id, prior, sigma,
                                      extra_deviations, tol);
  const Mechanism& mech = registry.get(mech_id);
  k.validate(mech.num_agents(), static_cast<int>(report.universe.items.size()));

  for (int c = 0; c < static_cast<int>(report.universe.items.size()); ++c) {
    for (int i = 0; i < mech.num_agents(); ++i) {
      for (size_t pos = 0; pos < k.possible[i].size(); ++pos) {
        const AwarenessProfile& omega = k.possible[i][pos];
        for (int j = 0; j < mech.num_agents(); ++j) {
          if (!aware_of(omega, j, c)) {
            report.failures.push_back({c, i, static_cast<int>(pos), j});
          }
        }
      }
    }
  }
  report.ok = report.failures.empty();
  return report;
}

}  // namespace strana
