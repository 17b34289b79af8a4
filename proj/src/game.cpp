#include "strana/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

namespace strana {

namespace {

std::string joined(std::span<const int> digits) {
  std::string out;
  for (size_t k = 0; k < digits.size(); ++k) {
    if (k) out += ",";
    out += std::to_string(digits[k]);
  }
  return out;
}

}  // namespace

MixedRadix::MixedRadix(std::vector<int> s) : sizes(std::move(s)) {
  strides.assign(sizes.size(), 1);
  for (int i = static_cast<int>(sizes.size()) - 2; i >= 0; --i) {
    strides[i] = strides[i + 1] * sizes[i + 1];
  }
  total = sizes.empty() ? 1 : strides.front() * sizes.front();
}

long long MixedRadix::index(std::span<const int> digits) const {
  if (digits.size() != sizes.size()) {
    throw InvalidInputError("profile arity mismatch: got " +
                            std::to_string(digits.size()) + ", want " +
                            std::to_string(sizes.size()));
  }
  long long idx = 0;
  for (size_t i = 0; i < digits.size(); ++i) {
    if (digits[i] < 0 || digits[i] >= sizes[i]) {
      throw InvalidInputError("digit out of range in profile [" + joined(digits) + "]");
    }
    idx += strides[i] * digits[i];
  }
  return idx;
}

void MixedRadix::decode(long long idx, std::vector<int>& out) const {
  out.resize(sizes.size());
  for (size_t i = 0; i < sizes.size(); ++i) {
    out[i] = static_cast<int>(idx / strides[i]);
    idx %= strides[i];
  }
}

std::vector<int> MixedRadix::decode(long long idx) const {
  std::vector<int> out;
  decode(idx, out);
  return out;
}

double PowerFn::operator()(double x) const { return theta * std::pow(x, gamma); }

Lottery Lottery::point(int index) { return Lottery{{{index, 1.0}}}; }

void Lottery::validate(int domain_size, double prob_tol) const {
  double sum = 0.0;
  int prev = -1;
  for (const auto& [idx, p] : mass) {
    if (idx < 0 || idx >= domain_size) {
      throw InvalidInputError("lottery index " + std::to_string(idx) + " out of range");
    }
    if (idx <= prev) throw InvalidInputError("lottery support not sorted/unique");
    prev = idx;
    if (p < -prob_tol) throw InvalidInputError("negative lottery probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > prob_tol) {
    throw InvalidInputError("lottery mass sums to " + std::to_string(sum));
  }
}

double Lottery::prob(int index) const {
  for (const auto& [idx, p] : mass) {
    if (idx == index) return p;
  }
  return 0.0;
}

bool Lottery::approx_equal(const Lottery& other, double tol) const {
  auto weight = [](const Lottery& l, int idx) { return l.prob(idx); };
  for (const auto& [idx, p] : mass) {
    if (std::abs(p - weight(other, idx)) > tol) return false;
  }
  for (const auto& [idx, p] : other.mass) {
    if (std::abs(p - prob(idx)) > tol) return false;
  }
  return true;
}

void Environment::finalize() {
  if (agents.empty()) throw InvalidInputError("environment has no agents");
  for (size_t i = 0; i < agents.size(); ++i) {
    for (size_t j = i + 1; j < agents.size(); ++j) {
      if (agents[i] == agents[j]) {
        throw InvalidInputError("duplicate agent id '" + agents[i] + "'");
      }
    }
  }
  if (type_grids.size() != agents.size()) {
    throw InvalidInputError("type grid count does not match agent count");
  }
  if (utility.size() != agents.size()) {
    throw InvalidInputError("utility table missing agent rows");
  }
  std::vector<int> sizes;
  for (size_t i = 0; i < agents.size(); ++i) {
    if (type_grids[i].empty()) {
      throw InvalidInputError("agent '" + agents[i] + "' has an empty type grid");
    }
    sizes.push_back(static_cast<int>(type_grids[i].size()));
    if (utility[i].size() != type_grids[i].size()) {
      throw InvalidInputError("utility table missing type rows for agent '" + agents[i] + "'");
    }
    for (const auto& row : utility[i]) {
      if (row.size() != outcomes.size()) {
        throw InvalidInputError("utility row size does not match outcome count");
      }
    }
  }
  type_radix = MixedRadix(std::move(sizes));
}

int Environment::agent_index(std::string_view label) const {
  for (size_t i = 0; i < agents.size(); ++i) {
    if (agents[i] == label) return static_cast<int>(i);
  }
  throw InvalidInputError("unknown agent '" + std::string(label) + "'");
}

int Environment::type_index(int agent, std::string_view label) const {
  const auto& grid = type_grids.at(agent);
  for (size_t i = 0; i < grid.size(); ++i) {
    if (grid[i].label == label) return static_cast<int>(i);
  }
  throw InvalidInputError("unknown type '" + std::string(label) + "' for agent '" +
                          agents[agent] + "'");
}

int Environment::outcome_index(std::string_view label) const {
  for (size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i] == label) return static_cast<int>(i);
  }
  throw InvalidInputError("unknown outcome '" + std::string(label) + "'");
}

void Mechanism::finalize() {
  if (!env) throw InvalidInputError("mechanism has no environment");
  if (action_sets.size() != env->agents.size()) {
    throw InvalidInputError("action set count does not match agent count");
  }
  std::vector<int> sizes;
  for (size_t i = 0; i < action_sets.size(); ++i) {
    if (action_sets[i].empty()) {
      throw InvalidInputError("agent '" + env->agents[i] + "' has an empty action set");
    }
    sizes.push_back(static_cast<int>(action_sets[i].size()));
  }
  profile_radix_ = MixedRadix(sizes);
  if (profile_radix_.total > (1LL << 30)) {
    throw InvalidInputError("profile space too large to tabulate");
  }
  if (static_cast<long long>(outcome_rule.size()) != profile_radix_.total) {
    throw InvalidInputError("outcome rule is not total: " +
                            std::to_string(outcome_rule.size()) + " entries for " +
                            std::to_string(profile_radix_.total) + " profiles");
  }
  for (const auto& lot : outcome_rule) {
    lot.validate(static_cast<int>(env->outcomes.size()));
  }

  opposing_radix_.clear();
  for (size_t i = 0; i < action_sets.size(); ++i) {
    std::vector<int> opp_sizes;
    for (size_t j = 0; j < action_sets.size(); ++j) {
      if (j != i) opp_sizes.push_back(sizes[j]);
    }
    opposing_radix_.emplace_back(opp_sizes);
  }

  payoff_.assign(num_agents(), {});
  for (int i = 0; i < num_agents(); ++i) {
    const auto& grid = env->type_grids[i];
    payoff_[i].assign(grid.size(), std::vector<double>(profile_radix_.total, 0.0));
    for (size_t t = 0; t < grid.size(); ++t) {
      for (long long p = 0; p < profile_radix_.total; ++p) {
        double u = 0.0;
        for (const auto& [y, q] : outcome_rule[p].mass) {
          u += q * env->utility[i][t][y];
        }
        payoff_[i][t][p] = u;
      }
    }
  }
}

int Mechanism::action_index(int agent, std::string_view label) const {
  const auto& set = action_sets.at(agent);
  for (size_t i = 0; i < set.size(); ++i) {
    if (set[i] == label) return static_cast<int>(i);
  }
  throw InvalidInputError("unknown action '" + std::string(label) + "' for agent '" +
                          env->agents[agent] + "'");
}

int Mechanism::profile_index(std::span<const int> actions) const {
  return static_cast<int>(profile_radix_.index(actions));
}

int Mechanism::combine(int agent, int own_action, long long opposing_idx) const {
  const MixedRadix& opp = opposing_radix_[agent];
  long long idx = 0;
  size_t k = 0;
  for (int j = 0; j < num_agents(); ++j) {
    if (j == agent) {
      idx += profile_radix_.strides[j] * own_action;
    } else {
      int digit = static_cast<int>(opposing_idx / opp.strides[k] % opp.sizes[k]);
      idx += profile_radix_.strides[j] * digit;
      ++k;
    }
  }
  return static_cast<int>(idx);
}

MixedProfile MixedProfile::pure(long long profile_idx) {
  return MixedProfile{{{profile_idx, 1.0}}};
}

void MixedProfile::validate(long long num_profiles, double prob_tol) const {
  double sum = 0.0;
  long long prev = -1;
  for (const auto& [idx, p] : mass) {
    if (idx < 0 || idx >= num_profiles) {
      throw InvalidInputError("mixed profile support out of range");
    }
    if (idx <= prev) throw InvalidInputError("mixed profile support not sorted/unique");
    prev = idx;
    if (p < -prob_tol) throw InvalidInputError("negative mixed profile probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > prob_tol) {
    throw InvalidInputError("mixed profile mass sums to " + std::to_string(sum));
  }
}

bool MixedProfile::approx_equal(const MixedProfile& other, double tol) const {
  auto find = [](const MixedProfile& m, long long idx) {
    for (const auto& [i, p] : m.mass) {
      if (i == idx) return p;
    }
    return 0.0;
  };
  for (const auto& [idx, p] : mass) {
    if (std::abs(p - find(other, idx)) > tol) return false;
  }
  for (const auto& [idx, p] : other.mass) {
    if (std::abs(p - find(*this, idx)) > tol) return false;
  }
  return true;
}

void StrategyProfile::validate(const Mechanism& mech, double prob_tol) const {
  if (static_cast<int>(act.size()) != mech.num_agents()) {
    throw InvalidInputError("strategy profile agent count mismatch");
  }
  for (int i = 0; i < mech.num_agents(); ++i) {
    if (act[i].size() != mech.env->type_grids[i].size()) {
      throw InvalidInputError("strategy for agent '" + mech.env->agents[i] +
                              "' is not total over the type grid");
    }
    for (const auto& lot : act[i]) lot.validate(mech.num_actions(i), prob_tol);
  }
}

void Prior::validate(const Environment& env, double prob_tol) const {
  double sum = 0.0;
  long long prev = -1;
  for (const auto& [idx, p] : pmf) {
    if (idx < 0 || idx >= env.type_radix.total) {
      throw InvalidInputError("prior support out of range");
    }
    if (idx <= prev) throw InvalidInputError("prior support not sorted/unique");
    prev = idx;
    if (p < -prob_tol) throw InvalidInputError("negative prior probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > prob_tol) {
    throw InvalidInputError("prior mass sums to " + std::to_string(sum));
  }
  if (ipv_marginals) {
    const auto& marg = *ipv_marginals;
    if (marg.size() != env.agents.size()) {
      throw InvalidInputError("ipv marginals agent count mismatch");
    }
    Prior rebuilt = Prior::from_marginals(env, marg);
    auto find = [](const Prior& f, long long idx) {
      for (const auto& [i, p] : f.pmf) {
        if (i == idx) return p;
      }
      return 0.0;
    };
    for (long long idx = 0; idx < env.type_radix.total; ++idx) {
      if (std::abs(find(*this, idx) - find(rebuilt, idx)) > prob_tol) {
        throw InvalidInputError("ipv marginals do not reproduce the stored pmf");
      }
    }
  }
}

double Prior::marginal(const Environment& env, int agent, int type_idx) const {
  double m = 0.0;
  for (const auto& [idx, p] : pmf) {
    long long digit = idx / env.type_radix.strides[agent] % env.type_radix.sizes[agent];
    if (digit == type_idx) m += p;
  }
  return m;
}

Prior Prior::from_marginals(const Environment& env,
                            std::vector<std::vector<double>> marginals) {
  Prior f;
  std::vector<int> digits;
  for (long long idx = 0; idx < env.type_radix.total; ++idx) {
    env.type_radix.decode(idx, digits);
    double p = 1.0;
    for (size_t i = 0; i < digits.size(); ++i) p *= marginals.at(i).at(digits[i]);
    if (p > 0.0) f.pmf.emplace_back(idx, p);
  }
  f.ipv_marginals = std::move(marginals);
  return f;
}

double expected_utility(const Mechanism& mech, int agent, int type_idx,
                        const MixedProfile& profile) {
  if (agent < 0 || agent >= mech.num_agents()) {
    throw InvalidInputError("agent index out of range");
  }
  if (type_idx < 0 ||
      type_idx >= static_cast<int>(mech.env->type_grids[agent].size())) {
    throw InvalidInputError("type index out of range");
  }
  profile.validate(mech.num_profiles());
  double u = 0.0;
  for (const auto& [idx, p] : profile.mass) u += p * mech.payoff(agent, type_idx, idx);
  return u;
}

MixedProfile product_profile(const Mechanism& mech, int agent, const Lottery& own,
                             const OpponentDist& opposing) {
  own.validate(mech.num_actions(agent));
  std::map<long long, double> acc;
  for (const auto& [a, pa] : own.mass) {
    if (pa == 0.0) continue;
    for (const auto& [o, po] : opposing.mass) {
      if (po == 0.0) continue;
      acc[mech.combine(agent, a, o)] += pa * po;
    }
  }
  MixedProfile out;
  out.mass.assign(acc.begin(), acc.end());
  return out;
}

OpponentDist opponent_distribution(const Mechanism& mech, const Prior& prior,
                                   const StrategyProfile& sigma, int agent,
                                   int type_idx) {
  const Environment& env = *mech.env;
  double marg = prior.marginal(env, agent, type_idx);
  if (marg <= 0.0) {
    throw ConditioningError("conditioning on zero-probability type '" +
                            env.type_grids[agent][type_idx].label + "' of agent '" +
                            env.agents[agent] + "'");
  }

  std::map<long long, double> acc;
  const MixedRadix& opp = mech.opposing_radix(agent);
  std::vector<int> tdigits;
  std::vector<int> opp_agents;
  for (int j = 0; j < mech.num_agents(); ++j) {
    if (j != agent) opp_agents.push_back(j);
  }

  for (const auto& [tp, mass] : prior.pmf) {
    if (mass <= 0.0) continue;
    env.type_radix.decode(tp, tdigits);
    if (tdigits[agent] != type_idx) continue;
    double cond = mass / marg;

    // Push the opposing type profile through sigma with independent
    // randomization across opponents.
    std::vector<std::pair<long long, double>> partial{{0, cond}};
    for (size_t k = 0; k < opp_agents.size(); ++k) {
      int j = opp_agents[k];
      const Lottery& lot = sigma.act[j][tdigits[j]];
      std::vector<std::pair<long long, double>> next;
      for (const auto& [base, pb] : partial) {
        for (const auto& [a, pa] : lot.mass) {
          if (pa == 0.0) continue;
          next.emplace_back(base + opp.strides[k] * a, pb * pa);
        }
      }
      partial = std::move(next);
    }
    for (const auto& [idx, p] : partial) acc[idx] += p;
  }

  OpponentDist out;
  out.agent = agent;
  out.mass.assign(acc.begin(), acc.end());
  return out;
}

namespace {

// Expected payoff of playing pure action `a` against an opposing distribution.
double eu_against(const Mechanism& mech, int agent, int type_idx, int action,
                  const OpponentDist& opp) {
  double u = 0.0;
  for (const auto& [o, po] : opp.mass) {
    u += po * mech.payoff(agent, type_idx, mech.combine(agent, action, o));
  }
  return u;
}

}  // namespace

BneReport check_bne(const Mechanism& mech, const Prior& prior,
                    const StrategyProfile& sigma, double tol) {
  sigma.validate(mech);
  prior.validate(*mech.env);
  BneReport report;
  report.ok = true;
  for (int i = 0; i < mech.num_agents(); ++i) {
    for (int t = 0; t < static_cast<int>(mech.env->type_grids[i].size()); ++t) {
      if (prior.marginal(*mech.env, i, t) <= 0.0) {
        report.skipped_types.emplace_back(i, t);
        continue;
      }
      OpponentDist opp = opponent_distribution(mech, prior, sigma, i, t);
      double u_sigma = 0.0;
      for (const auto& [a, pa] : sigma.act[i][t].mass) {
        if (pa != 0.0) u_sigma += pa * eu_against(mech, i, t, a, opp);
      }
      double best = -std::numeric_limits<double>::infinity();
      int best_action = 0;
      for (int a = 0; a < mech.num_actions(i); ++a) {
        double u = eu_against(mech, i, t, a, opp);
        if (u > best) {
          best = u;
          best_action = a;
        }
      }
      double gap = best - u_sigma;
      report.worst_gap = std::max(report.worst_gap, gap);
      if (gap > tol) {
        report.ok = false;
        report.violations.push_back({i, t, best_action, gap});
      }
    }
  }
  return report;
}

std::vector<StrategyProfile> find_pure_bne(const Mechanism& mech, const Prior& prior,
                                           double tol, double cap, int jobs) {
  prior.validate(*mech.env);
  const Environment& env = *mech.env;

  // Enumerate strategies over positive-marginal types only; zero-marginal
  // types are pinned to action 0 and reported by check_bne as skipped.
  std::vector<std::vector<int>> live_types(mech.num_agents());
  std::vector<int> slot_sizes;
  double count = 1.0;
  for (int i = 0; i < mech.num_agents(); ++i) {
    for (int t = 0; t < static_cast<int>(env.type_grids[i].size()); ++t) {
      if (prior.marginal(env, i, t) > 0.0) live_types[i].push_back(t);
    }
    for (size_t k = 0; k < live_types[i].size(); ++k) {
      slot_sizes.push_back(mech.num_actions(i));
      count *= mech.num_actions(i);
    }
  }
  if (count > cap) {
    throw BudgetError("pure strategy enumeration needs " + std::to_string(count) +
                          " candidates, cap is " + std::to_string(cap),
                      count);
  }

  MixedRadix radix(slot_sizes);
  auto build = [&](long long idx) {
    StrategyProfile sp;
    sp.act.resize(mech.num_agents());
    std::vector<int> digits = radix.decode(idx);
    size_t k = 0;
    for (int i = 0; i < mech.num_agents(); ++i) {
      sp.act[i].assign(env.type_grids[i].size(), Lottery::point(0));
      for (int t : live_types[i]) sp.act[i][t] = Lottery::point(digits[k++]);
    }
    return sp;
  };

  long long total = radix.total;
  int threads = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  threads = static_cast<int>(std::max<long long>(1, std::min<long long>(threads, total)));

  std::vector<std::vector<long long>> hits(threads);
  auto work = [&](int w) {
    long long lo = total * w / threads, hi = total * (w + 1) / threads;
    for (long long idx = lo; idx < hi; ++idx) {
      if (check_bne(mech, prior, build(idx), tol).ok) hits[w].push_back(idx);
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }

  std::vector<StrategyProfile> out;
  for (const auto& chunk : hits) {
    for (long long idx : chunk) out.push_back(build(idx));
  }
  return out;
}

std::optional<std::vector<int>> dominant_strategy(const Mechanism& mech, int agent,
                                                  double tol) {
  const long long n_opp = mech.opposing_radix(agent).total;
  const int n_act = mech.num_actions(agent);
  const int n_types = static_cast<int>(mech.env->type_grids[agent].size());

  std::vector<int> choice(n_types, -1);
  for (int t = 0; t < n_types; ++t) {
    // Best payoff per opposing profile, shared by all candidates.
    std::vector<double> best(n_opp, -std::numeric_limits<double>::infinity());
    for (long long o = 0; o < n_opp; ++o) {
      for (int a = 0; a < n_act; ++a) {
        best[o] = std::max(best[o], mech.payoff(agent, t, mech.combine(agent, a, o)));
      }
    }
    for (int a = 0; a < n_act && choice[t] < 0; ++a) {
      bool ok = true;
      for (long long o = 0; o < n_opp && ok; ++o) {
        ok = mech.payoff(agent, t, mech.combine(agent, a, o)) >= best[o] - tol;
      }
      if (ok) choice[t] = a;
    }
    if (choice[t] < 0) return std::nullopt;
  }
  return choice;
}

bool has_dominant_strategies(const Mechanism& mech, double tol) {
  for (int i = 0; i < mech.num_agents(); ++i) {
    if (!dominant_strategy(mech, i, tol)) return false;
  }
  return true;
}

bool is_dominant_for(const Mechanism& mech, int agent, std::span<const int> actions,
                     double tol, std::span<const int> types) {
  std::vector<int> all;
  if (types.empty()) {
    all.resize(mech.env->type_grids[agent].size());
    for (size_t t = 0; t < all.size(); ++t) all[t] = static_cast<int>(t);
    types = all;
  }
  const long long n_opp = mech.opposing_radix(agent).total;
  for (int t : types) {
    int a = actions[t];
    if (a < 0) return false;
    for (long long o = 0; o < n_opp; ++o) {
      double own = mech.payoff(agent, t, mech.combine(agent, a, o));
      for (int b = 0; b < mech.num_actions(agent); ++b) {
        if (mech.payoff(agent, t, mech.combine(agent, b, o)) > own + tol) return false;
      }
    }
  }
  return true;
}

}  // namespace strana
