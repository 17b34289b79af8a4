#pragma once

// Shared test fixtures: the two-agent yes/no allocation game used across
// suites, plus an expected-utility oracle that recomputes payoffs straight
// from the outcome tables, independent of the engine's cached tensors.

#include <cmath>
#include <memory>
#include <vector>

#include "strana/game.hpp"
#include "strana/text.hpp"

namespace fixtures {

using namespace strana;

// One good, two agents; exactly one "yes" hands the good over, anything
// else discards it. Types are the agents' values for the good.
inline EnvPtr yes_no_env(std::vector<double> type_values = {-1.0, 1.0}) {
  auto env = std::make_shared<Environment>();
  env->agents = {"1", "2"};
  env->outcomes = {"good-to-1", "good-to-2", "discard"};
  for (int i = 0; i < 2; ++i) {
    std::vector<TypePoint> grid;
    for (double v : type_values) {
      TypePoint t;
      t.label = strana::format_double(v);
      t.value = v;
      grid.push_back(t);
    }
    env->type_grids.push_back(grid);
    std::vector<std::vector<double>> rows;
    for (double v : type_values) {
      rows.push_back({i == 0 ? v : 0.0, i == 1 ? v : 0.0, 0.0});
    }
    env->utility.push_back(rows);
  }
  env->finalize();
  return env;
}

inline MechPtr yes_no_mech(EnvPtr env) {
  auto mech = std::make_shared<Mechanism>();
  mech->env = env;
  mech->name = "ask";
  mech->action_sets = {{"yes", "no"}, {"yes", "no"}};
  // Profiles in lexicographic order: (yes,yes), (yes,no), (no,yes), (no,no).
  mech->outcome_rule = {Lottery::point(2), Lottery::point(0), Lottery::point(1),
                        Lottery::point(2)};
  mech->finalize();
  return mech;
}

inline MechPtr coin_flip_mech(EnvPtr env) {
  auto mech = std::make_shared<Mechanism>();
  mech->env = env;
  mech->name = "coin";
  mech->action_sets = {{"wait"}, {"wait"}};
  mech->outcome_rule = {Lottery{{{0, 0.5}, {1, 0.5}}}};
  mech->finalize();
  return mech;
}

// Yes iff the value is positive.
inline StrategyProfile yes_iff_positive(const Mechanism& mech) {
  StrategyProfile sigma;
  for (int i = 0; i < mech.num_agents(); ++i) {
    std::vector<Lottery> per_type;
    for (const TypePoint& t : mech.env->type_grids[i]) {
      per_type.push_back(Lottery::point(*t.value > 0 ? 0 : 1));
    }
    sigma.act.push_back(per_type);
  }
  return sigma;
}

// Straight double sum over the outcome tables; deliberately avoids the
// engine's payoff cache so it can serve as an independent check.
inline double naive_eu(const Mechanism& mech, int agent, int type_idx,
                       const MixedProfile& profile) {
  double total = 0.0;
  for (const auto& [p, mass] : profile.mass) {
    for (const auto& [y, q] : mech.outcome_rule[p].mass) {
      total += mass * q * mech.env->utility[agent][type_idx][y];
    }
  }
  return total;
}

// A one-agent mechanism pair whose xp payoffs are exactly the cubes of the
// x payoffs: monotone pointwise, so pure comparisons survive the bridge,
// but mixtures can reverse order. Used to show the validity probe catching
// a non-affine link.
struct CubedPair {
  EnvPtr env;
  MechPtr x, xp;

  CubedPair() {
    std::vector<double> base{-2.0, -0.6, 1.0};
    auto e = std::make_shared<Environment>();
    e->agents = {"1"};
    for (double v : base) {
      e->outcomes.push_back("u" + format_double(v));
      e->outcomes.push_back("c" + format_double(v));
    }
    TypePoint t;
    t.label = "t";
    e->type_grids = {{t}};
    std::vector<double> row;
    for (double v : base) {
      row.push_back(v);
      row.push_back(v * v * v);
    }
    e->utility = {{row}};
    e->finalize();
    env = e;

    auto make = [&](bool cubed, const std::string& name) {
      auto m = std::make_shared<Mechanism>();
      m->env = env;
      m->name = name;
      m->action_sets = {{"a", "b", "c"}};
      for (size_t i = 0; i < base.size(); ++i) {
        m->outcome_rule.push_back(Lottery::point(static_cast<int>(2 * i + cubed)));
      }
      m->finalize();
      return m;
    };
    x = make(false, "x");
    xp = make(true, "xp");
  }
};

}  // namespace fixtures
