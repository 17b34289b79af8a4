#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <memory>
#include <random>

#include "fixtures.hpp"
#include "strana/catalog.hpp"
#include "strana/epistemics.hpp"

using namespace strana;
using namespace fixtures;

namespace {

Prior uniform_ipv(const Environment& env) {
  std::vector<std::vector<double>> marg;
  for (const auto& grid : env.type_grids) {
    marg.emplace_back(grid.size(), 1.0 / static_cast<double>(grid.size()));
  }
  return Prior::from_marginals(env, marg);
}

// Everybody aware of every comparison, one possible profile per agent.
KnowledgeStructure full_awareness(int agents, int universe_size) {
  std::vector<int> all(universe_size);
  for (int c = 0; c < universe_size; ++c) all[c] = c;
  AwarenessProfile omega(agents, all);
  KnowledgeStructure k;
  k.possible.assign(agents, {omega});
  return k;
}

struct YesNoWorld {
  EnvPtr env;
  MechPtr ask;
  MechanismRegistry registry;
  Prior prior;
  StrategyProfile sigma;

  YesNoWorld() {
    env = yes_no_env({-1.0, 1.0});
    ask = yes_no_mech(env);
    registry.add("ask", ask);
    prior = uniform_ipv(*env);
    sigma = yes_iff_positive(*ask);
  }
};

// Registry wrapper around the cubed-payoff fixture.
struct CubedWorld {
  CubedPair pair;
  EnvPtr env;
  MechPtr x, xp;
  MechanismRegistry registry;

  CubedWorld() {
    env = pair.env;
    x = pair.x;
    xp = pair.xp;
    registry.add("x", x);
    registry.add("xp", xp);
  }

  ClosureLink link() const {
    ClosureLink l;
    l.x_id = "x";
    l.xp_id = "xp";
    l.alpha = {{0, 1, 2}};
    l.tau = {TypeMap::identity(1)};
    return l;
  }
};

}  // namespace

TEST_CASE("comparison truth") {
  YesNoWorld w;
  int t_pos = w.env->type_index(0, "1");
  int t_neg = w.env->type_index(0, "-1");
  MixedProfile yes_no = MixedProfile::pure(w.ask->profile_index(std::vector<int>{0, 1}));
  MixedProfile no_no = MixedProfile::pure(w.ask->profile_index(std::vector<int>{1, 1}));

  CHECK(comparison_truth(w.registry, {"ask", 0, t_pos, yes_no, yes_no}));
  CHECK(comparison_truth(w.registry, {"ask", 0, t_pos, yes_no, no_no}));
  CHECK_FALSE(comparison_truth(w.registry, {"ask", 0, t_neg, yes_no, no_no}));
}

TEST_CASE("equilibrium comparison universes") {
  YesNoWorld w;

  SUBCASE("two agents, two types, two pure deviations each") {
    ComparisonUniverse u =
        equilibrium_comparison_universe(w.registry, "ask", w.prior, w.sigma);
    CHECK(u.items.size() == 8);
    for (size_t c = 0; c < u.items.size(); ++c) CHECK(u.truth[c]);
  }

  SUBCASE("singleton mechanisms only compare the profile with itself") {
    MechanismRegistry reg;
    auto coin = coin_flip_mech(w.env);
    reg.add("coin", coin);
    StrategyProfile stay;
    stay.act.assign(2, {Lottery::point(0), Lottery::point(0)});
    ComparisonUniverse u = equilibrium_comparison_universe(reg, "coin", w.prior, stay);
    CHECK(u.items.size() == 4);  // 2 agents x 2 types x 1 action
    for (const PayoffComparison& c : u.items) {
      CHECK(c.left.approx_equal(c.right, 0.0));
    }
  }

  SUBCASE("a declared mixed deviation adds one comparison per agent-type") {
    std::vector<std::vector<Lottery>> extra(2);
    extra[0].push_back(Lottery{{{0, 0.5}, {1, 0.5}}});
    extra[1].push_back(Lottery{{{0, 0.5}, {1, 0.5}}});
    ComparisonUniverse u =
        equilibrium_comparison_universe(w.registry, "ask", w.prior, w.sigma, extra);
    CHECK(u.items.size() == 12);
  }

  SUBCASE("non-equilibrium strategies are rejected") {
    StrategyProfile bad = w.sigma;
    bad.act[0][0] = Lottery::point(0);
    CHECK_THROWS_AS(
        equilibrium_comparison_universe(w.registry, "ask", w.prior, bad, {}, 1e-9),
        InvalidInputError);
  }
}

TEST_CASE("closure under witness links") {
  // Reserve pair with both sides' equilibrium comparisons in one universe.
  FamilyPair pair = kpa_pair(1, 1.0, 3.0, 2, {1, 2, 3}, {5, 7});
  const Environment& env = *pair.env;
  MechanismRegistry registry;
  registry.add("x", pair.x);
  registry.add("xp", pair.xp);

  std::vector<std::vector<double>> marg(2, {0.0, 0.5, 0.5});
  Prior f = Prior::from_marginals(env, marg);
  Prior g = pushforward_prior(env, pair.witness.tau, f);

  StrategyProfile sigma = find_pure_bne(*pair.x, g, 1e-9).front();
  StrategyProfile sigma_p = transfer_equilibrium(*pair.x, *pair.xp, pair.witness, sigma);

  ComparisonUniverse x_side =
      equilibrium_comparison_universe(registry, "x", g, sigma);
  ComparisonUniverse xp_side =
      equilibrium_comparison_universe(registry, "xp", f, sigma_p);

  ComparisonUniverse joint;
  joint.items = x_side.items;
  joint.items.insert(joint.items.end(), xp_side.items.begin(), xp_side.items.end());
  joint.cache_truth(registry);

  std::vector<ClosureLink> links{ClosureLink::from_witness("x", "xp", pair.witness)};
  std::set<int> x_indices;
  for (int c = 0; c < static_cast<int>(x_side.items.size()); ++c) x_indices.insert(c);

  SUBCASE("empty generators close to nothing") {
    ClosureResult r = close_comparisons({}, links, joint, registry);
    CHECK(r.closed.empty());
    CHECK(r.out_of_universe.empty());
  }

  SUBCASE("the one-step images land on the transferred side and are true") {
    ClosureResult r = close_comparisons(x_indices, links, joint, registry);
    CHECK(r.closed.size() == joint.items.size());
    for (int c : r.closed) CHECK(comparison_truth(registry, joint.items[c]));
    CHECK(r.out_of_universe.empty());

    SUBCASE("closure is idempotent") {
      ClosureResult again = close_comparisons(r.closed, links, joint, registry);
      CHECK(again.closed == r.closed);
    }
  }

  SUBCASE("closedness checks") {
    std::set<int> everything;
    for (int c = 0; c < static_cast<int>(joint.items.size()); ++c) everything.insert(c);
    CHECK(is_closed_under(everything, links, joint, registry));
    CHECK(is_closed_under({}, links, joint, registry));
    CHECK_FALSE(is_closed_under(x_indices, links, joint, registry));
  }

  SUBCASE("monotone and extensive on random generator sets") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      std::set<int> small, big;
      for (int c = 0; c < static_cast<int>(joint.items.size()); ++c) {
        bool in_small = (rng() & 3) == 0;
        bool in_big = in_small || ((rng() & 1) == 0);
        if (in_small) small.insert(c);
        if (in_big) big.insert(c);
      }
      auto cs = close_comparisons(small, links, joint, registry).closed;
      auto cb = close_comparisons(big, links, joint, registry).closed;
      CHECK(std::includes(cs.begin(), cs.end(), small.begin(), small.end()));
      CHECK(std::includes(cb.begin(), cb.end(), cs.begin(), cs.end()));
    }
  }

  SUBCASE("images outside the universe are reported") {
    ComparisonUniverse only_x;
    only_x.items = x_side.items;
    only_x.cache_truth(registry);
    std::set<int> gens;
    for (int c = 0; c < static_cast<int>(only_x.items.size()); ++c) gens.insert(c);
    ClosureResult r = close_comparisons(gens, links, only_x, registry);
    CHECK(r.closed == gens);
    CHECK_FALSE(r.out_of_universe.empty());
  }
}

TEST_CASE("validity probe") {
  SUBCASE("witness links never break truth") {
    FamilyPair pair = kpa_pair(1, 1.0, 3.0, 2, {1, 2, 3}, {5, 7});
    MechanismRegistry registry;
    registry.add("x", pair.x);
    registry.add("xp", pair.xp);
    std::vector<std::vector<double>> marg(2, {0.0, 0.5, 0.5});
    Prior f = Prior::from_marginals(*pair.env, marg);
    Prior g = pushforward_prior(*pair.env, pair.witness.tau, f);
    StrategyProfile sigma = find_pure_bne(*pair.x, g, 1e-9).front();
    StrategyProfile sigma_p =
        transfer_equilibrium(*pair.x, *pair.xp, pair.witness, sigma);

    ComparisonUniverse joint;
    joint.items = equilibrium_comparison_universe(registry, "x", g, sigma).items;
    auto xp_items = equilibrium_comparison_universe(registry, "xp", f, sigma_p).items;
    joint.items.insert(joint.items.end(), xp_items.begin(), xp_items.end());
    joint.cache_truth(registry);

    std::vector<ClosureLink> links{ClosureLink::from_witness("x", "xp", pair.witness)};
    ValidityReport report = validity_probe(links, joint, registry, 100, 42);
    CHECK(report.trials == 100);
    CHECK(report.violations == 0);
  }

  SUBCASE("a monotone but non-affine bridge is caught through mixtures") {
    CubedWorld w;
    ComparisonUniverse u;
    MixedProfile mix{{{0, 0.5}, {2, 0.5}}};  // half a, half c
    MixedProfile point_b = MixedProfile::pure(1);
    u.items.push_back({"x", 0, 0, mix, point_b});    // -0.5 >= -0.6: true
    u.items.push_back({"xp", 0, 0, mix, point_b});   // -3.5 >= -0.216: false
    u.cache_truth(w.registry);
    REQUIRE(u.truth[0]);
    REQUIRE_FALSE(u.truth[1]);

    ValidityReport report = validity_probe({w.link()}, u, w.registry, 100, 7);
    CHECK(report.violations >= 1);
    REQUIRE(report.first.has_value());
    CHECK(report.first->derived_index == 1);
  }

  SUBCASE("no links, no violations") {
    CubedWorld w;
    ComparisonUniverse u;
    u.items.push_back({"x", 0, 0, MixedProfile::pure(2), MixedProfile::pure(0)});
    u.cache_truth(w.registry);
    CHECK(validity_probe({}, u, w.registry, 50, 3).violations == 0);
  }
}

TEST_CASE("knowledge primitives") {
  AwarenessProfile omega_full{{0, 1}, {0, 1}};
  AwarenessProfile omega_partial{{0, 1}, {0}};

  SUBCASE("knows quantifies over the whole knowledge set") {
    auto has_c1_for_all = [](const AwarenessProfile& w) {
      return aware_of(w, 0, 1) && aware_of(w, 1, 1);
    };
    CHECK(knows({omega_full}, has_c1_for_all));
    CHECK_FALSE(knows({omega_full, omega_partial}, has_c1_for_all));
    CHECK(knows({omega_full, omega_partial},
                [](const AwarenessProfile&) { return true; }));
    CHECK_THROWS_AS(knows({}, [](const AwarenessProfile&) { return true; }),
                    InvalidInputError);
  }

  SUBCASE("common knowledge needs every profile to cover every agent") {
    KnowledgeStructure k;
    k.possible = {{omega_full}, {omega_full}};
    CHECK(is_common_knowledge(0, k));
    CHECK(is_common_knowledge(1, k));

    k.possible[0] = {omega_full, omega_partial};
    CHECK(is_common_knowledge(0, k));
    CHECK_FALSE(is_common_knowledge(1, k));  // agent 2's set misses it in one state

    KnowledgeStructure solo;
    solo.possible = {{AwarenessProfile{{0}}}};
    CHECK(is_common_knowledge(0, solo));
    CHECK(knows(solo.possible[0],
                [](const AwarenessProfile& w) { return aware_of(w, 0, 0); }));
  }
}

TEST_CASE("common knowledge of equilibrium") {
  YesNoWorld w;
  ComparisonUniverse u =
      equilibrium_comparison_universe(w.registry, "ask", w.prior, w.sigma);
  int n = static_cast<int>(u.items.size());

  SUBCASE("full awareness certifies the equilibrium") {
    KnowledgeStructure k = full_awareness(2, n);
    CkReport report = check_ck_equilibrium(w.registry, "ask", w.prior, w.sigma, k, {},
                                           1e-9);
    CHECK(report.ok);
    CHECK(report.universe.items.size() == 8);
  }

  SUBCASE("dropping one comparison from one profile breaks it, by name") {
    KnowledgeStructure k = full_awareness(2, n);
    // Remove comparison 3 from agent 2's awareness inside the profile agent
    // 1 considers possible.
    auto& indices = k.possible[0][0][1];
    indices.erase(std::find(indices.begin(), indices.end(), 3));
    CkReport report = check_ck_equilibrium(w.registry, "ask", w.prior, w.sigma, k, {},
                                           1e-9);
    CHECK_FALSE(report.ok);
    REQUIRE(report.failures.size() == 1);
    CHECK(report.failures[0].comparison == 3);
    CHECK(report.failures[0].agent_i == 0);
    CHECK(report.failures[0].agent_j == 1);
  }

  SUBCASE("shrinking a knowledge set never revokes certification") {
    KnowledgeStructure k = full_awareness(2, n);
    k.possible[1].push_back(k.possible[1][0]);  // duplicate possible profile
    REQUIRE(check_ck_equilibrium(w.registry, "ask", w.prior, w.sigma, k, {}, 1e-9).ok);
    k.possible[1].pop_back();
    CHECK(check_ck_equilibrium(w.registry, "ask", w.prior, w.sigma, k, {}, 1e-9).ok);
  }

  SUBCASE("common knowledge implies each agent knows the awareness event") {
    KnowledgeStructure k = full_awareness(2, n);
    for (int c = 0; c < n; ++c) {
      if (!is_common_knowledge(c, k)) continue;
      for (int i = 0; i < 2; ++i) {
        CHECK(knows(k.possible[i], [&](const AwarenessProfile& omega) {
          for (size_t j = 0; j < omega.size(); ++j) {
            if (!aware_of(omega, static_cast<int>(j), c)) return false;
          }
          return true;
        }));
      }
    }
  }
}
