#include "strana/demos.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <set>

#include "strana/atlas.hpp"
#include "strana/catalog.hpp"
#include "strana/epistemics.hpp"
#include "strana/text.hpp"
#include "strana/witness.hpp"

namespace strana {

namespace {

void put(DemoResult& r, const std::string& key, double value) {
  r.metrics.emplace_back(key, value);
}

void note(DemoResult& r, const std::string& key, const std::string& text) {
  r.notes.emplace_back(key, text);
}

// The two-agent yes/no allocation game: exactly one "yes" hands the good
// over, anything else discards it.
EnvPtr yes_no_env() {
  auto env = std::make_shared<Environment>();
  env->agents = {"1", "2"};
  env->outcomes = {"good-to-1", "good-to-2", "discard"};
  for (int i = 0; i < 2; ++i) {
    env->type_grids.push_back({scalar_type(-1.0), scalar_type(1.0)});
    env->utility.push_back({{i == 0 ? -1.0 : 0.0, i == 1 ? -1.0 : 0.0, 0.0},
                            {i == 0 ? 1.0 : 0.0, i == 1 ? 1.0 : 0.0, 0.0}});
  }
  env->finalize();
  return env;
}

MechPtr yes_no_mech(EnvPtr env, bool relabeled) {
  auto mech = std::make_shared<Mechanism>();
  mech->env = env;
  if (!relabeled) {
    mech->name = "ask";
    mech->action_sets = {{"yes", "no"}, {"yes", "no"}};
    mech->outcome_rule = {Lottery::point(2), Lottery::point(0), Lottery::point(1),
                          Lottery::point(2)};
  } else {
    // Same game form with each agent's actions listed the other way round:
    // "go" plays the role of "yes".
    mech->name = "ask-relabeled";
    mech->action_sets = {{"stay", "go"}, {"stay", "go"}};
    mech->outcome_rule = {Lottery::point(2), Lottery::point(1), Lottery::point(0),
                          Lottery::point(2)};
  }
  mech->finalize();
  return mech;
}

StrategyProfile yes_iff_positive(const Mechanism& mech) {
  StrategyProfile sigma;
  for (int i = 0; i < mech.num_agents(); ++i) {
    sigma.act.push_back({Lottery::point(mech.action_index(i, "no")),
                         Lottery::point(mech.action_index(i, "yes"))});
  }
  return sigma;
}

bool witness_demo(DemoResult& r, const std::string& key, const Mechanism& x,
                  const Mechanism& xp, const AnalogyWitness& w, double tol) {
  WitnessReport report = verify_witness(x, xp, w, tol);
  put(r, key + ".worst_gap", report.worst_gap);
  put(r, key + ".ok", report.ok ? 1.0 : 0.0);
  return report.ok;
}

// Both search modes must agree for a break demo to count the "none" as a
// certificate.
bool search_none_both_ways(DemoResult& r, const std::string& key, const Mechanism& x,
                           const Mechanism& xp, double tol) {
  SearchOptions pruned;
  pruned.tol = tol;
  SearchResult fast = search_witness(x, xp, pruned);
  SearchOptions raw = pruned;
  raw.use_signatures = false;
  SearchResult full = search_witness(x, xp, raw);
  put(r, key + ".nodes_pruned", static_cast<double>(fast.nodes_explored));
  put(r, key + ".nodes_full", static_cast<double>(full.nodes_explored));
  return fast.status == SearchStatus::kNone && full.status == SearchStatus::kNone;
}

DemoResult fpa_dutch_equivalence(std::uint64_t, double) {
  DemoResult r;
  std::vector<double> types;
  for (int v = 0; v <= 10; ++v) types.push_back(v);
  EquivalencePair pair = fpa_dutch_pair(10.0, 2.0, 2, {0, 2, 4, 6, 8, 10}, types);
  WitnessReport report = verify_equivalence(*pair.x, *pair.xp, pair.witness, 1e-12);
  put(r, "worst_gap", report.worst_gap);
  note(r, "construction", pair.provenance);
  r.pass = report.ok && report.worst_gap <= 1e-12;
  return r;
}

DemoResult posted_price_family(std::uint64_t, double) {
  DemoResult r;
  std::vector<double> xp_types;
  for (int v = 2; v <= 12; ++v) xp_types.push_back(v);
  FamilyPair pair = posted_price_pair(3.0, 5.0, xp_types);
  r.pass = witness_demo(r, "witness", *pair.x, *pair.xp, pair.witness, 0.0);

  int t4 = pair.env->type_index(0, "4");
  int buy = pair.x->profile_index(std::vector<int>{pair.x->action_index(0, "buy")});
  int pass = pair.x->profile_index(std::vector<int>{pair.x->action_index(0, "pass")});
  put(r, "value4.buy", expected_utility(*pair.x, 0, t4, MixedProfile::pure(buy)));
  put(r, "value4.pass", expected_utility(*pair.x, 0, t4, MixedProfile::pure(pass)));
  note(r, "construction", pair.provenance);
  return r;
}

DemoResult kpa_reserve_family(std::uint64_t, double) {
  DemoResult r;
  r.pass = true;
  for (int k : {1, 2}) {
    FamilyPair pair = kpa_pair(k, 1.0, 3.0, 3, {1, 2, 3}, {5, 7});
    r.pass = witness_demo(r, "k" + std::to_string(k), *pair.x, *pair.xp, pair.witness,
                          1e-12) &&
             r.pass;
  }
  note(r, "construction",
       "bids shift up by the reserve difference, values shift down by it");
  return r;
}

DemoResult equilibrium_transfer(std::uint64_t, double tol) {
  DemoResult r;
  FamilyPair pair = kpa_pair(1, 1.0, 3.0, 3, {1, 2, 3}, {5, 7});
  const Environment& env = *pair.env;
  std::vector<std::vector<double>> marg(3, {0.0, 0.4, 0.6});
  Prior f = Prior::from_marginals(env, marg);
  Prior g = pushforward_prior(env, pair.witness.tau, f);

  std::vector<StrategyProfile> base = find_pure_bne(*pair.x, g, tol);
  put(r, "base_bne_count", static_cast<double>(base.size()));
  if (base.empty()) {
    r.pass = false;
    return r;
  }

  StrategyProfile moved = transfer_equilibrium(*pair.x, *pair.xp, pair.witness,
                                               base.front());
  BneReport check = check_bne(*pair.xp, f, moved, 1e-9);
  put(r, "transfer.ok", check.ok ? 1.0 : 0.0);
  put(r, "transfer.worst_gap", check.worst_gap);

  auto describe = [&](const Mechanism& m, const StrategyProfile& sp) {
    std::string text;
    for (int i = 0; i < m.num_agents(); ++i) {
      for (size_t t = 0; t < sp.act[i].size(); ++t) {
        if (!text.empty()) text += "; ";
        text += env.agents[i] + ":" + env.type_grids[i][t].label + "->" +
                m.action_sets[i][sp.act[i][t].mass.front().first];
      }
    }
    return text;
  };
  note(r, "artifact.base_equilibrium", describe(*pair.x, base.front()));
  note(r, "artifact.transferred_equilibrium", describe(*pair.xp, moved));

  // Independent route: the transferred profile must appear in the target
  // auction's own exhaustive equilibrium list.
  std::vector<StrategyProfile> target = find_pure_bne(*pair.xp, f, tol);
  bool member = false;
  for (const StrategyProfile& sp : target) {
    bool same = true;
    for (int i = 0; i < 3 && same; ++i) {
      for (size_t t = 0; t < sp.act[i].size() && same; ++t) {
        same = sp.act[i][t].mass == moved.act[i][t].mass;
      }
    }
    member = member || same;
  }
  put(r, "transfer.in_target_list", member ? 1.0 : 0.0);
  r.pass = check.ok && member;
  return r;
}

DemoResult kec_family(std::uint64_t, double) {
  DemoResult r;
  r.pass = true;
  for (int k : {1, 2}) {
    FamilyPair pair = kec_pair(k, 1.0, 2.0, 2, {0, 1, 2, 3}, {6, 12});
    r.pass = witness_demo(r, "k" + std::to_string(k), *pair.x, *pair.xp, pair.witness,
                          1e-12) &&
             r.pass;
    put(r, "k" + std::to_string(k) + ".kappa", pair.witness.kappa[0][0]);
  }
  note(r, "construction",
       "bids and values rescale by the cost ratio; payoffs scale by it too");
  return r;
}

DemoResult kec_zero_break(std::uint64_t, double tol) {
  DemoResult r;
  FamilySpec ec0, ec1, pa0;
  ec0.family = ec1.family = "kec";
  pa0.family = "kpa";
  ec0.n_agents = ec1.n_agents = pa0.n_agents = 2;
  ec0.k = ec1.k = pa0.k = 2;
  ec0.entry_cost = 0.0;
  ec1.entry_cost = 1.0;
  pa0.reserve = 0.0;
  ec0.bids = ec1.bids = pa0.bids = {0, 1, 2, 3};
  std::vector<std::vector<TypePoint>> grids(2, scalar_grid({1, 3}));
  Assembled a = assemble(std::move(grids), UtilityFamily::kValueAuction,
                         {draft_mechanism(ec0), draft_mechanism(ec1),
                          draft_mechanism(pa0)});

  bool free_ds = has_dominant_strategies(*a.mechs[0], tol);
  bool costly_ds = has_dominant_strategies(*a.mechs[1], tol);
  put(r, "zero_cost.has_dominant", free_ds ? 1.0 : 0.0);
  put(r, "positive_cost.has_dominant", costly_ds ? 1.0 : 0.0);

  bool tables_equal = a.mechs[0]->outcome_rule.size() == a.mechs[2]->outcome_rule.size();
  for (size_t p = 0; tables_equal && p < a.mechs[0]->outcome_rule.size(); ++p) {
    tables_equal = a.mechs[0]->outcome_rule[p].mass == a.mechs[2]->outcome_rule[p].mass;
  }
  put(r, "zero_cost_equals_zero_reserve", tables_equal ? 1.0 : 0.0);

  bool none = search_none_both_ways(r, "search", *a.mechs[0], *a.mechs[1], tol);
  put(r, "search.none", none ? 1.0 : 0.0);
  note(r, "certificate.dominance",
       "strategic analogy preserves the existence of dominant strategies; the "
       "zero-cost auction has them and the positive-cost one does not");
  note(r, "certificate.search",
       "exhaustive relabeling search on this instance finds no witness");
  r.pass = free_ds && !costly_ds && tables_equal && none;
  return r;
}

DemoResult different_k_break(std::uint64_t, double tol) {
  DemoResult r;
  FamilySpec one, two;
  one.family = two.family = "kpa";
  one.n_agents = two.n_agents = 2;
  one.k = 1;
  one.reserve = 0.0;
  one.bids = {0, 1, 2, 3};
  two.k = 2;
  two.reserve = 1.0;
  two.bids = {1, 2, 3};
  std::vector<std::vector<TypePoint>> grids(2, scalar_grid({1, 3}));
  Assembled a = assemble(std::move(grids), UtilityFamily::kValueAuction,
                         {draft_mechanism(one), draft_mechanism(two)});

  bool first_ds = has_dominant_strategies(*a.mechs[0], tol);
  bool second_ds = has_dominant_strategies(*a.mechs[1], tol);
  put(r, "first_price.has_dominant", first_ds ? 1.0 : 0.0);
  put(r, "second_price.has_dominant", second_ds ? 1.0 : 0.0);

  // The like-for-like zero-reserve instance is also searched exhaustively.
  FamilySpec two0 = two;
  two0.reserve = 0.0;
  two0.bids = {0, 1, 2, 3};
  std::vector<std::vector<TypePoint>> grids2(2, scalar_grid({1, 3}));
  Assembled b = assemble(std::move(grids2), UtilityFamily::kValueAuction,
                         {draft_mechanism(one), draft_mechanism(two0)});
  bool none = search_none_both_ways(r, "search", *b.mechs[0], *b.mechs[1], tol);
  put(r, "search.none", none ? 1.0 : 0.0);
  note(r, "certificate.dominance",
       "the second-price format admits dominant strategies and the "
       "first-price format does not, so no witness can relate them");
  r.pass = second_ds && !first_ds && none;
  return r;
}

DemoResult ck_transfer(std::uint64_t, double tol) {
  DemoResult r;
  EnvPtr env = yes_no_env();
  MechPtr x = yes_no_mech(env, false);
  MechPtr xp = yes_no_mech(env, true);
  MechanismRegistry registry;
  registry.add("x", x);
  registry.add("xp", xp);

  EquivalenceWitness alpha;
  for (int i = 0; i < 2; ++i) {
    std::vector<int> table(2);
    table[x->action_index(i, "yes")] = xp->action_index(i, "go");
    table[x->action_index(i, "no")] = xp->action_index(i, "stay");
    alpha.alpha.push_back(table);
  }
  WitnessReport equiv = verify_equivalence(*x, *xp, alpha, 0.0);
  put(r, "equivalence.worst_gap", equiv.worst_gap);

  AnalogyWitness w = AnalogyWitness::from_equivalence(*x, *xp, alpha);
  Prior f = Prior::from_marginals(*env, {{0.5, 0.5}, {0.5, 0.5}});
  StrategyProfile sigma = yes_iff_positive(*x);
  StrategyProfile sigma_p = transfer_equilibrium(*x, *xp, w, sigma);

  ComparisonUniverse x_side = equilibrium_comparison_universe(registry, "x", f, sigma);
  ComparisonUniverse xp_side =
      equilibrium_comparison_universe(registry, "xp", f, sigma_p);
  ComparisonUniverse joint;
  joint.items = x_side.items;
  joint.items.insert(joint.items.end(), xp_side.items.begin(), xp_side.items.end());
  joint.cache_truth(registry);

  std::set<int> generators;
  for (int c = 0; c < static_cast<int>(x_side.items.size()); ++c) generators.insert(c);
  std::vector<ClosureLink> links{ClosureLink::from_witness("x", "xp", w)};
  ClosureResult closure = close_comparisons(generators, links, joint, registry);
  put(r, "closure.generators", static_cast<double>(generators.size()));
  put(r, "closure.size", static_cast<double>(closure.closed.size()));

  // Every transferred-side equilibrium comparison must be derivable.
  bool covered = true;
  for (const PayoffComparison& c : xp_side.items) {
    auto idx = joint.find(c);
    covered = covered && idx && closure.closed.count(*idx) > 0;
  }
  put(r, "closure.covers_transferred_side", covered ? 1.0 : 0.0);

  // Certify common knowledge of the transferred equilibrium with awareness
  // sets equal to the closure, re-indexed into the transferred universe.
  std::vector<int> aware;
  for (int c = 0; c < static_cast<int>(xp_side.items.size()); ++c) aware.push_back(c);
  KnowledgeStructure k;
  k.possible.assign(2, {AwarenessProfile(2, aware)});
  CkReport ck = check_ck_equilibrium(registry, "xp", f, sigma_p, k, {}, tol);
  put(r, "transferred.common_knowledge", ck.ok ? 1.0 : 0.0);

  // Without the derived comparisons the certification must fail.
  KnowledgeStructure empty_k;
  empty_k.possible.assign(2, {AwarenessProfile(2, std::vector<int>{})});
  CkReport blind = check_ck_equilibrium(registry, "xp", f, sigma_p, empty_k, {}, tol);
  put(r, "unaware.common_knowledge", blind.ok ? 1.0 : 0.0);

  r.pass = equiv.ok && covered && ck.ok && !blind.ok;
  return r;
}

DemoResult scoring_linear_family(std::uint64_t, double) {
  DemoResult r;
  FamilyPair pair = scoring_linear_pair(0.5, 0.25, {1.0, 2.0}, {{2, 3, 4}, {3, 5, 7}},
                                        {{4, 5}, {6, 8}});
  r.pass = witness_demo(r, "witness", *pair.x, *pair.xp, pair.witness, 1e-12);
  put(r, "bid_shift.seller1", 2.0);
  put(r, "bid_shift.seller2", 4.0);
  note(r, "construction", pair.provenance);
  return r;
}

DemoResult scoring_ratio_break(std::uint64_t, double tol) {
  DemoResult r;
  FamilySpec low, high;
  low.family = high.family = "scoring_ratio";
  low.n_agents = high.n_agents = 2;
  low.quality = high.quality = {2.0, 1.0};
  low.bids = high.bids = {1, 2, 4};
  low.weight = 0.25;
  high.weight = 0.75;
  std::vector<std::vector<TypePoint>> grids(2, scalar_grid({1, 2}));
  Assembled a = assemble(std::move(grids), UtilityFamily::kProcurement,
                         {draft_mechanism(low), draft_mechanism(high)});

  // Exhaustive sweep of the bid grid for seller 2's winning chances.
  auto wins = [&](const Mechanism& m, std::string* where) {
    int count = 0;
    std::vector<int> digits;
    for (long long p = 0; p < m.num_profiles(); ++p) {
      for (const auto& [y, q] : m.outcome_rule[p].mass) {
        if (q > 0.0 && m.env->outcomes[y].rfind("w=1", 0) == 0) {
          ++count;
          if (where && where->empty()) {
            m.profile_radix().decode(p, digits);
            *where = "bids (" + m.action_sets[0][digits[0]] + ", " +
                     m.action_sets[1][digits[1]] + ")";
          }
          break;
        }
      }
    }
    return count;
  };
  std::string winning_profile;
  int low_wins = wins(*a.mechs[0], nullptr);
  int high_wins = wins(*a.mechs[1], &winning_profile);
  note(r, "artifact.seller2_winning_profile", winning_profile);
  put(r, "low_weight.seller2_wins", static_cast<double>(low_wins));
  put(r, "high_weight.seller2_wins", static_cast<double>(high_wins));

  bool none = search_none_both_ways(r, "search", *a.mechs[0], *a.mechs[1], tol);
  put(r, "search.none", none ? 1.0 : 0.0);
  note(r, "certificate.exclusion",
       "with the low price weight the low-quality seller never wins, so her "
       "payoffs are constant there but not in the high-weight auction; no "
       "positive affine map can relate the two");
  r.pass = low_wins == 0 && high_wins > 0 && none;
  return r;
}

DemoResult pricing_input_family(std::uint64_t, double) {
  DemoResult r;
  FamilyPair pair = input_pricing_pair(1.0, 2.0, Tariff::power(1.0, 2.0), 0.5, 2,
                                       {0, 0.5, 1}, {1.0, std::sqrt(2.0)});
  r.pass = witness_demo(r, "witness", *pair.x, *pair.xp, pair.witness, 1e-12);
  note(r, "construction", pair.provenance);
  return r;
}

DemoResult pricing_output_break(std::uint64_t, double tol) {
  DemoResult r;
  Tariff bent = Tariff::poly({1.0, 1.0});  // x + x^2: regular but not isoelastic
  put(r, "tariff_ratio.x0.5", bent(1.0) / bent(0.5));
  put(r, "tariff_ratio.x1", bent(2.0) / bent(1.0));

  FamilySpec a, b;
  a.family = b.family = "output_pricing";
  a.n_agents = b.n_agents = 2;
  a.tariff = b.tariff = bent;
  a.gamma = b.gamma = 0.5;
  a.efficacy = 1.0;
  a.bids = {0, 0.5, 1};
  b.efficacy = 2.0;
  b.bids = {0, 1, 2};
  std::vector<std::vector<TypePoint>> grids(2, curve_grid({1.0, 2.0}, 0.5));
  Assembled built = assemble(std::move(grids), UtilityFamily::kPricing,
                             {draft_mechanism(a), draft_mechanism(b)});

  bool none = search_none_both_ways(r, "search", *built.mechs[0], *built.mechs[1], tol);
  put(r, "search.none", none ? 1.0 : 0.0);

  // For contrast: the isoelastic tariff does admit the scaling witness.
  FamilyPair good = output_pricing_pair(1.0, 2.0, 2.0, 1.5, 0.5, 2, {0, 0.5, 1},
                                        {2.0, 4.0});
  bool good_ok = witness_demo(r, "isoelastic_control", *good.x, *good.xp, good.witness,
                              1e-12);
  note(r, "certificate.ratio",
       "the tariff ratio P(2x)/P(x) is 8/3 at x=0.5 but 3 at x=1, so the "
       "tariff is not a fixed power and the scaling construction is ruled out");
  r.pass = none && good_ok &&
           std::abs(bent(1.0) / bent(0.5) - 8.0 / 3.0) < 1e-12 &&
           std::abs(bent(2.0) / bent(1.0) - 3.0) < 1e-12;
  return r;
}

DemoResult optimal_reserve_uniform(std::uint64_t, double) {
  DemoResult r;
  int n = 100000;
  GridPrior prior;
  prior.v.reserve(n);
  for (int i = 0; i < n; ++i) {
    double v = static_cast<double>(i) / (n - 1);
    prior.v.push_back(v);
    prior.pdf.push_back(1.0);
    prior.cdf.push_back(v);
  }
  double reserve = optimal_reserve(prior);
  put(r, "reserve", reserve);
  put(r, "grid_points", n);
  r.pass = std::abs(reserve - 0.5) <= 1e-6;
  return r;
}

using DemoFn = std::function<DemoResult(std::uint64_t, double)>;

const std::vector<std::pair<std::string, DemoFn>>& demo_table() {
  static const std::vector<std::pair<std::string, DemoFn>> table = {
      {"fpa_dutch_equivalence", fpa_dutch_equivalence},
      {"posted_price_family", posted_price_family},
      {"kpa_reserve_family", kpa_reserve_family},
      {"kec_family", kec_family},
      {"kec_zero_break", kec_zero_break},
      {"different_k_break", different_k_break},
      {"equilibrium_transfer", equilibrium_transfer},
      {"ck_transfer", ck_transfer},
      {"scoring_linear_family", scoring_linear_family},
      {"scoring_ratio_break", scoring_ratio_break},
      {"pricing_input_family", pricing_input_family},
      {"pricing_output_break", pricing_output_break},
      {"optimal_reserve_uniform", optimal_reserve_uniform},
  };
  return table;
}

}  // namespace

std::vector<std::string> demo_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : demo_table()) names.push_back(name);
  return names;
}

DemoResult run_demo(const std::string& name, std::uint64_t seed, double tol) {
  for (const auto& [id, fn] : demo_table()) {
    if (id == name) {
      DemoResult r = fn(seed, tol);
      r.name = name;
      r.notes.emplace_back("seed", std::to_string(seed));
      r.notes.emplace_back("tol", format_double(tol));
      return r;
    }
  }
  throw InvalidInputError("unknown demo '" + name + "'");
}

std::string canonical_json(const DemoResult& result) {
  std::string out = "{\"name\":\"" + result.name + "\",\"pass\":";
  out += result.pass ? "true" : "false";
  out += ",\"metrics\":{";
  for (size_t i = 0; i < result.metrics.size(); ++i) {
    if (i) out += ",";
    out += "\"" + result.metrics[i].first + "\":\"" +
           format_double(result.metrics[i].second) + "\"";
  }
  out += "},\"notes\":{";
  for (size_t i = 0; i < result.notes.size(); ++i) {
    if (i) out += ",";
    out += "\"" + result.notes[i].first + "\":\"" + result.notes[i].second + "\"";
  }
  out += "}}";
  return out;
}

}  // namespace strana
