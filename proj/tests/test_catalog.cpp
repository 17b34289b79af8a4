#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "strana/catalog.hpp"
#include "strana/witness.hpp"

using namespace strana;

namespace {

// Allocation probabilities and expected payments recovered from the draft's
// structured outcomes.
struct Settlement {
  std::vector<double> alloc;
  std::vector<double> pay;
};

Settlement settle(const MechDraft& draft, const std::vector<int>& profile) {
  std::vector<int> sizes;
  for (const auto& s : draft.action_sets) sizes.push_back(static_cast<int>(s.size()));
  MixedRadix radix(sizes);
  const auto& lottery = draft.rule[radix.index(profile)];
  Settlement out;
  out.alloc.assign(sizes.size(), 0.0);
  out.pay.assign(sizes.size(), 0.0);
  for (const auto& [y, p] : lottery) {
    if (y.winner) out.alloc[*y.winner] += p;
    for (size_t i = 0; i < out.pay.size(); ++i) out.pay[i] += p * y.payments[i];
  }
  return out;
}

FamilySpec kpa_spec(int k, double r, int n, std::vector<double> bids) {
  FamilySpec s;
  s.family = "kpa";
  s.k = k;
  s.reserve = r;
  s.n_agents = n;
  s.bids = std::move(bids);
  return s;
}

}  // namespace

TEST_CASE("kth-price auction payments") {
  SUBCASE("a lone participant pays her bid above the reserve") {
    MechDraft d = draft_mechanism(kpa_spec(1, 1.0, 2, {1, 2.5, 3}));
    // Actions: out, 1, 2.5, 3.
    Settlement s = settle(d, {2, 0});
    CHECK(s.alloc == std::vector<double>{1.0, 0.0});
    CHECK(s.pay == std::vector<double>{2.5, 0.0});
  }

  SUBCASE("second-price payment is the losing bid") {
    MechDraft d = draft_mechanism(kpa_spec(2, 0.0, 2, {0, 1, 2, 3}));
    Settlement s = settle(d, {4, 3});  // bids (3, 2)
    CHECK(s.alloc[0] == 1.0);
    CHECK(s.pay[0] == 2.0);
    CHECK(s.pay[1] == 0.0);
  }

  SUBCASE("the reserve-shift witness equates the documented spot payoffs") {
    // Types 9 and 7 are related by the value shift; a lone bid of 2.5 under
    // reserve 1 maps to a lone bid of 4.5 under reserve 3 and both sides
    // pay off 4.5.
    FamilyPair pair = kpa_pair(1, 1.0, 3.0, 2, {1, 2.5, 3}, {7, 9});
    REQUIRE(verify_witness(*pair.x, *pair.xp, pair.witness, 1e-12).ok);
    int t7 = pair.env->type_index(0, "7");
    int t9 = pair.env->type_index(0, "9");
    std::vector<int> lone{pair.x->action_index(0, "2.5"),
                          pair.x->action_index(1, "out")};
    std::vector<int> image{pair.xp->action_index(0, "4.5"),
                           pair.xp->action_index(1, "out")};
    CHECK(expected_utility(*pair.x, 0, t7,
                           MixedProfile::pure(pair.x->profile_index(lone))) == 4.5);
    CHECK(expected_utility(*pair.xp, 0, t9,
                           MixedProfile::pure(pair.xp->profile_index(image))) == 4.5);
  }

  SUBCASE("fewer than k participants fall back to the reserve") {
    MechDraft d = draft_mechanism(kpa_spec(2, 1.5, 2, {1.5, 2, 3}));
    Settlement s = settle(d, {3, 0});  // sole bidder at 3
    CHECK(s.pay[0] == 1.5);
  }
}

TEST_CASE("entry-cost auction payments") {
  FamilySpec s;
  s.family = "kec";
  s.k = 1;
  s.entry_cost = 1.0;
  s.n_agents = 2;
  s.bids = {0, 1, 2, 3};
  MechDraft d = draft_mechanism(s);

  SUBCASE("lone entrant pays bid plus cost") {
    Settlement out = settle(d, {4, 0});  // (3, out)
    CHECK(out.pay == std::vector<double>{4.0, 0.0});
  }

  SUBCASE("losing entrants pay the cost alone") {
    Settlement out = settle(d, {4, 3});  // (3, 2)
    CHECK(out.alloc == std::vector<double>{1.0, 0.0});
    CHECK(out.pay == std::vector<double>{4.0, 1.0});
  }

  SUBCASE("zero-cost entry auctions coincide with zero-reserve auctions") {
    FamilySpec free = s;
    free.entry_cost = 0.0;
    free.k = 2;
    MechDraft ec = draft_mechanism(free);
    MechDraft pa = draft_mechanism(kpa_spec(2, 0.0, 2, {0, 1, 2, 3}));
    REQUIRE(ec.rule.size() == pa.rule.size());
    for (size_t p = 0; p < ec.rule.size(); ++p) {
      REQUIRE(ec.rule[p].size() == pa.rule[p].size());
      for (size_t j = 0; j < ec.rule[p].size(); ++j) {
        CHECK(ec.rule[p][j].first.label() == pa.rule[p][j].first.label());
        CHECK(ec.rule[p][j].second == pa.rule[p][j].second);
      }
    }
  }
}

TEST_CASE("intermediate-price and all-pay rules") {
  SUBCASE("the 1.5-price winner pays the mean of the top two bids") {
    FamilySpec s;
    s.family = "one_half_price";
    s.n_agents = 2;
    s.bids = {0, 1, 2, 3, 4};
    MechDraft d = draft_mechanism(s);
    Settlement out = settle(d, {5, 3});  // bids (4, 2)
    CHECK(out.pay[0] == 3.0);
    Settlement sole = settle(d, {5, 0});
    CHECK(sole.pay[0] == 4.0);
  }

  SUBCASE("everyone pays her bid in the base all-pay auction") {
    FamilySpec s;
    s.family = "all_pay_translated";
    s.n_agents = 2;
    s.bids = {0, 1, 2, 3, 4};
    MechDraft d = draft_mechanism(s);
    Settlement out = settle(d, {5, 3});  // bids (4, 2)
    CHECK(out.alloc == std::vector<double>{1.0, 0.0});
    CHECK(out.pay == std::vector<double>{4.0, 2.0});
  }

  SUBCASE("a downward translation charges losers above their label") {
    // Base bids in [3, 5] translated down by 2: labels 1..3, losers charged
    // label + 2 rather than their label.
    FamilySpec s;
    s.family = "all_pay_translated";
    s.n_agents = 2;
    s.reserve = 3.0;
    s.bids = {3, 4, 5};
    s.shift = -2.0;
    MechDraft d = draft_mechanism(s);
    CHECK(d.action_sets[0] == std::vector<std::string>{"out", "1", "2", "3"});
    Settlement out = settle(d, {3, 1});  // labels (3, 1)
    CHECK(out.pay[0] == 3.0);            // winner pays her label
    CHECK(out.pay[1] == 3.0);            // loser at label 1 pays 1 + 2, not 1
  }

  SUBCASE("translated members stay strategically analogous to the base") {
    FamilyPair pair = all_pay_pair(2, {0, 1, 2}, 0.0, 2.0, {5, 7});
    WitnessReport report = verify_witness(*pair.x, *pair.xp, pair.witness, 0.0);
    CHECK(report.ok);
    CHECK(report.worst_gap == 0.0);
  }
}

TEST_CASE("scoring auctions") {
  SUBCASE("linear scores pick the cheap high-quality seller") {
    FamilySpec s;
    s.family = "scoring_linear";
    s.n_agents = 2;
    s.weight = 0.5;
    s.quality = {1.0, 2.0};
    s.bids_each = {{3}, {5}};
    MechDraft d = draft_mechanism(s);
    // Scores: -0.5*3 + 0.5*1 = -1.0 and -0.5*5 + 0.5*2 = -1.5.
    Settlement out = settle(d, {0, 0});
    CHECK(out.alloc == std::vector<double>{1.0, 0.0});
    CHECK(out.pay[0] == 3.0);
  }

  SUBCASE("the linear witness shifts bids by quality-weighted amounts") {
    FamilyPair pair = scoring_linear_pair(0.5, 0.25, {1.0, 2.0},
                                          {{2, 3, 4}, {3, 5, 7}},
                                          {{4, 5}, {6, 8}});
    WitnessReport report = verify_witness(*pair.x, *pair.xp, pair.witness, 1e-12);
    CHECK(report.ok);
    // Seller 1 shifts by (1/0.25 - 1/0.5)*1 = 2, seller 2 by 4.
    int b2 = pair.x->action_index(0, "2");
    CHECK(pair.xp->action_sets[0][pair.witness.alpha[0][b2]] == "4");
    int b3 = pair.x->action_index(1, "3");
    CHECK(pair.xp->action_sets[1][pair.witness.alpha[1][b3]] == "7");
  }

  SUBCASE("ratio scores can exclude a low-quality seller outright") {
    FamilySpec s;
    s.family = "scoring_ratio";
    s.n_agents = 2;
    s.quality = {2.0, 1.0};
    s.bids = {1, 2, 4};
    s.weight = 0.25;
    MechDraft low = draft_mechanism(s);
    s.weight = 0.75;
    MechDraft high = draft_mechanism(s);

    bool seller2_wins_low = false, seller2_wins_high = false;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        seller2_wins_low = seller2_wins_low || settle(low, {a, b}).alloc[1] > 0.0;
        seller2_wins_high = seller2_wins_high || settle(high, {a, b}).alloc[1] > 0.0;
      }
    }
    CHECK_FALSE(seller2_wins_low);
    CHECK(seller2_wins_high);
  }
}

TEST_CASE("capacity pricing mechanisms") {
  SUBCASE("overdemand is rationed proportionally") {
    FamilySpec s;
    s.family = "input_pricing";
    s.n_agents = 2;
    s.efficacy = 1.0;
    s.tariff = Tariff::power(1.0, 2.0);
    s.bids = {0, 0.5, 1};
    MechDraft d = draft_mechanism(s);
    const auto& y = d.rule[MixedRadix({3, 3}).index(std::vector<int>{2, 2})][0].first;
    CHECK(y.quantities == std::vector<double>{0.5, 0.5});
    CHECK(y.payments == std::vector<double>{0.25, 0.25});

    // Capacity feasibility across every profile.
    for (const auto& lot : d.rule) {
      for (const auto& [out, p] : lot) {
        double total = 0.0;
        for (double q : out.quantities) total += q;
        CHECK(total <= 1.0 + 1e-12);
      }
    }
  }

  SUBCASE("the input witness equates payoffs at the documented spot") {
    FamilyPair pair = input_pricing_pair(1.0, 2.0, Tariff::power(1.0, 2.0), 0.5, 2,
                                         {0, 0.5, 1}, {1.0, std::sqrt(2.0)});
    WitnessReport report = verify_witness(*pair.x, *pair.xp, pair.witness, 1e-12);
    CHECK(report.ok);

    // Requests (0.5, 0.5) under doubled efficacy: value theta*sqrt(1) minus
    // the 0.25 capacity charge.
    int theta1 = pair.env->type_index(0, curve_type(1.0, 0.5).label);
    std::vector<int> both{pair.xp->action_index(0, "0.5"), pair.xp->action_index(1, "0.5")};
    double u = expected_utility(*pair.xp, 0, theta1,
                                MixedProfile::pure(pair.xp->profile_index(both)));
    CHECK(u == doctest::Approx(1.0 - 0.25).epsilon(1e-12));
  }

  SUBCASE("the isoelastic output witness verifies numerically") {
    FamilyPair pair = output_pricing_pair(1.0, 2.0, 2.0, 1.5, 0.5, 2, {0, 0.5, 1},
                                          {2.0, 4.0});
    WitnessReport report = verify_witness(*pair.x, *pair.xp, pair.witness, 1e-12);
    CHECK(report.ok);
    CHECK(pair.witness.kappa[0][0] == doctest::Approx(std::pow(2.0, 1.5)));
  }

  SUBCASE("tariff regularity is enforced") {
    CHECK_THROWS_AS(Tariff::power(1.0, 1.0).check_regular(), RegularityError);
    CHECK_THROWS_AS(Tariff::poly({1.0}).check_regular(), RegularityError);
    CHECK_NOTHROW(Tariff::poly({1.0, 1.0}).check_regular());
    CHECK(Tariff::poly({1.0, 1.0})(2.0) == 6.0);  // x + x^2 at 2
  }
}

TEST_CASE("standard-auction axioms hold on every profile") {
  std::vector<FamilySpec> specs;
  specs.push_back(kpa_spec(1, 1.0, 2, {1, 2, 3}));
  specs.push_back(kpa_spec(2, 0.0, 2, {0, 1, 2}));
  FamilySpec ec;
  ec.family = "kec";
  ec.k = 2;
  ec.entry_cost = 1.0;
  ec.n_agents = 2;
  ec.bids = {0, 1, 2};
  specs.push_back(ec);
  FamilySpec half;
  half.family = "one_half_price";
  half.n_agents = 2;
  half.bids = {1, 2, 3};
  half.reserve = 1.0;
  specs.push_back(half);

  for (const FamilySpec& spec : specs) {
    CAPTURE(spec.family);
    MechDraft d = draft_mechanism(spec);
    int n_actions = static_cast<int>(d.action_sets[0].size());
    for (int a = 0; a < n_actions; ++a) {
      for (int b = 0; b < n_actions; ++b) {
        Settlement s = settle(d, {a, b});
        // Nonparticipation wins nothing and pays nothing.
        if (d.action_sets[0][a] == "out") {
          CHECK(s.alloc[0] == 0.0);
          CHECK(s.pay[0] == 0.0);
        }
        // Payments are nonnegative and symmetric under relabeling.
        CHECK(s.pay[0] >= 0.0);
        CHECK(s.pay[1] >= 0.0);
        Settlement swapped = settle(d, {b, a});
        CHECK(s.pay[0] == swapped.pay[1]);
        CHECK(s.alloc[0] == swapped.alloc[1]);
        // The winner, if any, is a highest participating bidder.
        if (a > 0 || b > 0) {
          double top = -1e300;
          if (a > 0) top = std::max(top, std::stod(d.action_sets[0][a]));
          if (b > 0) top = std::max(top, std::stod(d.action_sets[1][b]));
          if (s.alloc[0] > 0) CHECK(std::stod(d.action_sets[0][a]) == top);
          if (s.alloc[1] > 0) CHECK(std::stod(d.action_sets[1][b]) == top);
          if (a > 0 && b > 0 && d.action_sets[0][a] == d.action_sets[1][b]) {
            CHECK(s.alloc[0] == 0.5);  // uniform tie-breaking
          }
        }
      }
    }
  }
}

TEST_CASE("intermediate-price reserves translate like kth-price ones") {
  // The 1.5-price payment rule satisfies pay_r(a) = pay_0(a - r) + r, so the
  // reserve-shift witness carries over unchanged.
  FamilySpec lo, hi;
  lo.family = hi.family = "one_half_price";
  lo.n_agents = hi.n_agents = 2;
  lo.reserve = 1.0;
  lo.bids = {1, 2, 3};
  hi.reserve = 3.0;
  hi.bids = {3, 4, 5};
  std::vector<std::vector<TypePoint>> grids(2, scalar_grid({3, 5, 7}));
  Assembled a = assemble(std::move(grids), UtilityFamily::kValueAuction,
                         {draft_mechanism(lo), draft_mechanism(hi)});
  AnalogyWitness w = witness_kpa(*a.mechs[0], *a.mechs[1], 1.0, 3.0);
  WitnessReport r = verify_witness(*a.mechs[0], *a.mechs[1], w, 1e-12);
  CHECK(r.ok);
  CHECK(r.worst_gap == 0.0);
}

TEST_CASE("first tie-breaking is deterministic") {
  FamilySpec s = kpa_spec(1, 0.0, 2, {0, 1});
  s.tie = "first";
  MechDraft d = draft_mechanism(s);
  Settlement out = settle(d, {2, 2});
  CHECK(out.alloc == std::vector<double>{1.0, 0.0});
}

TEST_CASE("grid closure failures are loud") {
  // Posted-price types not closed under the shift.
  FamilySpec a, b;
  a.family = b.family = "posted_price";
  a.n_agents = b.n_agents = 1;
  a.price = 3.0;
  b.price = 5.0;
  a.types = b.types = {0.0, 1.0};  // no point has a partner two lower
  std::vector<std::vector<TypePoint>> grids{scalar_grid({0.0, 1.0})};
  Assembled asm_ = assemble(std::move(grids), UtilityFamily::kValueAuction,
                            {draft_mechanism(a), draft_mechanism(b)});
  CHECK_THROWS_AS(witness_posted_price(*asm_.mechs[0], *asm_.mechs[1], 3.0, 5.0),
                  GridError);

  // Bid grids not related by the required translation.
  FamilySpec r1 = kpa_spec(1, 1.0, 2, {1, 2, 3});
  FamilySpec r3 = kpa_spec(1, 3.0, 2, {3, 4, 6});
  std::vector<std::vector<TypePoint>> g2(2, scalar_grid({5, 7, 3}));
  CHECK_THROWS_AS(
      [&] {
        std::vector<std::vector<TypePoint>> gg(2, scalar_grid({3, 5, 7}));
        Assembled pair = assemble(std::move(gg), UtilityFamily::kValueAuction,
                                  {draft_mechanism(r1), draft_mechanism(r3)});
        witness_kpa(*pair.mechs[0], *pair.mechs[1], 1.0, 3.0);
      }(),
      GridError);

  // Entry-cost witnesses need strictly positive costs on both sides.
  FamilyPair ok = kec_pair(1, 1.0, 2.0, 2, {0, 1}, {6});
  CHECK_THROWS_AS(witness_kec(*ok.x, *ok.xp, 0.0, 2.0), InvalidInputError);
}

TEST_CASE("family parameter validation") {
  FamilySpec s;
  s.family = "scoring_linear";
  s.n_agents = 2;
  s.quality = {1.0, 2.0};
  s.bids = {1, 2};
  s.weight = 1.0;
  CHECK_THROWS_AS(s.validate(), InvalidInputError);
  s.weight = 0.5;
  CHECK_NOTHROW(s.validate());
  s.quality = {1.0, -2.0};
  CHECK_THROWS_AS(s.validate(), InvalidInputError);

  FamilySpec ratio;
  ratio.family = "scoring_ratio";
  ratio.n_agents = 2;
  ratio.quality = {1.0, 2.0};
  ratio.weight = 0.5;
  ratio.bids = {0, 1};  // zero bid is not allowed in the ratio family
  CHECK_THROWS_AS(ratio.validate(), InvalidInputError);

  CHECK_THROWS_AS(kpa_spec(3, 0.0, 2, {0, 1}).validate(), InvalidInputError);
  CHECK_THROWS_AS(kpa_spec(1, 2.0, 2, {1, 2}).validate(), InvalidInputError);
}

TEST_CASE("reserve price solver") {
  SUBCASE("uniform values cross at one half") {
    int n = 100000;
    GridPrior prior;
    for (int i = 0; i < n; ++i) {
      double v = static_cast<double>(i) / (n - 1);
      prior.v.push_back(v);
      prior.pdf.push_back(1.0);
      prior.cdf.push_back(v);
    }
    CHECK(optimal_reserve(prior) == doctest::Approx(0.5).epsilon(1e-6));
  }

  SUBCASE("a point mass pins the reserve at its atom") {
    GridPrior prior;
    for (int i = 0; i <= 100; ++i) {
      double v = static_cast<double>(i) / 50.0;  // 0..2
      prior.v.push_back(v);
      prior.pdf.push_back(v == 1.5 ? 50.0 : 0.0);
      prior.cdf.push_back(v >= 1.5 ? 1.0 : 0.0);
    }
    CHECK(optimal_reserve(prior) == doctest::Approx(1.5));
  }

  SUBCASE("unit-rate exponential tails cross at one") {
    GridPrior prior;
    for (int i = 0; i <= 5000; ++i) {
      double v = static_cast<double>(i) / 1000.0;
      prior.v.push_back(v);
      prior.pdf.push_back(std::exp(-v));
      prior.cdf.push_back(1.0 - std::exp(-v));
    }
    CHECK(optimal_reserve(prior) == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("non-monotone virtual values are rejected") {
    GridPrior prior;
    prior.v = {1.0, 2.0, 3.0};
    prior.pdf = {0.45, 0.1, 0.45};
    prior.cdf = {0.45, 0.55, 1.0};
    CHECK_THROWS_AS(optimal_reserve(prior), RegularityError);
  }
}

TEST_CASE("equal posted prices admit the identity witness") {
  FamilyPair pair = posted_price_pair(3.0, 3.0, {0, 1, 2, 3});
  for (const auto& [d, s] : pair.witness.tau[0].pairs) CHECK(d == s);
  CHECK(pair.witness.alpha[0] == std::vector<int>{0, 1});
  CHECK(verify_witness(*pair.x, *pair.xp, pair.witness, 0.0).ok);
}

TEST_CASE("fpa and dutch clocks settle identically on the documented profile") {
  EquivalencePair pair = fpa_dutch_pair(10.0, 2.0, 2, {0, 2, 4, 6, 8, 10}, {3, 5});
  // The clock map sends a bid to the stop time at that price: 4 -> 3 and
  // the ceiling bid stops immediately.
  int bid4 = pair.x->action_index(0, "4");
  int bid10 = pair.x->action_index(0, "10");
  CHECK(pair.xp->action_sets[0][pair.witness.alpha[0][bid4]] == "3");
  CHECK(pair.xp->action_sets[0][pair.witness.alpha[0][bid10]] == "0");
  int t5 = pair.env->type_index(0, "5");
  int t3 = pair.env->type_index(1, "3");
  std::vector<int> bids{pair.x->action_index(0, "4"), pair.x->action_index(1, "2")};
  std::vector<int> stops{pair.xp->action_index(0, "3"), pair.xp->action_index(1, "4")};
  MixedProfile pb = MixedProfile::pure(pair.x->profile_index(bids));
  MixedProfile ps = MixedProfile::pure(pair.xp->profile_index(stops));
  CHECK(expected_utility(*pair.x, 0, t5, pb) == 1.0);
  CHECK(expected_utility(*pair.xp, 0, t5, ps) == 1.0);
  CHECK(expected_utility(*pair.x, 1, t3, pb) == 0.0);
  CHECK(expected_utility(*pair.xp, 1, t3, ps) == 0.0);
}
