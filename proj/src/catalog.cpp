#include "strana/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "strana/text.hpp"

namespace strana {

namespace {

constexpr double kMatchTol = 1e-12;

void check_increasing(const std::vector<double>& xs, const std::string& what) {
  if (xs.empty()) throw InvalidInputError(what + " grid is empty");
  for (size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) {
      throw InvalidInputError(what + " grid is not strictly increasing");
    }
  }
}

}  // namespace

double Tariff::operator()(double x) const {
  if (kind == Kind::kPower) return scale * std::pow(x, exponent);
  double acc = 0.0;
  for (size_t j = 0; j < coeffs.size(); ++j) acc += coeffs[j] * std::pow(x, double(j + 1));
  return acc;
}

void Tariff::check_regular() const {
  if (kind == Kind::kPower) {
    if (!(scale > 0.0)) throw RegularityError("tariff scale must be positive");
    if (!(exponent > 1.0)) {
      throw RegularityError("power tariff needs exponent > 1 for strict convexity");
    }
    return;
  }
  if (coeffs.empty()) throw RegularityError("polynomial tariff has no terms");
  bool increasing = false, convex = false;
  for (size_t j = 0; j < coeffs.size(); ++j) {
    if (coeffs[j] < 0.0) {
      throw RegularityError("polynomial tariff has a negative coefficient");
    }
    if (coeffs[j] > 0.0) {
      increasing = true;
      if (j >= 1) convex = true;
    }
  }
  if (!increasing) throw RegularityError("tariff is not strictly increasing");
  if (!convex) throw RegularityError("tariff is not strictly convex");
}

std::string Tariff::describe() const {
  if (kind == Kind::kPower) {
    return "P(x) = " + format_double(scale) + "*x^" + format_double(exponent);
  }
  std::string out = "P(x) =";
  bool first = true;
  for (size_t j = 0; j < coeffs.size(); ++j) {
    if (coeffs[j] == 0.0) continue;
    out += first ? " " : " + ";
    first = false;
    out += format_double(coeffs[j]) + "*x^" + std::to_string(j + 1);
  }
  return out;
}

Tariff Tariff::power(double scale, double exponent) {
  Tariff t;
  t.kind = Kind::kPower;
  t.scale = scale;
  t.exponent = exponent;
  return t;
}

Tariff Tariff::poly(std::vector<double> coeffs) {
  Tariff t;
  t.kind = Kind::kPoly;
  t.coeffs = std::move(coeffs);
  return t;
}

void FamilySpec::validate() const {
  if (n_agents < 1) throw InvalidInputError("agent count must be positive");
  if (tie != "uniform" && tie != "first") {
    throw InvalidInputError("unknown tie rule '" + tie + "'");
  }
  auto bid_grids = [&]() -> std::vector<std::vector<double>> {
    if (!bids_each.empty()) {
      if (static_cast<int>(bids_each.size()) != n_agents) {
        throw InvalidInputError("per-agent bid grid count mismatch");
      }
      return bids_each;
    }
    return std::vector<std::vector<double>>(n_agents, bids);
  };

  if (family == "posted_price") {
    if (n_agents != 1) throw InvalidInputError("posted price is a one-agent family");
  } else if (family == "fpa") {
    check_increasing(bids, "bid");
    if (!(bbar > 0.0)) throw InvalidInputError("clock ceiling must be positive");
    if (bids.front() < 0.0 || bids.back() > bbar) {
      throw InvalidInputError("bids must lie in [0, bbar]");
    }
  } else if (family == "dutch") {
    check_increasing(bids, "stop-time");
    if (!(bbar > 0.0) || !(rate > 0.0)) {
      throw InvalidInputError("clock ceiling and rate must be positive");
    }
    if (bids.front() < 0.0 || bids.back() > bbar / rate) {
      throw InvalidInputError("stop times must lie in [0, bbar/rate]");
    }
  } else if (family == "kpa" || family == "one_half_price") {
    check_increasing(bids, "bid");
    if (reserve < 0.0) throw InvalidInputError("reserve must be nonnegative");
    if (bids.front() < reserve - kMatchTol) {
      throw InvalidInputError("active bids must be at least the reserve");
    }
    if (family == "kpa" && (k < 1 || k > n_agents)) {
      throw InvalidInputError("price index k must lie in [1, n]");
    }
  } else if (family == "kec") {
    check_increasing(bids, "bid");
    if (entry_cost < 0.0) throw InvalidInputError("entry cost must be nonnegative");
    if (bids.front() < 0.0) throw InvalidInputError("bids must be nonnegative");
    if (k < 1 || k > n_agents) throw InvalidInputError("price index k must lie in [1, n]");
  } else if (family == "all_pay_translated") {
    check_increasing(bids, "base bid");
    if (bids.front() < reserve - kMatchTol) {
      throw InvalidInputError("base bids must be at least the base reserve");
    }
    if (bids.front() + shift < 0.0) {
      throw InvalidInputError("translated bids must stay nonnegative");
    }
  } else if (family == "scoring_linear" || family == "scoring_ratio") {
    if (!(weight > 0.0) || !(weight < 1.0)) {
      throw InvalidInputError("score weight must lie in (0, 1)");
    }
    if (static_cast<int>(quality.size()) != n_agents) {
      throw InvalidInputError("quality score count mismatch");
    }
    for (double q : quality) {
      if (!(q > 0.0)) throw InvalidInputError("quality scores must be positive");
    }
    for (const auto& g : bid_grids()) {
      check_increasing(g, "bid");
      if (family == "scoring_ratio" && !(g.front() > 0.0)) {
        throw InvalidInputError("ratio-score bids must be strictly positive");
      }
    }
  } else if (family == "input_pricing" || family == "output_pricing") {
    check_increasing(bids, "request");
    if (!(efficacy > 0.0)) throw InvalidInputError("efficacy must be positive");
    tariff.check_regular();
    double cap = family == "input_pricing" ? 1.0 : efficacy;
    if (bids.front() < 0.0 || bids.back() > cap + kMatchTol) {
      throw InvalidInputError("requests must lie in [0, " + format_double(cap) + "]");
    }
    if (!(gamma > 0.0) || gamma > 1.0) {
      throw InvalidInputError("curve power must lie in (0, 1]");
    }
  } else {
    throw InvalidInputError("unknown family '" + family + "'");
  }
}

std::string StructOutcome::label() const {
  std::string out = "w=";
  out += winner ? std::to_string(*winner) : std::string("-");
  out += ";p=" + format_list(payments);
  if (!quantities.empty()) out += ";q=" + format_list(quantities);
  return out;
}

TypePoint scalar_type(double value) {
  TypePoint t;
  t.label = format_double(value);
  t.value = value;
  return t;
}

TypePoint curve_type(double theta, double gamma) {
  TypePoint t;
  t.label = "th=" + format_double(theta) + ";g=" + format_double(gamma);
  t.fn = PowerFn{theta, gamma};
  return t;
}

std::vector<TypePoint> scalar_grid(const std::vector<double>& values) {
  std::vector<TypePoint> grid;
  for (double v : values) grid.push_back(scalar_type(v));
  return grid;
}

std::vector<TypePoint> curve_grid(const std::vector<double>& thetas, double gamma) {
  std::vector<TypePoint> grid;
  for (double th : thetas) grid.push_back(curve_type(th, gamma));
  return grid;
}

namespace {

using OptBid = std::optional<double>;

std::vector<int> top_bidders(const std::vector<OptBid>& bids, bool lowest) {
  std::vector<int> best;
  for (size_t i = 0; i < bids.size(); ++i) {
    if (!bids[i]) continue;
    if (best.empty() || (lowest ? *bids[i] < *bids[best[0]] : *bids[i] > *bids[best[0]])) {
      best.assign(1, static_cast<int>(i));
    } else if (*bids[i] == *bids[best[0]]) {
      best.push_back(static_cast<int>(i));
    }
  }
  return best;
}

// kth-highest participating bid, zero when fewer than k participate.
double kth_highest(const std::vector<OptBid>& bids, int k) {
  std::vector<double> active;
  for (const OptBid& b : bids) {
    if (b) active.push_back(*b);
  }
  if (static_cast<int>(active.size()) < k) return 0.0;
  std::sort(active.rbegin(), active.rend());
  return active[k - 1];
}

using OutcomeLottery = std::vector<std::pair<StructOutcome, double>>;

OutcomeLottery winner_lottery(const std::vector<int>& winners, const std::string& tie,
                              const std::function<StructOutcome(int)>& outcome_of) {
  if (tie == "first") return {{outcome_of(winners.front()), 1.0}};
  OutcomeLottery lot;
  double p = 1.0 / static_cast<double>(winners.size());
  for (int w : winners) lot.emplace_back(outcome_of(w), p);
  return lot;
}

StructOutcome null_outcome(int n) {
  StructOutcome y;
  y.payments.assign(n, 0.0);
  return y;
}

// Shared skeleton for the bid-profile families: enumerates profiles and
// delegates the outcome lottery to `rule`.
MechDraft draft_from_values(
    const std::string& name, const std::vector<std::vector<std::string>>& labels,
    const std::vector<std::vector<OptBid>>& values,
    const std::function<OutcomeLottery(const std::vector<OptBid>&)>& rule) {
  MechDraft draft;
  draft.name = name;
  draft.action_sets = labels;
  std::vector<int> sizes;
  for (const auto& set : labels) sizes.push_back(static_cast<int>(set.size()));
  MixedRadix radix(sizes);
  std::vector<int> digits;
  std::vector<OptBid> profile(labels.size());
  for (long long p = 0; p < radix.total; ++p) {
    radix.decode(p, digits);
    for (size_t i = 0; i < labels.size(); ++i) profile[i] = values[i][digits[i]];
    draft.rule.push_back(rule(profile));
  }
  return draft;
}

std::vector<std::vector<std::string>> bid_labels(
    const std::vector<std::vector<double>>& grids, bool with_out) {
  std::vector<std::vector<std::string>> labels(grids.size());
  for (size_t i = 0; i < grids.size(); ++i) {
    if (with_out) labels[i].push_back("out");
    for (double b : grids[i]) labels[i].push_back(format_double(b));
  }
  return labels;
}

std::vector<std::vector<OptBid>> bid_values(const std::vector<std::vector<double>>& grids,
                                            bool with_out) {
  std::vector<std::vector<OptBid>> values(grids.size());
  for (size_t i = 0; i < grids.size(); ++i) {
    if (with_out) values[i].push_back(std::nullopt);
    for (double b : grids[i]) values[i].push_back(b);
  }
  return values;
}

}  // namespace

MechDraft draft_mechanism(const FamilySpec& spec) {
  spec.validate();
  const int n = spec.n_agents;
  std::vector<std::vector<double>> grids =
      spec.bids_each.empty() ? std::vector<std::vector<double>>(n, spec.bids)
                             : spec.bids_each;

  if (spec.family == "posted_price") {
    MechDraft draft;
    draft.name = "posted_price(" + format_double(spec.price) + ")";
    draft.action_sets = {{"buy", "pass"}};
    StructOutcome buy;
    buy.winner = 0;
    buy.payments = {spec.price};
    draft.rule = {{{buy, 1.0}}, {{null_outcome(1), 1.0}}};
    return draft;
  }

  if (spec.family == "fpa") {
    auto rule = [n, &spec](const std::vector<OptBid>& bids) -> OutcomeLottery {
      std::vector<int> winners = top_bidders(bids, false);
      return winner_lottery(winners, spec.tie, [&](int w) {
        StructOutcome y = null_outcome(n);
        y.winner = w;
        y.payments[w] = *bids[w];
        return y;
      });
    };
    return draft_from_values("fpa(" + format_double(spec.bbar) + ")",
                             bid_labels(grids, false), bid_values(grids, false), rule);
  }

  if (spec.family == "dutch") {
    double bbar = spec.bbar, rate = spec.rate;
    auto rule = [n, bbar, rate, &spec](const std::vector<OptBid>& stops) -> OutcomeLottery {
      std::vector<int> winners = top_bidders(stops, true);
      return winner_lottery(winners, spec.tie, [&](int w) {
        StructOutcome y = null_outcome(n);
        y.winner = w;
        y.payments[w] = bbar - rate * *stops[w];
        return y;
      });
    };
    return draft_from_values(
        "dutch(" + format_double(spec.bbar) + "," + format_double(spec.rate) + ")",
        bid_labels(grids, false), bid_values(grids, false), rule);
  }

  if (spec.family == "kpa") {
    int k = spec.k;
    double r = spec.reserve;
    auto rule = [n, k, r, &spec](const std::vector<OptBid>& bids) -> OutcomeLottery {
      std::vector<int> winners = top_bidders(bids, false);
      if (winners.empty()) return {{null_outcome(n), 1.0}};
      double pay = std::max(kth_highest(bids, k), r);
      return winner_lottery(winners, spec.tie, [&](int w) {
        StructOutcome y = null_outcome(n);
        y.winner = w;
        y.payments[w] = pay;
        return y;
      });
    };
    return draft_from_values(
        std::to_string(k) + "pa(" + format_double(spec.reserve) + ")",
        bid_labels(grids, true), bid_values(grids, true), rule);
  }

  if (spec.family == "kec") {
    int k = spec.k;
    double c = spec.entry_cost;
    auto rule = [n, k, c, &spec](const std::vector<OptBid>& bids) -> OutcomeLottery {
      std::vector<int> winners = top_bidders(bids, false);
      if (winners.empty()) return {{null_outcome(n), 1.0}};
      double kth = kth_highest(bids, k);
      return winner_lottery(winners, spec.tie, [&](int w) {
        StructOutcome y = null_outcome(n);
        y.winner = w;
        for (int i = 0; i < n; ++i) {
          if (bids[i]) y.payments[i] = c;
        }
        y.payments[w] += kth;
        return y;
      });
    };
    return draft_from_values(
        std::to_string(k) + "ec(" + format_double(spec.entry_cost) + ")",
        bid_labels(grids, true), bid_values(grids, true), rule);
  }

  if (spec.family == "one_half_price") {
    auto rule = [n, &spec](const std::vector<OptBid>& bids) -> OutcomeLottery {
      std::vector<int> winners = top_bidders(bids, false);
      if (winners.empty()) return {{null_outcome(n), 1.0}};
      int participants = 0;
      for (const OptBid& b : bids) participants += b.has_value();
      double pay = participants >= 2
                       ? 0.5 * (kth_highest(bids, 1) + kth_highest(bids, 2))
                       : kth_highest(bids, 1);
      return winner_lottery(winners, spec.tie, [&](int w) {
        StructOutcome y = null_outcome(n);
        y.winner = w;
        y.payments[w] = pay;
        return y;
      });
    };
    return draft_from_values("1.5pa(" + format_double(spec.reserve) + ")",
                             bid_labels(grids, true), bid_values(grids, true), rule);
  }

  if (spec.family == "all_pay_translated") {
    double shift = spec.shift;
    std::vector<std::vector<double>> shifted(grids.size());
    for (size_t i = 0; i < grids.size(); ++i) {
      for (double b : grids[i]) shifted[i].push_back(b + shift);
    }
    // Winner pays her label; a losing participant pays label minus the
    // translation, so payoffs line up with the base member under the
    // canonical bid/value shifts.
    auto rule = [n, shift, &spec](const std::vector<OptBid>& bids) -> OutcomeLottery {
      std::vector<int> winners = top_bidders(bids, false);
      if (winners.empty()) return {{null_outcome(n), 1.0}};
      return winner_lottery(winners, spec.tie, [&](int w) {
        StructOutcome y = null_outcome(n);
        y.winner = w;
        for (int i = 0; i < n; ++i) {
          if (bids[i]) y.payments[i] = i == w ? *bids[i] : *bids[i] - shift;
        }
        return y;
      });
    };
    return draft_from_values("all_pay(shift=" + format_double(shift) + ")",
                             bid_labels(shifted, true), bid_values(shifted, true), rule);
  }

  if (spec.family == "scoring_linear" || spec.family == "scoring_ratio") {
    bool ratio = spec.family == "scoring_ratio";
    double weight = spec.weight;
    std::vector<double> quality = spec.quality;
    auto rule = [n, ratio, weight, quality, &spec](
                    const std::vector<OptBid>& bids) -> OutcomeLottery {
      std::vector<OptBid> scores(n);
      double lowest = 0.0;
      if (ratio) {
        lowest = **std::min_element(bids.begin(), bids.end(),
                                    [](const OptBid& a, const OptBid& b) {
                                      return *a < *b;
                                    });
      }
      for (int i = 0; i < n; ++i) {
        double price_score = ratio ? lowest / *bids[i] : -*bids[i];
        scores[i] = weight * price_score + (1.0 - weight) * quality[i];
      }
      std::vector<int> winners = top_bidders(scores, false);
      return winner_lottery(winners, spec.tie, [&](int w) {
        StructOutcome y = null_outcome(n);
        y.winner = w;
        y.payments[w] = *bids[w];
        return y;
      });
    };
    return draft_from_values(
        (ratio ? "ratio_score(" : "linear_score(") + format_double(weight) + ")",
        bid_labels(grids, false), bid_values(grids, false), rule);
  }

  if (spec.family == "input_pricing" || spec.family == "output_pricing") {
    bool input = spec.family == "input_pricing";
    double e = spec.efficacy;
    Tariff tariff = spec.tariff;
    auto rule = [n, input, e, tariff](const std::vector<OptBid>& reqs) -> OutcomeLottery {
      double total = 0.0;
      for (const OptBid& a : reqs) total += *a;
      double cap = input ? 1.0 : e;
      double factor = total > cap ? cap / total : 1.0;
      StructOutcome y;
      y.payments.assign(n, 0.0);
      y.quantities.assign(n, 0.0);
      for (int i = 0; i < n; ++i) {
        double share = *reqs[i] * factor;
        if (input) {
          y.quantities[i] = e * share;  // output delivered per unit capacity
          y.payments[i] = tariff(share);
        } else {
          y.quantities[i] = share;
          y.payments[i] = tariff(share);
        }
      }
      return {{y, 1.0}};
    };
    return draft_from_values(
        (input ? "input_pricing(e=" : "output_pricing(e=") + format_double(e) + ")",
        bid_labels(grids, false), bid_values(grids, false), rule);
  }

  throw InvalidInputError("unknown family '" + spec.family + "'");
}

UtilityFamily utility_family_for(const std::string& family) {
  if (family == "scoring_linear" || family == "scoring_ratio") {
    return UtilityFamily::kProcurement;
  }
  if (family == "input_pricing" || family == "output_pricing") {
    return UtilityFamily::kPricing;
  }
  return UtilityFamily::kValueAuction;
}

Assembled assemble(std::vector<std::vector<TypePoint>> type_grids, UtilityFamily family,
                   std::vector<MechDraft> drafts) {
  std::vector<std::string> agents;
  for (size_t i = 0; i < type_grids.size(); ++i) agents.push_back(std::to_string(i + 1));
  return assemble(std::move(agents), std::move(type_grids), family, std::move(drafts));
}

Assembled assemble(std::vector<std::string> agents,
                   std::vector<std::vector<TypePoint>> type_grids, UtilityFamily family,
                   std::vector<MechDraft> drafts) {
  if (drafts.empty()) throw InvalidInputError("no mechanisms to assemble");
  const int n = static_cast<int>(type_grids.size());

  std::map<std::string, int> outcome_ids;
  std::vector<StructOutcome> outcomes;
  auto intern = [&](const StructOutcome& y) {
    std::string label = y.label();
    auto it = outcome_ids.find(label);
    if (it != outcome_ids.end()) return it->second;
    int id = static_cast<int>(outcomes.size());
    outcome_ids.emplace(std::move(label), id);
    outcomes.push_back(y);
    return id;
  };

  std::vector<std::vector<Lottery>> rules(drafts.size());
  for (size_t m = 0; m < drafts.size(); ++m) {
    for (const auto& lot : drafts[m].rule) {
      std::map<int, double> acc;
      for (const auto& [y, p] : lot) acc[intern(y)] += p;
      Lottery l;
      l.mass.assign(acc.begin(), acc.end());
      rules[m].push_back(std::move(l));
    }
  }

  auto env = std::make_shared<Environment>();
  env->agents = std::move(agents);
  env->type_grids = std::move(type_grids);
  for (const StructOutcome& y : outcomes) env->outcomes.push_back(y.label());

  env->utility.resize(n);
  for (int i = 0; i < n; ++i) {
    env->utility[i].resize(env->type_grids[i].size());
    for (size_t t = 0; t < env->type_grids[i].size(); ++t) {
      const TypePoint& tp = env->type_grids[i][t];
      auto& row = env->utility[i][t];
      row.resize(outcomes.size());
      for (size_t y = 0; y < outcomes.size(); ++y) {
        const StructOutcome& out = outcomes[y];
        switch (family) {
          case UtilityFamily::kValueAuction:
            if (!tp.value) throw InvalidInputError("type needs a scalar value payload");
            row[y] = (out.winner && *out.winner == i ? *tp.value : 0.0) -
                     out.payments[i];
            break;
          case UtilityFamily::kProcurement:
            if (!tp.value) throw InvalidInputError("type needs a scalar cost payload");
            row[y] = out.winner && *out.winner == i ? out.payments[i] - *tp.value : 0.0;
            break;
          case UtilityFamily::kPricing:
            if (!tp.fn) throw InvalidInputError("type needs a curve payload");
            row[y] = (*tp.fn)(out.quantities[i]) - out.payments[i];
            break;
        }
      }
    }
  }
  env->finalize();

  Assembled result;
  result.env = env;
  for (size_t m = 0; m < drafts.size(); ++m) {
    auto mech = std::make_shared<Mechanism>();
    mech->env = env;
    mech->name = drafts[m].name;
    mech->action_sets = drafts[m].action_sets;
    mech->outcome_rule = std::move(rules[m]);
    mech->finalize();
    result.mechs.push_back(std::move(mech));
  }
  return result;
}

std::pair<EnvPtr, MechPtr> make_mechanism(const FamilySpec& spec) {
  spec.validate();
  std::vector<std::vector<TypePoint>> grids;
  if (utility_family_for(spec.family) == UtilityFamily::kPricing) {
    if (spec.thetas.empty()) throw InvalidInputError("pricing families need thetas");
    grids.assign(spec.n_agents, curve_grid(spec.thetas, spec.gamma));
  } else {
    if (spec.types.empty()) throw InvalidInputError("family needs a type grid");
    grids.assign(spec.n_agents, scalar_grid(spec.types));
  }
  Assembled a = assemble(std::move(grids), utility_family_for(spec.family),
                         {draft_mechanism(spec)});
  return {a.env, a.mechs[0]};
}

std::optional<double> action_value(const Mechanism& mech, int agent, int action) {
  const std::string& label = mech.action_sets[agent][action];
  if (label == "out" || label == "buy" || label == "pass") return std::nullopt;
  return std::stod(label);
}

namespace {

int find_action_by_value(const Mechanism& mech, int agent, double target) {
  for (int a = 0; a < mech.num_actions(agent); ++a) {
    auto v = action_value(mech, agent, a);
    if (v && std::abs(*v - target) <= kMatchTol) return a;
  }
  throw GridError("no action with value " + format_double(target) + " for agent '" +
                  mech.env->agents[agent] + "' in mechanism '" + mech.name + "'");
}

int find_action_labelled(const Mechanism& mech, int agent, const std::string& label) {
  for (int a = 0; a < mech.num_actions(agent); ++a) {
    if (mech.action_sets[agent][a] == label) return a;
  }
  throw GridError("mechanism '" + mech.name + "' lacks the '" + label + "' action");
}

std::optional<int> find_scalar_type(const Environment& env, int agent, double target) {
  for (size_t t = 0; t < env.type_grids[agent].size(); ++t) {
    const auto& v = env.type_grids[agent][t].value;
    if (v && std::abs(*v - target) <= kMatchTol) return static_cast<int>(t);
  }
  return std::nullopt;
}

std::optional<int> find_curve_type(const Environment& env, int agent, double theta,
                                   double gamma) {
  for (size_t t = 0; t < env.type_grids[agent].size(); ++t) {
    const auto& fn = env.type_grids[agent][t].fn;
    if (fn && std::abs(fn->theta - theta) <= kMatchTol &&
        std::abs(fn->gamma - gamma) <= kMatchTol) {
      return static_cast<int>(t);
    }
  }
  return std::nullopt;
}

// Maximal-domain tau: pairs every type whose mapped value lands on the grid.
TypeMap tau_by_value(const Environment& env, int agent,
                     const std::function<double(double)>& f) {
  TypeMap tau;
  for (size_t d = 0; d < env.type_grids[agent].size(); ++d) {
    const auto& v = env.type_grids[agent][d].value;
    if (!v) continue;
    if (auto s = find_scalar_type(env, agent, f(*v))) {
      tau.pairs.emplace_back(static_cast<int>(d), *s);
    }
  }
  if (tau.pairs.empty()) {
    throw GridError("type grid of agent '" + env.agents[agent] +
                    "' is not closed under the required map");
  }
  tau.validate(static_cast<int>(env.type_grids[agent].size()));
  return tau;
}

TypeMap tau_by_curve(const Environment& env, int agent,
                     const std::function<double(double, double)>& theta_map) {
  TypeMap tau;
  for (size_t d = 0; d < env.type_grids[agent].size(); ++d) {
    const auto& fn = env.type_grids[agent][d].fn;
    if (!fn) continue;
    if (auto s = find_curve_type(env, agent, theta_map(fn->theta, fn->gamma), fn->gamma)) {
      tau.pairs.emplace_back(static_cast<int>(d), *s);
    }
  }
  if (tau.pairs.empty()) {
    throw GridError("theta grid of agent '" + env.agents[agent] +
                    "' is not closed under the required scaling");
  }
  tau.validate(static_cast<int>(env.type_grids[agent].size()));
  return tau;
}

// Builds alpha by mapping every active bid value through `f` and matching
// the "out" action when the mechanisms have one.
std::vector<std::vector<int>> alpha_by_value(const Mechanism& x, const Mechanism& xp,
                                             const std::function<double(double)>& f) {
  std::vector<std::vector<int>> alpha(x.num_agents());
  for (int i = 0; i < x.num_agents(); ++i) {
    alpha[i].resize(x.num_actions(i));
    for (int a = 0; a < x.num_actions(i); ++a) {
      auto v = action_value(x, i, a);
      alpha[i][a] = v ? find_action_by_value(xp, i, f(*v))
                      : find_action_labelled(xp, i, x.action_sets[i][a]);
    }
  }
  return alpha;
}

AnalogyWitness with_constants(const Mechanism& x, const Mechanism& xp,
                              std::vector<std::vector<int>> alpha,
                              std::vector<TypeMap> tau, double kappa, double lambda) {
  AnalogyWitness w;
  w.alpha = std::move(alpha);
  w.tau = std::move(tau);
  for (const TypeMap& t : w.tau) {
    w.kappa.emplace_back(t.pairs.size(), kappa);
    w.lambda.emplace_back(t.pairs.size(), lambda);
  }
  w.validate(x, xp);
  return w;
}

std::vector<TypeMap> tau_all_agents(const Environment& env,
                                    const std::function<double(double)>& f) {
  std::vector<TypeMap> tau;
  for (int i = 0; i < static_cast<int>(env.agents.size()); ++i) {
    tau.push_back(tau_by_value(env, i, f));
  }
  return tau;
}

}  // namespace

AnalogyWitness witness_posted_price(const Mechanism& x, const Mechanism& xp, double p,
                                    double pp) {
  auto shift = [=](double t) { return t + (p - pp); };
  return with_constants(x, xp, alpha_by_value(x, xp, [](double b) { return b; }),
                        tau_all_agents(*x.env, shift), 1.0, 0.0);
}

EquivalenceWitness witness_fpa_dutch(const Mechanism& fpa, const Mechanism& dutch,
                                     double bbar, double rate) {
  EquivalenceWitness w;
  w.alpha = alpha_by_value(fpa, dutch, [=](double b) { return (bbar - b) / rate; });
  return w;
}

AnalogyWitness witness_kpa(const Mechanism& x, const Mechanism& xp, double r,
                           double rp) {
  double delta = rp - r;
  return with_constants(
      x, xp, alpha_by_value(x, xp, [=](double b) { return b + delta; }),
      tau_all_agents(*x.env, [=](double t) { return t - delta; }), 1.0, 0.0);
}

AnalogyWitness witness_kec(const Mechanism& x, const Mechanism& xp, double c,
                           double cp) {
  if (!(c > 0.0) || !(cp > 0.0)) {
    throw InvalidInputError("entry-cost witnesses need strictly positive costs");
  }
  double ratio = cp / c;
  return with_constants(
      x, xp, alpha_by_value(x, xp, [=](double b) { return b * ratio; }),
      tau_all_agents(*x.env, [=](double t) { return t / ratio; }), ratio, 0.0);
}

AnalogyWitness witness_all_pay_translation(const Mechanism& x, const Mechanism& xp,
                                           double shift_x, double shift_xp) {
  double delta = shift_xp - shift_x;
  return with_constants(
      x, xp, alpha_by_value(x, xp, [=](double b) { return b + delta; }),
      tau_all_agents(*x.env, [=](double t) { return t - delta; }), 1.0, 0.0);
}

AnalogyWitness witness_scoring_linear(const Mechanism& x, const Mechanism& xp,
                                      double weight_x, double weight_xp,
                                      const std::vector<double>& quality) {
  std::vector<std::vector<int>> alpha(x.num_agents());
  std::vector<TypeMap> tau;
  for (int i = 0; i < x.num_agents(); ++i) {
    double shift = (1.0 / weight_xp - 1.0 / weight_x) * quality.at(i);
    alpha[i].resize(x.num_actions(i));
    for (int a = 0; a < x.num_actions(i); ++a) {
      auto v = action_value(x, i, a);
      if (!v) throw GridError("scoring mechanisms have no nonparticipation action");
      alpha[i][a] = find_action_by_value(xp, i, *v + shift);
    }
    tau.push_back(tau_by_value(*x.env, i, [=](double cst) { return cst - shift; }));
  }
  return with_constants(x, xp, std::move(alpha), std::move(tau), 1.0, 0.0);
}

AnalogyWitness witness_input_pricing(const Mechanism& x, const Mechanism& xp, double e,
                                     double ep) {
  double eta = ep / e;
  std::vector<std::vector<int>> alpha(x.num_agents());
  std::vector<TypeMap> tau;
  for (int i = 0; i < x.num_agents(); ++i) {
    alpha[i].resize(x.num_actions(i));
    for (int a = 0; a < x.num_actions(i); ++a) {
      alpha[i][a] = find_action_labelled(xp, i, x.action_sets[i][a]);
    }
    tau.push_back(tau_by_curve(*x.env, i, [=](double theta, double gamma) {
      return theta * std::pow(eta, gamma);
    }));
  }
  return with_constants(x, xp, std::move(alpha), std::move(tau), 1.0, 0.0);
}

AnalogyWitness witness_output_isoelastic(const Mechanism& x, const Mechanism& xp,
                                         double e, double ep, double rho) {
  double eta = ep / e;
  std::vector<std::vector<int>> alpha =
      alpha_by_value(x, xp, [=](double a) { return eta * a; });
  std::vector<TypeMap> tau;
  for (int i = 0; i < x.num_agents(); ++i) {
    tau.push_back(tau_by_curve(*x.env, i, [=](double theta, double gamma) {
      return theta * std::pow(eta, gamma - rho);
    }));
  }
  return with_constants(x, xp, std::move(alpha), std::move(tau), std::pow(eta, rho),
                        0.0);
}

namespace {

std::vector<double> shifted_by(const std::vector<double>& xs, double delta) {
  std::vector<double> out;
  for (double v : xs) out.push_back(v + delta);
  return out;
}

std::vector<double> scaled_by(const std::vector<double>& xs, double factor) {
  std::vector<double> out;
  for (double v : xs) out.push_back(v * factor);
  return out;
}

std::vector<double> merged(std::vector<double> a, const std::vector<double>& b) {
  for (double v : b) {
    bool present = false;
    for (double w : a) present = present || w == v;
    if (!present) a.push_back(v);
  }
  std::sort(a.begin(), a.end());
  return a;
}

}  // namespace

EquivalencePair fpa_dutch_pair(double bbar, double rate, int n,
                               const std::vector<double>& bids,
                               const std::vector<double>& types) {
  FamilySpec fpa;
  fpa.family = "fpa";
  fpa.n_agents = n;
  fpa.bbar = bbar;
  fpa.bids = bids;

  FamilySpec dutch;
  dutch.family = "dutch";
  dutch.n_agents = n;
  dutch.bbar = bbar;
  dutch.rate = rate;
  std::vector<double> stops;
  for (double b : bids) stops.push_back((bbar - b) / rate);
  std::sort(stops.begin(), stops.end());
  dutch.bids = stops;

  std::vector<std::vector<TypePoint>> grids(n, scalar_grid(types));
  Assembled a = assemble(std::move(grids), UtilityFamily::kValueAuction,
                         {draft_mechanism(fpa), draft_mechanism(dutch)});
  EquivalencePair pair;
  pair.env = a.env;
  pair.x = a.mechs[0];
  pair.xp = a.mechs[1];
  pair.witness = witness_fpa_dutch(*pair.x, *pair.xp, bbar, rate);
  pair.provenance =
      "sealed high-bid auction vs descending clock; stopping the clock at the "
      "price one would bid yields identical payoffs";
  return pair;
}

FamilyPair posted_price_pair(double p, double pp, const std::vector<double>& xp_types) {
  FamilySpec a, b;
  a.family = b.family = "posted_price";
  a.n_agents = b.n_agents = 1;
  a.price = p;
  b.price = pp;

  std::vector<double> x_types = shifted_by(xp_types, p - pp);
  std::vector<std::vector<TypePoint>> grids{scalar_grid(merged(x_types, xp_types))};
  Assembled asm_ = assemble(std::move(grids), UtilityFamily::kValueAuction,
                            {draft_mechanism(a), draft_mechanism(b)});
  FamilyPair pair;
  pair.env = asm_.env;
  pair.x = asm_.mechs[0];
  pair.xp = asm_.mechs[1];
  pair.witness = witness_posted_price(*pair.x, *pair.xp, p, pp);
  pair.provenance =
      "posted prices; facing the higher price as value t matches facing the "
      "lower price as value t shifted by the price difference";
  return pair;
}

FamilyPair kpa_pair(int k, double r, double rp, int n, const std::vector<double>& x_bids,
                    const std::vector<double>& xp_types) {
  FamilySpec a, b;
  a.family = b.family = "kpa";
  a.n_agents = b.n_agents = n;
  a.k = b.k = k;
  a.reserve = r;
  a.bids = x_bids;
  b.reserve = rp;
  b.bids = shifted_by(x_bids, rp - r);

  std::vector<double> x_types = shifted_by(xp_types, -(rp - r));
  std::vector<std::vector<TypePoint>> grids(n, scalar_grid(merged(x_types, xp_types)));
  Assembled asm_ = assemble(std::move(grids), UtilityFamily::kValueAuction,
                            {draft_mechanism(a), draft_mechanism(b)});
  FamilyPair pair;
  pair.env = asm_.env;
  pair.x = asm_.mechs[0];
  pair.xp = asm_.mechs[1];
  pair.witness = witness_kpa(*pair.x, *pair.xp, r, rp);
  pair.provenance =
      "kth-price auctions with reserves; shifting active bids up and values "
      "down by the reserve difference preserves allocation and net payoffs";
  return pair;
}

FamilyPair kec_pair(int k, double c, double cp, int n, const std::vector<double>& x_bids,
                    const std::vector<double>& xp_types) {
  FamilySpec a, b;
  a.family = b.family = "kec";
  a.n_agents = b.n_agents = n;
  a.k = b.k = k;
  a.entry_cost = c;
  a.bids = x_bids;
  b.entry_cost = cp;
  b.bids = scaled_by(x_bids, cp / c);

  std::vector<double> x_types = scaled_by(xp_types, c / cp);
  std::vector<std::vector<TypePoint>> grids(n, scalar_grid(merged(x_types, xp_types)));
  Assembled asm_ = assemble(std::move(grids), UtilityFamily::kValueAuction,
                            {draft_mechanism(a), draft_mechanism(b)});
  FamilyPair pair;
  pair.env = asm_.env;
  pair.x = asm_.mechs[0];
  pair.xp = asm_.mechs[1];
  pair.witness = witness_kec(*pair.x, *pair.xp, c, cp);
  pair.provenance =
      "kth-price auctions with entry costs; rescaling bids and values by the "
      "cost ratio preserves participation and scales payoffs by that ratio";
  return pair;
}

FamilyPair all_pay_pair(int n, const std::vector<double>& base_bids, double shift_x,
                        double shift_xp, const std::vector<double>& xp_types) {
  FamilySpec a, b;
  a.family = b.family = "all_pay_translated";
  a.n_agents = b.n_agents = n;
  a.bids = b.bids = base_bids;
  a.shift = shift_x;
  b.shift = shift_xp;

  std::vector<double> x_types = shifted_by(xp_types, -(shift_xp - shift_x));
  std::vector<std::vector<TypePoint>> grids(n, scalar_grid(merged(x_types, xp_types)));
  Assembled asm_ = assemble(std::move(grids), UtilityFamily::kValueAuction,
                            {draft_mechanism(a), draft_mechanism(b)});
  FamilyPair pair;
  pair.env = asm_.env;
  pair.x = asm_.mechs[0];
  pair.xp = asm_.mechs[1];
  pair.witness = witness_all_pay_translation(*pair.x, *pair.xp, shift_x, shift_xp);
  pair.provenance =
      "translated all-pay family; bids and values shift together and losing "
      "participants are charged their label net of the translation";
  return pair;
}

FamilyPair scoring_linear_pair(double weight_x, double weight_xp,
                               const std::vector<double>& quality,
                               const std::vector<std::vector<double>>& x_bids,
                               const std::vector<std::vector<double>>& xp_costs) {
  int n = static_cast<int>(quality.size());
  FamilySpec a, b;
  a.family = b.family = "scoring_linear";
  a.n_agents = b.n_agents = n;
  a.quality = b.quality = quality;
  a.weight = weight_x;
  a.bids_each = x_bids;
  b.weight = weight_xp;
  b.bids_each.resize(n);
  std::vector<std::vector<TypePoint>> grids;
  for (int i = 0; i < n; ++i) {
    double shift = (1.0 / weight_xp - 1.0 / weight_x) * quality[i];
    b.bids_each[i] = shifted_by(x_bids.at(i), shift);
    grids.push_back(scalar_grid(merged(shifted_by(xp_costs.at(i), -shift), xp_costs.at(i))));
  }
  Assembled asm_ = assemble(std::move(grids), UtilityFamily::kProcurement,
                            {draft_mechanism(a), draft_mechanism(b)});
  FamilyPair pair;
  pair.env = asm_.env;
  pair.x = asm_.mechs[0];
  pair.xp = asm_.mechs[1];
  pair.witness =
      witness_scoring_linear(*pair.x, *pair.xp, weight_x, weight_xp, quality);
  pair.provenance =
      "linear-score procurement; seller-specific bid and cost translations "
      "rescale all scores by a common positive factor";
  return pair;
}

FamilyPair input_pricing_pair(double e, double ep, const Tariff& tariff, double gamma,
                              int n, const std::vector<double>& actions,
                              const std::vector<double>& xp_thetas) {
  FamilySpec a, b;
  a.family = b.family = "input_pricing";
  a.n_agents = b.n_agents = n;
  a.tariff = b.tariff = tariff;
  a.gamma = b.gamma = gamma;
  a.bids = b.bids = actions;
  a.efficacy = e;
  b.efficacy = ep;

  double eta = ep / e;
  std::vector<double> x_thetas = scaled_by(xp_thetas, std::pow(eta, gamma));
  std::vector<std::vector<TypePoint>> grids(
      n, curve_grid(merged(x_thetas, xp_thetas), gamma));
  Assembled asm_ = assemble(std::move(grids), UtilityFamily::kPricing,
                            {draft_mechanism(a), draft_mechanism(b)});
  FamilyPair pair;
  pair.env = asm_.env;
  pair.x = asm_.mechs[0];
  pair.xp = asm_.mechs[1];
  pair.witness = witness_input_pricing(*pair.x, *pair.xp, e, ep);
  pair.provenance =
      "capacity pricing under proportional rationing; an efficacy change "
      "reads as a rescaled value curve while payments stay fixed";
  return pair;
}

FamilyPair output_pricing_pair(double e, double ep, double scale, double rho,
                               double gamma, int n,
                               const std::vector<double>& x_actions,
                               const std::vector<double>& xp_thetas) {
  FamilySpec a, b;
  a.family = b.family = "output_pricing";
  a.n_agents = b.n_agents = n;
  a.tariff = b.tariff = Tariff::power(scale, rho);
  a.gamma = b.gamma = gamma;
  a.efficacy = e;
  a.bids = x_actions;
  double eta = ep / e;
  b.efficacy = ep;
  b.bids = scaled_by(x_actions, eta);

  std::vector<double> x_thetas = scaled_by(xp_thetas, std::pow(eta, gamma - rho));
  std::vector<std::vector<TypePoint>> grids(
      n, curve_grid(merged(x_thetas, xp_thetas), gamma));
  Assembled asm_ = assemble(std::move(grids), UtilityFamily::kPricing,
                            {draft_mechanism(a), draft_mechanism(b)});
  FamilyPair pair;
  pair.env = asm_.env;
  pair.x = asm_.mechs[0];
  pair.xp = asm_.mechs[1];
  pair.witness = witness_output_isoelastic(*pair.x, *pair.xp, e, ep, rho);
  pair.provenance =
      "output pricing with an isoelastic tariff; scaling requests by the "
      "efficacy ratio rescales payoffs by a common power of that ratio";
  return pair;
}

double optimal_reserve(const GridPrior& prior) {
  size_t n = prior.v.size();
  if (n == 0 || prior.pdf.size() != n || prior.cdf.size() != n) {
    throw InvalidInputError("grid prior arrays must be nonempty and equal-length");
  }
  check_increasing(prior.v, "value");

  std::vector<size_t> support;
  for (size_t i = 0; i < n; ++i) {
    if (prior.pdf[i] > 0.0) support.push_back(i);
  }
  if (support.empty()) throw InvalidInputError("prior has empty support");

  std::vector<double> phi;
  for (size_t i : support) {
    phi.push_back(prior.v[i] - (1.0 - prior.cdf[i]) / prior.pdf[i]);
  }
  for (size_t m = 1; m < phi.size(); ++m) {
    if (phi[m] < phi[m - 1] - 1e-9) {
      throw RegularityError("virtual value is not weakly increasing on the support");
    }
  }
  for (size_t m = 0; m < phi.size(); ++m) {
    if (phi[m] >= 0.0) {
      if (m == 0) return prior.v[support[0]];
      double v0 = prior.v[support[m - 1]], v1 = prior.v[support[m]];
      double p0 = phi[m - 1], p1 = phi[m];
      if (p1 == p0) return v1;
      return v0 + (0.0 - p0) * (v1 - v0) / (p1 - p0);
    }
  }
  throw InvalidInputError("virtual value never crosses zero on the support");
}

std::vector<std::pair<std::string, std::string>> catalog_families() {
  return {
      {"posted_price", "one buyer chooses buy or pass at a fixed price P"},
      {"fpa", "sealed first-price auction on [0, bbar], highest bid wins"},
      {"dutch", "descending clock from bbar at the given rate; earliest stop wins"},
      {"kpa", "kth-price auction with reserve r and nonparticipation"},
      {"kec", "kth-price auction with entry cost c; every participant pays c"},
      {"one_half_price", "winner pays the mean of the top two participating bids"},
      {"all_pay_translated",
       "translated all-pay member: winner pays her label, losers pay label minus shift"},
      {"scoring_linear", "first-score procurement with score -w*b + (1-w)*q"},
      {"scoring_ratio", "first-score procurement with score w*min(b)/b + (1-w)*q"},
      {"input_pricing", "capacity requests, proportional rationing, tariff on capacity"},
      {"output_pricing", "output requests, proportional rationing, tariff on output"},
  };
}

}  // namespace strana
