#include "strana/witness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace strana {

namespace {

void check_same_env(const Mechanism& x, const Mechanism& xp) {
  if (x.env.get() != xp.env.get()) {
    throw InvalidInputError("mechanisms '" + x.name + "' and '" + xp.name +
                            "' do not share an environment");
  }
}

void check_bijection(const std::vector<int>& table, int from, int to,
                     const std::string& what) {
  if (static_cast<int>(table.size()) != from || from != to) {
    throw InvalidInputError(what + " is not a bijection: size mismatch");
  }
  std::vector<bool> seen(to, false);
  for (int v : table) {
    if (v < 0 || v >= to || seen[v]) {
      throw InvalidInputError(what + " is not a bijection");
    }
    seen[v] = true;
  }
}

// Maps every flat X-profile index to the flat X'-profile index obtained by
// relabeling each agent's action through alpha.
std::vector<long long> map_profiles(const Mechanism& x, const Mechanism& xp,
                                    const std::vector<std::vector<int>>& alpha) {
  std::vector<long long> out(x.num_profiles());
  std::vector<int> digits;
  for (long long p = 0; p < x.num_profiles(); ++p) {
    x.profile_radix().decode(p, digits);
    for (int i = 0; i < x.num_agents(); ++i) digits[i] = alpha[i][digits[i]];
    out[p] = xp.profile_radix().index(digits);
  }
  return out;
}

}  // namespace

std::optional<int> TypeMap::image(int xp_type) const {
  for (const auto& [d, s] : pairs) {
    if (d == xp_type) return s;
  }
  return std::nullopt;
}

std::optional<int> TypeMap::preimage(int x_type) const {
  for (const auto& [d, s] : pairs) {
    if (s == x_type) return d;
  }
  return std::nullopt;
}

void TypeMap::validate(int grid_size) const {
  int prev = -1;
  std::vector<bool> hit(grid_size, false);
  for (const auto& [d, s] : pairs) {
    if (d < 0 || d >= grid_size || s < 0 || s >= grid_size) {
      throw InvalidInputError("type map entry out of range");
    }
    if (d <= prev) throw InvalidInputError("type map domain not sorted/unique");
    prev = d;
    if (hit[s]) throw InvalidInputError("type map is not injective");
    hit[s] = true;
  }
}

TypeMap TypeMap::identity(int grid_size) {
  TypeMap t;
  for (int i = 0; i < grid_size; ++i) t.pairs.emplace_back(i, i);
  return t;
}

void AnalogyWitness::validate(const Mechanism& x, const Mechanism& xp) const {
  check_same_env(x, xp);
  if (static_cast<int>(alpha.size()) != x.num_agents() ||
      static_cast<int>(tau.size()) != x.num_agents() ||
      static_cast<int>(kappa.size()) != x.num_agents() ||
      static_cast<int>(lambda.size()) != x.num_agents()) {
    throw InvalidInputError("witness shape does not match the agent count");
  }
  for (int i = 0; i < x.num_agents(); ++i) {
    check_bijection(alpha[i], x.num_actions(i), xp.num_actions(i),
                    "action relabeling for agent '" + x.env->agents[i] + "'");
    tau[i].validate(static_cast<int>(x.env->type_grids[i].size()));
    if (kappa[i].size() != tau[i].pairs.size() ||
        lambda[i].size() != tau[i].pairs.size()) {
      throw InvalidInputError("kappa/lambda tables do not match the tau domain");
    }
    for (double k : kappa[i]) {
      if (!(k > 0.0)) throw InvalidInputError("witness scaling must be positive");
    }
  }
}

AnalogyWitness AnalogyWitness::identity(const Mechanism& x) {
  AnalogyWitness w;
  for (int i = 0; i < x.num_agents(); ++i) {
    std::vector<int> id(x.num_actions(i));
    for (int a = 0; a < x.num_actions(i); ++a) id[a] = a;
    w.alpha.push_back(std::move(id));
    int n = static_cast<int>(x.env->type_grids[i].size());
    w.tau.push_back(TypeMap::identity(n));
    w.kappa.emplace_back(n, 1.0);
    w.lambda.emplace_back(n, 0.0);
  }
  return w;
}

AnalogyWitness AnalogyWitness::from_equivalence(const Mechanism& x, const Mechanism& xp,
                                                const EquivalenceWitness& w) {
  AnalogyWitness out = AnalogyWitness::identity(x);
  out.alpha = w.alpha;
  out.validate(x, xp);
  return out;
}

WitnessReport verify_equivalence(const Mechanism& x, const Mechanism& xp,
                                 const EquivalenceWitness& w, double tol) {
  return verify_witness(x, xp, AnalogyWitness::from_equivalence(x, xp, w), tol);
}

WitnessReport verify_witness(const Mechanism& x, const Mechanism& xp,
                             const AnalogyWitness& w, double tol) {
  w.validate(x, xp);
  std::vector<long long> to_xp = map_profiles(x, xp, w.alpha);

  WitnessReport report;
  report.ok = true;
  for (int i = 0; i < x.num_agents(); ++i) {
    for (size_t k = 0; k < w.tau[i].pairs.size(); ++k) {
      const auto [d, s] = w.tau[i].pairs[k];
      for (long long p = 0; p < x.num_profiles(); ++p) {
        double lhs = xp.payoff(i, d, to_xp[p]);
        double rhs = w.kappa[i][k] * x.payoff(i, s, p) + w.lambda[i][k];
        double gap = std::abs(lhs - rhs);
        if (gap > report.worst_gap) report.worst_gap = gap;
        if (gap > tol && !report.first_violation) {
          report.first_violation = WitnessViolation{i, d, p, lhs, rhs};
        }
      }
    }
  }
  report.ok = !report.first_violation.has_value();
  return report;
}

std::optional<AffineFit> fit_affine(const Mechanism& x, const Mechanism& xp,
                                    const std::vector<std::vector<int>>& alpha,
                                    const std::vector<TypeMap>& tau, double tol) {
  std::vector<long long> to_xp = map_profiles(x, xp, alpha);
  AffineFit fit;
  fit.kappa.resize(x.num_agents());
  fit.lambda.resize(x.num_agents());
  for (int i = 0; i < x.num_agents(); ++i) {
    for (const auto& [d, s] : tau[i].pairs) {
      long long lo = 0, hi = 0;
      for (long long p = 1; p < x.num_profiles(); ++p) {
        if (x.payoff(i, s, p) < x.payoff(i, s, lo)) lo = p;
        if (x.payoff(i, s, p) > x.payoff(i, s, hi)) hi = p;
      }
      double range = x.payoff(i, s, hi) - x.payoff(i, s, lo);
      double k, l;
      if (range == 0.0) {
        k = 1.0;
        l = xp.payoff(i, d, to_xp[lo]) - x.payoff(i, s, lo);
      } else {
        k = (xp.payoff(i, d, to_xp[hi]) - xp.payoff(i, d, to_xp[lo])) / range;
        if (!(k > 0.0)) return std::nullopt;
        l = xp.payoff(i, d, to_xp[lo]) - k * x.payoff(i, s, lo);
      }
      for (long long p = 0; p < x.num_profiles(); ++p) {
        double residual = xp.payoff(i, d, to_xp[p]) - (k * x.payoff(i, s, p) + l);
        if (std::abs(residual) > tol) return std::nullopt;
      }
      fit.kappa[i].push_back(k);
      fit.lambda[i].push_back(l);
    }
  }
  return fit;
}

namespace {

// Affine-invariant signature machinery for search pruning. Payoff vectors
// are normalized by (subtract min, divide by range); constant vectors map to
// the zero signature. Sorted copies make the signatures relabeling-invariant.
struct Signatures {
  // sig[agent][type] = sorted normalized payoff vector over profiles.
  std::vector<std::vector<std::vector<double>>> sig;
  // sub[j][t][i][b] = sorted normalized sub-vector over profiles where agent
  // i plays action b, normalized by the full vector's min/range.
  std::vector<std::vector<std::vector<std::vector<std::vector<double>>>>> sub;
};

Signatures build_signatures(const Mechanism& m) {
  Signatures s;
  int n = m.num_agents();
  s.sig.resize(n);
  s.sub.resize(n);
  std::vector<int> digits;
  for (int j = 0; j < n; ++j) {
    int n_types = static_cast<int>(m.env->type_grids[j].size());
    s.sig[j].resize(n_types);
    s.sub[j].resize(n_types);
    for (int t = 0; t < n_types; ++t) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (long long p = 0; p < m.num_profiles(); ++p) {
        lo = std::min(lo, m.payoff(j, t, p));
        hi = std::max(hi, m.payoff(j, t, p));
      }
      double range = hi - lo;
      auto norm = [&](double v) { return range > 0.0 ? (v - lo) / range : 0.0; };

      auto& full = s.sig[j][t];
      full.reserve(m.num_profiles());
      s.sub[j][t].resize(n);
      for (int i = 0; i < n; ++i) {
        s.sub[j][t][i].resize(m.num_actions(i));
      }
      for (long long p = 0; p < m.num_profiles(); ++p) {
        double v = norm(m.payoff(j, t, p));
        full.push_back(v);
        m.profile_radix().decode(p, digits);
        for (int i = 0; i < n; ++i) s.sub[j][t][i][digits[i]].push_back(v);
      }
      std::sort(full.begin(), full.end());
      for (int i = 0; i < n; ++i) {
        for (auto& v : s.sub[j][t][i]) std::sort(v.begin(), v.end());
      }
    }
  }
  return s;
}

bool close_vec(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tol) return false;
  }
  return true;
}

struct Searcher {
  const Mechanism& x;
  const Mechanism& xp;
  const SearchOptions& opt;
  Signatures sx, sxp;
  double sig_tol;

  std::vector<std::vector<int>> domains;  // X'-side type indices per agent
  std::vector<TypeMap> tau;               // partial assignment
  std::vector<std::vector<int>> alpha;    // partial assignment

  long long nodes = 0;
  bool budget_hit = false;
  std::optional<AnalogyWitness> found;

  Searcher(const Mechanism& x_, const Mechanism& xp_, const SearchOptions& o)
      : x(x_), xp(xp_), opt(o) {
    sx = build_signatures(x);
    sxp = build_signatures(xp);
    sig_tol = std::max(1e-9, 10.0 * opt.tol);
  }

  bool tick() {
    if (++nodes > opt.budget) {
      budget_hit = true;
      return false;
    }
    return true;
  }

  bool run() {
    tau.assign(x.num_agents(), {});
    alpha.assign(x.num_agents(), {});
    return assign_tau(0);
  }

  // Stage 1: per agent, enumerate injective images for the domain types in
  // grid order.
  bool assign_tau(int agent) {
    if (agent == x.num_agents()) return assign_alpha(0);
    int grid = static_cast<int>(x.env->type_grids[agent].size());
    std::vector<bool> used(grid, false);
    return extend_tau(agent, 0, used);
  }

  bool extend_tau(int agent, size_t k, std::vector<bool>& used) {
    if (k == domains[agent].size()) return assign_tau(agent + 1);
    int d = domains[agent][k];
    for (int s = 0; s < static_cast<int>(used.size()); ++s) {
      if (used[s]) continue;
      if (!tick()) return false;
      if (opt.use_signatures &&
          !close_vec(sxp.sig[agent][d], sx.sig[agent][s], sig_tol)) {
        continue;
      }
      used[s] = true;
      tau[agent].pairs.emplace_back(d, s);
      if (!extend_tau(agent, k + 1, used)) return false;
      if (found) return true;
      tau[agent].pairs.pop_back();
      used[s] = false;
    }
    return true;
  }

  // Stage 2: per agent, enumerate action bijections in lexicographic order.
  bool assign_alpha(int agent) {
    if (agent == x.num_agents()) return leaf();
    std::vector<bool> used(xp.num_actions(agent), false);
    alpha[agent].assign(x.num_actions(agent), -1);
    bool cont = extend_alpha(agent, 0, used);
    alpha[agent].clear();
    return cont;
  }

  bool extend_alpha(int agent, int b, std::vector<bool>& used) {
    if (b == x.num_actions(agent)) return assign_alpha(agent + 1);
    for (int bp = 0; bp < xp.num_actions(agent); ++bp) {
      if (used[bp]) continue;
      if (!tick()) return false;
      if (opt.use_signatures && !slice_compatible(agent, b, bp)) continue;
      used[bp] = true;
      alpha[agent][b] = bp;
      if (!extend_alpha(agent, b + 1, used)) return false;
      if (found) return true;
      alpha[agent][b] = -1;
      used[bp] = false;
    }
    return true;
  }

  bool slice_compatible(int agent, int b, int bp) const {
    for (int j = 0; j < x.num_agents(); ++j) {
      for (const auto& [d, s] : tau[j].pairs) {
        if (!close_vec(sxp.sub[j][d][agent][bp], sx.sub[j][s][agent][b], sig_tol)) {
          return false;
        }
      }
    }
    return true;
  }

  bool leaf() {
    auto fit = fit_affine(x, xp, alpha, tau, opt.tol);
    if (!fit) return true;
    if (opt.require_lambda_zero) {
      for (const auto& row : fit->lambda) {
        for (double l : row) {
          if (std::abs(l) > opt.tol) return true;
        }
      }
    }
    if (opt.require_kappa_const) {
      for (const auto& row : fit->kappa) {
        for (double k : row) {
          if (std::abs(k - row.front()) > opt.tol) return true;
        }
      }
    }
    AnalogyWitness w;
    w.alpha = alpha;
    w.tau = tau;
    w.kappa = fit->kappa;
    w.lambda = fit->lambda;
    found = std::move(w);
    return true;
  }
};

}  // namespace

SearchResult search_witness(const Mechanism& x, const Mechanism& xp,
                            const SearchOptions& options) {
  check_same_env(x, xp);
  SearchResult result;
  for (int i = 0; i < x.num_agents(); ++i) {
    if (x.num_actions(i) != xp.num_actions(i)) {
      result.status = SearchStatus::kNone;  // no bijections exist
      return result;
    }
  }

  Searcher s(x, xp, options);
  s.domains.resize(x.num_agents());
  for (int i = 0; i < x.num_agents(); ++i) {
    if (i < static_cast<int>(options.tau_domains.size()) &&
        !options.tau_domains[i].empty()) {
      s.domains[i] = options.tau_domains[i];
      std::sort(s.domains[i].begin(), s.domains[i].end());
    } else {
      int n = static_cast<int>(x.env->type_grids[i].size());
      s.domains[i].resize(n);
      for (int t = 0; t < n; ++t) s.domains[i][t] = t;
    }
  }

  s.run();
  result.nodes_explored = s.nodes;
  if (s.found) {
    result.status = SearchStatus::kFound;
    result.witness = std::move(s.found);
  } else if (s.budget_hit) {
    result.status = SearchStatus::kBudgetExhausted;
  } else {
    result.status = SearchStatus::kNone;
  }
  return result;
}

StrategyProfile transfer_equilibrium(const Mechanism& x, const Mechanism& xp,
                                     const AnalogyWitness& w,
                                     const StrategyProfile& sigma) {
  w.validate(x, xp);
  sigma.validate(x);
  StrategyProfile out;
  out.act.resize(xp.num_agents());
  for (int i = 0; i < xp.num_agents(); ++i) {
    out.act[i].assign(xp.env->type_grids[i].size(), Lottery::point(0));
    for (const auto& [d, s] : w.tau[i].pairs) {
      std::map<int, double> acc;
      for (const auto& [a, p] : sigma.act[i][s].mass) acc[w.alpha[i][a]] += p;
      Lottery lot;
      lot.mass.assign(acc.begin(), acc.end());
      out.act[i][d] = std::move(lot);
    }
  }
  return out;
}

Prior pushforward_prior(const Environment& env, const std::vector<TypeMap>& tau,
                        const Prior& prior) {
  prior.validate(env);
  std::map<long long, double> acc;
  std::vector<int> digits;
  for (const auto& [idx, p] : prior.pmf) {
    if (p <= 0.0) continue;
    env.type_radix.decode(idx, digits);
    for (size_t i = 0; i < digits.size(); ++i) {
      auto s = tau.at(i).image(digits[i]);
      if (!s) {
        throw InvalidInputError("prior puts mass on type '" +
                                env.type_grids[i][digits[i]].label +
                                "' outside the type map domain");
      }
      digits[i] = *s;
    }
    acc[env.type_radix.index(digits)] += p;
  }
  Prior out;
  out.pmf.assign(acc.begin(), acc.end());
  if (prior.ipv_marginals) {
    std::vector<std::vector<double>> pushed(env.agents.size());
    for (size_t i = 0; i < env.agents.size(); ++i) {
      pushed[i].assign(env.type_grids[i].size(), 0.0);
      for (size_t t = 0; t < env.type_grids[i].size(); ++t) {
        double m = (*prior.ipv_marginals)[i][t];
        if (m <= 0.0) continue;
        pushed[i][*tau[i].image(static_cast<int>(t))] += m;
      }
    }
    out.ipv_marginals = std::move(pushed);
  }
  return out;
}

std::vector<std::vector<int>> transfer_dominant(
    const Mechanism& x, const Mechanism& xp, const AnalogyWitness& w,
    const std::vector<std::vector<int>>& strategies, double tol) {
  w.validate(x, xp);
  if (static_cast<int>(strategies.size()) != x.num_agents()) {
    throw InvalidInputError("dominant strategy bundle agent count mismatch");
  }
  for (int i = 0; i < x.num_agents(); ++i) {
    if (!is_dominant_for(x, i, strategies[i], tol)) {
      throw InvalidInputError("input strategy for agent '" + x.env->agents[i] +
                              "' fails the dominance check");
    }
  }
  std::vector<std::vector<int>> out(xp.num_agents());
  for (int i = 0; i < xp.num_agents(); ++i) {
    out[i].assign(xp.env->type_grids[i].size(), -1);
    std::vector<int> covered;
    for (const auto& [d, s] : w.tau[i].pairs) {
      out[i][d] = w.alpha[i][strategies[i][s]];
      covered.push_back(d);
    }
    if (!is_dominant_for(xp, i, out[i], tol, covered)) {
      throw InvalidInputError(
          "transferred strategy for agent '" + xp.env->agents[i] +
          "' fails the dominance check; the witness may not verify");
    }
  }
  return out;
}

MixedProfile push_profile(const Mechanism& x, const Mechanism& xp,
                          const std::vector<std::vector<int>>& alpha,
                          const MixedProfile& profile) {
  std::map<long long, double> acc;
  std::vector<int> digits;
  for (const auto& [p, mass] : profile.mass) {
    x.profile_radix().decode(p, digits);
    for (int i = 0; i < x.num_agents(); ++i) digits[i] = alpha[i][digits[i]];
    acc[xp.profile_radix().index(digits)] += mass;
  }
  MixedProfile out;
  out.mass.assign(acc.begin(), acc.end());
  return out;
}

AnalogyWitness compose_witness(const Mechanism& x, const Mechanism& xp,
                               const Mechanism& xpp, const AnalogyWitness& w,
                               const AnalogyWitness& wp) {
  w.validate(x, xp);
  wp.validate(xp, xpp);
  AnalogyWitness out;
  out.alpha.resize(x.num_agents());
  out.tau.resize(x.num_agents());
  out.kappa.resize(x.num_agents());
  out.lambda.resize(x.num_agents());
  for (int i = 0; i < x.num_agents(); ++i) {
    out.alpha[i].resize(x.num_actions(i));
    for (int a = 0; a < x.num_actions(i); ++a) {
      out.alpha[i][a] = wp.alpha[i][w.alpha[i][a]];
    }
    for (size_t kp = 0; kp < wp.tau[i].pairs.size(); ++kp) {
      const auto [t, mid] = wp.tau[i].pairs[kp];  // X''-type -> X'-type
      auto s = w.tau[i].image(mid);
      if (!s) continue;  // chain leaves the inner domain
      size_t k = 0;
      while (w.tau[i].pairs[k].first != mid) ++k;
      out.tau[i].pairs.emplace_back(t, *s);
      out.kappa[i].push_back(wp.kappa[i][kp] * w.kappa[i][k]);
      out.lambda[i].push_back(wp.kappa[i][kp] * w.lambda[i][k] + wp.lambda[i][kp]);
    }
  }
  out.validate(x, xpp);
  return out;
}

AnalogyWitness invert_witness(const Mechanism& x, const Mechanism& xp,
                              const AnalogyWitness& w) {
  w.validate(x, xp);
  AnalogyWitness out;
  out.alpha.resize(x.num_agents());
  out.tau.resize(x.num_agents());
  out.kappa.resize(x.num_agents());
  out.lambda.resize(x.num_agents());
  for (int i = 0; i < x.num_agents(); ++i) {
    out.alpha[i].assign(x.num_actions(i), -1);
    for (int a = 0; a < x.num_actions(i); ++a) out.alpha[i][w.alpha[i][a]] = a;

    std::vector<std::pair<int, size_t>> by_image;
    for (size_t k = 0; k < w.tau[i].pairs.size(); ++k) {
      by_image.emplace_back(w.tau[i].pairs[k].second, k);
    }
    std::sort(by_image.begin(), by_image.end());
    for (const auto& [s, k] : by_image) {
      out.tau[i].pairs.emplace_back(s, w.tau[i].pairs[k].first);
      out.kappa[i].push_back(1.0 / w.kappa[i][k]);
      out.lambda[i].push_back(-w.lambda[i][k] / w.kappa[i][k]);
    }
  }
  out.validate(xp, x);
  return out;
}

}  // namespace strana
