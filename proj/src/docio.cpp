#include "strana/docio.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "strana/text.hpp"

namespace strana {

using Json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw SchemaError(path, what);
}

const Json& member(const Json& j, const std::string& path, const std::string& key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing");
  return *it;
}

const Json* member_opt(const Json& j, const std::string& key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

std::string str(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

double num(const Json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    try {
      size_t used = 0;
      double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    fail(path, "'" + s + "' is not a decimal number");
  }
  fail(path, "expected a decimal-string number");
}

int integer(const Json& j, const std::string& path) {
  double v = num(j, path);
  int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) fail(path, "expected an integer");
  return i;
}

std::vector<double> num_list(const std::string& text, const std::string& path) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(path, "'" + item + "' is not a decimal number");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Family parameter parsing, shared by the mechanisms block and builtin refs.

Tariff parse_tariff(const std::string& text, const std::string& path) {
  auto colon = text.find(':');
  if (colon == std::string::npos) fail(path, "tariff needs the form kind:params");
  std::string kind = text.substr(0, colon);
  std::vector<double> params = num_list(text.substr(colon + 1), path);
  if (kind == "power") {
    if (params.size() != 2) fail(path, "power tariff needs scale,exponent");
    return Tariff::power(params[0], params[1]);
  }
  if (kind == "poly") return Tariff::poly(params);
  fail(path, "unknown tariff kind '" + kind + "'");
}

FamilySpec parse_family_params(const std::string& family,
                               const std::map<std::string, std::string>& params,
                               const std::string& path) {
  FamilySpec spec;
  spec.family = family;
  for (const auto& [key, value] : params) {
    const std::string at = path + "." + key;
    if (key == "k") {
      spec.k = static_cast<int>(num(Json(value), at));
    } else if (key == "r" || key == "reserve") {
      spec.reserve = num(Json(value), at);
    } else if (key == "c" || key == "entry_cost") {
      spec.entry_cost = num(Json(value), at);
    } else if (key == "p" || key == "price") {
      spec.price = num(Json(value), at);
    } else if (key == "bbar") {
      spec.bbar = num(Json(value), at);
    } else if (key == "rate") {
      spec.rate = num(Json(value), at);
    } else if (key == "shift") {
      spec.shift = num(Json(value), at);
    } else if (key == "w" || key == "weight") {
      spec.weight = num(Json(value), at);
    } else if (key == "q" || key == "quality") {
      spec.quality = num_list(value, at);
    } else if (key == "e" || key == "efficacy") {
      spec.efficacy = num(Json(value), at);
    } else if (key == "gamma") {
      spec.gamma = num(Json(value), at);
    } else if (key == "tariff") {
      spec.tariff = parse_tariff(value, at);
    } else if (key == "bids") {
      spec.bids = num_list(value, at);
    } else if (key.rfind("bids.", 0) == 0) {
      size_t agent = std::stoul(key.substr(5));
      if (agent == 0) fail(at, "per-agent bid grids are 1-based");
      if (spec.bids_each.size() < agent) spec.bids_each.resize(agent);
      spec.bids_each[agent - 1] = num_list(value, at);
    } else if (key == "tie") {
      spec.tie = value;
    } else if (key == "n") {
      spec.n_agents = static_cast<int>(num(Json(value), at));
    } else {
      fail(at, "unknown family parameter");
    }
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Environment and mechanism blocks.

std::vector<TypePoint> parse_type_grid(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array");
  std::vector<TypePoint> grid;
  for (size_t i = 0; i < j.size(); ++i) {
    const std::string at = path + "[" + std::to_string(i) + "]";
    const Json& entry = j[i];
    TypePoint t;
    t.label = str(member(entry, at, "label"), at + ".label");
    if (const Json* v = member_opt(entry, "value")) t.value = num(*v, at + ".value");
    if (const Json* th = member_opt(entry, "theta")) {
      PowerFn fn;
      fn.theta = num(*th, at + ".theta");
      fn.gamma = num(member(entry, at, "gamma"), at + ".gamma");
      t.fn = fn;
    }
    grid.push_back(std::move(t));
  }
  return grid;
}

Lottery parse_action_lottery(const Json& j, const Mechanism& mech, int agent,
                             const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array");
  std::map<int, double> acc;
  for (size_t i = 0; i < j.size(); ++i) {
    const std::string at = path + "[" + std::to_string(i) + "]";
    int a = mech.action_index(agent, str(member(j[i], at, "a"), at + ".a"));
    acc[a] += num(member(j[i], at, "p"), at + ".p");
  }
  Lottery lot;
  lot.mass.assign(acc.begin(), acc.end());
  return lot;
}

MixedProfile parse_mixed_profile(const Json& j, const Mechanism& mech,
                                 const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array");
  std::map<long long, double> acc;
  for (size_t i = 0; i < j.size(); ++i) {
    const std::string at = path + "[" + std::to_string(i) + "]";
    const Json& labels = member(j[i], at, "profile");
    if (!labels.is_array() || labels.size() != static_cast<size_t>(mech.num_agents())) {
      fail(at + ".profile", "expected one action label per agent");
    }
    std::vector<int> digits(mech.num_agents());
    for (int a = 0; a < mech.num_agents(); ++a) {
      digits[a] = mech.action_index(
          a, str(labels[a], at + ".profile[" + std::to_string(a) + "]"));
    }
    acc[mech.profile_index(digits)] += num(member(j[i], at, "p"), at + ".p");
  }
  MixedProfile out;
  out.mass.assign(acc.begin(), acc.end());
  return out;
}

}  // namespace

FamilySpec parse_builtin_ref(const std::string& ref) {
  const std::string prefix = "builtin:";
  if (ref.rfind(prefix, 0) != 0) {
    throw InvalidInputError("'" + ref + "' is not a builtin mechanism reference");
  }
  std::string rest = ref.substr(prefix.size());
  auto qmark = rest.find('?');
  std::string family = rest.substr(0, qmark);
  std::map<std::string, std::string> params;
  if (qmark != std::string::npos) {
    std::stringstream ss(rest.substr(qmark + 1));
    std::string pair;
    while (std::getline(ss, pair, '&')) {
      auto eq = pair.find('=');
      if (eq == std::string::npos) fail(ref, "builtin parameters need key=value");
      params[pair.substr(0, eq)] = pair.substr(eq + 1);
    }
  }
  return parse_family_params(family, params, ref);
}

Document parse_document(const std::string& text,
                        const std::vector<std::string>& extra_refs) {
  Json root = Json::parse(text, nullptr, false);
  if (root.is_discarded()) fail("$", "invalid JSON");

  Document doc;
  doc.schema_version = str(member(root, "$", "schema_version"), "$.schema_version");
  if (doc.schema_version != "1") fail("$.schema_version", "unsupported version");

  // Environment.
  const Json& env_j = member(root, "$", "environment");
  std::string utility_mode = str(member(env_j, "$.environment", "utility"),
                                 "$.environment.utility");
  std::vector<std::string> agents;
  for (const Json& a : member(env_j, "$.environment", "agents")) {
    agents.push_back(str(a, "$.environment.agents[]"));
    if (agents.back() == "mech") {
      fail("$.environment.agents", "'mech' is a reserved agent id");
    }
  }
  if (agents.empty()) fail("$.environment.agents", "no agents");

  const Json& types_j = member(env_j, "$.environment", "types");
  std::vector<std::vector<TypePoint>> grids;
  for (const std::string& agent : agents) {
    grids.push_back(parse_type_grid(member(types_j, "$.environment.types", agent),
                                    "$.environment.types." + agent));
  }

  // Mechanism declarations.
  struct Declared {
    std::string id;
    const Json* body = nullptr;  // explicit table, or null for family refs
    FamilySpec spec;             // family refs only
    bool is_family = false;
  };
  std::vector<Declared> declared;
  if (const Json* mechs_j = member_opt(root, "mechanisms")) {
    for (const auto& [id, body] : mechs_j->items()) {
      const std::string at = "$.mechanisms." + id;
      Declared d;
      d.id = id;
      if (const Json* fam = member_opt(body, "family")) {
        std::map<std::string, std::string> params;
        if (const Json* params_j = member_opt(body, "params")) {
          for (const auto& [k, v] : params_j->items()) {
            params[k] = v.is_string() ? v.get<std::string>() : v.dump();
          }
        }
        d.is_family = true;
        d.spec = parse_family_params(str(*fam, at + ".family"), params, at + ".params");
        d.spec.n_agents = static_cast<int>(agents.size());
      } else {
        d.body = &body;
      }
      declared.push_back(std::move(d));
    }
  }
  for (const std::string& ref : extra_refs) {
    if (ref.rfind("builtin:", 0) != 0) continue;
    bool already = false;
    for (const Declared& d : declared) already = already || d.id == ref;
    if (already) continue;
    Declared d;
    d.id = ref;
    d.is_family = true;
    d.spec = parse_builtin_ref(ref);
    d.spec.n_agents = static_cast<int>(agents.size());
    declared.push_back(std::move(d));
  }

  if (utility_mode == "table") {
    for (const Declared& d : declared) {
      if (d.is_family) {
        fail("$.mechanisms." + d.id,
             "family references need a family-mode environment, not a table");
      }
    }
    auto env = std::make_shared<Environment>();
    env->agents = agents;
    env->type_grids = grids;
    for (const Json& y : member(env_j, "$.environment", "outcomes")) {
      env->outcomes.push_back(str(y, "$.environment.outcomes[]"));
    }
    const Json& table = member(env_j, "$.environment", "table");
    for (size_t i = 0; i < agents.size(); ++i) {
      const std::string at = "$.environment.table." + agents[i];
      const Json& rows = member(table, "$.environment.table", agents[i]);
      std::vector<std::vector<double>> agent_rows;
      for (const TypePoint& t : grids[i]) {
        const Json& row = member(rows, at, t.label);
        std::vector<double> values;
        for (const std::string& y : env->outcomes) {
          values.push_back(num(member(row, at + "." + t.label, y),
                               at + "." + t.label + "." + y));
        }
        agent_rows.push_back(std::move(values));
      }
      env->utility.push_back(std::move(agent_rows));
    }
    env->finalize();
    doc.env = env;

    for (const Declared& d : declared) {
      const std::string at = "$.mechanisms." + d.id;
      auto mech = std::make_shared<Mechanism>();
      mech->env = env;
      mech->name = d.id;
      const Json& actions = member(*d.body, at, "actions");
      for (const std::string& agent : agents) {
        std::vector<std::string> set;
        for (const Json& a : member(actions, at + ".actions", agent)) {
          set.push_back(str(a, at + ".actions." + agent + "[]"));
        }
        mech->action_sets.push_back(std::move(set));
      }
      std::vector<int> sizes;
      for (const auto& s : mech->action_sets) sizes.push_back(static_cast<int>(s.size()));
      MixedRadix radix(sizes);
      std::vector<Lottery> rule(radix.total);
      std::vector<bool> seen(radix.total, false);
      const Json& rows = member(*d.body, at, "rule");
      for (size_t r = 0; r < rows.size(); ++r) {
        const std::string rat = at + ".rule[" + std::to_string(r) + "]";
        const Json& labels = member(rows[r], rat, "profile");
        std::vector<int> digits(agents.size());
        for (size_t a = 0; a < agents.size(); ++a) {
          const std::string label = str(labels[a], rat + ".profile[]");
          digits[a] = -1;
          for (size_t c = 0; c < mech->action_sets[a].size(); ++c) {
            if (mech->action_sets[a][c] == label) digits[a] = static_cast<int>(c);
          }
          if (digits[a] < 0) fail(rat + ".profile", "unknown action '" + label + "'");
        }
        long long idx = radix.index(digits);
        if (seen[idx]) fail(rat, "duplicate profile row");
        seen[idx] = true;
        std::map<int, double> acc;
        for (const Json& entry : member(rows[r], rat, "outcome")) {
          acc[env->outcome_index(str(member(entry, rat, "y"), rat + ".y"))] +=
              num(member(entry, rat, "p"), rat + ".p");
        }
        rule[idx].mass.assign(acc.begin(), acc.end());
      }
      for (long long p = 0; p < radix.total; ++p) {
        if (!seen[p]) fail(at + ".rule", "outcome rule is not total");
      }
      mech->outcome_rule = std::move(rule);
      mech->finalize();
      doc.registry.add(d.id, mech);
      doc.mechanism_order.push_back(d.id);
    }
  } else {
    UtilityFamily family;
    if (utility_mode == "auction") {
      family = UtilityFamily::kValueAuction;
    } else if (utility_mode == "procurement") {
      family = UtilityFamily::kProcurement;
    } else if (utility_mode == "pricing") {
      family = UtilityFamily::kPricing;
    } else {
      fail("$.environment.utility", "unknown utility family '" + utility_mode + "'");
    }
    std::vector<MechDraft> drafts;
    for (const Declared& d : declared) {
      if (!d.is_family) {
        fail("$.mechanisms." + d.id,
             "explicit tables need a table-mode environment");
      }
      if (utility_family_for(d.spec.family) != family) {
        fail("$.mechanisms." + d.id,
             "family does not match the environment's utility mode");
      }
      drafts.push_back(draft_mechanism(d.spec));
    }
    if (drafts.empty()) fail("$.mechanisms", "no mechanisms declared");
    Assembled a = assemble(agents, grids, family, std::move(drafts));
    doc.env = a.env;
    for (size_t m = 0; m < declared.size(); ++m) {
      doc.registry.add(declared[m].id, a.mechs[m]);
      doc.mechanism_order.push_back(declared[m].id);
    }
  }

  const Environment& env = *doc.env;

  // Priors.
  if (const Json* priors_j = member_opt(root, "priors")) {
    for (const auto& [id, body] : priors_j->items()) {
      const std::string at = "$.priors." + id;
      Prior f;
      if (const Json* marg_j = member_opt(body, "marginals")) {
        std::vector<std::vector<double>> marg;
        for (size_t i = 0; i < env.agents.size(); ++i) {
          const Json& row = member(*marg_j, at + ".marginals", env.agents[i]);
          std::vector<double> m;
          for (size_t t = 0; t < row.size(); ++t) {
            m.push_back(num(row[t], at + ".marginals[]"));
          }
          if (m.size() != env.type_grids[i].size()) {
            fail(at + ".marginals." + env.agents[i], "wrong marginal length");
          }
          marg.push_back(std::move(m));
        }
        f = Prior::from_marginals(env, marg);
      } else {
        const Json& pmf = member(body, at, "pmf");
        std::map<long long, double> acc;
        for (size_t r = 0; r < pmf.size(); ++r) {
          const std::string rat = at + ".pmf[" + std::to_string(r) + "]";
          const Json& labels = member(pmf[r], rat, "types");
          std::vector<int> digits(env.agents.size());
          for (size_t i = 0; i < env.agents.size(); ++i) {
            digits[i] = env.type_index(static_cast<int>(i),
                                       str(labels[i], rat + ".types[]"));
          }
          acc[env.type_radix.index(digits)] += num(member(pmf[r], rat, "p"), rat + ".p");
        }
        f.pmf.assign(acc.begin(), acc.end());
      }
      try {
        f.validate(env);
      } catch (const Error& e) {
        fail(at, e.what());
      }
      doc.priors.emplace(id, std::move(f));
    }
  }

  // Strategies.
  if (const Json* sj = member_opt(root, "strategies")) {
    for (const auto& [id, body] : sj->items()) {
      const std::string at = "$.strategies." + id;
      if (doc.registry.all().empty()) fail(at, "no mechanisms to bind against");
      // Strategies bind to action labels; use the first mechanism that
      // carries all the labels (documents normally have one action space
      // per strategy).
      const Json* mech_ref = member_opt(body, "mech");
      std::string mech_id = mech_ref ? str(*mech_ref, at + ".mech")
                                     : doc.registry.all().begin()->first;
      const Mechanism& mech = doc.registry.get(mech_id);
      StrategyProfile sp;
      sp.act.resize(env.agents.size());
      for (size_t i = 0; i < env.agents.size(); ++i) {
        const Json& rows = member(body, at, env.agents[i]);
        sp.act[i].resize(env.type_grids[i].size());
        for (size_t t = 0; t < env.type_grids[i].size(); ++t) {
          const std::string& label = env.type_grids[i][t].label;
          const Json& lot = member(rows, at + "." + env.agents[i], label);
          sp.act[i][t] = parse_action_lottery(
              lot, mech, static_cast<int>(i),
              at + "." + env.agents[i] + "." + label);
        }
      }
      try {
        sp.validate(mech);
      } catch (const Error& e) {
        fail(at, e.what());
      }
      doc.strategies.emplace(id,
                             Document::StrategyEntry{mech_id, std::move(sp)});
    }
  }

  // Witnesses.
  if (const Json* wj = member_opt(root, "witnesses")) {
    for (const auto& [id, body] : wj->items()) {
      const std::string at = "$.witnesses." + id;
      Document::WitnessEntry entry;
      entry.left = str(member(body, at, "left"), at + ".left");
      entry.right = str(member(body, at, "right"), at + ".right");
      std::string kind = "analogy";
      if (const Json* kj = member_opt(body, "kind")) kind = str(*kj, at + ".kind");
      entry.equivalence = kind == "equivalence";
      const Mechanism& x = doc.registry.get(entry.left);
      const Mechanism& xp = doc.registry.get(entry.right);

      AnalogyWitness w;
      const Json& alpha_j = member(body, at, "alpha");
      for (size_t i = 0; i < env.agents.size(); ++i) {
        const std::string aat = at + ".alpha." + env.agents[i];
        const Json& table = member(alpha_j, at + ".alpha", env.agents[i]);
        std::vector<int> alpha(x.num_actions(static_cast<int>(i)), -1);
        for (const auto& [from, to] : table.items()) {
          alpha[x.action_index(static_cast<int>(i), from)] =
              xp.action_index(static_cast<int>(i), str(to, aat + "." + from));
        }
        w.alpha.push_back(std::move(alpha));
      }
      if (entry.equivalence) {
        EquivalenceWitness ew;
        ew.alpha = w.alpha;
        try {
          entry.witness = AnalogyWitness::from_equivalence(x, xp, ew);
        } catch (const Error& e) {
          fail(at, e.what());
        }
      } else {
        for (size_t i = 0; i < env.agents.size(); ++i) {
          const std::string tat = at + ".tau." + env.agents[i];
          const Json& table = member(member(body, at, "tau"), at + ".tau",
                                     env.agents[i]);
          TypeMap tau;
          std::vector<double> kappa, lambda;
          const Json* kj = member_opt(body, "kappa");
          const Json* lj = member_opt(body, "lambda");
          for (const auto& [from, to] : table.items()) {
            int d = env.type_index(static_cast<int>(i), from);
            int s = env.type_index(static_cast<int>(i), str(to, tat + "." + from));
            tau.pairs.emplace_back(d, s);
            double kv = 1.0, lv = 0.0;
            if (kj) {
              const Json& row = member(*kj, at + ".kappa", env.agents[i]);
              kv = num(member(row, at + ".kappa." + env.agents[i], from),
                       at + ".kappa." + env.agents[i] + "." + from);
            }
            if (lj) {
              const Json& row = member(*lj, at + ".lambda", env.agents[i]);
              lv = num(member(row, at + ".lambda." + env.agents[i], from),
                       at + ".lambda." + env.agents[i] + "." + from);
            }
            kappa.push_back(kv);
            lambda.push_back(lv);
          }
          // Entries sort by the domain type index.
          std::vector<size_t> order(tau.pairs.size());
          for (size_t p = 0; p < order.size(); ++p) order[p] = p;
          std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            return tau.pairs[a].first < tau.pairs[b].first;
          });
          TypeMap sorted;
          std::vector<double> ks, ls;
          for (size_t p : order) {
            sorted.pairs.push_back(tau.pairs[p]);
            ks.push_back(kappa[p]);
            ls.push_back(lambda[p]);
          }
          w.tau.push_back(std::move(sorted));
          w.kappa.push_back(std::move(ks));
          w.lambda.push_back(std::move(ls));
        }
        try {
          w.validate(x, xp);
        } catch (const Error& e) {
          fail(at, e.what());
        }
        entry.witness = std::move(w);
      }
      doc.witnesses.emplace(id, std::move(entry));
    }
  }

  // Knowledge structures.
  if (const Json* kj = member_opt(root, "knowledge")) {
    for (const auto& [id, body] : kj->items()) {
      const std::string at = "$.knowledge." + id;
      KnowledgeStructure k;
      k.possible.resize(env.agents.size());
      for (size_t i = 0; i < env.agents.size(); ++i) {
        const Json& sets = member(body, at, env.agents[i]);
        for (const Json& omega_j : sets) {
          AwarenessProfile omega;
          for (const Json& indices : omega_j) {
            std::vector<int> list;
            for (const Json& c : indices) list.push_back(integer(c, at));
            std::sort(list.begin(), list.end());
            omega.push_back(std::move(list));
          }
          if (omega.size() != env.agents.size()) {
            fail(at, "awareness profiles need one index list per agent");
          }
          k.possible[i].push_back(std::move(omega));
        }
        if (k.possible[i].empty()) {
          fail(at + "." + env.agents[i], "knowledge sets must be nonempty");
        }
      }
      doc.knowledge.emplace(id, std::move(k));
    }
  }

  // Universes.
  if (const Json* uj = member_opt(root, "universes")) {
    for (const auto& [id, body] : uj->items()) {
      const std::string at = "$.universes." + id;
      ComparisonUniverse u;
      const Json& rows = member(body, at, "comparisons");
      for (size_t r = 0; r < rows.size(); ++r) {
        const std::string rat = at + ".comparisons[" + std::to_string(r) + "]";
        PayoffComparison c;
        c.mech_id = str(member(rows[r], rat, "mech"), rat + ".mech");
        const Mechanism& mech = doc.registry.get(c.mech_id);
        c.agent = env.agent_index(str(member(rows[r], rat, "agent"), rat + ".agent"));
        c.type_idx = env.type_index(c.agent,
                                    str(member(rows[r], rat, "type"), rat + ".type"));
        c.left = parse_mixed_profile(member(rows[r], rat, "left"), mech, rat + ".left");
        c.right =
            parse_mixed_profile(member(rows[r], rat, "right"), mech, rat + ".right");
        u.items.push_back(std::move(c));
      }
      u.cache_truth(doc.registry);
      doc.universes.emplace(id, std::move(u));
    }
  }

  return doc;
}

Document load_document(const std::string& path,
                       const std::vector<std::string>& extra_refs) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open document '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_document(buffer.str(), extra_refs);
}

namespace {

Json emit_mixed_profile(const MixedProfile& m, const Mechanism& mech) {
  Json rows = Json::array();
  std::vector<int> digits;
  for (const auto& [p, mass] : m.mass) {
    mech.profile_radix().decode(p, digits);
    Json labels = Json::array();
    for (int i = 0; i < mech.num_agents(); ++i) {
      labels.push_back(mech.action_sets[i][digits[i]]);
    }
    rows.push_back(Json{{"profile", labels}, {"p", format_double(mass)}});
  }
  return rows;
}

}  // namespace

std::string emit_document(const Document& doc) {
  const Environment& env = *doc.env;
  Json root;
  root["schema_version"] = doc.schema_version;

  Json env_j;
  env_j["agents"] = env.agents;
  env_j["utility"] = "table";
  Json types_j;
  for (size_t i = 0; i < env.agents.size(); ++i) {
    Json grid = Json::array();
    for (const TypePoint& t : env.type_grids[i]) {
      Json entry{{"label", t.label}};
      if (t.value) entry["value"] = format_double(*t.value);
      if (t.fn) {
        entry["theta"] = format_double(t.fn->theta);
        entry["gamma"] = format_double(t.fn->gamma);
      }
      grid.push_back(std::move(entry));
    }
    types_j[env.agents[i]] = std::move(grid);
  }
  env_j["types"] = std::move(types_j);
  env_j["outcomes"] = env.outcomes;
  Json table_j;
  for (size_t i = 0; i < env.agents.size(); ++i) {
    Json rows;
    for (size_t t = 0; t < env.type_grids[i].size(); ++t) {
      Json row;
      for (size_t y = 0; y < env.outcomes.size(); ++y) {
        row[env.outcomes[y]] = format_double(env.utility[i][t][y]);
      }
      rows[env.type_grids[i][t].label] = std::move(row);
    }
    table_j[env.agents[i]] = std::move(rows);
  }
  env_j["table"] = std::move(table_j);
  root["environment"] = std::move(env_j);

  Json mechs_j;
  for (const auto& [id, mech] : doc.registry.all()) {
    Json body;
    Json actions;
    for (size_t i = 0; i < env.agents.size(); ++i) {
      actions[env.agents[i]] = mech->action_sets[i];
    }
    body["actions"] = std::move(actions);
    Json rule = Json::array();
    std::vector<int> digits;
    for (long long p = 0; p < mech->num_profiles(); ++p) {
      mech->profile_radix().decode(p, digits);
      Json labels = Json::array();
      for (int i = 0; i < mech->num_agents(); ++i) {
        labels.push_back(mech->action_sets[i][digits[i]]);
      }
      Json outcome = Json::array();
      for (const auto& [y, q] : mech->outcome_rule[p].mass) {
        outcome.push_back(Json{{"y", env.outcomes[y]}, {"p", format_double(q)}});
      }
      rule.push_back(Json{{"profile", labels}, {"outcome", outcome}});
    }
    body["rule"] = std::move(rule);
    mechs_j[id] = std::move(body);
  }
  root["mechanisms"] = std::move(mechs_j);

  if (!doc.priors.empty()) {
    Json priors_j;
    for (const auto& [id, f] : doc.priors) {
      Json pmf = Json::array();
      std::vector<int> digits;
      for (const auto& [tp, p] : f.pmf) {
        env.type_radix.decode(tp, digits);
        Json labels = Json::array();
        for (size_t i = 0; i < env.agents.size(); ++i) {
          labels.push_back(env.type_grids[i][digits[i]].label);
        }
        pmf.push_back(Json{{"types", labels}, {"p", format_double(p)}});
      }
      priors_j[id] = Json{{"pmf", pmf}};
    }
    root["priors"] = std::move(priors_j);
  }

  if (!doc.strategies.empty()) {
    Json sj;
    for (const auto& [id, entry] : doc.strategies) {
      const Mechanism& mech = doc.registry.get(entry.mech);
      Json body;
      body["mech"] = entry.mech;
      for (size_t i = 0; i < env.agents.size(); ++i) {
        Json rows;
        for (size_t t = 0; t < env.type_grids[i].size(); ++t) {
          Json lot = Json::array();
          for (const auto& [a, p] : entry.profile.act[i][t].mass) {
            lot.push_back(Json{{"a", mech.action_sets[i][a]},
                               {"p", format_double(p)}});
          }
          rows[env.type_grids[i][t].label] = std::move(lot);
        }
        body[env.agents[i]] = std::move(rows);
      }
      sj[id] = std::move(body);
    }
    root["strategies"] = std::move(sj);
  }

  if (!doc.witnesses.empty()) {
    Json wj;
    for (const auto& [id, entry] : doc.witnesses) {
      const Mechanism& x = doc.registry.get(entry.left);
      const Mechanism& xp = doc.registry.get(entry.right);
      Json body;
      body["kind"] = entry.equivalence ? "equivalence" : "analogy";
      body["left"] = entry.left;
      body["right"] = entry.right;
      Json alpha_j;
      for (size_t i = 0; i < env.agents.size(); ++i) {
        Json table;
        for (size_t a = 0; a < entry.witness.alpha[i].size(); ++a) {
          table[x.action_sets[i][a]] = xp.action_sets[i][entry.witness.alpha[i][a]];
        }
        alpha_j[env.agents[i]] = std::move(table);
      }
      body["alpha"] = std::move(alpha_j);
      if (!entry.equivalence) {
        Json tau_j, kappa_j, lambda_j;
        for (size_t i = 0; i < env.agents.size(); ++i) {
          Json table, krow, lrow;
          for (size_t p = 0; p < entry.witness.tau[i].pairs.size(); ++p) {
            const auto [d, s] = entry.witness.tau[i].pairs[p];
            const std::string& from = env.type_grids[i][d].label;
            table[from] = env.type_grids[i][s].label;
            krow[from] = format_double(entry.witness.kappa[i][p]);
            lrow[from] = format_double(entry.witness.lambda[i][p]);
          }
          tau_j[env.agents[i]] = std::move(table);
          kappa_j[env.agents[i]] = std::move(krow);
          lambda_j[env.agents[i]] = std::move(lrow);
        }
        body["tau"] = std::move(tau_j);
        body["kappa"] = std::move(kappa_j);
        body["lambda"] = std::move(lambda_j);
      }
      wj[id] = std::move(body);
    }
    root["witnesses"] = std::move(wj);
  }

  if (!doc.knowledge.empty()) {
    Json kj;
    for (const auto& [id, k] : doc.knowledge) {
      Json body;
      for (size_t i = 0; i < env.agents.size(); ++i) {
        Json sets = Json::array();
        for (const AwarenessProfile& omega : k.possible[i]) {
          Json omega_j = Json::array();
          for (const auto& indices : omega) omega_j.push_back(indices);
          sets.push_back(std::move(omega_j));
        }
        body[env.agents[i]] = std::move(sets);
      }
      kj[id] = std::move(body);
    }
    root["knowledge"] = std::move(kj);
  }

  if (!doc.universes.empty()) {
    Json uj;
    for (const auto& [id, u] : doc.universes) {
      Json rows = Json::array();
      for (const PayoffComparison& c : u.items) {
        const Mechanism& mech = doc.registry.get(c.mech_id);
        rows.push_back(Json{{"mech", c.mech_id},
                            {"agent", env.agents[c.agent]},
                            {"type", env.type_grids[c.agent][c.type_idx].label},
                            {"left", emit_mixed_profile(c.left, mech)},
                            {"right", emit_mixed_profile(c.right, mech)}});
      }
      uj[id] = Json{{"comparisons", rows}};
    }
    root["universes"] = std::move(uj);
  }

  return root.dump(2) + "\n";
}

const Mechanism& find_mechanism(const Document& doc, const std::string& ref) {
  return doc.registry.get(ref);
}

const Prior& find_prior(const Document& doc, const std::string& id) {
  auto it = doc.priors.find(id);
  if (it == doc.priors.end()) throw InvalidInputError("unknown prior '" + id + "'");
  return it->second;
}

const Document::StrategyEntry& find_strategy(const Document& doc, const std::string& id) {
  auto it = doc.strategies.find(id);
  if (it == doc.strategies.end()) {
    throw InvalidInputError("unknown strategy '" + id + "'");
  }
  return it->second;
}

const Document::WitnessEntry& find_witness(const Document& doc, const std::string& id) {
  auto it = doc.witnesses.find(id);
  if (it == doc.witnesses.end()) {
    throw InvalidInputError("unknown witness '" + id + "'");
  }
  return it->second;
}

}  // namespace strana
