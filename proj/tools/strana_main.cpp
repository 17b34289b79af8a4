// Command-line front end: loads declarative documents, delegates to the
// engine, and emits reports in text, structured (JSON), or table form.
//
// Exit codes: 0 ok/pass, 1 definite negative (violation found, no witness,
// nothing dominant), 2 input error, 3 budget exhausted.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "strana/atlas.hpp"
#include "strana/catalog.hpp"
#include "strana/demos.hpp"
#include "strana/docio.hpp"
#include "strana/epistemics.hpp"
#include "strana/game.hpp"
#include "strana/text.hpp"
#include "strana/witness.hpp"

using namespace strana;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitInputError = 2;
constexpr int kExitBudget = 3;

struct Globals {
  double tol = kDefaultTol;
  std::string tol_source = "default";
  std::uint64_t seed = 0;
  double budget = 1e7;
  int jobs = 0;
  std::string format = "text";
  std::string out_path;  // empty = standard output
};

// Flat key/value report shared by every command.
struct Report {
  std::vector<std::pair<std::string, std::string>> fields;

  void add(const std::string& key, const std::string& value) {
    fields.emplace_back(key, value);
  }
  void add(const std::string& key, double value) {
    fields.emplace_back(key, format_double(value));
  }
  void add(const std::string& key, bool value) {
    fields.emplace_back(key, value ? "true" : "false");
  }
};

void print_report(const Report& report, const Globals& g) {
  std::ofstream file;
  if (!g.out_path.empty()) {
    file.open(g.out_path);
    if (!file) throw InvalidInputError("cannot write report to '" + g.out_path + "'");
  }
  std::ostream& out = g.out_path.empty() ? std::cout : file;
  if (g.format == "structured") {
    Json j;
    for (const auto& [k, v] : report.fields) j[k] = v;
    out << j.dump(2) << "\n";
    return;
  }
  if (g.format == "table") {
    size_t width = 0;
    for (const auto& [k, v] : report.fields) width = std::max(width, k.size());
    for (const auto& [k, v] : report.fields) {
      out << k << std::string(width - k.size() + 2, ' ') << v << "\n";
    }
    return;
  }
  for (const auto& [k, v] : report.fields) out << k << ": " << v << "\n";
}

void stamp(Report& report, const Globals& g) {
  report.add("tol", g.tol);
  report.add("tol_source", g.tol_source);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Reinterprets a document strategy against `target` by matching action
// labels; unknown labels raise InvalidInputError.
StrategyProfile rebind_strategy(const Document& doc,
                                const Document::StrategyEntry& entry,
                                const Mechanism& target) {
  const Mechanism& source = doc.registry.get(entry.mech);
  StrategyProfile out = entry.profile;
  for (size_t i = 0; i < out.act.size(); ++i) {
    for (auto& lot : out.act[i]) {
      for (auto& [a, p] : lot.mass) {
        a = target.action_index(static_cast<int>(i),
                                source.action_sets[i][a]);
      }
      std::sort(lot.mass.begin(), lot.mass.end());
    }
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"finite-mechanism toolkit: equilibria, strategic equivalence "
               "and analogy witnesses, knowledge transfer"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  if (const char* env_tol = std::getenv("STRANA_TOL")) {
    g.tol = std::strtod(env_tol, nullptr);
    g.tol_source = "env";
  }
  bool tol_flag = false;
  app.add_option_function<double>(
         "--tol",
         [&](double v) {
           g.tol = v;
           g.tol_source = "flag";
           tol_flag = true;
         },
         "optimality tolerance (default 1e-9; STRANA_TOL overrides)");
  app.add_option("--seed", g.seed, "random seed for probe-style commands");
  app.add_option("--budget", g.budget, "node/candidate budget (default 1e7)");
  app.add_option("--jobs", g.jobs, "parallelism cap (0 = logical cores)");
  app.add_option("--format", g.format, "text, structured, or table")
      ->check(CLI::IsMember({"text", "structured", "table"}));
  app.add_option("--out", g.out_path, "write the report to a file");

  std::string doc_path, mech_ref, left_ref, right_ref, witness_id, prior_id;
  std::string strategy_id, knowledge_id, universe_id, agent_label, type_label;
  std::string profile_csv, generators_csv, links_csv, demo_name = "all";
  std::string tau_domain_csv, family_name;
  bool find_flag = false, lambda_zero = false, kappa_const = false;
  bool no_pruning = false, check_flag = false, ck_flag = false, close_flag = false;
  int probe_trials = 0;
  int atlas_samples = 32;

  auto add_doc = [&](CLI::App* cmd) {
    cmd->add_option("--doc", doc_path, "document file")->required();
  };

  CLI::App* eval = app.add_subcommand("eval", "expected utility of a pure profile");
  add_doc(eval);
  eval->add_option("--mech", mech_ref)->required();
  eval->add_option("--agent", agent_label)->required();
  eval->add_option("--type", type_label)->required();
  eval->add_option("--profile", profile_csv, "comma-separated action labels")
      ->required();

  CLI::App* bne = app.add_subcommand("bne", "check or enumerate equilibria");
  add_doc(bne);
  bne->add_option("--mech", mech_ref)->required();
  bne->add_option("--prior", prior_id)->required();
  bne->add_option("--strategy", strategy_id);
  bne->add_flag("--find", find_flag, "enumerate pure equilibria exhaustively");

  CLI::App* dominant = app.add_subcommand("dominant", "dominant-strategy check");
  add_doc(dominant);
  dominant->add_option("--mech", mech_ref)->required();
  dominant->add_option("--agent", agent_label);

  CLI::App* check_equiv =
      app.add_subcommand("check-equiv", "verify a strategic-equivalence witness");
  add_doc(check_equiv);
  check_equiv->add_option("--left", left_ref)->required();
  check_equiv->add_option("--right", right_ref)->required();
  check_equiv->add_option("--witness", witness_id)->required();

  CLI::App* check_analogy =
      app.add_subcommand("check-analogy", "verify a strategic-analogy witness");
  add_doc(check_analogy);
  check_analogy->add_option("--left", left_ref)->required();
  check_analogy->add_option("--right", right_ref)->required();
  check_analogy->add_option("--witness", witness_id)->required();

  CLI::App* find_witness_cmd =
      app.add_subcommand("find-witness", "search for an analogy witness");
  add_doc(find_witness_cmd);
  find_witness_cmd->add_option("--left", left_ref)->required();
  find_witness_cmd->add_option("--right", right_ref)->required();
  find_witness_cmd->add_flag("--lambda-zero", lambda_zero, "require zero shifts");
  find_witness_cmd->add_flag("--kappa-const", kappa_const, "require constant scaling");
  find_witness_cmd->add_flag("--no-pruning", no_pruning, "disable signature pruning");
  find_witness_cmd->add_option("--tau-domain", tau_domain_csv,
                           "type labels tau must cover (all agents)");

  CLI::App* transfer =
      app.add_subcommand("transfer", "push a strategy profile through a witness");
  add_doc(transfer);
  transfer->add_option("--witness", witness_id)->required();
  transfer->add_option("--strategy", strategy_id)->required();
  transfer->add_option("--prior", prior_id,
                       "target-side prior (enables --check)");
  transfer->add_flag("--check", check_flag,
                     "verify equilibrium on both sides of the transfer");

  CLI::App* epistemic = app.add_subcommand("epistemic", "knowledge-level checks");
  add_doc(epistemic);
  epistemic->add_option("--mech", mech_ref);
  epistemic->add_option("--prior", prior_id);
  epistemic->add_option("--strategy", strategy_id);
  epistemic->add_flag("--ck", ck_flag, "common knowledge of equilibrium");
  epistemic->add_option("--knowledge", knowledge_id);
  epistemic->add_flag("--close", close_flag, "close generators under links");
  epistemic->add_option("--universe", universe_id);
  epistemic->add_option("--generators", generators_csv, "comparison indices");
  epistemic->add_option("--links", links_csv, "witness ids used as links");
  epistemic->add_option("--probe", probe_trials, "validity probe trials");

  CLI::App* atlas_validate =
      app.add_subcommand("atlas-validate", "canonical-form check of a witness atlas");
  add_doc(atlas_validate);
  atlas_validate->add_option("--witness", witness_id)->required();
  atlas_validate->add_option("--samples", atlas_samples,
                             "sampled equivalences per link");

  CLI::App* demo = app.add_subcommand("demo", "run registered demonstrations");
  demo->add_option("--name", demo_name, "demo id or 'all'");

  CLI::App* catalog = app.add_subcommand("catalog", "list mechanism families");
  catalog->add_option("--family", family_name, "show one family");
  std::string emit_params, emit_types;
  bool emit_flag = false;
  catalog->add_flag("--emit", emit_flag,
                    "emit a document for the family instead of listing");
  catalog->add_option("--params", emit_params,
                      "family parameters, builtin query syntax (k=1&r=1&bids=1,2,3)");
  catalog->add_option("--types", emit_types,
                      "type grid values (thetas for pricing families)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }
  (void)tol_flag;

  Report report;
  stamp(report, g);

  if (eval->parsed()) {
    Document doc = load_document(doc_path, {mech_ref});
    const Mechanism& mech = find_mechanism(doc, mech_ref);
    int agent = doc.env->agent_index(agent_label);
    int type_idx = doc.env->type_index(agent, type_label);
    std::vector<std::string> labels = split_list(profile_csv);
    if (static_cast<int>(labels.size()) != mech.num_agents()) {
      throw InvalidInputError("profile needs one action per agent");
    }
    std::vector<int> digits(mech.num_agents());
    for (int i = 0; i < mech.num_agents(); ++i) {
      digits[i] = mech.action_index(i, labels[i]);
    }
    double u = expected_utility(mech, agent, type_idx,
                                MixedProfile::pure(mech.profile_index(digits)));
    report.add("mech", mech_ref);
    report.add("agent", agent_label);
    report.add("type", type_label);
    report.add("expected_utility", u);
    print_report(report, g);
    return kExitOk;
  }

  if (bne->parsed()) {
    Document doc = load_document(doc_path, {mech_ref});
    const Mechanism& mech = find_mechanism(doc, mech_ref);
    const Prior& prior = find_prior(doc, prior_id);
    if (find_flag) {
      std::vector<StrategyProfile> found =
          find_pure_bne(mech, prior, g.tol, g.budget, g.jobs);
      report.add("equilibria_found", static_cast<double>(found.size()));
      print_report(report, g);
      return found.empty() ? kExitNegative : kExitOk;
    }
    if (strategy_id.empty()) {
      throw InvalidInputError("bne needs --strategy or --find");
    }
    BneReport r = check_bne(
        mech, prior, rebind_strategy(doc, find_strategy(doc, strategy_id), mech),
        g.tol);
    report.add("ok", r.ok);
    report.add("worst_gap", r.worst_gap);
    report.add("violations", static_cast<double>(r.violations.size()));
    report.add("skipped_zero_probability_types",
               static_cast<double>(r.skipped_types.size()));
    for (size_t v = 0; v < r.violations.size(); ++v) {
      const BneViolation& bad = r.violations[v];
      report.add("violation." + std::to_string(v),
                 "agent " + doc.env->agents[bad.agent] + " type " +
                     doc.env->type_grids[bad.agent][bad.type_idx].label +
                     " better action " +
                     mech.action_sets[bad.agent][bad.best_action] + " gap " +
                     format_double(bad.gap));
    }
    print_report(report, g);
    return r.ok ? kExitOk : kExitNegative;
  }

  if (dominant->parsed()) {
    Document doc = load_document(doc_path, {mech_ref});
    const Mechanism& mech = find_mechanism(doc, mech_ref);
    if (!agent_label.empty()) doc.env->agent_index(agent_label);  // validate
    bool all_ok = true;
    for (int i = 0; i < mech.num_agents(); ++i) {
      if (!agent_label.empty() && doc.env->agents[i] != agent_label) continue;
      auto s = dominant_strategy(mech, i, g.tol);
      report.add("agent." + doc.env->agents[i] + ".has_dominant", s.has_value());
      if (s) {
        std::string map;
        for (size_t t = 0; t < s->size(); ++t) {
          if (t) map += ", ";
          map += doc.env->type_grids[i][t].label + "->" +
                 mech.action_sets[i][(*s)[t]];
        }
        report.add("agent." + doc.env->agents[i] + ".strategy", map);
      } else {
        all_ok = false;
      }
    }
    print_report(report, g);
    return all_ok ? kExitOk : kExitNegative;
  }

  if (check_equiv->parsed() || check_analogy->parsed()) {
    Document doc = load_document(doc_path, {left_ref, right_ref});
    const Mechanism& x = find_mechanism(doc, left_ref);
    const Mechanism& xp = find_mechanism(doc, right_ref);
    const Document::WitnessEntry& entry = find_witness(doc, witness_id);
    if (check_equiv->parsed() && !entry.equivalence) {
      throw InvalidInputError("witness '" + witness_id + "' is not an equivalence");
    }
    WitnessReport r = verify_witness(x, xp, entry.witness, g.tol);
    report.add("ok", r.ok);
    report.add("worst_gap", r.worst_gap);
    if (r.first_violation) {
      report.add("first_violation.agent", doc.env->agents[r.first_violation->agent]);
      report.add("first_violation.type",
                 doc.env->type_grids[r.first_violation->agent]
                                    [r.first_violation->xp_type].label);
      report.add("first_violation.lhs", r.first_violation->lhs);
      report.add("first_violation.rhs", r.first_violation->rhs);
    }
    print_report(report, g);
    return r.ok ? kExitOk : kExitNegative;
  }

  if (find_witness_cmd->parsed()) {
    Document doc = load_document(doc_path, {left_ref, right_ref});
    const Mechanism& x = find_mechanism(doc, left_ref);
    const Mechanism& xp = find_mechanism(doc, right_ref);
    SearchOptions opt;
    opt.budget = static_cast<long long>(g.budget);
    opt.tol = g.tol;
    opt.require_lambda_zero = lambda_zero;
    opt.require_kappa_const = kappa_const;
    opt.use_signatures = !no_pruning;
    if (!tau_domain_csv.empty()) {
      std::vector<int> domain;
      for (const std::string& label : split_list(tau_domain_csv)) {
        domain.push_back(doc.env->type_index(0, label));
      }
      opt.tau_domains.assign(doc.env->agents.size(), domain);
    }
    SearchResult r = search_witness(x, xp, opt);
    report.add("nodes_explored", static_cast<double>(r.nodes_explored));
    switch (r.status) {
      case SearchStatus::kFound: {
        report.add("found", true);
        for (size_t i = 0; i < r.witness->alpha.size(); ++i) {
          std::string alpha;
          for (size_t a = 0; a < r.witness->alpha[i].size(); ++a) {
            if (a) alpha += ", ";
            alpha += x.action_sets[i][a] + "->" +
                     xp.action_sets[i][r.witness->alpha[i][a]];
          }
          report.add("alpha." + doc.env->agents[i], alpha);
          std::string tau;
          for (size_t p = 0; p < r.witness->tau[i].pairs.size(); ++p) {
            const auto [d, s] = r.witness->tau[i].pairs[p];
            if (p) tau += ", ";
            tau += doc.env->type_grids[i][d].label + "->" +
                   doc.env->type_grids[i][s].label + " (kappa " +
                   format_double(r.witness->kappa[i][p]) + ", lambda " +
                   format_double(r.witness->lambda[i][p]) + ")";
          }
          report.add("tau." + doc.env->agents[i], tau);
        }
        print_report(report, g);
        return kExitOk;
      }
      case SearchStatus::kNone:
        report.add("found", false);
        print_report(report, g);
        return kExitNegative;
      case SearchStatus::kBudgetExhausted:
        report.add("found", false);
        report.add("budget_exhausted", true);
        print_report(report, g);
        return kExitBudget;
    }
  }

  if (transfer->parsed()) {
    Document doc = load_document(doc_path);
    const Document::WitnessEntry& entry = find_witness(doc, witness_id);
    const Mechanism& x = find_mechanism(doc, entry.left);
    const Mechanism& xp = find_mechanism(doc, entry.right);
    StrategyProfile sigma =
        rebind_strategy(doc, find_strategy(doc, strategy_id), x);
    StrategyProfile moved = transfer_equilibrium(x, xp, entry.witness, sigma);
    for (size_t i = 0; i < moved.act.size(); ++i) {
      for (size_t t = 0; t < moved.act[i].size(); ++t) {
        std::string lot;
        for (const auto& [a, p] : moved.act[i][t].mass) {
          if (!lot.empty()) lot += ", ";
          lot += xp.action_sets[i][a] + ":" + format_double(p);
        }
        report.add("sigma." + doc.env->agents[i] + "." +
                       doc.env->type_grids[i][t].label,
                   lot);
      }
    }
    int code = kExitOk;
    if (check_flag) {
      if (prior_id.empty()) {
        throw InvalidInputError("--check needs the target-side --prior");
      }
      const Prior& f = find_prior(doc, prior_id);
      Prior g_prior = pushforward_prior(*doc.env, entry.witness.tau, f);
      BneReport source = check_bne(x, g_prior, sigma, g.tol);
      BneReport target = check_bne(xp, f, moved, 1e-9);
      report.add("source.ok", source.ok);
      report.add("target.ok", target.ok);
      report.add("target.worst_gap", target.worst_gap);
      code = source.ok && target.ok ? kExitOk : kExitNegative;
    }
    print_report(report, g);
    return code;
  }

  if (epistemic->parsed()) {
    Document doc = load_document(doc_path);
    if (ck_flag) {
      if (mech_ref.empty() || prior_id.empty() || strategy_id.empty() ||
          knowledge_id.empty()) {
        throw InvalidInputError("--ck needs --mech, --prior, --strategy, --knowledge");
      }
      auto it = doc.knowledge.find(knowledge_id);
      if (it == doc.knowledge.end()) {
        throw InvalidInputError("unknown knowledge structure '" + knowledge_id + "'");
      }
      CkReport r = check_ck_equilibrium(
          doc.registry, mech_ref, find_prior(doc, prior_id),
          rebind_strategy(doc, find_strategy(doc, strategy_id),
                          doc.registry.get(mech_ref)),
          it->second, {}, g.tol);
      report.add("ok", r.ok);
      report.add("universe_size", static_cast<double>(r.universe.items.size()));
      report.add("failures", static_cast<double>(r.failures.size()));
      if (!r.failures.empty()) {
        report.add("first_failure.comparison",
                   static_cast<double>(r.failures[0].comparison));
        report.add("first_failure.knowing_agent",
                   doc.env->agents[r.failures[0].agent_i]);
        report.add("first_failure.unaware_agent",
                   doc.env->agents[r.failures[0].agent_j]);
      }
      print_report(report, g);
      return r.ok ? kExitOk : kExitNegative;
    }

    // Closure and probe modes share the links and universe.
    auto universe_it = doc.universes.find(universe_id);
    if (universe_it == doc.universes.end()) {
      throw InvalidInputError("unknown universe '" + universe_id + "'");
    }
    std::vector<ClosureLink> links;
    for (const std::string& id : split_list(links_csv)) {
      const Document::WitnessEntry& entry = find_witness(doc, id);
      links.push_back(ClosureLink::from_witness(entry.left, entry.right,
                                                entry.witness));
    }
    if (close_flag) {
      std::set<int> generators;
      for (const std::string& idx : split_list(generators_csv)) {
        generators.insert(std::stoi(idx));
      }
      ClosureResult r =
          close_comparisons(generators, links, universe_it->second, doc.registry);
      std::string closed;
      for (int c : r.closed) {
        if (!closed.empty()) closed += ",";
        closed += std::to_string(c);
      }
      report.add("closed", closed);
      report.add("closed_size", static_cast<double>(r.closed.size()));
      report.add("out_of_universe", static_cast<double>(r.out_of_universe.size()));
      print_report(report, g);
      return kExitOk;
    }
    if (probe_trials > 0) {
      ValidityReport r = validity_probe(links, universe_it->second, doc.registry,
                                        probe_trials, g.seed);
      report.add("trials", static_cast<double>(r.trials));
      report.add("violations", static_cast<double>(r.violations));
      if (r.first) {
        report.add("first_violation.trial", static_cast<double>(r.first->trial));
        report.add("first_violation.comparison",
                   static_cast<double>(r.first->derived_index));
      }
      print_report(report, g);
      return r.violations == 0 ? kExitOk : kExitNegative;
    }
    throw InvalidInputError("epistemic needs one of --ck, --close, --probe");
  }

  if (atlas_validate->parsed()) {
    Document doc = load_document(doc_path);
    const Document::WitnessEntry& entry = find_witness(doc, witness_id);
    const Mechanism& x = find_mechanism(doc, entry.left);
    const Mechanism& xp = find_mechanism(doc, entry.right);
    AffineAtlas atlas =
        atlas_from_witness(entry.left, entry.right, x, xp, entry.witness);

    // Sample declared equivalences through the witness's own pushforward.
    std::vector<DeclaredEquivalence> declared;
    std::mt19937_64 rng(g.seed);
    for (int i = 0; i < x.num_agents(); ++i) {
      for (const auto& [d, s] : entry.witness.tau[i].pairs) {
        for (int trial = 0; trial < atlas_samples; ++trial) {
          MixedProfile a;
          double total = 0.0;
          std::vector<double> w(x.num_profiles());
          for (double& v : w) {
            v = static_cast<double>(rng() % 997 + 1);
            total += v;
          }
          for (long long p = 0; p < x.num_profiles(); ++p) {
            a.mass.emplace_back(p, w[p] / total);
          }
          MixedProfile b = push_profile(x, xp, entry.witness.alpha, a);
          declared.push_back({{entry.left, i, s},
                              {entry.right, i, d},
                              expected_utility(x, i, s, a),
                              expected_utility(xp, i, d, b)});
        }
      }
    }
    AtlasReport r = check_atlas_validity(atlas, declared, g.tol);
    report.add("ok", r.ok);
    report.add("links", static_cast<double>(atlas.links.size()));
    report.add("declared_checked", static_cast<double>(declared.size()));
    report.add("worst_gap", r.worst_gap);
    for (size_t i = 0; i < r.issues.size(); ++i) {
      report.add("issue." + std::to_string(i), r.issues[i].what);
    }
    print_report(report, g);
    return r.ok ? kExitOk : kExitNegative;
  }

  if (demo->parsed()) {
    std::vector<std::string> names =
        demo_name == "all" ? demo_names() : std::vector<std::string>{demo_name};
    bool all_pass = true;
    for (const std::string& name : names) {
      DemoResult r = run_demo(name, g.seed, g.tol);
      all_pass = all_pass && r.pass;
      if (g.format == "structured") {
        std::cout << canonical_json(r) << "\n";
      } else {
        std::cout << (r.pass ? "[pass] " : "[FAIL] ") << name << "\n";
        for (const auto& [k, v] : r.metrics) {
          std::cout << "  " << k << ": " << format_double(v) << "\n";
        }
      }
    }
    return all_pass ? kExitOk : kExitNegative;
  }

  if (catalog->parsed()) {
    if (emit_flag) {
      if (family_name.empty()) {
        throw InvalidInputError("--emit needs --family");
      }
      FamilySpec spec = parse_builtin_ref(
          "builtin:" + family_name +
          (emit_params.empty() ? "" : "?" + emit_params));
      for (const std::string& v : split_list(emit_types)) {
        double value = std::strtod(v.c_str(), nullptr);
        if (utility_family_for(family_name) == UtilityFamily::kPricing) {
          spec.thetas.push_back(value);
        } else {
          spec.types.push_back(value);
        }
      }
      auto [env, mech] = make_mechanism(spec);
      Document doc;
      doc.env = env;
      doc.registry.add(family_name, mech);
      doc.mechanism_order.push_back(family_name);
      std::ofstream file;
      if (!g.out_path.empty()) file.open(g.out_path);
      (g.out_path.empty() ? std::cout : file) << emit_document(doc);
      return kExitOk;
    }
    for (const auto& [name, description] : catalog_families()) {
      if (!family_name.empty() && family_name != name) continue;
      if (g.format == "structured") {
        Json j{{"family", name}, {"description", description}};
        std::cout << j.dump() << "\n";
      } else {
        std::cout << name << ": " << description << "\n";
      }
    }
    return kExitOk;
  }

  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const BudgetError& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}
