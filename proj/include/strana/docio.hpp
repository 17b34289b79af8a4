#pragma once

#include <map>
#include <string>
#include <vector>

#include "strana/catalog.hpp"
#include "strana/epistemics.hpp"
#include "strana/game.hpp"
#include "strana/witness.hpp"

namespace strana {

// A parsed document: one shared environment plus everything defined over
// it. Mechanisms declared as family references are expanded to explicit
// tables at load time, so the emitted (normalized) form is always fully
// explicit. Validation failures raise SchemaError naming the offending
// path.
struct Document {
  std::string schema_version = "1";
  EnvPtr env;
  MechanismRegistry registry;
  std::vector<std::string> mechanism_order;  // declaration order for emission
  std::map<std::string, Prior> priors;

  struct StrategyEntry {
    std::string mech;  // whose action labels the lotteries use
    StrategyProfile profile;
  };
  std::map<std::string, StrategyEntry> strategies;

  struct WitnessEntry {
    std::string left;
    std::string right;
    bool equivalence = false;
    AnalogyWitness witness;  // equivalences carry identity tau, unit scale
  };
  std::map<std::string, WitnessEntry> witnesses;
  std::map<std::string, KnowledgeStructure> knowledge;
  std::map<std::string, ComparisonUniverse> universes;
};

// `extra_refs` are additional mechanism references the caller intends to
// use; entries beginning with "builtin:" (for example
// "builtin:kpa?k=1&r=1&bids=1,2,3") are constructed from the catalog
// against the document's environment and registered under the reference
// string itself.
Document parse_document(const std::string& text,
                        const std::vector<std::string>& extra_refs = {});
Document load_document(const std::string& path,
                       const std::vector<std::string>& extra_refs = {});

// Normalized emission: explicit tables, decimal-string numbers, fixed key
// order. parse(emit(doc)) reproduces the same normalized text.
std::string emit_document(const Document& doc);

// Parses a "builtin:<family>?k=v&..." reference into a family spec.
FamilySpec parse_builtin_ref(const std::string& ref);

const Mechanism& find_mechanism(const Document& doc, const std::string& ref);
const Prior& find_prior(const Document& doc, const std::string& id);
const Document::StrategyEntry& find_strategy(const Document& doc, const std::string& id);
const Document::WitnessEntry& find_witness(const Document& doc, const std::string& id);

}  // namespace strana
