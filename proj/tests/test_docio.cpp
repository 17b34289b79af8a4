#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "strana/docio.hpp"
#include "strana/witness.hpp"

using namespace strana;

namespace {

std::string data(const std::string& name) {
  return std::string(STRANA_DATA_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("shipped documents load and round-trip") {
  for (const std::string name :
       {"fpa_dutch.json", "onepa_twopa_tiny.json", "kpa0_kec1_tiny.json",
        "posted_price.json", "kpa_reserve.json", "yes_no_ck.json",
        "ratio_tiny.json"}) {
    CAPTURE(name);
    Document doc = load_document(data(name));
    CHECK_FALSE(doc.registry.all().empty());

    // parse -> emit -> parse is the identity on the normalized form.
    std::string normalized = emit_document(doc);
    Document again = parse_document(normalized);
    CHECK(emit_document(again) == normalized);
  }
}

TEST_CASE("document witnesses verify as declared") {
  Document doc = load_document(data("kpa_reserve.json"));
  const auto& entry = find_witness(doc, "shift");
  WitnessReport r = verify_witness(find_mechanism(doc, "low"),
                                   find_mechanism(doc, "high"), entry.witness, 1e-12);
  CHECK(r.ok);

  Document pp = load_document(data("posted_price.json"));
  const auto& shift = find_witness(pp, "shift");
  CHECK(verify_witness(find_mechanism(pp, "cheap"), find_mechanism(pp, "dear"),
                       shift.witness, 0.0)
            .ok);
}

TEST_CASE("builtin references construct catalog mechanisms") {
  Document doc = load_document(data("onepa_twopa_tiny.json"),
                               {"builtin:kpa?k=1&r=1&bids=1,2,3"});
  const Mechanism& extra = find_mechanism(doc, "builtin:kpa?k=1&r=1&bids=1,2,3");
  CHECK(extra.num_actions(0) == 4);
  CHECK(extra.env.get() == doc.env.get());

  // A busted reference names itself in the error.
  CHECK_THROWS_AS(load_document(data("onepa_twopa_tiny.json"),
                                {"builtin:kpa?k=1&r=1&bids=1,2,3&nope=1"}),
                  SchemaError);
}

TEST_CASE("universes arrive with a fresh truth cache") {
  Document doc = load_document(data("yes_no_ck.json"));
  const ComparisonUniverse& u = doc.universes.at("u");
  REQUIRE(u.items.size() == 2);
  CHECK(u.truth[0]);
  CHECK(u.truth[1]);
  for (size_t c = 0; c < u.items.size(); ++c) {
    CHECK(u.truth[c] == comparison_truth(doc.registry, u.items[c]));
  }
}

TEST_CASE("schema errors carry the offending path") {
  auto expect_path = [](const std::string& text, const std::string& needle) {
    try {
      parse_document(text);
      FAIL("expected a schema error for ", needle);
    } catch (const SchemaError& e) {
      CAPTURE(e.path);
      CHECK(e.path.find(needle) != std::string::npos);
    }
  };

  expect_path("{", "$");
  expect_path(R"({"schema_version": "1", "environment": {"agents": ["mech"],
    "utility": "auction", "types": {"mech": [{"label": "t", "value": "1"}]}},
    "mechanisms": {"m": {"family": "posted_price", "params": {"p": "1"}}}})",
              "agents");
  expect_path(R"({"schema_version": "2"})", "schema_version");
  expect_path(R"({"schema_version": "1", "environment": {"agents": ["1"],
    "utility": "nope", "types": {"1": [{"label": "t", "value": "1"}]}},
    "mechanisms": {"m": {"family": "kpa", "params": {"bids": "0,1"}}}})",
              "utility");
  expect_path(R"({"schema_version": "1", "environment": {"agents": ["1"],
    "utility": "auction", "types": {"1": [{"label": "t", "value": "x"}]}},
    "mechanisms": {"m": {"family": "kpa", "params": {"bids": "0,1"}}}})",
              "value");
  expect_path(R"({"schema_version": "1", "environment": {"agents": ["1"],
    "utility": "auction", "types": {"1": [{"label": "t", "value": "1"}]}},
    "mechanisms": {"m": {"family": "kpa", "params": {"bids": "0,1", "zzz": "1"}}}})",
              "zzz");

  // A non-total rule is rejected with the rule's path.
  expect_path(R"({"schema_version": "1", "environment": {"agents": ["1"],
    "utility": "table", "types": {"1": [{"label": "t", "value": "1"}]},
    "outcomes": ["y"], "table": {"1": {"t": {"y": "1"}}}},
    "mechanisms": {"m": {"actions": {"1": ["a", "b"]},
      "rule": [{"profile": ["a"], "outcome": [{"y": "y", "p": "1"}]}]}}})",
              "rule");

  // Family references are rejected under table-mode environments.
  expect_path(R"({"schema_version": "1", "environment": {"agents": ["1"],
    "utility": "table", "types": {"1": [{"label": "t", "value": "1"}]},
    "outcomes": ["y"], "table": {"1": {"t": {"y": "1"}}}},
    "mechanisms": {"m": {"family": "kpa", "params": {"bids": "0,1"}}}})",
              "mechanisms.m");
}

TEST_CASE("lookup helpers raise for unknown ids") {
  Document doc = load_document(data("kpa_reserve.json"));
  CHECK_THROWS_AS(find_mechanism(doc, "nope"), InvalidInputError);
  CHECK_THROWS_AS(find_prior(doc, "nope"), InvalidInputError);
  CHECK_THROWS_AS(find_strategy(doc, "nope"), InvalidInputError);
  CHECK_THROWS_AS(find_witness(doc, "nope"), InvalidInputError);
}

TEST_CASE("numbers may be decimal strings or plain JSON numbers") {
  std::string text = R"({"schema_version": "1", "environment": {"agents": ["1"],
    "utility": "auction", "types": {"1": [{"label": "t", "value": 2.5}]}},
    "mechanisms": {"m": {"family": "posted_price", "params": {"p": "1"}}}})";
  Document doc = parse_document(text);
  CHECK(*doc.env->type_grids[0][0].value == 2.5);
}
