#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "strana/game.hpp"

namespace strana {

// Outcome of one registered demonstration. `pass` is always derivable from
// the metrics; notes carry the certificates and constructions in words.
// Wall-clock time is intentionally not part of the result so identical
// inputs serialize identically.
struct DemoResult {
  std::string name;
  bool pass = false;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::pair<std::string, std::string>> notes;
};

std::vector<std::string> demo_names();

// Deterministic in (name, seed, tol). Unknown names raise InvalidInputError.
DemoResult run_demo(const std::string& name, std::uint64_t seed = 0,
                    double tol = kDefaultTol);

// Canonical serialized form; byte-identical across runs for equal inputs.
std::string canonical_json(const DemoResult& result);

}  // namespace strana
