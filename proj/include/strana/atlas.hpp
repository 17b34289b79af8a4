#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "strana/game.hpp"
#include "strana/witness.hpp"

namespace strana {

// Head of a payoff situation: which mechanism, agent, and type the affine
// link attaches to.
struct SituationHead {
  std::string mech_id;
  int agent = -1;
  int type_idx = -1;

  auto operator<=>(const SituationHead&) const = default;
};

struct AffineMap {
  double slope = 1.0;
  double intercept = 0.0;

  double operator()(double u) const { return slope * u + intercept; }
  AffineMap inverse() const { return {1.0 / slope, -intercept / slope}; }
};

struct AtlasLink {
  AffineMap map;
  // Optional action correspondence (per agent, source action -> target
  // action) used to push mixed profiles across the link.
  std::optional<std::vector<std::vector<int>>> alpha;
};

struct AffineAtlas {
  std::map<std::pair<SituationHead, SituationHead>, AtlasLink> links;

  void add_link(const SituationHead& from, const SituationHead& to, AtlasLink link);
  const AtlasLink* find(const SituationHead& from, const SituationHead& to) const;
};

// A declared payoff equivalence with evaluated payoffs on both sides.
struct DeclaredEquivalence {
  SituationHead left;
  SituationHead right;
  double u_left = 0.0;
  double u_right = 0.0;
};

struct AtlasIssue {
  std::string what;
  SituationHead from;
  SituationHead to;
};

struct AtlasReport {
  bool ok = false;
  double worst_gap = 0.0;
  std::vector<AtlasIssue> issues;
};

// Checks the canonical-form conditions: every slope positive, every link
// paired with its stored inverse (within `pair_tol`), and every declared
// equivalence satisfying u_right = link(u_left) within `tol`.
AtlasReport check_atlas_validity(const AffineAtlas& atlas,
                                 const std::vector<DeclaredEquivalence>& declared,
                                 double tol = kDefaultTol, double pair_tol = 1e-9);

// Builds the atlas induced by a verified analogy witness: one link per
// (agent, tau pair) from the X-side head to the X'-side head, with slope
// kappa and intercept lambda, plus the inverse links.
AffineAtlas atlas_from_witness(const std::string& x_id, const std::string& xp_id,
                               const Mechanism& x, const Mechanism& xp,
                               const AnalogyWitness& w);

}  // namespace strana
