#include "strana/atlas.hpp"

#include <cmath>

namespace strana {

void AffineAtlas::add_link(const SituationHead& from, const SituationHead& to,
                           AtlasLink link) {
  links[{from, to}] = std::move(link);
}

const AtlasLink* AffineAtlas::find(const SituationHead& from,
                                   const SituationHead& to) const {
  auto it = links.find({from, to});
  return it == links.end() ? nullptr : &it->second;
}

namespace {

std::string head_str(const SituationHead& h) {
  return "(" + h.mech_id + ", agent " + std::to_string(h.agent) + ", type " +
         std::to_string(h.type_idx) + ")";
}

}  // namespace

AtlasReport check_atlas_validity(const AffineAtlas& atlas,
                                 const std::vector<DeclaredEquivalence>& declared,
                                 double tol, double pair_tol) {
  AtlasReport report;
  for (const auto& [key, link] : atlas.links) {
    const auto& [from, to] = key;
    if (!(link.map.slope > 0.0)) {
      report.issues.push_back({"nonpositive slope on link " + head_str(from) +
                                   " -> " + head_str(to),
                               from, to});
      continue;
    }
    const AtlasLink* rev = atlas.find(to, from);
    if (!rev) {
      report.issues.push_back(
          {"missing reverse link for " + head_str(from) + " -> " + head_str(to), from,
           to});
      continue;
    }
    AffineMap inv = link.map.inverse();
    if (std::abs(rev->map.slope - inv.slope) > pair_tol ||
        std::abs(rev->map.intercept - inv.intercept) > pair_tol) {
      report.issues.push_back({"reverse link is not the inverse of " +
                                   head_str(from) + " -> " + head_str(to),
                               from, to});
    }
  }
  for (const auto& eq : declared) {
    const AtlasLink* link = atlas.find(eq.left, eq.right);
    if (!link) {
      report.issues.push_back(
          {"no link covers declared equivalence " + head_str(eq.left) + " ~ " +
               head_str(eq.right),
           eq.left, eq.right});
      continue;
    }
    double gap = std::abs(eq.u_right - link->map(eq.u_left));
    report.worst_gap = std::max(report.worst_gap, gap);
    if (gap > tol) {
      report.issues.push_back({"declared equivalence off the affine map by " +
                                   std::to_string(gap),
                               eq.left, eq.right});
    }
  }
  report.ok = report.issues.empty();
  return report;
}

AffineAtlas atlas_from_witness(const std::string& x_id, const std::string& xp_id,
                               const Mechanism& x, const Mechanism& xp,
                               const AnalogyWitness& w) {
  w.validate(x, xp);
  AffineAtlas atlas;

  std::vector<std::vector<int>> alpha_inv(x.num_agents());
  for (int i = 0; i < x.num_agents(); ++i) {
    alpha_inv[i].assign(xp.num_actions(i), -1);
    for (int a = 0; a < x.num_actions(i); ++a) alpha_inv[i][w.alpha[i][a]] = a;
  }

  for (int i = 0; i < x.num_agents(); ++i) {
    for (size_t k = 0; k < w.tau[i].pairs.size(); ++k) {
      const auto [d, s] = w.tau[i].pairs[k];
      SituationHead from{x_id, i, s};
      SituationHead to{xp_id, i, d};
      AffineMap fwd{w.kappa[i][k], w.lambda[i][k]};
      atlas.add_link(from, to, AtlasLink{fwd, w.alpha});
      atlas.add_link(to, from, AtlasLink{fwd.inverse(), alpha_inv});
    }
  }
  return atlas;
}

}  // namespace strana
