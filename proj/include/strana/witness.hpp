#pragma once

#include <optional>
#include <string>
#include <vector>

#include "strana/game.hpp"

namespace strana {

// Per-agent action relabeling certifying strategic equivalence:
// alpha[i][a] is the X'-action index matched to X-action a.
struct EquivalenceWitness {
  std::vector<std::vector<int>> alpha;
};

// Bijection table between two subsets of one agent's type grid. Pairs map an
// X'-side type index to its X-side counterpart. Finite grids are rarely
// closed under the shifts and scalings the constructions need, so the table
// may cover a strict subset; a full-grid permutation is the special case.
struct TypeMap {
  std::vector<std::pair<int, int>> pairs;  // (xp_type, x_type), sorted by xp_type

  std::optional<int> image(int xp_type) const;
  std::optional<int> preimage(int x_type) const;
  void validate(int grid_size) const;  // injectivity both ways
  static TypeMap identity(int grid_size);
};

// Strategic-analogy witness X -> X'. For every agent i, X'-type t in the
// domain of tau[i], and pure X-profile a:
//   U_i^{X'}[t, alpha(a)] = kappa_i(t) * U_i^X[tau_i(t), a] + lambda_i(t).
struct AnalogyWitness {
  std::vector<std::vector<int>> alpha;   // per agent, X action -> X' action
  std::vector<TypeMap> tau;              // per agent
  std::vector<std::vector<double>> kappa;   // parallel to tau[i].pairs
  std::vector<std::vector<double>> lambda;  // parallel to tau[i].pairs

  void validate(const Mechanism& x, const Mechanism& xp) const;
  static AnalogyWitness identity(const Mechanism& x);
  static AnalogyWitness from_equivalence(const Mechanism& x, const Mechanism& xp,
                                         const EquivalenceWitness& w);
};

struct WitnessViolation {
  int agent = -1;
  int xp_type = -1;          // X'-side type index
  long long x_profile = -1;  // X-side pure profile index
  double lhs = 0.0;          // U^{X'} side
  double rhs = 0.0;          // affine image of the U^X side
};

struct WitnessReport {
  bool ok = false;
  double worst_gap = 0.0;
  std::optional<WitnessViolation> first_violation;
};

WitnessReport verify_equivalence(const Mechanism& x, const Mechanism& xp,
                                 const EquivalenceWitness& w, double tol);

WitnessReport verify_witness(const Mechanism& x, const Mechanism& xp,
                             const AnalogyWitness& w, double tol);

// Fits per-(agent, type) affine coefficients for the given relabelings,
// using the extreme payoff pair for the slope so exact witnesses give exact
// coefficients; validates every profile against `tol`. Returns nothing when
// a residual exceeds tol, a fitted slope is nonpositive, or a constant
// source row faces a non-constant image row.
struct AffineFit {
  std::vector<std::vector<double>> kappa;
  std::vector<std::vector<double>> lambda;
};
std::optional<AffineFit> fit_affine(const Mechanism& x, const Mechanism& xp,
                                    const std::vector<std::vector<int>>& alpha,
                                    const std::vector<TypeMap>& tau,
                                    double tol = kDefaultTol);

struct SearchOptions {
  long long budget = 10'000'000;
  double tol = kDefaultTol;
  bool require_lambda_zero = false;
  bool require_kappa_const = false;
  // Signature pruning is sound (an affine relation forces equal normalized
  // payoff multisets); turning it off forces the search through every
  // bijection profile, which gives an independent route to "none" results.
  bool use_signatures = true;
  // Per-agent X'-side type indices tau must cover; empty means the full grid
  // (tau is then searched over grid permutations).
  std::vector<std::vector<int>> tau_domains;
};

enum class SearchStatus { kFound, kNone, kBudgetExhausted };

struct SearchResult {
  SearchStatus status = SearchStatus::kNone;
  std::optional<AnalogyWitness> witness;
  long long nodes_explored = 0;
};

// Exhaustive backtracking over (tau, alpha) bijection profiles with affine
// fitting at the leaves. Deterministic node order: tau per agent in declared
// agent order (images tried in grid order), then alpha per agent
// (permutations in lexicographic order). Pruning compares affine-invariant
// payoff signatures, so a candidate pairing is only descended into when the
// normalized payoff multisets agree.
SearchResult search_witness(const Mechanism& x, const Mechanism& xp,
                            const SearchOptions& options = {});

// sigma'_i(t) = alpha_i-pushforward of sigma_i(tau_i(t)); X'-types outside
// the tau domain are pinned to the first action (they carry no mass in any
// prior the transfer applies to).
StrategyProfile transfer_equilibrium(const Mechanism& x, const Mechanism& xp,
                                     const AnalogyWitness& w,
                                     const StrategyProfile& sigma);

// tau_# of an X'-side prior: relabels each agent's types through tau.
// Every positive-mass type must lie in the tau domain.
Prior pushforward_prior(const Environment& env, const std::vector<TypeMap>& tau,
                        const Prior& prior);

// Transfers per-agent dominant strategies through the witness, verifying
// dominance on both sides. Entries are -1 for X'-types outside the tau
// domain; dominance of the output is re-checked on the covered types.
std::vector<std::vector<int>> transfer_dominant(
    const Mechanism& x, const Mechanism& xp, const AnalogyWitness& w,
    const std::vector<std::vector<int>>& strategies, double tol);

// Pushforward of a mixed X-profile through per-agent action relabelings.
MixedProfile push_profile(const Mechanism& x, const Mechanism& xp,
                          const std::vector<std::vector<int>>& alpha,
                          const MixedProfile& profile);

// Composition X -> X'' of witnesses X -> X' and X' -> X''.
AnalogyWitness compose_witness(const Mechanism& x, const Mechanism& xp,
                               const Mechanism& xpp, const AnalogyWitness& w,
                               const AnalogyWitness& wp);

// Inverse witness X' -> X.
AnalogyWitness invert_witness(const Mechanism& x, const Mechanism& xp,
                              const AnalogyWitness& w);

}  // namespace strana
