#ifndef CFD_ORACLE_HPP
#define CFD_ORACLE_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cfd/energy.hpp"
#include "cfd/mrf.hpp"
#include "cfd/pcfg.hpp"
#include "cfd/store.hpp"

namespace cfd::oracle {

/// Explicit feasible set F(D). Ground truth for the property tests; every
/// routine here is allowed to be exponential and is guarded, never truncated.
using FeasibleSet = std::set<Assignment>;

/// Outside parts of the assignments leading to a node.
using ContextSet = std::set<Assignment>;

inline constexpr std::size_t kDefaultVarGuard = 20;
inline constexpr std::size_t kSetGuard = 1u << 20;

/// Exact F(D) by structural recursion. Throws TooLarge past the guards.
/// `max_vars` may be raised for diagrams known to have small feasible sets
/// (compiled parse forests); the result-size guard still applies.
FeasibleSet enumerate(const CfdStore& store, NodeRef root,
                      std::size_t max_vars = kDefaultVarGuard);

double brute_z(const CfdStore& store, NodeRef root, const EnergyFn& psi,
               std::size_t max_vars = kDefaultVarGuard);

struct BruteViterbi {
  double energy;                 // +inf when infeasible
  std::set<Assignment> argmin;   // all minimizers within 1e-12
};
BruteViterbi brute_viterbi(const CfdStore& store, NodeRef root,
                           const EnergyFn& psi,
                           std::size_t max_vars = kDefaultVarGuard);

/// The assignment the documented tie-break rule should select: at every case
/// node prefer the true branch when the branch minima are equal. Computed
/// from enumerated sets, independent of the linear-time pass.
std::optional<Assignment> tiebreak_witness(const CfdStore& store, NodeRef root,
                                           const EnergyFn& psi,
                                           std::size_t max_vars = kDefaultVarGuard);

double brute_conditioned_z(const CfdStore& store, NodeRef root,
                           const EnergyFn& psi, const PartialAssignment& sigma,
                           std::size_t max_vars = kDefaultVarGuard);

double brute_marginal(const CfdStore& store, NodeRef root, const EnergyFn& psi,
                      const PartialAssignment& sigma, VarId z,
                      std::size_t max_vars = kDefaultVarGuard);

/// Nodes that assignment rho leads to (the gamma set), as a reachability
/// closure: a case node continues into the branch selected by rho, a factor
/// node into both children.
std::set<NodeRef> gamma(const CfdStore& store, NodeRef root,
                        const Assignment& rho);

/// F(D', D): feasible assignments of D that lead to D'.
FeasibleSet leads_to(const CfdStore& store, NodeRef target, NodeRef root,
                     std::size_t max_vars = kDefaultVarGuard);

/// O(D', D): outside parts of the assignments leading to D'.
ContextSet contexts(const CfdStore& store, NodeRef target, NodeRef root,
                    std::size_t max_vars = kDefaultVarGuard);

/// Sum of e^{-psi} over the context set; the brute-force outside value.
double brute_outside(const CfdStore& store, NodeRef target, NodeRef root,
                     const EnergyFn& psi,
                     std::size_t max_vars = kDefaultVarGuard);

struct LemmaReport {
  bool ok = true;
  std::size_t checks = 0;
  std::vector<std::string> counterexamples;
};

/// Exhaustively verifies the path-uniqueness, no-empty, restriction,
/// decomposition, occurrence, and uniqueness properties of the gamma sets
/// over all feasible assignments and all reachable nodes.
LemmaReport check_appendix_lemmas(const CfdStore& store, NodeRef root,
                                  std::size_t max_vars = kDefaultVarGuard);

// ---------------------------------------------------------------- CKY refs

/// Textbook log-domain CKY inside value: log sum over parses of e^{-energy}.
double cky_inside(const pcfg::CnfGrammar& grammar,
                  const std::vector<std::string>& sentence);

struct CkyViterbi {
  double energy;  // +inf when unparseable
  std::optional<pcfg::ParseTree> tree;
};
CkyViterbi cky_viterbi(const pcfg::CnfGrammar& grammar,
                       const std::vector<std::string>& sentence);

/// Classical chart inside-outside posteriors P(span (X,i,k) used), keyed by
/// (nonterminal, i, k) with 1-based endpoints. Requires a parseable sentence.
std::map<std::tuple<int, int, int>, double> cky_span_posteriors(
    const pcfg::CnfGrammar& grammar, const std::vector<std::string>& sentence);

/// All parse trees of the sentence (exhaustive backtrace). Guarded.
std::vector<pcfg::ParseTree> enumerate_parses(
    const pcfg::CnfGrammar& grammar, const std::vector<std::string>& sentence,
    std::size_t max_trees = 1u << 20);

// ---------------------------------------------------------------- MRF ref

struct MrfSummary {
  double z = 0.0;
  double min_energy = kPosInf;
  std::size_t configurations = 0;
  /// P(y_i = v) keyed by (variable index, value index).
  std::map<std::pair<int, int>, double> marginals;
};

/// Exhaustive evaluation over all configurations of the raw model.
/// Guarded at 10^6 configurations.
MrfSummary enumerate_mrf(const mrf::Mrf& model);

// ------------------------------------------------------------- generators

struct RandomCfdOptions {
  std::size_t max_vars = 12;
  std::size_t max_depth = 5;
};

/// Deterministic per seed; satisfies the structural constraints by
/// construction (case variables drawn outside the children's pools,
/// variables partitioned across factor children).
NodeRef random_cfd(CfdStore& store, std::uint64_t seed,
                   const RandomCfdOptions& options = {});

EnergyFn random_energies(const CfdStore& store, NodeRef root,
                         std::uint64_t seed, double lo = -3.0,
                         double hi = 3.0);

PartialAssignment random_condition(const CfdStore& store, NodeRef root,
                                   std::uint64_t seed);

struct RandomMrfOptions {
  int max_vars = 8;
  int max_domain = 3;
  int max_terms = 8;
  int max_scope = 3;
};
mrf::Mrf random_mrf(std::uint64_t seed, const RandomMrfOptions& options = {});

struct RandomGrammarOptions {
  int max_nonterminals = 5;
  int max_rules = 8;
};
pcfg::CnfGrammar random_grammar(std::uint64_t seed,
                                const RandomGrammarOptions& options = {});

}  // namespace cfd::oracle

#endif  // CFD_ORACLE_HPP
