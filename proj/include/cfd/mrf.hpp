#ifndef CFD_MRF_HPP
#define CFD_MRF_HPP

#include <string>
#include <vector>

#include "cfd/energy.hpp"
#include "cfd/store.hpp"

namespace cfd::mrf {

/// Markov random field: general-valued variables with finite domains plus
/// tabulated energy terms over variable scopes.
struct Mrf {
  struct Variable {
    std::string name;
    int domain_size = 2;
  };

  /// Energy table over a scope. Entries are row-major over the scope order
  /// with the last scope variable varying fastest.
  struct Term {
    std::vector<int> scope;      // variable indices
    std::vector<double> table;   // size = product of scope domain sizes
    bool synthetic = false;      // added by normalization for orphan variables
  };

  std::vector<Variable> variables;
  std::vector<Term> terms;

  std::size_t configuration_count() const;
};

/// Model after scope normalization:
///   - every term scope is its true dependence set, sorted by variable order;
///   - constant terms are folded into `constant_offset` (an energy added to
///     every configuration);
///   - variables in no term carry a synthetic zero-energy unary term so the
///     compiled diagram still enforces exactly-one-value for them.
struct NormalizedMrf {
  std::vector<Mrf::Variable> variables;
  std::vector<Mrf::Term> terms;
  double constant_offset = 0.0;
};

NormalizedMrf normalize(const Mrf& model);

/// Boolean variable scheme for a normalized model: one value variable per
/// (variable, value) and one term variable per (real term, scope tuple).
/// Value variables carry zero energy; a term variable carries the table entry
/// of its tuple. Synthetic terms introduce no term variables.
struct BooleanEncoding {
  std::vector<std::vector<VarId>> value_vars;  // [variable][value]
  std::vector<std::vector<VarId>> term_vars;   // [term][tuple index]; empty for synthetic
  EnergyFn energies;

  std::size_t value_var_count() const;
  std::size_t term_var_count() const;
};

BooleanEncoding encode(CfdStore& store, const NormalizedMrf& model);

struct CompiledMrf {
  NodeRef root;
  BooleanEncoding encoding;
  /// Energy added to every configuration (folded constant terms):
  /// log Z(model) = log Z(diagram) - constant_offset and
  /// min-energy(model) = viterbi energy + constant_offset.
  double constant_offset = 0.0;
};

/// Case-factor compilation: cases on the earliest unassigned variable,
/// factors the residual term set when it disconnects, and leaves one
/// single-variable case per fully assigned term. Subproblems are memoized on
/// (term subset, restricted partial assignment), so shared subproblems are
/// shared nodes.
CompiledMrf compile(CfdStore& store, const NormalizedMrf& model);

/// Width of the model under its declared variable order: the maximum over
/// positions i of the number of past variables occurring in a connected
/// component of the future-variable sharing graph over terms.
int tree_width(const NormalizedMrf& model);

struct SizeBoundReport {
  std::size_t nodes = 0;
  std::size_t term_count = 0;
  int max_domain = 0;
  int width = 0;
  double bound = 0.0;  // term_count * max_domain^width
  double ratio = 0.0;  // nodes / bound
};

SizeBoundReport size_bound_report(const CfdStore& store,
                                  const NormalizedMrf& model, NodeRef root);

}  // namespace cfd::mrf

#endif  // CFD_MRF_HPP
