#ifndef CFD_INFERENCE_HPP
#define CFD_INFERENCE_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "cfd/energy.hpp"
#include "cfd/logspace.hpp"
#include "cfd/store.hpp"

namespace cfd {

/// Per-node log partition values from one bottom-up pass.
struct InsideTable {
  NodeRef root;
  std::vector<double> log_values;  // indexed by NodeRef::index; NaN = unreached
  std::size_t nodes_visited = 0;

  double at(NodeRef n) const { return log_values[n.index]; }
  double root_log_z() const { return log_values[root.index]; }
};

/// Per-node log outside values; defined only for open nodes (NaN elsewhere).
struct OutsideTable {
  NodeRef root;
  std::vector<double> log_values;
  std::size_t nodes_visited = 0;

  double at(NodeRef n) const { return log_values[n.index]; }
};

struct ViterbiResult {
  double energy = kPosInf;              // +inf iff F(D) is empty
  std::optional<Assignment> witness;    // absent iff infeasible
  std::size_t nodes_visited = 0;
};

/// Bottom-up log partition function of every reachable node; each node is
/// visited exactly once.
InsideTable inside(const CfdStore& store, NodeRef root, const EnergyFn& psi);

/// log Z(D, psi): the root entry of the inside table.
double log_z(const CfdStore& store, NodeRef root, const EnergyFn& psi);

/// Is rho a feasible assignment of D? (exact membership test)
bool member(const CfdStore& store, NodeRef root, const Assignment& rho);

/// Gibbs probability of a feasible assignment; throws InfeasibleAssignment
/// when rho is not in F(D).
double probability(const CfdStore& store, NodeRef root, const EnergyFn& psi,
                   const Assignment& rho);

/// Minimum-energy feasible assignment. Ties at a case node prefer the
/// true branch, which makes the witness deterministic.
ViterbiResult viterbi(const CfdStore& store, NodeRef root, const EnergyFn& psi);

/// log Z(D, psi, sigma): total weight of feasible assignments extending the
/// partial assignment sigma. Runs in O(|D| * |sigma|); returns -inf when
/// sigma sets to 1 a variable that cannot be true in any feasible assignment.
double conditioned_log_z(const CfdStore& store, NodeRef root,
                         const EnergyFn& psi, const PartialAssignment& sigma);

/// P(z = 1 | D, psi, sigma) as the ratio of conditioned partition functions.
/// Throws ConditionInfeasible when Z(D, psi, sigma) = 0.
double marginal(const CfdStore& store, NodeRef root, const EnergyFn& psi,
                const PartialAssignment& sigma, VarId z);

/// Top-down outside values for every open node, given the matching inside
/// table. Each node is visited exactly once; every parent occurrence pushes
/// its contribution to each child slot separately.
OutsideTable outside(const CfdStore& store, NodeRef root, const EnergyFn& psi,
                     const InsideTable& in);

/// P(z = 1 | D, psi) for every variable of D via one inside pass, one outside
/// pass, and one accumulation over case nodes. Throws ConditionInfeasible
/// when Z(D, psi) = 0.
std::map<VarId, double> all_marginals(const CfdStore& store, NodeRef root,
                                      const EnergyFn& psi);

}  // namespace cfd

#endif  // CFD_INFERENCE_HPP
