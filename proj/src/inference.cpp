#include "cfd/inference.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <limits>

namespace cfd {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

InsideTable inside(const CfdStore& store, NodeRef root, const EnergyFn& psi) {
  InsideTable table;
  table.root = root;
  table.log_values.assign(store.node_count(), kNaN);
  for (NodeRef n : store.topo_order(root)) {
    const Node& nd = store.node(n);
    double v;
    switch (nd.kind) {
      case NodeKind::Empty:
        v = kNegInf;
        break;
      case NodeKind::Unit:
        v = 0.0;
        break;
      case NodeKind::Case:
        v = log_add_exp(-psi(nd.var) + table.log_values[nd.hi().index],
                        table.log_values[nd.lo().index]);
        break;
      case NodeKind::Factor:
        v = table.log_values[nd.left().index] +
            table.log_values[nd.right().index];
        break;
    }
    table.log_values[n.index] = v;
    ++table.nodes_visited;
  }
  return table;
}

double log_z(const CfdStore& store, NodeRef root, const EnergyFn& psi) {
  return inside(store, root, psi).root_log_z();
}

namespace {

// True iff the all-false assignment is feasible, per node.
std::vector<char> zero_feasible(const CfdStore& store,
                                const std::vector<NodeRef>& topo) {
  std::vector<char> ok(store.node_count(), 0);
  for (NodeRef n : topo) {
    const Node& nd = store.node(n);
    switch (nd.kind) {
      case NodeKind::Unit:
        ok[n.index] = 1;
        break;
      case NodeKind::Empty:
        ok[n.index] = 0;
        break;
      case NodeKind::Case:
        ok[n.index] = ok[nd.lo().index];
        break;
      case NodeKind::Factor:
        ok[n.index] = ok[nd.left().index] && ok[nd.right().index];
        break;
    }
  }
  return ok;
}

bool member_rec(const CfdStore& store, NodeRef n, std::vector<VarId> on,
                const std::vector<char>& zero_ok) {
  if (on.empty()) return zero_ok[n.index] != 0;
  const Node& nd = store.node(n);
  switch (nd.kind) {
    case NodeKind::Unit:
    case NodeKind::Empty:
      return false;  // nonempty support cannot match a constant
    case NodeKind::Case: {
      auto it = std::find(on.begin(), on.end(), nd.var);
      NodeRef next;
      if (it != on.end()) {
        on.erase(it);
        next = nd.hi();
      } else {
        next = nd.lo();
      }
      for (VarId v : on) {
        if (!store.mentions(next, v)) return false;
      }
      return member_rec(store, next, std::move(on), zero_ok);
    }
    case NodeKind::Factor: {
      std::vector<VarId> left_on, right_on;
      for (VarId v : on) {
        if (store.mentions(nd.left(), v)) {
          left_on.push_back(v);
        } else if (store.mentions(nd.right(), v)) {
          right_on.push_back(v);
        } else {
          return false;
        }
      }
      return member_rec(store, nd.left(), std::move(left_on), zero_ok) &&
             member_rec(store, nd.right(), std::move(right_on), zero_ok);
    }
  }
  return false;
}

}  // namespace

bool member(const CfdStore& store, NodeRef root, const Assignment& rho) {
  for (VarId v : rho.support()) {
    if (!store.mentions(root, v)) return false;
  }
  auto topo = store.topo_order(root);
  auto zero_ok = zero_feasible(store, topo);
  std::vector<VarId> on(rho.support().begin(), rho.support().end());
  return member_rec(store, root, std::move(on), zero_ok);
}

double probability(const CfdStore& store, NodeRef root, const EnergyFn& psi,
                   const Assignment& rho) {
  if (!member(store, root, rho)) {
    throw InfeasibleAssignment("assignment is not in the feasible set");
  }
  return std::exp(-psi.of(rho) - log_z(store, root, psi));
}

ViterbiResult viterbi(const CfdStore& store, NodeRef root,
                      const EnergyFn& psi) {
  ViterbiResult result;
  auto topo = store.topo_order(root);
  std::vector<double> best(store.node_count(), kNaN);
  std::vector<char> take_hi(store.node_count(), 0);
  for (NodeRef n : topo) {
    const Node& nd = store.node(n);
    double v;
    switch (nd.kind) {
      case NodeKind::Empty:
        v = kPosInf;
        break;
      case NodeKind::Unit:
        v = 0.0;
        break;
      case NodeKind::Case: {
        double h = psi(nd.var) + best[nd.hi().index];
        double l = best[nd.lo().index];
        take_hi[n.index] = h <= l;  // tie prefers the true branch
        v = std::min(h, l);
        break;
      }
      case NodeKind::Factor:
        v = best[nd.left().index] + best[nd.right().index];
        break;
    }
    best[n.index] = v;
    ++result.nodes_visited;
  }
  result.energy = best[root.index];
  if (result.energy == kPosInf) return result;

  // top-down witness extraction; per-node choices are context-free, so each
  // node needs expanding at most once
  std::vector<VarId> support;
  std::vector<char> done(store.node_count(), 0);
  std::vector<NodeRef> stack{root};
  while (!stack.empty()) {
    NodeRef n = stack.back();
    stack.pop_back();
    if (done[n.index]) continue;
    done[n.index] = 1;
    const Node& nd = store.node(n);
    switch (nd.kind) {
      case NodeKind::Case:
        if (take_hi[n.index]) {
          support.push_back(nd.var);
          stack.push_back(nd.hi());
        } else {
          stack.push_back(nd.lo());
        }
        break;
      case NodeKind::Factor:
        stack.push_back(nd.left());
        stack.push_back(nd.right());
        break;
      case NodeKind::Unit:
        break;
      case NodeKind::Empty:
        assert(false && "finite-energy path reached empty");
        break;
    }
  }
  result.witness = Assignment(std::move(support));
  return result;
}

namespace {

// Fixed-width bitset over the positive bindings of sigma, one per node.
class PositiveMasks {
 public:
  PositiveMasks(const CfdStore& store, const std::vector<NodeRef>& topo,
                const PartialAssignment& sigma)
      : words_(0) {
    for (const auto& [v, val] : sigma.bindings()) {
      if (val) {
        bit_index_.emplace(v, positives_);
        ++positives_;
      }
    }
    words_ = (positives_ + 63) / 64;
    masks_.assign(store.node_count() * words_, 0);
    if (words_ == 0) return;
    for (NodeRef n : topo) {
      const Node& nd = store.node(n);
      if (nd.kind != NodeKind::Case && nd.kind != NodeKind::Factor) continue;
      auto* m = word(n);
      const auto* c0 = word(nd.child0);
      const auto* c1 = word(nd.child1);
      for (std::size_t w = 0; w < words_; ++w) m[w] = c0[w] | c1[w];
      if (nd.kind == NodeKind::Case) {
        auto it = bit_index_.find(nd.var);
        if (it != bit_index_.end()) m[it->second / 64] |= 1ull << (it->second % 64);
      }
    }
  }

  std::size_t positive_count() const { return positives_; }

  // any positive variable occurring in `outer` but not in `child`, other
  // than the case variable `z` itself
  bool blocks(const CfdStore&, NodeRef outer, NodeRef child, VarId z) const {
    if (words_ == 0) return false;
    std::uint64_t zmask[1] = {0};
    std::size_t zword = 0;
    if (auto it = bit_index_.find(z); it != bit_index_.end()) {
      zword = it->second / 64;
      zmask[0] = 1ull << (it->second % 64);
    }
    const auto* o = word(outer);
    const auto* c = word(child);
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t bits = o[w] & ~c[w];
      if (w == zword) bits &= ~zmask[0];
      if (bits) return true;
    }
    return false;
  }

  // any positive variable missing from the root's variable set
  bool positive_outside_root(NodeRef root) const {
    if (words_ == 0) return false;
    std::size_t present = 0;
    const auto* r = word(root);
    for (std::size_t w = 0; w < words_; ++w) {
      present += static_cast<std::size_t>(std::popcount(r[w]));
    }
    return present < positives_;
  }

 private:
  const std::uint64_t* word(NodeRef n) const {
    return masks_.data() + n.index * words_;
  }
  std::uint64_t* word(NodeRef n) { return masks_.data() + n.index * words_; }

  std::unordered_map<VarId, std::size_t> bit_index_;
  std::size_t positives_ = 0;
  std::size_t words_;
  std::vector<std::uint64_t> masks_;
};

}  // namespace

double conditioned_log_z(const CfdStore& store, NodeRef root,
                         const EnergyFn& psi, const PartialAssignment& sigma) {
  auto topo = store.topo_order(root);
  PositiveMasks masks(store, topo, sigma);
  if (masks.positive_outside_root(root)) return kNegInf;

  std::vector<double> value(store.node_count(), kNaN);
  for (NodeRef n : topo) {
    const Node& nd = store.node(n);
    double v;
    switch (nd.kind) {
      case NodeKind::Empty:
        v = kNegInf;
        break;
      case NodeKind::Unit:
        v = 0.0;
        break;
      case NodeKind::Factor:
        v = value[nd.left().index] + value[nd.right().index];
        break;
      case NodeKind::Case: {
        // zero-suppression correction: a branch contributes nothing if some
        // other positive variable of this node is absent from the branch
        auto branch = [&](NodeRef child) {
          return masks.blocks(store, n, child, nd.var) ? kNegInf
                                                       : value[child.index];
        };
        auto bound = sigma.get(nd.var);
        if (bound.has_value() && *bound) {
          v = -psi(nd.var) + branch(nd.hi());
        } else if (bound.has_value()) {
          v = branch(nd.lo());
        } else {
          v = log_add_exp(-psi(nd.var) + branch(nd.hi()), branch(nd.lo()));
        }
        break;
      }
    }
    value[n.index] = v;
  }
  return value[root.index];
}

double marginal(const CfdStore& store, NodeRef root, const EnergyFn& psi,
                const PartialAssignment& sigma, VarId z) {
  double denom = conditioned_log_z(store, root, psi, sigma);
  if (denom == kNegInf) {
    throw ConditionInfeasible("condition has zero probability mass");
  }
  double num = conditioned_log_z(store, root, psi, sigma.with(z, true));
  return std::exp(num - denom);
}

OutsideTable outside(const CfdStore& store, NodeRef root, const EnergyFn& psi,
                     const InsideTable& in) {
  OutsideTable table;
  table.root = root;
  table.log_values.assign(store.node_count(), kNaN);
  auto topo = store.topo_order(root);
  for (NodeRef n : topo) {
    if (store.open(n)) table.log_values[n.index] = kNegInf;
  }
  if (store.open(root)) table.log_values[root.index] = 0.0;

  auto push = [&table](NodeRef child, double contribution) {
    double& slot = table.log_values[child.index];
    slot = log_add_exp(slot, contribution);
  };

  // reverse topological: parents are finalized before their children
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    NodeRef n = *it;
    const Node& nd = store.node(n);
    ++table.nodes_visited;
    if (nd.kind == NodeKind::Case) {
      double o = table.log_values[n.index];
      if (store.open(nd.hi())) push(nd.hi(), o - psi(nd.var));
      if (store.open(nd.lo())) push(nd.lo(), o);
    } else if (nd.kind == NodeKind::Factor) {
      if (!store.open(n)) continue;
      double o = table.log_values[n.index];
      if (store.open(nd.left())) push(nd.left(), o + in.at(nd.right()));
      if (store.open(nd.right())) push(nd.right(), o + in.at(nd.left()));
    }
  }
  return table;
}

std::map<VarId, double> all_marginals(const CfdStore& store, NodeRef root,
                                      const EnergyFn& psi) {
  InsideTable in = inside(store, root, psi);
  double log_total = in.root_log_z();
  if (log_total == kNegInf) {
    throw ConditionInfeasible("partition function is zero");
  }
  OutsideTable out = outside(store, root, psi, in);

  std::map<VarId, double> log_numerators;
  for (NodeRef n : store.topo_order(root)) {
    const Node& nd = store.node(n);
    if (nd.kind != NodeKind::Case) continue;
    double term = out.at(n) - psi(nd.var) + in.at(nd.hi());
    auto [it, inserted] = log_numerators.emplace(nd.var, term);
    if (!inserted) it->second = log_add_exp(it->second, term);
  }

  std::map<VarId, double> result;
  for (const auto& [v, num] : log_numerators) {
    result.emplace(v, std::clamp(std::exp(num - log_total), 0.0, 1.0));
  }
  return result;
}

}  // namespace cfd
