#include "cfd/store.hpp"

#include <algorithm>

namespace cfd {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

// ---------------------------------------------------------------- Assignment

Assignment::Assignment(std::vector<VarId> support) : support_(std::move(support)) {
  std::sort(support_.begin(), support_.end());
  support_.erase(std::unique(support_.begin(), support_.end()), support_.end());
}

bool Assignment::contains(VarId v) const {
  return std::binary_search(support_.begin(), support_.end(), v);
}

Assignment Assignment::with(VarId v) const {
  if (contains(v)) return *this;
  Assignment out = *this;
  out.support_.insert(
      std::lower_bound(out.support_.begin(), out.support_.end(), v), v);
  return out;
}

Assignment Assignment::united(const Assignment& other) const {
  Assignment out;
  out.support_.reserve(support_.size() + other.support_.size());
  std::set_union(support_.begin(), support_.end(), other.support_.begin(),
                 other.support_.end(), std::back_inserter(out.support_));
  return out;
}

// -------------------------------------------------------- PartialAssignment

PartialAssignment PartialAssignment::of(
    std::initializer_list<std::pair<VarId, bool>> bindings) {
  PartialAssignment out;
  for (const auto& b : bindings) out = out.with(b.first, b.second);
  return out;
}

std::optional<bool> PartialAssignment::get(VarId v) const {
  auto it = std::lower_bound(
      bindings_.begin(), bindings_.end(), v,
      [](const std::pair<VarId, bool>& b, VarId x) { return b.first < x; });
  if (it != bindings_.end() && it->first == v) return it->second;
  return std::nullopt;
}

PartialAssignment PartialAssignment::with(VarId v, bool value) const {
  PartialAssignment out = *this;
  auto it = std::lower_bound(
      out.bindings_.begin(), out.bindings_.end(), v,
      [](const std::pair<VarId, bool>& b, VarId x) { return b.first < x; });
  if (it != out.bindings_.end() && it->first == v) {
    it->second = value;
  } else {
    out.bindings_.insert(it, {v, value});
  }
  return out;
}

bool PartialAssignment::consistent_with(const Assignment& rho) const {
  for (const auto& [v, val] : bindings_) {
    if (rho.contains(v) != val) return false;
  }
  return true;
}

// ------------------------------------------------------------------ CfdStore

std::size_t CfdStore::NodeKeyHash::operator()(const NodeKey& k) const {
  std::uint64_t h = static_cast<std::uint64_t>(k.kind);
  h = mix(h, k.var);
  h = mix(h, k.c0);
  h = mix(h, k.c1);
  return static_cast<std::size_t>(h);
}

CfdStore::CfdStore(Mode mode) : mode_(mode) {
  // fixed slots: 0 = empty, 1 = unit
  nodes_.push_back({NodeKind::Empty, VarId{}, NodeRef{}, NodeRef{}});
  varsets_.push_back(detail::VarSetPool::kNil);
  nodes_.push_back({NodeKind::Unit, VarId{}, NodeRef{}, NodeRef{}});
  varsets_.push_back(detail::VarSetPool::kNil);
}

VarId CfdStore::var(std::string_view name) {
  auto it = var_ids_.find(std::string(name));
  if (it != var_ids_.end()) return VarId{it->second};
  auto id = static_cast<std::uint32_t>(var_names_.size());
  var_names_.emplace_back(name);
  var_ids_.emplace(var_names_.back(), id);
  return VarId{id};
}

std::optional<VarId> CfdStore::find_var(std::string_view name) const {
  auto it = var_ids_.find(std::string(name));
  if (it == var_ids_.end()) return std::nullopt;
  return VarId{it->second};
}

const std::string& CfdStore::var_name(VarId v) const {
  return var_names_.at(v.value);
}

NodeRef CfdStore::intern(NodeKind kind, VarId var, NodeRef c0, NodeRef c1,
                         detail::VarSetPool::Ref varset) {
  nodes_.push_back({kind, var, c0, c1});
  varsets_.push_back(varset);
  return NodeRef{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

NodeRef CfdStore::make_case(VarId var, NodeRef hi, NodeRef lo) {
  NodeKey key{NodeKind::Case, var.value, hi.index, lo.index};
  if (auto it = unique_.find(key); it != unique_.end()) return NodeRef{it->second};
  if (mode_ == Mode::checked) {
    if (sets_.contains(varsets_[hi.index], var.value) ||
        sets_.contains(varsets_[lo.index], var.value)) {
      throw ConstraintViolation("case variable \"" + var_name(var) +
                                "\" occurs in a child diagram");
    }
  }
  auto vs = sets_.insert(sets_.unite(varsets_[hi.index], varsets_[lo.index]),
                         var.value);
  NodeRef n = intern(NodeKind::Case, var, hi, lo, vs);
  unique_.emplace(key, n.index);
  return n;
}

NodeRef CfdStore::make_factor(NodeRef left, NodeRef right) {
  NodeKey key{NodeKind::Factor, UINT32_MAX, left.index, right.index};
  if (auto it = unique_.find(key); it != unique_.end()) return NodeRef{it->second};
  if (mode_ == Mode::checked) {
    if (!sets_.disjoint(varsets_[left.index], varsets_[right.index])) {
      throw ConstraintViolation("factor children share a variable");
    }
  }
  auto vs = sets_.unite(varsets_[left.index], varsets_[right.index]);
  NodeRef n = intern(NodeKind::Factor, VarId{}, left, right, vs);
  unique_.emplace(key, n.index);
  return n;
}

NodeRef CfdStore::multi_case(
    std::span<const std::pair<VarId, NodeRef>> branches) {
  NodeRef acc = empty();
  for (auto it = branches.rbegin(); it != branches.rend(); ++it) {
    acc = make_case(it->first, it->second, acc);
  }
  return acc;
}

std::vector<VarId> CfdStore::vars(NodeRef n) const {
  std::vector<VarId> out;
  out.reserve(sets_.size(varsets_[n.index]));
  sets_.for_each(varsets_[n.index],
                 [&out](std::uint32_t key) { out.push_back(VarId{key}); });
  return out;
}

bool CfdStore::mentions(NodeRef n, VarId v) const {
  return sets_.contains(varsets_[n.index], v.value);
}

std::size_t CfdStore::var_set_size(NodeRef n) const {
  return sets_.size(varsets_[n.index]);
}

bool CfdStore::vars_disjoint(NodeRef a, NodeRef b) const {
  return sets_.disjoint(varsets_[a.index], varsets_[b.index]);
}

std::size_t CfdStore::size(NodeRef n) const { return topo_order(n).size(); }

std::vector<NodeRef> CfdStore::topo_order(NodeRef root) const {
  std::vector<NodeRef> order;
  std::vector<char> seen(nodes_.size(), 0);
  // iterative post-order: children emitted before parents
  std::vector<std::pair<NodeRef, bool>> stack{{root, false}};
  while (!stack.empty()) {
    auto [n, expanded] = stack.back();
    stack.pop_back();
    if (expanded) {
      order.push_back(n);
      continue;
    }
    if (seen[n.index]) continue;
    seen[n.index] = 1;
    stack.push_back({n, true});
    const Node& nd = nodes_[n.index];
    if (nd.kind == NodeKind::Case || nd.kind == NodeKind::Factor) {
      stack.push_back({nd.child1, false});
      stack.push_back({nd.child0, false});
    }
  }
  return order;
}

std::vector<Violation> CfdStore::validate(NodeRef root) const {
  std::vector<Violation> out;
  for (NodeRef n : topo_order(root)) {
    const Node& nd = nodes_[n.index];
    switch (nd.kind) {
      case NodeKind::Case:
        if (sets_.contains(varsets_[nd.child0.index], nd.var.value) ||
            sets_.contains(varsets_[nd.child1.index], nd.var.value)) {
          out.push_back({n, "node " + std::to_string(n.index) +
                                ": case variable \"" + var_name(nd.var) +
                                "\" occurs in a child diagram"});
        }
        break;
      case NodeKind::Factor:
        if (!sets_.disjoint(varsets_[nd.child0.index],
                            varsets_[nd.child1.index])) {
          out.push_back({n, "node " + std::to_string(n.index) +
                                ": factor children share a variable"});
        }
        break;
      default:
        break;
    }
  }
  return out;
}

}  // namespace cfd
