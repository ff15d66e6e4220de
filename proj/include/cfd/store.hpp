#ifndef CFD_STORE_HPP
#define CFD_STORE_HPP

#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cfd/errors.hpp"
#include "cfd/varset.hpp"

namespace cfd {

/// Dense handle for an interned Boolean variable. Name <-> id is a bijection
/// within one store.
struct VarId {
  std::uint32_t value = UINT32_MAX;

  bool valid() const { return value != UINT32_MAX; }
  friend auto operator<=>(const VarId&, const VarId&) = default;
};

/// Handle into a store's node table. Because nodes are hash-consed, two
/// NodeRefs from the same store are equal iff their subdiagrams are
/// structurally identical.
struct NodeRef {
  std::uint32_t index = UINT32_MAX;

  bool valid() const { return index != UINT32_MAX; }
  friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

enum class NodeKind : std::uint8_t { Empty = 0, Unit = 1, Case = 2, Factor = 3 };

struct Node {
  NodeKind kind;
  VarId var;        // Case only
  NodeRef child0;   // Case: hi,  Factor: left
  NodeRef child1;   // Case: lo,  Factor: right

  NodeRef hi() const { return child0; }
  NodeRef lo() const { return child1; }
  NodeRef left() const { return child0; }
  NodeRef right() const { return child1; }
};

/// Finite-support truth assignment: the variables set to 1; all others are 0.
class Assignment {
 public:
  Assignment() = default;
  explicit Assignment(std::vector<VarId> support);
  static Assignment of(std::initializer_list<VarId> vars) {
    return Assignment(std::vector<VarId>(vars));
  }

  bool contains(VarId v) const;
  bool empty() const { return support_.empty(); }
  std::size_t size() const { return support_.size(); }
  std::span<const VarId> support() const { return support_; }

  /// Copy with v added to the support.
  Assignment with(VarId v) const;
  /// Pointwise or: support union.
  Assignment united(const Assignment& other) const;

  friend auto operator<=>(const Assignment&, const Assignment&) = default;

 private:
  std::vector<VarId> support_;  // sorted, unique
};

/// Partial truth assignment: a finite map from variables to {0, 1}.
class PartialAssignment {
 public:
  PartialAssignment() = default;
  static PartialAssignment of(
      std::initializer_list<std::pair<VarId, bool>> bindings);

  std::optional<bool> get(VarId v) const;
  bool binds(VarId v) const { return get(v).has_value(); }
  std::size_t size() const { return bindings_.size(); }
  bool empty() const { return bindings_.empty(); }
  std::span<const std::pair<VarId, bool>> bindings() const { return bindings_; }

  /// Copy with v bound to value (overriding any existing binding).
  PartialAssignment with(VarId v, bool value) const;

  /// sigma ⊑ rho: every bound variable has the stated truth value in rho.
  bool consistent_with(const Assignment& rho) const;

 private:
  std::vector<std::pair<VarId, bool>> bindings_;  // sorted by VarId
};

struct Violation {
  NodeRef node;
  std::string message;
};

/// Hash-consed, append-only store of case/factor/unit/empty nodes.
///
/// Construction is single-writer; after construction every const query is
/// safe to call from multiple threads sharing the store.
class CfdStore {
 public:
  enum class Mode { checked, unchecked };

  explicit CfdStore(Mode mode = Mode::checked);

  Mode mode() const { return mode_; }

  // -- variables ------------------------------------------------------------
  VarId var(std::string_view name);
  std::optional<VarId> find_var(std::string_view name) const;
  const std::string& var_name(VarId v) const;
  std::size_t var_count() const { return var_names_.size(); }

  // -- construction ---------------------------------------------------------
  NodeRef unit() const { return kUnit; }
  NodeRef empty() const { return kEmpty; }
  NodeRef make_case(VarId var, NodeRef hi, NodeRef lo);
  NodeRef make_factor(NodeRef left, NodeRef right);
  /// Right-nested case chain: case(z1, D1, case(z2, D2, ... , empty)).
  /// An empty branch list yields the empty diagram.
  NodeRef multi_case(std::span<const std::pair<VarId, NodeRef>> branches);

  // -- queries --------------------------------------------------------------
  const Node& node(NodeRef n) const { return nodes_[n.index]; }
  NodeKind kind(NodeRef n) const { return nodes_[n.index].kind; }
  std::size_t node_count() const { return nodes_.size(); }

  /// Exact occurrence set V(n), materialized from the O(1) per-node cache.
  std::vector<VarId> vars(NodeRef n) const;
  bool mentions(NodeRef n, VarId v) const;
  std::size_t var_set_size(NodeRef n) const;
  bool open(NodeRef n) const { return var_set_size(n) > 0; }
  bool vars_disjoint(NodeRef a, NodeRef b) const;

  /// Number of distinct reachable nodes including n itself.
  std::size_t size(NodeRef n) const;

  /// Reachable nodes with children before parents; deterministic.
  std::vector<NodeRef> topo_order(NodeRef root) const;

  /// Full re-check of the structural constraints over all reachable nodes.
  /// Intended for diagrams built in unchecked mode.
  std::vector<Violation> validate(NodeRef root) const;

  static constexpr NodeRef kEmpty{0};
  static constexpr NodeRef kUnit{1};

 private:
  struct NodeKey {
    NodeKind kind;
    std::uint32_t var;
    std::uint32_t c0;
    std::uint32_t c1;
    bool operator==(const NodeKey&) const = default;
  };
  struct NodeKeyHash {
    std::size_t operator()(const NodeKey& k) const;
  };

  NodeRef intern(NodeKind kind, VarId var, NodeRef c0, NodeRef c1,
                 detail::VarSetPool::Ref varset);

  Mode mode_;
  std::vector<Node> nodes_;
  std::vector<detail::VarSetPool::Ref> varsets_;  // parallel to nodes_
  std::unordered_map<NodeKey, std::uint32_t, NodeKeyHash> unique_;
  detail::VarSetPool sets_;

  std::vector<std::string> var_names_;
  std::unordered_map<std::string, std::uint32_t, std::hash<std::string>,
                     std::equal_to<>>
      var_ids_;
};

}  // namespace cfd

template <>
struct std::hash<cfd::VarId> {
  std::size_t operator()(const cfd::VarId& v) const noexcept {
    return std::hash<std::uint32_t>{}(v.value);
  }
};

template <>
struct std::hash<cfd::NodeRef> {
  std::size_t operator()(const cfd::NodeRef& n) const noexcept {
    return std::hash<std::uint32_t>{}(n.index);
  }
};

#endif  // CFD_STORE_HPP
