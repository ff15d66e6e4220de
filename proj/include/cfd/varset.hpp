#ifndef CFD_VARSET_HPP
#define CFD_VARSET_HPP

#include <cstdint>
#include <vector>

namespace cfd::detail {

/// Pool of immutable, persistent sets of uint32 keys.
///
/// Sets are treaps with priorities derived from a fixed hash of the key, so
/// every operation is deterministic. Nodes are never mutated: union/insert
/// allocate only along the touched paths and share the rest, which keeps the
/// per-diagram variable sets affordable even when thousands of nodes carry
/// overlapping sets. All sets from one pool die with the pool.
class VarSetPool {
 public:
  using Ref = std::uint32_t;
  static constexpr Ref kNil = 0;

  VarSetPool() { nodes_.push_back({0, kNil, kNil, 0}); }  // slot 0 = nil

  Ref singleton(std::uint32_t key);
  Ref insert(Ref set, std::uint32_t key) { return unite(set, singleton(key)); }
  Ref unite(Ref a, Ref b);

  bool contains(Ref set, std::uint32_t key) const;
  bool disjoint(Ref a, Ref b) const;
  std::uint32_t size(Ref set) const { return nodes_[set].size; }

  /// In-order (ascending key) visit.
  template <typename Fn>
  void for_each(Ref set, Fn&& fn) const {
    if (set == kNil) return;
    for_each(nodes_[set].left, fn);
    fn(nodes_[set].key);
    for_each(nodes_[set].right, fn);
  }

  std::size_t pool_size() const { return nodes_.size(); }

 private:
  struct SetNode {
    std::uint32_t key;
    Ref left;
    Ref right;
    std::uint32_t size;
  };

  Ref make(std::uint32_t key, Ref left, Ref right);
  // halves of `set` strictly below / strictly above key
  void split(Ref set, std::uint32_t key, Ref& below, Ref& above);
  static std::uint64_t priority(std::uint32_t key);

  std::vector<SetNode> nodes_;
  std::vector<Ref> singletons_;  // cache indexed by key
};

}  // namespace cfd::detail

#endif  // CFD_VARSET_HPP
