#include "cfd/varset.hpp"

namespace cfd::detail {

std::uint64_t VarSetPool::priority(std::uint32_t key) {
  // splitmix64 finalizer; fixed so treap shapes are reproducible
  std::uint64_t z = key + 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

VarSetPool::Ref VarSetPool::make(std::uint32_t key, Ref left, Ref right) {
  SetNode n{key, left, right, 1 + nodes_[left].size + nodes_[right].size};
  nodes_.push_back(n);
  return static_cast<Ref>(nodes_.size() - 1);
}

VarSetPool::Ref VarSetPool::singleton(std::uint32_t key) {
  if (key >= singletons_.size()) singletons_.resize(key + 1, kNil);
  if (singletons_[key] == kNil) singletons_[key] = make(key, kNil, kNil);
  return singletons_[key];
}

void VarSetPool::split(Ref set, std::uint32_t key, Ref& below, Ref& above) {
  if (set == kNil) {
    below = above = kNil;
    return;
  }
  const SetNode n = nodes_[set];  // copy: nodes_ may reallocate during make()
  if (n.key < key) {
    Ref rb, ra;
    split(n.right, key, rb, ra);
    below = make(n.key, n.left, rb);
    above = ra;
  } else if (n.key > key) {
    Ref lb, la;
    split(n.left, key, lb, la);
    below = lb;
    above = make(n.key, la, n.right);
  } else {
    below = n.left;
    above = n.right;
  }
}

VarSetPool::Ref VarSetPool::unite(Ref a, Ref b) {
  if (a == kNil) return b;
  if (b == kNil) return a;
  if (a == b) return a;  // structural sharing makes this common
  const SetNode na = nodes_[a];
  const SetNode nb = nodes_[b];
  if (priority(na.key) < priority(nb.key) ||
      (priority(na.key) == priority(nb.key) && na.key < nb.key)) {
    std::swap(a, b);
  }
  const SetNode root = nodes_[a];
  Ref below, above;
  split(b, root.key, below, above);
  Ref left = unite(root.left, below);
  Ref right = unite(root.right, above);
  return make(root.key, left, right);
}

bool VarSetPool::contains(Ref set, std::uint32_t key) const {
  while (set != kNil) {
    const SetNode& n = nodes_[set];
    if (key == n.key) return true;
    set = key < n.key ? n.left : n.right;
  }
  return false;
}

bool VarSetPool::disjoint(Ref a, Ref b) const {
  if (a == kNil || b == kNil) return true;
  if (a == b) return false;
  if (nodes_[a].size > nodes_[b].size) std::swap(a, b);
  // walk the smaller set, probing the larger
  std::vector<Ref> stack{a};
  while (!stack.empty()) {
    Ref cur = stack.back();
    stack.pop_back();
    if (cur == kNil) continue;
    if (cur == b) return false;
    const SetNode& n = nodes_[cur];
    if (contains(b, n.key)) return false;
    stack.push_back(n.left);
    stack.push_back(n.right);
  }
  return true;
}

}  // namespace cfd::detail
