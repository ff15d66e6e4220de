#include "cfd/mrf.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

namespace cfd::mrf {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

std::vector<int> strides(const std::vector<int>& dims) {
  std::vector<int> s(dims.size(), 1);
  for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i) {
    s[i] = s[i + 1] * dims[i + 1];
  }
  return s;
}

}  // namespace

std::size_t Mrf::configuration_count() const {
  std::size_t count = 1;
  for (const auto& v : variables) count *= static_cast<std::size_t>(v.domain_size);
  return count;
}

NormalizedMrf normalize(const Mrf& model) {
  NormalizedMrf out;
  out.variables = model.variables;

  for (const auto& term : model.terms) {
    std::vector<int> dims;
    dims.reserve(term.scope.size());
    for (int v : term.scope) dims.push_back(model.variables[v].domain_size);
    auto stride = strides(dims);
    std::size_t total = term.table.size();

    // an axis is genuine iff some pair of entries differing only there differs
    std::vector<char> genuine(term.scope.size(), 0);
    for (std::size_t a = 0; a < term.scope.size(); ++a) {
      for (std::size_t idx = 0; idx < total && !genuine[a]; ++idx) {
        int va = static_cast<int>(idx / stride[a]) % dims[a];
        if (va != 0) continue;
        for (int v = 1; v < dims[a]; ++v) {
          if (term.table[idx] != term.table[idx + v * stride[a]]) {
            genuine[a] = 1;
            break;
          }
        }
      }
    }

    std::vector<int> kept;
    for (std::size_t a = 0; a < term.scope.size(); ++a) {
      if (genuine[a]) kept.push_back(static_cast<int>(a));
    }
    if (kept.empty()) {
      out.constant_offset += term.table.empty() ? 0.0 : term.table[0];
      continue;
    }

    // canonical scope: ascending variable order
    std::sort(kept.begin(), kept.end(), [&term](int a, int b) {
      return term.scope[a] < term.scope[b];
    });
    Mrf::Term reduced;
    reduced.scope.reserve(kept.size());
    std::vector<int> new_dims;
    for (int a : kept) {
      reduced.scope.push_back(term.scope[a]);
      new_dims.push_back(dims[a]);
    }
    auto new_stride = strides(new_dims);
    std::size_t new_total = 1;
    for (int d : new_dims) new_total *= static_cast<std::size_t>(d);
    reduced.table.assign(new_total, 0.0);
    for (std::size_t nidx = 0; nidx < new_total; ++nidx) {
      std::size_t oidx = 0;
      for (std::size_t p = 0; p < kept.size(); ++p) {
        int value = static_cast<int>(nidx / new_stride[p]) % new_dims[p];
        oidx += static_cast<std::size_t>(value) * stride[kept[p]];
      }
      reduced.table[nidx] = term.table[oidx];
    }
    out.terms.push_back(std::move(reduced));
  }

  // orphan variables get a synthetic zero-energy unary term so compilation
  // still enforces exactly-one-value for them
  std::vector<char> covered(model.variables.size(), 0);
  for (const auto& term : out.terms) {
    for (int v : term.scope) covered[v] = 1;
  }
  for (std::size_t v = 0; v < model.variables.size(); ++v) {
    if (covered[v]) continue;
    Mrf::Term pad;
    pad.scope = {static_cast<int>(v)};
    pad.table.assign(model.variables[v].domain_size, 0.0);
    pad.synthetic = true;
    out.terms.push_back(std::move(pad));
  }
  return out;
}

std::size_t BooleanEncoding::value_var_count() const {
  std::size_t count = 0;
  for (const auto& row : value_vars) count += row.size();
  return count;
}

std::size_t BooleanEncoding::term_var_count() const {
  std::size_t count = 0;
  for (const auto& row : term_vars) count += row.size();
  return count;
}

BooleanEncoding encode(CfdStore& store, const NormalizedMrf& model) {
  BooleanEncoding enc;
  enc.value_vars.resize(model.variables.size());
  for (std::size_t i = 0; i < model.variables.size(); ++i) {
    const auto& var = model.variables[i];
    enc.value_vars[i].reserve(var.domain_size);
    for (int v = 0; v < var.domain_size; ++v) {
      VarId id = store.var(var.name + "=" + std::to_string(v));
      enc.value_vars[i].push_back(id);
      enc.energies.set(id, 0.0);
    }
  }

  enc.term_vars.resize(model.terms.size());
  for (std::size_t k = 0; k < model.terms.size(); ++k) {
    const auto& term = model.terms[k];
    if (term.synthetic) continue;
    std::vector<int> dims;
    for (int v : term.scope) dims.push_back(model.variables[v].domain_size);
    auto stride = strides(dims);
    enc.term_vars[k].reserve(term.table.size());
    for (std::size_t t = 0; t < term.table.size(); ++t) {
      std::string name = "t" + std::to_string(k) + "|";
      for (std::size_t p = 0; p < term.scope.size(); ++p) {
        int value = static_cast<int>(t / stride[p]) % dims[p];
        if (p) name += ",";
        name += model.variables[term.scope[p]].name + "=" + std::to_string(value);
      }
      VarId id = store.var(name);
      enc.term_vars[k].push_back(id);
      enc.energies.set(id, term.table[t]);
    }
  }
  return enc;
}

namespace {

// A subproblem: a subset of terms plus the partial assignment restricted to
// the subset's variables. Canonical (sorted) so equal subproblems share.
struct SubproblemKey {
  std::vector<int> terms;                      // sorted
  std::vector<std::pair<int, int>> assigned;   // sorted (variable, value)
  bool operator==(const SubproblemKey&) const = default;
};

struct SubproblemKeyHash {
  std::size_t operator()(const SubproblemKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (int t : k.terms) h = mix(h, static_cast<std::uint64_t>(t) + 1);
    h = mix(h, 0xfeedull);
    for (auto [v, val] : k.assigned) {
      h = mix(h, static_cast<std::uint64_t>(v) * 131 + val);
    }
    return static_cast<std::size_t>(h);
  }
};

class Compiler {
 public:
  Compiler(CfdStore& store, const NormalizedMrf& model,
           const BooleanEncoding& enc)
      : store_(store), model_(model), enc_(enc) {}

  NodeRef run() {
    std::vector<int> all(model_.terms.size());
    std::iota(all.begin(), all.end(), 0);
    return compile(std::move(all), {});
  }

 private:
  using Binding = std::vector<std::pair<int, int>>;  // sorted (var, value)

  static int lookup(const Binding& rho, int var) {
    auto it = std::lower_bound(
        rho.begin(), rho.end(), var,
        [](const std::pair<int, int>& b, int v) { return b.first < v; });
    return (it != rho.end() && it->first == var) ? it->second : -1;
  }

  NodeRef compile(std::vector<int> terms, Binding rho) {
    if (terms.empty()) return store_.unit();

    // restrict rho to the variables of this term set
    std::set<int> scope_vars;
    for (int t : terms) {
      for (int v : model_.terms[t].scope) scope_vars.insert(v);
    }
    Binding restricted;
    for (auto& b : rho) {
      if (scope_vars.count(b.first)) restricted.push_back(b);
    }

    SubproblemKey key{terms, restricted};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    NodeRef result = build(key.terms, key.assigned, scope_vars);
    memo_.emplace(std::move(key), result);
    return result;
  }

  NodeRef build(const std::vector<int>& terms, const Binding& rho,
                const std::set<int>& scope_vars) {
    // step 1: split into components connected through unassigned variables
    auto components = connected_components(terms, rho);
    if (components.size() > 1) {
      // right-nested binary factors, components ordered by smallest term
      NodeRef acc = compile(components.back(), rho);
      for (auto it = std::next(components.rbegin()); it != components.rend();
           ++it) {
        acc = store_.make_factor(compile(*it, rho), acc);
      }
      return acc;
    }

    // step 2: a single, fully assigned term becomes a one-variable leaf
    if (terms.size() == 1) {
      const auto& term = model_.terms[terms[0]];
      bool fully_assigned = true;
      for (int v : term.scope) {
        if (lookup(rho, v) < 0) {
          fully_assigned = false;
          break;
        }
      }
      if (fully_assigned) {
        if (term.synthetic) return store_.unit();
        std::vector<int> dims;
        for (int v : term.scope) dims.push_back(model_.variables[v].domain_size);
        auto stride = strides(dims);
        std::size_t tuple = 0;
        for (std::size_t p = 0; p < term.scope.size(); ++p) {
          tuple += static_cast<std::size_t>(lookup(rho, term.scope[p])) *
                   stride[p];
        }
        return store_.make_case(enc_.term_vars[terms[0]][tuple], store_.unit(),
                                store_.empty());
      }
    }

    // step 3: case on the earliest unassigned variable
    int y = -1;
    for (int v : scope_vars) {
      if (lookup(rho, v) < 0) {
        y = v;
        break;
      }
    }
    std::vector<std::pair<VarId, NodeRef>> branches;
    branches.reserve(model_.variables[y].domain_size);
    for (int value = 0; value < model_.variables[y].domain_size; ++value) {
      Binding extended = rho;
      extended.insert(std::lower_bound(extended.begin(), extended.end(),
                                       std::pair<int, int>{y, -1}),
                      {y, value});
      branches.emplace_back(enc_.value_vars[y][value],
                            compile(terms, std::move(extended)));
    }
    return store_.multi_case(branches);
  }

  std::vector<std::vector<int>> connected_components(
      const std::vector<int>& terms, const Binding& rho) {
    std::unordered_map<int, int> parent;  // term -> representative
    for (int t : terms) parent[t] = t;
    std::function<int(int)> find = [&](int t) {
      while (parent[t] != t) t = parent[t] = parent[parent[t]];
      return t;
    };
    std::unordered_map<int, int> first_term;  // unassigned var -> term
    for (int t : terms) {
      for (int v : model_.terms[t].scope) {
        if (lookup(rho, v) >= 0) continue;
        auto [it, inserted] = first_term.emplace(v, t);
        if (!inserted) parent[find(t)] = find(it->second);
      }
    }
    std::map<int, std::vector<int>> by_root;  // keyed by smallest term index
    for (int t : terms) by_root[find(t)].push_back(t);
    std::vector<std::vector<int>> components;
    components.reserve(by_root.size());
    std::vector<std::pair<int, std::vector<int>>> ordered;
    for (auto& [root, members] : by_root) {
      std::sort(members.begin(), members.end());
      ordered.emplace_back(members.front(), std::move(members));
    }
    std::sort(ordered.begin(), ordered.end());
    for (auto& [min_term, members] : ordered) {
      components.push_back(std::move(members));
    }
    return components;
  }

  CfdStore& store_;
  const NormalizedMrf& model_;
  const BooleanEncoding& enc_;
  std::unordered_map<SubproblemKey, NodeRef, SubproblemKeyHash> memo_;
};

}  // namespace

CompiledMrf compile(CfdStore& store, const NormalizedMrf& model) {
  CompiledMrf out;
  out.encoding = encode(store, model);
  out.constant_offset = model.constant_offset;
  Compiler compiler(store, model, out.encoding);
  out.root = compiler.run();
  return out;
}

int tree_width(const NormalizedMrf& model) {
  const int n = static_cast<int>(model.variables.size());
  const int t = static_cast<int>(model.terms.size());
  int width = 0;
  for (int i = 0; i < n; ++i) {
    // G_i: terms adjacent iff they share a future variable (index >= i)
    std::vector<int> parent(t);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    std::unordered_map<int, int> first_term;
    for (int k = 0; k < t; ++k) {
      for (int v : model.terms[k].scope) {
        if (v < i) continue;
        auto [it, inserted] = first_term.emplace(v, k);
        if (!inserted) parent[find(k)] = find(it->second);
      }
    }
    std::unordered_map<int, std::set<int>> past_vars;  // component -> past vars
    for (int k = 0; k < t; ++k) {
      auto& past = past_vars[find(k)];
      for (int v : model.terms[k].scope) {
        if (v <= i) past.insert(v);
      }
    }
    for (const auto& [root, past] : past_vars) {
      width = std::max(width, static_cast<int>(past.size()));
    }
  }
  return width;
}

SizeBoundReport size_bound_report(const CfdStore& store,
                                  const NormalizedMrf& model, NodeRef root) {
  SizeBoundReport report;
  report.nodes = store.size(root);
  report.term_count = model.terms.size();
  for (const auto& v : model.variables) {
    report.max_domain = std::max(report.max_domain, v.domain_size);
  }
  report.width = tree_width(model);
  report.bound = static_cast<double>(report.term_count) *
                 std::pow(static_cast<double>(report.max_domain), report.width);
  report.ratio = report.bound > 0 ? static_cast<double>(report.nodes) / report.bound
                                  : 0.0;
  return report;
}

}  // namespace cfd::mrf
