#include "cfd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "cfd/logspace.hpp"

namespace cfd::oracle {

namespace {

// xorshift-free deterministic helpers on top of mt19937_64; avoids the
// implementation-defined std distributions
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }
  // uniform in [0, n)
  std::size_t below(std::size_t n) { return n == 0 ? 0 : next() % n; }
  int in(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(below(static_cast<std::size_t>(hi - lo + 1)));
  }
  double real(double lo, double hi) {
    double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  }
  bool chance(double p) { return real(0.0, 1.0) < p; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace

// ------------------------------------------------------------------ F(D)

namespace {

const FeasibleSet& enumerate_memo(const CfdStore& store, NodeRef n,
                                  std::vector<std::optional<FeasibleSet>>& memo) {
  auto& slot = memo[n.index];
  if (slot.has_value()) return *slot;
  const Node& nd = store.node(n);
  FeasibleSet out;
  switch (nd.kind) {
    case NodeKind::Empty:
      break;
    case NodeKind::Unit:
      out.insert(Assignment{});
      break;
    case NodeKind::Case: {
      const auto& hi = enumerate_memo(store, nd.hi(), memo);
      const auto& lo = enumerate_memo(store, nd.lo(), memo);
      for (const auto& rho : hi) out.insert(rho.with(nd.var));
      for (const auto& rho : lo) out.insert(rho);
      break;
    }
    case NodeKind::Factor: {
      const auto& left = enumerate_memo(store, nd.left(), memo);
      const auto& right = enumerate_memo(store, nd.right(), memo);
      if (left.size() * right.size() > kSetGuard) {
        throw TooLarge("feasible set exceeds the enumeration guard");
      }
      for (const auto& a : left) {
        for (const auto& b : right) out.insert(a.united(b));
      }
      break;
    }
  }
  if (out.size() > kSetGuard) {
    throw TooLarge("feasible set exceeds the enumeration guard");
  }
  slot = std::move(out);
  return *slot;
}

}  // namespace

FeasibleSet enumerate(const CfdStore& store, NodeRef root, std::size_t max_vars) {
  if (store.var_set_size(root) > max_vars) {
    throw TooLarge("diagram mentions more variables than the oracle guard");
  }
  std::vector<std::optional<FeasibleSet>> memo(store.node_count());
  return enumerate_memo(store, root, memo);
}

double brute_z(const CfdStore& store, NodeRef root, const EnergyFn& psi,
               std::size_t max_vars) {
  double total = 0.0;
  for (const auto& rho : enumerate(store, root, max_vars)) {
    total += std::exp(-psi.of(rho));
  }
  return total;
}

BruteViterbi brute_viterbi(const CfdStore& store, NodeRef root,
                           const EnergyFn& psi, std::size_t max_vars) {
  BruteViterbi out;
  auto feasible = enumerate(store, root, max_vars);
  for (const auto& rho : feasible) {
    out.energy = std::min(out.energy, psi.of(rho));
  }
  if (out.energy == kPosInf) return out;
  for (const auto& rho : feasible) {
    if (psi.of(rho) <= out.energy + 1e-12) out.argmin.insert(rho);
  }
  return out;
}

namespace {

double brute_min(const CfdStore& store, NodeRef n, const EnergyFn& psi,
                 std::vector<std::optional<FeasibleSet>>& memo) {
  double best = kPosInf;
  for (const auto& rho : enumerate_memo(store, n, memo)) {
    best = std::min(best, psi.of(rho));
  }
  return best;
}

}  // namespace

std::optional<Assignment> tiebreak_witness(const CfdStore& store, NodeRef root,
                                           const EnergyFn& psi,
                                           std::size_t max_vars) {
  if (store.var_set_size(root) > max_vars) {
    throw TooLarge("diagram mentions more variables than the oracle guard");
  }
  std::vector<std::optional<FeasibleSet>> memo(store.node_count());
  if (enumerate_memo(store, root, memo).empty()) return std::nullopt;

  std::function<Assignment(NodeRef)> pick = [&](NodeRef n) -> Assignment {
    const Node& nd = store.node(n);
    switch (nd.kind) {
      case NodeKind::Unit:
        return Assignment{};
      case NodeKind::Empty:
        throw Error("tiebreak walk reached empty");
      case NodeKind::Case: {
        double hi_min = psi(nd.var) + brute_min(store, nd.hi(), psi, memo);
        double lo_min = brute_min(store, nd.lo(), psi, memo);
        if (hi_min <= lo_min) return pick(nd.hi()).with(nd.var);
        return pick(nd.lo());
      }
      case NodeKind::Factor:
        return pick(nd.left()).united(pick(nd.right()));
    }
    return Assignment{};
  };
  return pick(root);
}

double brute_conditioned_z(const CfdStore& store, NodeRef root,
                           const EnergyFn& psi, const PartialAssignment& sigma,
                           std::size_t max_vars) {
  double total = 0.0;
  for (const auto& rho : enumerate(store, root, max_vars)) {
    if (sigma.consistent_with(rho)) total += std::exp(-psi.of(rho));
  }
  return total;
}

double brute_marginal(const CfdStore& store, NodeRef root, const EnergyFn& psi,
                      const PartialAssignment& sigma, VarId z,
                      std::size_t max_vars) {
  double denom = brute_conditioned_z(store, root, psi, sigma, max_vars);
  if (denom == 0.0) {
    throw ConditionInfeasible("condition has zero probability mass");
  }
  double num =
      brute_conditioned_z(store, root, psi, sigma.with(z, true), max_vars);
  return num / denom;
}

// ------------------------------------------------------------------ gamma

namespace {

// walks the nodes rho leads to; a case node continues into the selected
// branch only, a factor node into both children
template <typename Visit>
void gamma_walk(const CfdStore& store, NodeRef root, const Assignment& rho,
                Visit&& visit) {
  std::vector<char> seen(store.node_count(), 0);
  std::vector<NodeRef> stack{root};
  while (!stack.empty()) {
    NodeRef n = stack.back();
    stack.pop_back();
    if (seen[n.index]) continue;
    seen[n.index] = 1;
    visit(n);
    const Node& nd = store.node(n);
    switch (nd.kind) {
      case NodeKind::Case:
        stack.push_back(rho.contains(nd.var) ? nd.hi() : nd.lo());
        break;
      case NodeKind::Factor:
        stack.push_back(nd.left());
        stack.push_back(nd.right());
        break;
      default:
        break;
    }
  }
}

}  // namespace

std::set<NodeRef> gamma(const CfdStore& store, NodeRef root,
                        const Assignment& rho) {
  std::set<NodeRef> out;
  gamma_walk(store, root, rho, [&out](NodeRef n) { out.insert(n); });
  return out;
}

FeasibleSet leads_to(const CfdStore& store, NodeRef target, NodeRef root,
                     std::size_t max_vars) {
  FeasibleSet out;
  for (const auto& rho : enumerate(store, root, max_vars)) {
    if (gamma(store, root, rho).count(target)) out.insert(rho);
  }
  return out;
}

namespace {

Assignment restrict_outside(const CfdStore& store, NodeRef target,
                            const Assignment& rho) {
  std::vector<VarId> kept;
  for (VarId v : rho.support()) {
    if (!store.mentions(target, v)) kept.push_back(v);
  }
  return Assignment(std::move(kept));
}

Assignment restrict_inside(const CfdStore& store, NodeRef target,
                           const Assignment& rho) {
  std::vector<VarId> kept;
  for (VarId v : rho.support()) {
    if (store.mentions(target, v)) kept.push_back(v);
  }
  return Assignment(std::move(kept));
}

}  // namespace

ContextSet contexts(const CfdStore& store, NodeRef target, NodeRef root,
                    std::size_t max_vars) {
  ContextSet out;
  for (const auto& rho : leads_to(store, target, root, max_vars)) {
    out.insert(restrict_outside(store, target, rho));
  }
  return out;
}

double brute_outside(const CfdStore& store, NodeRef target, NodeRef root,
                     const EnergyFn& psi, std::size_t max_vars) {
  double total = 0.0;
  for (const auto& sigma : contexts(store, target, root, max_vars)) {
    total += std::exp(-psi.of(sigma));
  }
  return total;
}

// ---------------------------------------------------------- appendix suite

LemmaReport check_appendix_lemmas(const CfdStore& store, NodeRef root,
                                  std::size_t max_vars) {
  LemmaReport report;
  auto fail = [&report](std::string msg) {
    report.ok = false;
    if (report.counterexamples.size() < 20) {
      report.counterexamples.push_back(std::move(msg));
    }
  };

  auto feasible = enumerate(store, root, max_vars);
  auto topo = store.topo_order(root);
  std::vector<std::optional<FeasibleSet>> memo(store.node_count());

  // per-assignment gamma sets plus traversal path counts from the root
  for (const auto& rho : feasible) {
    std::vector<char> in_gamma(store.node_count(), 0);
    gamma_walk(store, root, rho,
               [&in_gamma](NodeRef n) { in_gamma[n.index] = 1; });

    // path counts over the traversal edges, parents before children
    std::vector<std::size_t> paths(store.node_count(), 0);
    paths[root.index] = 1;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      NodeRef n = *it;
      if (!in_gamma[n.index] || paths[n.index] == 0) continue;
      const Node& nd = store.node(n);
      if (nd.kind == NodeKind::Case) {
        NodeRef chosen = rho.contains(nd.var) ? nd.hi() : nd.lo();
        paths[chosen.index] += paths[n.index];
      } else if (nd.kind == NodeKind::Factor) {
        paths[nd.left().index] += paths[n.index];
        paths[nd.right().index] += paths[n.index];
      }
    }

    // Lemma 5: feasible assignments never lead to empty
    ++report.checks;
    if (in_gamma[store.empty().index]) {
      fail("feasible assignment leads to the empty node");
    }

    // Lemma 4: exactly one path to each open node led to
    for (NodeRef n : topo) {
      if (!in_gamma[n.index] || !store.open(n)) continue;
      ++report.checks;
      if (paths[n.index] != 1) {
        fail("open node " + std::to_string(n.index) + " reached by " +
             std::to_string(paths[n.index]) + " paths");
      }
    }

    // Lemma 11 / Lemma 12: each true variable selects exactly one case node
    std::map<VarId, int> case_hits;
    for (NodeRef n : topo) {
      const Node& nd = store.node(n);
      if (nd.kind == NodeKind::Case && in_gamma[n.index]) ++case_hits[nd.var];
    }
    for (VarId v : rho.support()) {
      ++report.checks;
      if (case_hits[v] == 0) {
        fail("true variable \"" + store.var_name(v) + "\" has no case node in gamma");
      }
    }
    for (const auto& [v, hits] : case_hits) {
      ++report.checks;
      if (hits > 1) {
        fail("variable \"" + store.var_name(v) + "\" cases " +
             std::to_string(hits) + " times in gamma");
      }
    }
  }

  // Lemma 6 and Lemma 10 quantify over nodes
  for (NodeRef target : topo) {
    FeasibleSet leading;
    for (const auto& rho : feasible) {
      if (gamma(store, root, rho).count(target)) leading.insert(rho);
    }

    for (const auto& rho : leading) {
      ++report.checks;
      Assignment inside_part = restrict_inside(store, target, rho);
      if (!enumerate_memo(store, target, memo).count(inside_part)) {
        fail("restriction of a leading assignment is infeasible at node " +
             std::to_string(target.index));
      }
    }

    ContextSet outer;
    for (const auto& rho : leading) {
      outer.insert(restrict_outside(store, target, rho));
    }
    FeasibleSet rebuilt;
    for (const auto& sigma : outer) {
      for (const auto& rho : enumerate_memo(store, target, memo)) {
        rebuilt.insert(sigma.united(rho));
      }
    }
    ++report.checks;
    if (rebuilt != leading) {
      fail("decomposition mismatch at node " + std::to_string(target.index));
    }
  }

  return report;
}

// ------------------------------------------------------------------- CKY

namespace {

struct Chart {
  int n = 0;
  int symbols = 0;
  std::vector<double> values;  // [i * (n+2) + k] * symbols + X, 1-based spans

  Chart(int n_, int symbols_, double init)
      : n(n_), symbols(symbols_),
        values(static_cast<std::size_t>(n_ + 2) * (n_ + 2) * symbols_, init) {}

  double& at(int x, int i, int k) {
    return values[(static_cast<std::size_t>(i) * (n + 2) + k) * symbols + x];
  }
  double at(int x, int i, int k) const {
    return values[(static_cast<std::size_t>(i) * (n + 2) + k) * symbols + x];
  }
};

Chart cky_inside_chart(const pcfg::CnfGrammar& grammar,
                       const std::vector<std::string>& sentence) {
  grammar.check();
  if (sentence.empty()) throw EmptySentence("sentence has no tokens");
  const int n = static_cast<int>(sentence.size());
  const int symbols = static_cast<int>(grammar.nonterminals.size());
  Chart chart(n, symbols, kNegInf);
  for (int i = 1; i <= n; ++i) {
    for (const auto& rule : grammar.lexical_rules) {
      if (rule.terminal != sentence[i - 1]) continue;
      chart.at(rule.lhs, i, i + 1) =
          log_add_exp(chart.at(rule.lhs, i, i + 1), -rule.energy);
    }
  }
  for (int width = 2; width <= n; ++width) {
    for (int i = 1; i + width <= n + 1; ++i) {
      int k = i + width;
      for (const auto& rule : grammar.binary_rules) {
        double total = kNegInf;
        for (int j = i + 1; j < k; ++j) {
          total = log_add_exp(total, chart.at(rule.left, i, j) +
                                         chart.at(rule.right, j, k));
        }
        if (total != kNegInf) {
          chart.at(rule.lhs, i, k) =
              log_add_exp(chart.at(rule.lhs, i, k), -rule.energy + total);
        }
      }
    }
  }
  return chart;
}

}  // namespace

double cky_inside(const pcfg::CnfGrammar& grammar,
                  const std::vector<std::string>& sentence) {
  auto chart = cky_inside_chart(grammar, sentence);
  return chart.at(grammar.start, 1, static_cast<int>(sentence.size()) + 1);
}

CkyViterbi cky_viterbi(const pcfg::CnfGrammar& grammar,
                       const std::vector<std::string>& sentence) {
  grammar.check();
  if (sentence.empty()) throw EmptySentence("sentence has no tokens");
  const int n = static_cast<int>(sentence.size());
  const int symbols = static_cast<int>(grammar.nonterminals.size());
  Chart best(n, symbols, kPosInf);
  // back pointers: rule index and split, encoded
  Chart back_rule(n, symbols, -1.0);
  Chart back_split(n, symbols, -1.0);

  for (int i = 1; i <= n; ++i) {
    for (std::size_t r = 0; r < grammar.lexical_rules.size(); ++r) {
      const auto& rule = grammar.lexical_rules[r];
      if (rule.terminal != sentence[i - 1]) continue;
      if (rule.energy < best.at(rule.lhs, i, i + 1)) {
        best.at(rule.lhs, i, i + 1) = rule.energy;
        back_rule.at(rule.lhs, i, i + 1) = static_cast<double>(r);
      }
    }
  }
  for (int width = 2; width <= n; ++width) {
    for (int i = 1; i + width <= n + 1; ++i) {
      int k = i + width;
      for (std::size_t r = 0; r < grammar.binary_rules.size(); ++r) {
        const auto& rule = grammar.binary_rules[r];
        for (int j = i + 1; j < k; ++j) {
          double e = rule.energy + best.at(rule.left, i, j) +
                     best.at(rule.right, j, k);
          if (e < best.at(rule.lhs, i, k)) {
            best.at(rule.lhs, i, k) = e;
            back_rule.at(rule.lhs, i, k) = static_cast<double>(r);
            back_split.at(rule.lhs, i, k) = static_cast<double>(j);
          }
        }
      }
    }
  }

  CkyViterbi out;
  out.energy = best.at(grammar.start, 1, n + 1);
  if (out.energy == kPosInf) return out;

  std::function<pcfg::ParseTree(int, int, int)> build = [&](int x, int i,
                                                            int k) {
    pcfg::ParseTree node;
    node.lhs = x;
    node.begin = i;
    node.end = k;
    if (k == i + 1) {
      node.lexical_rule = static_cast<int>(back_rule.at(x, i, k));
      return node;
    }
    int r = static_cast<int>(back_rule.at(x, i, k));
    int j = static_cast<int>(back_split.at(x, i, k));
    node.binary_rule = r;
    const auto& rule = grammar.binary_rules[r];
    node.left = std::make_unique<pcfg::ParseTree>(build(rule.left, i, j));
    node.right = std::make_unique<pcfg::ParseTree>(build(rule.right, j, k));
    return node;
  };
  out.tree = build(grammar.start, 1, n + 1);
  return out;
}

std::map<std::tuple<int, int, int>, double> cky_span_posteriors(
    const pcfg::CnfGrammar& grammar, const std::vector<std::string>& sentence) {
  auto in = cky_inside_chart(grammar, sentence);
  const int n = static_cast<int>(sentence.size());
  const int symbols = static_cast<int>(grammar.nonterminals.size());
  double total = in.at(grammar.start, 1, n + 1);
  if (total == kNegInf) {
    throw ConditionInfeasible("sentence has no parse");
  }

  Chart out(n, symbols, kNegInf);
  out.at(grammar.start, 1, n + 1) = 0.0;
  for (int width = n; width >= 2; --width) {
    for (int i = 1; i + width <= n + 1; ++i) {
      int k = i + width;
      for (const auto& rule : grammar.binary_rules) {
        double o = out.at(rule.lhs, i, k);
        if (o == kNegInf) continue;
        for (int j = i + 1; j < k; ++j) {
          double li = in.at(rule.left, i, j);
          double ri = in.at(rule.right, j, k);
          if (li == kNegInf || ri == kNegInf) continue;
          out.at(rule.left, i, j) =
              log_add_exp(out.at(rule.left, i, j), o - rule.energy + ri);
          out.at(rule.right, j, k) =
              log_add_exp(out.at(rule.right, j, k), o - rule.energy + li);
        }
      }
    }
  }

  std::map<std::tuple<int, int, int>, double> posteriors;
  for (int i = 1; i <= n; ++i) {
    for (int k = i + 1; k <= n + 1; ++k) {
      for (int x = 0; x < symbols; ++x) {
        double mass = in.at(x, i, k) + out.at(x, i, k);
        if (mass == kNegInf) continue;
        posteriors[{x, i, k}] = std::exp(mass - total);
      }
    }
  }
  return posteriors;
}

std::vector<pcfg::ParseTree> enumerate_parses(
    const pcfg::CnfGrammar& grammar, const std::vector<std::string>& sentence,
    std::size_t max_trees) {
  grammar.check();
  if (sentence.empty()) throw EmptySentence("sentence has no tokens");
  const int n = static_cast<int>(sentence.size());

  std::map<std::tuple<int, int, int>, std::vector<pcfg::ParseTree>> memo;
  std::function<const std::vector<pcfg::ParseTree>&(int, int, int)> parses =
      [&](int x, int i, int k) -> const std::vector<pcfg::ParseTree>& {
    auto key = std::make_tuple(x, i, k);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::vector<pcfg::ParseTree> out;
    if (k == i + 1) {
      for (std::size_t r = 0; r < grammar.lexical_rules.size(); ++r) {
        const auto& rule = grammar.lexical_rules[r];
        if (rule.lhs != x || rule.terminal != sentence[i - 1]) continue;
        pcfg::ParseTree leaf;
        leaf.lhs = x;
        leaf.begin = i;
        leaf.end = k;
        leaf.lexical_rule = static_cast<int>(r);
        out.push_back(std::move(leaf));
      }
    } else {
      for (std::size_t r = 0; r < grammar.binary_rules.size(); ++r) {
        const auto& rule = grammar.binary_rules[r];
        if (rule.lhs != x) continue;
        for (int j = i + 1; j < k; ++j) {
          const auto& lefts = parses(rule.left, i, j);
          if (lefts.empty()) continue;
          const auto& rights = parses(rule.right, j, k);
          for (const auto& lt : lefts) {
            for (const auto& rt : rights) {
              pcfg::ParseTree node;
              node.lhs = x;
              node.begin = i;
              node.end = k;
              node.binary_rule = static_cast<int>(r);
              node.left = std::make_unique<pcfg::ParseTree>(lt.clone());
              node.right = std::make_unique<pcfg::ParseTree>(rt.clone());
              out.push_back(std::move(node));
              if (out.size() > max_trees) {
                throw TooLarge("parse forest exceeds the enumeration guard");
              }
            }
          }
        }
      }
    }
    auto [it, _] = memo.emplace(key, std::move(out));
    return it->second;
  };

  const auto& all = parses(grammar.start, 1, n + 1);
  std::vector<pcfg::ParseTree> result;
  result.reserve(all.size());
  for (const auto& t : all) result.push_back(t.clone());
  return result;
}

// ------------------------------------------------------------------- MRF

MrfSummary enumerate_mrf(const mrf::Mrf& model) {
  MrfSummary summary;
  if (model.configuration_count() > 1000000) {
    throw TooLarge("MRF has more than 10^6 configurations");
  }
  const int n = static_cast<int>(model.variables.size());
  std::vector<int> config(n, 0);
  std::map<std::pair<int, int>, double> mass;

  auto term_energy = [&model](const mrf::Mrf::Term& term,
                              const std::vector<int>& cfg) {
    std::size_t idx = 0;
    for (int v : term.scope) {
      idx = idx * static_cast<std::size_t>(model.variables[v].domain_size) +
            static_cast<std::size_t>(cfg[v]);
    }
    return term.table[idx];
  };

  bool more = true;
  while (more) {
    double energy = 0.0;
    for (const auto& term : model.terms) energy += term_energy(term, config);
    double weight = std::exp(-energy);
    summary.z += weight;
    summary.min_energy = std::min(summary.min_energy, energy);
    ++summary.configurations;
    for (int v = 0; v < n; ++v) mass[{v, config[v]}] += weight;

    more = false;
    for (int v = n - 1; v >= 0; --v) {
      if (++config[v] < model.variables[v].domain_size) {
        more = true;
        break;
      }
      config[v] = 0;
    }
    if (n == 0) break;
  }

  for (const auto& [key, m] : mass) {
    summary.marginals[key] = summary.z > 0 ? m / summary.z : 0.0;
  }
  return summary;
}

// ------------------------------------------------------------- generators

namespace {

NodeRef random_cfd_rec(CfdStore& store, Rng& rng, std::vector<VarId> pool,
                       std::size_t depth) {
  if (pool.empty()) {
    return rng.chance(0.9) ? store.unit() : store.empty();
  }
  if (depth == 0) {
    double roll = rng.real(0.0, 1.0);
    if (roll < 0.5) {
      VarId v = pool[rng.below(pool.size())];
      return store.make_case(v, store.unit(), store.unit());
    }
    return roll < 0.92 ? store.unit() : store.empty();
  }
  double roll = rng.real(0.0, 1.0);
  if (roll < 0.55) {  // case: variable drawn outside the children's pool
    std::size_t pick = rng.below(pool.size());
    VarId v = pool[pick];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    NodeRef hi = random_cfd_rec(store, rng, pool, depth - 1);
    NodeRef lo =
        rng.chance(0.2) ? hi : random_cfd_rec(store, rng, pool, depth - 1);
    return store.make_case(v, hi, lo);
  }
  if (roll < 0.85 && pool.size() >= 2) {  // factor: pool split across children
    for (std::size_t i = pool.size() - 1; i > 0; --i) {
      std::swap(pool[i], pool[rng.below(i + 1)]);
    }
    std::size_t cut = 1 + rng.below(pool.size() - 1);
    std::vector<VarId> left_pool(pool.begin(), pool.begin() + cut);
    std::vector<VarId> right_pool(pool.begin() + cut, pool.end());
    NodeRef left = random_cfd_rec(store, rng, std::move(left_pool), depth - 1);
    NodeRef right = random_cfd_rec(store, rng, std::move(right_pool), depth - 1);
    return store.make_factor(left, right);
  }
  if (roll < 0.93) return store.unit();
  return store.empty();
}

}  // namespace

NodeRef random_cfd(CfdStore& store, std::uint64_t seed,
                   const RandomCfdOptions& options) {
  Rng rng(seed * 0x9e3779b97f4a7c15ull + 1);
  std::size_t var_count = 1 + rng.below(options.max_vars);
  std::vector<VarId> pool;
  pool.reserve(var_count);
  for (std::size_t i = 1; i <= var_count; ++i) {
    pool.push_back(store.var("x" + std::to_string(i)));
  }
  return random_cfd_rec(store, rng, std::move(pool), options.max_depth);
}

EnergyFn random_energies(const CfdStore& store, NodeRef root,
                         std::uint64_t seed, double lo, double hi) {
  Rng rng(seed ^ 0xabcdef12345ull);
  EnergyFn psi;
  for (VarId v : store.vars(root)) psi.set(v, rng.real(lo, hi));
  return psi;
}

PartialAssignment random_condition(const CfdStore& store, NodeRef root,
                                   std::uint64_t seed) {
  Rng rng(seed ^ 0x5ca1ab1eull);
  PartialAssignment sigma;
  auto vars = store.vars(root);
  if (vars.empty()) return sigma;
  std::size_t bindings = rng.below(std::min<std::size_t>(vars.size(), 4) + 1);
  for (std::size_t b = 0; b < bindings; ++b) {
    sigma = sigma.with(vars[rng.below(vars.size())], rng.chance(0.6));
  }
  return sigma;
}

mrf::Mrf random_mrf(std::uint64_t seed, const RandomMrfOptions& options) {
  Rng rng(seed * 0x2545f4914f6cdd1dull + 99);
  mrf::Mrf model;
  int n = rng.in(1, options.max_vars);
  for (int i = 0; i < n; ++i) {
    model.variables.push_back({"y" + std::to_string(i), rng.in(2, options.max_domain)});
  }
  int terms = rng.in(1, options.max_terms);
  for (int k = 0; k < terms; ++k) {
    mrf::Mrf::Term term;
    int scope_size = rng.in(1, std::min(options.max_scope, n));
    std::vector<int> vars(n);
    std::iota(vars.begin(), vars.end(), 0);
    for (int s = 0; s < scope_size; ++s) {
      std::size_t pick = rng.below(vars.size());
      term.scope.push_back(vars[pick]);
      vars.erase(vars.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    std::size_t entries = 1;
    for (int v : term.scope) {
      entries *= static_cast<std::size_t>(model.variables[v].domain_size);
    }
    term.table.reserve(entries);
    for (std::size_t e = 0; e < entries; ++e) {
      term.table.push_back(rng.real(-3.0, 3.0));
    }
    model.terms.push_back(std::move(term));
  }
  return model;
}

pcfg::CnfGrammar random_grammar(std::uint64_t seed,
                                const RandomGrammarOptions& options) {
  Rng rng(seed * 0xd1342543de82ef95ull + 7);
  pcfg::CnfGrammar grammar;
  int nts = rng.in(1, options.max_nonterminals);
  for (int i = 0; i < nts; ++i) {
    grammar.nonterminals.push_back("N" + std::to_string(i));
  }
  grammar.start = 0;
  const char* terminals[2] = {"a", "b"};
  int rules = rng.in(2, options.max_rules);
  std::set<std::tuple<int, int, int>> seen_binary;
  std::set<std::pair<int, std::string>> seen_lexical;
  for (int r = 0; r < rules; ++r) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      if (rng.chance(0.55)) {
        int lhs = rng.in(0, nts - 1);
        int left = rng.in(0, nts - 1);
        int right = rng.in(0, nts - 1);
        if (!seen_binary.insert({lhs, left, right}).second) continue;
        grammar.binary_rules.push_back({lhs, left, right, rng.real(-3.0, 3.0)});
      } else {
        int lhs = rng.in(0, nts - 1);
        std::string t = terminals[rng.below(2)];
        if (!seen_lexical.insert({lhs, t}).second) continue;
        grammar.lexical_rules.push_back({lhs, t, rng.real(-3.0, 3.0)});
      }
      break;
    }
  }
  if (grammar.lexical_rules.empty()) {
    grammar.lexical_rules.push_back({rng.in(0, nts - 1), "a", rng.real(-3.0, 3.0)});
    seen_lexical.insert({grammar.lexical_rules.back().lhs, "a"});
  }
  return grammar;
}

}  // namespace cfd::oracle
