#include "cfd/pcfg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <tuple>

#include "cfd/errors.hpp"

namespace cfd::pcfg {

int CnfGrammar::nonterminal(const std::string& name) const {
  for (std::size_t i = 0; i < nonterminals.size(); ++i) {
    if (nonterminals[i] == name) return static_cast<int>(i);
  }
  return -1;
}

void CnfGrammar::check() const {
  const int n = static_cast<int>(nonterminals.size());
  if (n == 0) throw GrammarNotCnf("grammar has no nonterminals");
  if (start < 0 || start >= n) throw GrammarNotCnf("start symbol out of range");
  std::set<std::tuple<int, int, int>> seen_binary;
  for (const auto& r : binary_rules) {
    if (r.lhs < 0 || r.lhs >= n || r.left < 0 || r.left >= n || r.right < 0 ||
        r.right >= n) {
      throw GrammarNotCnf("binary rule references an unknown nonterminal");
    }
    if (!std::isfinite(r.energy)) throw GrammarNotCnf("rule energy not finite");
    if (!seen_binary.insert({r.lhs, r.left, r.right}).second) {
      throw GrammarNotCnf("duplicate binary rule");
    }
  }
  std::set<std::pair<int, std::string>> seen_lexical;
  for (const auto& r : lexical_rules) {
    if (r.lhs < 0 || r.lhs >= n) {
      throw GrammarNotCnf("lexical rule references an unknown nonterminal");
    }
    if (r.terminal.empty()) throw GrammarNotCnf("empty terminal symbol");
    if (!std::isfinite(r.energy)) throw GrammarNotCnf("rule energy not finite");
    if (!seen_lexical.insert({r.lhs, r.terminal}).second) {
      throw GrammarNotCnf("duplicate lexical rule");
    }
  }
}

ParseTree ParseTree::clone() const {
  ParseTree out;
  out.lhs = lhs;
  out.begin = begin;
  out.end = end;
  out.binary_rule = binary_rule;
  out.lexical_rule = lexical_rule;
  if (left) out.left = std::make_unique<ParseTree>(left->clone());
  if (right) out.right = std::make_unique<ParseTree>(right->clone());
  return out;
}

bool ParseTree::same_as(const ParseTree& other) const {
  if (lhs != other.lhs || begin != other.begin || end != other.end ||
      binary_rule != other.binary_rule || lexical_rule != other.lexical_rule) {
    return false;
  }
  if (static_cast<bool>(left) != static_cast<bool>(other.left)) return false;
  if (static_cast<bool>(right) != static_cast<bool>(other.right)) return false;
  if (left && !left->same_as(*other.left)) return false;
  if (right && !right->same_as(*other.right)) return false;
  return true;
}

double ParseTree::energy(const CnfGrammar& grammar) const {
  double total = binary_rule >= 0 ? grammar.binary_rules[binary_rule].energy
                                  : grammar.lexical_rules[lexical_rule].energy;
  if (left) total += left->energy(grammar);
  if (right) total += right->energy(grammar);
  return total;
}

std::string ParseTree::bracketed(const CnfGrammar& grammar) const {
  if (lexical_rule >= 0) {
    return "(" + grammar.nonterminals[lhs] + " " +
           grammar.lexical_rules[lexical_rule].terminal + ")";
  }
  return "(" + grammar.nonterminals[lhs] + " " + left->bracketed(grammar) +
         " " + right->bracketed(grammar) + ")";
}

// ------------------------------------------------------------ ParseVarScheme

ParseVarScheme::ParseVarScheme(const CnfGrammar& grammar, int n)
    : grammar_(grammar), n_(n) {}

std::uint64_t ParseVarScheme::pack(int a, int b, int c, int d) {
  return (static_cast<std::uint64_t>(static_cast<std::uint16_t>(a)) << 48) |
         (static_cast<std::uint64_t>(static_cast<std::uint16_t>(b)) << 32) |
         (static_cast<std::uint64_t>(static_cast<std::uint16_t>(c)) << 16) |
         static_cast<std::uint64_t>(static_cast<std::uint16_t>(d));
}

VarId ParseVarScheme::phrase(CfdStore& store, int lhs, int i, int k) {
  auto key = pack(lhs, i, k, 0);
  if (auto it = phrase_.find(key); it != phrase_.end()) return it->second;
  VarId v = store.var(grammar_.nonterminals[lhs] + "_" + std::to_string(i) +
                      "," + std::to_string(k));
  phrase_.emplace(key, v);
  info_.emplace(v, VarInfo{VarInfo::Kind::Phrase, lhs, -1, i, 0, k});
  created_.push_back(v);
  return v;
}

VarId ParseVarScheme::branch(CfdStore& store, int rule, int i, int j, int k) {
  auto key = pack(rule, i, j, k);
  if (auto it = branch_.find(key); it != branch_.end()) return it->second;
  const auto& r = grammar_.binary_rules[rule];
  auto span = [](const std::string& sym, int a, int b) {
    return sym + "_" + std::to_string(a) + "," + std::to_string(b);
  };
  VarId v = store.var(span(grammar_.nonterminals[r.lhs], i, k) + "->" +
                      span(grammar_.nonterminals[r.left], i, j) + "." +
                      span(grammar_.nonterminals[r.right], j, k));
  branch_.emplace(key, v);
  info_.emplace(v, VarInfo{VarInfo::Kind::Branch, r.lhs, rule, i, j, k});
  created_.push_back(v);
  return v;
}

VarId ParseVarScheme::terminal(CfdStore& store, int rule, int i) {
  auto key = pack(rule, i, 0, 0);
  if (auto it = terminal_.find(key); it != terminal_.end()) return it->second;
  const auto& r = grammar_.lexical_rules[rule];
  VarId v = store.var(grammar_.nonterminals[r.lhs] + "_" + std::to_string(i) +
                      "," + std::to_string(i + 1) + "->" + r.terminal);
  terminal_.emplace(key, v);
  info_.emplace(v, VarInfo{VarInfo::Kind::Terminal, r.lhs, rule, i, 0, i + 1});
  created_.push_back(v);
  return v;
}

std::optional<VarId> ParseVarScheme::find_phrase(int lhs, int i, int k) const {
  auto it = phrase_.find(pack(lhs, i, k, 0));
  if (it == phrase_.end()) return std::nullopt;
  return it->second;
}

std::optional<VarId> ParseVarScheme::find_branch(int rule, int i, int j,
                                                 int k) const {
  auto it = branch_.find(pack(rule, i, j, k));
  if (it == branch_.end()) return std::nullopt;
  return it->second;
}

std::optional<VarId> ParseVarScheme::find_terminal(int rule, int i) const {
  auto it = terminal_.find(pack(rule, i, 0, 0));
  if (it == terminal_.end()) return std::nullopt;
  return it->second;
}

const ParseVarScheme::VarInfo* ParseVarScheme::info(VarId v) const {
  auto it = info_.find(v);
  return it == info_.end() ? nullptr : &it->second;
}

// ------------------------------------------------------------------ compile

namespace {

class ForestCompiler {
 public:
  ForestCompiler(CfdStore& store, const CnfGrammar& grammar,
                 const std::vector<std::string>& sentence,
                 ParseVarScheme& scheme, EnergyFn& energies)
      : store_(store),
        grammar_(grammar),
        sentence_(sentence),
        scheme_(scheme),
        energies_(energies) {}

  NodeRef root() {
    return phrase_diagram(grammar_.start, 1,
                          static_cast<int>(sentence_.size()) + 1);
  }

 private:
  // D("X_{i,k}") = case(phrase, B, empty); collapses to empty when the span
  // admits no derivation (F is empty either way)
  NodeRef phrase_diagram(int lhs, int i, int k) {
    auto key = (static_cast<std::uint64_t>(lhs) << 32) |
               (static_cast<std::uint64_t>(i) << 16) | static_cast<std::uint64_t>(k);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    NodeRef consequences = branch_chain(lhs, i, k);
    NodeRef result;
    if (consequences == store_.empty()) {
      result = store_.empty();
    } else {
      VarId pv = scheme_.phrase(store_, lhs, i, k);
      energies_.set(pv, 0.0);
      result = store_.make_case(pv, consequences, store_.empty());
    }
    memo_.emplace(key, result);
    return result;
  }

  NodeRef branch_chain(int lhs, int i, int k) {
    if (k == i + 1) {
      const std::string& word = sentence_[i - 1];
      for (std::size_t r = 0; r < grammar_.lexical_rules.size(); ++r) {
        const auto& rule = grammar_.lexical_rules[r];
        if (rule.lhs == lhs && rule.terminal == word) {
          VarId tv = scheme_.terminal(store_, static_cast<int>(r), i);
          energies_.set(tv, rule.energy);
          return store_.make_case(tv, store_.unit(), store_.empty());
        }
      }
      return store_.empty();
    }
    // rules in declaration order, split points ascending; branches whose
    // children admit no derivation are dropped (their factor would be empty)
    std::vector<std::pair<VarId, NodeRef>> branches;
    for (std::size_t r = 0; r < grammar_.binary_rules.size(); ++r) {
      const auto& rule = grammar_.binary_rules[r];
      if (rule.lhs != lhs) continue;
      for (int j = i + 1; j < k; ++j) {
        NodeRef left = phrase_diagram(rule.left, i, j);
        if (left == store_.empty()) continue;
        NodeRef right = phrase_diagram(rule.right, j, k);
        if (right == store_.empty()) continue;
        VarId bv = scheme_.branch(store_, static_cast<int>(r), i, j, k);
        energies_.set(bv, rule.energy);
        branches.emplace_back(bv, store_.make_factor(left, right));
      }
    }
    return store_.multi_case(branches);
  }

  CfdStore& store_;
  const CnfGrammar& grammar_;
  const std::vector<std::string>& sentence_;
  ParseVarScheme& scheme_;
  EnergyFn& energies_;
  std::unordered_map<std::uint64_t, NodeRef> memo_;
};

}  // namespace

CompiledParseForest compile(CfdStore& store, const CnfGrammar& grammar,
                            const std::vector<std::string>& sentence) {
  grammar.check();
  if (sentence.empty()) throw EmptySentence("sentence has no tokens");
  CompiledParseForest out;
  out.scheme = ParseVarScheme(grammar, static_cast<int>(sentence.size()));
  ForestCompiler compiler(store, grammar, sentence, out.scheme, out.energies);
  out.root = compiler.root();
  return out;
}

Assignment encode_tree(const ParseVarScheme& scheme, const ParseTree& tree) {
  std::vector<VarId> support;
  std::function<void(const ParseTree&)> walk = [&](const ParseTree& node) {
    auto phrase = scheme.find_phrase(node.lhs, node.begin, node.end);
    if (!phrase) throw MalformedAssignment("tree span outside the scheme");
    support.push_back(*phrase);
    if (node.binary_rule >= 0) {
      auto branch = scheme.find_branch(node.binary_rule, node.begin,
                                       node.left->end, node.end);
      if (!branch) throw MalformedAssignment("tree branch outside the scheme");
      support.push_back(*branch);
      walk(*node.left);
      walk(*node.right);
    } else {
      auto terminal = scheme.find_terminal(node.lexical_rule, node.begin);
      if (!terminal) throw MalformedAssignment("tree leaf outside the scheme");
      support.push_back(*terminal);
    }
  };
  walk(tree);
  return Assignment(std::move(support));
}

ParseTree decode_parse(const ParseVarScheme& scheme, const Assignment& rho) {
  // index the support by meaning
  std::map<std::tuple<int, int, int>, const ParseVarScheme::VarInfo*> branches;
  std::map<std::pair<int, int>, const ParseVarScheme::VarInfo*> terminals;
  std::size_t phrase_count = 0;
  for (VarId v : rho.support()) {
    const auto* info = scheme.info(v);
    if (info == nullptr) {
      throw MalformedAssignment("support contains a variable outside the scheme");
    }
    switch (info->kind) {
      case ParseVarScheme::VarInfo::Kind::Phrase:
        ++phrase_count;
        break;
      case ParseVarScheme::VarInfo::Kind::Branch: {
        auto key = std::make_tuple(info->lhs, info->i, info->k);
        if (!branches.emplace(key, info).second) {
          throw MalformedAssignment("two branch variables for one span");
        }
        break;
      }
      case ParseVarScheme::VarInfo::Kind::Terminal: {
        auto key = std::make_pair(info->lhs, info->i);
        if (!terminals.emplace(key, info).second) {
          throw MalformedAssignment("two terminal variables for one position");
        }
        break;
      }
    }
  }

  const CnfGrammar& grammar = scheme.grammar();
  std::function<ParseTree(int, int, int)> build = [&](int lhs, int i,
                                                      int k) -> ParseTree {
    ParseTree node;
    node.lhs = lhs;
    node.begin = i;
    node.end = k;
    if (k == i + 1) {
      auto it = terminals.find({lhs, i});
      if (it == terminals.end()) {
        throw MalformedAssignment("leaf span without a terminal variable");
      }
      node.lexical_rule = it->second->rule;
      return node;
    }
    auto it = branches.find({lhs, i, k});
    if (it == branches.end()) {
      throw MalformedAssignment("internal span without a branch variable");
    }
    const auto* info = it->second;
    node.binary_rule = info->rule;
    const auto& rule = grammar.binary_rules[info->rule];
    node.left = std::make_unique<ParseTree>(build(rule.left, i, info->j));
    node.right = std::make_unique<ParseTree>(build(rule.right, info->j, k));
    return node;
  };

  ParseTree tree = build(grammar.start, 1, scheme.sentence_length() + 1);
  // the reconstructed image must consume the support exactly
  Assignment image = encode_tree(scheme, tree);
  if (!(image == rho)) {
    throw MalformedAssignment("support is not the image of a parse tree");
  }
  return tree;
}

SizeBoundReport size_bound_report(const CfdStore& store,
                                  const CnfGrammar& grammar, int n,
                                  NodeRef root) {
  SizeBoundReport report;
  report.nodes = store.size(root);
  report.grammar_size = grammar.rule_count();
  report.sentence_length = n;
  report.bound = static_cast<double>(report.grammar_size) *
                 static_cast<double>(n) * n * n;
  report.ratio = report.bound > 0
                     ? static_cast<double>(report.nodes) / report.bound
                     : 0.0;
  return report;
}

}  // namespace cfd::pcfg
