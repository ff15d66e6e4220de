#ifndef CFD_PCFG_HPP
#define CFD_PCFG_HPP

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cfd/energy.hpp"
#include "cfd/store.hpp"

namespace cfd::pcfg {

/// Weighted grammar in strict Chomsky normal form: binary rules X -> Y Z and
/// lexical rules X -> 'a', each with an energy.
struct CnfGrammar {
  struct BinaryRule {
    int lhs, left, right;  // nonterminal indices
    double energy;
  };
  struct LexicalRule {
    int lhs;
    std::string terminal;
    double energy;
  };

  std::vector<std::string> nonterminals;
  int start = 0;
  std::vector<BinaryRule> binary_rules;
  std::vector<LexicalRule> lexical_rules;

  std::size_t rule_count() const {
    return binary_rules.size() + lexical_rules.size();
  }
  int nonterminal(const std::string& name) const;  // -1 if unknown

  /// Duplicate rules or out-of-range symbols raise GrammarNotCnf.
  void check() const;
};

/// One parse-tree node; internal nodes carry a binary rule, leaves a lexical
/// rule. Spans use the same 1-based endpoints as the variable names: a node
/// over (i, k) covers words i..k-1.
struct ParseTree {
  int lhs = -1;
  int begin = 0, end = 0;
  int binary_rule = -1;   // index into grammar.binary_rules, or -1
  int lexical_rule = -1;  // index into grammar.lexical_rules, or -1
  std::unique_ptr<ParseTree> left, right;

  ParseTree clone() const;
  bool same_as(const ParseTree& other) const;
  double energy(const CnfGrammar& grammar) const;
  std::string bracketed(const CnfGrammar& grammar) const;
};

/// Names and meanings of the phrase / branch / terminal variables of one
/// compiled sentence.
class ParseVarScheme {
 public:
  struct VarInfo {
    enum class Kind { Phrase, Branch, Terminal } kind;
    int lhs = -1;
    int rule = -1;        // binary or lexical rule index, by kind
    int i = 0, j = 0, k = 0;
  };

  ParseVarScheme() = default;
  ParseVarScheme(const CnfGrammar& grammar, int n);

  int sentence_length() const { return n_; }
  const CnfGrammar& grammar() const { return grammar_; }

  VarId phrase(CfdStore& store, int lhs, int i, int k);
  VarId branch(CfdStore& store, int rule, int i, int j, int k);
  VarId terminal(CfdStore& store, int rule, int i);

  std::optional<VarId> find_phrase(int lhs, int i, int k) const;
  std::optional<VarId> find_branch(int rule, int i, int j, int k) const;
  std::optional<VarId> find_terminal(int rule, int i) const;
  const VarInfo* info(VarId v) const;

  /// Every variable the scheme created, in creation order.
  const std::vector<VarId>& created() const { return created_; }

 private:
  static std::uint64_t pack(int a, int b, int c, int d);

  CnfGrammar grammar_;
  int n_ = 0;
  std::unordered_map<std::uint64_t, VarId> phrase_, branch_, terminal_;
  std::unordered_map<VarId, VarInfo> info_;
  std::vector<VarId> created_;
};

struct CompiledParseForest {
  NodeRef root;
  EnergyFn energies;
  ParseVarScheme scheme;
};

/// Compiles grammar + sentence to a diagram whose feasible assignments are in
/// one-to-one correspondence with the parse trees of the sentence. Branch
/// chains enumerate rules in declaration order with split points ascending;
/// spans with no derivation collapse to the empty diagram.
CompiledParseForest compile(CfdStore& store, const CnfGrammar& grammar,
                            const std::vector<std::string>& sentence);

/// The truth-assignment image of a parse tree under a scheme.
Assignment encode_tree(const ParseVarScheme& scheme, const ParseTree& tree);

/// Inverse of encode_tree. Throws MalformedAssignment when the support is
/// not the image of any parse.
ParseTree decode_parse(const ParseVarScheme& scheme, const Assignment& rho);

struct SizeBoundReport {
  std::size_t nodes = 0;
  std::size_t grammar_size = 0;
  int sentence_length = 0;
  double bound = 0.0;  // grammar_size * n^3
  double ratio = 0.0;
};

SizeBoundReport size_bound_report(const CfdStore& store,
                                  const CnfGrammar& grammar, int n,
                                  NodeRef root);

}  // namespace cfd::pcfg

#endif  // CFD_PCFG_HPP
