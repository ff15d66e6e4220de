#include "cfd/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

#include "cfd/errors.hpp"

namespace cfd::io {

std::string format_double(double value) {
  char buf[64];
  // %.17g always round-trips; prefer the shortest representation that does
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    double parsed = 0.0;
    std::sscanf(buf, "%lf", &parsed);
    if (parsed == value) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ------------------------------------------------------------- s-expr lexer

struct Token {
  enum class Kind { LParen, RParen, Symbol, String, End } kind;
  std::string text;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    if (pos_ >= text_.size()) return {Token::Kind::End, ""};
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      return {Token::Kind::LParen, "("};
    }
    if (c == ')') {
      ++pos_;
      return {Token::Kind::RParen, ")"};
    }
    if (c == '"') {
      ++pos_;
      std::string s;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
        s += text_[pos_++];
      }
      if (pos_ >= text_.size()) throw FormatError("unterminated string literal");
      ++pos_;
      return {Token::Kind::String, std::move(s)};
    }
    std::string s;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')') {
      s += text_[pos_++];
    }
    return {Token::Kind::Symbol, std::move(s)};
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

class CfdParser {
 public:
  CfdParser(std::string_view text, CfdStore& store)
      : lexer_(text), store_(store) {
    advance();
  }

  NodeRef parse() {
    NodeRef root = node();
    if (current_.kind != Token::Kind::End) {
      throw FormatError("trailing content after the diagram");
    }
    return root;
  }

 private:
  void advance() { current_ = lexer_.next(); }

  void expect(Token::Kind kind, const char* what) {
    if (current_.kind != kind) throw FormatError(std::string("expected ") + what);
    advance();
  }

  long integer() {
    if (current_.kind != Token::Kind::Symbol) throw FormatError("expected an integer");
    long value = 0;
    auto [p, ec] = std::from_chars(current_.text.data(),
                                   current_.text.data() + current_.text.size(), value);
    if (ec != std::errc{} || p != current_.text.data() + current_.text.size()) {
      throw FormatError("expected an integer, got '" + current_.text + "'");
    }
    advance();
    return value;
  }

  NodeRef node() {
    if (current_.kind == Token::Kind::Symbol) {
      if (current_.text == "unit") {
        advance();
        return store_.unit();
      }
      if (current_.text == "empty") {
        advance();
        return store_.empty();
      }
      throw FormatError("unknown atom '" + current_.text + "'");
    }
    expect(Token::Kind::LParen, "'('");
    if (current_.kind != Token::Kind::Symbol) throw FormatError("expected a node head");
    std::string head = current_.text;
    advance();
    NodeRef result;
    if (head == "case") {
      if (current_.kind != Token::Kind::String) {
        throw FormatError("case expects a quoted variable name");
      }
      VarId var = store_.var(current_.text);
      advance();
      NodeRef hi = node();
      NodeRef lo = node();
      result = store_.make_case(var, hi, lo);
    } else if (head == "factor") {
      NodeRef left = node();
      NodeRef right = node();
      result = store_.make_factor(left, right);
    } else if (head == "def") {
      long key = integer();
      NodeRef body = node();
      if (!defs_.emplace(key, body).second) {
        throw FormatError("duplicate (def " + std::to_string(key) + " ...)");
      }
      result = body;
    } else if (head == "ref") {
      long key = integer();
      auto it = defs_.find(key);
      if (it == defs_.end()) {
        throw FormatError("(ref " + std::to_string(key) + ") before its def");
      }
      result = it->second;
    } else {
      throw FormatError("unknown node head '" + head + "'");
    }
    expect(Token::Kind::RParen, "')'");
    return result;
  }

  Lexer lexer_;
  Token current_;
  CfdStore& store_;
  std::unordered_map<long, NodeRef> defs_;
};

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

NodeRef parse_cfd(std::string_view text, CfdStore& store) {
  return CfdParser(text, store).parse();
}

NodeRef read_cfd_file(const std::string& path, CfdStore& store) {
  return parse_cfd(read_file(path), store);
}

void write_cfd(std::ostream& out, const CfdStore& store, NodeRef root) {
  // nodes referenced more than once get a (def k ...) at first use
  std::vector<std::size_t> refcount(store.node_count(), 0);
  for (NodeRef n : store.topo_order(root)) {
    const Node& nd = store.node(n);
    if (nd.kind == NodeKind::Case || nd.kind == NodeKind::Factor) {
      ++refcount[nd.child0.index];
      ++refcount[nd.child1.index];
    }
  }

  std::unordered_map<std::uint32_t, long> def_ids;
  long next_def = 0;

  std::function<void(NodeRef, int)> emit = [&](NodeRef n, int indent) {
    const Node& nd = store.node(n);
    if (nd.kind == NodeKind::Unit) {
      out << "unit";
      return;
    }
    if (nd.kind == NodeKind::Empty) {
      out << "empty";
      return;
    }
    if (auto it = def_ids.find(n.index); it != def_ids.end()) {
      out << "(ref " << it->second << ")";
      return;
    }
    bool shared = refcount[n.index] > 1;
    if (shared) {
      long id = next_def++;
      def_ids.emplace(n.index, id);
      out << "(def " << id << " ";
    }
    std::string pad(static_cast<std::size_t>(indent) + 2, ' ');
    if (nd.kind == NodeKind::Case) {
      out << "(case \"" << escape(store.var_name(nd.var)) << "\"\n" << pad;
      emit(nd.hi(), indent + 2);
      out << "\n" << pad;
      emit(nd.lo(), indent + 2);
      out << ")";
    } else {
      out << "(factor\n" << pad;
      emit(nd.left(), indent + 2);
      out << "\n" << pad;
      emit(nd.right(), indent + 2);
      out << ")";
    }
    if (shared) out << ")";
  };

  emit(root, 0);
  out << "\n";
}

std::string cfd_to_string(const CfdStore& store, NodeRef root) {
  std::ostringstream out;
  write_cfd(out, store, root);
  return out.str();
}

// -------------------------------------------------------------- grammars

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double parse_number(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    double value = std::stod(text, &used);
    if (used != text.size()) throw FormatError("");
    return value;
  } catch (...) {
    throw FormatError(std::string("bad ") + what + ": '" + text + "'");
  }
}

}  // namespace

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

pcfg::CnfGrammar parse_grammar(std::string_view text) {
  pcfg::CnfGrammar grammar;
  std::optional<std::string> start_name;
  std::unordered_map<std::string, int> nt_ids;
  auto intern = [&](const std::string& name) {
    auto [it, inserted] = nt_ids.emplace(name, static_cast<int>(grammar.nonterminals.size()));
    if (inserted) grammar.nonterminals.push_back(name);
    return it->second;
  };

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  bool saw_rule = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto err = [&line_no](const std::string& msg) {
      return FormatError("grammar line " + std::to_string(line_no) + ": " + msg);
    };

    if (line.rfind("start:", 0) == 0) {
      if (saw_rule) throw err("start: header must precede the rules");
      start_name = trim(line.substr(6));
      if (start_name->empty()) throw err("missing start symbol");
      continue;
    }

    auto arrow = line.find("->");
    if (arrow == std::string::npos) throw err("missing '->'");
    auto at = line.rfind('@');
    if (at == std::string::npos || at < arrow) throw err("missing '@ energy'");
    std::string lhs = trim(line.substr(0, arrow));
    std::string rhs = trim(line.substr(arrow + 2, at - arrow - 2));
    double energy = parse_number(trim(line.substr(at + 1)), "energy");
    if (lhs.empty()) throw err("missing left-hand side");
    if (rhs.empty()) throw err("missing right-hand side");

    saw_rule = true;
    int lhs_id = intern(lhs);
    if (rhs.front() == '\'') {
      if (rhs.size() < 3 || rhs.back() != '\'') throw err("unterminated terminal");
      std::string terminal = rhs.substr(1, rhs.size() - 2);
      grammar.lexical_rules.push_back({lhs_id, terminal, energy});
    } else {
      auto symbols = split_tokens(rhs);
      if (symbols.size() != 2) {
        throw GrammarNotCnf("grammar line " + std::to_string(line_no) +
                            ": rules must be binary (X -> Y Z) or lexical (X -> 'a')");
      }
      grammar.binary_rules.push_back(
          {lhs_id, intern(symbols[0]), intern(symbols[1]), energy});
    }
    if (!start_name.has_value()) start_name = lhs;
  }

  if (!start_name.has_value()) throw FormatError("grammar has no rules");
  auto it = nt_ids.find(*start_name);
  if (it == nt_ids.end()) {
    throw FormatError("start symbol '" + *start_name + "' has no rules");
  }
  grammar.start = it->second;
  grammar.check();
  return grammar;
}

pcfg::CnfGrammar read_grammar_file(const std::string& path) {
  return parse_grammar(read_file(path));
}

// ------------------------------------------------------------------ MRFs

mrf::Mrf parse_mrf(std::string_view text) {
  auto tokens = split_tokens(text);
  std::size_t pos = 0;
  auto next_int = [&tokens, &pos](const char* what) {
    if (pos >= tokens.size()) throw FormatError(std::string("unexpected end of file reading ") + what);
    const std::string& t = tokens[pos++];
    long value = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || p != t.data() + t.size() || value < 0) {
      throw FormatError(std::string("bad ") + what + ": '" + t + "'");
    }
    return value;
  };
  auto next_double = [&tokens, &pos](const char* what) {
    if (pos >= tokens.size()) throw FormatError(std::string("unexpected end of file reading ") + what);
    return parse_number(tokens[pos++], what);
  };

  mrf::Mrf model;
  long n = next_int("variable count");
  for (long i = 0; i < n; ++i) {
    long d = next_int("domain size");
    if (d < 1) throw FormatError("domain sizes must be positive");
    model.variables.push_back({"y" + std::to_string(i), static_cast<int>(d)});
  }
  long terms = next_int("term count");
  for (long k = 0; k < terms; ++k) {
    mrf::Mrf::Term term;
    long m = next_int("scope size");
    std::set<int> seen;
    for (long s = 0; s < m; ++s) {
      long v = next_int("scope variable");
      if (v >= n) throw FormatError("scope variable out of range");
      if (!seen.insert(static_cast<int>(v)).second) {
        throw FormatError("variable repeated in a scope");
      }
      term.scope.push_back(static_cast<int>(v));
    }
    model.terms.push_back(std::move(term));
  }
  for (long k = 0; k < terms; ++k) {
    auto& term = model.terms[static_cast<std::size_t>(k)];
    std::size_t expected = 1;
    for (int v : term.scope) {
      expected *= static_cast<std::size_t>(model.variables[v].domain_size);
    }
    long count = next_int("table entry count");
    if (static_cast<std::size_t>(count) != expected) {
      throw FormatError("term " + std::to_string(k) + ": expected " +
                        std::to_string(expected) + " table entries, got " +
                        std::to_string(count));
    }
    term.table.reserve(expected);
    for (std::size_t e = 0; e < expected; ++e) {
      term.table.push_back(next_double("table entry"));
    }
  }
  if (pos != tokens.size()) throw FormatError("trailing content after the tables");
  return model;
}

mrf::Mrf read_mrf_file(const std::string& path) {
  return parse_mrf(read_file(path));
}

// ---------------------------------------------------------- energy files

EnergyFn parse_energy_file(std::string_view text, CfdStore& store) {
  EnergyFn psi;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto split = line.find_last_of(" \t");
    if (split == std::string::npos) {
      throw FormatError("energy line " + std::to_string(line_no) +
                        ": expected '<varname> <energy>'");
    }
    std::string name = trim(line.substr(0, split));
    double energy = parse_number(trim(line.substr(split + 1)), "energy");
    if (name.empty()) {
      throw FormatError("energy line " + std::to_string(line_no) + ": empty name");
    }
    if (!seen.insert(name).second) {
      throw FormatError("energy line " + std::to_string(line_no) +
                        ": duplicate entry for '" + name + "'");
    }
    if (name == "*default*") {
      psi.set_default(energy);
    } else {
      psi.set(store.var(name), energy);
    }
  }
  return psi;
}

EnergyFn read_energy_file(const std::string& path, CfdStore& store) {
  return parse_energy_file(read_file(path), store);
}

void write_energy_file(std::ostream& out, const CfdStore& store,
                       const EnergyFn& psi, std::span<const VarId> vars) {
  if (psi.default_energy() != 0.0) {
    out << "*default* " << format_double(psi.default_energy()) << "\n";
  }
  std::vector<VarId> ordered(vars.begin(), vars.end());
  std::sort(ordered.begin(), ordered.end(), [&store](VarId a, VarId b) {
    return store.var_name(a) < store.var_name(b);
  });
  for (VarId v : ordered) {
    out << store.var_name(v) << " " << format_double(psi(v)) << "\n";
  }
}

}  // namespace cfd::io
