#include "cfd/crosscheck.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "cfd/inference.hpp"
#include "cfd/logspace.hpp"
#include "cfd/mrf.hpp"
#include "cfd/oracle.hpp"
#include "cfd/pcfg.hpp"

namespace cfd::crosscheck {

void Report::absorb(const Report& other) {
  instances += other.instances;
  checks += other.checks;
  for (const auto& f : other.failures) {
    if (failures.size() < 50) failures.push_back(f);
  }
}

void Report::note(bool pass, const std::string& message) {
  ++checks;
  if (!pass && failures.size() < 50) failures.push_back(message);
}

bool rel_close(double a, double b, double tol) {
  if (a == b) return true;
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

bool log_close(double a, double b, double tol) {
  if (a == b) return true;  // covers -inf
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  return std::abs(a - b) <= tol;
}

// ----------------------------------------------------------- §-families

namespace {

struct Families {
  std::vector<NodeRef> a, b, c;  // index = i
};

Families build_families(CfdStore& store, int max_depth) {
  Families f;
  f.a.push_back(store.unit());
  f.b.push_back(store.unit());
  f.c.push_back(store.unit());
  for (int i = 1; i <= max_depth; ++i) {
    VarId x = store.var("x" + std::to_string(i));
    f.a.push_back(store.make_case(x, f.a.back(), f.a.back()));
    f.b.push_back(store.make_factor(
        store.make_case(x, store.unit(), store.unit()), f.b.back()));
    f.c.push_back(store.make_case(x, f.c.back(), store.empty()));
  }
  return f;
}

}  // namespace

Report check_families(int max_depth) {
  Report report;
  CfdStore store;
  Families f = build_families(store, max_depth);
  for (int i = 1; i <= max_depth; ++i) {
    ++report.instances;
    auto ai = oracle::enumerate(store, f.a[i]);
    report.note(ai.size() == (1u << i),
                "A_" + std::to_string(i) + ": expected 2^i assignments, got " +
                    std::to_string(ai.size()));
    auto bi = oracle::enumerate(store, f.b[i]);
    report.note(bi == ai, "B_" + std::to_string(i) + " differs from A_" +
                              std::to_string(i));
    auto ci = oracle::enumerate(store, f.c[i]);
    std::vector<VarId> prefix;
    for (int j = 1; j <= i; ++j) prefix.push_back(*store.find_var("x" + std::to_string(j)));
    bool c_ok = ci.size() == 1 && *ci.begin() == Assignment(prefix);
    report.note(c_ok, "C_" + std::to_string(i) +
                          " is not the single all-true-prefix assignment");
  }
  return report;
}

// --------------------------------------------------------------- random CFDs

Report check_random_cfds(std::uint64_t seed, int count,
                         const CfdSweepOptions& options) {
  Report report;
  for (int inst = 0; inst < count; ++inst) {
    std::uint64_t s = seed + static_cast<std::uint64_t>(inst);
    CfdStore store;
    NodeRef root = oracle::random_cfd(store, s, {options.max_vars, 5});
    EnergyFn psi = oracle::random_energies(store, root, s);
    ++report.instances;
    auto tag = [inst](const std::string& what) {
      return "cfd instance " + std::to_string(inst) + ": " + what;
    };

    report.note(store.validate(root).empty(), tag("validate failed"));

    double brute = oracle::brute_z(store, root, psi);
    InsideTable in = inside(store, root, psi);
    double lz = in.root_log_z();
    report.note(rel_close(std::exp(lz), brute), tag("z mismatch"));
    if (options.visit_counters) {
      report.note(in.nodes_visited == store.size(root),
                  tag("inside visit counter"));
    }

    // Viterbi: exact energy, witness feasible with that energy, witness in
    // the argmin set, and equal to the tie-break rule's choice
    auto vit = viterbi(store, root, psi);
    auto brute_vit = oracle::brute_viterbi(store, root, psi);
    report.note(std::abs(vit.energy - brute_vit.energy) <= kEnergyTol ||
                    vit.energy == brute_vit.energy,
                tag("viterbi energy mismatch"));
    if (options.visit_counters) {
      report.note(vit.nodes_visited == store.size(root),
                  tag("viterbi visit counter"));
    }
    if (vit.witness.has_value()) {
      report.note(member(store, root, *vit.witness),
                  tag("viterbi witness infeasible"));
      report.note(std::abs(psi.of(*vit.witness) - vit.energy) <= kEnergyTol,
                  tag("viterbi witness energy differs from reported energy"));
      report.note(brute_vit.argmin.count(*vit.witness) > 0,
                  tag("viterbi witness not among the minimizers"));
      auto predicted = oracle::tiebreak_witness(store, root, psi);
      report.note(predicted.has_value() && *predicted == *vit.witness,
                  tag("viterbi witness differs from the tie-break rule"));
    } else {
      report.note(brute_vit.argmin.empty(), tag("missing viterbi witness"));
    }

    // conditioned partition functions over random partial assignments
    for (int c = 0; c < options.conditions_per_instance; ++c) {
      auto sigma = oracle::random_condition(store, root, s * 31 + c);
      double cond = conditioned_log_z(store, root, psi, sigma);
      double brute_cond = oracle::brute_conditioned_z(store, root, psi, sigma);
      report.note(rel_close(std::exp(cond), brute_cond),
                  tag("conditioned z mismatch"));
      report.note(std::exp(cond) <= brute + kRelTol * std::max(1.0, brute),
                  tag("conditioned z exceeds z"));
      if (brute_cond > 0.0 && !store.vars(root).empty()) {
        auto vars = store.vars(root);
        VarId z = vars[(s + c) % vars.size()];
        double m = marginal(store, root, psi, sigma, z);
        double bm = oracle::brute_marginal(store, root, psi, sigma, z);
        report.note(rel_close(m, bm), tag("marginal mismatch"));
      }
    }

    // empty condition reduces to the plain partition function
    report.note(conditioned_log_z(store, root, psi, PartialAssignment{}) == lz,
                tag("empty condition does not reduce to z"));

    if (brute > 0.0) {
      auto margs = all_marginals(store, root, psi);
      auto vars = store.vars(root);
      report.note(margs.size() == vars.size(),
                  tag("all_marginals variable coverage"));
      for (VarId v : vars) {
        double expected =
            oracle::brute_marginal(store, root, psi, PartialAssignment{}, v);
        report.note(rel_close(margs.at(v), expected),
                    tag("all_marginals mismatch for " + store.var_name(v)));
        report.note(margs.at(v) >= 0.0 && margs.at(v) <= 1.0,
                    tag("marginal outside [0,1]"));
        double off = conditioned_log_z(store, root, psi,
                                       PartialAssignment{}.with(v, false));
        report.note(std::abs(margs.at(v) + std::exp(off - lz) - 1.0) <= kRelTol,
                    tag("P(z=1) + P(z=0) != 1"));
        // cross-method: ratio of conditioned partition functions
        double via_cond =
            marginal(store, root, psi, PartialAssignment{}, v);
        report.note(rel_close(margs.at(v), via_cond),
                    tag("all_marginals disagrees with marginal()"));
      }
    }

    // outside values vs. the context-set oracle, and the per-variable sum
    OutsideTable out = outside(store, root, psi, in);
    if (options.visit_counters) {
      report.note(out.nodes_visited == store.size(root),
                  tag("outside visit counter"));
    }
    std::map<VarId, double> numerators;
    for (NodeRef n : store.topo_order(root)) {
      if (store.open(n)) {
        double expected = oracle::brute_outside(store, n, root, psi);
        report.note(rel_close(std::exp(out.at(n)), expected),
                    tag("outside value mismatch at node " +
                        std::to_string(n.index)));
      }
      const Node& nd = store.node(n);
      if (nd.kind == NodeKind::Case) {
        double term = out.at(n) - psi(nd.var) + in.at(nd.hi());
        auto [it, inserted] = numerators.emplace(nd.var, term);
        if (!inserted) it->second = log_add_exp(it->second, term);
      }
    }
    for (const auto& [v, num] : numerators) {
      double expected = oracle::brute_conditioned_z(
          store, root, psi, PartialAssignment{}.with(v, true));
      report.note(rel_close(std::exp(num), expected),
                  tag("per-variable case-node sum mismatch for " +
                      store.var_name(v)));
    }

    if (options.lemmas) {
      auto lemmas = oracle::check_appendix_lemmas(store, root);
      report.checks += lemmas.checks;
      if (!lemmas.ok) {
        report.note(false, tag("appendix lemmas: " + lemmas.counterexamples.front()));
      }
    }
  }
  return report;
}

// --------------------------------------------------------------- random MRFs

namespace {

Report check_one_mrf(const mrf::Mrf& model, const std::string& label) {
  Report report;
  ++report.instances;
  auto normalized = mrf::normalize(model);
  CfdStore store;
  auto compiled = mrf::compile(store, normalized);
  auto tag = [&label](const std::string& what) { return label + ": " + what; };

  report.note(store.validate(compiled.root).empty(), tag("validate failed"));

  auto summary = oracle::enumerate_mrf(model);
  const EnergyFn& psi = compiled.encoding.energies;

  double lz = log_z(store, compiled.root, psi) - compiled.constant_offset;
  report.note(rel_close(std::exp(lz), summary.z), tag("z mismatch"));

  auto vit = viterbi(store, compiled.root, psi);
  double min_energy = vit.energy + compiled.constant_offset;
  report.note(std::abs(min_energy - summary.min_energy) <= kEnergyTol,
              tag("minimum energy mismatch"));

  // feasible assignments are in bijection with configurations: right count,
  // exactly one value per variable, term variables matching the values
  auto feasible = oracle::enumerate(store, compiled.root, 10000);
  report.note(feasible.size() == summary.configurations,
              tag("feasible count != configuration count"));
  const auto& enc = compiled.encoding;
  for (const auto& rho : feasible) {
    bool shape_ok = true;
    std::vector<int> chosen(normalized.variables.size(), -1);
    for (std::size_t y = 0; y < normalized.variables.size() && shape_ok; ++y) {
      int hits = 0;
      for (std::size_t v = 0; v < enc.value_vars[y].size(); ++v) {
        if (rho.contains(enc.value_vars[y][v])) {
          ++hits;
          chosen[y] = static_cast<int>(v);
        }
      }
      shape_ok = hits == 1;
    }
    for (std::size_t k = 0; k < normalized.terms.size() && shape_ok; ++k) {
      const auto& term = normalized.terms[k];
      if (term.synthetic) continue;
      std::size_t tuple = 0;
      for (int v : term.scope) {
        tuple = tuple * static_cast<std::size_t>(
                            normalized.variables[v].domain_size) +
                static_cast<std::size_t>(chosen[v]);
      }
      for (std::size_t t = 0; t < enc.term_vars[k].size(); ++t) {
        if (rho.contains(enc.term_vars[k][t]) != (t == tuple)) shape_ok = false;
      }
    }
    if (!shape_ok) {
      report.note(false, tag("feasible assignment is not a configuration image"));
      break;
    }
  }
  report.note(true, tag("bijection shape"));

  // per-value marginals against the exhaustive reference
  if (summary.z > 0) {
    auto margs = all_marginals(store, compiled.root, psi);
    for (std::size_t y = 0; y < normalized.variables.size(); ++y) {
      for (std::size_t v = 0; v < enc.value_vars[y].size(); ++v) {
        double got = margs.at(enc.value_vars[y][v]);
        double expected =
            summary.marginals.at({static_cast<int>(y), static_cast<int>(v)});
        report.note(rel_close(got, expected),
                    tag("marginal mismatch at " +
                        store.var_name(enc.value_vars[y][v])));
      }
    }
  }
  return report;
}

}  // namespace

Report check_random_mrfs(std::uint64_t seed, int count) {
  Report report;
  for (int inst = 0; inst < count; ++inst) {
    auto model = oracle::random_mrf(seed + static_cast<std::uint64_t>(inst));
    report.absorb(check_one_mrf(model, "mrf instance " + std::to_string(inst)));
  }
  return report;
}

// ------------------------------------------------------------ random PCFGs

namespace {

std::vector<std::vector<std::string>> sentences_up_to(int max_len) {
  std::vector<std::vector<std::string>> out;
  for (int len = 1; len <= max_len; ++len) {
    for (std::uint64_t bits = 0; bits < (1ull << len); ++bits) {
      std::vector<std::string> sentence;
      sentence.reserve(len);
      for (int p = 0; p < len; ++p) {
        sentence.push_back((bits >> p) & 1 ? "b" : "a");
      }
      out.push_back(std::move(sentence));
    }
  }
  return out;
}

Report check_one_sentence(const pcfg::CnfGrammar& grammar,
                          const std::vector<std::string>& sentence,
                          const std::string& label, int bijection_max_len) {
  Report report;
  ++report.instances;
  auto tag = [&label](const std::string& what) { return label + ": " + what; };

  CfdStore store;
  auto forest = pcfg::compile(store, grammar, sentence);
  report.note(store.validate(forest.root).empty(), tag("validate failed"));

  double lz = log_z(store, forest.root, forest.energies);
  double reference = oracle::cky_inside(grammar, sentence);
  report.note(log_close(lz, reference), tag("inside value differs from CKY"));

  auto vit = viterbi(store, forest.root, forest.energies);
  auto cky_vit = oracle::cky_viterbi(grammar, sentence);
  report.note(std::abs(vit.energy - cky_vit.energy) <= 1e-9 ||
                  vit.energy == cky_vit.energy,
              tag("viterbi energy differs from tropical CKY"));
  if (vit.witness.has_value()) {
    auto tree = pcfg::decode_parse(forest.scheme, *vit.witness);
    report.note(std::abs(tree.energy(grammar) - vit.energy) <= 1e-9,
                tag("decoded parse energy differs"));
    report.note(tree.lhs == grammar.start && tree.begin == 1 &&
                    tree.end == static_cast<int>(sentence.size()) + 1,
                tag("decoded parse does not span the sentence"));
  } else {
    report.note(cky_vit.energy == kPosInf, tag("missing parse"));
  }

  // span posteriors against chart inside-outside
  if (lz != kNegInf) {
    auto margs = all_marginals(store, forest.root, forest.energies);
    auto posteriors = oracle::cky_span_posteriors(grammar, sentence);
    const int n = static_cast<int>(sentence.size());
    for (int x = 0; x < static_cast<int>(grammar.nonterminals.size()); ++x) {
      for (int i = 1; i <= n; ++i) {
        for (int k = i + 1; k <= n + 1; ++k) {
          auto it = posteriors.find({x, i, k});
          double expected = it == posteriors.end() ? 0.0 : it->second;
          auto pv = forest.scheme.find_phrase(x, i, k);
          double got = 0.0;
          if (pv.has_value() && margs.count(*pv)) got = margs.at(*pv);
          report.note(std::abs(got - expected) <= kRelTol ||
                          rel_close(got, expected),
                      tag("span posterior mismatch at " +
                          grammar.nonterminals[x] + "_" + std::to_string(i) +
                          "," + std::to_string(k)));
        }
      }
    }
  }

  // parse-tree bijection for short sentences
  if (static_cast<int>(sentence.size()) <= bijection_max_len) {
    auto parses = oracle::enumerate_parses(grammar, sentence);
    auto feasible = oracle::enumerate(store, forest.root, 100000);
    report.note(parses.size() == feasible.size(),
                tag("parse count != feasible count"));
    oracle::FeasibleSet images;
    for (const auto& tree : parses) {
      images.insert(pcfg::encode_tree(forest.scheme, tree));
    }
    report.note(images == feasible, tag("parse images != feasible set"));
  }
  return report;
}

}  // namespace

Report check_random_grammars(std::uint64_t seed, int count,
                             const PcfgSweepOptions& options) {
  Report report;
  auto all_sentences = sentences_up_to(options.max_sentence_len);
  for (int inst = 0; inst < count; ++inst) {
    auto grammar = oracle::random_grammar(seed + static_cast<std::uint64_t>(inst));
    std::string label = "grammar " + std::to_string(inst);
    if (options.all_sentences) {
      for (const auto& sentence : all_sentences) {
        report.absorb(check_one_sentence(grammar, sentence, label,
                                         options.bijection_max_len));
      }
    } else {
      for (std::size_t p = 0; p < all_sentences.size(); p += 37) {
        report.absorb(check_one_sentence(grammar, all_sentences[p], label,
                                         options.bijection_max_len));
      }
    }
  }
  return report;
}

Report check_compiled_lemmas() {
  Report report;

  // parse forests: the one-rule bracketing grammar plus random grammars
  pcfg::CnfGrammar catalan;
  catalan.nonterminals = {"S"};
  catalan.start = 0;
  catalan.binary_rules.push_back({0, 0, 0, 0.0});
  catalan.lexical_rules.push_back({0, "a", 0.0});
  std::vector<std::pair<pcfg::CnfGrammar, std::vector<std::string>>> cases;
  for (int n = 1; n <= 4; ++n) {
    cases.emplace_back(catalan,
                       std::vector<std::string>(static_cast<std::size_t>(n), "a"));
  }
  for (std::uint64_t s = 1; s <= 5; ++s) {
    auto grammar = oracle::random_grammar(7000 + s);
    cases.emplace_back(grammar, std::vector<std::string>{"a", "b", "a"});
  }
  for (const auto& [grammar, sentence] : cases) {
    CfdStore store;
    auto forest = pcfg::compile(store, grammar, sentence);
    ++report.instances;
    auto lemmas = oracle::check_appendix_lemmas(store, forest.root, 100000);
    report.checks += lemmas.checks;
    report.note(lemmas.ok, "pcfg lemma suite: " +
                               (lemmas.ok ? std::string("ok")
                                          : lemmas.counterexamples.front()));
  }

  // compiled MRFs
  for (std::uint64_t s = 1; s <= 5; ++s) {
    auto model = oracle::random_mrf(9000 + s, {4, 3, 4, 2});
    auto normalized = mrf::normalize(model);
    CfdStore store;
    auto compiled = mrf::compile(store, normalized);
    ++report.instances;
    auto lemmas = oracle::check_appendix_lemmas(store, compiled.root, 100000);
    report.checks += lemmas.checks;
    report.note(lemmas.ok, "mrf lemma suite: " +
                               (lemmas.ok ? std::string("ok")
                                          : lemmas.counterexamples.front()));
  }
  return report;
}

}  // namespace cfd::crosscheck
