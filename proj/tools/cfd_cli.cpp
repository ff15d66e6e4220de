// Command-line front end: compile grammars and MRFs to case-factor diagrams,
// run inference on diagram + energy files, report diagram statistics, and
// cross-validate the implementation against the brute-force oracle.
//
// Exit codes: 0 success, 1 usage error, 2 input-format error,
// 3 infeasible condition, 4 oracle cross-check failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cfd/crosscheck.hpp"
#include "cfd/inference.hpp"
#include "cfd/io.hpp"
#include "cfd/mrf.hpp"
#include "cfd/oracle.hpp"
#include "cfd/pcfg.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kOk = 0;
constexpr int kUsageError = 1;
constexpr int kFormatError = 2;
constexpr int kInfeasibleCondition = 3;
constexpr int kCheckFailure = 4;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json json_number(double value) {
  // JSON has no infinities; the only non-finite outputs are labeled strings
  if (value == cfd::kPosInf) return "inf";
  if (value == cfd::kNegInf) return "-inf";
  return value;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cfd::FormatError("cannot write " + path);
  out << content;
}

std::string sidecar_path(const std::string& out_path) {
  return out_path + ".meta.json";
}

void emit(const ordered_json& doc) { std::cout << doc.dump(2) << "\n"; }

// ------------------------------------------------------------ compile-pcfg

int run_compile_pcfg(const std::string& grammar_path,
                     const std::string& sentence_text,
                     const std::string& sentence_file, const std::string& out,
                     std::string energies_out, bool unchecked) {
  auto grammar = cfd::io::read_grammar_file(grammar_path);
  std::vector<std::string> sentence;
  if (!sentence_file.empty()) {
    std::ifstream in(sentence_file);
    if (!in) throw cfd::FormatError("cannot open " + sentence_file);
    std::string token;
    while (in >> token) sentence.push_back(token);
  } else {
    sentence = cfd::io::split_tokens(sentence_text);
  }

  cfd::CfdStore store(unchecked ? cfd::CfdStore::Mode::unchecked
                                : cfd::CfdStore::Mode::checked);
  auto forest = cfd::pcfg::compile(store, grammar, sentence);
  if (energies_out.empty()) energies_out = out + ".energies";

  write_text_file(out, cfd::io::cfd_to_string(store, forest.root));
  {
    std::ofstream efile(energies_out, std::ios::binary);
    if (!efile) throw cfd::FormatError("cannot write " + energies_out);
    cfd::io::write_energy_file(efile, store, forest.energies,
                               forest.scheme.created());
  }

  auto bound = cfd::pcfg::size_bound_report(
      store, grammar, static_cast<int>(sentence.size()), forest.root);
  ordered_json meta{{"kind", "pcfg"},
                    {"nodes", bound.nodes},
                    {"vars", store.var_set_size(forest.root)},
                    {"grammar_size", bound.grammar_size},
                    {"sentence_length", bound.sentence_length},
                    {"bound", bound.bound},
                    {"ratio", bound.ratio}};
  write_text_file(sidecar_path(out), meta.dump(2) + "\n");

  ordered_json doc{{"out", out},
                   {"energies", energies_out},
                   {"nodes", bound.nodes},
                   {"vars", store.var_set_size(forest.root)},
                   {"bound_report", meta}};
  emit(doc);
  return kOk;
}

// ------------------------------------------------------------- compile-mrf

int run_compile_mrf(const std::string& mrf_path, const std::string& out,
                    std::string energies_out, bool unchecked) {
  auto model = cfd::io::read_mrf_file(mrf_path);
  auto normalized = cfd::mrf::normalize(model);
  cfd::CfdStore store(unchecked ? cfd::CfdStore::Mode::unchecked
                                : cfd::CfdStore::Mode::checked);
  auto compiled = cfd::mrf::compile(store, normalized);
  if (energies_out.empty()) energies_out = out + ".energies";

  write_text_file(out, cfd::io::cfd_to_string(store, compiled.root));
  {
    std::ofstream efile(energies_out, std::ios::binary);
    if (!efile) throw cfd::FormatError("cannot write " + energies_out);
    cfd::io::write_energy_file(efile, store, compiled.encoding.energies,
                               store.vars(compiled.root));
  }

  auto bound = cfd::mrf::size_bound_report(store, normalized, compiled.root);
  ordered_json meta{{"kind", "mrf"},
                    {"nodes", bound.nodes},
                    {"vars", store.var_set_size(compiled.root)},
                    {"terms", bound.term_count},
                    {"max_domain", bound.max_domain},
                    {"tree_width", bound.width},
                    {"bound", bound.bound},
                    {"ratio", bound.ratio}};
  write_text_file(sidecar_path(out), meta.dump(2) + "\n");

  ordered_json doc{{"out", out},
                   {"energies", energies_out},
                   {"nodes", bound.nodes},
                   {"vars", store.var_set_size(compiled.root)},
                   {"constant_offset", compiled.constant_offset},
                   {"bound_report", meta}};
  emit(doc);
  return kOk;
}

// -------------------------------------------------------------------- infer

int run_infer(const std::string& cfd_path, const std::string& energies_path,
              const std::string& tasks_csv,
              const std::vector<std::string>& condition_literals) {
  std::vector<std::string> tasks;
  for (auto& t : cfd::io::split_tokens(tasks_csv)) tasks.push_back(t);
  if (tasks.size() == 1 && tasks_csv.find(',') != std::string::npos) {
    tasks.clear();
  }
  {
    tasks.clear();
    std::string cur;
    for (char c : tasks_csv) {
      if (c == ',') {
        if (!cur.empty()) tasks.push_back(cur);
        cur.clear();
      } else if (!std::isspace(static_cast<unsigned char>(c))) {
        cur += c;
      }
    }
    if (!cur.empty()) tasks.push_back(cur);
  }
  if (tasks.empty()) throw UsageError("--tasks must name at least one task");
  bool want_z = false, want_viterbi = false, want_marginals = false;
  for (const auto& t : tasks) {
    if (t == "z") {
      want_z = true;
    } else if (t == "viterbi") {
      want_viterbi = true;
    } else if (t == "marginals") {
      want_marginals = true;
    } else {
      throw UsageError("unknown task '" + t + "' (expected z, viterbi, marginals)");
    }
  }

  cfd::CfdStore store;
  cfd::NodeRef root = cfd::io::read_cfd_file(cfd_path, store);
  cfd::EnergyFn psi = energies_path.empty()
                          ? cfd::EnergyFn{}
                          : cfd::io::read_energy_file(energies_path, store);

  cfd::PartialAssignment sigma;
  for (const auto& literal : condition_literals) {
    auto eq = literal.rfind('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= literal.size()) {
      throw UsageError("condition literal must look like name=0 or name=1");
    }
    std::string value = literal.substr(eq + 1);
    if (value != "0" && value != "1") {
      throw UsageError("condition value must be 0 or 1 in '" + literal + "'");
    }
    sigma = sigma.with(store.var(literal.substr(0, eq)), value == "1");
  }
  if (want_viterbi && !sigma.empty()) {
    throw UsageError("viterbi does not support --condition");
  }

  ordered_json doc;
  if (want_z) {
    double lz = sigma.empty()
                    ? cfd::log_z(store, root, psi)
                    : cfd::conditioned_log_z(store, root, psi, sigma);
    if (!sigma.empty() && lz == cfd::kNegInf) {
      throw cfd::ConditionInfeasible("condition has zero probability mass");
    }
    doc["log_z"] = json_number(lz);
  }
  if (want_viterbi) {
    auto result = cfd::viterbi(store, root, psi);
    ordered_json v{{"energy", json_number(result.energy)}};
    if (result.witness.has_value()) {
      std::vector<std::string> names;
      for (cfd::VarId var : result.witness->support()) {
        names.push_back(store.var_name(var));
      }
      v["witness"] = names;
    }
    doc["viterbi"] = v;
  }
  if (want_marginals) {
    ordered_json m = ordered_json::object();
    if (sigma.empty()) {
      auto marginals = cfd::all_marginals(store, root, psi);
      std::vector<std::pair<std::string, double>> named;
      for (const auto& [v, p] : marginals) {
        named.emplace_back(store.var_name(v), p);
      }
      std::sort(named.begin(), named.end());
      for (const auto& [name, p] : named) m[name] = p;
    } else {
      double denom = cfd::conditioned_log_z(store, root, psi, sigma);
      if (denom == cfd::kNegInf) {
        throw cfd::ConditionInfeasible("condition has zero probability mass");
      }
      std::vector<std::pair<std::string, cfd::VarId>> named;
      for (cfd::VarId v : store.vars(root)) {
        named.emplace_back(store.var_name(v), v);
      }
      std::sort(named.begin(), named.end());
      for (const auto& [name, v] : named) {
        auto bound = sigma.get(v);
        m[name] = bound.has_value()
                      ? (*bound ? 1.0 : 0.0)
                      : cfd::marginal(store, root, psi, sigma, v);
      }
    }
    doc["marginals"] = m;
  }
  emit(doc);
  return kOk;
}

// -------------------------------------------------------------------- stats

int run_stats(const std::string& cfd_path) {
  cfd::CfdStore store;
  cfd::NodeRef root = cfd::io::read_cfd_file(cfd_path, store);
  ordered_json doc{{"nodes", store.size(root)},
                   {"vars", store.var_set_size(root)}};
  std::ifstream meta(sidecar_path(cfd_path), std::ios::binary);
  if (meta) {
    try {
      doc["bound_report"] = json::parse(meta);
    } catch (const json::exception&) {
      doc["bound_report"] = nullptr;
    }
  } else {
    doc["bound_report"] = nullptr;
  }
  emit(doc);
  return kOk;
}

// -------------------------------------------------------------------- check

int run_check(const std::string& instance, int count, std::uint64_t seed) {
  cfd::crosscheck::Report report;
  if (instance == "families") {
    report.absorb(cfd::crosscheck::check_families());
  } else if (instance == "cfd") {
    cfd::crosscheck::CfdSweepOptions options;
    options.lemmas = true;
    report.absorb(cfd::crosscheck::check_random_cfds(seed, count, options));
  } else if (instance == "mrf") {
    report.absorb(cfd::crosscheck::check_random_mrfs(seed, count));
  } else if (instance == "pcfg") {
    cfd::crosscheck::PcfgSweepOptions options;
    options.all_sentences = false;
    report.absorb(cfd::crosscheck::check_random_grammars(seed, count, options));
  } else if (instance == "all") {
    report.absorb(cfd::crosscheck::check_families());
    cfd::crosscheck::CfdSweepOptions options;
    options.lemmas = true;
    report.absorb(cfd::crosscheck::check_random_cfds(seed, count, options));
    report.absorb(cfd::crosscheck::check_random_mrfs(seed, count));
    cfd::crosscheck::PcfgSweepOptions pcfg_options;
    pcfg_options.all_sentences = false;
    report.absorb(
        cfd::crosscheck::check_random_grammars(seed, count, pcfg_options));
  } else {
    throw UsageError("unknown instance kind '" + instance +
                     "' (expected families, cfd, mrf, pcfg, all)");
  }

  ordered_json doc{{"instances", report.instances},
                   {"checks", report.checks},
                   {"failures", report.failures}};
  emit(doc);
  return report.ok() ? kOk : kCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"case-factor diagram compiler and inference engine"};
  app.require_subcommand(1);

  // compile-pcfg
  std::string grammar_path, sentence_text, sentence_file, pcfg_out, pcfg_energies;
  bool pcfg_unchecked = false;
  auto* compile_pcfg = app.add_subcommand(
      "compile-pcfg", "compile grammar + sentence to a parse-forest diagram");
  compile_pcfg->add_option("--grammar", grammar_path, "grammar file")->required();
  auto* opt_sentence =
      compile_pcfg->add_option("--sentence", sentence_text, "whitespace-separated tokens");
  compile_pcfg->add_option("--sentence-file", sentence_file, "one token per whitespace run")
      ->excludes(opt_sentence);
  compile_pcfg->add_option("--out", pcfg_out, "output diagram path")->required();
  compile_pcfg->add_option("--energies-out", pcfg_energies,
                           "companion energy file (default: <out>.energies)");
  compile_pcfg->add_flag("--unchecked", pcfg_unchecked,
                         "skip per-construction constraint checks");

  // compile-mrf
  std::string mrf_path, mrf_out, mrf_energies;
  bool mrf_unchecked = false;
  auto* compile_mrf =
      app.add_subcommand("compile-mrf", "compile an MRF file to a diagram");
  compile_mrf->add_option("--mrf", mrf_path, "MRF file")->required();
  compile_mrf->add_option("--out", mrf_out, "output diagram path")->required();
  compile_mrf->add_option("--energies-out", mrf_energies,
                          "companion energy file (default: <out>.energies)");
  compile_mrf->add_flag("--unchecked", mrf_unchecked,
                        "skip per-construction constraint checks");

  // infer
  std::string infer_cfd, infer_energies, tasks = "z";
  std::vector<std::string> condition_literals;
  auto* infer = app.add_subcommand("infer", "run inference on a diagram");
  infer->add_option("--cfd", infer_cfd, "diagram file")->required();
  infer->add_option("--energies", infer_energies, "energy file");
  infer->add_option("--tasks", tasks, "comma list of z, viterbi, marginals");
  infer->add_option("--condition", condition_literals,
                    "partial-assignment literals, e.g. x1=1 x2=0");

  // stats
  std::string stats_cfd;
  auto* stats = app.add_subcommand("stats", "diagram statistics");
  stats->add_option("--cfd", stats_cfd, "diagram file")->required();

  // check
  std::string instance = "all";
  int count = 25;
  std::uint64_t seed = 1;
  auto* check =
      app.add_subcommand("check", "cross-validate against the brute-force oracle");
  check->add_option("--instance", instance, "families | cfd | mrf | pcfg | all");
  check->add_option("--count", count, "instances per kind");
  check->add_option("--seed", seed, "base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (compile_pcfg->parsed()) {
      if (sentence_text.empty() && sentence_file.empty()) {
        throw UsageError("one of --sentence or --sentence-file is required");
      }
      return run_compile_pcfg(grammar_path, sentence_text, sentence_file,
                              pcfg_out, pcfg_energies, pcfg_unchecked);
    }
    if (compile_mrf->parsed()) {
      return run_compile_mrf(mrf_path, mrf_out, mrf_energies, mrf_unchecked);
    }
    if (infer->parsed()) {
      return run_infer(infer_cfd, infer_energies, tasks, condition_literals);
    }
    if (stats->parsed()) return run_stats(stats_cfd);
    if (check->parsed()) return run_check(instance, count, seed);
    throw UsageError("no subcommand");
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const cfd::ConditionInfeasible& e) {
    std::cerr << "infeasible condition: " << e.what() << "\n";
    return kInfeasibleCondition;
  } catch (const cfd::FormatError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kFormatError;
  } catch (const cfd::GrammarNotCnf& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kFormatError;
  } catch (const cfd::EmptySentence& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kFormatError;
  } catch (const cfd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFormatError;
  }
}
