#ifndef CFD_CROSSCHECK_HPP
#define CFD_CROSSCHECK_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cfd/store.hpp"

namespace cfd::crosscheck {

struct Report {
  std::size_t instances = 0;
  std::size_t checks = 0;
  std::vector<std::string> failures;  // capped; empty means everything agreed

  bool ok() const { return failures.empty(); }
  void absorb(const Report& other);
  void note(bool pass, const std::string& message);
};

inline constexpr double kRelTol = 1e-9;
inline constexpr double kEnergyTol = 1e-12;

/// a and b agree to `tol` relative (exact for 0 and infinities).
bool rel_close(double a, double b, double tol = kRelTol);
/// log-domain agreement: |a-b| <= tol, with -inf matching only -inf.
bool log_close(double a, double b, double tol = kRelTol);

/// Worked families: 2^i assignments for the shared-children chain, equality
/// with its factored variant, and the single all-true-prefix assignment.
Report check_families(int max_depth = 10);

struct CfdSweepOptions {
  std::size_t max_vars = 12;
  int conditions_per_instance = 5;
  bool lemmas = false;       // appendix suite (slower)
  bool visit_counters = true;
};

/// Random diagrams vs. the brute-force oracle: partition function, Viterbi
/// energy + witness (tie-break included), conditioned partition functions,
/// single marginals, all-variable marginals, and outside values.
Report check_random_cfds(std::uint64_t seed, int count,
                         const CfdSweepOptions& options = {});

/// Random models vs. exhaustive configuration enumeration: partition
/// function, minimum energy, per-value marginals, and the feasible-set
/// bijection with configurations.
Report check_random_mrfs(std::uint64_t seed, int count);

struct PcfgSweepOptions {
  int max_sentence_len = 8;
  int bijection_max_len = 5;
  bool all_sentences = true;  // false: sample a few per grammar
};

/// Random grammars vs. reference CKY: inside values over all short strings,
/// Viterbi energies, span posteriors, and (short strings) the parse-tree
/// bijection.
Report check_random_grammars(std::uint64_t seed, int count,
                             const PcfgSweepOptions& options = {});

/// Appendix lemma suite over compiled parse forests and compiled MRFs.
Report check_compiled_lemmas();

}  // namespace cfd::crosscheck

#endif  // CFD_CROSSCHECK_HPP
