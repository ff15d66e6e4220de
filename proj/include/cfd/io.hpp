#ifndef CFD_IO_HPP
#define CFD_IO_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfd/energy.hpp"
#include "cfd/mrf.hpp"
#include "cfd/pcfg.hpp"
#include "cfd/store.hpp"

namespace cfd::io {

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);

// ----------------------------------------------------------- CFD s-exprs
//
//   node := unit | empty
//         | (case "name" <hi> <lo>)
//         | (factor <left> <right>)
//         | (def <k> <node>)      introduces a shared subexpression
//         | (ref <k>)             refers to it
//
// One diagram per file. parse(print(D)) is structurally identical to D; in
// the same store it returns the same NodeRef.

void write_cfd(std::ostream& out, const CfdStore& store, NodeRef root);
std::string cfd_to_string(const CfdStore& store, NodeRef root);
NodeRef parse_cfd(std::string_view text, CfdStore& store);
NodeRef read_cfd_file(const std::string& path, CfdStore& store);

// --------------------------------------------------------- grammar files
//
//   start: S            (optional; default: lhs of the first rule)
//   X -> Y Z @ 1.5
//   X -> 'a' @ -0.25
//
// Blank lines and lines starting with '#' are ignored.

pcfg::CnfGrammar parse_grammar(std::string_view text);
pcfg::CnfGrammar read_grammar_file(const std::string& path);

// ------------------------------------------------------------- MRF files
//
// Whitespace-separated tokens:
//   <variable count n>  <n domain sizes>
//   <term count N>
//   N scope lines:  <scope size m> <m variable indices>
//   N tables:       <entry count> <entries...>   (row-major over the scope,
//                                                 last variable fastest)
// Entries are energies.

mrf::Mrf parse_mrf(std::string_view text);
mrf::Mrf read_mrf_file(const std::string& path);

// ----------------------------------------------------------- energy files
//
//   <varname> <energy>       one per line; name ends at the last whitespace
//   *default* <energy>       optional default for unlisted variables
//
// Blank lines and '#' comments are ignored. Duplicate names are an error.

EnergyFn parse_energy_file(std::string_view text, CfdStore& store);
EnergyFn read_energy_file(const std::string& path, CfdStore& store);
void write_energy_file(std::ostream& out, const CfdStore& store,
                       const EnergyFn& psi, std::span<const VarId> vars);

std::vector<std::string> split_tokens(std::string_view text);

}  // namespace cfd::io

#endif  // CFD_IO_HPP
