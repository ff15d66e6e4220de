#ifndef CFD_ENERGY_HPP
#define CFD_ENERGY_HPP

#include <cmath>
#include <unordered_map>

#include "cfd/errors.hpp"
#include "cfd/store.hpp"

namespace cfd {

/// Per-variable energies. Total over all variables: anything not listed gets
/// the default (0 unless declared otherwise). Values must be finite.
class EnergyFn {
 public:
  EnergyFn() = default;

  double operator()(VarId v) const {
    auto it = values_.find(v);
    return it == values_.end() ? default_ : it->second;
  }

  void set(VarId v, double energy) {
    if (!std::isfinite(energy)) throw Error("energy values must be finite");
    values_[v] = energy;
  }

  void set_default(double energy) {
    if (!std::isfinite(energy)) throw Error("energy values must be finite");
    default_ = energy;
  }

  double default_energy() const { return default_; }

  /// Energy of an assignment: sum over its true variables.
  double of(const Assignment& rho) const {
    double total = 0.0;
    for (VarId v : rho.support()) total += (*this)(v);
    return total;
  }

  const std::unordered_map<VarId, double>& entries() const { return values_; }

 private:
  std::unordered_map<VarId, double> values_;
  double default_ = 0.0;
};

}  // namespace cfd

#endif  // CFD_ENERGY_HPP
