#ifndef SCC_DYNAMICS_HPP
#define SCC_DYNAMICS_HPP

#include <optional>
#include <vector>

#include "scc/physics.hpp"

namespace scc {

// Probability distribution over the states of a LevelSystem.
struct PopulationVector {
  std::vector<double> p;

  std::size_t dim() const { return p.size(); }

  // Entries in [0,1] summing to 1 within tolerance.
  void validate(double tol = 1e-9) const;

  // Point mass on one state.
  static PopulationVector basis(std::size_t dim, std::size_t state);
};

// exp(M t) p0 via scaling-and-squaring (Pade order 13). Exact up to
// roundoff for the small dense generators used here; rate scales from
// 1/tau_charge to stimulated emission span eight decades, so a stiff-safe
// method is required.
PopulationVector propagate(const RateMatrix& m, const PopulationVector& p0, double t);

// Dense matrix exponential of M*t (column-generator convention).
std::vector<double> matrix_exponential(const RateMatrix& m, double t);

struct SteadyStateResult {
  PopulationVector populations;
  bool degenerate = false;  // null space dimension > 1 (disconnected sectors)
};

// Normalized null vector of the generator. With a degenerate null space
// the steady state depends on the initial condition: the overload taking
// p0 returns the long-time limit of propagate and flags the degeneracy;
// the parameterless one throws.
SteadyStateResult steady_state(const RateMatrix& m);
SteadyStateResult steady_state(const RateMatrix& m, const PopulationVector& p0);

// t -> infinity ionization probability when ionization (gamma_i) and spin
// flip (gamma_flip) are the only absorbing exits from the pumped cycle.
double branching_limit(double gamma_i, double gamma_flip);

// Survival probability of the bright charge state in the dark.
double charge_survival(const DefectParameters& p, double t);

}  // namespace scc

#endif
