#pragma once

#include <functional>

#include "lzi/spin_algebra.hpp"

namespace lzi {

/// Time-dependent Hamiltonian of the multilevel Landau-Zener form
/// H(t) = A + B t with Hermitian A and B.
struct LinearSweep {
  OperatorMatrix constant;
  OperatorMatrix slope;

  OperatorMatrix at(double t) const { return constant + t * slope; }
  Eigen::Index dim() const noexcept { return constant.rows(); }
};

using HamiltonianFn = std::function<OperatorMatrix(double)>;

inline HamiltonianFn as_function(LinearSweep sweep) {
  return [s = std::move(sweep)](double t) { return s.at(t); };
}

}  // namespace lzi
