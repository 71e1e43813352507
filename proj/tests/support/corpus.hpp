#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nevgrowth/path.hpp"

namespace corpus {

using nevgrowth::Complex;
using nevgrowth::CompanionSystem;
using nevgrowth::MeromorphicFn;
using nevgrowth::Polynomial;
using nevgrowth::StateVector;

/// A corpus equation with its exact solution y and y' (and y'' for order 2).
struct Equation {
  std::string name;
  CompanionSystem sys;
  std::vector<MeromorphicFn> solution;  ///< y, y', ..., y^(n-1)
  std::vector<nevgrowth::RootMult> y_poles;

  StateVector state_at(Complex z) const {
    StateVector F;
    for (const auto& f : solution) F.push_back(f(z));
    return F;
  }
};

inline MeromorphicFn z_inv(int k, Complex c) {
  return MeromorphicFn::rational(Polynomial::constant(c), Polynomial::monomial(k));
}

inline Equation exp_first_order() {
  const auto y = MeromorphicFn::exp();
  return {"exp", CompanionSystem({MeromorphicFn::constant(-1.0)}, "exp"), {y}, {}};
}

inline Equation harmonic() {
  const auto y = MeromorphicFn::sin();
  return {"harmonic", CompanionSystem({MeromorphicFn::constant(1.0), MeromorphicFn::constant(0.0)}, "harmonic"),
          {y, y.derivative()}, {}};
}

/// z^2 y'' - 2 z y' + 2 y = 0, solution y = z^2.
inline Equation euler() {
  const auto y = MeromorphicFn::polynomial(Polynomial({0.0, 0.0, 1.0}));
  return {"euler", CompanionSystem({z_inv(2, 2.0), z_inv(1, -2.0)}, "euler"), {y, y.derivative()}, {}};
}

/// y' = (1 - 1/(z-1)) y, solution e^z / (z - 1).
inline Equation exp_over_linear() {
  const auto f0 = MeromorphicFn::rational(Polynomial({2.0, -1.0}), Polynomial({-1.0, 1.0}));
  const auto y = MeromorphicFn::exp() * MeromorphicFn::rational(Polynomial::constant(1.0), Polynomial({-1.0, 1.0}));
  return {"exp_over_linear", CompanionSystem({f0}, "exp_over_linear"), {y}, {{1.0, 1}}};
}

inline std::vector<Equation> all() { return {exp_first_order(), harmonic(), euler(), exp_over_linear()}; }

}  // namespace corpus
