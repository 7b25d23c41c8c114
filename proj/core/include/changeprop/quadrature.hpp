#pragma once

#include <vector>

namespace changeprop {

/// n-point Gauss-Hermite rule for int e^{-x^2} f(x) dx. Nodes ascending.
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussHermite gauss_hermite(int n);

}  // namespace changeprop
