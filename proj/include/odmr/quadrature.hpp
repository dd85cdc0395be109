#pragma once

#include <vector>

namespace odmr {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;  ///< sum to 1
};

/// Gauss-Hermite rule for the standard normal density (Golub-Welsch).
/// Nodes ascending, symmetric about zero; n == 1 gives {0} with weight 1.
/// Rules are computed once per n and cached for the process lifetime.
const QuadratureRule& gauss_hermite_normal(int n);

}  // namespace odmr
