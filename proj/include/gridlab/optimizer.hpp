#pragma once

#include <vector>

#include "gridlab/tensor.hpp"

namespace gridlab {

// RMSProp-style update:
//   acc   <- rho * acc + (1 - rho) * g^2
//   param <- param - lr * g / sqrt(acc + eps)
struct RmsProp {
  double lr = 2e-4;
  double rho = 0.99;
  double eps = 1e-5;

  std::vector<Tensor> acc;  // lazily sized to the parameter list

  // Throws std::runtime_error on non-finite gradients.
  void step(std::vector<Tensor*>& params, const std::vector<Tensor>& grads);
};

}  // namespace gridlab
