#pragma once

#include <functional>
#include <vector>

#include "gridlab/rng.hpp"
#include "gridlab/tensor.hpp"

namespace gridlab {

// Central-difference gradient check in 64-bit precision.
//
// loss_fn maps a full parameter list to a scalar loss; analytic holds the
// gradients under test, one tensor per parameter. Samples at least
// min_samples coordinates (all of them when there are fewer) and returns
//   max |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
// Throws std::runtime_error when any value involved is non-finite.
double grad_check(
    const std::function<double(const std::vector<TensorT<double>>&)>& loss_fn,
    std::vector<TensorT<double>> params,
    const std::vector<TensorT<double>>& analytic, int min_samples, double eps,
    RngStream& rng);

}  // namespace gridlab
