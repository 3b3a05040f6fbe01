#include "gridlab/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace gridlab {

void RmsProp::step(std::vector<Tensor*>& params, const std::vector<Tensor>& grads) {
  if (params.size() != grads.size())
    throw std::invalid_argument("optimizer: params/grads count mismatch");
  if (acc.empty()) {
    acc.reserve(params.size());
    for (const Tensor* p : params) acc.emplace_back(p->shape);
  }
  const float frho = static_cast<float>(rho);
  const float flr = static_cast<float>(lr);
  const float feps = static_cast<float>(eps);
  for (size_t t = 0; t < params.size(); ++t) {
    Tensor& p = *params[t];
    const Tensor& g = grads[t];
    Tensor& a = acc[t];
    if (p.shape != g.shape)
      throw std::invalid_argument("optimizer: gradient shape mismatch at tensor " +
                                  std::to_string(t));
    for (std::int64_t i = 0; i < p.numel(); ++i) {
      const float gv = g.data[i];
      if (!std::isfinite(gv))
        throw std::runtime_error("optimizer: non-finite gradient");
      a.data[i] = frho * a.data[i] + (1.0f - frho) * gv * gv;
      p.data[i] -= flr * gv / std::sqrt(a.data[i] + feps);
    }
  }
}

}  // namespace gridlab
