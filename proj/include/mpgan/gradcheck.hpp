#pragma once

#include <cmath>
#include <functional>

#include "mpgan/nets.hpp"

// Central finite-difference gradient checker. Lives in the library so both
// the test suites and the acceptance runner can drive it against the
// analytic paths; it never shares code with backward()/gradient_penalty().

namespace mpgan {

inline MlpGrads finite_diff_grads(Mlp net, const std::function<double(const Mlp&)>& f,
                                  double eps = 1e-5) {
  MlpGrads grads = zero_grads(net);
  auto probe = [&](double& param, double& grad) {
    const double saved = param;
    param = saved + eps;
    const double hi = f(net);
    param = saved - eps;
    const double lo = f(net);
    param = saved;
    grad = (hi - lo) / (2.0 * eps);
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (std::size_t i = 0; i < net.layers[l].w.size(); ++i)
      probe(net.layers[l].w.data[i], grads.dw[l].data[i]);
    for (std::size_t i = 0; i < net.layers[l].b.size(); ++i)
      probe(net.layers[l].b[i], grads.db[l][i]);
  }
  return grads;
}

// max over parameters of |a-b| / max(|a|,|b|,floor)
inline double max_relative_error(const MlpGrads& a, const MlpGrads& b, double floor = 1e-8) {
  double worst = 0.0;
  auto check = [&](double x, double y) {
    const double denom = std::max({std::fabs(x), std::fabs(y), floor});
    worst = std::max(worst, std::fabs(x - y) / denom);
  };
  for (std::size_t l = 0; l < a.dw.size(); ++l) {
    for (std::size_t i = 0; i < a.dw[l].size(); ++i) check(a.dw[l].data[i], b.dw[l].data[i]);
    for (std::size_t i = 0; i < a.db[l].size(); ++i) check(a.db[l][i], b.db[l][i]);
  }
  return worst;
}

}  // namespace mpgan
