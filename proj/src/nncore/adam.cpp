#include "min2net/nncore/adam.hpp"

#include <cmath>
#include <string>

namespace min2net::nn {

template <typename S>
void AdamState<S>::set_learning_rate(double lr) {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  options_.learning_rate = lr;
}

template <typename S>
void AdamState<S>::step(std::span<ParamTensor<S>* const> params) {
  for (const ParamTensor<S>* p : params) {
    for (S g : p->grad.values()) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter '" + p->name + "'");
    }
  }
  if (m_.empty()) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const ParamTensor<S>* p : params) {
      m_.emplace_back(p->value.shape());
      v_.emplace_back(p->value.shape());
    }
  } else if (m_.size() != params.size()) {
    throw DimensionError("AdamState: parameter list changed between steps");
  }

  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double lr = options_.learning_rate;
  for (std::size_t k = 0; k < params.size(); ++k) {
    ParamTensor<S>& p = *params[k];
    if (p.value.shape() != m_[k].shape()) throw DimensionError("AdamState: shape of '" + p.name + "' changed");
    S* w = p.value.data();
    const S* g = p.grad.data();
    S* m = m_[k].data();
    S* v = v_[k].data();
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double gi = g[i];
      const double mi = b1 * m[i] + (1.0 - b1) * gi;
      const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
      m[i] = static_cast<S>(mi);
      v[i] = static_cast<S>(vi);
      w[i] = static_cast<S>(w[i] - lr * (mi / c1) / (std::sqrt(vi / c2) + options_.epsilon));
    }
  }
}

template class AdamState<float>;
template class AdamState<double>;

}  // namespace min2net::nn
