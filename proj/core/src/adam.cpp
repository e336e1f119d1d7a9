#include "polarfront/adam.hpp"

#include <cmath>
#include <string>

#include "polarfront/errors.hpp"

namespace polarfront {

void AdamState::step(const std::vector<Tensor*>& params,
                     const std::vector<const Tensor*>& grads) {
  if (params.size() != grads.size())
    throw ArgumentError("adam got " + std::to_string(params.size()) + " params and " +
                        std::to_string(grads.size()) + " grads");
  if (m_.empty()) {
    for (const Tensor* p : params) {
      m_.push_back(Tensor::zeros(p->shape()));
      v_.push_back(Tensor::zeros(p->shape()));
    }
  }
  if (params.size() != m_.size())
    throw ArgumentError("adam param count changed from " + std::to_string(m_.size()) +
                        " to " + std::to_string(params.size()));
  for (size_t i = 0; i < params.size(); ++i) {
    require_same_shape(*params[i], m_[i], "adam param vs moment");
    require_same_shape(*grads[i], *params[i], "adam grad vs param");
  }

  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (size_t i = 0; i < params.size(); ++i) {
    double* p = params[i]->data();
    const double* g = grads[i]->data();
    double* m = m_[i].data();
    double* v = v_[i].data();
    const long n = params[i]->size();
    for (long j = 0; j < n; ++j) {
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      p[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

void AdamState::reset() {
  m_.clear();
  v_.clear();
  t_ = 0;
}

}  // namespace polarfront
