#pragma once

#include <vector>

#include "polarfront/tensor.hpp"

namespace polarfront {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam. Moment buffers are created on the first step and must
/// keep their shapes afterwards; the update adds eps after the square root,
/// so the first step is exactly -lr * g / (|g| + eps) elementwise.
class AdamState {
 public:
  explicit AdamState(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads);
  int step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  void reset();

 private:
  AdamConfig cfg_;
  std::vector<Tensor> m_, v_;
  int t_ = 0;
};

}  // namespace polarfront
