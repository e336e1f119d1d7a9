#pragma once

#include <cstdint>
#include <vector>

#include "polarfront/frontend.hpp"
#include "polarfront/tensor.hpp"

namespace polarfront {

/// What an attack needs from a model: the true forward pass (quantized when
/// the defense is active) and the gradient of the batch-mean cross-entropy
/// w.r.t. the input. grad_mode selects the quantizer's backward rule; the
/// losses returned always come from the true forward.
class AttackTarget {
 public:
  struct LossAndGrad {
    Tensor input_grad;       // same shape as x
    Tensor per_sample_loss;  // [B]
  };

  virtual ~AttackTarget() = default;
  virtual Tensor logits(const Tensor& x) const = 0;
  virtual LossAndGrad loss_and_input_gradient(const Tensor& x,
                                              const std::vector<int>& labels,
                                              QuantizerGrad grad_mode) const = 0;
};

enum class AttackFamily { FGSM, BIM, PGD };

struct AttackSpec {
  AttackFamily family = AttackFamily::PGD;
  double epsilon = 0.3;
  double alpha = 0.0;  // 0 means the default eps/10
  int steps = 20;
  int restarts = 1;    // restart 0 always starts from zero perturbation
  QuantizerGrad grad_mode = QuantizerGrad::Identity;
  uint64_t seed = 0;

  double effective_alpha() const { return alpha > 0.0 ? alpha : epsilon / 10.0; }
  void validate() const;
};

struct AdversarialBatch {
  Tensor inputs;                 // perturbed x', same shape as x
  std::vector<uint8_t> success;  // prediction differs from the label
  Tensor final_loss;             // [B], true-forward loss at x'
  Tensor loss_trace;             // [B, steps+1], loss after 0..steps iterations
};

/// x' = clamp_[0,1](x + eps * sign(grad)), sign(0) := 0.
AdversarialBatch fgsm(const AttackTarget& m, const Tensor& x,
                      const std::vector<int>& labels, double eps,
                      QuantizerGrad grad_mode);

/// Iterated gradient sign: e <- Clip_eps(e + alpha*sign(grad)), then pixel
/// clamp; e_0 = 0.
AdversarialBatch bim(const AttackTarget& m, const Tensor& x,
                     const std::vector<int>& labels, const AttackSpec& spec);

/// BIM from multiple starts: restart 0 is the zero start, the rest draw
/// e_0 ~ U([-eps,eps]). Keeps the per-sample restart with the highest final
/// loss, so its loss can never fall below plain BIM's.
AdversarialBatch pgd_restarts(const AttackTarget& m, const Tensor& x,
                              const std::vector<int>& labels, const AttackSpec& spec);

AdversarialBatch run_attack(const AttackTarget& m, const Tensor& x,
                            const std::vector<int>& labels, const AttackSpec& spec);

}  // namespace polarfront
