#pragma once

#include <map>
#include <string>
#include <vector>

#include "polarfront/attacks.hpp"
#include "polarfront/classifier.hpp"
#include "polarfront/frontend.hpp"
#include "polarfront/tape.hpp"
#include "polarfront/tensor.hpp"

namespace polarfront {

struct ForwardHandles {
  Var input;
  Var z;             // normalized front-end activations (defended model only)
  Var classifier_in; // z, quantized z, or the raw input for the plain model
  Var logits;
  Var filters;       // front-end filter leaf (defended model only)
  ClassifierVars clf;
};

struct ForwardOptions {
  bool input_grad = false;
  bool classifier_grad = false;
  bool frontend_grad = false;
  QuantizerGrad quantizer_grad = QuantizerGrad::Exact;
};

/// Front end + classifier. The forward pass follows frontend.mode: Linear
/// feeds z straight into the classifier, Quantized feeds f2(z).
class DefendedModel : public AttackTarget {
 public:
  FrontEndState frontend;
  ClassifierParams clf;

  ForwardHandles build(Tape& t, Tensor x, const ForwardOptions& opts) const;

  Tensor logits(const Tensor& x) const override;
  LossAndGrad loss_and_input_gradient(const Tensor& x, const std::vector<int>& labels,
                                      QuantizerGrad grad_mode) const override;

  /// Normalized activations z for reporting/certification, always linear.
  Tensor frontend_z(const Tensor& x) const;
};

/// The same classifier reading raw pixels; the undefended twin.
class PlainModel : public AttackTarget {
 public:
  ClassifierParams clf;

  ForwardHandles build(Tape& t, Tensor x, const ForwardOptions& opts) const;

  Tensor logits(const Tensor& x) const override;
  LossAndGrad loss_and_input_gradient(const Tensor& x, const std::vector<int>& labels,
                                      QuantizerGrad grad_mode) const override;
};

// Checkpoint glue. Metadata strings ride along (dataset, stage, seed, ...);
// model geometry is recovered from the stored tensor shapes.
void save_model(const DefendedModel& m, const std::string& path,
                const std::map<std::string, std::string>& meta);
void save_model(const PlainModel& m, const std::string& path,
                const std::map<std::string, std::string>& meta);
bool checkpoint_is_defended(const std::string& path);
DefendedModel load_defended(const std::string& path,
                            std::map<std::string, std::string>* meta = nullptr);
PlainModel load_plain(const std::string& path,
                      std::map<std::string, std::string>* meta = nullptr);

}  // namespace polarfront
