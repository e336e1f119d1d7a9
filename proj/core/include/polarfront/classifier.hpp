#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polarfront/frontend.hpp"
#include "polarfront/tape.hpp"
#include "polarfront/tensor.hpp"

namespace polarfront {

/// conv -> ReLU -> pool -> conv -> ReLU -> pool -> fc -> ReLU -> fc, the
/// small CNN used throughout. Conv layers pad to preserve spatial dims, so
/// 28 -> 14 -> 7 and fc1 sees conv2_filters * 7 * 7 features.
struct ClassifierConfig {
  int in_channels = 32;
  int conv1_filters = 32;
  int conv2_filters = 64;
  int fc1_width = 1024;
  int classes = 10;
  int kernel = 5;
  int image_hw = 28;

  int fc_in() const { return conv2_filters * (image_hw / 4) * (image_hw / 4); }
  int pad() const { return (kernel - 1) / 2; }
  void validate() const;
};

struct ClassifierParams {
  ClassifierConfig cfg;
  Tensor conv1_w, conv1_b;
  Tensor conv2_w, conv2_b;
  Tensor fc1_w, fc1_b;  // weights stored [in][out]
  Tensor fc2_w, fc2_b;

  // Fixed order, shared by the optimizer, checkpoints and gradient checks.
  static const std::vector<std::string>& names();
  std::vector<Tensor*> all();
  std::vector<const Tensor*> all() const;
};

/// He-uniform weights U(-sqrt(6/fan_in), +sqrt(6/fan_in)), zero biases,
/// deterministic in seed.
ClassifierParams init_classifier(const ClassifierConfig& cfg, uint64_t seed);

struct ClassifierVars {
  Var conv1_w, conv1_b, conv2_w, conv2_b, fc1_w, fc1_b, fc2_w, fc2_b;
};

ClassifierVars leaf_classifier(Tape& t, const ClassifierParams& p, bool requires_grad);

/// input is [K,28,28] or [B,K,28,28]; returns logits [10] or [B,10].
Var classifier_logits(Tape& t, Var input, const ClassifierVars& v,
                      const ClassifierConfig& cfg);

/// Forward-only convenience for a single sample.
Tensor classifier_forward(const Tensor& z, const ClassifierParams& p);

/// total = cross_entropy + regularization, where the regularization term is
/// lambda times the mean bump value over every element of z. lambda == 0
/// reduces to plain cross-entropy.
struct CompositeLoss {
  double cross_entropy = 0.0;
  double regularization = 0.0;
  double lambda = 0.0;
  double total = 0.0;
};

CompositeLoss composite_loss(const Tensor& logits, const std::vector<int>& labels,
                             const Tensor& z, BumpSpec spec, double lambda);

}  // namespace polarfront
