#include "polarfront/classifier.hpp"

#include <cmath>
#include <string>

#include "polarfront/errors.hpp"
#include "polarfront/ops.hpp"
#include "polarfront/rng.hpp"

namespace polarfront {

void ClassifierConfig::validate() const {
  if (in_channels < 1 || conv1_filters < 1 || conv2_filters < 1 || fc1_width < 1 ||
      classes < 2)
    throw ArgumentError("classifier config has non-positive sizes");
  if (kernel < 1 || kernel % 2 == 0)
    throw ArgumentError("classifier kernel must be odd, got " + std::to_string(kernel));
  if (image_hw % 4 != 0)
    throw ArgumentError("image side must survive two 2x2 pools, got " +
                        std::to_string(image_hw));
}

const std::vector<std::string>& ClassifierParams::names() {
  static const std::vector<std::string> kNames = {"conv1_w", "conv1_b", "conv2_w",
                                                  "conv2_b", "fc1_w",   "fc1_b",
                                                  "fc2_w",   "fc2_b"};
  return kNames;
}

std::vector<Tensor*> ClassifierParams::all() {
  return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b};
}

std::vector<const Tensor*> ClassifierParams::all() const {
  return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b};
}

namespace {

Tensor he_uniform(const std::vector<int>& shape, int fan_in, uint64_t seed) {
  Tensor t(shape);
  const double bound = std::sqrt(6.0 / fan_in);
  Rng rng(seed);
  for (long i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-bound, bound);
  return t;
}

}  // namespace

ClassifierParams init_classifier(const ClassifierConfig& cfg, uint64_t seed) {
  cfg.validate();
  ClassifierParams p;
  p.cfg = cfg;
  const int k = cfg.kernel;
  p.conv1_w = he_uniform({cfg.conv1_filters, cfg.in_channels, k, k},
                         cfg.in_channels * k * k, derive_seed(seed, "conv1_w"));
  p.conv1_b = Tensor::zeros({cfg.conv1_filters});
  p.conv2_w = he_uniform({cfg.conv2_filters, cfg.conv1_filters, k, k},
                         cfg.conv1_filters * k * k, derive_seed(seed, "conv2_w"));
  p.conv2_b = Tensor::zeros({cfg.conv2_filters});
  p.fc1_w = he_uniform({cfg.fc_in(), cfg.fc1_width}, cfg.fc_in(),
                       derive_seed(seed, "fc1_w"));
  p.fc1_b = Tensor::zeros({cfg.fc1_width});
  p.fc2_w = he_uniform({cfg.fc1_width, cfg.classes}, cfg.fc1_width,
                       derive_seed(seed, "fc2_w"));
  p.fc2_b = Tensor::zeros({cfg.classes});
  return p;
}

ClassifierVars leaf_classifier(Tape& t, const ClassifierParams& p, bool requires_grad) {
  ClassifierVars v;
  v.conv1_w = t.leaf(p.conv1_w, requires_grad);
  v.conv1_b = t.leaf(p.conv1_b, requires_grad);
  v.conv2_w = t.leaf(p.conv2_w, requires_grad);
  v.conv2_b = t.leaf(p.conv2_b, requires_grad);
  v.fc1_w = t.leaf(p.fc1_w, requires_grad);
  v.fc1_b = t.leaf(p.fc1_b, requires_grad);
  v.fc2_w = t.leaf(p.fc2_w, requires_grad);
  v.fc2_b = t.leaf(p.fc2_b, requires_grad);
  return v;
}

Var classifier_logits(Tape& t, Var input, const ClassifierVars& v,
                      const ClassifierConfig& cfg) {
  cfg.validate();
  const Tensor& xv = t.value(input);
  const bool batched = xv.rank() == 4;
  const int B = batched ? xv.dim(0) : 1;
  const int C = batched ? xv.dim(1) : xv.dim(0);
  if (C != cfg.in_channels)
    throw DimensionError("classifier expects " + std::to_string(cfg.in_channels) +
                         " input channels, got shape " + xv.shape_str());

  Var h = conv2d(t, input, v.conv1_w, cfg.pad());
  h = channel_bias_add(t, h, v.conv1_b);
  h = relu(t, h);
  h = maxpool2(t, h);
  h = conv2d(t, h, v.conv2_w, cfg.pad());
  h = channel_bias_add(t, h, v.conv2_b);
  h = relu(t, h);
  h = maxpool2(t, h);
  h = batched ? reshape(t, h, {B, cfg.fc_in()}) : reshape(t, h, {cfg.fc_in()});
  h = affine(t, h, v.fc1_w, v.fc1_b);
  h = relu(t, h);
  return affine(t, h, v.fc2_w, v.fc2_b);
}

Tensor classifier_forward(const Tensor& z, const ClassifierParams& p) {
  if (z.rank() != 3)
    throw DimensionError("classifier_forward expects [K,H,W], got shape " +
                         z.shape_str());
  Tape t;
  Var in = t.leaf(z, false);
  ClassifierVars v = leaf_classifier(t, p, false);
  Var logits = classifier_logits(t, in, v, p.cfg);
  return t.value(logits);
}

CompositeLoss composite_loss(const Tensor& logits, const std::vector<int>& labels,
                             const Tensor& z, BumpSpec spec, double lambda) {
  spec.lambda = lambda;
  spec.validate();
  CompositeLoss out;
  out.lambda = lambda;
  const Tensor per = softmax_ce_per_sample(
      logits.rank() == 1 ? Tensor({1, logits.dim(0)},
                                  std::vector<double>(logits.data(),
                                                      logits.data() + logits.size()))
                         : logits,
      labels);
  double ce = 0.0;
  for (long i = 0; i < per.size(); ++i) ce += per.data()[i];
  out.cross_entropy = ce / per.size();
  double bump_sum = 0.0;
  for (long i = 0; i < z.size(); ++i) bump_sum += bump_value(z.data()[i], spec);
  out.regularization = lambda * bump_sum / z.size();
  out.total = out.cross_entropy + out.regularization;
  return out;
}

}  // namespace polarfront
