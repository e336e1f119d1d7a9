#include "polarfront/model.hpp"

#include <utility>

#include "polarfront/checkpoint.hpp"
#include "polarfront/errors.hpp"
#include "polarfront/ops.hpp"

namespace polarfront {

namespace {

AttackTarget::LossAndGrad grad_from_handles(Tape& t, const ForwardHandles& h,
                                            const std::vector<int>& labels) {
  AttackTarget::LossAndGrad out;
  const Tensor& lg = t.value(h.logits);
  const Tensor rows =
      lg.rank() == 1
          ? Tensor({1, lg.dim(0)}, std::vector<double>(lg.data(), lg.data() + lg.size()))
          : lg;
  out.per_sample_loss = softmax_ce_per_sample(rows, labels);
  Var loss = softmax_cross_entropy(t, h.logits, labels);
  t.backward(loss);
  out.input_grad = t.grad(h.input);
  return out;
}

}  // namespace

ForwardHandles DefendedModel::build(Tape& t, Tensor x, const ForwardOptions& opts) const {
  frontend.validate();
  if (opts.frontend_grad && frontend.frozen)
    throw StateError("frozen front end cannot require gradients");
  ForwardHandles h;
  h.input = t.leaf(std::move(x), opts.input_grad);
  h.filters = t.leaf(frontend.filters, opts.frontend_grad);
  h.z = l1_normalized_conv2d(t, h.input, h.filters, frontend.padding());
  h.classifier_in = frontend.mode == FrontEndMode::Quantized
                        ? quantize_ternary_op(t, h.z, frontend.c, opts.quantizer_grad)
                        : h.z;
  h.clf = leaf_classifier(t, clf, opts.classifier_grad);
  h.logits = classifier_logits(t, h.classifier_in, h.clf, clf.cfg);
  return h;
}

Tensor DefendedModel::logits(const Tensor& x) const {
  Tape t;
  return t.value(build(t, x, {}).logits);
}

AttackTarget::LossAndGrad DefendedModel::loss_and_input_gradient(
    const Tensor& x, const std::vector<int>& labels, QuantizerGrad grad_mode) const {
  Tape t;
  ForwardOptions opts;
  opts.input_grad = true;
  opts.quantizer_grad = grad_mode;
  ForwardHandles h = build(t, x, opts);
  return grad_from_handles(t, h, labels);
}

Tensor DefendedModel::frontend_z(const Tensor& x) const {
  Tape t;
  Var in = t.leaf(x, false);
  Var fw = t.leaf(frontend.filters, false);
  return t.value(l1_normalized_conv2d(t, in, fw, frontend.padding()));
}

ForwardHandles PlainModel::build(Tape& t, Tensor x, const ForwardOptions& opts) const {
  ForwardHandles h;
  h.input = t.leaf(std::move(x), opts.input_grad);
  h.classifier_in = h.input;
  h.clf = leaf_classifier(t, clf, opts.classifier_grad);
  h.logits = classifier_logits(t, h.classifier_in, h.clf, clf.cfg);
  return h;
}

Tensor PlainModel::logits(const Tensor& x) const {
  Tape t;
  return t.value(build(t, x, {}).logits);
}

AttackTarget::LossAndGrad PlainModel::loss_and_input_gradient(
    const Tensor& x, const std::vector<int>& labels, QuantizerGrad) const {
  Tape t;
  ForwardOptions opts;
  opts.input_grad = true;
  ForwardHandles h = build(t, x, opts);
  return grad_from_handles(t, h, labels);
}

namespace {

void put_classifier(Checkpoint& ck, const ClassifierParams& p) {
  const auto& names = ClassifierParams::names();
  const auto tensors = p.all();
  for (size_t i = 0; i < names.size(); ++i) ck.put_tensor(names[i], *tensors[i]);
}

ClassifierParams read_classifier(const Checkpoint& ck) {
  ClassifierParams p;
  p.conv1_w = ck.tensor("conv1_w");
  p.conv1_b = ck.tensor("conv1_b");
  p.conv2_w = ck.tensor("conv2_w");
  p.conv2_b = ck.tensor("conv2_b");
  p.fc1_w = ck.tensor("fc1_w");
  p.fc1_b = ck.tensor("fc1_b");
  p.fc2_w = ck.tensor("fc2_w");
  p.fc2_b = ck.tensor("fc2_b");
  if (p.conv1_w.rank() != 4 || p.conv2_w.rank() != 4 || p.fc1_w.rank() != 2 ||
      p.fc2_w.rank() != 2)
    throw FormatError("checkpoint classifier tensors have unexpected ranks");
  p.cfg.in_channels = p.conv1_w.dim(1);
  p.cfg.conv1_filters = p.conv1_w.dim(0);
  p.cfg.conv2_filters = p.conv2_w.dim(0);
  p.cfg.fc1_width = p.fc1_w.dim(1);
  p.cfg.classes = p.fc2_w.dim(1);
  p.cfg.kernel = p.conv1_w.dim(2);
  p.cfg.image_hw = 28;
  p.cfg.validate();
  if (p.fc1_w.dim(0) != p.cfg.fc_in())
    throw FormatError("checkpoint fc1 input " + std::to_string(p.fc1_w.dim(0)) +
                      " does not match conv stack output " +
                      std::to_string(p.cfg.fc_in()));
  return p;
}

void put_meta(Checkpoint& ck, const std::map<std::string, std::string>& meta) {
  for (const auto& [k, v] : meta) ck.put_string("meta/" + k, v);
}

void read_meta(const Checkpoint& ck, std::map<std::string, std::string>* meta) {
  if (!meta) return;
  for (const std::string& name : ck.string_names())
    if (name.rfind("meta/", 0) == 0) (*meta)[name.substr(5)] = ck.str(name);
}

}  // namespace

void save_model(const DefendedModel& m, const std::string& path,
                const std::map<std::string, std::string>& meta) {
  m.frontend.validate();
  Checkpoint ck;
  ck.put_string("defense", "frontend");
  ck.put_string("frontend_mode",
                m.frontend.mode == FrontEndMode::Quantized ? "quantized" : "linear");
  ck.put_string("frontend_frozen", m.frontend.frozen ? "true" : "false");
  ck.put_tensor("frontend_filters", m.frontend.filters);
  ck.put_tensor("frontend_c", Tensor::scalar(m.frontend.c));
  put_classifier(ck, m.clf);
  put_meta(ck, meta);
  ck.save(path);
}

void save_model(const PlainModel& m, const std::string& path,
                const std::map<std::string, std::string>& meta) {
  Checkpoint ck;
  ck.put_string("defense", "plain");
  put_classifier(ck, m.clf);
  put_meta(ck, meta);
  ck.save(path);
}

bool checkpoint_is_defended(const std::string& path) {
  return Checkpoint::load(path).str("defense") == "frontend";
}

DefendedModel load_defended(const std::string& path,
                            std::map<std::string, std::string>* meta) {
  const Checkpoint ck = Checkpoint::load(path);
  if (ck.str("defense") != "frontend")
    throw FormatError(path + " holds a '" + ck.str("defense") +
                      "' model, expected the defended one");
  DefendedModel m;
  m.frontend.filters = ck.tensor("frontend_filters");
  m.frontend.c = ck.tensor("frontend_c").data()[0];
  m.frontend.frozen = ck.str("frontend_frozen") == "true";
  m.frontend.mode = ck.str("frontend_mode") == "quantized" ? FrontEndMode::Quantized
                                                           : FrontEndMode::Linear;
  m.clf = read_classifier(ck);
  m.frontend.validate();
  if (m.clf.cfg.in_channels != m.frontend.filter_count())
    throw FormatError("checkpoint classifier expects " +
                      std::to_string(m.clf.cfg.in_channels) +
                      " channels but front end has " +
                      std::to_string(m.frontend.filter_count()) + " filters");
  read_meta(ck, meta);
  return m;
}

PlainModel load_plain(const std::string& path, std::map<std::string, std::string>* meta) {
  const Checkpoint ck = Checkpoint::load(path);
  if (ck.str("defense") != "plain")
    throw FormatError(path + " holds a '" + ck.str("defense") +
                      "' model, expected the plain one");
  PlainModel m;
  m.clf = read_classifier(ck);
  read_meta(ck, meta);
  return m;
}

}  // namespace polarfront
