#include "polarfront/training.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "polarfront/errors.hpp"
#include "polarfront/ops.hpp"
#include "polarfront/rng.hpp"

namespace polarfront {

void StageSpec::validate() const {
  if (index < 1 || index > 3) throw ConfigError("stage index must be 1, 2 or 3");
  if (epochs < 0) throw ConfigError("stage epochs must be >= 0");
  if (sigma <= 0.0) throw ConfigError("stage sigma must be positive");
  switch (index) {
    case 1:
      if (!regularized || bump != BumpVariant::B1)
        throw ConfigError("stage 1 requires the B1 regularizer");
      if (freeze_frontend) throw ConfigError("stage 1 must train the front end");
      if (quantize) throw ConfigError("stage 1 must run unquantized");
      break;
    case 2:
      if (!regularized || bump != BumpVariant::B2)
        throw ConfigError("stage 2 requires the B2 regularizer");
      if (freeze_frontend) throw ConfigError("stage 2 must train the front end");
      if (quantize) throw ConfigError("stage 2 must run unquantized");
      break;
    default:
      if (regularized) throw ConfigError("stage 3 must run without a regularizer");
      if (!freeze_frontend) throw ConfigError("stage 3 must freeze the front end");
      if (!quantize) throw ConfigError("stage 3 must quantize");
      break;
  }
}

void TrainingSchedule::validate() const {
  if (dataset != "mnist" && dataset != "fashion")
    throw ConfigError("dataset must be mnist or fashion");
  if (frontend_filters < 1) throw ConfigError("frontend_filters must be >= 1");
  if (frontend_kernel < 1 || frontend_kernel % 2 == 0)
    throw ConfigError("frontend_kernel must be odd and >= 1");
  if (threshold_c <= 0.0) throw ConfigError("threshold_c must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (stages.size() != 3) throw ConfigError("schedule needs exactly three stages");
  for (size_t i = 0; i < stages.size(); ++i) {
    if (stages[i].index != static_cast<int>(i) + 1)
      throw ConfigError("stages must appear in order 1, 2, 3");
    stages[i].validate();
  }
  classifier.validate();
  if (classifier.in_channels != frontend_filters)
    throw ConfigError("classifier in_channels must match frontend_filters");
}

TrainingSchedule default_schedule(const std::string& dataset, bool full) {
  if (dataset != "mnist" && dataset != "fashion")
    throw ConfigError("dataset must be mnist or fashion");
  TrainingSchedule s;
  s.dataset = dataset;
  s.threshold_c = dataset == "mnist" ? 0.5 : 0.3;
  const int epochs = full ? 20 : 5;

  StageSpec s1;
  s1.index = 1;
  s1.epochs = epochs;
  s1.regularized = true;
  s1.bump = BumpVariant::B1;
  s1.sigma = 0.35;

  StageSpec s2 = s1;
  s2.index = 2;
  s2.bump = BumpVariant::B2;
  s2.sigma = 0.15;

  StageSpec s3;
  s3.index = 3;
  s3.epochs = epochs;
  s3.regularized = false;
  s3.freeze_frontend = true;
  s3.quantize = true;

  s.stages = {s1, s2, s3};
  s.classifier.in_channels = s.frontend_filters;
  return s;
}

void write_curve_csv(const std::vector<EpochLog>& curve, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open " + path + " for writing");
  out << "stage,epoch,lambda,cross_entropy,penalty,mean_bump,total\n";
  char line[256];
  for (const EpochLog& e : curve) {
    std::snprintf(line, sizeof(line), "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.stage,
                  e.epoch, e.lambda, e.cross_entropy, e.penalty, e.mean_bump, e.total);
    out << line;
  }
}

namespace {

double scalar_of(const Tape& t, Var v) { return t.value(v).data()[0]; }

}  // namespace

std::vector<EpochLog> run_stage(DefendedModel& m, const Dataset& train,
                                const StageSpec& stage, int batch_size,
                                AdamState& adam, std::uint64_t seed,
                                std::ostream* log) {
  stage.validate();
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (train.size() == 0) throw ArgumentError("training set is empty");
  m.frontend.frozen = stage.freeze_frontend;
  m.frontend.mode = stage.quantize ? FrontEndMode::Quantized : FrontEndMode::Linear;
  m.frontend.validate();
  m.clf.cfg.validate();

  std::vector<EpochLog> curve;
  if (stage.epochs == 0) return curve;

  Batcher batcher(train, batch_size, derive_seed(seed, "stage-batches", stage.index));
  const int total_epochs = stage.epochs;
  for (int epoch = 1; epoch <= total_epochs; ++epoch) {
    const double lambda = static_cast<double>(epoch) / total_epochs;
    BumpSpec bump;
    bump.variant = stage.bump;
    bump.sigma = stage.sigma;
    bump.c = m.frontend.c;
    bump.lambda = lambda;

    double ce_sum = 0.0, pen_sum = 0.0;
    std::int64_t seen = 0;
    for (int b = 0; b < batcher.num_batches(); ++b) {
      Batch batch = batcher.get(epoch - 1, b);
      const auto bs = static_cast<std::int64_t>(batch.labels.size());

      Tape t;
      ForwardOptions opts;
      opts.classifier_grad = true;
      opts.frontend_grad = !stage.freeze_frontend;
      ForwardHandles h = m.build(t, batch.images, opts);
      Var ce = softmax_cross_entropy(t, h.logits, batch.labels);
      Var loss = ce;
      double pen = 0.0;
      if (stage.regularized) {
        Var reg = bump_penalty(t, h.z, bump);
        pen = scalar_of(t, reg);
        loss = add(t, ce, reg);
      }
      t.backward(loss);

      std::vector<Tensor*> params;
      std::vector<const Tensor*> grads;
      if (!stage.freeze_frontend) {
        params.push_back(&m.frontend.filters);
        grads.push_back(&t.grad(h.filters));
      }
      auto clf_params = m.clf.all();
      const Var clf_vars[] = {h.clf.conv1_w, h.clf.conv1_b, h.clf.conv2_w, h.clf.conv2_b,
                              h.clf.fc1_w,   h.clf.fc1_b,   h.clf.fc2_w,   h.clf.fc2_b};
      for (size_t i = 0; i < clf_params.size(); ++i) {
        params.push_back(clf_params[i]);
        grads.push_back(&t.grad(clf_vars[i]));
      }
      adam.step(params, grads);

      ce_sum += scalar_of(t, ce) * static_cast<double>(bs);
      pen_sum += pen * static_cast<double>(bs);
      seen += bs;
    }

    EpochLog e;
    e.stage = stage.index;
    e.epoch = epoch;
    e.lambda = lambda;
    e.cross_entropy = ce_sum / static_cast<double>(seen);
    e.penalty = pen_sum / static_cast<double>(seen);
    e.mean_bump = stage.regularized ? e.penalty / lambda : 0.0;
    e.total = e.cross_entropy + e.penalty;
    curve.push_back(e);
    if (log) {
      char line[192];
      std::snprintf(line, sizeof(line),
                    "stage %d epoch %2d/%d  lambda %.4f  ce %.5f  penalty %.5f  total %.5f",
                    e.stage, e.epoch, total_epochs, e.lambda, e.cross_entropy, e.penalty,
                    e.total);
      *log << line << '\n' << std::flush;
    }
  }
  return curve;
}

TrainResult train_full(const Dataset& train, const TrainingSchedule& sched,
                       const std::string& out_dir, std::ostream* log) {
  sched.validate();

  TrainResult r;
  r.model.frontend = make_frontend(sched.frontend_filters, sched.frontend_kernel,
                                   sched.threshold_c, derive_seed(sched.seed, "frontend"));
  ClassifierConfig cfg = sched.classifier;
  r.model.clf = init_classifier(cfg, derive_seed(sched.seed, "classifier"));

  for (const StageSpec& stage : sched.stages) {
    AdamState adam(sched.adam);
    std::vector<EpochLog> c =
        run_stage(r.model, train, stage, sched.batch_size, adam, sched.seed, log);
    r.curve.insert(r.curve.end(), c.begin(), c.end());
    if (!out_dir.empty()) {
      std::string path = out_dir + "/stage" + std::to_string(stage.index) + ".ckpt";
      std::map<std::string, std::string> meta;
      meta["dataset"] = sched.dataset;
      meta["stage"] = std::to_string(stage.index);
      meta["seed"] = std::to_string(sched.seed);
      meta["epochs"] = std::to_string(stage.epochs);
      save_model(r.model, path, meta);
      r.checkpoints.push_back(path);
    }
  }
  return r;
}

PlainModel train_plain(const Dataset& train, int epochs, int batch_size,
                       const AdamConfig& adam_cfg, std::uint64_t seed,
                       std::vector<EpochLog>* curve, std::ostream* log) {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (train.size() == 0) throw ArgumentError("training set is empty");

  PlainModel m;
  ClassifierConfig cfg;
  cfg.in_channels = 1;
  m.clf = init_classifier(cfg, derive_seed(seed, "classifier"));
  if (epochs == 0) return m;

  AdamState adam(adam_cfg);
  Batcher batcher(train, batch_size, derive_seed(seed, "plain-batches"));
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    double ce_sum = 0.0;
    std::int64_t seen = 0;
    for (int b = 0; b < batcher.num_batches(); ++b) {
      Batch batch = batcher.get(epoch - 1, b);
      const auto bs = static_cast<std::int64_t>(batch.labels.size());

      Tape t;
      ForwardOptions opts;
      opts.classifier_grad = true;
      ForwardHandles h = m.build(t, batch.images, opts);
      Var ce = softmax_cross_entropy(t, h.logits, batch.labels);
      t.backward(ce);

      auto clf_params = m.clf.all();
      const Var clf_vars[] = {h.clf.conv1_w, h.clf.conv1_b, h.clf.conv2_w, h.clf.conv2_b,
                              h.clf.fc1_w,   h.clf.fc1_b,   h.clf.fc2_w,   h.clf.fc2_b};
      std::vector<Tensor*> params;
      std::vector<const Tensor*> grads;
      for (size_t i = 0; i < clf_params.size(); ++i) {
        params.push_back(clf_params[i]);
        grads.push_back(&t.grad(clf_vars[i]));
      }
      adam.step(params, grads);

      ce_sum += scalar_of(t, ce) * static_cast<double>(bs);
      seen += bs;
    }
    const double mean_ce = ce_sum / static_cast<double>(seen);
    if (curve) {
      EpochLog e;
      e.stage = 1;
      e.epoch = epoch;
      e.cross_entropy = mean_ce;
      e.total = mean_ce;
      curve->push_back(e);
    }
    if (log) {
      char line[128];
      std::snprintf(line, sizeof(line), "plain epoch %2d/%d  ce %.5f", epoch, epochs,
                    mean_ce);
      *log << line << '\n' << std::flush;
    }
  }
  return m;
}

}  // namespace polarfront
