#include "polarfront/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "polarfront/errors.hpp"
#include "polarfront/ops.hpp"
#include "polarfront/rng.hpp"

namespace polarfront {

namespace {

inline double sgn_attack(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Hard feasibility gate on everything an attack emits; active in all builds.
void check_feasible(const Tensor& x, const Tensor& xp, double eps) {
  const double tol = eps + std::numeric_limits<double>::epsilon();
  for (long i = 0; i < x.size(); ++i) {
    const double v = xp.data()[i];
    if (!(v >= 0.0 && v <= 1.0))
      throw StateError("adversarial example leaves [0,1]: value " + std::to_string(v));
    if (std::fabs(v - x.data()[i]) > tol)
      throw StateError("adversarial example violates the eps box: |delta| = " +
                       std::to_string(std::fabs(v - x.data()[i])) + " > " +
                       std::to_string(eps));
  }
}

std::vector<uint8_t> success_flags(const AttackTarget& m, const Tensor& xp,
                                   const std::vector<int>& labels, Tensor* losses) {
  const Tensor lg = m.logits(xp);
  const std::vector<int> pred = argmax_rows(lg);
  if (losses) *losses = softmax_ce_per_sample(lg, labels);
  std::vector<uint8_t> out(pred.size());
  for (size_t i = 0; i < pred.size(); ++i)
    out[i] = pred[i] != labels[i] ? 1 : 0;
  return out;
}

struct IteratedRun {
  Tensor inputs;
  Tensor final_loss;
  Tensor loss_trace;
  std::vector<uint8_t> success;
};

// Shared BIM loop; e0 == nullptr means the zero start.
IteratedRun run_iterated(const AttackTarget& m, const Tensor& x,
                         const std::vector<int>& labels, const AttackSpec& spec,
                         const Tensor* e0) {
  const int B = x.dim(0);
  const double eps = spec.epsilon;
  const double alpha = spec.effective_alpha();

  Tensor cur = x;
  if (e0) {
    for (long i = 0; i < cur.size(); ++i) {
      const double e = std::clamp(e0->data()[i], -eps, eps);
      cur.data()[i] = std::clamp(x.data()[i] + e, 0.0, 1.0);
    }
  }

  IteratedRun run;
  run.loss_trace = Tensor({B, spec.steps + 1});
  for (int step = 0; step < spec.steps; ++step) {
    const AttackTarget::LossAndGrad lg =
        m.loss_and_input_gradient(cur, labels, spec.grad_mode);
    for (int b = 0; b < B; ++b)
      run.loss_trace.data()[static_cast<long>(b) * (spec.steps + 1) + step] =
          lg.per_sample_loss.data()[b];
    for (long i = 0; i < cur.size(); ++i) {
      const double e = std::clamp(
          cur.data()[i] - x.data()[i] + alpha * sgn_attack(lg.input_grad.data()[i]),
          -eps, eps);
      cur.data()[i] = std::clamp(x.data()[i] + e, 0.0, 1.0);
    }
  }
  check_feasible(x, cur, eps);
  run.success = success_flags(m, cur, labels, &run.final_loss);
  for (int b = 0; b < B; ++b)
    run.loss_trace.data()[static_cast<long>(b) * (spec.steps + 1) + spec.steps] =
        run.final_loss.data()[b];
  run.inputs = std::move(cur);
  return run;
}

}  // namespace

void AttackSpec::validate() const {
  if (epsilon < 0.0) throw ArgumentError("attack budget eps must be >= 0");
  if (family != AttackFamily::FGSM) {
    if (steps < 1) throw ArgumentError("iterated attacks need steps >= 1");
    if (epsilon > 0.0 && !(effective_alpha() > 0.0))
      throw ArgumentError("iterated attacks need a positive step size");
  }
  if (family == AttackFamily::PGD && restarts < 1)
    throw ArgumentError("pgd needs restarts >= 1");
}

AdversarialBatch fgsm(const AttackTarget& m, const Tensor& x,
                      const std::vector<int>& labels, double eps,
                      QuantizerGrad grad_mode) {
  if (eps < 0.0) throw ArgumentError("attack budget eps must be >= 0");
  const int B = x.dim(0);
  const AttackTarget::LossAndGrad lg = m.loss_and_input_gradient(x, labels, grad_mode);

  AdversarialBatch out;
  out.inputs = Tensor(x.shape());
  for (long i = 0; i < x.size(); ++i)
    out.inputs.data()[i] =
        std::clamp(x.data()[i] + eps * sgn_attack(lg.input_grad.data()[i]), 0.0, 1.0);
  check_feasible(x, out.inputs, eps);
  out.success = success_flags(m, out.inputs, labels, &out.final_loss);
  out.loss_trace = Tensor({B, 2});
  for (int b = 0; b < B; ++b) {
    out.loss_trace.data()[2 * b] = lg.per_sample_loss.data()[b];
    out.loss_trace.data()[2 * b + 1] = out.final_loss.data()[b];
  }
  return out;
}

AdversarialBatch bim(const AttackTarget& m, const Tensor& x,
                     const std::vector<int>& labels, const AttackSpec& spec) {
  spec.validate();
  IteratedRun run = run_iterated(m, x, labels, spec, nullptr);
  return AdversarialBatch{std::move(run.inputs), std::move(run.success),
                          std::move(run.final_loss), std::move(run.loss_trace)};
}

AdversarialBatch pgd_restarts(const AttackTarget& m, const Tensor& x,
                              const std::vector<int>& labels, const AttackSpec& spec) {
  spec.validate();
  const int B = x.dim(0);
  const long per = x.size() / B;

  AdversarialBatch best;
  std::vector<IteratedRun> runs;
  for (int r = 0; r < spec.restarts; ++r) {
    Tensor e0;
    if (r > 0) {
      e0 = Tensor(x.shape());
      Rng rng(derive_seed(spec.seed, "pgd-restart", static_cast<uint64_t>(r)));
      for (long i = 0; i < e0.size(); ++i)
        e0.data()[i] = rng.uniform(-spec.epsilon, spec.epsilon);
    }
    runs.push_back(run_iterated(m, x, labels, spec, r > 0 ? &e0 : nullptr));
  }

  best.inputs = Tensor(x.shape());
  best.final_loss = Tensor({B});
  best.loss_trace = Tensor({B, spec.steps + 1});
  best.success.resize(static_cast<size_t>(B));
  for (int b = 0; b < B; ++b) {
    int pick = 0;
    for (int r = 1; r < spec.restarts; ++r)
      if (runs[static_cast<size_t>(r)].final_loss.data()[b] >
          runs[static_cast<size_t>(pick)].final_loss.data()[b])
        pick = r;
    const IteratedRun& src = runs[static_cast<size_t>(pick)];
    std::copy(src.inputs.data() + b * per, src.inputs.data() + (b + 1) * per,
              best.inputs.data() + b * per);
    best.final_loss.data()[b] = src.final_loss.data()[b];
    std::copy(src.loss_trace.data() + static_cast<long>(b) * (spec.steps + 1),
              src.loss_trace.data() + static_cast<long>(b + 1) * (spec.steps + 1),
              best.loss_trace.data() + static_cast<long>(b) * (spec.steps + 1));
    best.success[static_cast<size_t>(b)] = src.success[static_cast<size_t>(b)];
  }
  check_feasible(x, best.inputs, spec.epsilon);
  return best;
}

AdversarialBatch run_attack(const AttackTarget& m, const Tensor& x,
                            const std::vector<int>& labels, const AttackSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case AttackFamily::FGSM: return fgsm(m, x, labels, spec.epsilon, spec.grad_mode);
    case AttackFamily::BIM: return bim(m, x, labels, spec);
    case AttackFamily::PGD: return pgd_restarts(m, x, labels, spec);
  }
  throw ArgumentError("unknown attack family");
}

}  // namespace polarfront
