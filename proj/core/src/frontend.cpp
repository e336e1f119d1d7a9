#include "polarfront/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <utility>

#include "polarfront/errors.hpp"
#include "polarfront/gemm.hpp"
#include "polarfront/ops.hpp"
#include "polarfront/rng.hpp"

namespace polarfront {

namespace {

inline double sgn_up(double v) { return v >= 0.0 ? 1.0 : -1.0; }  // sign(0) := +1
inline double sgn0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_threshold(double c) {
  if (!(c > 0.0 && c < 1.0))
    throw ArgumentError("quantizer threshold must lie in (0,1), got " + std::to_string(c));
}

}  // namespace

void FrontEndState::validate() const {
  if (filters.rank() != 4 || filters.dim(1) != 1)
    throw DimensionError("front-end filters must be [K,1,k,k], got shape " +
                         filters.shape_str());
  if (filters.dim(2) != filters.dim(3) || filters.dim(2) % 2 == 0)
    throw ArgumentError("front-end kernel must be odd and square, got shape " +
                        filters.shape_str());
  check_threshold(c);
  if (mode == FrontEndMode::Quantized && !frozen)
    throw StateError("Quantized mode requires frozen filters");
  l1_norms(filters);  // raises on a degenerate filter
}

FrontEndState make_frontend(int filter_count, int kernel, double c, uint64_t seed) {
  if (filter_count < 1) throw ArgumentError("front end needs at least one filter");
  if (kernel < 1 || kernel % 2 == 0)
    throw ArgumentError("front-end kernel must be odd, got " + std::to_string(kernel));
  FrontEndState fe;
  fe.c = c;
  fe.filters = Tensor({filter_count, 1, kernel, kernel});
  const double bound = std::sqrt(6.0 / (kernel * kernel));
  Rng rng(derive_seed(seed, "frontend-filters"));
  for (long i = 0; i < fe.filters.size(); ++i)
    fe.filters.data()[i] = rng.uniform(-bound, bound);
  fe.validate();
  return fe;
}

void BumpSpec::validate() const {
  if (!(sigma > 0.0)) throw ArgumentError("bump width must be positive");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw ArgumentError("bump coefficient must lie in [0,1], got " +
                        std::to_string(lambda));
}

Tensor l1_norms(const Tensor& filters) {
  if (filters.rank() != 4)
    throw DimensionError("l1_norms expects [K,C,kh,kw], got shape " + filters.shape_str());
  const int K = filters.dim(0);
  const long per = filters.size() / K;
  Tensor out({K});
  for (int k = 0; k < K; ++k) {
    double s = 0.0;
    const double* w = filters.data() + k * per;
    for (long i = 0; i < per; ++i) s += std::fabs(w[i]);
    if (s == 0.0)
      throw ArgumentError("degenerate front-end filter " + std::to_string(k) +
                          ": l1 norm is zero");
    out.data()[k] = s;
  }
  return out;
}

Tensor frontend_forward(const Tensor& x, const FrontEndState& fe) {
  fe.validate();
  if (x.rank() != 3 || x.dim(0) != 1)
    throw DimensionError("frontend_forward expects [1,H,W], got shape " + x.shape_str());
  const Tensor norms = l1_norms(fe.filters);
  Tensor z = conv2d_fwd(x, fe.filters, fe.padding(), fe.padding());
  const long per = z.size() / z.dim(0);
  for (int k = 0; k < z.dim(0); ++k) {
    double* zp = z.data() + k * per;
    const double inv = 1.0 / norms.data()[k];
    for (long i = 0; i < per; ++i) zp[i] *= inv;
  }
  if (fe.mode == FrontEndMode::Quantized) z = quantize_ternary(z, fe.c);
  return z;
}

double output_perturbation_bound(const Tensor& w, double eps) {
  if (eps < 0.0) throw ArgumentError("perturbation budget must be >= 0");
  double s = 0.0;
  for (long i = 0; i < w.size(); ++i) s += std::fabs(w.data()[i]);
  return eps * s;
}

Tensor extremal_perturbation(const Tensor& w, double eps) {
  if (eps < 0.0) throw ArgumentError("perturbation budget must be >= 0");
  Tensor e(w.shape());
  for (long i = 0; i < w.size(); ++i) e.data()[i] = eps * sgn0(w.data()[i]);
  return e;
}

double bump_value(double z, const BumpSpec& spec) {
  const double s2 = 2.0 * spec.sigma * spec.sigma;
  if (spec.variant == BumpVariant::B1) return std::exp(-z * z / s2);
  const double dm = z - spec.c, dp = z + spec.c;
  return std::exp(-dm * dm / s2) + std::exp(-dp * dp / s2);
}

double bump_grad(double z, const BumpSpec& spec) {
  const double s2 = spec.sigma * spec.sigma;
  if (spec.variant == BumpVariant::B1) return std::exp(-z * z / (2 * s2)) * (-z / s2);
  const double dm = z - spec.c, dp = z + spec.c;
  return std::exp(-dm * dm / (2 * s2)) * (-dm / s2) +
         std::exp(-dp * dp / (2 * s2)) * (-dp / s2);
}

double quantize_ternary_scalar(double z, double c) {
  return 0.5 * sgn_up(z - c) + 0.5 * sgn_up(z + c);
}

Tensor quantize_ternary(const Tensor& z, double c) {
  check_threshold(c);
  Tensor out(z.shape());
  for (long i = 0; i < z.size(); ++i)
    out.data()[i] = quantize_ternary_scalar(z.data()[i], c);
  return out;
}

double quantize_multilevel_scalar(double a, const std::vector<double>& thresholds) {
  double s = 0.0;
  for (double c : thresholds) s += 0.5 * sgn_up(a - c);
  return s;
}

Tensor quantize_multilevel(const Tensor& a, const std::vector<double>& thresholds) {
  if (thresholds.empty()) throw ArgumentError("multilevel quantizer needs thresholds");
  for (size_t i = 1; i < thresholds.size(); ++i)
    if (!(thresholds[i - 1] < thresholds[i]))
      throw ArgumentError("quantizer thresholds must be strictly increasing");
  Tensor out(a.shape());
  for (long i = 0; i < a.size(); ++i)
    out.data()[i] = quantize_multilevel_scalar(a.data()[i], thresholds);
  return out;
}

double sparse_activation(double a, double eps, double l1norm) {
  if (eps < 0.0 || l1norm < 0.0)
    throw ArgumentError("sparse_activation needs eps, l1norm >= 0");
  return std::fabs(a) <= eps * l1norm ? 0.0 : a;
}

Certification certify_prop1(const Tensor& z, double c, double eps) {
  check_threshold(c);
  if (eps < 0.0) throw ArgumentError("perturbation budget must be >= 0");
  Certification out;
  out.margins = Tensor(z.shape());
  out.certified.resize(static_cast<size_t>(z.size()));
  long n_cert = 0;
  for (long i = 0; i < z.size(); ++i) {
    const double v = z.data()[i];
    const double margin = std::min(std::fabs(v - c), std::fabs(v + c));
    out.margins.data()[i] = margin;
    const bool cert = margin > eps;
    out.certified[static_cast<size_t>(i)] = cert ? 1 : 0;
    n_cert += cert;
  }
  out.certified_fraction = z.size() > 0 ? double(n_cert) / double(z.size()) : 0.0;
  return out;
}

Var l1_normalized_conv2d(Tape& t, Var x, Var w, int pad) {
  const Tensor& wv = t.value(w);
  const Tensor norms = l1_norms(wv);
  Var a = conv2d(t, x, w, pad);
  const Tensor& av = t.value(a);
  const bool batched = av.rank() == 4;
  const int B = batched ? av.dim(0) : 1;
  const int K = batched ? av.dim(1) : av.dim(0);
  const long per = av.size() / (static_cast<long>(B) * K);

  Tensor z(av.shape());
  for (int b = 0; b < B; ++b)
    for (int k = 0; k < K; ++k) {
      const long off = (static_cast<long>(b) * K + k) * per;
      const double inv = 1.0 / norms.data()[k];
      for (long i = 0; i < per; ++i) z.data()[off + i] = av.data()[off + i] * inv;
    }

  // The conv node sits between x/w and this node, so the chain through it
  // handles conv_grad_x and conv_grad_w; this backward adds the gradient of
  // the norm itself: d z / d w_k includes -(z / n_k) * sign(w_k).
  auto bw = [aid = a.id, wid = w.id, norms, B, K, per](Tape& tp, int self) {
    const Tensor& gz = tp.grad_accum(self);
    const Tensor& zv = tp.value(Var{self});
    if (tp.requires_grad(Var{aid})) {
      Tensor& ga = tp.grad_accum(aid);
      for (int b = 0; b < B; ++b)
        for (int k = 0; k < K; ++k) {
          const long off = (static_cast<long>(b) * K + k) * per;
          const double inv = 1.0 / norms.data()[k];
          for (long i = 0; i < per; ++i) ga.data()[off + i] += gz.data()[off + i] * inv;
        }
    }
    if (tp.requires_grad(Var{wid})) {
      const Tensor& wv2 = tp.value(Var{wid});
      Tensor& gw = tp.grad_accum(wid);
      const long wper = wv2.size() / K;
      for (int k = 0; k < K; ++k) {
        double dldn = 0.0;
        for (int b = 0; b < B; ++b) {
          const long off = (static_cast<long>(b) * K + k) * per;
          for (long i = 0; i < per; ++i) dldn += gz.data()[off + i] * zv.data()[off + i];
        }
        dldn *= -1.0 / norms.data()[k];
        const double* wk = wv2.data() + k * wper;
        double* gwk = gw.data() + k * wper;
        for (long i = 0; i < wper; ++i) gwk[i] += dldn * sgn0(wk[i]);
      }
    }
  };
  return t.record("l1_normalized_conv2d", std::move(z), {a.id, w.id}, bw);
}

Var quantize_ternary_op(Tape& t, Var z, double c, QuantizerGrad grad_mode) {
  Tensor q = quantize_ternary(t.value(z), c);
  auto bw = [zid = z.id, grad_mode](Tape& tp, int self) {
    if (grad_mode == QuantizerGrad::Exact) return;
    if (!tp.requires_grad(Var{zid})) return;
    const Tensor& gy = tp.grad_accum(self);
    Tensor& gz = tp.grad_accum(zid);
    for (long i = 0; i < gz.size(); ++i) gz.data()[i] += gy.data()[i];
  };
  return t.record("quantize_ternary", std::move(q), {z.id}, bw);
}

Var bump_penalty(Tape& t, Var z, const BumpSpec& spec) {
  spec.validate();
  const Tensor& zv = t.value(z);
  const double inv_n = 1.0 / double(zv.size());
  double total = 0.0;
  for (long i = 0; i < zv.size(); ++i) total += bump_value(zv.data()[i], spec);
  Tensor penalty = Tensor::scalar(spec.lambda * inv_n * total);

  auto bw = [zid = z.id, spec, inv_n](Tape& tp, int self) {
    if (!tp.requires_grad(Var{zid})) return;
    const double g = tp.grad_accum(self).data()[0] * spec.lambda * inv_n;
    const Tensor& zv2 = tp.value(Var{zid});
    Tensor& gz = tp.grad_accum(zid);
    for (long i = 0; i < gz.size(); ++i) gz.data()[i] += g * bump_grad(zv2.data()[i], spec);
  };
  return t.record("bump_penalty", std::move(penalty), {z.id}, bw);
}

PolarizationReport polarization_report(const Tensor& z, double c, double eps) {
  check_threshold(c);
  if (z.rank() != 3 && z.rank() != 4)
    throw DimensionError("polarization_report expects [K,H,W] or [B,K,H,W], got shape " +
                         z.shape_str());
  const int B = z.rank() == 4 ? z.dim(0) : 1;
  const long per = z.size() / B;

  PolarizationReport rep;
  rep.c = c;
  rep.eps = eps;
  constexpr int kBins = 100;
  constexpr double kLo = -1.5, kHi = 1.5;
  const double width = (kHi - kLo) / kBins;
  rep.bin_centers.resize(kBins);
  rep.density.assign(kBins, 0.0);
  for (int i = 0; i < kBins; ++i) rep.bin_centers[i] = kLo + (i + 0.5) * width;

  rep.per_sample_min_margin = Tensor({B});
  long certified = 0, danger = 0, polarized = 0;
  double global_min = std::numeric_limits<double>::infinity();
  for (int b = 0; b < B; ++b) {
    double sample_min = std::numeric_limits<double>::infinity();
    const double* zb = z.data() + b * per;
    for (long i = 0; i < per; ++i) {
      const double v = zb[i];
      int bin = static_cast<int>(std::floor((v - kLo) / width));
      bin = std::clamp(bin, 0, kBins - 1);
      rep.density[static_cast<size_t>(bin)] += 1.0;
      const double margin = std::min(std::fabs(v - c), std::fabs(v + c));
      sample_min = std::min(sample_min, margin);
      if (margin > eps)
        ++certified;
      else
        ++danger;
      const double dist01 =
          std::min({std::fabs(v - 1.0), std::fabs(v), std::fabs(v + 1.0)});
      if (dist01 <= 0.2) ++polarized;
    }
    rep.per_sample_min_margin.data()[b] = sample_min;
    global_min = std::min(global_min, sample_min);
  }
  const double total = double(z.size());
  for (double& d : rep.density) d /= total * width;
  rep.min_margin = global_min;
  rep.certified_fraction = double(certified) / total;
  rep.danger_zone_mass = double(danger) / total;
  rep.polarized_fraction = double(polarized) / total;
  return rep;
}

void write_histogram_csv(const PolarizationReport& rep, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path + " for writing");
  f << "bin_center,density\n";
  for (size_t i = 0; i < rep.bin_centers.size(); ++i)
    f << rep.bin_centers[i] << "," << rep.density[i] << "\n";
  if (!f) throw FormatError("short write to " + path);
}

}  // namespace polarfront
