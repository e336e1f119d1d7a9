#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polarfront/tape.hpp"
#include "polarfront/tensor.hpp"

namespace polarfront {

enum class FrontEndMode { Linear, Quantized };

/// Bank of K single-channel polarizing filters. In Linear mode the forward
/// pass emits the l1-normalized activation z; in Quantized mode it emits the
/// ternary quantization of z. Quantized mode requires frozen filters: the
/// quantizer has no useful gradient, so training it would be meaningless.
struct FrontEndState {
  Tensor filters;  // [K,1,k,k]
  FrontEndMode mode = FrontEndMode::Linear;
  double c = 0.5;
  bool frozen = false;

  int filter_count() const { return filters.dim(0); }
  int kernel() const { return filters.dim(2); }
  int padding() const { return (kernel() - 1) / 2; }
  void validate() const;
};

/// He-uniform initialized filter bank, odd square kernel.
FrontEndState make_frontend(int filter_count, int kernel, double c, uint64_t seed);

enum class BumpVariant { B1, B2 };

/// Gaussian-shaped activation penalty. B1 is centered at the origin and
/// pushes activations outward; B2 has peaks at +-c and pushes activations
/// away from the quantization thresholds.
struct BumpSpec {
  BumpVariant variant = BumpVariant::B1;
  double sigma = 0.35;
  double c = 0.0;       // threshold offset, B2 only
  double lambda = 0.0;  // current coefficient in [0,1]
  void validate() const;
};

/// Per-filter sum of absolute weights. A zero filter makes normalization
/// undefined and raises ArgumentError.
Tensor l1_norms(const Tensor& filters);

/// Single sample [1,H,W] -> [K,H,W]: z_k = conv(x, w_k) / ||w_k||_1 with
/// padding preserving H x W, no bias; Quantized mode applies the ternary
/// quantizer to z.
Tensor frontend_forward(const Tensor& x, const FrontEndState& fe);

/// Hoelder bound: sup over ||e||_inf <= eps of |<w,e>| equals eps*||w||_1,
/// attained by e* = eps*sign(w).
double output_perturbation_bound(const Tensor& w, double eps);
Tensor extremal_perturbation(const Tensor& w, double eps);

double bump_value(double z, const BumpSpec& spec);
double bump_grad(double z, const BumpSpec& spec);

/// f2(z) = 0.5*sign(z-c) + 0.5*sign(z+c) with sign(0) := +1, values in
/// {-1,0,1}; z exactly at +-c quantizes upward.
Tensor quantize_ternary(const Tensor& z, double c);
double quantize_ternary_scalar(double z, double c);

/// f(a) = 0.5 * sum_i sign(a - c_i) over strictly increasing thresholds.
Tensor quantize_multilevel(const Tensor& a, const std::vector<double>& thresholds);
double quantize_multilevel_scalar(double a, const std::vector<double>& thresholds);

/// Dead-zone activation (baseline comparison only): 0 if |a| <= eps*l1norm,
/// else a.
double sparse_activation(double a, double eps, double l1norm);

/// Per-neuron certificates from clean Linear-mode activations: a neuron is
/// certified iff its distance to the nearest threshold exceeds eps, which
/// proves the quantized output cannot change under any ||e||_inf <= eps.
struct Certification {
  std::vector<uint8_t> certified;  // one flag per element of z
  Tensor margins;                  // distance to nearest threshold
  double certified_fraction = 0.0;
};
Certification certify_prop1(const Tensor& z, double c, double eps);

// Tape ops for training and attacks.

/// z = conv(x, w_k) / ||w_k||_1; x is [1,H,W] or [B,1,H,W].
Var l1_normalized_conv2d(Tape& t, Var x, Var w, int pad);

/// Backward rule for the quantizer: Exact uses the true (flat, zero almost
/// everywhere) derivative; Identity passes the upstream gradient through
/// unchanged, which is how a white-box attacker differentiates the quantized
/// network.
enum class QuantizerGrad { Exact, Identity };
Var quantize_ternary_op(Tape& t, Var z, double c, QuantizerGrad grad_mode);

/// Scalar penalty lambda * mean over all elements of B(z).
Var bump_penalty(Tape& t, Var z, const BumpSpec& spec);

/// Distribution summary of normalized activations z ([K,H,W] or [B,K,H,W]).
struct PolarizationReport {
  std::vector<double> bin_centers;       // 100 bins spanning [-1.5, 1.5]
  std::vector<double> density;           // integrates to 1 over the range
  Tensor per_sample_min_margin;          // [B]
  double min_margin = 0.0;
  double certified_fraction = 0.0;       // margin > eps
  double danger_zone_mass = 0.0;         // margin <= eps
  double polarized_fraction = 0.0;       // within 0.2 of {-1, 0, 1}
  double c = 0.0;
  double eps = 0.0;
};
PolarizationReport polarization_report(const Tensor& z, double c, double eps);
void write_histogram_csv(const PolarizationReport& rep, const std::string& path);

}  // namespace polarfront
