#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "polarfront/attacks.hpp"
#include "polarfront/dataset.hpp"
#include "polarfront/model.hpp"

namespace polarfront {

struct EvalOptions {
  double epsilon = 0.3;  // reported budget, also used for certification
  int subset_n = 1000;   // 0 evaluates the whole set
  int batch_size = 128;
  std::uint64_t seed = 7;
  std::ostream* log = nullptr;
};

/// Everything needed to reproduce and compare an evaluation. runtime_seconds
/// is display-only: it never enters the CSV or the fingerprint, so reports
/// from identical (config, seed, data) runs compare equal byte for byte.
struct EvalReport {
  std::string dataset;
  std::string defense;  // "frontend" or "plain"
  double epsilon = 0.0;
  int subset_n = 0;
  std::uint64_t seed = 0;
  double clean_accuracy = 0.0;                                 // percent
  std::vector<std::pair<std::string, double>> attack_accuracy; // percent, run order
  double certified_fraction = -1.0;  // -1 when the model has no front end
  double runtime_seconds = 0.0;
  std::string fingerprint;  // hash of the evaluated configuration
};

/// Percent of correctly classified samples.
double clean_accuracy(const AttackTarget& m, const Dataset& ds, int batch_size);

/// Percent of samples still classified correctly after the attack. Runs in
/// deterministic batches; every adversarial batch re-asserts its feasibility
/// internally before being counted.
double adversarial_accuracy(const AttackTarget& m, const Dataset& ds,
                            const AttackSpec& spec, int batch_size);

/// Clean plus per-attack accuracy on a seeded subset (subset_n = 0 for the
/// whole set). The defended overload also reports the fraction of front-end
/// activations certified at opt.epsilon. The model must be finalized
/// (frozen front end) or StateError is raised.
EvalReport evaluate(const DefendedModel& m, const Dataset& test,
                    const std::vector<AttackSpec>& attacks,
                    const EvalOptions& opt = {});
EvalReport evaluate(const PlainModel& m, const Dataset& test,
                    const std::vector<AttackSpec>& attacks,
                    const EvalOptions& opt = {});

/// CSV form of the report (header + one row). Excludes runtime so it is
/// bit-reproducible.
std::string eval_report_csv(const EvalReport& r);
void write_eval_csv(const EvalReport& r, const std::string& path);
void print_report(const EvalReport& r, std::ostream& out);

struct SweepPoint {
  double epsilon = 0.0;
  double accuracy = 0.0;  // percent
};

/// One evaluation per grid point (ascending grid required; epsilon 0 scores
/// the clean model). Accuracy should fall as epsilon grows; violations are
/// written to opt.log but do not fail the sweep.
std::vector<SweepPoint> epsilon_sweep(const AttackTarget& m, const Dataset& test,
                                      const std::vector<double>& grid,
                                      const AttackSpec& attack,
                                      const EvalOptions& opt = {});

std::string sweep_csv(const std::vector<SweepPoint>& points);
void write_sweep_csv(const std::vector<SweepPoint>& points, const std::string& path);

}  // namespace polarfront
