#include "polarfront/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "polarfront/errors.hpp"
#include "polarfront/frontend.hpp"
#include "polarfront/ops.hpp"
#include "polarfront/rng.hpp"

namespace polarfront {

namespace {

const char* family_name(AttackFamily f) {
  switch (f) {
    case AttackFamily::FGSM: return "fgsm";
    case AttackFamily::BIM: return "bim";
    default: return "pgd";
  }
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<int> slice_indices(int begin, int end) {
  std::vector<int> idx(end - begin);
  std::iota(idx.begin(), idx.end(), begin);
  return idx;
}

std::string config_string(const EvalReport& r, const std::vector<AttackSpec>& attacks) {
  std::ostringstream s;
  s << r.dataset << '|' << r.defense << '|' << fmt(r.epsilon) << '|' << r.subset_n << '|'
    << r.seed;
  for (const AttackSpec& a : attacks) {
    s << '|' << family_name(a.family) << ':' << fmt(a.epsilon) << ':'
      << fmt(a.effective_alpha()) << ':' << a.steps << ':' << a.restarts << ':'
      << (a.grad_mode == QuantizerGrad::Identity ? "identity" : "exact");
  }
  return s.str();
}

/// Attack column names in run order; duplicates of a family get a numeric
/// suffix so CSV headers stay unique.
std::vector<std::string> attack_names(const std::vector<AttackSpec>& attacks) {
  std::vector<std::string> names;
  for (const AttackSpec& a : attacks) {
    std::string base = family_name(a.family);
    std::string name = base;
    int n = 1;
    while (std::find(names.begin(), names.end(), name) != names.end())
      name = base + "_" + std::to_string(++n);
    names.push_back(name);
  }
  return names;
}

EvalReport evaluate_impl(const AttackTarget& m, const DefendedModel* fe,
                         const Dataset& test, const std::vector<AttackSpec>& attacks,
                         const EvalOptions& opt) {
  if (opt.subset_n < 0) throw ArgumentError("subset_n must be >= 0");
  if (opt.batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  const auto started = std::chrono::steady_clock::now();

  Dataset ds = opt.subset_n > 0 ? subset(test, opt.subset_n, derive_seed(opt.seed, "eval-subset"))
                                : test;

  EvalReport r;
  r.dataset = test.name;
  r.defense = fe ? "frontend" : "plain";
  r.epsilon = opt.epsilon;
  r.subset_n = ds.size();
  r.seed = opt.seed;
  r.fingerprint = hex64(fnv1a64(config_string(r, attacks)));

  r.clean_accuracy = clean_accuracy(m, ds, opt.batch_size);
  if (opt.log) *opt.log << "clean accuracy " << r.clean_accuracy << "%\n" << std::flush;

  const std::vector<std::string> names = attack_names(attacks);
  for (size_t i = 0; i < attacks.size(); ++i) {
    AttackSpec spec = attacks[i];
    spec.seed = derive_seed(opt.seed, "eval-attack", static_cast<std::uint64_t>(i));
    const double acc = adversarial_accuracy(m, ds, spec, opt.batch_size);
    r.attack_accuracy.emplace_back(names[i], acc);
    if (opt.log) *opt.log << names[i] << " accuracy " << acc << "%\n" << std::flush;
  }

  if (fe) {
    std::int64_t certified = 0, total = 0;
    const int n = ds.size();
    for (int b = 0; b * opt.batch_size < n; ++b) {
      const int lo = b * opt.batch_size;
      const int hi = std::min(n, lo + opt.batch_size);
      Batch batch = gather(ds, slice_indices(lo, hi));
      Tensor z = fe->frontend_z(batch.images);
      Certification cert = certify_prop1(z, fe->frontend.c, opt.epsilon);
      for (std::uint8_t flag : cert.certified) certified += flag;
      total += static_cast<std::int64_t>(cert.certified.size());
    }
    r.certified_fraction = total > 0 ? static_cast<double>(certified) / static_cast<double>(total) : 0.0;
  }

  r.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return r;
}

}  // namespace

double clean_accuracy(const AttackTarget& m, const Dataset& ds, int batch_size) {
  if (ds.size() == 0) throw ArgumentError("cannot evaluate an empty dataset");
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  const int n = ds.size();
  std::int64_t correct = 0;
  for (int b = 0; b * batch_size < n; ++b) {
    const int lo = b * batch_size;
    const int hi = std::min(n, lo + batch_size);
    Batch batch = gather(ds, slice_indices(lo, hi));
    std::vector<int> pred = argmax_rows(m.logits(batch.images));
    for (size_t i = 0; i < pred.size(); ++i) correct += pred[i] == batch.labels[i];
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(n);
}

double adversarial_accuracy(const AttackTarget& m, const Dataset& ds,
                            const AttackSpec& spec, int batch_size) {
  if (ds.size() == 0) throw ArgumentError("cannot evaluate an empty dataset");
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  spec.validate();
  const int n = ds.size();
  std::int64_t fooled = 0;
  for (int b = 0; b * batch_size < n; ++b) {
    const int lo = b * batch_size;
    const int hi = std::min(n, lo + batch_size);
    Batch batch = gather(ds, slice_indices(lo, hi));
    AttackSpec batch_spec = spec;
    batch_spec.seed = derive_seed(spec.seed, "batch", static_cast<std::uint64_t>(b));
    AdversarialBatch adv = run_attack(m, batch.images, batch.labels, batch_spec);
    for (std::uint8_t s : adv.success) fooled += s;
  }
  return 100.0 * static_cast<double>(n - fooled) / static_cast<double>(n);
}

EvalReport evaluate(const DefendedModel& m, const Dataset& test,
                    const std::vector<AttackSpec>& attacks, const EvalOptions& opt) {
  if (!m.frontend.frozen)
    throw StateError("evaluate expects a finalized model with a frozen front end");
  return evaluate_impl(m, &m, test, attacks, opt);
}

EvalReport evaluate(const PlainModel& m, const Dataset& test,
                    const std::vector<AttackSpec>& attacks, const EvalOptions& opt) {
  return evaluate_impl(m, nullptr, test, attacks, opt);
}

std::string eval_report_csv(const EvalReport& r) {
  std::ostringstream head, row;
  head << "dataset,defense,epsilon,subset_n,seed,clean";
  row << r.dataset << ',' << r.defense << ',' << fmt(r.epsilon) << ',' << r.subset_n << ','
      << r.seed << ',' << fmt(r.clean_accuracy);
  for (const auto& [name, acc] : r.attack_accuracy) {
    head << ',' << name;
    row << ',' << fmt(acc);
  }
  head << ",certified_fraction,fingerprint";
  row << ',' << (r.certified_fraction >= 0.0 ? fmt(r.certified_fraction) : "") << ','
      << r.fingerprint;
  return head.str() + "\n" + row.str() + "\n";
}

void write_eval_csv(const EvalReport& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open " + path + " for writing");
  out << eval_report_csv(r);
}

void print_report(const EvalReport& r, std::ostream& out) {
  char line[160];
  out << "dataset      " << r.dataset << "\n"
      << "defense      " << r.defense << "\n";
  std::snprintf(line, sizeof(line), "epsilon      %g\n", r.epsilon);
  out << line;
  out << "samples      " << r.subset_n << " (seed " << r.seed << ")\n";
  std::snprintf(line, sizeof(line), "clean        %.2f%%\n", r.clean_accuracy);
  out << line;
  for (const auto& [name, acc] : r.attack_accuracy) {
    std::snprintf(line, sizeof(line), "%-12s %.2f%%\n", name.c_str(), acc);
    out << line;
  }
  if (r.certified_fraction >= 0.0) {
    std::snprintf(line, sizeof(line),
                  "certified    %.4f of front-end activations at this budget\n",
                  r.certified_fraction);
    out << line;
  }
  out << "fingerprint  " << r.fingerprint << "\n";
  std::snprintf(line, sizeof(line), "runtime      %.1f s\n", r.runtime_seconds);
  out << line << std::flush;
}

std::vector<SweepPoint> epsilon_sweep(const AttackTarget& m, const Dataset& test,
                                      const std::vector<double>& grid,
                                      const AttackSpec& attack, const EvalOptions& opt) {
  if (grid.empty()) throw ArgumentError("epsilon grid is empty");
  for (size_t i = 1; i < grid.size(); ++i)
    if (grid[i] < grid[i - 1]) throw ArgumentError("epsilon grid must be sorted ascending");
  for (double e : grid)
    if (e < 0.0) throw ArgumentError("epsilon must be >= 0");

  Dataset ds = opt.subset_n > 0 ? subset(test, opt.subset_n, derive_seed(opt.seed, "eval-subset"))
                                : test;

  std::vector<SweepPoint> points;
  for (size_t i = 0; i < grid.size(); ++i) {
    SweepPoint p;
    p.epsilon = grid[i];
    if (grid[i] == 0.0) {
      p.accuracy = clean_accuracy(m, ds, opt.batch_size);
    } else {
      AttackSpec spec = attack;
      spec.epsilon = grid[i];
      spec.alpha = attack.alpha;  // 0 keeps the eps/10 default tracking each grid point
      spec.seed = derive_seed(opt.seed, "sweep", static_cast<std::uint64_t>(i));
      p.accuracy = adversarial_accuracy(m, ds, spec, opt.batch_size);
    }
    points.push_back(p);
    if (opt.log)
      *opt.log << "eps " << p.epsilon << " accuracy " << p.accuracy << "%\n" << std::flush;
    if (i > 0 && points[i].accuracy > points[i - 1].accuracy && opt.log)
      *opt.log << "warning: accuracy rose from eps " << points[i - 1].epsilon << " to "
               << points[i].epsilon << " (" << points[i - 1].accuracy << "% -> "
               << points[i].accuracy << "%)\n"
               << std::flush;
  }
  return points;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream s;
  s << "epsilon,accuracy\n";
  for (const SweepPoint& p : points) s << fmt(p.epsilon) << ',' << fmt(p.accuracy) << '\n';
  return s.str();
}

void write_sweep_csv(const std::vector<SweepPoint>& points, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open " + path + " for writing");
  out << sweep_csv(points);
}

}  // namespace polarfront
