#include "polarfront/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <ostream>
#include <sstream>

#include "polarfront/errors.hpp"
#include "polarfront/eval.hpp"
#include "polarfront/ops.hpp"
#include "polarfront/rng.hpp"
#include "polarfront/training.hpp"

namespace polarfront {

namespace {

using nlohmann::json;

struct CliState {
  std::string dataset = "mnist";
  std::string data_dir = "data";
  std::string config_path;
  std::string checkpoint;
  std::string out_path;
  std::string attack;  // empty in eval means fgsm+bim+pgd
  std::string defense = "frontend";
  std::uint64_t seed = 1;
  std::vector<double> epsilons;
  int steps = 20;
  int restarts = 3;
  int subset_n = -1;  // -1 picks the per-command default
  bool full = false;
};

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    json j;
    in >> j;
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) throw ConfigError("unknown config key '" + item.key() + "' in " + where);
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  try {
    if (j.contains(key)) out = j.at(key).get<T>();
  } catch (const json::type_error&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

BumpVariant bump_of(const std::string& name) {
  if (name == "B1" || name == "b1") return BumpVariant::B1;
  if (name == "B2" || name == "b2") return BumpVariant::B2;
  throw ConfigError("unknown regularizer '" + name + "' (use B1, B2 or none)");
}

AttackFamily family_of(const std::string& name) {
  if (name == "fgsm") return AttackFamily::FGSM;
  if (name == "bim") return AttackFamily::BIM;
  if (name == "pgd") return AttackFamily::PGD;
  throw ConfigError("unknown attack family '" + name + "'");
}

void apply_schedule_config(TrainingSchedule& s, const json& j) {
  check_keys(j, {"dataset", "seed", "batch_size", "frontend", "classifier", "adam",
                 "stages", "attack", "twin_epochs"},
             "config");
  maybe(j, "dataset", s.dataset);
  maybe(j, "seed", s.seed);
  maybe(j, "batch_size", s.batch_size);
  if (j.contains("frontend")) {
    const json& f = j.at("frontend");
    check_keys(f, {"filters", "kernel", "threshold_c"}, "frontend");
    maybe(f, "filters", s.frontend_filters);
    maybe(f, "kernel", s.frontend_kernel);
    maybe(f, "threshold_c", s.threshold_c);
  }
  if (j.contains("classifier")) {
    const json& c = j.at("classifier");
    check_keys(c, {"conv1_filters", "conv2_filters", "fc1_width", "kernel"}, "classifier");
    maybe(c, "conv1_filters", s.classifier.conv1_filters);
    maybe(c, "conv2_filters", s.classifier.conv2_filters);
    maybe(c, "fc1_width", s.classifier.fc1_width);
    maybe(c, "kernel", s.classifier.kernel);
  }
  if (j.contains("adam")) {
    const json& a = j.at("adam");
    check_keys(a, {"lr", "beta1", "beta2", "eps"}, "adam");
    maybe(a, "lr", s.adam.lr);
    maybe(a, "beta1", s.adam.beta1);
    maybe(a, "beta2", s.adam.beta2);
    maybe(a, "eps", s.adam.eps);
  }
  if (j.contains("stages")) {
    const json& st = j.at("stages");
    if (!st.is_array()) throw ConfigError("config key 'stages' must be an array");
    s.stages.clear();
    int index = 0;
    for (const json& e : st) {
      check_keys(e, {"index", "epochs", "regularizer", "sigma", "freeze_frontend",
                     "quantize"},
                 "stages[]");
      StageSpec spec;
      spec.index = ++index;
      maybe(e, "index", spec.index);
      maybe(e, "epochs", spec.epochs);
      if (e.contains("regularizer")) {
        const auto name = e.at("regularizer").get<std::string>();
        spec.regularized = name != "none";
        if (spec.regularized) spec.bump = bump_of(name);
      } else {
        spec.regularized = spec.index != 3;
        spec.bump = spec.index == 2 ? BumpVariant::B2 : BumpVariant::B1;
      }
      if (!e.contains("sigma")) spec.sigma = spec.index == 2 ? 0.15 : 0.35;
      maybe(e, "sigma", spec.sigma);
      spec.freeze_frontend = spec.index == 3;
      spec.quantize = spec.index == 3;
      maybe(e, "freeze_frontend", spec.freeze_frontend);
      maybe(e, "quantize", spec.quantize);
      s.stages.push_back(spec);
    }
  }
  s.classifier.in_channels = s.frontend_filters;
}

void apply_attack_config(AttackSpec& a, const json& cfg) {
  if (!cfg.contains("attack")) return;
  const json& j = cfg.at("attack");
  check_keys(j, {"family", "epsilon", "alpha", "steps", "restarts", "grad_mode"},
             "attack");
  if (j.contains("family")) a.family = family_of(j.at("family").get<std::string>());
  maybe(j, "epsilon", a.epsilon);
  maybe(j, "alpha", a.alpha);
  maybe(j, "steps", a.steps);
  maybe(j, "restarts", a.restarts);
  if (j.contains("grad_mode")) {
    const auto m = j.at("grad_mode").get<std::string>();
    if (m == "identity")
      a.grad_mode = QuantizerGrad::Identity;
    else if (m == "exact")
      a.grad_mode = QuantizerGrad::Exact;
    else
      throw ConfigError("unknown grad_mode '" + m + "' (use identity or exact)");
  }
}

Dataset load_split(const std::string& data_dir, const std::string& dataset, bool train) {
  const std::string base = data_dir + "/" + dataset + "/";
  const char* img = train ? "train-images-idx3-ubyte" : "t10k-images-idx3-ubyte";
  const char* lab = train ? "train-labels-idx1-ubyte" : "t10k-labels-idx1-ubyte";
  return load_idx(base + img, base + lab, dataset);
}

struct LoadedModel {
  bool defended = false;
  DefendedModel fe;
  PlainModel plain;
  std::map<std::string, std::string> meta;

  const AttackTarget& target() const {
    return defended ? static_cast<const AttackTarget&>(fe)
                    : static_cast<const AttackTarget&>(plain);
  }
};

LoadedModel load_any(const std::string& path) {
  LoadedModel m;
  m.defended = checkpoint_is_defended(path);
  if (m.defended)
    m.fe = load_defended(path, &m.meta);
  else
    m.plain = load_plain(path, &m.meta);
  return m;
}

std::string resolve_dataset(const CLI::App& sub, const CliState& o, const json& cfg,
                            const LoadedModel* m) {
  if (sub.count("--dataset")) return o.dataset;
  if (cfg.contains("dataset")) return cfg.at("dataset").get<std::string>();
  if (m) {
    auto it = m->meta.find("dataset");
    if (it != m->meta.end() && !it->second.empty()) return it->second;
  }
  return o.dataset;
}

std::uint64_t resolve_seed(const CLI::App& sub, const CliState& o, const json& cfg) {
  if (sub.count("--seed")) return o.seed;
  if (cfg.contains("seed")) return cfg.at("seed").get<std::uint64_t>();
  return o.seed;
}

double primary_epsilon(const CliState& o) {
  return o.epsilons.empty() ? 0.3 : o.epsilons.front();
}

AttackSpec flag_spec(const CLI::App& sub, const CliState& o, const json& cfg,
                     const std::string& fallback_family) {
  AttackSpec spec;
  apply_attack_config(spec, cfg);
  std::string family = fallback_family;
  if (sub.count("--attack"))
    family = o.attack;
  else if (cfg.contains("attack") && cfg.at("attack").contains("family"))
    family.clear();  // keep the config family
  if (!family.empty()) spec.family = family_of(family);
  if (sub.count("--epsilon")) spec.epsilon = primary_epsilon(o);
  if (sub.count("--steps")) spec.steps = o.steps;
  if (sub.count("--restarts")) spec.restarts = o.restarts;
  if (spec.family != AttackFamily::PGD) spec.restarts = 1;
  return spec;
}

int resolve_subset(const CliState& o, int fallback) {
  return o.subset_n >= 0 ? o.subset_n : fallback;
}

/// Front-end activations for the first n samples, computed in chunks.
Tensor collect_z(const DefendedModel& m, const Dataset& ds, int batch_size) {
  const int n = ds.size();
  const int k = m.frontend.filter_count();
  Tensor z({n, k, 28, 28});
  for (int b = 0; b * batch_size < n; ++b) {
    const int lo = b * batch_size;
    const int hi = std::min(n, lo + batch_size);
    std::vector<int> idx(hi - lo);
    std::iota(idx.begin(), idx.end(), lo);
    Batch batch = gather(ds, idx);
    Tensor zb = m.frontend_z(batch.images);
    std::copy(zb.data(), zb.data() + zb.size(),
              z.data() + static_cast<std::int64_t>(lo) * k * 28 * 28);
  }
  return z;
}

Dataset eval_subset(const Dataset& test, int n, std::uint64_t seed) {
  if (n <= 0 || n >= test.size()) return test;
  return subset(test, n, derive_seed(seed, "eval-subset"));
}

int cmd_train(const CLI::App& sub, const CliState& o, const json& cfg, std::ostream& out) {
  const std::string dataset = resolve_dataset(sub, o, cfg, nullptr);
  TrainingSchedule sched = default_schedule(dataset, o.full);
  apply_schedule_config(sched, cfg);
  sched.dataset = dataset;
  if (sub.count("--seed")) sched.seed = o.seed;
  sched.validate();

  Dataset all = load_split(o.data_dir, dataset, true);
  const int want = resolve_subset(o, o.full ? 0 : 10000);
  Dataset train = want > 0 && want < all.size()
                      ? subset(all, want, derive_seed(sched.seed, "train-subset"))
                      : all;
  out << "training on " << train.size() << " " << dataset << " samples, seed "
      << sched.seed << "\n";

  const std::string out_dir = o.out_path.empty() ? "." : o.out_path;
  std::filesystem::create_directories(out_dir);

  if (o.defense == "plain") {
    int epochs = 0;
    for (const StageSpec& s : sched.stages) epochs += s.epochs;
    maybe(cfg, "twin_epochs", epochs);
    std::vector<EpochLog> curve;
    PlainModel m =
        train_plain(train, epochs, sched.batch_size, sched.adam, sched.seed, &curve, &out);
    std::map<std::string, std::string> meta{{"dataset", dataset},
                                            {"seed", std::to_string(sched.seed)},
                                            {"epochs", std::to_string(epochs)}};
    const std::string path = out_dir + "/plain.ckpt";
    save_model(m, path, meta);
    write_curve_csv(curve, out_dir + "/plain_curves.csv");
    out << "wrote " << path << "\n";
    return 0;
  }

  TrainResult r = train_full(train, sched, out_dir, &out);
  write_curve_csv(r.curve, out_dir + "/curves.csv");
  for (const std::string& p : r.checkpoints) out << "wrote " << p << "\n";
  out << "final model: " << r.checkpoints.back() << "\n";
  return 0;
}

int cmd_eval(const CLI::App& sub, const CliState& o, const json& cfg, std::ostream& out) {
  LoadedModel m = load_any(o.checkpoint);
  const std::string dataset = resolve_dataset(sub, o, cfg, &m);
  Dataset test = load_split(o.data_dir, dataset, false);

  EvalOptions opt;
  opt.epsilon = sub.count("--epsilon") ? primary_epsilon(o) : 0.3;
  opt.subset_n = resolve_subset(o, 1000);
  opt.seed = resolve_seed(sub, o, cfg);
  opt.log = &out;

  std::vector<AttackSpec> specs;
  if (o.attack.empty() && !cfg.contains("attack")) {
    for (const char* fam : {"fgsm", "bim", "pgd"}) {
      AttackSpec s = flag_spec(sub, o, cfg, fam);
      s.epsilon = opt.epsilon;
      specs.push_back(s);
    }
  } else {
    AttackSpec s = flag_spec(sub, o, cfg, "pgd");
    s.epsilon = sub.count("--epsilon") ? primary_epsilon(o) : s.epsilon;
    opt.epsilon = s.epsilon;
    specs.push_back(s);
  }

  EvalReport rep = m.defended ? evaluate(m.fe, test, specs, opt)
                              : evaluate(m.plain, test, specs, opt);
  print_report(rep, out);
  if (!o.out_path.empty()) {
    write_eval_csv(rep, o.out_path);
    out << "wrote " << o.out_path << "\n";
  }
  return 0;
}

int cmd_attack(const CLI::App& sub, const CliState& o, const json& cfg, std::ostream& out) {
  LoadedModel m = load_any(o.checkpoint);
  const std::string dataset = resolve_dataset(sub, o, cfg, &m);
  Dataset test = load_split(o.data_dir, dataset, false);
  const std::uint64_t seed = resolve_seed(sub, o, cfg);
  Dataset ds = eval_subset(test, resolve_subset(o, 100), seed);
  AttackSpec spec = flag_spec(sub, o, cfg, "pgd");
  spec.validate();

  std::ostringstream csv;
  csv << "sample,label,clean_pred,adv_pred,success,final_loss,linf\n";
  const int batch_size = 128;
  std::int64_t fooled = 0;
  double max_linf = 0.0, loss_sum = 0.0;
  for (int b = 0; b * batch_size < ds.size(); ++b) {
    const int lo = b * batch_size;
    const int hi = std::min(ds.size(), lo + batch_size);
    std::vector<int> idx(hi - lo);
    std::iota(idx.begin(), idx.end(), lo);
    Batch batch = gather(ds, idx);

    AttackSpec bs = spec;
    bs.seed = derive_seed(derive_seed(seed, "eval-attack", 0), "batch",
                          static_cast<std::uint64_t>(b));
    std::vector<int> clean_pred = argmax_rows(m.target().logits(batch.images));
    AdversarialBatch adv = run_attack(m.target(), batch.images, batch.labels, bs);
    std::vector<int> adv_pred = argmax_rows(m.target().logits(adv.inputs));

    const std::int64_t px = static_cast<std::int64_t>(batch.images.size()) / (hi - lo);
    for (int i = 0; i < hi - lo; ++i) {
      double linf = 0.0;
      const double* a = adv.inputs.data() + i * px;
      const double* x = batch.images.data() + i * px;
      for (std::int64_t j = 0; j < px; ++j) linf = std::max(linf, std::abs(a[j] - x[j]));
      max_linf = std::max(max_linf, linf);
      loss_sum += adv.final_loss.data()[i];
      fooled += adv.success[i];
      char row[160];
      std::snprintf(row, sizeof(row), "%d,%d,%d,%d,%d,%.17g,%.17g\n", lo + i,
                    batch.labels[i], clean_pred[i], adv_pred[i], int(adv.success[i]),
                    adv.final_loss.data()[i], linf);
      csv << row;
    }
  }
  char line[160];
  std::snprintf(line, sizeof(line),
                "attack success %.2f%% over %d samples, mean final loss %.5f, max linf "
                "%.6f (budget %g)\n",
                100.0 * double(fooled) / double(ds.size()), ds.size(),
                loss_sum / double(ds.size()), max_linf, spec.epsilon);
  out << line;
  if (!o.out_path.empty()) {
    std::ofstream f(o.out_path, std::ios::binary);
    if (!f) throw ArgumentError("cannot open " + o.out_path + " for writing");
    f << csv.str();
    out << "wrote " << o.out_path << "\n";
  }
  return 0;
}

int cmd_sweep(const CLI::App& sub, const CliState& o, const json& cfg, std::ostream& out,
              std::ostream& err) {
  LoadedModel m = load_any(o.checkpoint);
  const std::string dataset = resolve_dataset(sub, o, cfg, &m);
  Dataset test = load_split(o.data_dir, dataset, false);

  std::vector<double> grid = o.epsilons;
  if (grid.empty()) grid = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4};
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  EvalOptions opt;
  opt.subset_n = resolve_subset(o, 200);
  opt.seed = resolve_seed(sub, o, cfg);
  opt.log = &err;

  AttackSpec spec = flag_spec(sub, o, cfg, "pgd");
  std::vector<SweepPoint> points = epsilon_sweep(m.target(), test, grid, spec, opt);
  const std::string path = o.out_path.empty() ? "sweep.csv" : o.out_path;
  write_sweep_csv(points, path);
  for (const SweepPoint& p : points) {
    char line[96];
    std::snprintf(line, sizeof(line), "eps %-6g accuracy %6.2f%%\n", p.epsilon,
                  p.accuracy);
    out << line;
  }
  out << "wrote " << path << "\n";
  return 0;
}

int cmd_hist(const CLI::App& sub, const CliState& o, const json& cfg, std::ostream& out) {
  LoadedModel m = load_any(o.checkpoint);
  if (!m.defended) throw StateError("plain checkpoints have no front end to inspect");
  const std::string dataset = resolve_dataset(sub, o, cfg, &m);
  Dataset test = load_split(o.data_dir, dataset, false);
  const std::uint64_t seed = resolve_seed(sub, o, cfg);
  Dataset ds = eval_subset(test, resolve_subset(o, 1000), seed);

  const double eps = sub.count("--epsilon") ? primary_epsilon(o) : 0.3;
  Tensor z = collect_z(m.fe, ds, 128);
  PolarizationReport rep = polarization_report(z, m.fe.frontend.c, eps);
  const std::string path = o.out_path.empty() ? "histogram.csv" : o.out_path;
  write_histogram_csv(rep, path);

  char line[256];
  std::snprintf(line, sizeof(line),
                "activations %lld over %d samples\npolarized    %.4f within 0.2 of "
                "{-1,0,1}\ndanger zone  %.4f within eps=%g of +-%g\nmin margin   %.6f\n",
                static_cast<long long>(z.size()), ds.size(), rep.polarized_fraction,
                rep.danger_zone_mass, eps, m.fe.frontend.c, rep.min_margin);
  out << line << "wrote " << path << "\n";
  return 0;
}

int cmd_certify(const CLI::App& sub, const CliState& o, const json& cfg,
                std::ostream& out) {
  LoadedModel m = load_any(o.checkpoint);
  if (!m.defended) throw StateError("plain checkpoints have nothing to certify");
  const std::string dataset = resolve_dataset(sub, o, cfg, &m);
  Dataset test = load_split(o.data_dir, dataset, false);
  const std::uint64_t seed = resolve_seed(sub, o, cfg);
  Dataset ds = eval_subset(test, resolve_subset(o, 1000), seed);

  const double eps = sub.count("--epsilon") ? primary_epsilon(o) : 0.3;
  Tensor z = collect_z(m.fe, ds, 128);
  Certification cert = certify_prop1(z, m.fe.frontend.c, eps);

  double max_margin = 0.0;
  for (std::int64_t i = 0; i < cert.margins.size(); ++i)
    max_margin = std::max(max_margin, cert.margins.data()[i]);
  const int bins = 100;
  std::vector<std::int64_t> count(bins, 0);
  const double width = max_margin > 0.0 ? max_margin / bins : 1.0;
  for (std::int64_t i = 0; i < cert.margins.size(); ++i) {
    int b = static_cast<int>(cert.margins.data()[i] / width);
    count[std::clamp(b, 0, bins - 1)]++;
  }
  const std::string path = o.out_path.empty() ? "margins.csv" : o.out_path;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ArgumentError("cannot open " + path + " for writing");
  f << "bin_lo,bin_hi,count,density\n";
  const double total = static_cast<double>(cert.margins.size());
  for (int b = 0; b < bins; ++b) {
    char row[128];
    std::snprintf(row, sizeof(row), "%.17g,%.17g,%lld,%.17g\n", b * width, (b + 1) * width,
                  static_cast<long long>(count[b]),
                  static_cast<double>(count[b]) / (total * width));
    f << row;
  }

  char line[192];
  std::snprintf(line, sizeof(line),
                "certified fraction %.4f at eps=%g (threshold +-%g, %lld activations "
                "over %d samples)\n",
                cert.certified_fraction, eps, m.fe.frontend.c,
                static_cast<long long>(cert.margins.size()), ds.size());
  out << line << "wrote " << path << "\n";
  return 0;
}

int cmd_export_filters(const CliState& o, std::ostream& out) {
  LoadedModel m = load_any(o.checkpoint);
  if (!m.defended) throw StateError("plain checkpoints have no front-end filters");
  const Tensor& w = m.fe.frontend.filters;
  const int k = m.fe.frontend.kernel();
  const std::string dir = o.out_path.empty() ? "filters" : o.out_path;
  std::filesystem::create_directories(dir);

  Tensor norms = l1_norms(w);
  for (int f = 0; f < w.dim(0); ++f) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s/filter_%02d.csv", dir.c_str(), f);
    std::ofstream file(name, std::ios::binary);
    if (!file) throw ArgumentError(std::string("cannot open ") + name + " for writing");
    for (int r = 0; r < k; ++r) {
      for (int c = 0; c < k; ++c) {
        char cell[32];
        std::snprintf(cell, sizeof(cell), "%.17g", w.at({f, 0, r, c}));
        file << cell << (c + 1 < k ? "," : "\n");
      }
    }
  }
  double mean_norm = 0.0;
  for (int f = 0; f < norms.size(); ++f) mean_norm += norms.data()[f];
  mean_norm /= static_cast<double>(norms.size());
  out << "wrote " << w.dim(0) << " filters (" << k << "x" << k << ") to " << dir
      << ", mean l1 norm " << mean_norm << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliState o;
  CLI::App app{"polarize-and-quantize front-end defense against l-inf attacks"};
  app.name("polarfront");
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--dataset", o.dataset, "mnist or fashion")
        ->check(CLI::IsMember({"mnist", "fashion"}));
    sub->add_option("--data-dir", o.data_dir, "directory holding <dataset>/ IDX files");
    sub->add_option("--config", o.config_path, "JSON config file")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed");
  };
  auto add_checkpoint = [&](CLI::App* sub) {
    sub->add_option("--checkpoint", o.checkpoint, "model checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
  };
  auto add_attack_flags = [&](CLI::App* sub) {
    sub->add_option("--attack", o.attack, "attack family")
        ->check(CLI::IsMember({"fgsm", "bim", "pgd"}));
    sub->add_option("--epsilon", o.epsilons, "l-inf budget (repeatable)");
    sub->add_option("--steps", o.steps, "iterations for bim/pgd");
    sub->add_option("--restarts", o.restarts, "pgd restarts");
  };

  CLI::App* train = app.add_subcommand("train", "three-stage training run");
  add_common(train);
  train->add_option("--out", o.out_path, "output directory");
  train->add_option("--subset-n", o.subset_n, "training subset size, 0 = all");
  train->add_flag("--full", o.full, "full-scale settings (20 epochs/stage, whole set)");
  train->add_option("--defense", o.defense, "frontend or plain (undefended twin)")
      ->check(CLI::IsMember({"frontend", "plain"}));

  CLI::App* eval_cmd = app.add_subcommand("eval", "clean + adversarial accuracy report");
  add_common(eval_cmd);
  add_checkpoint(eval_cmd);
  add_attack_flags(eval_cmd);
  eval_cmd->add_option("--subset-n", o.subset_n, "evaluation subset size, 0 = all");
  eval_cmd->add_option("--out", o.out_path, "report CSV path");

  CLI::App* attack_cmd = app.add_subcommand("attack", "per-sample adversarial run");
  add_common(attack_cmd);
  add_checkpoint(attack_cmd);
  add_attack_flags(attack_cmd);
  attack_cmd->add_option("--subset-n", o.subset_n, "samples to attack, 0 = all");
  attack_cmd->add_option("--out", o.out_path, "per-sample CSV path");

  CLI::App* sweep = app.add_subcommand("sweep", "accuracy across an epsilon grid");
  add_common(sweep);
  add_checkpoint(sweep);
  add_attack_flags(sweep);
  sweep->add_option("--subset-n", o.subset_n, "evaluation subset size, 0 = all");
  sweep->add_option("--out", o.out_path, "sweep CSV path");

  CLI::App* hist = app.add_subcommand("hist", "front-end activation histogram");
  add_common(hist);
  add_checkpoint(hist);
  hist->add_option("--epsilon", o.epsilons, "danger-zone budget");
  hist->add_option("--subset-n", o.subset_n, "samples to project, 0 = all");
  hist->add_option("--out", o.out_path, "histogram CSV path");

  CLI::App* certify = app.add_subcommand("certify", "per-activation robustness margins");
  add_common(certify);
  add_checkpoint(certify);
  certify->add_option("--epsilon", o.epsilons, "certification budget");
  certify->add_option("--subset-n", o.subset_n, "samples to certify, 0 = all");
  certify->add_option("--out", o.out_path, "margin histogram CSV path");

  CLI::App* expf = app.add_subcommand("export-filters", "front-end filters as CSV grids");
  add_common(expf);
  add_checkpoint(expf);
  expf->add_option("--out", o.out_path, "output directory");

  std::vector<const char*> argv;
  argv.push_back("polarfront");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    const json cfg = o.config_path.empty() ? json::object() : load_json(o.config_path);
    if (train->parsed()) return cmd_train(*train, o, cfg, out);
    if (eval_cmd->parsed()) return cmd_eval(*eval_cmd, o, cfg, out);
    if (attack_cmd->parsed()) return cmd_attack(*attack_cmd, o, cfg, out);
    if (sweep->parsed()) return cmd_sweep(*sweep, o, cfg, out, err);
    if (hist->parsed()) return cmd_hist(*hist, o, cfg, out);
    if (certify->parsed()) return cmd_certify(*certify, o, cfg, out);
    if (expf->parsed()) return cmd_export_filters(o, out);
    err << app.help();
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace polarfront
