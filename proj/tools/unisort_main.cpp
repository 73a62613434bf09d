// Command-line front end: demos, goodness-of-fit checks, training runs,
// temperature sweeps and the property-validation suite.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "unisort/config.hpp"
#include "unisort/data.hpp"
#include "unisort/losses.hpp"
#include "unisort/pl.hpp"
#include "unisort/relaxation.hpp"
#include "unisort/rng.hpp"
#include "unisort/tasks.hpp"
#include "unisort/validate.hpp"

namespace {

using nlohmann::json;
using namespace unisort;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

std::string perm_to_string(const Permutation& z) {
  std::string out = "[";
  for (std::size_t i = 0; i < z.size(); ++i)
    out += (i ? ", " : "") + std::to_string(z.indices()[i]);
  return out + "]";
}

std::uint64_t parse_seed_string(const std::string& s) {
  std::size_t used = 0;
  const std::uint64_t v = std::stoull(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad seed: " + s);
  return v;
}

std::uint64_t resolve_seed(bool flag_given, std::uint64_t flag_value,
                           const std::map<std::string, std::string>& config) {
  if (flag_given) return flag_value;
  if (auto it = config.find("seed"); it != config.end()) return parse_seed_string(it->second);
  if (const char* env = std::getenv("UNISORT_SEED")) return parse_seed_string(env);
  return 42;
}

TrainMode parse_mode(const std::string& mode) {
  if (mode == "det") return TrainMode::kDeterministic;
  if (mode == "stoch") return TrainMode::kStochastic;
  if (mode == "st") return TrainMode::kStraightThrough;
  throw std::invalid_argument("mode must be one of det, stoch, st");
}

struct SortDemoArgs {
  std::vector<double> scores;
  double tau = 1.0;
  bool as_json = false;
};

int run_sort_demo(const SortDemoArgs& args) {
  const ScoreVector s(args.scores);
  const Temperature tau(args.tau);
  const Permutation exact = sort_permutation(s);
  const UnimodalMatrix relaxed = relaxed_sort(s, tau);
  const Permutation projected = project_hard(relaxed);
  const MatrixClassification cls = classify_matrix(relaxed.entries);

  if (args.as_json) {
    json out;
    out["scores"] = args.scores;
    out["tau"] = args.tau;
    out["permutation"] = exact.indices();
    out["relaxed"] = matrix_to_json(relaxed.entries);
    out["projection"] = projected.indices();
    out["classification"] = {{"row_stochastic", cls.row_stochastic},
                             {"doubly_stochastic", cls.doubly_stochastic},
                             {"unimodal", cls.unimodal},
                             {"permutation", cls.permutation}};
    std::cout << out.dump(2) << "\n";
    return kExitOk;
  }

  std::cout << "sort permutation: " << perm_to_string(exact) << "\n";
  std::cout << "relaxed matrix (tau=" << format_g17(args.tau) << "):\n";
  for (std::size_t i = 0; i < relaxed.entries.rows(); ++i) {
    std::cout << " ";
    for (std::size_t j = 0; j < relaxed.entries.cols(); ++j) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), " %.6f", relaxed.entries(i, j));
      std::cout << buf;
    }
    std::cout << "\n";
  }
  std::cout << "hard projection: " << perm_to_string(projected) << "\n";
  std::cout << "classification: row_stochastic=" << (cls.row_stochastic ? "true" : "false")
            << " doubly_stochastic=" << (cls.doubly_stochastic ? "true" : "false")
            << " unimodal=" << (cls.unimodal ? "true" : "false")
            << " permutation=" << (cls.permutation ? "true" : "false") << "\n";
  return kExitOk;
}

struct PlCheckArgs {
  std::vector<double> scores;
  int samples = 100000;
  std::uint64_t seed = 42;
  bool as_json = false;
};

int run_pl_check(const PlCheckArgs& args) {
  if (args.scores.size() > 6)
    throw std::invalid_argument("pl-check: n must be <= 6 (factorial enumeration)");
  if (args.samples < 1) throw std::invalid_argument("pl-check: samples must be >= 1");
  const PLParams params{ScoreVector(args.scores)};
  const std::size_t n = args.scores.size();

  std::vector<std::vector<int>> perms;
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 1);
  do {
    perms.push_back(idx);
  } while (std::next_permutation(idx.begin(), idx.end()));

  std::vector<double> exact(perms.size());
  for (std::size_t i = 0; i < perms.size(); ++i)
    exact[i] = std::exp(pl_log_pmf(params, Permutation(perms[i])));

  std::vector<std::int64_t> counts(perms.size(), 0);
  for (int t = 0; t < args.samples; ++t) {
    const Permutation z = pl_sample_hard(params, mix_seed(args.seed, static_cast<std::uint64_t>(t)));
    const auto it = std::lower_bound(perms.begin(), perms.end(), z.indices());
    ++counts[static_cast<std::size_t>(it - perms.begin())];
  }

  double tv = 0.0, chi2 = 0.0;
  std::vector<double> freq(perms.size());
  for (std::size_t i = 0; i < perms.size(); ++i) {
    freq[i] = static_cast<double>(counts[i]) / static_cast<double>(args.samples);
    tv += std::abs(freq[i] - exact[i]);
    const double expected = exact[i] * args.samples;
    chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
  }
  tv *= 0.5;

  if (args.as_json) {
    json out;
    out["scores"] = args.scores;
    out["samples"] = args.samples;
    out["seed"] = args.seed;
    json table = json::array();
    for (std::size_t i = 0; i < perms.size(); ++i)
      table.push_back({{"permutation", perms[i]}, {"pmf", exact[i]}, {"frequency", freq[i]}});
    out["table"] = table;
    out["tv_distance"] = tv;
    out["chi_squared"] = chi2;
    std::cout << out.dump(2) << "\n";
    return kExitOk;
  }

  std::cout << "permutation        pmf       frequency\n";
  for (std::size_t i = 0; i < perms.size(); ++i) {
    std::string p = perm_to_string(Permutation(perms[i]));
    p.resize(18, ' ');
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s %.6f  %.6f\n", p.c_str(), exact[i], freq[i]);
    std::cout << buf;
  }
  std::cout << "tv_distance=" << format_g17(tv) << "\n";
  std::cout << "chi_squared=" << format_g17(chi2) << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string task;
  std::string config_path;
  std::map<std::string, std::string> config;
  TrainConfig cfg;
  std::string mode = "det";
  std::string out;
};

void apply_config_value(TrainConfig& cfg, std::string& mode, std::string& out,
                        const std::string& key, const std::string& value) {
  if (key == "n") cfg.n = std::stoi(value);
  else if (key == "d") cfg.d = std::stoi(value);
  else if (key == "k") cfg.k = std::stoi(value);
  else if (key == "tau") cfg.tau = std::stod(value);
  else if (key == "mode") mode = value;
  else if (key == "epochs") cfg.epochs = std::stoi(value);
  else if (key == "lr") cfg.lr = std::stod(value);
  else if (key == "samples") cfg.n_samples = std::stoi(value);
  else if (key == "noise") cfg.noise = std::stod(value);
  else if (key == "count") cfg.count = std::stoi(value);
  else if (key == "hidden") cfg.hidden = std::stoi(value);
  else if (key == "candidates") cfg.n_candidates = std::stoi(value);
  else if (key == "embed_dim") cfg.embed_dim = std::stoi(value);
  else if (key == "out") out = value;
  else if (key == "seed" || key == "taus") return;  // handled elsewhere
  else throw std::invalid_argument("config: unknown key " + key);
}

void write_curve_csv(const std::string& path, const std::vector<EpochStat>& curve) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "epoch,train_loss,valid_metric\n";
  for (const EpochStat& row : curve)
    os << row.epoch << "," << format_g17(row.train_loss) << "," << format_g17(row.valid_metric)
       << "\n";
}

json metrics_to_json(const std::string& task, const MetricsRecord& m) {
  return json{{"task", task},
              {"exact_perm_accuracy", m.exact_perm_accuracy},
              {"element_rank_accuracy", m.element_rank_accuracy},
              {"mse", m.mse},
              {"r2", m.r2},
              {"knn_accuracy", m.knn_accuracy}};
}

int run_train(TrainArgs& args) {
  args.cfg.mode = parse_mode(args.mode);
  if (args.out.empty()) args.out = args.task + "_curve.csv";

  TrainResult result;
  if (args.task == "sort") {
    const SyntheticSequenceDataset ds =
        generate_sequences(args.cfg.n, args.cfg.d, args.cfg.count, args.cfg.noise, args.cfg.seed);
    result = train_sort(ds, args.cfg);
  } else if (args.task == "median") {
    const SyntheticSequenceDataset ds =
        generate_sequences(args.cfg.n, args.cfg.d, args.cfg.count, args.cfg.noise, args.cfg.seed);
    result = train_median(ds, args.cfg);
  } else if (args.task == "knn") {
    const KnnDataset ds = make_rings(std::max(args.cfg.count / 2, 2),
                                     std::max(args.cfg.count / 4, 25), 4, args.cfg.noise, 2.0,
                                     args.cfg.seed);
    result = train_knn(ds, args.cfg);
  } else {
    throw std::invalid_argument("train: task must be sort, median or knn");
  }

  write_curve_csv(args.out, result.curve);
  json out = metrics_to_json(args.task, result.metrics);
  out["csv"] = args.out;
  out["seed"] = args.cfg.seed;
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

struct SweepArgs {
  TrainConfig cfg;
  std::string taus = "1,2,4,8,16";
  int samples = 512;
  std::string out = "variance_sweep.csv";
};

int run_variance_sweep(SweepArgs& args) {
  args.cfg.mode = TrainMode::kStochastic;
  const std::vector<double> taus = parse_double_list(args.taus);
  const SyntheticSequenceDataset ds =
      generate_sequences(args.cfg.n, args.cfg.d, 4, args.cfg.noise, args.cfg.seed);
  const std::vector<SweepRow> rows =
      variance_sweep(ds, args.cfg, taus, args.samples, args.cfg.seed);

  std::ofstream os(args.out, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + args.out);
  os << "tau,log_variance\n";
  for (const SweepRow& row : rows)
    os << format_g17(row.tau) << "," << format_g17(row.log_variance) << "\n";

  bool monotone = true;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    if (rows[i + 1].log_variance > rows[i].log_variance) monotone = false;
  std::cout << "rows=" << rows.size() << " out=" << args.out
            << " monotone_non_increasing=" << (monotone ? "true" : "false") << "\n";
  return kExitOk;
}

int run_validate(std::uint64_t seed) {
  const std::vector<PropertyResult> results = run_validation_suite(seed);
  bool all_ok = true;
  for (const PropertyResult& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.detail.empty()) std::cout << " (" << r.detail << ")";
    std::cout << "\n";
    all_ok = all_ok && r.passed;
  }
  return all_ok ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentiable sorting toolkit: relaxed sort operator, "
               "Plackett-Luce sampling and estimators, training tasks"};
  app.require_subcommand(1);

  SortDemoArgs demo;
  CLI::App* demo_cmd = app.add_subcommand("sort-demo", "Sort scores exactly and via the relaxation");
  demo_cmd->add_option("scores", demo.scores, "Scores to sort")->required()->expected(-1);
  demo_cmd->add_option("--tau", demo.tau, "Softmax temperature");
  demo_cmd->add_flag("--json", demo.as_json, "Emit JSON instead of text");

  PlCheckArgs plc;
  bool plc_seed_given = false;
  CLI::App* plc_cmd =
      app.add_subcommand("pl-check", "Compare sampler frequencies against the exact pmf");
  plc_cmd->add_option("scores", plc.scores, "Positive scores")->required()->expected(-1);
  plc_cmd->add_option("--samples", plc.samples, "Number of draws");
  CLI::Option* plc_seed = plc_cmd->add_option("--seed", plc.seed, "RNG seed");
  plc_cmd->add_flag("--json", plc.as_json, "Emit JSON instead of text");

  TrainArgs train;
  std::uint64_t train_seed = 42;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a task and report metrics");
  train_cmd->add_option("task", train.task, "sort, median or knn")->required();
  CLI::Option* train_cfg_opt = train_cmd->add_option("--config", train.config_path,
                                                     "key=value config file");
  CLI::Option* t_n = train_cmd->add_option("--n", train.cfg.n, "Items per sequence");
  CLI::Option* t_d = train_cmd->add_option("--d", train.cfg.d, "Feature dimension");
  CLI::Option* t_k = train_cmd->add_option("--k", train.cfg.k, "Neighbors for the kNN vote");
  CLI::Option* t_tau = train_cmd->add_option("--tau", train.cfg.tau, "Softmax temperature");
  CLI::Option* t_mode = train_cmd->add_option("--mode", train.mode, "det, stoch or st");
  CLI::Option* t_epochs = train_cmd->add_option("--epochs", train.cfg.epochs, "Training epochs");
  CLI::Option* t_lr = train_cmd->add_option("--lr", train.cfg.lr, "Learning rate");
  CLI::Option* t_samples =
      train_cmd->add_option("--samples", train.cfg.n_samples, "Monte Carlo draws per step");
  CLI::Option* t_seed = train_cmd->add_option("--seed", train_seed, "RNG seed");
  CLI::Option* t_noise = train_cmd->add_option("--noise", train.cfg.noise, "Feature noise");
  CLI::Option* t_count = train_cmd->add_option("--count", train.cfg.count, "Training set size");
  CLI::Option* t_hidden = train_cmd->add_option("--hidden", train.cfg.hidden, "Hidden units");
  CLI::Option* t_cand =
      train_cmd->add_option("--candidates", train.cfg.n_candidates, "kNN candidate pool size");
  CLI::Option* t_embed =
      train_cmd->add_option("--embed-dim", train.cfg.embed_dim, "kNN embedding dimension");
  CLI::Option* t_out = train_cmd->add_option("--out", train.out, "Curve CSV path");

  SweepArgs sweep;
  std::uint64_t sweep_seed = 42;
  CLI::App* sweep_cmd =
      app.add_subcommand("variance-sweep", "Gradient variance versus temperature");
  sweep_cmd->add_option("--taus", sweep.taus, "Comma-separated temperatures");
  sweep_cmd->add_option("--samples", sweep.samples, "Gradient samples per temperature");
  CLI::Option* s_seed = sweep_cmd->add_option("--seed", sweep_seed, "RNG seed");
  sweep_cmd->add_option("--n", sweep.cfg.n, "Items per sequence");
  sweep_cmd->add_option("--d", sweep.cfg.d, "Feature dimension");
  sweep_cmd->add_option("--noise", sweep.cfg.noise, "Feature noise");
  sweep_cmd->add_option("--hidden", sweep.cfg.hidden, "Hidden units");
  sweep_cmd->add_option("--out", sweep.out, "Sweep CSV path");

  std::uint64_t validate_seed = 42;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "Run the property-validation suite");
  CLI::Option* v_seed = validate_cmd->add_option("--seed", validate_seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (demo_cmd->parsed()) return run_sort_demo(demo);

    if (plc_cmd->parsed()) {
      plc.seed = resolve_seed(plc_seed->count() > 0, plc.seed, {});
      return run_pl_check(plc);
    }

    if (train_cmd->parsed()) {
      if (train_cfg_opt->count() > 0)
        train.config = parse_config_file(train.config_path, train_config_keys());
      // config file fills anything the flags did not set explicitly
      const std::map<std::string, CLI::Option*> flag_for = {
          {"n", t_n},       {"d", t_d},           {"k", t_k},         {"tau", t_tau},
          {"mode", t_mode}, {"epochs", t_epochs}, {"lr", t_lr},       {"samples", t_samples},
          {"noise", t_noise}, {"count", t_count}, {"hidden", t_hidden},
          {"candidates", t_cand}, {"embed_dim", t_embed}, {"out", t_out}};
      for (const auto& [key, value] : train.config) {
        const auto it = flag_for.find(key);
        if (it != flag_for.end() && it->second->count() > 0) continue;
        apply_config_value(train.cfg, train.mode, train.out, key, value);
      }
      train.cfg.seed = resolve_seed(t_seed->count() > 0, train_seed, train.config);
      return run_train(train);
    }

    if (sweep_cmd->parsed()) {
      sweep.cfg.seed = resolve_seed(s_seed->count() > 0, sweep_seed, {});
      return run_variance_sweep(sweep);
    }

    if (validate_cmd->parsed())
      return run_validate(resolve_seed(v_seed->count() > 0, validate_seed, {}));
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
