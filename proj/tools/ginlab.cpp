// Copyright 2026 The ginlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// ginlab command-line driver.
//
// Exit codes: 0 success, 1 an asserted invariant failed (details as JSON on
// stderr), 2 bad usage, unreadable input or unknown preset.

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ginlab/dataset_io.hpp"
#include "ginlab/expressiveness.hpp"
#include "ginlab/features.hpp"
#include "ginlab/synth.hpp"
#include "ginlab/train.hpp"
#include "ginlab/wl.hpp"
#include "ginlab/wl_classify.hpp"

namespace fs = std::filesystem;
using namespace ginlab;
using json = nlohmann::ordered_json;

namespace {

constexpr int kInvariantFailed = 1;
constexpr int kUsageError = 2;

struct Globals {
  std::uint64_t seed = 0;
  std::string out;
  std::size_t threads = default_threads();
};

// Writes to --out/<name>, or to stdout when no --out was given.
class Sink {
 public:
  explicit Sink(const Globals& g) : dir_(g.out) {}

  void write(const std::string& name, const std::string& content) const {
    if (dir_.empty()) {
      std::cout << content;
      return;
    }
    fs::create_directories(dir_);
    std::ofstream f(fs::path(dir_) / name, std::ios::binary);
    if (!f) throw LoadError("cannot write " + (fs::path(dir_) / name).string());
    f << content;
  }

  /// CSV plus a sidecar <name>.config.json; the sidecar is only written
  /// with --out.
  void write_csv(const std::string& name, const std::string& csv, const json& config) const {
    write(name, csv);
    if (!dir_.empty()) write(name + ".config.json", config.dump(2) + "\n");
  }

 private:
  std::string dir_;
};

struct DataArgs {
  std::string path;
  std::string name;
  std::string features = "given";

  void add(CLI::App* app) {
    app->add_option("--data", path, "TU dataset directory or JSON dataset file")->required();
    app->add_option("--name", name, "TU file prefix (default: directory name)");
    app->add_option("--features", features, "node features: given, degree or uniform")
        ->check(CLI::IsMember({"given", "degree", "uniform"}));
  }

  Dataset load() const {
    const fs::path p(path);
    if (!fs::exists(p)) throw LoadError("no such dataset: " + path);
    Dataset d = fs::is_directory(p)
                    ? load_tud_dataset(p, name.empty() ? p.filename().string() : name)
                    : load_json_dataset(p);
    if (features == "degree") return degree_onehot_features(d);
    if (features == "uniform") return uniform_features(d);
    return d;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// "1,2,5" or "1-6".
std::vector<std::size_t> parse_counts(const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(s)) {
    const auto dash = item.find('-');
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoul(item));
      } else {
        const std::size_t lo = std::stoul(item.substr(0, dash)), hi = std::stoul(item.substr(dash + 1));
        for (std::size_t k = lo; k <= hi; ++k) out.push_back(k);
      }
    } catch (const std::logic_error&) {
      throw PreconditionError("bad count list '" + s + "'");
    }
  }
  if (out.empty()) throw PreconditionError("empty count list");
  return out;
}

std::vector<GnnConfig> resolve_presets(const std::string& list) {
  std::vector<GnnConfig> out;
  if (list == "all") {
    for (const auto& n : preset_names()) out.push_back(preset(n));
    return out;
  }
  // a single JSON config may itself contain commas
  if (!list.empty() && list.front() == '{') return {resolve_config(list)};
  for (const auto& item : split_list(list)) out.push_back(resolve_config(item));
  return out;
}

std::string fmt(double v) { return RunRecord::format_double(v); }

double round1(double v) { return std::round(v * 10.0) / 10.0; }

// ------------------------------------------------------------- train args

struct TrainArgs {
  std::size_t epochs = 350;
  std::size_t batch_size = 32;
  std::size_t hidden = 32;
  double dropout = 0.0;
  std::size_t folds = 10;
  std::size_t fold_limit = 0;
  std::string readout = "auto";
  bool off_grid = false;

  void add(CLI::App* app) {
    app->add_option("--epochs", epochs, "training epochs")->capture_default_str();
    app->add_option("--batch-size", batch_size, "minibatch size (grid: 32, 128)")->capture_default_str();
    app->add_option("--hidden", hidden, "hidden units (grid: 16, 32, 64)")->capture_default_str();
    app->add_option("--dropout", dropout, "dropout rate (grid: 0, 0.5)")->capture_default_str();
    app->add_option("--folds", folds, "cross-validation folds")->capture_default_str();
    app->add_option("--fold-limit", fold_limit, "train only the first N folds (0 = all)");
    app->add_option("--readout", readout, "auto, preset, sum or mean")
        ->check(CLI::IsMember({"auto", "preset", "sum", "mean"}));
    app->add_flag("--allow-off-grid", off_grid, "accept values outside the search grid");
  }

  TrainSpec spec(const GnnConfig& config, const Globals& g) const {
    TrainSpec s;
    s.config = config;
    s.epochs = epochs;
    s.batch_size = batch_size;
    s.hidden = hidden;
    s.dropout = dropout;
    s.folds = folds;
    s.fold_limit = fold_limit;
    s.seed = g.seed;
    s.readout = json(readout).get<ReadoutPolicy>();
    s.allow_off_grid = off_grid;
    s.threads = g.threads;
    s.validate();
    return s;
  }
};

json specs_json(const std::vector<TrainSpec>& specs, const Dataset& d) {
  json j = json::array();
  for (const auto& s : specs) {
    json e = s.to_json();
    e["resolved_config"] = s.model_config(d).to_json();
    j.push_back(std::move(e));
  }
  return j;
}

// --------------------------------------------------------------- commands

int cmd_dataset_stats(const DataArgs& data, const Globals& g) {
  const Dataset d = data.load();
  json j;
  j["name"] = d.name();
  j["num_graphs"] = d.size();
  j["num_classes"] = d.num_classes();
  j["avg_nodes"] = round1(d.average_nodes());
  j["vocabulary_size"] = d.vocabulary_size();
  Sink(g).write("dataset_stats.json", j.dump() + "\n");
  return 0;
}

Graph first_graph(const std::string& path) {
  if (!fs::exists(path)) throw LoadError("no such graph file: " + path);
  const auto graphs = load_json_graphs(path);
  if (graphs.empty()) throw FormatError(path + " holds no graphs");
  return graphs.front();
}

int cmd_wl(const std::string& a, const std::string& b, std::size_t iters, const Globals& g) {
  const auto r = wl::wl_test(first_graph(a), first_graph(b), iters);
  json j;
  j["verdict"] = wl::to_string(r.verdict);
  j["iteration"] = r.iteration;
  j["rounds"] = r.rounds;
  Sink(g).write("wl.json", j.dump() + "\n");
  return 0;
}

int cmd_wl_classify(const DataArgs& data, const std::string& iters, std::size_t folds, const Globals& g) {
  const Dataset d = data.load();
  json runs = json::array();
  std::ostringstream csv;
  csv << "dataset,iterations,lambda,mean,std,train_acc\n";
  for (std::size_t K : parse_counts(iters)) {
    const auto r = wl::wl_classify(d, K, folds, g.seed);
    for (const auto& l : r.per_lambda) {
      csv << d.name() << ',' << K << ',' << fmt(l.lambda) << ',' << fmt(l.validation.mean) << ','
          << fmt(l.validation.std) << ',' << fmt(l.train_accuracy) << '\n';
    }
    runs.push_back({{"iterations", K},
                    {"best_lambda", r.best.lambda},
                    {"mean", r.best.validation.mean},
                    {"std", r.best.validation.std},
                    {"train_acc", r.best.train_accuracy}});
  }
  const json config = {{"dataset", d.name()}, {"folds", folds}, {"seed", g.seed}, {"lambdas", wl::kDefaultLambdas}};
  Sink sink(g);
  if (g.out.empty()) {
    std::cout << json{{"config", config}, {"runs", runs}}.dump() << "\n";
  } else {
    sink.write_csv("wl_classify.csv", csv.str(), config);
    sink.write("wl_classify.json", json{{"config", config}, {"runs", runs}}.dump(2) + "\n");
  }
  return 0;
}

int cmd_train(const DataArgs& data, const std::string& preset_spec, const TrainArgs& args, const Globals& g) {
  const GnnConfig config = resolve_config(preset_spec);
  const TrainSpec spec = args.spec(config, g);
  const Dataset d = data.load();
  const RunRecord r = train_model(spec, d);
  std::ostringstream results, summary;
  RunRecord::write_results_header(results);
  r.write_results(results);
  summary << "dataset,config,mean,std,selected_epoch,train_acc\n"
          << d.name() << ',' << r.config << ',' << fmt(r.validation.mean) << ',' << fmt(r.validation.std) << ','
          << r.selected_epoch << ',' << fmt(r.train_accuracy) << '\n';
  const json cfg = {{"dataset", d.name()}, {"specs", specs_json({spec}, d)}};
  Sink sink(g);
  if (!g.out.empty()) sink.write_csv("results.csv", results.str(), cfg);
  sink.write_csv("summary.csv", summary.str(), cfg);
  return 0;
}

int cmd_table(const DataArgs& data, const std::string& presets, const TrainArgs& args, const std::string& wl_iters,
              const Globals& g) {
  std::vector<TrainSpec> specs;
  for (const auto& c : resolve_presets(presets)) specs.push_back(args.spec(c, g));
  const Dataset d = data.load();
  WlBaselineOptions wl;
  wl.iterations = parse_counts(wl_iters);
  const Table t = run_table(d, specs, wl);
  std::ostringstream summary, results;
  t.write_summary(summary);
  t.write_results(results);
  const json cfg = {{"dataset", d.name()}, {"specs", specs_json(specs, d)}, {"wl_iterations", wl.iterations}};
  Sink sink(g);
  if (!g.out.empty()) sink.write_csv("results.csv", results.str(), cfg);
  sink.write_csv("summary.csv", summary.str(), cfg);
  return 0;
}

int cmd_curves(const DataArgs& data, const std::string& presets, const TrainArgs& args, const std::string& wl_iters,
               const Globals& g) {
  std::vector<TrainSpec> specs;
  for (const auto& c : resolve_presets(presets)) specs.push_back(args.spec(c, g));
  const Dataset d = data.load();
  const CurveSet c = run_curves(d, specs, parse_counts(wl_iters), 1e-3, g.threads);
  std::ostringstream csv;
  c.write_csv(csv);
  const json cfg = {{"dataset", d.name()}, {"specs", specs_json(specs, d)}, {"wl_lambda", 1e-3}};
  Sink(g).write_csv("curves.csv", csv.str(), cfg);
  return 0;
}

int cmd_atlas(std::size_t max_nodes, std::size_t random_pairs, std::size_t random_max_nodes,
              const std::string& presets, std::size_t seeds, bool ideal, bool named, const Globals& g) {
  AtlasInput in = exhaustive_atlas_pairs(max_nodes);
  if (random_pairs) add_random_atlas_pairs(in, random_pairs, random_max_nodes, g.seed);
  if (named) add_counterexample_atlas_pairs(in);
  std::vector<AtlasConfig> configs;
  for (const auto& c : resolve_presets(presets)) configs.push_back(AtlasConfig::of(c));
  if (ideal) configs.push_back(AtlasConfig::ideal());
  std::vector<std::uint64_t> seed_list;
  for (std::size_t s = 0; s < seeds; ++s) seed_list.push_back(g.seed + s);
  AtlasOptions options;
  options.threads = g.threads;
  const AtlasReport report = distinguishability_atlas(in, configs, seed_list, options);

  json cfg;
  cfg["max_nodes"] = max_nodes;
  cfg["random_pairs"] = random_pairs;
  cfg["random_max_nodes"] = random_max_nodes;
  cfg["seeds"] = seed_list;
  cfg["configs"] = json::array();
  for (const auto& c : configs) cfg["configs"].push_back(c.is_ideal() ? json("ideal_gin") : c.gnn->to_json());
  json summary = {{"config", cfg},
                  {"pairs", in.pairs.size()},
                  {"rows", report.rows.size()},
                  {"violations", report.violations.size()},
                  {"per_config", report.summary()}};
  Sink sink(g);
  std::ostringstream csv;
  report.write_csv(csv);
  if (g.out.empty()) {
    std::cout << summary.dump() << "\n";
  } else {
    sink.write_csv("atlas.csv", csv.str(), cfg);
    sink.write("atlas_summary.json", summary.dump(2) + "\n");
  }
  if (!report.ok()) {
    json failure = {{"failed", "atlas containment"}, {"violations", report.violations.size()}};
    failure["first"] = json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(20, report.violations.size()); ++i) {
      failure["first"].push_back(report.violations[i]);
    }
    std::cerr << failure.dump() << "\n";
    return kInvariantFailed;
  }
  return 0;
}

int cmd_lemmas(const std::string& suite, const Globals& g) {
  const auto results = run_lemma_suites(suite, g.seed);
  json j = json::array();
  json failed = json::array();
  for (const auto& r : results) {
    j.push_back({{"suite", r.suite}, {"passed", r.passed}, {"details", r.details}});
    if (!r.passed) failed.push_back(r.suite);
  }
  Sink(g).write("lemmas.json", j.dump(2) + "\n");
  if (!failed.empty()) {
    std::cerr << json{{"failed", failed}}.dump() << "\n";
    return kInvariantFailed;
  }
  return 0;
}

int cmd_synth(const std::string& kind, std::size_t count, const std::string& features, const Globals& g) {
  Dataset d = [&] {
    if (kind == "cycles-stars") return cycles_vs_stars(count);
    if (kind == "surrogate") return structural_surrogate(count, g.seed);
    // counterexample graphs, one class per side
    std::vector<Graph> graphs;
    for (const auto& p : counterexample_pairs()) {
      graphs.push_back(p.first.with_label(0));
      graphs.push_back(p.second.with_label(1));
    }
    return Dataset(std::move(graphs), 2, "counterexamples");
  }();
  if (features == "degree") d = degree_onehot_features(d);
  else if (features == "uniform") d = uniform_features(d);
  Sink(g).write(d.name() + ".json", dataset_to_json(d).dump() + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ginlab: graph isomorphism networks, WL baselines and expressiveness checks"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Globals g;
  app.add_option("--seed", g.seed, "random seed (GINLAB_SEED overrides)")->capture_default_str();
  app.add_option("--out", g.out, "output directory (default: stdout)");
  app.add_option("--threads", g.threads, "worker threads")->capture_default_str();

  DataArgs data;
  TrainArgs train_args;
  int status = 0;
  std::function<int()> run;

  auto* stats = app.add_subcommand("dataset-stats", "graph count, class count and average size");
  data.add(stats);
  stats->callback([&] { run = [&] { return cmd_dataset_stats(data, g); }; });

  std::string graph_a, graph_b;
  std::size_t wl_iters = 10;
  auto* wl_cmd = app.add_subcommand("wl", "WL test on the first graph of two JSON files");
  wl_cmd->add_option("--a", graph_a, "first graph file")->required();
  wl_cmd->add_option("--b", graph_b, "second graph file")->required();
  wl_cmd->add_option("--iters", wl_iters, "maximum refinement rounds")->capture_default_str();
  wl_cmd->callback([&] { run = [&] { return cmd_wl(graph_a, graph_b, wl_iters, g); }; });

  DataArgs wl_data;
  std::string classify_iters = "1-6";
  std::size_t classify_folds = 10;
  auto* classify = app.add_subcommand("wl-classify", "cross-validated WL subtree feature classifier");
  wl_data.add(classify);
  classify->add_option("--iters", classify_iters, "iteration counts, e.g. 3 or 1-6")->capture_default_str();
  classify->add_option("--folds", classify_folds, "folds")->capture_default_str();
  classify->callback([&] { run = [&] { return cmd_wl_classify(wl_data, classify_iters, classify_folds, g); }; });

  DataArgs train_data;
  std::string preset_spec = "gin-0";
  auto* train = app.add_subcommand("train", "cross-validated training of one configuration");
  train_data.add(train);
  train->add_option("--preset", preset_spec, "preset name or JSON config")->capture_default_str();
  train_args.add(train);
  train->callback([&] { run = [&] { return cmd_train(train_data, preset_spec, train_args, g); }; });

  DataArgs table_data, curves_data;
  TrainArgs table_args, curves_args;
  std::string table_presets = "all", curves_presets = "all", table_wl = "1-6", curves_wl = "1-6";
  auto* table = app.add_subcommand("table", "cross-validated accuracy for several presets plus WL");
  table_data.add(table);
  table->add_option("--presets", table_presets, "comma-separated presets or 'all'")->capture_default_str();
  table->add_option("--wl-iters", table_wl, "WL iteration counts to sweep")->capture_default_str();
  table_args.add(table);
  table->callback([&] { run = [&] { return cmd_table(table_data, table_presets, table_args, table_wl, g); }; });

  auto* curves = app.add_subcommand("curves", "training accuracy per epoch on fold 0's training split");
  curves_data.add(curves);
  curves->add_option("--presets", curves_presets, "comma-separated presets or 'all'")->capture_default_str();
  curves->add_option("--wl-iters", curves_wl, "WL iteration counts")->capture_default_str();
  curves_args.add(curves);
  curves->callback([&] { run = [&] { return cmd_curves(curves_data, curves_presets, curves_args, curves_wl, g); }; });

  std::size_t atlas_nodes = 6, atlas_random = 500, atlas_random_nodes = 8, atlas_seeds = 5;
  std::string atlas_presets = "all";
  bool atlas_no_ideal = false, atlas_named = false;
  auto* atlas = app.add_subcommand("atlas", "pairwise GNN / WL / isomorphism verdicts");
  atlas->add_option("--max-nodes", atlas_nodes, "exhaustive connected graphs up to this size")->capture_default_str();
  atlas->add_option("--random-pairs", atlas_random, "extra random same-size pairs")->capture_default_str();
  atlas->add_option("--random-max-nodes", atlas_random_nodes, "largest random pair")->capture_default_str();
  atlas->add_option("--presets", atlas_presets, "comma-separated presets or 'all'")->capture_default_str();
  atlas->add_option("--seeds", atlas_seeds, "initializations per preset")->capture_default_str();
  atlas->add_flag("--no-ideal", atlas_no_ideal, "skip the exact GIN column");
  atlas->add_flag("--named", atlas_named, "also include the named counterexample pairs");
  atlas->callback([&] {
    run = [&] {
      return cmd_atlas(atlas_nodes, atlas_random, atlas_random_nodes, atlas_presets, atlas_seeds, !atlas_no_ideal,
                       atlas_named, g);
    };
  });

  std::string suite = "all";
  auto* lemmas = app.add_subcommand("lemmas", "exact multiset encoding and aggregator checks");
  lemmas->add_option("--suite", suite, "all, sum, gin, onelayer, mean, max or ranking")->capture_default_str();
  lemmas->callback([&] { run = [&] { return cmd_lemmas(suite, g); }; });

  std::string synth_kind = "cycles-stars", synth_features = "given";
  std::size_t synth_count = 50;
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset as JSON");
  synth->add_option("--kind", synth_kind, "cycles-stars, surrogate or counterexamples")
      ->check(CLI::IsMember({"cycles-stars", "surrogate", "counterexamples"}));
  synth->add_option("--count", synth_count, "graphs per class (cycles-stars) or in total (surrogate)")
      ->capture_default_str();
  synth->add_option("--features", synth_features, "given, degree or uniform")
      ->check(CLI::IsMember({"given", "degree", "uniform"}));
  synth->callback([&] { run = [&] { return cmd_synth(synth_kind, synth_count, synth_features, g); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }
  if (const char* env = std::getenv("GINLAB_SEED")) {
    try {
      g.seed = std::stoull(env);
    } catch (const std::logic_error&) {
      std::cerr << "GINLAB_SEED must be a non-negative integer, got '" << env << "'\n";
      return kUsageError;
    }
  }
  try {
    status = run();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return status;
}
