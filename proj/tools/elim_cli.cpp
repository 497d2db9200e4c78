/*
 * Copyright 2026 The Elim Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end. Errors are one-line JSON on stderr; exit codes
// are 0 ok, 1 computation error, 2 usage error.

#include <openssl/evp.h>
#include <pthread.h>
#include <signal.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

#include "elim/service.hpp"

#include <CLI11.hpp>

namespace fs = std::filesystem;
using elim::Json;

namespace {

constexpr std::string_view kToolVersion = "1.0.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json read_json(const std::string& path) {
  Json j = Json::parse(read_file(path), nullptr, false);
  elim::require(!j.is_discarded(), elim::ErrorCode::kCorruptFile, "'" + path + "' is not valid JSON");
  return j;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Records what produced an artifact. Everything but the timestamps is a
// pure function of the inputs and flags.
struct Manifest {
  std::string command;
  Json config = Json::object();
  std::vector<std::string> inputs;
  std::optional<std::uint64_t> seed;
  std::string started = utc_now();

  void write(const std::string& path) const {
    Json in = Json::object();
    for (const auto& p : inputs) in[p] = sha256_hex(read_file(p));
    Json j = {{"command", command},
              {"config", config},
              {"config_digest", sha256_hex(config.dump())},
              {"input_digests", in},
              {"seed", seed ? Json(*seed) : Json(nullptr)},
              {"tool_version", kToolVersion},
              {"started", started},
              {"finished", utc_now()}};
    elim::write_text_file(path, j.dump(1) + "\n");
  }
};

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& cell : elim::detail::split_csv_line(text)) {
    double v = 0;
    if (!elim::detail::parse_double(cell, v)) throw UsageError("malformed " + what + " value '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

// Categorical features accept either the category name or its code.
std::vector<double> parse_features(const std::string& text, const elim::Classifier& m) {
  const auto cells = elim::detail::split_csv_line(text);
  if (cells.size() != m.num_features()) {
    throw UsageError("expected " + std::to_string(m.num_features()) + " feature values, got " +
                     std::to_string(cells.size()));
  }
  std::vector<double> x;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    double v = 0;
    if (elim::detail::parse_double(cells[i], v)) {
      x.push_back(v);
      continue;
    }
    const auto& cats = m.info().features[i].categories;
    auto it = std::find(cats.begin(), cats.end(), cells[i]);
    if (it == cats.end()) throw UsageError("malformed feature value '" + cells[i] + "'");
    x.push_back(static_cast<double>(it - cats.begin()));
  }
  return x;
}

elim::EliminationPolicy parse_policy(const std::string& text) {
  elim::EliminationPolicy p;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("policy entries look like key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    double v = 0;
    if (!elim::detail::parse_double(item.substr(eq + 1), v)) throw UsageError("malformed policy value in '" + item + "'");
    if (key == "accept") {
      p.accept_threshold = v;
    } else if (key == "retain") {
      p.retain_threshold = v;
    } else if (key == "max") {
      p.max_retained = static_cast<std::size_t>(v);
    } else {
      throw UsageError("unknown policy key '" + key + "'");
    }
  }
  p.validate();
  return p;
}

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

void write_json(const std::string& path, const Json& j) { elim::write_text_file(path, j.dump(1) + "\n"); }

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string csv, label = "class", categorical, name, out;
};

void cmd_ingest(const IngestArgs& a) {
  std::set<std::string> cats;
  for (const auto& c : elim::detail::split_csv_line(a.categorical))
    if (!c.empty()) cats.insert(c);
  std::ifstream in(a.csv);
  if (!in) throw UsageError("cannot open '" + a.csv + "'");
  const auto d = elim::ingest_csv(in, a.label, cats, a.name.empty() ? fs::path(a.csv).stem().string() : a.name);
  elim::save_dataset(d, a.out);
  Manifest m{"ingest", {{"label", a.label}, {"categorical", a.categorical}, {"name", a.name}}, {a.csv}, {}};
  m.write(manifest_path(a.out));
  std::cout << a.out << "\n";
}

struct GenerateArgs {
  std::string mixture, out;
  std::size_t n = 500;
  std::uint64_t seed = 0;
};

void cmd_generate(const GenerateArgs& a) {
  auto spec = elim::mixture_spec_from_json(read_json(a.mixture));
  spec.seed = a.seed;
  const auto d = elim::sample_mixture(elim::GaussianMixture(spec), a.n);
  elim::save_dataset(d, a.out);
  Manifest m{"generate", {{"n", a.n}}, {a.mixture}, a.seed};
  m.write(manifest_path(a.out));
  std::cout << a.out << "\n";
}

struct SplitArgs {
  std::string data, train_out, test_out;
  double test_fraction = 0.3;
  std::uint64_t seed = 0;
};

void cmd_split(const SplitArgs& a) {
  const auto [train, test] = elim::split(elim::load_dataset(a.data), a.test_fraction, a.seed);
  elim::save_dataset(train, a.train_out);
  elim::save_dataset(test, a.test_out);
  Manifest m{"split", {{"test_fraction", a.test_fraction}}, {a.data}, a.seed};
  m.write(manifest_path(a.train_out));
  std::cout << a.train_out << "\n" << a.test_out << "\n";
}

struct TrainArgs {
  std::string data, kind = "mlp", config, groups, rules, out, log;
  std::size_t hidden = 8, members = 5, epochs = 0;
  double rho = -1, learning_rate = 0;
  std::uint64_t seed = 0;
  bool tune = false;
};

void cmd_train(const TrainArgs& a) {
  const auto d = elim::load_dataset(a.data);
  Json cfg = a.config.empty() ? Json::object() : read_json(a.config);
  std::vector<std::string> inputs = {a.data};
  if (!a.config.empty()) inputs.push_back(a.config);
  cfg["seed"] = a.seed;
  cfg["hidden"] = a.hidden;
  cfg["members"] = a.members;
  if (a.epochs > 0) cfg["epochs"] = a.epochs;
  if (a.learning_rate > 0) cfg["learning_rate"] = a.learning_rate;
  if (!a.groups.empty()) cfg["groups"] = a.groups;
  if (!a.rules.empty()) {
    cfg["rules"] = read_json(a.rules);
    inputs.push_back(a.rules);
  }
  if (a.rho >= 0) cfg["rho"] = a.rho;
  if (a.tune) cfg["tune"] = true;
  const auto built = elim::build_model(d, a.kind, cfg);
  elim::save_model(*built.model, a.out);
  const std::string log = a.log.empty() ? a.out + ".log.json" : a.log;
  write_json(log, built.log);
  cfg["kind"] = a.kind;
  Manifest m{"train", cfg, inputs, a.seed};
  m.write(manifest_path(a.out));
  std::cout << a.out << "\n" << log << "\n";
}

struct EvaluateArgs {
  std::string model, data, out_dir, thresholds = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,0.95";
  bool delta_method = false;
  double high_confidence = 0.9;
};

void cmd_evaluate(const EvaluateArgs& a) {
  const auto model = elim::load_model(a.model);
  const auto d = elim::load_dataset(a.data);
  elim::check_compatible(*model, d);
  const auto thresholds = elim::parse_thresholds(a.thresholds);
  const auto cm = elim::confusion(*model, d);
  const auto form = a.delta_method ? elim::TauVarianceForm::kDeltaMethod : elim::TauVarianceForm::kAsPrinted;
  const auto report = elim::metric_report(cm, form);
  Json r = report.to_json();
  // Against a base-rate predictor (tau = 0, no variance).
  r["z_vs_chance"] = report.var_tau > 0 ? elim::z_score(report.tau, report.var_tau, 0, 0).to_json() : Json(nullptr);
  Json relaxed = Json::array();
  for (std::size_t k = 1; k <= model->num_classes(); ++k) relaxed.push_back(elim::relaxed_accuracy(*model, d, k));
  r["relaxed_accuracy"] = relaxed;
  const auto hce = elim::high_confidence_errors(*model, d, a.high_confidence);
  r["high_confidence_errors"] = {{"threshold", a.high_confidence}, {"count", hce.count}, {"fraction", hce.fraction}};
  r["confused_pairs"] = elim::to_json(elim::confused_pairs(cm), cm.names());
  r["variance_form"] = a.delta_method ? "delta_method" : "as_printed";

  fs::create_directories(a.out_dir);
  const auto report_path = (fs::path(a.out_dir) / "report.json").string();
  const auto cm_path = (fs::path(a.out_dir) / "confusion.csv").string();
  const auto curve_path = (fs::path(a.out_dir) / "rejection.csv").string();
  write_json(report_path, r);
  std::ostringstream cm_csv, curve_csv;
  elim::write_confusion_csv(cm, cm_csv);
  elim::write_rejection_csv(elim::rejection_curve(*model, d, thresholds), curve_csv);
  elim::write_text_file(cm_path, cm_csv.str());
  elim::write_text_file(curve_path, curve_csv.str());
  Manifest m{"evaluate", {{"thresholds", thresholds}, {"variance_form", r["variance_form"]}}, {a.model, a.data}, {}};
  m.write((fs::path(a.out_dir) / "manifest.json").string());
  std::cout << report_path << "\n" << cm_path << "\n" << curve_path << "\n";
}

struct CompareArgs {
  std::string model_a, model_b, data;
};

void cmd_compare(const CompareArgs& a) {
  const auto ma = elim::load_model(a.model_a);
  const auto mb = elim::load_model(a.model_b);
  const auto d = elim::load_dataset(a.data);
  elim::check_compatible(*ma, d);
  elim::check_compatible(*mb, d);
  std::cout << elim::Service::compare_models(*ma, *mb, d).dump(1) << "\n";
}

struct CaseArgs {
  std::string model, features, policy = "accept=0.9,retain=0.2", rho_grid, sweep_out, sensitivity_out, s_grid;
  double rho = 0;
  std::size_t n_samples = 5000, sensitivity = 0;
  std::uint64_t seed = 0;
  bool intervals = false;
};

void cmd_case(const CaseArgs& a) {
  const auto model = elim::load_model(a.model);
  const auto x = parse_features(a.features, *model);
  const auto policy = parse_policy(a.policy);
  const elim::McConfig mc{a.n_samples, a.seed};
  const auto e = elim::mc_probabilities(*model, x, elim::UncertaintyProfile::global(a.rho), mc);
  Json out = {{"probs", e.probs.vector()},
              {"standard_error", e.standard_error},
              {"class_names", model->class_names()},
              {"verdict", elim::eliminate(e.probs, policy).to_json(model->class_names())}};
  if (!a.rho_grid.empty()) {
    if (a.sweep_out.empty()) throw UsageError("--rho-grid needs --sweep-out");
    const auto grid = parse_list(a.rho_grid, "rho grid");
    std::ostringstream csv;
    elim::write_sweep_csv(elim::rho_sweep(*model, x, grid, mc), model->class_names(), "rho", csv);
    elim::write_text_file(a.sweep_out, csv.str());
    out["sweep"] = a.sweep_out;
  }
  if (a.sensitivity > 0) {
    if (a.sensitivity_out.empty() || a.s_grid.empty()) throw UsageError("--sensitivity needs --s-grid and --sensitivity-out");
    if (a.sensitivity > model->num_features()) throw UsageError("--sensitivity is a one-based feature index");
    const auto grid = parse_list(a.s_grid, "s grid");
    std::ostringstream csv;
    elim::write_sweep_csv(elim::sensitivity_sweep(*model, x, a.rho, a.sensitivity - 1, grid, mc), model->class_names(), "s",
                    csv);
    elim::write_text_file(a.sensitivity_out, csv.str());
    out["sensitivity"] = a.sensitivity_out;
  }
  if (a.intervals) {
    Json rows = Json::array();
    for (std::size_t f = 0; f < model->num_features(); ++f)
      if (model->info().features[f].continuous()) rows.push_back(elim::confidence_interval(*model, x, f).to_json());
    out["intervals"] = rows;
  }
  std::cout << out.dump(1) << "\n";
}

struct MetricsArgs {
  std::string confusion;
  bool delta_method = false;
};

void cmd_metrics(const MetricsArgs& a) {
  std::ifstream in(a.confusion);
  if (!in) throw UsageError("cannot open '" + a.confusion + "'");
  const auto cm = elim::read_confusion_csv(in);
  const auto form = a.delta_method ? elim::TauVarianceForm::kDeltaMethod : elim::TauVarianceForm::kAsPrinted;
  Json r = elim::metric_report(cm, form).to_json();
  r["confused_pairs"] = elim::to_json(elim::confused_pairs(cm), cm.names());
  std::cout << r.dump(1) << "\n";
}

struct TwoStageArgs {
  std::string stage1, train, test;
  std::vector<std::string> groups;
  double reliability = 0.9;
  std::size_t hidden = 8, epochs = 200;
  std::uint64_t seed = 0;
};

void cmd_two_stage(const TwoStageArgs& a) {
  const auto stage1 = elim::load_model(a.stage1);
  const auto train = elim::load_dataset(a.train);
  const auto test = elim::load_dataset(a.test);
  elim::check_compatible(*stage1, test);
  std::vector<elim::ClassGrouping> groupings;
  for (const auto& g : a.groups) groupings.push_back(elim::ClassGrouping::parse(g, train.class_names));
  elim::TwoStageConfig cfg;
  cfg.reliability_threshold = a.reliability;
  cfg.hidden = a.hidden;
  cfg.train.epochs = a.epochs;
  cfg.train.seed = a.seed;
  const auto pipe = elim::build_two_stage(stage1, groupings, train, cfg);
  std::size_t single = 0;
  for (const auto& x : test.cases) single += elim::two_stage_classify(pipe, x).retained.size() == 1;
  Json out = {{"top1_accuracy", elim::relaxed_accuracy(*stage1, test, 1)},
              {"top2_accuracy", elim::relaxed_accuracy(*stage1, test, 2)},
              {"pipeline_retained_accuracy", elim::pipeline_retained_accuracy(pipe, test)},
              {"confident_fraction", static_cast<double>(single) / static_cast<double>(test.size())}};
  std::cout << out.dump(1) << "\n";
}

struct ServeArgs {
  std::string host = "127.0.0.1", store;
  int port = 8080;
};

int cmd_serve(const ServeArgs& a) {
  // Block the stop signals everywhere; a dedicated thread waits for them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  elim::Service svc(a.store.empty() ? std::nullopt : std::optional<fs::path>(a.store));
  const int port = svc.bind(a.host, a.port);
  std::cout << "listening on http://" << a.host << ":" << port << std::endl;
  std::thread waiter([&svc, set] {
    int sig = 0;
    sigwait(&set, &sig);
    svc.stop();
  });
  svc.listen_after_bind();
  // listen returns after stop(); wake the waiter if we got here another way.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

void print_error(std::string_view code, const std::string& message, const Json& detail = Json::object()) {
  std::cerr << Json{{"code", code}, {"message", message}, {"detail", detail}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertainty-aware classification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Convert a CSV file into a dataset document");
  c_ingest->add_option("--csv", ingest.csv, "Input CSV")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--label", ingest.label, "Label column")->capture_default_str();
  c_ingest->add_option("--categorical", ingest.categorical, "Comma-separated categorical columns");
  c_ingest->add_option("--name", ingest.name, "Dataset name");
  c_ingest->add_option("--out", ingest.out, "Output dataset JSON")->required();

  GenerateArgs gen;
  auto* c_gen = app.add_subcommand("generate", "Sample a dataset from a Gaussian mixture spec");
  c_gen->add_option("--mixture", gen.mixture, "Mixture spec JSON")->required()->check(CLI::ExistingFile);
  c_gen->add_option("--n", gen.n, "Number of cases")->capture_default_str();
  c_gen->add_option("--seed", gen.seed, "Random seed")->required();
  c_gen->add_option("--out", gen.out, "Output dataset JSON")->required();

  SplitArgs sp;
  auto* c_split = app.add_subcommand("split", "Seeded train/test split");
  c_split->add_option("--data", sp.data, "Dataset JSON")->required()->check(CLI::ExistingFile);
  c_split->add_option("--test-fraction", sp.test_fraction, "Test fraction")->capture_default_str();
  c_split->add_option("--seed", sp.seed, "Random seed")->required();
  c_split->add_option("--train-out", sp.train_out, "Training part")->required();
  c_split->add_option("--test-out", sp.test_out, "Test part")->required();

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train a model");
  c_train->add_option("--data", tr.data, "Training dataset JSON")->required()->check(CLI::ExistingFile);
  c_train->add_option("--kind", tr.kind, "mlp, joint, committee, lda, knn, rules, soft_rules or bayes")
      ->capture_default_str()
      ->check(CLI::IsMember(elim::model_kinds()));
  c_train->add_option("--config", tr.config, "Config JSON")->check(CLI::ExistingFile);
  c_train->add_option("--hidden", tr.hidden, "Hidden units")->capture_default_str();
  c_train->add_option("--members", tr.members, "Committee size")->capture_default_str();
  c_train->add_option("--epochs", tr.epochs, "Training epochs");
  c_train->add_option("--learning-rate", tr.learning_rate, "Learning rate");
  c_train->add_option("--groups", tr.groups, "Class grouping, one-based, e.g. \"1,2|3|4\"");
  c_train->add_option("--rules", tr.rules, "Rule set JSON")->check(CLI::ExistingFile);
  c_train->add_option("--rho", tr.rho, "Fuzziness factor for soft rules");
  c_train->add_flag("--tune", tr.tune, "Tune soft rule intervals and rho");
  c_train->add_option("--seed", tr.seed, "Random seed")->required();
  c_train->add_option("--out", tr.out, "Output model JSON")->required();
  c_train->add_option("--log", tr.log, "Training log JSON (default <out>.log.json)");

  TrainArgs tune;
  tune.kind = "soft_rules";
  tune.tune = true;
  auto* c_tune = app.add_subcommand("tune-rules", "Tune interval rules and rho against data");
  c_tune->add_option("--data", tune.data, "Training dataset JSON")->required()->check(CLI::ExistingFile);
  c_tune->add_option("--rules", tune.rules, "Rule set JSON")->required()->check(CLI::ExistingFile);
  c_tune->add_option("--rho", tune.rho, "Initial fuzziness factor")->required();
  c_tune->add_option("--epochs", tune.epochs, "Descent steps");
  c_tune->add_option("--learning-rate", tune.learning_rate, "Step size");
  c_tune->add_option("--seed", tune.seed, "Random seed")->required();
  c_tune->add_option("--out", tune.out, "Output model JSON")->required();
  c_tune->add_option("--log", tune.log, "Tuning log JSON");

  EvaluateArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "Metrics, confusion CSV and rejection curve");
  c_eval->add_option("--model", ev.model, "Model JSON")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--data", ev.data, "Dataset JSON")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--thresholds", ev.thresholds, "Increasing rejection thresholds")->capture_default_str();
  c_eval->add_option("--high-confidence", ev.high_confidence, "High-confidence error threshold")->capture_default_str();
  c_eval->add_flag("--delta-method", ev.delta_method, "Use var(p0)/(1-p_r)^2 for var(tau)");
  c_eval->add_option("--out-dir", ev.out_dir, "Output directory")->required();

  CompareArgs cmp;
  auto* c_cmp = app.add_subcommand("compare", "Z-score comparison of two models on one dataset");
  c_cmp->add_option("model_a", cmp.model_a, "First model")->required()->check(CLI::ExistingFile);
  c_cmp->add_option("model_b", cmp.model_b, "Second model")->required()->check(CLI::ExistingFile);
  c_cmp->add_option("--data", cmp.data, "Dataset JSON")->required()->check(CLI::ExistingFile);

  CaseArgs cs;
  auto* c_case = app.add_subcommand("case", "Probabilities, verdict and sweeps for one case");
  c_case->add_option("--model", cs.model, "Model JSON")->required()->check(CLI::ExistingFile);
  c_case->add_option("--features", cs.features, "Comma-separated feature values")->required();
  c_case->add_option("--rho", cs.rho, "Fuzziness factor")->capture_default_str();
  c_case->add_option("--n-samples", cs.n_samples, "Monte-Carlo samples")->capture_default_str();
  c_case->add_option("--seed", cs.seed, "Random seed")->required();
  c_case->add_option("--policy", cs.policy, "accept=..,retain=..,max=..")->capture_default_str();
  c_case->add_option("--rho-grid", cs.rho_grid, "Rho values for a sweep");
  c_case->add_option("--sweep-out", cs.sweep_out, "Sweep CSV");
  c_case->add_option("--sensitivity", cs.sensitivity, "One-based feature index to sweep");
  c_case->add_option("--s-grid", cs.s_grid, "Dispersion values for the sensitivity sweep");
  c_case->add_option("--sensitivity-out", cs.sensitivity_out, "Sensitivity CSV");
  c_case->add_flag("--intervals", cs.intervals, "Per-feature confidence intervals");

  MetricsArgs mt;
  auto* c_metrics = app.add_subcommand("metrics", "Statistics of a confusion matrix CSV");
  c_metrics->add_option("--confusion", mt.confusion, "Confusion CSV")->required()->check(CLI::ExistingFile);
  c_metrics->add_flag("--delta-method", mt.delta_method, "Use var(p0)/(1-p_r)^2 for var(tau)");

  TwoStageArgs ts;
  auto* c_ts = app.add_subcommand("two-stage", "Train joint-class models and score the two-stage pipeline");
  c_ts->add_option("--stage1", ts.stage1, "First-stage model")->required()->check(CLI::ExistingFile);
  c_ts->add_option("--train", ts.train, "Training dataset")->required()->check(CLI::ExistingFile);
  c_ts->add_option("--test", ts.test, "Test dataset")->required()->check(CLI::ExistingFile);
  c_ts->add_option("--groups", ts.groups, "Grouping, repeatable, e.g. \"1,2|3|4\"")->required();
  c_ts->add_option("--reliability", ts.reliability, "Stage-1 acceptance threshold")->capture_default_str();
  c_ts->add_option("--hidden", ts.hidden, "Hidden units")->capture_default_str();
  c_ts->add_option("--epochs", ts.epochs, "Training epochs")->capture_default_str();
  c_ts->add_option("--seed", ts.seed, "Random seed")->required();

  ServeArgs sv;
  auto* c_serve = app.add_subcommand("serve", "Run the HTTP service");
  c_serve->add_option("--host", sv.host, "Bind address")->capture_default_str();
  c_serve->add_option("--port", sv.port, "Port, 0 for any free port")->capture_default_str();
  c_serve->add_option("--store", sv.store, "Directory for uploaded resources");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage_error", e.what());
    return 2;
  }

  try {
    if (*c_ingest) cmd_ingest(ingest);
    if (*c_gen) cmd_generate(gen);
    if (*c_split) cmd_split(sp);
    if (*c_train) cmd_train(tr);
    if (*c_tune) cmd_train(tune);
    if (*c_eval) cmd_evaluate(ev);
    if (*c_cmp) cmd_compare(cmp);
    if (*c_case) cmd_case(cs);
    if (*c_metrics) cmd_metrics(mt);
    if (*c_ts) cmd_two_stage(ts);
    if (*c_serve) return cmd_serve(sv);
  } catch (const UsageError& e) {
    print_error("usage_error", e.what());
    return 2;
  } catch (const elim::Error& e) {
    print_error(e.code_name(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal_error", e.what());
    return 1;
  }
  return 0;
}
