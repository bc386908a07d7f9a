// comfortctl: simulate, preprocess, train, evaluate and serve from the
// command line. Run `comfortctl --help` or `comfortctl <command> --help`.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "comfort/comfort.hpp"
#include "comfort/server.hpp"

namespace fs = std::filesystem;
using namespace comfort;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitUnexpected = 1;

/// Each error code gets its own exit status, starting at 10.
int exit_code(Errc c) { return 10 + static_cast<int>(c); }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

/// Files are read as given; directories contribute their *.csv in name order.
std::vector<RecordSet> load_sets(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p))
        if (e.path().extension() == ".csv") found.push_back(e.path());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(p)) {
      files.push_back(p);
    } else {
      throw Error(Errc::Io, "no such file or directory: " + in);
    }
  }
  if (files.empty()) throw Error(Errc::EmptyDataset, "no CSV files found");
  std::vector<RecordSet> sets;
  for (const auto& f : files) sets.push_back(read_csv(f));
  return sets;
}

json report_json(const MetricReport& r) {
  json cm = json::array();
  for (const auto& row : r.confusion7) cm.push_back(row);
  return {{"kappa7", r.kappa7}, {"kappa3", r.kappa3}, {"kappa2", r.kappa2}, {"n", r.n}, {"confusion7", cm}};
}

json cv_json(const CvReport& cv) {
  json folds = json::array();
  for (const auto& f : cv.folds)
    folds.push_back({{"eval_participants", f.eval_participants}, {"report", report_json(f.report)}, {"skipped", f.skipped}});
  return {{"folds", folds},
          {"mean", {{"kappa7", cv.mean[0]}, {"kappa3", cv.mean[1]}, {"kappa2", cv.mean[2]}}},
          {"std", {{"kappa7", cv.std[0]}, {"kappa3", cv.std[1]}, {"kappa2", cv.std[2]}}},
          {"pooled", report_json(cv.pooled)}};
}

void print_report(const std::string& title, const MetricReport& r) {
  std::printf("%-24s  k7 %6.2f%%  k3 %6.2f%%  k2 %6.2f%%  (n=%zu)\n", title.c_str(), 100 * r.kappa7, 100 * r.kappa3,
              100 * r.kappa2, r.n);
}

void maybe_write(const std::optional<std::string>& path, const json& j) {
  if (path) write_json_file(*path, j);
}

/// "10s", "5m", "10m" or a plain sample count; times are converted at the
/// downsampled rate of the data.
std::size_t parse_gap(const std::string& text, double rate_hz) {
  if (text.empty()) return 0;
  const char unit = text.back();
  if (unit == 's' || unit == 'm') {
    double amount = 0;
    try {
      amount = std::stod(text.substr(0, text.size() - 1));
    } catch (const std::exception&) {
      throw Error(Errc::InvalidConfig, "bad forecast gap '" + text + "'");
    }
    const double seconds = unit == 's' ? amount : amount * 60.0;
    return static_cast<std::size_t>(std::llround(seconds * rate_hz));
  }
  try {
    return static_cast<std::size_t>(std::stoull(text));
  } catch (const std::exception&) {
    throw Error(Errc::InvalidConfig, "bad forecast gap '" + text + "'");
  }
}

/// Flags that mirror the config file; every one that is set overrides it.
struct ExperimentFlags {
  std::optional<std::string> kind;
  std::optional<std::string> features;
  std::optional<std::size_t> window, stride;
  std::optional<std::string> gap;
  std::optional<bool> no_outliers;
  std::optional<double> aug_sigma, aug_mu;
  std::optional<double> lr, lr_decay, dropout;
  std::optional<std::size_t> batch, epochs, hidden, layers, patience, validation;
  std::optional<std::string> optimizer;
  std::optional<std::size_t> trees, depth;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App* app, bool with_kind = true) {
    if (with_kind) app->add_option("--kind", kind, "lstm | forest | pmv | null");
    app->add_option("--features", features, "comma-separated feature columns");
    app->add_option("--window", window, "sequence length in samples");
    app->add_option("--stride", stride, "downsampling stride");
    app->add_option("--forecast-gap", gap, "10s, 5m, 10m or a sample count");
    app->add_flag("--no-outliers", no_outliers, "skip the 3-sigma filter");
    app->add_option("--augment-sigma", aug_sigma, "Gaussian noise std for training windows");
    app->add_option("--augment-mu", aug_mu, "Gaussian noise mean");
    app->add_option("--lr", lr, "learning rate");
    app->add_option("--lr-decay", lr_decay, "per-epoch learning-rate factor");
    app->add_option("--batch-size", batch, "mini-batch size");
    app->add_option("--epochs", epochs, "maximum epochs");
    app->add_option("--dropout", dropout, "dropout between recurrent layers");
    app->add_option("--hidden", hidden, "LSTM hidden size");
    app->add_option("--layers", layers, "LSTM layers");
    app->add_option("--patience", patience, "early-stopping patience in epochs");
    app->add_option("--optimizer", optimizer, "adam | sgd");
    app->add_option("--validation-subjects", validation, "trailing training participants used for early stopping");
    app->add_option("--trees", trees, "forest size");
    app->add_option("--max-depth", depth, "forest depth limit");
    app->add_option("--seed", seed, "global seed");
  }

  /// Gap presets need the data rate, so they are resolved separately.
  void apply(RunConfig& rc) const {
    auto& e = rc.experiment;
    if (kind) read_into(json{{"kind", *kind}}, rc);
    if (features) e.pipeline.features = split_list(*features);
    if (window) e.pipeline.window_len = *window;
    if (stride) e.pipeline.downsample_stride = *stride;
    if (no_outliers && *no_outliers) e.pipeline.filter_outliers = false;
    if (aug_sigma) e.pipeline.augment_sigma = *aug_sigma;
    if (aug_mu) e.pipeline.augment_mu = *aug_mu;
    if (lr) e.lstm.learning_rate = *lr;
    if (lr_decay) e.lstm.lr_decay = *lr_decay;
    if (batch) e.lstm.batch_size = *batch;
    if (epochs) e.lstm.max_epochs = *epochs;
    if (dropout) e.lstm.dropout = *dropout;
    if (hidden) e.lstm.hidden_size = *hidden;
    if (layers) e.lstm.num_layers = *layers;
    if (patience) e.lstm.early_stop_patience = *patience;
    if (optimizer) read_into(json{{"optimizer", *optimizer}}, e.lstm);
    if (validation) e.validation_subjects = *validation;
    if (trees) e.forest.trees = *trees;
    if (depth) e.forest.max_depth = *depth;
    if (seed) {
      rc.seed = *seed;
      e.pipeline.seed = *seed;
      e.lstm.seed = *seed;
      e.forest.seed = *seed;
    }
    e.pipeline.validate();
    e.lstm.validate();
    e.forest.validate();
  }

  void resolve_gap(RunConfig& rc, const std::vector<RecordSet>& sets) const {
    if (!gap || sets.empty()) return;
    const double rate = sets.front().nominal_rate_hz / static_cast<double>(rc.experiment.pipeline.downsample_stride);
    rc.experiment.pipeline.forecast_gap = parse_gap(*gap, rate);
  }
};

RunConfig load_config(const std::optional<std::string>& path) {
  RunConfig rc;
  if (path) read_into(read_json_file(*path), rc);
  return rc;
}

void require_features(const RunConfig& rc) {
  const auto kind = rc.experiment.kind;
  if ((kind == ModelKind::Lstm || kind == ModelKind::Forest) && rc.experiment.pipeline.features.empty())
    throw Error(Errc::InvalidConfig, "--features is required for this model kind");
}

// --- subcommands -----------------------------------------------------------

int cmd_simulate(const RunConfig& rc, const fs::path& out) {
  std::vector<sim::SubjectProfile> profiles;
  const auto cohort = sim::make_cohort(rc.subjects, rc.profile, rc.seed, &profiles);
  fs::create_directories(out);
  json manifest = {{"seed", rc.seed}, {"profile", to_json(rc.profile)}, {"subjects", json::array()}};
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    const auto file = cohort[i].participant_id + ".csv";
    write_csv(cohort[i], out / file);
    const auto& p = profiles[i];
    manifest["subjects"].push_back({{"participant", p.participant_id},
                                    {"file", file},
                                    {"records", cohort[i].size()},
                                    {"comfort_center", p.comfort_center},
                                    {"comfort_width", p.comfort_width},
                                    {"hysteresis_shift", p.hysteresis_shift},
                                    {"demographics", session::to_json(p.demographics)}});
  }
  write_json_file(out / "cohort.json", manifest);
  std::printf("wrote %zu participants to %s\n", cohort.size(), out.string().c_str());
  return 0;
}

int cmd_preprocess(const RunConfig& rc, const std::vector<std::string>& inputs, const fs::path& out) {
  const auto& p = rc.experiment.pipeline;
  auto sets = prepare_all(load_sets(inputs), p);
  fs::create_directories(out);
  for (const auto& rs : sets) write_csv(rs, out / (rs.participant_id + ".csv"));
  if (!p.features.empty()) {
    const auto spec = fit_feature_spec(sets, p.features);
    write_json_file(out / "features.json", {{"pipeline", to_json(p)}, {"features", feature_spec_to_json(spec)}});
  }
  std::printf("wrote %zu participants to %s\n", sets.size(), out.string().c_str());
  return 0;
}

int cmd_train(RunConfig rc, const ExperimentFlags& flags, const std::vector<std::string>& inputs, const fs::path& out) {
  require_features(rc);
  const auto raw = load_sets(inputs);
  flags.resolve_gap(rc, raw);
  const auto sets = prepare_all(raw, rc.experiment.pipeline);
  auto cfg = rc.experiment;
  const auto tp = fit_pipeline(sets, cfg);
  save_model(tp, out);
  fs::path history = out;
  history.replace_extension(".history.json");
  write_json_file(history, history_to_json(tp.history));
  if (!tp.history.empty())
    std::printf("trained %s for %zu epochs, final loss %.5f\n", std::string(to_string(tp.kind)).c_str(),
                tp.history.size(), tp.history.back().train_loss);
  std::printf("model written to %s\n", out.string().c_str());
  return 0;
}

int cmd_eval(RunConfig rc, const ExperimentFlags& flags, const std::optional<std::string>& model_path,
             const std::vector<std::string>& train_inputs, const std::vector<std::string>& inputs,
             const std::optional<std::string>& report) {
  TrainedPipeline tp;
  auto raw = load_sets(inputs);
  if (model_path) {
    tp = load_model(*model_path);
  } else {
    flags.resolve_gap(rc, raw);
    if (rc.experiment.kind == ModelKind::Pmv) {
      tp = fit_pipeline(std::vector<RecordSet>(1), rc.experiment);
    } else {
      if (train_inputs.empty()) throw Error(Errc::InvalidConfig, "eval needs --model or --train");
      tp = fit_pipeline(prepare_all(load_sets(train_inputs), rc.experiment.pipeline), rc.experiment);
    }
  }
  const auto ev = evaluate(tp, prepare_all(std::move(raw), tp.pipeline));
  print_report(std::string(to_string(tp.kind)), ev.report);
  if (ev.skipped) std::printf("%zu rows outside the PMV envelope were skipped\n", ev.skipped);
  maybe_write(report, {{"kind", to_string(tp.kind)}, {"report", report_json(ev.report)}, {"skipped", ev.skipped}});
  return 0;
}

int cmd_cv(RunConfig rc, const ExperimentFlags& flags, const std::vector<std::string>& inputs,
           const std::optional<std::string>& report) {
  if (rc.experiment.kind != ModelKind::Pmv && rc.experiment.kind != ModelKind::Null) require_features(rc);
  auto sets = load_sets(inputs);
  flags.resolve_gap(rc, sets);
  const auto cv = cross_validate(std::move(sets), rc.study.fold_size, rc.experiment);
  for (const auto& f : cv.folds) {
    std::string who;
    for (const auto& p : f.eval_participants) who += (who.empty() ? "" : "+") + p;
    print_report("fold " + who, f.report);
  }
  std::printf("mean  k7 %.2f%% +- %.2f  k3 %.2f%% +- %.2f  k2 %.2f%% +- %.2f\n", 100 * cv.mean[0], 100 * cv.std[0],
              100 * cv.mean[1], 100 * cv.std[1], 100 * cv.mean[2], 100 * cv.std[2]);
  maybe_write(report, cv_json(cv));
  return 0;
}

int cmd_study(RunConfig rc, const ExperimentFlags& flags, const std::vector<std::string>& inputs,
              const std::optional<std::string>& report) {
  auto sets = load_sets(inputs);
  flags.resolve_gap(rc, sets);
  const auto subsets = feature_combinations(rc.study.top_features, rc.study.sizes);
  const auto table = run_feature_study(sets, subsets, rc.experiment, rc.study.fold_size);
  json rows = json::array();
  for (const auto* row : table.ranked()) {
    std::string name;
    for (const auto& f : row->features) name += (name.empty() ? "" : ",") + f;
    print_report(name, row->report());
    rows.push_back({{"features", row->features}, {"cv", cv_json(row->cv)}});
  }
  maybe_write(report, {{"rows", rows}});
  return 0;
}

int cmd_permimp(const std::string& model_path, const std::vector<std::string>& inputs, std::uint64_t seed,
                const std::optional<std::string>& report) {
  const auto tp = load_model(model_path);
  const auto sets = prepare_all(load_sets(inputs), tp.pipeline);
  const auto ds = window_all(sets, tp.spec, tp.pipeline);
  const auto ranked = permutation_importance(tp, ds, seed);
  json out = json::array();
  for (const auto& [name, delta] : ranked) {
    std::printf("%-28s %+8.4f\n", name.c_str(), delta);
    out.push_back({{"feature", name}, {"delta_kappa7", delta}});
  }
  if (tp.forest) {
    std::printf("-- impurity importance\n");
    for (const auto& [name, s] : impurity_importance(*tp.forest)) std::printf("%-28s %8.4f\n", name.c_str(), s);
  }
  maybe_write(report, {{"permutation", out}});
  return 0;
}

int cmd_crosseval(RunConfig rc, const ExperimentFlags& flags, const std::vector<std::string>& train,
                  const std::vector<std::string>& eval, const std::optional<std::string>& report) {
  if (rc.experiment.kind != ModelKind::Pmv && rc.experiment.kind != ModelKind::Null) require_features(rc);
  auto a = load_sets(train);
  auto b = load_sets(eval);
  flags.resolve_gap(rc, a);
  const auto ev = cross_dataset_eval(std::move(a), std::move(b), rc.experiment);
  print_report("cross-dataset", ev.report);
  maybe_write(report, {{"report", report_json(ev.report)}});
  return 0;
}

int cmd_pmv(const pmv::PmvInput& in, const std::optional<std::string>& garments) {
  auto input = in;
  if (garments) {
    const auto ids = split_list(*garments);
    input.clothing = pmv::clo_lookup(ids);
  }
  const auto r = pmv::compute_pmv(input);
  const auto label = pmv::pmv_to_label(r.pmv);
  const json out = {{"pmv", r.pmv},
                    {"label", label.value()},
                    {"label_name", label_name(label)},
                    {"clothing", input.clothing},
                    {"iterations", r.iterations},
                    {"converged", r.converged}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_serve(const std::string& host, int port, const std::optional<std::string>& data_dir) {
  session::StoreOptions opts;
  if (data_dir) opts.data_dir = *data_dir;
  session::SessionStore store(opts);
  httplib::Server srv;
  session::install_routes(srv, store);
  std::printf("listening on %s:%d\n", host.c_str(), port);
  std::fflush(stdout);
  if (!srv.listen(host, port)) throw Error(Errc::Io, "cannot listen on " + host + ":" + std::to_string(port));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermal comfort toolkit: simulate, preprocess, train, evaluate, serve"};
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  app.add_option("--config", config_path, "JSON run configuration; flags override it")->check(CLI::ExistingFile);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic cohort");
  std::optional<std::size_t> subjects;
  std::optional<std::string> scenario;
  std::optional<std::uint64_t> sim_seed;
  std::optional<double> duration, rate, t_min, t_max, sample_rate, outdoor;
  std::string sim_out = "cohort";
  simulate->add_option("--subjects", subjects, "number of participants");
  simulate->add_option("--scenario", scenario, "indoor | vehicle");
  simulate->add_option("--seed", sim_seed, "cohort seed");
  simulate->add_option("--duration", duration, "minutes");
  simulate->add_option("--rate", rate, "degC per minute");
  simulate->add_option("--t-min", t_min, "degC");
  simulate->add_option("--t-max", t_max, "degC");
  simulate->add_option("--sample-rate", sample_rate, "Hz");
  simulate->add_option("--outdoor-temp", outdoor, "degC, vehicle only");
  simulate->add_option("--out", sim_out, "output directory");

  // preprocess
  auto* preprocess = app.add_subcommand("preprocess", "extrapolate, filter and downsample CSVs");
  std::vector<std::string> pre_in;
  std::string pre_out = "prepared";
  ExperimentFlags pre_flags;
  preprocess->add_option("--in", pre_in, "CSV files or directories")->required();
  preprocess->add_option("--out", pre_out, "output directory");
  preprocess->add_option("--features", pre_flags.features, "fit normalization for these columns");
  preprocess->add_option("--stride", pre_flags.stride, "downsampling stride");
  preprocess->add_flag("--no-outliers", pre_flags.no_outliers, "skip the 3-sigma filter");

  // pmv
  auto* pmv_cmd = app.add_subcommand("pmv", "predicted mean vote for one condition");
  pmv::PmvInput pin;
  std::optional<std::string> garments;
  pmv_cmd->add_option("--ta", pin.ambient_temp, "air temperature, degC")->capture_default_str();
  pmv_cmd->add_option("--tr", pin.radiation_temp, "mean radiant temperature, degC")->capture_default_str();
  pmv_cmd->add_option("--v", pin.air_velocity, "air velocity, m/s")->capture_default_str();
  pmv_cmd->add_option("--rh", pin.rel_humidity, "relative humidity, percent")->capture_default_str();
  pmv_cmd->add_option("--met", pin.metabolic_rate, "metabolic rate, met")->capture_default_str();
  pmv_cmd->add_option("--clo", pin.clothing, "clothing insulation, clo")->capture_default_str();
  pmv_cmd->add_option("--garments", garments, "comma-separated garment ids instead of --clo");

  // train
  auto* train = app.add_subcommand("train", "fit a model and write it to a file");
  std::vector<std::string> train_in;
  std::string train_out = "model.json";
  ExperimentFlags train_flags;
  train->add_option("--data", train_in, "training CSV files or directories")->required();
  train->add_option("--out", train_out, "model file");
  train_flags.add_to(train);

  // eval
  auto* eval = app.add_subcommand("eval", "score a model, PMV or the null model");
  std::vector<std::string> eval_in, eval_train;
  std::optional<std::string> eval_model, eval_report;
  ExperimentFlags eval_flags;
  eval->add_option("--data", eval_in, "evaluation CSV files or directories")->required();
  eval->add_option("--model", eval_model, "model file from `train`");
  eval->add_option("--train", eval_train, "training data when no model file is given");
  eval->add_option("--report", eval_report, "JSON report path");
  eval_flags.add_to(eval);

  // cv
  auto* cv = app.add_subcommand("cv", "participant-level cross-validation");
  std::vector<std::string> cv_in;
  std::optional<std::string> cv_report;
  std::optional<std::size_t> fold_size;
  ExperimentFlags cv_flags;
  cv->add_option("--data", cv_in, "CSV files or directories")->required();
  cv->add_option("--fold-size", fold_size, "participants per evaluation fold");
  cv->add_option("--report", cv_report, "JSON report path");
  cv_flags.add_to(cv);

  // study
  auto* study = app.add_subcommand("study", "cross-validate every feature subset");
  std::vector<std::string> study_in;
  std::optional<std::string> study_report, top_features, sizes;
  std::optional<std::size_t> study_fold;
  ExperimentFlags study_flags;
  study->add_option("--data", study_in, "CSV files or directories")->required();
  study->add_option("--top-features", top_features, "ordered candidate features");
  study->add_option("--sizes", sizes, "subset sizes, e.g. 3,4,5");
  study->add_option("--fold-size", study_fold, "participants per evaluation fold");
  study->add_option("--report", study_report, "JSON report path");
  study_flags.add_to(study);

  // permimp
  auto* permimp = app.add_subcommand("permimp", "permutation importance of a trained model");
  std::string perm_model;
  std::vector<std::string> perm_in;
  std::uint64_t perm_seed = 42;
  std::optional<std::string> perm_report;
  permimp->add_option("--model", perm_model, "model file")->required();
  permimp->add_option("--data", perm_in, "evaluation CSV files or directories")->required();
  permimp->add_option("--seed", perm_seed, "shuffle seed");
  permimp->add_option("--report", perm_report, "JSON report path");

  // crosseval
  auto* crosseval = app.add_subcommand("crosseval", "train on one dataset, score on another");
  std::vector<std::string> ce_train, ce_eval;
  std::optional<std::string> ce_report;
  ExperimentFlags ce_flags;
  crosseval->add_option("--train", ce_train, "source dataset")->required();
  crosseval->add_option("--eval", ce_eval, "target dataset")->required();
  crosseval->add_option("--report", ce_report, "JSON report path");
  ce_flags.add_to(crosseval);

  // serve
  auto* serve = app.add_subcommand("serve", "run the session logging service");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::string> serve_data;
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "TCP port");
  serve->add_option("--data", serve_data, "journal directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    auto rc = load_config(config_path);
    if (simulate->parsed()) {
      if (subjects) rc.subjects = *subjects;
      if (sim_seed) rc.seed = *sim_seed;
      if (scenario) rc.profile.scenario = scenario_from_string(*scenario);
      if (duration) rc.profile.duration_min = *duration;
      if (rate) rc.profile.rate = *rate;
      if (t_min) rc.profile.t_min = *t_min;
      if (t_max) rc.profile.t_max = *t_max;
      if (sample_rate) rc.profile.sample_rate_hz = *sample_rate;
      if (outdoor) rc.profile.outdoor_temp = *outdoor;
      return cmd_simulate(rc, sim_out);
    }
    if (preprocess->parsed()) {
      pre_flags.apply(rc);
      return cmd_preprocess(rc, pre_in, pre_out);
    }
    if (pmv_cmd->parsed()) return cmd_pmv(pin, garments);
    if (train->parsed()) {
      train_flags.apply(rc);
      return cmd_train(rc, train_flags, train_in, train_out);
    }
    if (eval->parsed()) {
      eval_flags.apply(rc);
      return cmd_eval(rc, eval_flags, eval_model, eval_train, eval_in, eval_report);
    }
    if (cv->parsed()) {
      cv_flags.apply(rc);
      if (fold_size) rc.study.fold_size = *fold_size;
      return cmd_cv(rc, cv_flags, cv_in, cv_report);
    }
    if (study->parsed()) {
      study_flags.apply(rc);
      if (top_features) rc.study.top_features = split_list(*top_features);
      if (sizes) {
        rc.study.sizes.clear();
        for (const auto& s : split_list(*sizes)) rc.study.sizes.push_back(std::stoul(s));
      }
      if (study_fold) rc.study.fold_size = *study_fold;
      return cmd_study(rc, study_flags, study_in, study_report);
    }
    if (permimp->parsed()) return cmd_permimp(perm_model, perm_in, perm_seed, perm_report);
    if (crosseval->parsed()) {
      ce_flags.apply(rc);
      return cmd_crosseval(rc, ce_flags, ce_train, ce_eval, ce_report);
    }
    if (serve->parsed()) return cmd_serve(host, port, serve_data);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUnexpected;
  }
  return kExitUsage;
}
