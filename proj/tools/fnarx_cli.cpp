// fnarx command-line driver: simulate, fit, predict, evaluate, sweep.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fnarx/error.hpp"
#include "fnarx/experiments.hpp"
#include "fnarx/json_reader.hpp"
#include "fnarx/metrics.hpp"
#include "fnarx/model.hpp"
#include "fnarx/model_io.hpp"
#include "fnarx/parallel.hpp"
#include "fnarx/study_io.hpp"
#include "fnarx/timeseries.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fnarx;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  std::vector<std::string> sets;
};

// Values that parse as JSON keep their type; anything else is a string.
json parse_scalar(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return json(text);
  }
}

void set_leaf(json& root, const std::string& dotted, const json& value) {
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const auto key = dotted.substr(start, dot == std::string::npos ? dotted.npos : dot - start);
    if (key.empty()) throw Error(ErrorKind::kParse, "bad override path '" + dotted + "'");
    if (!node->is_object()) {
      throw Error(ErrorKind::kParse, "override '" + dotted + "' descends into a non-object");
    }
    if (dot == std::string::npos) {
      auto it = node->find(key);
      if (it != node->end() && it->is_object()) {
        throw Error(ErrorKind::kParse, "override '" + dotted + "' targets an object, not a leaf");
      }
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key)) (*node)[key] = json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
}

json load_config(const Flags& f) {
  json cfg = f.config.empty() ? json::object() : read_json_file(f.config);
  if (!cfg.is_object()) throw Error(ErrorKind::kParse, "config root must be an object");
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kParse, "--set expects key=value, got '" + s + "'");
    }
    set_leaf(cfg, s.substr(0, eq), parse_scalar(s.substr(eq + 1)));
  }
  if (f.seed) cfg["seed"] = *f.seed;
  if (f.out) cfg["out"] = *f.out;
  if (f.threads) cfg["threads"] = *f.threads;
  return cfg;
}

// Sections inherit the global seed unless they set their own.
json with_seed(const json& section, std::uint64_t seed) {
  json s = section.is_null() ? json::object() : section;
  if (s.is_object() && !s.contains("seed")) s["seed"] = seed;
  return s;
}

struct Run {
  json config;
  JsonReader root;
  std::uint64_t seed = 1;
  fs::path out;
  int threads = 0;
  json resolved;

  explicit Run(json cfg) : config(std::move(cfg)), root(config, "", true) {
    seed = root.get<std::uint64_t>("seed", 1);
    out = root.get<std::string>("out", "fnarx_out");
    threads = root.get("threads", 0);
    if (threads < 0) root.fail("threads must be >= 0");
    resolved = {{"seed", seed}, {"out", out.string()}, {"threads", threads}};
  }

  const json& section(const std::string& key) { return root.raw(key); }

  // Called once every key has been consumed: rejects leftovers, prepares the
  // output directory and snapshots the resolved configuration.
  void start(const std::string& command) {
    root.finish();
    set_num_threads(threads);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw Error(ErrorKind::kIo, "cannot create " + out.string() + ": " + ec.message());
    resolved["command"] = command;
    write_json_file(resolved, out / "config.resolved.json");
  }
};

StudySpec read_study(Run& run, const std::string& key = "study") {
  auto spec = study_from_json(with_seed(run.section(key), run.seed), true, key);
  run.resolved[key] = to_json(spec);
  return spec;
}

ModelConfig read_model_config(Run& run) {
  auto cfg = model_config_from_json(with_seed(run.section("model"), run.seed), true, "model");
  run.resolved["model"] = to_json(cfg);
  return cfg;
}

// A manifest path or a single trajectory CSV. CSV roles come from the model
// when one is given; the output column is optional.
ExperimentalDesign read_data(const fs::path& path, const FittedModel* model) {
  if (path.extension() == ".json") return read_design(path);
  ChannelRoles roles;
  if (model) {
    roles.exogenous = model->exogenous_names;
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
    std::string header;
    std::getline(f, header);
    std::stringstream ss(header);
    for (std::string col; std::getline(ss, col, ',');) {
      if (!col.empty() && col.back() == '\r') col.pop_back();
      if (col == model->output_name) roles.output = col;
    }
  }
  return ExperimentalDesign({load_csv(path, roles)});
}

std::string required_path(Run& run, const std::string& key) {
  auto v = run.root.opt<std::string>(key);
  if (!v) run.root.fail("missing required key '" + key + "'");
  run.resolved[key] = *v;
  return *v;
}

ForecastInit read_init(Run& run) {
  const auto s = run.root.get<std::string>("init", "zeros");
  run.resolved["init"] = s;
  if (s == "zeros") return ForecastInit::kZeros;
  if (s == "truth") return ForecastInit::kTruth;
  run.root.fail("init must be \"zeros\" or \"truth\", got \"" + s + "\"");
}

// Either a generated study or explicit manifests.
CaseStudy read_case_study(Run& run, bool need_validation) {
  if (run.root.has("study")) {
    if (run.root.has("train") || run.root.has("validation")) {
      run.root.fail("give either 'study' or 'train'/'validation' manifests, not both");
    }
    return read_study(run).generate();
  }
  auto train = read_design(required_path(run, "train"));
  if (!need_validation) return {train, train};
  return {std::move(train), read_design(required_path(run, "validation"))};
}

void cmd_simulate(Run& run) {
  const auto spec = read_study(run);
  const auto prefix = run.root.get<std::string>("prefix", "traj");
  run.resolved["prefix"] = prefix;
  run.start("simulate");
  json summary{{"train", nullptr}, {"validation", nullptr}};
  if (spec.n_train > 0) {
    summary["train"] = write_design(spec.design(0, spec.n_train), run.out / "train", prefix).string();
  }
  if (spec.n_validation > 0) {
    summary["validation"] =
        write_design(spec.design(1, spec.n_validation), run.out / "validation", prefix).string();
  }
  write_json_file(summary, run.out / "simulate.json");
}

json evaluations_json(const FittedModel& m) {
  json arr = json::array();
  for (const auto& e : m.evaluations) {
    arr.push_back({{"iteration", e.iteration},
                   {"mean_nmse", std::isfinite(e.mean_nmse) ? json(e.mean_nmse) : json(nullptr)},
                   {"n_terms", e.n_terms}});
  }
  return arr;
}

void cmd_fit(Run& run) {
  const auto study = run.root.has("study") ? std::optional(read_study(run)) : std::nullopt;
  const auto train_path = study ? std::string() : required_path(run, "train");
  const auto cfg = read_model_config(run);
  std::optional<SearchGrid> grid;
  if (run.root.has("search")) {
    grid = search_grid_from_json(run.section("search"), true, "search");
    run.resolved["search"] = to_json(*grid);
  }
  run.start("fit");
  const auto train = study ? study->design(0, study->n_train) : read_design(train_path);

  json report;
  FittedModel model;
  if (grid) {
    auto result = adaptive_search(train, *grid, cfg);
    model = std::move(result.model);
    json entries = json::array();
    for (const auto& e : result.entries) {
      json je{{"degree", e.basis.degree},
              {"interaction", e.basis.interaction},
              {"q", e.basis.q},
              {"nu", e.nu},
              {"memory_s", e.memory_s},
              {"n_regressors", e.n_regressors},
              {"n_nonzero", e.n_nonzero},
              {"chosen_iteration", e.chosen_iteration},
              {"mean_nmse", std::isfinite(e.mean_nmse) ? json(e.mean_nmse) : json(nullptr)}};
      if (e.same_as) je["same_as"] = *e.same_as;
      if (!e.error.empty()) je["error"] = e.error;
      entries.push_back(je);
    }
    report["search"] = {{"entries", entries}, {"best", result.best}};
  } else {
    model = fit(train, cfg);
  }
  save_model(model, run.out / "model.json");

  double chosen_nmse = std::numeric_limits<double>::infinity();
  for (const auto& e : model.evaluations) {
    if (e.iteration == model.chosen_iteration) chosen_nmse = e.mean_nmse;
  }
  report["chosen_iteration"] = model.chosen_iteration;
  report["path_length"] = model.path_length;
  report["training_nmse"] = std::isfinite(chosen_nmse) ? json(chosen_nmse) : json(nullptr);
  report["n_features"] = model.n_features();
  report["n_regressors"] = model.basis.size();
  report["n_nonzero"] = model.n_nonzero();
  report["training_trajectories"] = model.training_trajectories;
  report["training_rows"] = model.training_rows;
  report["evaluations"] = evaluations_json(model);
  write_json_file(report, run.out / "fit_report.json");
}

void write_prediction_csv(const Trajectory& traj, const ForecastResult& r, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.precision(17);
  out << "t,prediction" << (traj.has_output() ? ",truth" : "") << '\n';
  for (std::size_t k = 0; k < traj.n_steps(); ++k) {
    out << traj.grid().time(k) << ',' << r.prediction[k];
    if (traj.has_output()) out << ',' << traj.output().values[k];
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

void cmd_predict(Run& run) {
  const auto model_path = required_path(run, "model");
  const auto data_path = required_path(run, "data");
  const auto init = read_init(run);
  const auto mode = run.root.get<std::string>("mode", "forecast");
  if (mode != "forecast" && mode != "osa") run.root.fail("mode must be \"forecast\" or \"osa\"");
  run.resolved["mode"] = mode;
  run.start("predict");

  const auto model = load_model(model_path);
  const auto design = read_data(data_path, &model);
  if (init == ForecastInit::kTruth && !design.has_output()) {
    throw_invalid("init \"truth\" needs trajectories with outputs");
  }
  if (mode == "osa" && !design.has_output()) {
    throw_invalid("one-step-ahead prediction needs trajectories with outputs");
  }
  ForecastOptions opts;
  opts.init = init;
  std::vector<ForecastResult> results;
  if (mode == "osa") {
    for (const auto& t : design) results.push_back(predict_osa(model, t));
  } else {
    results = forecast_design(model, design, opts);
  }

  fs::create_directories(run.out / "predictions");
  json summary = json::array();
  for (std::size_t i = 0; i < design.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "pred_%04zu.csv", i);
    write_prediction_csv(design[i], results[i], run.out / "predictions" / name);
    json e{{"file", std::string("predictions/") + name}, {"init_span", results[i].init_span}};
    e["diverged_at"] = results[i].diverged_at ? json(*results[i].diverged_at) : json(nullptr);
    e["nmse"] = results[i].nmse && std::isfinite(*results[i].nmse) ? json(*results[i].nmse)
                                                                   : json(nullptr);
    summary.push_back(e);
  }
  write_json_file({{"trajectories", summary}}, run.out / "predict.json");
}

void cmd_evaluate(Run& run) {
  const auto model_path = required_path(run, "model");
  const auto data_path = required_path(run, "data");
  ForecastOptions opts;
  opts.init = read_init(run);
  opts.gamma = run.root.get("gamma", 0.0);
  const auto n_thresholds = run.root.get<std::size_t>("n_thresholds", 50);
  run.resolved["gamma"] = opts.gamma;
  run.resolved["n_thresholds"] = n_thresholds;
  run.start("evaluate");

  const auto model = load_model(model_path);
  const auto design = read_data(data_path, &model);
  const auto report = evaluate_design(model, design, opts);
  write_report_csv(report, run.out / "report.csv");
  write_report_json(report, run.out / "report.json", n_thresholds);
}

void cmd_sweep(Run& run) {
  const auto study = read_case_study(run, true);
  const auto cfg = read_model_config(run);
  const auto axis = parse_sweep_axis(run.root.get<std::string>("axis", "n_ed"));
  const auto values = run.root.require<std::vector<double>>("values");
  ForecastOptions opts;
  opts.init = read_init(run);
  run.resolved["axis"] = to_string(axis);
  run.resolved["values"] = values;
  run.start("sweep");

  const auto rows = run_sweep(study, cfg, axis, values, opts);
  write_sweep_csv(rows, axis, run.out / "sweep.csv");
  json arr = json::array();
  for (const auto& r : rows) {
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    arr.push_back({{to_string(axis), r.value},
                   {"n_features", r.n_features},
                   {"n_regressors", r.n_regressors},
                   {"n_nonzero", r.n_nonzero},
                   {"chosen_iteration", r.chosen_iteration},
                   {"train_nmse", num(r.train_nmse)},
                   {"median_nmse", num(r.median_nmse)},
                   {"mean_nmse", num(r.mean_nmse)},
                   {"n_diverged", r.n_diverged}});
  }
  write_json_file({{"axis", to_string(axis)}, {"rows", arr}}, run.out / "sweep.json");
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kParse:
      return 2;
    case ErrorKind::kIo:
      return 3;
    case ErrorKind::kNumerical:
      return 4;
  }
  return 1;
}

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Functional NARX surrogate modelling"};
  app.require_subcommand(1);
  Flags flags;
  using Command = void (*)(Run&);
  const std::vector<std::tuple<std::string, std::string, Command>> commands{
      {"simulate", "Generate training/validation realizations of a case study", cmd_simulate},
      {"fit", "Fit a model (or run the adaptive basis search)", cmd_fit},
      {"predict", "Forecast trajectories with a fitted model", cmd_predict},
      {"evaluate", "Forecast a truth-bearing design and write error reports", cmd_evaluate},
      {"sweep", "Fit and validate over one configuration axis", cmd_sweep}};
  Command selected = nullptr;
  std::string selected_name;
  for (const auto& [name, help, fn] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "Global seed");
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--threads", flags.threads, "OpenMP threads (0: default)");
    sub->add_option("--set", flags.sets, "Override a config leaf: key.path=value");
    sub->callback([&selected, &selected_name, name = name, fn = fn] {
      selected = fn;
      selected_name = name;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    Run run(load_config(flags));
    selected(run);
  } catch (const Error& e) {
    return fail(to_string(e.kind()), e.what(), exit_code(e.kind()));
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
