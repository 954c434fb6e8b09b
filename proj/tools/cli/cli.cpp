#include "cli/cli.hpp"

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ctsm/error.hpp"
#include "ctsm/harness/csv_io.hpp"
#include "ctsm/harness/experiment.hpp"
#include "ctsm/harness/grid.hpp"
#include "ctsm/harness/synthetic.hpp"
#include "ctsm/harness/train.hpp"
#include "ctsm/interp/coeff_cache.hpp"
#include "ctsm/models/model.hpp"
#include "ctsm/prep/batch.hpp"
#include "ctsm/tensor/checkpoint.hpp"
#include "ctsm/tensor/tape.hpp"

namespace ctsm::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr int kSchemaVersion = 1;

enum class Kind { integer, real, boolean, text, list };

const std::set<std::string> kExperimentKeys{
    "model",  "latent", "hidden",      "embed_layers", "dynamics_layers", "epochs", "batch_size",
    "eval_batch_size", "lr", "scheme", "causal", "standardize", "impute", "task", "classes",
    "solver", "rtol",   "atol",        "dt"};

// Input paths inside a config file are relative to the file.
const std::set<std::string> kPathKeys{"data", "context", "cache", "run"};

std::string key_of(const std::string& flag) {
  std::string k = flag.substr(flag.find_first_not_of('-'));
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

json convert(Kind kind, const std::string& v) {
  switch (kind) {
    case Kind::integer: return std::stoull(v);
    case Kind::real: return std::stod(v);
    case Kind::boolean: return v == "true";
    case Kind::text: return v;
    case Kind::list: {
      const std::string text = v.find(',') != std::string::npos && v.find('[') == std::string::npos ? "[" + v + "]" : v;
      try {
        return json::parse(text);
      } catch (const json::parse_error&) {
        throw ConfigError(fmt::format("cannot parse '{}' as a number or list", v));
      }
    }
  }
  return v;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << j.dump(2) << '\n';
}

// A subcommand whose flags are merged over an optional JSON config file.
class Command {
 public:
  using Handler = std::function<void(const json&, std::ostream&)>;

  Command(CLI::App& parent, const std::string& name, const std::string& description)
      : app_(parent.add_subcommand(name, description)) {
    app_->add_option("--config", config_, "JSON config file; explicit flags override its entries")
        ->check(CLI::ExistingFile);
  }

  CLI::Option* flag(const std::string& name, Kind kind, const std::string& help) {
    storage_.emplace_back();
    CLI::Option* opt = app_->add_option(name, storage_.back(), help);
    switch (kind) {
      case Kind::integer: opt->check(CLI::TypeValidator<std::uint64_t>("UINT")); break;
      case Kind::real: opt->check(CLI::Number); break;
      case Kind::boolean: opt->check(CLI::IsMember({"true", "false"})); break;
      case Kind::text:
      case Kind::list: break;
    }
    flags_.push_back({opt, key_of(name), kind, &storage_.back()});
    return opt;
  }

  CLI::Option* choice(const std::string& name, std::vector<std::string> options, const std::string& help) {
    return flag(name, Kind::text, help)->check(CLI::IsMember(std::move(options)));
  }

  // Keys accepted only from the config file.
  void allow(std::initializer_list<std::string> keys) { extra_.insert(keys); }
  void accept_any_file_key() { any_key_ = true; }
  void handler(Handler h) { handler_ = std::move(h); }

  CLI::App* app() const noexcept { return app_; }
  bool selected() const { return app_->parsed(); }
  bool has_config() const { return !config_.empty(); }
  fs::path config_dir() const { return fs::path(config_).parent_path(); }

  json settings() const {
    json merged = json::object();
    if (!config_.empty()) {
      const json file = read_json(config_);
      if (!file.is_object()) throw ConfigError(fmt::format("{}: config must be a JSON object", config_));
      const int version = file.value("schema_version", kSchemaVersion);
      if (version != kSchemaVersion) {
        throw ConfigError(fmt::format("{}: unsupported schema_version {}", config_, version));
      }
      const fs::path base = config_dir();
      for (const auto& [k, v] : file.items()) {
        if (k == "schema_version") continue;
        if (!any_key_ && !accepts(k)) throw ConfigError(fmt::format("{}: unknown key '{}'", config_, k));
        merged[k] = v;
        if (kPathKeys.count(k) && v.is_string()) merged[k] = resolve(base, v.get<std::string>()).string();
        if (k == "data" && v.is_object()) {
          for (const char* sub : {"csv", "context"}) {
            if (v.contains(sub)) merged[k][sub] = resolve(base, v.at(sub).get<std::string>()).string();
          }
        }
      }
    }
    for (const auto& f : flags_) {
      if (f.option->count() > 0) merged[f.key] = convert(f.kind, *f.value);
    }
    return merged;
  }

  void run(std::ostream& out) const { handler_(settings(), out); }

 private:
  struct Flag {
    CLI::Option* option;
    std::string key;
    Kind kind;
    std::string* value;
  };

  bool accepts(const std::string& key) const {
    if (extra_.count(key)) return true;
    return std::any_of(flags_.begin(), flags_.end(), [&](const Flag& f) { return f.key == key; });
  }

  CLI::App* app_;
  std::string config_;
  std::deque<std::string> storage_;
  std::vector<Flag> flags_;
  std::set<std::string> extra_;
  bool any_key_ = false;
  Handler handler_;
};

void add_data_flags(Command& c) {
  c.flag("--data", Kind::text, "Dataset CSV (subject_id, t, feat_*, label, weight)");
  c.flag("--context", Kind::text, "Context CSV (subject_id, ctx_*)");
}

void add_prep_flags(Command& c) {
  c.choice("--scheme", {"linear", "hermite", "natural", "monotonic", "rectilinear", "recticubic"},
           "Control-signal interpolation scheme");
  c.choice("--causal", {"copy", "recti", "auto"}, "Causal transform (auto: recti for recti schemes)");
  c.flag("--standardize", Kind::boolean, "Standardize features and context (true|false)");
  c.choice("--impute", {"interpolate", "zero"}, "Missing feature values: interpolate or zero-fill");
}

void add_experiment_flags(Command& c) {
  c.choice("--model", {"ncde", "odernn", "latentode", "gruode", "rnn"}, "Model kind");
  c.flag("--latent", Kind::integer, "Latent state width");
  c.flag("--hidden", Kind::integer, "Hidden width of every MLP");
  c.flag("--embed-layers", Kind::integer, "Hidden layers of the embedding MLP");
  c.flag("--dynamics-layers", Kind::integer, "Hidden layers of the dynamics MLP");
  c.flag("--epochs", Kind::integer, "Training epochs");
  c.flag("--batch-size", Kind::integer, "Training minibatch size");
  c.flag("--eval-batch-size", Kind::integer, "Evaluation batch size");
  c.flag("--lr", Kind::list, "Learning rate, or embedding,dynamics,head rates");
  add_prep_flags(c);
  c.choice("--task", {"regression", "binary", "multiclass"}, "Prediction task");
  c.flag("--classes", Kind::integer, "Class count for the multiclass task");
  c.choice("--solver", {"euler", "rk4", "dopri5"}, "ODE solver");
  c.flag("--rtol", Kind::real, "Adaptive solver relative tolerance");
  c.flag("--atol", Kind::real, "Adaptive solver absolute tolerance");
  c.flag("--dt", Kind::real, "Fixed-step solver step size");
}

json pick(const json& s, const std::set<std::string>& keys) {
  json out = json::object();
  for (const auto& k : keys) {
    if (s.contains(k)) out[k] = s.at(k);
  }
  return out;
}

ExperimentConfig experiment_from(const json& s) { return experiment_from_json(pick(s, kExperimentKeys)); }

fs::path required_path(const json& s, const std::string& key, const std::string& flag) {
  if (!s.contains(key) || !s.at(key).is_string() || s.at(key).get<std::string>().empty()) {
    throw ConfigError(fmt::format("missing required {} (or '{}' in the config file)", flag, key));
  }
  return s.at(key).get<std::string>();
}

std::optional<fs::path> optional_path(const json& s, const std::string& key) {
  if (!s.contains(key) || s.at(key).is_null()) return std::nullopt;
  return fs::path(s.at(key).get<std::string>());
}

DataSource source_from(const json& s) {
  if (!s.contains("data")) throw ConfigError("no input data: pass --data or set 'data' in the config file");
  const json& d = s.at("data");
  DataSource src;
  if (d.is_string()) {
    src.csv = fs::absolute(d.get<std::string>());
  } else if (d.is_object()) {
    src = data_source_from_json(d, {});
    if (src.csv) src.csv = fs::absolute(*src.csv);
    if (src.context) src.context = fs::absolute(*src.context);
  } else {
    throw ConfigError("'data' must be a CSV path or an object");
  }
  if (s.contains("context")) {
    if (!src.csv) throw ConfigError("a context table only applies to CSV data");
    src.context = fs::absolute(s.at("context").get<std::string>());
  }
  return src;
}

json stats_json(const ColumnStats& c) { return {{"mean", c.mean}, {"std", c.std}}; }

ColumnStats stats_from(const json& j) {
  return {j.at("mean").get<std::vector<double>>(), j.at("std").get<std::vector<double>>()};
}

json standardizer_json(const Standardizer& s) {
  return {{"features", stats_json(s.features())}, {"context", stats_json(s.context())}};
}

std::vector<std::string> ids_of(const LoadedData& d, const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(d.subjects[i].id);
  return out;
}

std::size_t source_subjects(const Dataset& d) {
  std::set<std::size_t> s;
  for (const auto& p : d.subjects) s.insert(p.source);
  return s.size();
}

// Evaluates `data`; an undefined metric is reported as null with the reason.
json score(const ModelConfig& model, const ParamSet& params, const Dataset& data, std::size_t batch_size) {
  json j{{"sequences", data.size()}, {"metric_name", metric_name(model.task)}};
  if (data.size() == 0) {
    j["metric"] = nullptr;
    j["error"] = "empty evaluation set";
    return j;
  }
  const Evaluation e = evaluate(model, params, data, batch_size, false);
  j["positions"] = e.weights.size();
  j["loss"] = e.loss;
  try {
    j["metric"] = task_metric(model.task, e);
  } catch (const MetricError& err) {
    j["metric"] = nullptr;
    j["error"] = err.what();
  }
  return j;
}

void dump_trace(const ModelConfig& model, const ParamSet& params, const Dataset& data, std::size_t batch_size,
                const fs::path& path) {
  if (data.size() == 0) throw DataError("no sequences to trace");
  std::vector<std::size_t> idx(std::min(std::max<std::size_t>(batch_size, 1), data.size()));
  std::iota(idx.begin(), idx.end(), 0);
  const Batch batch = make_batch(data, idx, model.task);
  std::vector<StepRecord> trace;
  Tape tape;
  NoGradGuard guard(tape);
  ParamBinding bind(tape, params, false);
  forward(model, bind, batch, {0, &trace});
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  write_trace_csv(out, trace);
}

std::string metric_text(const json& v) {
  if (!v.contains("metric") || v.at("metric").is_null()) {
    return fmt::format("{} undefined ({})", v.value("metric_name", std::string("metric")),
                       v.value("error", std::string("no data")));
  }
  return fmt::format("{} = {:.6f}", v.at("metric_name").get<std::string>(), v.at("metric").get<double>());
}

void gen_synth(const json& s, std::ostream& out) {
  SyntheticSpec spec = synthetic_from_json(s);
  spec.task = task_from_string(s.value("task", std::string("binary")), s.value("classes", std::size_t{4}));
  const fs::path data = required_path(s, "out", "--out");
  fs::path context = data;
  context.replace_filename(data.stem().string() + "_context.csv");
  if (auto p = optional_path(s, "context_out")) context = *p;
  const SyntheticData gen = gen_synthetic(spec);
  for (const auto& p : {data, context}) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
  }
  save_dataset(data, context, gen.data);
  if (auto p = optional_path(s, "truth")) write_json(*p, truth_manifest(spec, gen));
  std::size_t rows = 0;
  for (const auto& subj : gen.data.subjects) rows += subj.length();
  out << fmt::format("wrote {} subjects, {} rows, {} features ({} task) to {} and {}\n", gen.data.subjects.size(),
                     rows, gen.data.features.size(), spec.task.name(), data.string(), context.string());
}

void preprocess(const json& s, std::ostream& out) {
  const ExperimentConfig exp = experiment_from(s);
  const DataSource src = source_from(s);
  const LoadedData loaded = src.load(exp.model.task);
  const double test_fraction = s.value("test_fraction", 0.2);
  const std::uint64_t seed = s.value("seed", std::uint64_t{0});
  const fs::path cache = required_path(s, "cache", "--cache");
  fs::path manifest = cache;
  manifest += ".json";
  if (auto p = optional_path(s, "manifest")) manifest = *p;

  const AssembledData a = assemble_dataset(loaded.subjects, exp.prep, test_fraction, seed);
  std::vector<ControlSignal> signals = a.data.train.signals();
  const auto test_signals = a.data.test.signals();
  signals.insert(signals.end(), test_signals.begin(), test_signals.end());
  if (cache.has_parent_path()) fs::create_directories(cache.parent_path());
  write_coeff_cache(cache, signals);

  json entries = json::array();
  for (const auto* part : {&a.data.train, &a.data.test}) {
    const char* split = part == &a.data.train ? "train" : "test";
    for (const auto& p : part->subjects) {
      entries.push_back({{"subject", p.id}, {"split", split}, {"copy", p.copy}, {"knots", p.signal.knot_count()}});
    }
  }
  const json m{{"schema_version", kSchemaVersion},
               {"scheme", to_string(a.data.train.scheme)},
               {"causal", to_string(a.data.train.causal)},
               {"standardize", exp.prep.standardize},
               {"impute", to_string(exp.prep.impute)},
               {"seed", seed},
               {"test_fraction", test_fraction},
               {"data", to_json(src)},
               {"features", loaded.features},
               {"context", loaded.context},
               {"standardizer", standardizer_json(a.data.standardizer)},
               {"split", {{"train", ids_of(loaded, a.split.train)}, {"test", ids_of(loaded, a.split.test)}}},
               {"cache", {{"path", fs::absolute(cache).string()}, {"channels", a.data.train.channels()},
                          {"entries", entries}}}};
  write_json(manifest, m);
  for (const auto& w : a.data.standardizer.warnings()) out << "warning: " << w << '\n';
  out << fmt::format("{} subjects ({} train, {} test) -> {} control signals, scheme {}, causal {}\n",
                     loaded.subjects.size(), a.split.train.size(), a.split.test.size(), signals.size(),
                     to_string(a.data.train.scheme), to_string(a.data.train.causal));
  out << fmt::format("cache: {}\nmanifest: {}\n", cache.string(), manifest.string());
}

void interpolate(const json& s, std::ostream& out) {
  std::vector<ControlSignal> signals;
  std::vector<std::string> names;
  if (auto cache = optional_path(s, "cache")) {
    signals = read_coeff_cache(*cache);
    for (std::size_t i = 0; i < signals.size(); ++i) names.push_back(std::to_string(i));
  } else {
    const ExperimentConfig exp = experiment_from(s);
    const LoadedData loaded = source_from(s).load(exp.model.task);
    const PreparedData p = prepare(loaded.subjects, {}, exp.prep);
    signals = p.train.signals();
    for (const auto& subj : p.train.subjects) {
      names.push_back(subj.copy > 0 || p.train.causal == CausalMode::copy ? fmt::format("{}#{}", subj.id, subj.copy)
                                                                          : subj.id);
    }
  }
  const std::size_t per_piece = s.value("per_piece", std::size_t{10});
  std::size_t first = 0, last = signals.size();
  if (s.contains("entry")) {
    first = s.at("entry").get<std::size_t>();
    if (first >= signals.size()) {
      throw ConfigError(fmt::format("entry {} out of range ({} signals)", first, signals.size()));
    }
    last = first + 1;
  }

  const auto path = optional_path(s, "out");
  std::ofstream file;
  if (path) {
    file.open(*path);
    if (!file) throw Error(fmt::format("cannot write {}", path->string()));
  }
  std::ostream& csv = path ? static_cast<std::ostream&>(file) : out;
  csv << "entry,subject,channel,role,s,value,derivative\n";
  std::size_t rows = 0;
  for (std::size_t e = first; e < last; ++e) {
    const auto& sig = signals[e];
    for (const auto& sample : sample_signal(sig, per_piece)) {
      for (std::size_t c = 0; c < sig.channel_count(); ++c) {
        csv << fmt::format("{},{},{},{},{:.17g},{:.17g},{:.17g}\n", e, names[e], c, to_string(sig.roles()[c]),
                           sample.s, sample.value[c], sample.slope[c]);
        ++rows;
      }
    }
  }
  if (path) out << fmt::format("wrote {} samples from {} signals to {}\n", rows, last - first, path->string());
}

void train_cmd(const json& s, std::ostream& out) {
  ExperimentConfig exp = experiment_from(s);
  const std::uint64_t seed = s.value("seed", std::uint64_t{0});
  const double test_fraction = s.value("test_fraction", 0.2);
  exp.train.seed = seed;
  const fs::path dir = required_path(s, "out", "--out");
  const DataSource src = source_from(s);
  const LoadedData loaded = src.load(exp.model.task);
  const AssembledData a = assemble_dataset(loaded.subjects, exp.prep, test_fraction, seed);
  const ModelConfig model = configure_for(exp.model, a.data.train);
  model.validate();
  for (const auto& w : a.data.standardizer.warnings()) out << "warning: " << w << '\n';
  out << fmt::format("training {} ({} task) on {} subjects / {} sequences; {} subjects held out\n",
                     to_string(model.kind), model.task.name(), a.split.train.size(), a.data.train.size(),
                     a.split.test.size());

  const TrainResult result = train(model, a.data.train, exp.train, std::nullopt, [&](const EpochRecord& r) {
    out << fmt::format("epoch {:>3}  loss {:.6f}\n", r.epoch, r.loss);
  });
  const json validation = score(model, result.params, a.data.test, exp.train.eval_batch_size);

  fs::create_directories(dir);
  write_checkpoint(dir / "checkpoint.ctsp", result.params);
  json history = json::array();
  for (const auto& r : result.history) history.push_back({{"epoch", r.epoch}, {"loss", r.loss}});
  write_json(dir / "history.json", {{"schema_version", kSchemaVersion}, {"loss", model.task.loss() == LossKind::mse ? "mse" : "cross_entropy"}, {"history", history}});
  const json meta{{"schema_version", kSchemaVersion},
                  {"settings", experiment_settings(exp)},
                  {"model", model},
                  {"data", to_json(src)},
                  {"features", loaded.features},
                  {"context", loaded.context},
                  {"seed", seed},
                  {"test_fraction", test_fraction},
                  {"split", {{"train", ids_of(loaded, a.split.train)}, {"test", ids_of(loaded, a.split.test)}}},
                  {"standardizer", standardizer_json(a.data.standardizer)},
                  {"validation", validation}};
  write_json(dir / "model.json", meta);
  if (auto p = optional_path(s, "json")) {
    write_json(*p, {{"schema_version", kSchemaVersion},
                    {"run", fs::absolute(dir).string()},
                    {"final_loss", result.history.back().loss},
                    {"validation", validation}});
  }
  if (auto p = optional_path(s, "trace")) {
    dump_trace(model, result.params, a.data.test.size() ? a.data.test : a.data.train, exp.train.eval_batch_size, *p);
  }
  out << fmt::format("held-out {}\nrun written to {}\n", metric_text(validation), dir.string());
}

void evaluate_cmd(const json& s, std::ostream& out) {
  const fs::path dir = required_path(s, "run", "--run");
  const json meta = read_json(dir / "model.json");
  if (meta.value("schema_version", 0) != kSchemaVersion) {
    throw ConfigError(fmt::format("{}: unsupported schema_version", (dir / "model.json").string()));
  }
  ExperimentConfig exp = experiment_from_json(meta.at("settings"));
  if (s.contains("eval_batch_size")) exp.train.eval_batch_size = s.at("eval_batch_size").get<std::size_t>();
  const ModelConfig model = meta.at("model").get<ModelConfig>();
  const bool own_data = s.contains("data");
  const DataSource src = own_data ? source_from(s) : data_source_from_json(meta.at("data"), {});
  const LoadedData loaded = src.load(model.task);
  const std::string split = s.value("split", std::string("test"));

  Dataset data;
  if (split == "all") {
    const Standardizer st(stats_from(meta.at("standardizer").at("features")),
                          stats_from(meta.at("standardizer").at("context")));
    std::vector<RawSubject> subjects;
    for (const auto& subj : loaded.subjects) subjects.push_back(impute_context(st.apply(subj)));
    data = build_dataset(subjects, exp.prep);
  } else {
    AssembledData a = assemble_dataset(loaded.subjects, exp.prep, meta.at("test_fraction").get<double>(),
                                       meta.at("seed").get<std::uint64_t>());
    const auto& idx = split == "test" ? a.split.test : a.split.train;
    if (ids_of(loaded, idx) != meta.at("split").at(split).get<std::vector<std::string>>()) {
      throw DataError(fmt::format("dataset does not reproduce the recorded {} split; use --split all", split));
    }
    data = split == "test" ? std::move(a.data.test) : std::move(a.data.train);
  }
  if (data.channels() != model.channels || data.context != model.context) {
    throw DataError(fmt::format("dataset has {} channels / {} context columns, model expects {} / {}",
                                data.channels(), data.context, model.channels, model.context));
  }
  ParamSet params = init_model(model, 0);
  load_checkpoint_into(dir / "checkpoint.ctsp", params);
  const json result = score(model, params, data, exp.train.eval_batch_size);

  out << fmt::format("{} split: {} sequences from {} subjects\n", split, data.size(), source_subjects(data));
  out << metric_text(result) << '\n';
  if (result.contains("metric") && !result.at("metric").is_null()) {
    out << fmt::format("{} (full precision) = {:.17g}\n", result.at("metric_name").get<std::string>(),
                       result.at("metric").get<double>());
    const json& recorded = meta.at("validation");
    if (split == "test" && !own_data && recorded.contains("metric") && !recorded.at("metric").is_null()) {
      out << fmt::format("difference from the train-time value: {:.3g}\n",
                         std::abs(result.at("metric").get<double>() - recorded.at("metric").get<double>()));
    }
  }
  if (auto p = optional_path(s, "json")) {
    write_json(*p, {{"schema_version", kSchemaVersion}, {"run", fs::absolute(dir).string()}, {"split", split},
                    {"result", result}});
  }
  if (auto p = optional_path(s, "trace")) dump_trace(model, params, data, exp.train.eval_batch_size, *p);
}

void cv_cmd(const json& s, std::ostream& out) {
  const ExperimentConfig exp = experiment_from(s);
  const std::size_t folds = s.value("folds", std::size_t{10});
  const std::uint64_t seed = s.value("seed", std::uint64_t{0});
  const std::size_t jobs = s.value("jobs", std::size_t{1});
  const LoadedData loaded = source_from(s).load(exp.model.task);
  const MetricsReport r = cross_validate(loaded.subjects, exp, folds, seed, jobs);
  for (std::size_t f = 0; f < r.folds.size(); ++f) out << fmt::format("fold {:>2}  {} {:.6f}\n", f, r.metric, r.folds[f]);
  out << fmt::format("{}: {:.4f} ± {:.4f} over {} folds\n", r.metric, r.mean, r.std, r.folds.size());
  if (auto p = optional_path(s, "json")) {
    write_json(*p, {{"schema_version", kSchemaVersion},
                    {"settings", experiment_settings(exp)},
                    {"folds", folds},
                    {"seed", seed},
                    {"report", r}});
  }
}

void grid_cmd(const Command& cmd, const json& s, std::ostream& out) {
  if (!cmd.has_config()) throw ConfigError("grid needs --config with the grid definition");
  json g = s;
  g.erase("json");
  g.erase("table");
  const GridConfig grid = grid_from_json(g, {});
  const LoadedData loaded = grid.data.load(grid.base.model.task);
  out << fmt::format("grid '{}': {} cells x {} folds on {} subjects\n", grid.name, grid.cell_count(), grid.folds,
                     loaded.subjects.size());
  const GridReport report = grid_search(loaded.subjects, grid);
  const std::string table = format_table(report);
  out << table;
  if (auto p = optional_path(s, "json")) write_json(*p, to_json(report));
  if (auto p = optional_path(s, "table")) {
    std::ofstream t(*p);
    if (!t) throw Error(fmt::format("cannot write {}", p->string()));
    t << table;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Continuous-time sequence models for irregular, partially observed longitudinal data", "ctsm"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", CTSM_VERSION);
  std::vector<std::unique_ptr<Command>> commands;
  auto add = [&](const std::string& name, const std::string& description) -> Command& {
    commands.push_back(std::make_unique<Command>(app, name, description));
    return *commands.back();
  };

  Command& gen = add("gen-synth", "Generate a synthetic irregular dataset");
  for (const char* f : {"--subjects", "--features", "--min-visits", "--max-visits", "--seed"}) {
    gen.flag(f, Kind::integer, "Generator setting");
  }
  for (const char* f : {"--visit-spacing", "--jitter", "--missingness", "--label-missing", "--noise", "--window"}) {
    gen.flag(f, Kind::real, "Generator setting");
  }
  gen.choice("--task", {"regression", "binary", "multiclass"}, "Label rule");
  gen.flag("--classes", Kind::integer, "Class count for multiclass labels");
  gen.flag("--out", Kind::text, "Dataset CSV to write");
  gen.flag("--context-out", Kind::text, "Context CSV to write (default <out>_context.csv)");
  gen.flag("--truth", Kind::text, "Ground-truth manifest JSON to write");
  gen.handler(gen_synth);

  Command& prep = add("preprocess", "Standardize, split and fit control signals; write the coefficient cache");
  add_data_flags(prep);
  add_prep_flags(prep);
  prep.flag("--test-fraction", Kind::real, "Held-out subject fraction");
  prep.flag("--seed", Kind::integer, "Split seed");
  prep.flag("--cache", Kind::text, "Coefficient cache to write");
  prep.flag("--manifest", Kind::text, "Manifest JSON (default <cache>.json)");
  prep.handler(preprocess);

  Command& interp = add("interpolate", "Sample control signals densely as CSV");
  add_data_flags(interp);
  add_prep_flags(interp);
  interp.flag("--cache", Kind::text, "Read signals from a coefficient cache instead of a dataset");
  interp.flag("--entry", Kind::integer, "Only this signal (index in dataset or cache order)");
  interp.flag("--per-piece", Kind::integer, "Samples per unit interval");
  interp.flag("--out", Kind::text, "CSV to write (default standard output)");
  interp.handler(interpolate);

  Command& tr = add("train", "Train a model; write checkpoint, model.json and history.json");
  add_data_flags(tr);
  add_experiment_flags(tr);
  tr.flag("--test-fraction", Kind::real, "Held-out subject fraction");
  tr.flag("--seed", Kind::integer, "Split, initialization and shuffling seed");
  tr.flag("--out", Kind::text, "Run directory");
  tr.flag("--json", Kind::text, "Result JSON to write");
  tr.flag("--trace", Kind::text, "Solver trace CSV of one held-out batch");
  tr.handler(train_cmd);

  Command& ev = add("evaluate", "Score a trained run on its held-out split or a dataset");
  ev.flag("--run", Kind::text, "Run directory written by train");
  add_data_flags(ev);
  ev.choice("--split", {"test", "train", "all"}, "Subjects to score (test and train need the original data)");
  ev.flag("--eval-batch-size", Kind::integer, "Evaluation batch size");
  ev.flag("--json", Kind::text, "Result JSON to write");
  ev.flag("--trace", Kind::text, "Solver trace CSV of the first batch");
  ev.handler(evaluate_cmd);

  Command& cv = add("cv", "Subject-level k-fold cross-validation");
  add_data_flags(cv);
  add_experiment_flags(cv);
  cv.flag("--folds", Kind::integer, "Fold count");
  cv.flag("--seed", Kind::integer, "Fold and model seed");
  cv.flag("--jobs", Kind::integer, "Folds trained in parallel");
  cv.flag("--json", Kind::text, "Report JSON to write");
  cv.handler(cv_cmd);

  Command& grid = add("grid", "Cross-validated grid search from a JSON grid definition");
  grid.flag("--folds", Kind::integer, "Override the fold count");
  grid.flag("--seed", Kind::integer, "Override the seed");
  grid.flag("--jobs", Kind::integer, "Folds trained in parallel");
  grid.flag("--json", Kind::text, "Ranked report JSON to write");
  grid.flag("--table", Kind::text, "Text table to write");
  grid.accept_any_file_key();
  grid.handler([&grid](const json& s, std::ostream& o) { grid_cmd(grid, s, o); });

  if (!args.empty() && !args.front().starts_with('-')) {
    const bool known = std::any_of(commands.begin(), commands.end(),
                                   [&](const auto& c) { return c->app()->get_name() == args.front(); });
    if (!known) {
      err << "error: unknown subcommand '" << args.front() << "'\n\n" << app.help();
      return kExitUsage;
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) return app.exit(e, out, err);
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  for (const auto& c : commands) {
    if (!c->selected()) continue;
    try {
      c->run(out);
      return kExitOk;
    } catch (const ConfigError& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitRuntime;
    }
  }
  err << app.help();
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace ctsm::cli
