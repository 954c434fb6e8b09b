#include "ctsm/harness/experiment.hpp"

#include <cmath>
#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ctsm/error.hpp"

namespace ctsm {

MetricsReport summarize(std::string metric, std::vector<double> folds) {
  MetricsReport r{std::move(metric), std::move(folds), 0.0, 0.0};
  const auto n = static_cast<double>(r.folds.size());
  if (r.folds.empty()) return r;
  r.mean = std::accumulate(r.folds.begin(), r.folds.end(), 0.0) / n;
  if (r.folds.size() > 1) {
    double ss = 0.0;
    for (double v : r.folds) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / (n - 1.0));
  }
  return r;
}

MetricsReport cross_validate(std::span<const RawSubject> subjects, const ExperimentConfig& config, std::size_t folds,
                             std::uint64_t seed, std::size_t jobs) {
  const auto parts = kfold(subjects.size(), folds, seed);
  std::vector<double> values(folds, 0.0);
  std::vector<std::exception_ptr> errors(folds);

  auto run_fold = [&](std::size_t f) {
    try {
      std::vector<std::size_t> train_idx;
      for (std::size_t g = 0; g < folds; ++g) {
        if (g != f) train_idx.insert(train_idx.end(), parts[g].begin(), parts[g].end());
      }
      std::sort(train_idx.begin(), train_idx.end());
      const auto tr = select(subjects, train_idx);
      const auto te = select(subjects, parts[f]);
      const auto prepared = prepare(tr, te, config.prep);
      const ModelConfig model = configure_for(config.model, prepared.train);
      TrainConfig tc = config.train;
      tc.seed = seed + f;
      const auto trained = train(model, prepared.train, tc);
      values[f] = evaluate(model, trained.params, prepared.test, tc.eval_batch_size).metric;
    } catch (...) {
      errors[f] = std::current_exception();
    }
  };

  jobs = std::max<std::size_t>(1, std::min(jobs, folds));
  if (jobs == 1) {
    for (std::size_t f = 0; f < folds; ++f) run_fold(f);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < jobs; ++w) {
      pool.emplace_back([&] {
        for (std::size_t f = next++; f < folds; f = next++) run_fold(f);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return summarize(metric_name(config.model.task), std::move(values));
}

void to_json(nlohmann::json& j, const MetricsReport& r) {
  j = nlohmann::json{{"metric", r.metric}, {"folds", r.folds}, {"mean", r.mean}, {"std", r.std}};
}

void apply_setting(ExperimentConfig& c, const std::string& key, const nlohmann::json& v) {
  try {
    if (key == "model") {
      c.model.kind = model_from_string(v.get<std::string>());
    } else if (key == "latent") {
      c.model.latent = v.get<std::size_t>();
    } else if (key == "hidden") {
      c.model.hidden = v.get<std::size_t>();
    } else if (key == "embed_layers") {
      c.model.embed_layers = v.get<std::size_t>();
    } else if (key == "dynamics_layers") {
      c.model.dynamics_layers = v.get<std::size_t>();
    } else if (key == "epochs") {
      c.train.epochs = v.get<std::size_t>();
    } else if (key == "batch_size") {
      c.train.batch_size = v.get<std::size_t>();
    } else if (key == "eval_batch_size") {
      c.train.eval_batch_size = v.get<std::size_t>();
    } else if (key == "lr") {
      if (v.is_number()) {
        c.train.adam.set_all(v.get<double>());
      } else {
        const auto lrs = v.get<std::vector<double>>();
        if (lrs.size() != 3) throw ConfigError("lr list must be [embedding, dynamics, head]");
        c.train.adam.lr_embedding = lrs[0];
        c.train.adam.lr_dynamics = lrs[1];
        c.train.adam.lr_head = lrs[2];
      }
    } else if (key == "scheme") {
      c.prep.scheme = scheme_from_string(v.get<std::string>());
    } else if (key == "causal") {
      if (v.is_null() || v.get<std::string>() == "auto") {
        c.prep.causal.reset();
      } else {
        c.prep.causal = causal_from_string(v.get<std::string>());
      }
    } else if (key == "standardize") {
      c.prep.standardize = v.get<bool>();
    } else if (key == "impute") {
      c.prep.impute = impute_from_string(v.get<std::string>());
    } else if (key == "task") {
      c.model.task = task_from_string(v.get<std::string>(), c.model.task.classes);
    } else if (key == "classes") {
      c.model.task.classes = v.get<std::size_t>();
      c.model.task.validate();
    } else if (key == "solver") {
      c.model.solver.method = solver_from_string(v.get<std::string>());
    } else if (key == "rtol") {
      c.model.solver.rtol = v.get<double>();
    } else if (key == "atol") {
      c.model.solver.atol = v.get<double>();
    } else if (key == "dt") {
      c.model.solver.dt = v.get<double>();
    } else {
      throw ConfigError(fmt::format("unknown experiment setting '{}'", key));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("setting '{}': {}", key, e.what()));
  }
}

ExperimentConfig experiment_from_json(const nlohmann::json& j, ExperimentConfig base) {
  if (!j.is_object()) throw ConfigError("experiment settings must be a JSON object");
  if (j.contains("task")) apply_setting(base, "task", j.at("task"));
  if (j.contains("classes")) apply_setting(base, "classes", j.at("classes"));
  for (const auto& [k, v] : j.items()) {
    if (k != "task" && k != "classes") apply_setting(base, k, v);
  }
  return base;
}

nlohmann::json experiment_settings(const ExperimentConfig& c) {
  const auto& a = c.train.adam;
  return {{"model", to_string(c.model.kind)},
          {"latent", c.model.latent},
          {"hidden", c.model.hidden},
          {"embed_layers", c.model.embed_layers},
          {"dynamics_layers", c.model.dynamics_layers},
          {"epochs", c.train.epochs},
          {"batch_size", c.train.batch_size},
          {"eval_batch_size", c.train.eval_batch_size},
          {"lr", {a.lr_embedding, a.lr_dynamics, a.lr_head}},
          {"scheme", to_string(c.prep.scheme)},
          {"causal", c.prep.causal ? nlohmann::json(to_string(*c.prep.causal)) : nlohmann::json("auto")},
          {"standardize", c.prep.standardize},
          {"impute", to_string(c.prep.impute)},
          {"task", c.model.task.name()},
          {"classes", c.model.task.classes},
          {"solver", to_string(c.model.solver.method)},
          {"rtol", c.model.solver.rtol},
          {"atol", c.model.solver.atol},
          {"dt", c.model.solver.dt}};
}

}  // namespace ctsm
