#include "ctsm/models/config.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ctsm/error.hpp"

namespace ctsm {

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::ncde: return "ncde";
    case ModelKind::odernn: return "odernn";
    case ModelKind::latentode: return "latentode";
    case ModelKind::gruode: return "gruode";
    case ModelKind::rnn: return "rnn";
  }
  return "?";
}

ModelKind model_from_string(std::string_view name) {
  for (ModelKind k : {ModelKind::ncde, ModelKind::odernn, ModelKind::latentode, ModelKind::gruode, ModelKind::rnn}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError(fmt::format("unknown model '{}' (ncde|odernn|latentode|gruode|rnn)", name));
}

void ModelConfig::validate() const {
  if (latent < 1 || hidden < 1) throw ConfigError("latent and hidden widths must be >= 1");
  if (channels < 1) throw ConfigError("model needs at least one input channel");
  task.validate();
  solver.validate();
  if (kind == ModelKind::latentode && (causal == CausalMode::recti || is_recti(scheme))) {
    throw ConfigError("latentode encodes whole sequences and cannot use recti control signals");
  }
}

ModelConfig configure_for(ModelConfig config, const Dataset& data) {
  config.channels = data.channels();
  config.context = data.context;
  config.scheme = data.scheme;
  config.causal = data.causal;
  config.validate();
  return config;
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"kind", to_string(c.kind)},
                     {"latent", c.latent},
                     {"hidden", c.hidden},
                     {"embed_layers", c.embed_layers},
                     {"dynamics_layers", c.dynamics_layers},
                     {"channels", c.channels},
                     {"context", c.context},
                     {"task", c.task.name()},
                     {"classes", c.task.classes},
                     {"scheme", to_string(c.scheme)},
                     {"causal", to_string(c.causal)},
                     {"solver",
                      {{"method", to_string(c.solver.method)},
                       {"rtol", c.solver.rtol},
                       {"atol", c.solver.atol},
                       {"initial_step", c.solver.initial_step},
                       {"max_steps", c.solver.max_steps},
                       {"dt", c.solver.dt}}}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.kind = model_from_string(j.at("kind").get<std::string>());
  c.latent = j.at("latent").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.embed_layers = j.value("embed_layers", std::size_t{1});
  c.dynamics_layers = j.value("dynamics_layers", std::size_t{2});
  c.channels = j.at("channels").get<std::size_t>();
  c.context = j.at("context").get<std::size_t>();
  c.task = task_from_string(j.at("task").get<std::string>(), j.value("classes", std::size_t{4}));
  c.scheme = scheme_from_string(j.at("scheme").get<std::string>());
  c.causal = causal_from_string(j.at("causal").get<std::string>());
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    c.solver.method = solver_from_string(s.value("method", std::string("dopri5")));
    c.solver.rtol = s.value("rtol", c.solver.rtol);
    c.solver.atol = s.value("atol", c.solver.atol);
    c.solver.initial_step = s.value("initial_step", c.solver.initial_step);
    c.solver.max_steps = s.value("max_steps", c.solver.max_steps);
    c.solver.dt = s.value("dt", c.solver.dt);
  }
}

}  // namespace ctsm
