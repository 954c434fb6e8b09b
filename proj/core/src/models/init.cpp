#include "ctsm/models/model.hpp"

#include <random>

namespace ctsm {

MlpSpec embed_spec(const ModelConfig& c) {
  return {c.channels + c.context, c.hidden, c.embed_layers, c.latent, Activation::none};
}

MlpSpec field_spec(const ModelConfig& c) {
  const std::size_t out = c.kind == ModelKind::ncde ? c.latent * c.channels : c.latent;
  return {c.latent + 1 + c.context, c.hidden, c.dynamics_layers, out, Activation::tanh};
}

MlpSpec update_spec(const ModelConfig& c) {
  return {c.latent + c.channels + c.context, c.hidden, c.embed_layers, c.latent, Activation::none};
}

MlpSpec rnn_cell_spec(const ModelConfig& c) {
  return {c.latent + c.channels + c.context, c.hidden, c.embed_layers, c.latent, Activation::none};
}

ParamSet init_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  ParamSet p;
  switch (config.kind) {
    case ModelKind::ncde:
      init_mlp(p, "embed", embed_spec(config), ParamGroup::embedding, rng);
      init_mlp(p, "field", field_spec(config), ParamGroup::dynamics, rng);
      break;
    case ModelKind::odernn:
      init_mlp(p, "update", update_spec(config), ParamGroup::embedding, rng);
      init_mlp(p, "field", field_spec(config), ParamGroup::dynamics, rng);
      break;
    case ModelKind::latentode:
      init_mlp(p, "encoder.update", update_spec(config), ParamGroup::embedding, rng);
      init_mlp(p, "encoder.field", field_spec(config), ParamGroup::dynamics, rng);
      init_mlp(p, "field", field_spec(config), ParamGroup::dynamics, rng);
      break;
    case ModelKind::gruode: {
      init_mlp(p, "embed", embed_spec(config), ParamGroup::embedding, rng);
      const std::size_t h = config.latent;
      for (const char* gate : {"r", "z", "g"}) {
        p.add(std::string("gru.W") + gate + "x", ParamGroup::dynamics, glorot_uniform(config.channels, h, rng));
        p.add(std::string("gru.W") + gate + "h", ParamGroup::dynamics, glorot_uniform(h, h, rng));
        if (config.context > 0) {
          p.add(std::string("gru.W") + gate + "c", ParamGroup::dynamics, glorot_uniform(config.context, h, rng));
        }
        p.add(std::string("gru.b") + gate, ParamGroup::dynamics, Tensor(Shape{h}, 0.0));
      }
      break;
    }
    case ModelKind::rnn:
      init_mlp(p, "cell", rnn_cell_spec(config), ParamGroup::dynamics, rng);
      break;
  }
  init_mlp(p, "head", {config.latent, 1, 0, config.task.output_width(), config.task.head_activation()},
           ParamGroup::head, rng);
  return p;
}

}  // namespace ctsm
