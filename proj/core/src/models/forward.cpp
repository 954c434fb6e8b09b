#include "ctsm/models/model.hpp"

#include <fmt/format.h>

#include "ctsm/error.hpp"

namespace ctsm {

namespace {

class Runner {
 public:
  Runner(const ModelConfig& cfg, const ParamBinding& params, const Batch& batch)
      : cfg_(cfg), params_(params), batch_(batch), tape_(params.tape()), b_(batch.size()), c_(cfg.channels) {
    cfg_.validate();
    if (batch.context.rank() != 2 || batch.context.dim(1) != cfg.context) {
      throw DimensionError(fmt::format("batch context has shape {}, model expects (B, {})",
                                       to_string(batch.context.shape()), cfg.context));
    }
    for (const auto* s : batch.subjects) {
      if (cfg.continuous()) {
        if (s->signal.channel_count() != c_) {
          throw DimensionError(fmt::format("subject '{}' has {} channels, model expects {}", s->id,
                                           s->signal.channel_count(), c_));
        }
        if (s->signal.roles().back() != ChannelRole::time) {
          throw DimensionError("the last control-signal channel must be time");
        }
      } else if (s->rows.size() != batch.length * c_) {
        throw DimensionError(fmt::format("subject '{}' rows do not match {} channels", s->id, c_));
      }
      if (s->signal.knot_count() != batch.length && cfg.continuous()) {
        throw DimensionError(fmt::format("subject '{}' has {} knots, batch length is {}", s->id,
                                         s->signal.knot_count(), batch.length));
      }
    }
    if (cfg.context > 0) context_ = tape_.constant(batch.context);
    solver_ = cfg.solver;
    solver_.dense_output = false;
  }

  std::size_t steps(const ForwardOptions& o) const {
    const std::size_t n = batch_.length;
    if (o.steps > n) throw UsageError(fmt::format("requested {} prediction steps but series has {}", o.steps, n));
    return o.steps == 0 ? n : o.steps;
  }

  Var with_context(std::initializer_list<Var> parts) const {
    std::vector<Var> all(parts);
    if (context_.valid()) all.push_back(context_);
    return concat(std::span<const Var>(all));
  }

  // Channel values (B, C) on a fixed piece.
  Var signal_value(std::size_t piece, double s) const {
    Tensor out(Shape{b_, c_});
    for (std::size_t r = 0; r < b_; ++r) {
      batch_.subjects[r]->signal.evaluate_in_piece(piece, s, out.data().subspan(r * c_, c_));
    }
    return tape_.constant(std::move(out));
  }

  Var signal_slope(std::size_t piece, double s) const {
    Tensor out(Shape{b_, c_});
    for (std::size_t r = 0; r < b_; ++r) {
      batch_.subjects[r]->signal.derivative_in_piece(piece, s, out.data().subspan(r * c_, c_));
    }
    return tape_.constant(std::move(out));
  }

  // psi(s) and dpsi/ds, each (B, 1).
  std::pair<Var, Var> time_at(std::size_t piece, double s) const {
    Tensor t(Shape{b_, 1}), dt(Shape{b_, 1});
    const double u = s - static_cast<double>(piece);
    for (std::size_t r = 0; r < b_; ++r) {
      const CubicPiece& p = batch_.subjects[r]->signal.piece(c_ - 1, piece);
      t[r] = p.value(u);
      dt[r] = p.slope(u);
    }
    return {tape_.constant(std::move(t)), tape_.constant(std::move(dt))};
  }

  Var knot_value(std::size_t i) const {
    Tensor out(Shape{b_, c_});
    for (std::size_t r = 0; r < b_; ++r) {
      batch_.subjects[r]->signal.evaluate(static_cast<double>(i), out.data().subspan(r * c_, c_));
    }
    return tape_.constant(std::move(out));
  }

  Var row(std::size_t i) const {
    Tensor out(Shape{b_, c_});
    for (std::size_t r = 0; r < b_; ++r) {
      const auto& rows = batch_.subjects[r]->rows;
      std::copy_n(rows.begin() + static_cast<std::ptrdiff_t>(i * c_), c_, out.data().begin() + static_cast<std::ptrdiff_t>(r * c_));
    }
    return tape_.constant(std::move(out));
  }

  // True when the driving channels are constant on `piece` for every
  // subject, so the dynamics vanish identically there.
  bool static_piece(std::size_t piece, bool all_channels) const {
    for (const auto* s : batch_.subjects) {
      const auto row = s->signal.piece_row(piece);
      const std::size_t first = all_channels ? 0 : c_ - 1;
      for (std::size_t c = first; c < c_; ++c) {
        if (row[c].a != 0.0 || row[c].b != 0.0 || row[c].c != 0.0) return false;
      }
    }
    return true;
  }

  Var solve_forward(const Dynamics& f, const Var& h, std::size_t piece, std::vector<StepRecord>* trace) const {
    const std::array<double, 1> end{static_cast<double>(piece + 1)};
    auto r = odesolve(f, h, static_cast<double>(piece), end, solver_);
    if (trace) trace->insert(trace->end(), r.trace.begin(), r.trace.end());
    return r.states.front();
  }

  Var solve_backward(const Dynamics& f, const Var& h, std::size_t piece, std::vector<StepRecord>* trace) const {
    std::vector<StepRecord> local;
    Var out = solve_backwards(f, h, static_cast<double>(piece + 1), static_cast<double>(piece), solver_,
                              trace ? &local : nullptr);
    if (trace) trace->insert(trace->end(), local.begin(), local.end());
    return out;
  }

  Var mask_update(const Var& updated, const Var& previous, std::size_t i) const {
    Tensor m(Shape{b_, 1}), om(Shape{b_, 1});
    for (std::size_t r = 0; r < b_; ++r) {
      m[r] = batch_.mask[r * batch_.length + i];
      om[r] = 1.0 - m[r];
    }
    return add(mul(updated, tape_.constant(std::move(m))), mul(previous, tape_.constant(std::move(om))));
  }

  Var zeros() const { return tape_.constant(Tensor(Shape{b_, cfg_.latent}, 0.0)); }

  // f(h, psi(s)) dpsi/ds.
  Dynamics time_field(const BoundMlp& mlp, std::size_t piece) const {
    return [this, &mlp, piece](double s, const Var& h) {
      auto [t, dt] = time_at(piece, s);
      return mul(mlp(with_context({h, t})), dt);
    };
  }

  Var ncde_field(const BoundMlp& mlp, std::size_t piece, double s, const Var& h) const {
    auto [t, dt] = time_at(piece, s);
    (void)dt;
    const Var m = reshape(mlp(with_context({h, t})), Shape{b_, cfg_.latent, c_});
    return batched_matvec(m, signal_slope(piece, s));
  }

  Var gru_field(std::size_t piece, double s, const Var& h) const {
    const Var x = signal_value(piece, s);
    auto [t, dt] = time_at(piece, s);
    (void)t;
    auto gate = [&](const char* g, const Var& hin) {
      Var acc = add(matmul(x, params_[fmt::format("gru.W{}x", g)]), matmul(hin, params_[fmt::format("gru.W{}h", g)]));
      if (context_.valid()) acc = add(acc, matmul(context_, params_[fmt::format("gru.W{}c", g)]));
      return add(acc, params_[fmt::format("gru.b{}", g)]);
    };
    const Var r = sigmoid(gate("r", h));
    const Var z = sigmoid(gate("z", h));
    const Var g = tanh(gate("g", mul(r, h)));
    const Var one = tape_.constant(Tensor::scalar(1.0));
    return mul(mul(sub(one, z), sub(g, h)), dt);
  }

  Var head(const Var& h) const { return prediction_head(params_, h, cfg_.task); }

  Var ncde(const ForwardOptions& o) const {
    const std::size_t n = steps(o);
    const BoundMlp embed(embed_spec(cfg_), params_, "embed");
    const BoundMlp field(field_spec(cfg_), params_, "field");
    Var h = embed(with_context({knot_value(0)}));
    std::vector<Var> preds{head(h)};
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!static_piece(i, true)) {
        const Dynamics f = [&, i](double s, const Var& y) { return ncde_field(field, i, s, y); };
        h = solve_forward(f, h, i, o.trace);
      }
      preds.push_back(head(h));
    }
    return stack_steps(preds);
  }

  Var odernn(const ForwardOptions& o) const {
    const std::size_t n = steps(o);
    const BoundMlp update(update_spec(cfg_), params_, "update");
    const BoundMlp field(field_spec(cfg_), params_, "field");
    Var h = zeros();
    std::vector<Var> preds;
    for (std::size_t i = 0; i < n; ++i) {
      Var ht = h;
      if (i > 0 && !static_piece(i - 1, false)) ht = solve_forward(time_field(field, i - 1), h, i - 1, o.trace);
      h = mask_update(update(with_context({ht, knot_value(i)})), h, i);
      preds.push_back(head(h));
    }
    return stack_steps(preds);
  }

  Var encode(std::vector<StepRecord>* trace) const {
    const BoundMlp update(update_spec(cfg_), params_, "encoder.update");
    const BoundMlp field(field_spec(cfg_), params_, "encoder.field");
    Var h = zeros();
    for (std::size_t i = batch_.length; i-- > 0;) {
      Var ht = h;
      if (i + 1 < batch_.length && !static_piece(i, false)) ht = solve_backward(time_field(field, i), h, i, trace);
      h = mask_update(update(with_context({ht, knot_value(i)})), h, i);
    }
    return h;
  }

  Var latentode(const ForwardOptions& o) const {
    const std::size_t n = steps(o);
    const BoundMlp field(field_spec(cfg_), params_, "field");
    Var h = encode(o.trace);
    std::vector<Var> preds{head(h)};
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!static_piece(i, false)) h = solve_forward(time_field(field, i), h, i, o.trace);
      preds.push_back(head(h));
    }
    return stack_steps(preds);
  }

  Var gruode(const ForwardOptions& o) const {
    const std::size_t n = steps(o);
    const BoundMlp embed(embed_spec(cfg_), params_, "embed");
    Var h = embed(with_context({knot_value(0)}));
    std::vector<Var> preds{head(h)};
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!static_piece(i, false)) {
        const Dynamics f = [&, i](double s, const Var& y) { return gru_field(i, s, y); };
        h = solve_forward(f, h, i, o.trace);
      }
      preds.push_back(head(h));
    }
    return stack_steps(preds);
  }

  Var rnn(const ForwardOptions& o) const {
    const std::size_t n = steps(o);
    const BoundMlp cell(rnn_cell_spec(cfg_), params_, "cell");
    Var h = zeros();
    std::vector<Var> preds;
    for (std::size_t i = 0; i < n; ++i) {
      h = cell(with_context({h, row(i)}));
      preds.push_back(head(h));
    }
    return stack_steps(preds);
  }

 private:
  const ModelConfig& cfg_;
  const ParamBinding& params_;
  const Batch& batch_;
  Tape& tape_;
  std::size_t b_;
  std::size_t c_;
  Var context_;
  SolverConfig solver_;
};

}  // namespace

Var prediction_head(const ParamBinding& params, const Var& h, const TaskSpec& task) {
  const Var& w = params["head.w0"];
  return activate(add(matmul(h, w), params["head.b0"]), task.head_activation());
}

Var forward(const ModelConfig& config, const ParamBinding& params, const Batch& batch, const ForwardOptions& options) {
  Runner run(config, params, batch);
  switch (config.kind) {
    case ModelKind::ncde: return run.ncde(options);
    case ModelKind::odernn: return run.odernn(options);
    case ModelKind::latentode: return run.latentode(options);
    case ModelKind::gruode: return run.gruode(options);
    case ModelKind::rnn: return run.rnn(options);
  }
  throw ConfigError("unknown model kind");
}

Var ncde_vector_field(const ModelConfig& config, const ParamBinding& params, const Batch& batch, std::size_t piece,
                      double s, const Var& h) {
  if (config.kind != ModelKind::ncde) throw UsageError("ncde_vector_field needs an ncde config");
  Runner run(config, params, batch);
  const BoundMlp field(field_spec(config), params, "field");
  return run.ncde_field(field, piece, s, h);
}

Var latent_encode(const ModelConfig& config, const ParamBinding& params, const Batch& batch) {
  if (config.kind != ModelKind::latentode) throw UsageError("latent_encode needs a latentode config");
  return Runner(config, params, batch).encode(nullptr);
}

}  // namespace ctsm
