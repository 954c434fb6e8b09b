#include <doctest.h>

#include <cmath>
#include <functional>
#include <sstream>

#include "ctsm/error.hpp"
#include "ctsm/tensor/adam.hpp"
#include "ctsm/tensor/checkpoint.hpp"
#include "ctsm/tensor/loss.hpp"
#include "ctsm/tensor/mlp.hpp"
#include "ctsm/tensor/ops.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace ctsm;
using ctsm::testing::Gen;

namespace {

using OpFn = std::function<Var(Tape&, const std::vector<Var>&)>;

Tensor random_tensor(Gen& g, Shape shape, double lo = -1.5, double hi = 1.5) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = g.uniform(lo, hi);
  return t;
}

// Contracts op(inputs) with fixed random weights into a scalar.
double contracted(const OpFn& op, const std::vector<Tensor>& inputs, const Tensor& w) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.leaf(t, false));
  const Tensor out = op(tape, vars).value();
  double acc = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) acc += out[i] * w[i];
  return acc;
}

// Compares reverse-mode gradients of every input with central differences.
void check_gradients(const OpFn& op, std::vector<Tensor> inputs, std::uint64_t seed, double tol = 1e-6) {
  Gen g(seed);
  Tape tape;
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.leaf(t));
  const Var out = op(tape, vars);
  const Tensor w = random_tensor(g, out.shape());
  const Var loss = sum(mul(out, tape.constant(w)));
  tape.backward(loss);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor grad = tape.grad(vars[k]);
    REQUIRE(grad.shape() == inputs[k].shape());
    auto f = [&](const std::vector<double>& flat) {
      auto in = inputs;
      in[k] = Tensor(inputs[k].shape(), flat);
      return contracted(op, in, w);
    };
    const auto fd = oracle::central_gradient(f, inputs[k].values(), 1e-6);
    for (std::size_t i = 0; i < fd.size(); ++i) {
      INFO("input " << k << " element " << i);
      CHECK(std::abs(grad[i] - fd[i]) <= tol * std::max(1.0, std::abs(fd[i])));
    }
  }
}

}  // namespace

TEST_SUITE("tensor") {
  TEST_CASE("shapes, element access and scalars") {
    const Tensor m = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
    CHECK(m.rank() == 2);
    CHECK(m.dim(0) == 2);
    CHECK(m.dim(1) == 3);
    CHECK(m.at(1, 2) == 6.0);
    CHECK(Tensor::scalar(2.5).item() == 2.5);
    CHECK(numel(Shape{2, 3, 4}) == 24);
    CHECK(to_string(Shape{2, 3}) == "(2, 3)");
    CHECK_THROWS_AS(Tensor(Shape{2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
    CHECK_THROWS_AS(m.item(), DimensionError);
  }

  TEST_CASE("broadcast shapes align on the right") {
    CHECK(broadcast_shape({4, 3}, {3}) == Shape{4, 3});
    CHECK(broadcast_shape({4, 1}, {1, 5}) == Shape{4, 5});
    CHECK(broadcast_shape({2, 3, 4}, {3, 1}) == Shape{2, 3, 4});
    CHECK_THROWS_AS(broadcast_shape({4, 3}, {2}), DimensionError);
  }

  TEST_CASE("elementwise ops with broadcasting match central differences") {
    Gen g(1);
    check_gradients([](Tape&, const std::vector<Var>& v) { return add(v[0], v[1]); },
                    {random_tensor(g, {3, 4}), random_tensor(g, {4})}, 11);
    check_gradients([](Tape&, const std::vector<Var>& v) { return sub(v[0], v[1]); },
                    {random_tensor(g, {3, 1}), random_tensor(g, {1, 5})}, 12);
    check_gradients([](Tape&, const std::vector<Var>& v) { return mul(v[0], v[1]); },
                    {random_tensor(g, {2, 3, 4}), random_tensor(g, {3, 1})}, 13);
    check_gradients([](Tape&, const std::vector<Var>& v) { return neg(scale(v[0], 2.5)); },
                    {random_tensor(g, {5})}, 14);
  }

  TEST_CASE("matrix products match central differences") {
    Gen g(2);
    check_gradients([](Tape&, const std::vector<Var>& v) { return matmul(v[0], v[1]); },
                    {random_tensor(g, {3, 4}), random_tensor(g, {4, 2})}, 21);
    check_gradients([](Tape&, const std::vector<Var>& v) { return batched_matvec(v[0], v[1]); },
                    {random_tensor(g, {2, 3, 4}), random_tensor(g, {2, 4})}, 22);
  }

  TEST_CASE("activations match central differences") {
    Gen g(3);
    // relu is checked away from its kink
    Tensor away = random_tensor(g, {4, 3}, 0.1, 1.0);
    for (std::size_t i = 0; i < away.size(); i += 2) away[i] = -away[i];
    check_gradients([](Tape&, const std::vector<Var>& v) { return relu(v[0]); }, {away}, 31);
    check_gradients([](Tape&, const std::vector<Var>& v) { return tanh(v[0]); }, {random_tensor(g, {4, 3})}, 32);
    check_gradients([](Tape&, const std::vector<Var>& v) { return sigmoid(v[0]); }, {random_tensor(g, {4, 3})}, 33);
    check_gradients([](Tape&, const std::vector<Var>& v) { return softmax(v[0]); }, {random_tensor(g, {4, 3})}, 34);
  }

  TEST_CASE("softmax rows sum to one and are shift invariant") {
    Tape tape;
    const Var x = tape.leaf(Tensor::matrix({{1.0, 2.0, 3.0}, {1000.0, 1001.0, 1002.0}}), false);
    const Tensor s = softmax(x).value();
    CHECK(s.at(0, 0) + s.at(0, 1) + s.at(0, 2) == doctest::Approx(1.0).epsilon(1e-15));
    for (std::size_t j = 0; j < 3; ++j) CHECK(s.at(0, j) == doctest::Approx(s.at(1, j)).epsilon(1e-12));
  }

  TEST_CASE("reductions and reshaping match central differences") {
    Gen g(4);
    check_gradients([](Tape&, const std::vector<Var>& v) { return sum(v[0]); }, {random_tensor(g, {3, 2})}, 41);
    check_gradients([](Tape&, const std::vector<Var>& v) { return mean(v[0]); }, {random_tensor(g, {3, 2})}, 42);
    check_gradients([](Tape&, const std::vector<Var>& v) { return concat({v[0], v[1], v[0]}); },
                    {random_tensor(g, {2, 3}), random_tensor(g, {2, 1})}, 43);
    check_gradients([](Tape&, const std::vector<Var>& v) { return slice_last(v[0], 1, 3); },
                    {random_tensor(g, {2, 4})}, 44);
    check_gradients([](Tape&, const std::vector<Var>& v) { return reshape(v[0], {3, 2, 2}); },
                    {random_tensor(g, {3, 4})}, 45);
    check_gradients(
        [](Tape&, const std::vector<Var>& v) {
          const std::vector<Var> steps{v[0], v[1], v[0]};
          return stack_steps(steps);
        },
        {random_tensor(g, {2, 3}), random_tensor(g, {2, 3})}, 46);
  }

  TEST_CASE("linear combination is one node with the expected value and gradient") {
    Gen g(5);
    check_gradients(
        [](Tape&, const std::vector<Var>& v) {
          const std::vector<Var> terms{v[1], v[2]};
          const std::vector<double> coef{0.5, -2.0};
          return linear_combination(v[0], terms, coef);
        },
        {random_tensor(g, {2, 3}), random_tensor(g, {2, 3}), random_tensor(g, {2, 3})}, 51);
    Tape tape;
    const Var a = tape.leaf(Tensor::vector({1, 2}));
    const Var b = tape.leaf(Tensor::vector({3, 4}));
    const std::size_t before = tape.size();
    const std::vector<Var> terms{a, b};
    const std::vector<double> coef{2.0, 1.0};
    const Var c = linear_combination(terms, coef);
    CHECK(tape.size() == before + 1);
    CHECK(c.value() == Tensor::vector({5, 8}));
  }

  TEST_CASE("gradients accumulate over fan-out and zero_grad resets them") {
    Tape tape;
    const Var x = tape.leaf(Tensor::vector({3.0}));
    const Var y = sum(mul(x, x) + x);
    tape.backward(y);
    CHECK(tape.grad(x)[0] == doctest::Approx(7.0));
    tape.zero_grad();
    tape.backward(y);
    CHECK(tape.grad(x)[0] == doctest::Approx(7.0));
  }

  TEST_CASE("no-grad guard and truncation") {
    Tape tape;
    const Var x = tape.leaf(Tensor::vector({1.0, 2.0}));
    {
      NoGradGuard guard(tape);
      const Var y = mul(x, x);
      CHECK_FALSE(y.requires_grad());
    }
    CHECK(tape.recording());
    const std::size_t mark = tape.mark();
    (void)add(x, x);
    CHECK(tape.size() == mark + 1);
    tape.truncate(mark);
    CHECK(tape.size() == mark);
    const Var z = sum(x);
    tape.backward(z);
    CHECK(tape.grad(x) == Tensor::vector({1.0, 1.0}));
  }

  TEST_CASE("backward needs a scalar root") {
    Tape tape;
    const Var x = tape.leaf(Tensor::vector({1.0, 2.0}));
    CHECK_THROWS_AS(tape.backward(x), DimensionError);
  }

  TEST_CASE("dimension mismatches are reported") {
    Tape tape;
    const Var a = tape.leaf(Tensor(Shape{2, 3}));
    const Var b = tape.leaf(Tensor(Shape{2, 3}));
    CHECK_THROWS_AS(matmul(a, b), DimensionError);
    CHECK_THROWS_AS(concat({a, tape.leaf(Tensor(Shape{3, 1}))}), DimensionError);
    CHECK_THROWS_AS(slice_last(a, 2, 4), DimensionError);
  }
}

TEST_SUITE("loss") {
  TEST_CASE("weighted mse by hand") {
    Tape tape;
    const Var p = tape.leaf(Tensor::vector({1.0, 2.0, 4.0}));
    const Var l = weighted_loss(p, Tensor::vector({0.0, 2.0, 0.0}), Tensor::vector({1.0, 1.0, 0.0}), LossKind::mse);
    CHECK(l.value().item() == doctest::Approx(0.5));
    tape.backward(l);
    const Tensor g = tape.grad(p);
    CHECK(g[0] == doctest::Approx(1.0));
    CHECK(g[1] == doctest::Approx(0.0));
    CHECK(g[2] == 0.0);
  }

  TEST_CASE("weighted bce by hand") {
    Tape tape;
    const Var p = tape.leaf(Tensor::vector({0.8, 0.3}));
    const Var l = weighted_loss(p, Tensor::vector({1.0, 0.0}), Tensor::vector({1.0, 1.0}), LossKind::bce);
    CHECK(l.value().item() == doctest::Approx(-(std::log(0.8) + std::log(0.7)) / 2.0));
  }

  TEST_CASE("weighted cross entropy by hand, zero weight contributes nothing") {
    Tape tape;
    const Var p = tape.leaf(Tensor::matrix({{0.7, 0.2, 0.1}, {0.1, 0.1, 0.8}}));
    const Var l = weighted_loss(p, Tensor::matrix({{1, 0, 0}, {0, 1, 0}}), Tensor::vector({1.0, 0.0}), LossKind::ce);
    CHECK(l.value().item() == doctest::Approx(-std::log(0.7)));
    tape.backward(l);
    const Tensor g = tape.grad(p);
    for (std::size_t k = 3; k < 6; ++k) CHECK(g[k] == 0.0);
  }

  TEST_CASE("all-zero weights give zero loss and gradient") {
    Tape tape;
    const Var p = tape.leaf(Tensor::vector({0.4, 0.6}));
    const Var l = weighted_loss(p, Tensor::vector({1.0, 0.0}), Tensor::vector({0.0, 0.0}), LossKind::bce);
    CHECK(l.value().item() == 0.0);
    tape.backward(l);
    CHECK(tape.grad(p) == Tensor::vector({0.0, 0.0}));
  }

  TEST_CASE("loss gradients match central differences") {
    Gen g(6);
    const Tensor label = Tensor::vector({0.0, 1.0, 1.0, 0.0});
    const Tensor weight = Tensor::vector({1.0, 0.0, 1.0, 1.0});
    for (LossKind kind : {LossKind::mse, LossKind::bce}) {
      check_gradients([&](Tape&, const std::vector<Var>& v) { return weighted_loss(sigmoid(v[0]), label, weight, kind); },
                      {random_tensor(g, {4})}, 61);
    }
    const Tensor onehot = Tensor::matrix({{0, 1, 0}, {1, 0, 0}});
    check_gradients(
        [&](Tape&, const std::vector<Var>& v) {
          return weighted_loss(softmax(v[0]), onehot, Tensor::vector({1.0, 1.0}), LossKind::ce);
        },
        {random_tensor(g, {2, 3})}, 62);
  }
}

TEST_SUITE("adam") {
  TEST_CASE("first step matches the bias-corrected update by hand") {
    ParamSet ps;
    ps.add("w", ParamGroup::dynamics, Tensor::vector({1.0, -1.0}));
    ps.add("h", ParamGroup::head, Tensor::vector({0.0}));
    AdamConfig cfg;
    cfg.lr_dynamics = 0.1;
    cfg.lr_head = 0.01;
    AdamState st = AdamState::zeros_like(ps);
    const std::vector<Tensor> grads{Tensor::vector({0.5, -2.0}), Tensor::vector({3.0})};
    adam_step(ps, grads, st, cfg);
    // m_hat = g, v_hat = g^2 after one step, so each entry moves by lr * sign(g)
    CHECK(ps[0].value[0] == doctest::Approx(0.9).epsilon(1e-7));
    CHECK(ps[0].value[1] == doctest::Approx(-0.9).epsilon(1e-7));
    CHECK(ps[1].value[0] == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(st.step == 1);

    // second step, same gradient: closed form of the moment recursions
    const double p1 = ps[0].value[0];
    adam_step(ps, grads, st, cfg);
    const double m = (0.1 * 0.9 + 0.1) * 0.5 / (1 - 0.81);
    const double v = (0.001 * 0.999 + 0.001) * 0.25 / (1 - 0.999 * 0.999);
    CHECK(ps[0].value[0] == doctest::Approx(p1 - 0.1 * m / (std::sqrt(v) + 1e-8)).epsilon(1e-12));
  }

  TEST_CASE("zero learning rate leaves parameters unchanged") {
    ParamSet ps;
    ps.add("w", ParamGroup::embedding, Tensor::vector({1.0, 2.0}));
    AdamConfig cfg;
    cfg.set_all(0.0);
    AdamState st = AdamState::zeros_like(ps);
    adam_step(ps, std::vector<Tensor>{Tensor::vector({5.0, -5.0})}, st, cfg);
    CHECK(ps[0].value == Tensor::vector({1.0, 2.0}));
  }

  TEST_CASE("non-finite gradients and shape mismatches are rejected") {
    ParamSet ps;
    ps.add("w", ParamGroup::embedding, Tensor::vector({1.0}));
    AdamState st = AdamState::zeros_like(ps);
    CHECK_THROWS_AS(adam_step(ps, std::vector<Tensor>{Tensor::vector({NAN})}, st, {}), DivergenceError);
    CHECK_THROWS_AS(adam_step(ps, std::vector<Tensor>{Tensor::vector({1.0, 2.0})}, st, {}), DimensionError);
  }
}

TEST_SUITE("checkpoint") {
  TEST_CASE("round trip preserves names, shapes and bits") {
    Gen g(7);
    ParamSet ps;
    ps.add("embed.w0", ParamGroup::embedding, random_tensor(g, {3, 4}));
    ps.add("head.b0", ParamGroup::head, random_tensor(g, {1}));
    ps.add("scalar", ParamGroup::dynamics, Tensor::scalar(std::nextafter(1.0, 2.0)));
    std::stringstream buf;
    write_checkpoint(buf, ps);
    const auto back = read_checkpoint(buf);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(back[i].name == ps[i].name);
      CHECK(back[i].value == ps[i].value);
    }
  }

  TEST_CASE("corrupt input is rejected") {
    ParamSet ps;
    ps.add("w", ParamGroup::embedding, Tensor::vector({1.0, 2.0}));
    std::stringstream buf;
    write_checkpoint(buf, ps);
    const std::string bytes = buf.str();
    std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_checkpoint(truncated), DataError);
    std::stringstream bad("XXXX" + bytes.substr(4));
    CHECK_THROWS_AS(read_checkpoint(bad), DataError);
  }
}

TEST_SUITE("mlp") {
  TEST_CASE("layer shapes, glorot bounds and zero biases") {
    std::mt19937_64 rng(3);
    ParamSet ps;
    MlpSpec spec{5, 8, 2, 3, Activation::tanh};
    init_mlp(ps, "f", spec, ParamGroup::dynamics, rng);
    REQUIRE(ps.size() == 6);
    CHECK(ps.value("f.w0").shape() == Shape{5, 8});
    CHECK(ps.value("f.w1").shape() == Shape{8, 8});
    CHECK(ps.value("f.w2").shape() == Shape{8, 3});
    const double bound = std::sqrt(6.0 / 13.0);
    for (double v : ps.value("f.w0").values()) CHECK(std::abs(v) <= bound);
    for (double v : ps.value("f.b1").values()) CHECK(v == 0.0);
  }

  TEST_CASE("zero hidden layers is one affine map") {
    std::mt19937_64 rng(4);
    ParamSet ps;
    MlpSpec spec{2, 1, 0, 1, Activation::none};
    init_mlp(ps, "lin", spec, ParamGroup::head, rng);
    ps.value("lin.w0") = Tensor::matrix({{2.0}, {-1.0}});
    ps.value("lin.b0") = Tensor::vector({0.5});
    Tape tape;
    ParamBinding bind(tape, ps);
    const Var y = mlp_forward(spec, bind, "lin", tape.constant(Tensor::matrix({{1.0, 3.0}})));
    CHECK(y.value().item() == doctest::Approx(-0.5));
    CHECK_THROWS_AS(mlp_forward(spec, bind, "lin", tape.constant(Tensor::matrix({{1.0, 3.0, 4.0}}))),
                    DimensionError);
  }

  TEST_CASE("parameter gradients of an MLP match central differences") {
    std::mt19937_64 rng(5);
    ParamSet ps;
    MlpSpec spec{3, 4, 1, 2, Activation::tanh};
    init_mlp(ps, "m", spec, ParamGroup::dynamics, rng);
    Gen g(8);
    const Tensor x = random_tensor(g, {2, 3});
    for (std::size_t k = 0; k < ps.size(); ++k) {
      auto value_at = [&](const std::vector<double>& flat) {
        ParamSet q = ps;
        q[k].value = Tensor(ps[k].value.shape(), flat);
        Tape tape;
        ParamBinding bind(tape, q, false);
        return sum(mlp_forward(spec, bind, "m", tape.constant(x))).value().item();
      };
      Tape tape;
      ParamBinding bind(tape, ps);
      tape.backward(sum(mlp_forward(spec, bind, "m", tape.constant(x))));
      const auto grads = bind.gradients();
      const auto fd = oracle::central_gradient(value_at, ps[k].value.values(), 1e-6);
      for (std::size_t i = 0; i < fd.size(); ++i) CHECK(grads[k][i] == doctest::Approx(fd[i]).epsilon(1e-6));
    }
  }
}
