#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "ctsm/error.hpp"
#include "ctsm/interp/coeff_cache.hpp"
#include "ctsm/interp/control_signal.hpp"
#include "ctsm/interp/fit.hpp"
#include "ctsm/interp/tridiagonal.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace ctsm;
using ctsm::testing::Gen;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> iota_times(std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i);
  return t;
}

// Evaluates a piece list on knots t at an arbitrary point inside [t0, tn].
double eval_pieces(const std::vector<CubicPiece>& p, const std::vector<double>& t, double at) {
  std::size_t j = 0;
  while (j + 1 < p.size() && at >= t[j + 1]) ++j;
  return p[j].value(at - t[j]);
}

void check_piece(const CubicPiece& p, double a, double b, double c, double d, double tol = 1e-12) {
  CHECK(p.a == doctest::Approx(a).epsilon(tol));
  CHECK(p.b == doctest::Approx(b).epsilon(tol));
  CHECK(p.c == doctest::Approx(c).epsilon(tol));
  CHECK(p.d == doctest::Approx(d).epsilon(tol));
}

}  // namespace

TEST_SUITE("cubic") {
  TEST_CASE("piece evaluation in local offset form") {
    const CubicPiece p{1.0, -2.0, 3.0, 4.0};
    CHECK(p.value(0.0) == 4.0);
    CHECK(p.value(1.0) == 6.0);
    CHECK(p.slope(0.0) == 3.0);
    CHECK(p.slope(1.0) == 2.0);
    CHECK(p.curvature(0.0) == -4.0);
    CHECK(CubicPiece::constant(7.0).value(0.3) == 7.0);
  }

  TEST_CASE("scheme names round trip") {
    for (Scheme s : {Scheme::linear, Scheme::hermite, Scheme::natural, Scheme::monotonic, Scheme::rectilinear,
                     Scheme::recticubic}) {
      CHECK(scheme_from_string(to_string(s)) == s);
    }
    CHECK_THROWS_AS(scheme_from_string("bezier"), ConfigError);
  }

  TEST_CASE("scheme routing by channel role") {
    for (ChannelRole r : {ChannelRole::feature, ChannelRole::count, ChannelRole::time}) {
      CHECK(fit_method_for(Scheme::linear, r) == FitMethod::linear);
      CHECK(fit_method_for(Scheme::rectilinear, r) == FitMethod::linear);
    }
    for (Scheme s : {Scheme::hermite, Scheme::natural, Scheme::monotonic, Scheme::recticubic}) {
      CHECK(fit_method_for(s, ChannelRole::count) == FitMethod::monotonic);
      CHECK(fit_method_for(s, ChannelRole::time) == FitMethod::monotonic);
    }
    CHECK(fit_method_for(Scheme::hermite, ChannelRole::feature) == FitMethod::hermite);
    CHECK(fit_method_for(Scheme::recticubic, ChannelRole::feature) == FitMethod::hermite);
    CHECK(fit_method_for(Scheme::natural, ChannelRole::feature) == FitMethod::natural);
    CHECK(fit_method_for(Scheme::monotonic, ChannelRole::feature) == FitMethod::monotonic);
  }
}

TEST_SUITE("tridiagonal") {
  TEST_CASE("small systems") {
    using V = std::vector<double>;
    const V ones{1.0, 1.0};
    const auto x = tridiagonal_solve(ones, V{2.0, 2.0, 2.0}, ones, V{1.0, 0.0, 1.0});
    // [[2,1,0],[1,2,1],[0,1,2]] x = (1,0,1)
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(-1.0));
    CHECK(x[2] == doctest::Approx(1.0));
    const auto y = tridiagonal_solve(V{0.0, 0.0}, V{2.0, 2.0, 2.0}, V{0.0, 0.0}, V{1.0, 0.0, 1.0});
    CHECK(y == V{0.5, 0.0, 0.5});
    const auto id = tridiagonal_solve(V{0.0}, V{1.0, 1.0}, V{0.0}, V{3.0, -4.0});
    CHECK(id == std::vector<double>{3.0, -4.0});
    CHECK(tridiagonal_solve(V{}, V{4.0}, V{}, V{2.0})[0] == 0.5);
  }

  TEST_CASE("matches dense elimination on random dominant systems") {
    Gen g(10);
    for (int rep = 0; rep < 50; ++rep) {
      const std::size_t n = g.index(1, 12);
      std::vector<double> sub(n - 1), sup(n - 1), diag(n), rhs(n);
      oracle::Matrix a(n, std::vector<double>(n, 0.0));
      for (std::size_t i = 0; i < n; ++i) {
        rhs[i] = g.normal();
        if (i + 1 < n) {
          sub[i] = g.uniform(-1, 1);
          sup[i] = g.uniform(-1, 1);
          a[i + 1][i] = sub[i];
          a[i][i + 1] = sup[i];
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        diag[i] = 2.5 + g.uniform(0, 1);
        a[i][i] = diag[i];
      }
      const auto x = tridiagonal_solve(sub, diag, sup, rhs);
      const auto y = oracle::solve_dense(a, rhs);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(x[i] - y[i]) <= 1e-10 * std::max(1.0, std::abs(y[i])));
    }
  }

  TEST_CASE("zero pivot is reported") {
    using V = std::vector<double>;
    CHECK_THROWS_AS(tridiagonal_solve(V{1.0}, V{0.0, 1.0}, V{1.0}, V{1.0, 1.0}), SingularSystemError);
    CHECK_THROWS_AS(tridiagonal_solve(V{1.0}, V{1.0, 1.0}, V{1.0}, V{1.0, 1.0}), SingularSystemError);
  }
}

TEST_SUITE("fit") {
  TEST_CASE("linear") {
    const std::vector<double> t{0.0, 1.0}, x{0.0, 2.0};
    check_piece(fit_linear(t, x)[0], 0, 0, 2, 0);
    const std::vector<double> t2{0.0, 2.0}, x2{0.0, 4.0};
    CHECK(eval_pieces(fit_linear(t2, x2), t2, 1.0) == doctest::Approx(2.0));
    for (const auto& p : fit_linear(iota_times(3), std::vector<double>{5, 5, 5})) check_piece(p, 0, 0, 0, 5);
    CHECK_THROWS_AS(fit_linear(std::vector<double>{}, std::vector<double>{}), DataError);
    const std::vector<double> bad{0.0, 0.0};
    CHECK_THROWS_AS(fit_linear(bad, x), DataError);
  }

  TEST_CASE("hermite reduces to linear on collinear points") {
    for (const auto& p : fit_hermite(iota_times(3), std::vector<double>{0, 1, 2})) check_piece(p, 0, 0, 1, p.d);
  }

  TEST_CASE("hermite endpoint conditions against a 4x4 solve") {
    const std::vector<double> t{0, 1, 2}, x{0, 1, 0};
    const auto pieces = fit_hermite(t, x);
    // piece [1, 2]: X(0)=1, X(1)=0, X'(0)=1, X'(1)=-1 in the offset u
    const oracle::Matrix a{{0, 0, 0, 1}, {1, 1, 1, 1}, {0, 0, 1, 0}, {3, 2, 1, 0}};
    const auto sol = oracle::solve_dense(a, {1.0, 0.0, 1.0, -1.0});
    check_piece(pieces[1], sol[0], sol[1], sol[2], sol[3], 1e-12);
    // first piece uses m0 = m1
    CHECK(pieces[0].slope(0.0) == doctest::Approx(1.0));
  }

  TEST_CASE("hermite on random irregular knots matches values and slopes") {
    Gen g(11);
    for (int rep = 0; rep < 100; ++rep) {
      const std::size_t n = g.index(2, 12);
      const auto t = g.times(n);
      const auto x = g.normals(n, 2.0);
      const auto p = fit_hermite(t, x);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = t[i + 1] - t[i];
        const double m_right = (x[i + 1] - x[i]) / h;
        const double m_left = i == 0 ? m_right : (x[i] - x[i - 1]) / (t[i] - t[i - 1]);
        CHECK(p[i].value(0) == doctest::Approx(x[i]).epsilon(1e-12));
        CHECK(p[i].value(h) == doctest::Approx(x[i + 1]).epsilon(1e-10));
        CHECK(p[i].slope(0) == doctest::Approx(m_left).epsilon(1e-10));
        CHECK(p[i].slope(h) == doctest::Approx(m_right).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("monotonic coefficients") {
    const std::vector<double> t{0, 1}, x{0, 1};
    const auto p = fit_monotonic(t, x);
    check_piece(p[0], -2, 3, 0, 0);
    CHECK(p[0].value(0.5) == doctest::Approx(0.5));
    for (const auto& q : fit_monotonic(iota_times(4), std::vector<double>{2, 2, 2, 2})) check_piece(q, 0, 0, 0, 2);
    const std::vector<double> t2{1.0, 3.0}, x2{1.0, 5.0};
    check_piece(fit_monotonic(t2, x2)[0], -2.0 * 4 / 8, 3.0 * 4 / 4, 0, 1);
  }

  TEST_CASE("monotonic fit of increasing integers is non-decreasing") {
    const auto t = iota_times(5);
    const auto p = fit_monotonic(t, t);
    for (std::size_t j = 0; j < p.size(); ++j) {
      for (int k = 0; k <= 1000; ++k) CHECK(p[j].slope(k * 1e-3) >= -1e-12);
    }
  }

  TEST_CASE("natural cubic on three points") {
    const std::vector<double> t{0, 1, 2}, x{0, 1, 0};
    const auto k = natural_curvatures(t, x);
    CHECK(k[0] == 0.0);
    CHECK(k[1] == doctest::Approx(-3.0));
    CHECK(k[2] == 0.0);
    const auto p = fit_natural(t, x);
    check_piece(p[0], -0.5, 0.0, 1.5, 0.0);
    const auto dense = oracle::natural_spline(t, x);
    for (std::size_t j = 0; j < 2; ++j) check_piece(p[j], dense[j][3], dense[j][2], dense[j][1], dense[j][0], 1e-12);
  }

  TEST_CASE("natural cubic on collinear points is the line; two points degrade to linear") {
    const auto t = iota_times(4);
    const std::vector<double> x{1, 3, 5, 7};
    for (double k : natural_curvatures(t, x)) CHECK(std::abs(k) < 1e-12);
    for (const auto& p : fit_natural(t, x)) check_piece(p, 0, 0, 2, p.d);
    const std::vector<double> t2{0, 1}, x2{1, 4};
    check_piece(fit_natural(t2, x2)[0], 0, 0, 3, 1);
  }

  TEST_CASE("natural cubic matches the dense constraint system on irregular knots") {
    Gen g(12);
    for (int rep = 0; rep < 60; ++rep) {
      const std::size_t n = g.index(3, 10);
      const auto t = g.times(n);
      const auto x = g.normals(n, 2.0);
      const auto p = fit_natural(t, x);
      const auto dense = oracle::natural_spline(t, x);
      for (double at = t.front(); at <= t.back(); at += (t.back() - t.front()) / 97.0) {
        CHECK(std::abs(eval_pieces(p, t, at) - oracle::eval_spline(dense, t, at)) <= 1e-8);
      }
    }
  }

  TEST_CASE("continuation matrix") {
    CHECK(continue_missing_piece({1, 0, 0, 0}) == CubicPiece{1, 3, 3, 1});
    CHECK(continue_missing_piece({0, 0, 0, 4}) == CubicPiece{0, 0, 0, 4});
    const CubicPiece line{0, 0, 1, 0};
    const CubicPiece next = continue_missing_piece(line);
    CHECK(next == CubicPiece{0, 0, 1, 1});
    for (int k = 0; k <= 20; ++k) {
      const double u = k / 20.0;
      CHECK(std::abs(next.value(u) - line.value(1.0 + u)) < 1e-12);
    }
  }

  TEST_CASE("continued and shifted pieces agree with the analytic extension") {
    Gen g(13);
    for (int rep = 0; rep < 200; ++rep) {
      const CubicPiece p = g.piece();
      const CubicPiece next = continue_missing_piece(p);
      const double s = g.uniform(-2, 2);
      const CubicPiece shifted = shift_piece(p, s);
      for (int k = 0; k < 50; ++k) {
        const double u = k / 49.0;
        const double direct = p.value(1.0 + u);
        CHECK(std::abs(next.value(u) - direct) <= 1e-10 * std::max(1.0, std::abs(direct)));
        const double moved = p.value(s + u);
        CHECK(std::abs(shifted.value(u) - moved) <= 1e-10 * std::max(1.0, std::abs(moved)));
      }
    }
  }

  TEST_CASE("locality: local schemes ignore later observations, natural does not") {
    Gen g(14);
    for (FitMethod m : {FitMethod::linear, FitMethod::hermite, FitMethod::monotonic}) {
      for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = g.index(3, 10);
        const auto t = iota_times(n);
        auto x = g.normals(n);
        const auto before = fit_points(m, t, x);
        const std::size_t j = g.index(1, n - 1);
        x[j] += 1.0 + g.uniform();
        const auto after = fit_points(m, t, x);
        for (std::size_t i = 0; i + 1 < j; ++i) CHECK(before[i] == after[i]);
      }
    }
    const auto t = iota_times(6);
    std::vector<double> x{0, 1, 0, 1, 0, 1};
    const auto before = fit_natural(t, x);
    x[5] = 3.0;
    CHECK_FALSE(before[0] == fit_natural(t, x)[0]);
  }

  TEST_CASE("fit_channel bridges gaps and holds the boundary values") {
    const std::vector<double> v{kNaN, 2.0, kNaN, 6.0, kNaN};
    const auto p = fit_channel(v, FitMethod::linear);
    REQUIRE(p.size() == 4);
    CHECK(p[0] == CubicPiece::constant(2.0));
    CHECK(p[1].value(1.0) == doctest::Approx(4.0));
    CHECK(p[2].value(0.0) == doctest::Approx(4.0));
    CHECK(p[2].value(1.0) == doctest::Approx(6.0));
    CHECK(p[3] == CubicPiece::constant(6.0));

    const std::vector<double> gap{0.0, kNaN, 4.0};
    CHECK(fit_channel(gap, FitMethod::linear)[0].value(1.0) == doctest::Approx(2.0));

    const std::vector<double> one{kNaN, 3.0, kNaN};
    for (const auto& q : fit_channel(one, FitMethod::hermite)) CHECK(q == CubicPiece::constant(3.0));
    CHECK(fit_channel(std::vector<double>{5.0}, FitMethod::natural).size() == 1);
    CHECK_THROWS_AS(fit_channel(std::vector<double>{kNaN, kNaN}, FitMethod::linear), DataError);
  }
}

TEST_SUITE("control_signal") {
  ControlSignal sample_signal_3() {
    const std::vector<std::vector<double>> ch{{0.0, 1.0, 0.0}, {1.0, 1.0, 2.0}, {0.0, 3.0, 3.0}};
    return build_control_signal(ch, {ChannelRole::feature, ChannelRole::count, ChannelRole::time}, Scheme::hermite);
  }

  TEST_CASE("evaluation, clamping and piece selection") {
    const ControlSignal sig = sample_signal_3();
    CHECK(sig.knot_count() == 3);
    CHECK(sig.piece_count() == 2);
    CHECK(sig.channel_count() == 3);
    CHECK(sig.piece_index(1.5) == 1);
    CHECK(sig.piece_index(-3.0) == 0);
    CHECK(sig.piece_index(10.0) == 1);
    CHECK(sig.evaluate(1.0)[0] == doctest::Approx(1.0));
    CHECK(sig.evaluate(-1.0) == sig.evaluate(0.0));
    CHECK(sig.evaluate(7.0) == sig.evaluate(2.0));
    for (double v : sig.derivative(2.5)) CHECK(v == 0.0);
    for (double v : sig.derivative(-0.5)) CHECK(v == 0.0);
    CHECK(sig.channels_with_role(ChannelRole::time) == std::vector<std::size_t>{2});
  }

  TEST_CASE("repeated time knots give a flat time channel") {
    const std::vector<std::vector<double>> ch{{1, 2, 3, 4}, {0, 3, 3, 7}};
    const auto sig = build_control_signal(ch, {ChannelRole::feature, ChannelRole::time}, Scheme::natural);
    for (double s = 0.0; s <= 3.0; s += 1e-3) CHECK(sig.derivative(s)[1] >= -1e-12);
    std::vector<double> out(2);
    for (double s = 1.0; s <= 2.0; s += 0.01) {
      sig.derivative_in_piece(1, s, out);
      CHECK(out[1] == 0.0);
    }
  }

  TEST_CASE("time channel must be non-decreasing") {
    const std::vector<std::vector<double>> ch{{1, 2, 3}, {0, 2, 1}};
    CHECK_THROWS_AS(build_control_signal(ch, {ChannelRole::feature, ChannelRole::time}, Scheme::linear), DataError);
  }

  TEST_CASE("random signals are continuous at knots") {
    Gen g(15);
    for (Scheme scheme : {Scheme::linear, Scheme::hermite, Scheme::natural, Scheme::monotonic}) {
      for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = g.index(2, 12);
        std::vector<std::vector<double>> ch{g.series(n, 0.3), g.series(n, 0.5), g.nondecreasing(n)};
        const auto sig = build_control_signal(ch, {ChannelRole::feature, ChannelRole::feature, ChannelRole::time},
                                              scheme);
        std::vector<double> left(3), right(3);
        for (std::size_t i = 1; i + 1 < n; ++i) {
          sig.evaluate_in_piece(i - 1, static_cast<double>(i), left);
          sig.evaluate_in_piece(i, static_cast<double>(i), right);
          for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(left[c] - right[c]) <= 1e-9 * (1.0 + std::abs(left[c])));
        }
        for (std::size_t i = 0; i < n; ++i) {
          const auto v = sig.evaluate(static_cast<double>(i));
          for (std::size_t c = 0; c < 3; ++c) {
            if (!std::isnan(ch[c][i])) CHECK(v[c] == doctest::Approx(ch[c][i]).epsilon(1e-9));
          }
        }
      }
    }
  }

  TEST_CASE("sampling covers the signal densely") {
    const ControlSignal sig = sample_signal_3();
    const auto samples = sample_signal(sig, 10);
    REQUIRE(samples.size() == 21);
    CHECK(samples.front().s == 0.0);
    CHECK(samples.back().s == doctest::Approx(2.0));
    CHECK(samples[10].value == sig.evaluate(1.0));
  }
}

TEST_SUITE("coeff_cache") {
  TEST_CASE("round trip is exact") {
    Gen g(16);
    std::vector<ControlSignal> signals;
    for (std::size_t n : {1u, 2u, 7u}) {
      std::vector<std::vector<double>> ch{g.series(n, 0.2), g.nondecreasing(n)};
      signals.push_back(build_control_signal(ch, {ChannelRole::feature, ChannelRole::time}, Scheme::natural));
    }
    std::stringstream buf;
    write_coeff_cache(buf, signals);
    const auto back = read_coeff_cache(buf);
    REQUIRE(back.size() == signals.size());
    for (std::size_t k = 0; k < signals.size(); ++k) {
      CHECK(back[k].knot_count() == signals[k].knot_count());
      CHECK(back[k].roles() == signals[k].roles());
      for (std::size_t i = 0; i < signals[k].piece_count(); ++i) {
        for (std::size_t c = 0; c < 2; ++c) CHECK(back[k].piece(c, i) == signals[k].piece(c, i));
      }
    }
  }

  TEST_CASE("corrupt input is rejected") {
    std::stringstream bad("XXXX\x01");
    CHECK_THROWS_AS(read_coeff_cache(bad), DataError);
    std::vector<ControlSignal> one{build_control_signal({{1.0, 2.0}}, {ChannelRole::feature}, Scheme::linear)};
    std::stringstream buf;
    write_coeff_cache(buf, one);
    std::string bytes = buf.str();
    bytes.resize(bytes.size() - 3);
    std::stringstream cut(bytes);
    CHECK_THROWS_AS(read_coeff_cache(cut), DataError);
  }
}
