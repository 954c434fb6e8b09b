#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace ctsm::oracle {

std::vector<double> solve_dense(Matrix a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (a[pivot][col] == 0.0) throw std::runtime_error("singular oracle system");
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double acc = b[r];
    for (std::size_t c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
    x[r] = acc / a[r][r];
  }
  return x;
}

std::vector<std::array<double, 4>> natural_spline(std::span<const double> t, std::span<const double> x) {
  const std::size_t m = t.size() - 1;
  const std::size_t n = 4 * m;
  Matrix a(n, std::vector<double>(n, 0.0));
  std::vector<double> b(n, 0.0);
  std::size_t row = 0;
  auto value_row = [&](std::size_t j, double u, double rhs) {
    for (std::size_t p = 0; p < 4; ++p) a[row][4 * j + p] = std::pow(u, static_cast<double>(p));
    b[row++] = rhs;
  };
  for (std::size_t j = 0; j < m; ++j) {
    const double h = t[j + 1] - t[j];
    value_row(j, 0.0, x[j]);
    value_row(j, h, x[j + 1]);
  }
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const double h = t[j + 1] - t[j];
    // first derivative of piece j at its right end equals that of j+1 at 0
    a[row][4 * j + 1] = 1.0;
    a[row][4 * j + 2] = 2.0 * h;
    a[row][4 * j + 3] = 3.0 * h * h;
    a[row][4 * (j + 1) + 1] = -1.0;
    ++row;
    a[row][4 * j + 2] = 2.0;
    a[row][4 * j + 3] = 6.0 * h;
    a[row][4 * (j + 1) + 2] = -2.0;
    ++row;
  }
  a[row][2] = 2.0;
  ++row;
  const double h = t[m] - t[m - 1];
  a[row][4 * (m - 1) + 2] = 2.0;
  a[row][4 * (m - 1) + 3] = 6.0 * h;
  ++row;
  const auto sol = solve_dense(a, b);
  std::vector<std::array<double, 4>> out(m);
  for (std::size_t j = 0; j < m; ++j) out[j] = {sol[4 * j], sol[4 * j + 1], sol[4 * j + 2], sol[4 * j + 3]};
  return out;
}

double eval_spline(const std::vector<std::array<double, 4>>& coef, std::span<const double> t, double at) {
  std::size_t j = 0;
  while (j + 1 < coef.size() && at >= t[j + 1]) ++j;
  const double u = at - t[j];
  return coef[j][0] + coef[j][1] * u + coef[j][2] * u * u + coef[j][3] * u * u * u;
}

double average_precision(std::span<const double> scores, std::span<const double> labels,
                         std::span<const double> weights) {
  double positives = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) positives += weights[i] * labels[i];
  if (positives <= 0.0) throw std::runtime_error("no positives");
  std::set<double, std::greater<>> thresholds(scores.begin(), scores.end());
  double ap = 0.0, prev_recall = 0.0;
  for (double th : thresholds) {
    double hits = 0.0, selected = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= th) {
        hits += weights[i] * labels[i];
        selected += weights[i];
      }
    }
    if (selected <= 0.0) continue;
    const double recall = hits / positives;
    ap += (recall - prev_recall) * (hits / selected);
    prev_recall = recall;
  }
  return ap;
}

double weighted_rmse(std::span<const double> pred, std::span<const double> label, std::span<const double> weight) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    num += weight[i] * (pred[i] - label[i]) * (pred[i] - label[i]);
    den += weight[i];
  }
  return std::sqrt(num / den);
}

std::vector<double> least_squares(std::span<const double> x, std::size_t cols, std::span<const double> y,
                                  std::span<const double> w) {
  Matrix xtx(cols, std::vector<double>(cols, 0.0));
  std::vector<double> xty(cols, 0.0);
  for (std::size_t r = 0; r < y.size(); ++r) {
    for (std::size_t i = 0; i < cols; ++i) {
      xty[i] += w[r] * x[r * cols + i] * y[r];
      for (std::size_t j = 0; j < cols; ++j) xtx[i][j] += w[r] * x[r * cols + i] * x[r * cols + j];
    }
  }
  return solve_dense(xtx, xty);
}

std::vector<double> central_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double step) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + step;
    const double up = f(x);
    x[i] = keep - step;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

std::vector<double> rk4(const std::function<std::vector<double>(double, const std::vector<double>&)>& f,
                        std::vector<double> y, double t0, double t1, std::size_t steps) {
  const double h = (t1 - t0) / static_cast<double>(steps);
  auto axpy = [](const std::vector<double>& a, double s, const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
    return out;
  };
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t0 + h * static_cast<double>(k);
    const auto k1 = f(t, y);
    const auto k2 = f(t + h / 2, axpy(y, h / 2, k1));
    const auto k3 = f(t + h / 2, axpy(y, h / 2, k2));
    const auto k4 = f(t + h, axpy(y, h, k3));
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return y;
}

}  // namespace ctsm::oracle
