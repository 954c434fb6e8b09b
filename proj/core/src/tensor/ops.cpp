#include "ctsm/tensor/ops.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ctsm/error.hpp"

namespace ctsm {

namespace {

// Maps a flat index of the broadcast result to a flat index of one operand.
class IndexMap {
 public:
  IndexMap(const Shape& out, const Shape& in) {
    if (in == out) {
      mode_ = Mode::same;
      return;
    }
    const std::size_t in_n = numel(in);
    if (in_n == 1) {
      mode_ = Mode::scalar;
      return;
    }
    const std::size_t r = out.size();
    Shape aligned(r, 1);
    std::copy(in.begin(), in.end(), aligned.begin() + static_cast<std::ptrdiff_t>(r - in.size()));

    std::size_t k = 0;
    while (k < r && aligned[k] == 1) ++k;
    if (std::equal(aligned.begin() + static_cast<std::ptrdiff_t>(k), aligned.end(),
                   out.begin() + static_cast<std::ptrdiff_t>(k))) {
      mode_ = Mode::suffix;
      n_ = in_n;
      return;
    }
    std::size_t p = 0;
    while (p < r && aligned[p] == out[p]) ++p;
    if (std::all_of(aligned.begin() + static_cast<std::ptrdiff_t>(p), aligned.end(),
                    [](std::size_t e) { return e == 1; })) {
      mode_ = Mode::prefix;
      n_ = numel(out) / in_n;
      return;
    }

    mode_ = Mode::general;
    std::vector<std::size_t> in_strides(r, 0);
    std::size_t stride = 1;
    for (std::size_t ax = r; ax-- > 0;) {
      in_strides[ax] = aligned[ax] == 1 ? 0 : stride;
      stride *= aligned[ax];
    }
    const std::size_t total = numel(out);
    map_.resize(total);
    std::vector<std::size_t> idx(r, 0);
    for (std::size_t i = 0; i < total; ++i) {
      std::size_t src = 0;
      for (std::size_t ax = 0; ax < r; ++ax) src += idx[ax] * in_strides[ax];
      map_[i] = src;
      for (std::size_t ax = r; ax-- > 0;) {
        if (++idx[ax] < out[ax]) break;
        idx[ax] = 0;
      }
    }
  }

  std::size_t operator()(std::size_t i) const noexcept {
    switch (mode_) {
      case Mode::same: return i;
      case Mode::scalar: return 0;
      case Mode::suffix: return i % n_;
      case Mode::prefix: return i / n_;
      case Mode::general: return map_[i];
    }
    return i;
  }

 private:
  enum class Mode { same, scalar, suffix, prefix, general };
  Mode mode_ = Mode::same;
  std::size_t n_ = 1;
  std::vector<std::size_t> map_;
};

Tape& same_tape(const Var& a, const Var& b) {
  if (!a.valid() || !b.valid()) throw UsageError("operation on an unbound variable");
  if (&a.tape() != &b.tape()) throw UsageError("operation mixes variables from different tapes");
  return a.tape();
}

enum class BinaryKind { add, sub, mul };

Var binary(const Var& a, const Var& b, BinaryKind kind) {
  Tape& tape = same_tape(a, b);
  const Shape out_shape = broadcast_shape(a.shape(), b.shape());
  const IndexMap ma(out_shape, a.shape());
  const IndexMap mb(out_shape, b.shape());
  const auto& av = a.value().values();
  const auto& bv = b.value().values();
  Tensor out(out_shape);
  const std::size_t n = out.size();
  switch (kind) {
    case BinaryKind::add:
      for (std::size_t i = 0; i < n; ++i) out[i] = av[ma(i)] + bv[mb(i)];
      break;
    case BinaryKind::sub:
      for (std::size_t i = 0; i < n; ++i) out[i] = av[ma(i)] - bv[mb(i)];
      break;
    case BinaryKind::mul:
      for (std::size_t i = 0; i < n; ++i) out[i] = av[ma(i)] * bv[mb(i)];
      break;
  }
  return tape.record(std::move(out), {a, b}, [kind, ma, mb](Tape& t, std::size_t self) {
    const auto& g = t.upstream(self).values();
    const std::size_t ia = t.input(self, 0);
    const std::size_t ib = t.input(self, 1);
    const std::size_t n = g.size();
    if (t.requires_grad(ia)) {
      Tensor& ga = t.grad_buffer(ia);
      if (kind == BinaryKind::mul) {
        const auto& bv = t.value(ib).values();
        for (std::size_t i = 0; i < n; ++i) ga[ma(i)] += g[i] * bv[mb(i)];
      } else {
        for (std::size_t i = 0; i < n; ++i) ga[ma(i)] += g[i];
      }
    }
    if (t.requires_grad(ib)) {
      Tensor& gb = t.grad_buffer(ib);
      if (kind == BinaryKind::mul) {
        const auto& av = t.value(ia).values();
        for (std::size_t i = 0; i < n; ++i) gb[mb(i)] += g[i] * av[ma(i)];
      } else if (kind == BinaryKind::sub) {
        for (std::size_t i = 0; i < n; ++i) gb[mb(i)] -= g[i];
      } else {
        for (std::size_t i = 0; i < n; ++i) gb[mb(i)] += g[i];
      }
    }
  });
}

template <class Forward, class Derivative>
Var unary(const Var& x, Forward forward, Derivative derivative) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = forward(xv[i]);
  return x.tape().record(std::move(out), {x}, [derivative](Tape& t, std::size_t self) {
    const std::size_t ix = t.input(self, 0);
    const auto& g = t.upstream(self).values();
    const auto& xv = t.value(ix).values();
    const auto& yv = t.value(self).values();
    Tensor& gx = t.grad_buffer(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * derivative(xv[i], yv[i]);
  });
}

}  // namespace

Shape broadcast_shape(const Shape& a, const Shape& b) {
  const std::size_t r = std::max(a.size(), b.size());
  Shape out(r, 1);
  for (std::size_t k = 0; k < r; ++k) {
    const std::size_t ea = k < r - a.size() ? 1 : a[k - (r - a.size())];
    const std::size_t eb = k < r - b.size() ? 1 : b[k - (r - b.size())];
    if (ea != eb && ea != 1 && eb != 1) {
      throw DimensionError(
          fmt::format("shapes {} and {} are not broadcastable", to_string(a), to_string(b)));
    }
    out[k] = ea == 1 ? eb : ea;
  }
  return out;
}

Var add(const Var& a, const Var& b) { return binary(a, b, BinaryKind::add); }
Var sub(const Var& a, const Var& b) { return binary(a, b, BinaryKind::sub); }
Var mul(const Var& a, const Var& b) { return binary(a, b, BinaryKind::mul); }

Var neg(const Var& a) { return scale(a, -1.0); }

Var scale(const Var& a, double factor) {
  return unary(
      a, [factor](double v) { return factor * v; }, [factor](double, double) { return factor; });
}

Var matmul(const Var& a, const Var& b) {
  Tape& tape = same_tape(a, b);
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0]) {
    throw DimensionError(
        fmt::format("matmul shape mismatch: {} x {}", to_string(sa), to_string(sb)));
  }
  const std::size_t m = sa[0], k = sa[1], n = sb[1];
  const auto& av = a.value().values();
  const auto& bv = b.value().values();
  Tensor out(Shape{m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double* row = &out[i * n];
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = &bv[p * n];
      for (std::size_t j = 0; j < n; ++j) row[j] += aip * brow[j];
    }
  }
  return tape.record(std::move(out), {a, b}, [m, k, n](Tape& t, std::size_t self) {
    const auto& g = t.upstream(self).values();
    const std::size_t ia = t.input(self, 0);
    const std::size_t ib = t.input(self, 1);
    const auto& av = t.value(ia).values();
    const auto& bv = t.value(ib).values();
    if (t.requires_grad(ia)) {
      Tensor& ga = t.grad_buffer(ia);  // g * b^T
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          const double* grow = &g[i * n];
          const double* brow = &bv[p * n];
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          ga[i * k + p] += acc;
        }
      }
    }
    if (t.requires_grad(ib)) {
      Tensor& gb = t.grad_buffer(ib);  // a^T * g
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = &g[i * n];
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = av[i * k + p];
          if (aip == 0.0) continue;
          double* gbrow = &gb[p * n];
          for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
        }
      }
    }
  });
}

Var batched_matvec(const Var& mats, const Var& vecs) {
  Tape& tape = same_tape(mats, vecs);
  const Shape& sm = mats.shape();
  const Shape& sv = vecs.shape();
  if (sm.size() != 3 || sv.size() != 2 || sm[0] != sv[0] || sm[2] != sv[1]) {
    throw DimensionError(fmt::format("batched_matvec shape mismatch: {} x {}", to_string(sm),
                                     to_string(sv)));
  }
  const std::size_t batch = sm[0], m = sm[1], n = sm[2];
  const auto& mv = mats.value().values();
  const auto& vv = vecs.value().values();
  Tensor out(Shape{batch, m});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      const double* row = &mv[(b * m + i) * n];
      const double* v = &vv[b * n];
      for (std::size_t j = 0; j < n; ++j) acc += row[j] * v[j];
      out[b * m + i] = acc;
    }
  }
  return tape.record(std::move(out), {mats, vecs}, [batch, m, n](Tape& t, std::size_t self) {
    const auto& g = t.upstream(self).values();
    const std::size_t im = t.input(self, 0);
    const std::size_t iv = t.input(self, 1);
    const auto& mv = t.value(im).values();
    const auto& vv = t.value(iv).values();
    if (t.requires_grad(im)) {
      Tensor& gm = t.grad_buffer(im);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < m; ++i) {
          const double gi = g[b * m + i];
          double* row = &gm[(b * m + i) * n];
          const double* v = &vv[b * n];
          for (std::size_t j = 0; j < n; ++j) row[j] += gi * v[j];
        }
    }
    if (t.requires_grad(iv)) {
      Tensor& gv = t.grad_buffer(iv);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < m; ++i) {
          const double gi = g[b * m + i];
          const double* row = &mv[(b * m + i) * n];
          for (std::size_t j = 0; j < n; ++j) gv[b * n + j] += gi * row[j];
        }
    }
  });
}

Var relu(const Var& x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var tanh(const Var& x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(const Var& x) {
  return unary(
      x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var softmax(const Var& x) {
  const Tensor& xv = x.value();
  if (xv.rank() == 0) throw DimensionError("softmax of a scalar");
  const std::size_t cols = xv.shape().back();
  const std::size_t rows = cols == 0 ? 0 : xv.size() / cols;
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.data().data() + r * cols;
    double* o = &out[r * cols];
    const double mx = *std::max_element(in, in + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      o[c] = std::exp(in[c] - mx);
      total += o[c];
    }
    for (std::size_t c = 0; c < cols; ++c) o[c] /= total;
  }
  return x.tape().record(std::move(out), {x}, [rows, cols](Tape& t, std::size_t self) {
    const std::size_t ix = t.input(self, 0);
    const auto& g = t.upstream(self).values();
    const auto& y = t.value(self).values();
    Tensor& gx = t.grad_buffer(ix);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += g[r * cols + c] * y[r * cols + c];
      for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += y[r * cols + c] * (g[r * cols + c] - dot);
    }
  });
}

Var activate(const Var& x, Activation kind) {
  switch (kind) {
    case Activation::none: return x;
    case Activation::relu: return relu(x);
    case Activation::tanh: return tanh(x);
    case Activation::sigmoid: return sigmoid(x);
    case Activation::softmax: return softmax(x);
  }
  return x;
}

Var sum(const Var& x) {
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return x.tape().record(Tensor::scalar(total), {x}, [](Tape& t, std::size_t self) {
    const std::size_t ix = t.input(self, 0);
    const double g = t.upstream(self)[0];
    Tensor& gx = t.grad_buffer(ix);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
  });
}

Var mean(const Var& x) {
  const std::size_t n = x.value().size();
  if (n == 0) throw DimensionError("mean of an empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(n));
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat of zero tensors");
  Tape& tape = parts.front().tape();
  const Shape& first = parts.front().shape();
  if (first.empty()) throw DimensionError("concat of scalars");
  const Shape lead(first.begin(), first.end() - 1);
  const std::size_t rows = numel(lead);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    const Shape& s = p.shape();
    if (&p.tape() != &tape) throw UsageError("concat mixes tapes");
    if (s.size() != first.size() || !std::equal(lead.begin(), lead.end(), s.begin())) {
      throw DimensionError(fmt::format("concat leading extents differ: {} vs {}", to_string(first),
                                       to_string(s)));
    }
    widths.push_back(s.back());
    total += s.back();
  }
  Shape out_shape = lead;
  out_shape.push_back(total);
  Tensor out(out_shape);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& v = parts[k].value().values();
    const std::size_t w = widths[k];
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(&v[r * w], w, &out[r * total + offset]);
    offset += w;
  }
  return tape.record(std::move(out), parts, [rows, total, widths](Tape& t, std::size_t self) {
    const auto& g = t.upstream(self).values();
    std::size_t offset = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      const std::size_t in = t.input(self, k);
      const std::size_t w = widths[k];
      if (t.requires_grad(in)) {
        Tensor& gi = t.grad_buffer(in);
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < w; ++c) gi[r * w + c] += g[r * total + offset + c];
      }
      offset += w;
    }
  });
}

Var concat(std::initializer_list<Var> parts) {
  return concat(std::span<const Var>(parts.begin(), parts.size()));
}

Var slice_last(const Var& x, std::size_t begin, std::size_t end) {
  const Shape& s = x.shape();
  if (s.empty() || begin > end || end > s.back()) {
    throw DimensionError(fmt::format("slice [{}, {}) out of range for shape {}", begin, end, to_string(s)));
  }
  const std::size_t cols = s.back();
  const std::size_t rows = cols == 0 ? 0 : x.value().size() / cols;
  const std::size_t w = end - begin;
  Shape out_shape = s;
  out_shape.back() = w;
  Tensor out(out_shape);
  const auto& v = x.value().values();
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(&v[r * cols + begin], w, &out[r * w]);
  return x.tape().record(std::move(out), {x}, [rows, cols, begin, w](Tape& t, std::size_t self) {
    const std::size_t ix = t.input(self, 0);
    const auto& g = t.upstream(self).values();
    Tensor& gx = t.grad_buffer(ix);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < w; ++c) gx[r * cols + begin + c] += g[r * w + c];
  });
}

Var reshape(const Var& x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return x.tape().record(std::move(out), {x}, [](Tape& t, std::size_t self) {
    const std::size_t ix = t.input(self, 0);
    const auto& g = t.upstream(self).values();
    Tensor& gx = t.grad_buffer(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

Var stack_steps(std::span<const Var> steps) {
  if (steps.empty()) throw DimensionError("stack of zero tensors");
  const Shape& s0 = steps.front().shape();
  if (s0.size() != 2) throw DimensionError(fmt::format("stack_steps expects (B,k), got {}", to_string(s0)));
  for (const Var& v : steps)
    if (v.shape() != s0) throw DimensionError("stack_steps operands differ in shape");
  const std::size_t batch = s0[0], k = s0[1], n = steps.size();
  Tensor out(Shape{batch, n, k});
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = steps[i].value().values();
    for (std::size_t b = 0; b < batch; ++b) std::copy_n(&v[b * k], k, &out[(b * n + i) * k]);
  }
  return steps.front().tape().record(std::move(out), steps, [batch, n, k](Tape& t, std::size_t self) {
    const auto& g = t.upstream(self).values();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t in = t.input(self, i);
      if (!t.requires_grad(in)) continue;
      Tensor& gi = t.grad_buffer(in);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t c = 0; c < k; ++c) gi[b * k + c] += g[(b * n + i) * k + c];
    }
  });
}

Var linear_combination(std::span<const Var> terms, std::span<const double> coeffs) {
  if (terms.empty() || terms.size() != coeffs.size()) {
    throw DimensionError("linear_combination needs one coefficient per term");
  }
  const Shape& s = terms.front().shape();
  for (const Var& v : terms)
    if (v.shape() != s) {
      throw DimensionError(fmt::format("linear_combination shape mismatch: {} vs {}", to_string(s),
                                       to_string(v.shape())));
    }
  Tensor out(s);
  const std::size_t n = out.size();
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const double c = coeffs[k];
    if (c == 0.0) continue;
    const auto& v = terms[k].value().values();
    for (std::size_t i = 0; i < n; ++i) out[i] += c * v[i];
  }
  std::vector<double> cs(coeffs.begin(), coeffs.end());
  return terms.front().tape().record(std::move(out), terms, [cs = std::move(cs)](Tape& t, std::size_t self) {
    const auto& g = t.upstream(self).values();
    for (std::size_t k = 0; k < cs.size(); ++k) {
      const std::size_t in = t.input(self, k);
      if (cs[k] == 0.0 || !t.requires_grad(in)) continue;
      Tensor& gi = t.grad_buffer(in);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += cs[k] * g[i];
    }
  });
}

Var linear_combination(const Var& base, std::span<const Var> terms, std::span<const double> coeffs) {
  std::vector<Var> all;
  std::vector<double> cs;
  all.reserve(terms.size() + 1);
  cs.reserve(terms.size() + 1);
  all.push_back(base);
  cs.push_back(1.0);
  all.insert(all.end(), terms.begin(), terms.end());
  cs.insert(cs.end(), coeffs.begin(), coeffs.end());
  return linear_combination(std::span<const Var>(all), std::span<const double>(cs));
}

}  // namespace ctsm
