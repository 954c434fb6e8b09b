#include "ctsm/prep/sequence.hpp"

#include <limits>

#include <fmt/format.h>

#include "ctsm/error.hpp"

namespace ctsm {

namespace {

// Appends step i of `src` to `dst`, optionally overriding time and weight.
void push_step(Sequence& dst, const Sequence& src, std::size_t i) {
  const std::size_t f = src.features;
  dst.x.insert(dst.x.end(), src.x.begin() + i * f, src.x.begin() + (i + 1) * f);
  dst.observed.insert(dst.observed.end(), src.observed.begin() + i * f, src.observed.begin() + (i + 1) * f);
  dst.counts.insert(dst.counts.end(), src.counts.begin() + i * f, src.counts.begin() + (i + 1) * f);
  dst.t.push_back(src.t[i]);
  dst.label.push_back(src.label[i]);
  dst.weight.push_back(src.weight[i]);
  dst.mask.push_back(src.mask[i]);
}

Sequence empty_like(const Sequence& seq) {
  Sequence out;
  out.features = seq.features;
  return out;
}

}  // namespace

Sequence count_observations(const RawSubject& subject) {
  validate_subject(subject);
  Sequence out;
  const std::size_t f = subject.feature_count();
  out.features = f;
  std::vector<double> running(f, 0.0);
  for (const auto& r : subject.rows) {
    for (std::size_t j = 0; j < f; ++j) {
      if (r.has(j)) running[j] += 1.0;
      out.x.push_back(r.has(j) ? r.values[j] : 0.0);
      out.observed.push_back(r.observed[j] ? 1 : 0);
      out.counts.push_back(running[j]);
    }
    out.t.push_back(r.t);
    out.label.push_back(r.label.value_or(0.0));
    out.weight.push_back(r.label ? r.weight : 0.0);
    out.mask.push_back(1);
  }
  return out;
}

Sequence pad_sequence(const Sequence& seq, std::size_t target) {
  const std::size_t n = seq.length();
  if (n == 0) throw DataError("cannot pad an empty sequence");
  if (target < n) throw DataError(fmt::format("pad target {} is shorter than sequence length {}", target, n));
  Sequence out = seq;
  const std::size_t f = seq.features;
  for (std::size_t i = n; i < target; ++i) {
    out.x.insert(out.x.end(), f, 0.0);
    out.observed.insert(out.observed.end(), f, 0);
    out.counts.insert(out.counts.end(), seq.counts.end() - static_cast<std::ptrdiff_t>(f), seq.counts.end());
    out.t.push_back(seq.t.back());
    out.label.push_back(0.0);
    out.weight.push_back(0.0);
    out.mask.push_back(0);
  }
  return out;
}

std::vector<Sequence> copy_expand(const Sequence& seq) {
  const std::size_t n = seq.length();
  std::vector<Sequence> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Sequence copy = empty_like(seq);
    for (std::size_t i = 0; i < n; ++i) {
      push_step(copy, seq, i <= k ? i : k);
      copy.weight.back() = i == k ? seq.weight[k] : 0.0;
    }
    out.push_back(std::move(copy));
  }
  return out;
}

Sequence recti_expand(const Sequence& seq) {
  const std::size_t n = seq.length();
  if (n == 0) throw DataError("cannot expand an empty sequence");
  const std::size_t f = seq.features;

  Sequence filled = seq;
  for (std::size_t j = 0; j < f; ++j) {
    double last = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t at = i * f + j;
      if (seq.observed[at]) {
        last = seq.x[at];
      } else {
        filled.x[at] = last;
      }
      filled.observed[at] = 1;
    }
  }

  Sequence out = empty_like(seq);
  for (std::size_t k = 0; k < n; ++k) {
    push_step(out, filled, k);
    if (k + 1 < n) {
      push_step(out, filled, k);
      out.t.back() = filled.t[k + 1];
      out.weight.back() = 0.0;
    }
  }
  return out;
}

std::vector<std::uint8_t> build_update_mask(const Sequence& seq) { return seq.mask; }

std::vector<std::vector<double>> sequence_channels(const Sequence& seq, bool zero_fill) {
  const std::size_t f = seq.features;
  const std::size_t n = seq.length();
  std::vector<std::vector<double>> ch(2 * f + 1, std::vector<double>(n));
  const double missing = zero_fill ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < f; ++j) {
      ch[j][i] = seq.has(i, j) ? seq.value(i, j) : missing;
      ch[f + j][i] = seq.counts[i * f + j];
    }
    ch[2 * f][i] = seq.t[i];
  }
  return ch;
}

std::vector<double> sequence_rows(const Sequence& seq) {
  const std::size_t f = seq.features;
  const std::size_t w = 2 * f + 1;
  std::vector<double> rows(seq.length() * w);
  for (std::size_t i = 0; i < seq.length(); ++i) {
    for (std::size_t j = 0; j < f; ++j) {
      rows[i * w + j] = seq.has(i, j) ? seq.value(i, j) : 0.0;
      rows[i * w + f + j] = seq.counts[i * f + j];
    }
    rows[i * w + 2 * f] = seq.t[i];
  }
  return rows;
}

}  // namespace ctsm
