#include "ctsm/prep/standardizer.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ctsm/error.hpp"

namespace ctsm {

void validate_subject(const RawSubject& s) {
  if (s.rows.empty()) throw DataError(fmt::format("subject '{}' has no rows", s.id));
  if (s.context.size() != s.context_observed.size()) {
    throw DataError(fmt::format("subject '{}': context values and flags differ in length", s.id));
  }
  const std::size_t f = s.rows.front().values.size();
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const auto& r = s.rows[i];
    if (r.values.size() != f || r.observed.size() != f) {
      throw DataError(fmt::format("subject '{}' row {}: expected {} features", s.id, i, f));
    }
    if (!std::isfinite(r.t)) throw DataError(fmt::format("subject '{}' row {}: non-finite time", s.id, i));
    if (i > 0 && !(r.t > s.rows[i - 1].t)) {
      throw DataError(fmt::format("subject '{}': times must strictly increase (row {})", s.id, i));
    }
    if (r.weight != 0.0 && r.weight != 1.0) {
      throw DataError(fmt::format("subject '{}' row {}: weight must be 0 or 1", s.id, i));
    }
  }
}

namespace {

struct Accumulator {
  std::vector<double> sum, sumsq;
  std::vector<std::size_t> n;

  explicit Accumulator(std::size_t width) : sum(width, 0.0), sumsq(width, 0.0), n(width, 0) {}

  void add(std::size_t j, double v) {
    sum[j] += v;
    n[j] += 1;
  }
};

ColumnStats finish(const Accumulator& acc, const char* kind, std::vector<std::string>& warnings) {
  const std::size_t w = acc.n.size();
  ColumnStats out{std::vector<double>(w, 0.0), std::vector<double>(w, 1.0)};
  for (std::size_t j = 0; j < w; ++j) {
    if (acc.n[j] == 0) {
      warnings.push_back(fmt::format("{} column {} is never observed; using mean 0, std 1", kind, j));
      continue;
    }
    out.mean[j] = acc.sum[j] / static_cast<double>(acc.n[j]);
    if (acc.n[j] < 2) continue;
    const double var = acc.sumsq[j] / static_cast<double>(acc.n[j]);
    if (var > 0.0) out.std[j] = std::sqrt(var);
  }
  return out;
}

}  // namespace

Standardizer::Standardizer(ColumnStats features, ColumnStats context)
    : features_(std::move(features)), context_(std::move(context)) {}

Standardizer Standardizer::fit(std::span<const RawSubject> subjects) {
  if (subjects.empty()) throw DataError("cannot fit a standardizer on zero subjects");
  const std::size_t f = subjects.front().feature_count();
  const std::size_t c = subjects.front().context.size();
  Accumulator feat(f), ctx(c);
  for (const auto& s : subjects) {
    if (s.feature_count() != f || s.context.size() != c) {
      throw DataError(fmt::format("subject '{}' has a different column layout", s.id));
    }
    for (const auto& r : s.rows) {
      for (std::size_t j = 0; j < f; ++j) {
        if (r.has(j)) feat.add(j, r.values[j]);
      }
    }
    for (std::size_t j = 0; j < c; ++j) {
      if (s.context_observed[j]) ctx.add(j, s.context[j]);
    }
  }
  for (const auto& s : subjects) {
    for (const auto& r : s.rows) {
      for (std::size_t j = 0; j < f; ++j) {
        if (!r.has(j)) continue;
        const double d = r.values[j] - feat.sum[j] / static_cast<double>(feat.n[j]);
        feat.sumsq[j] += d * d;
      }
    }
    for (std::size_t j = 0; j < c; ++j) {
      if (!s.context_observed[j]) continue;
      const double d = s.context[j] - ctx.sum[j] / static_cast<double>(ctx.n[j]);
      ctx.sumsq[j] += d * d;
    }
  }
  Standardizer out;
  out.features_ = finish(feat, "feature", out.warnings_);
  out.context_ = finish(ctx, "context", out.warnings_);
  return out;
}

Standardizer Standardizer::identity(std::size_t features, std::size_t context) {
  return Standardizer({std::vector<double>(features, 0.0), std::vector<double>(features, 1.0)},
                      {std::vector<double>(context, 0.0), std::vector<double>(context, 1.0)});
}

RawSubject Standardizer::apply(const RawSubject& subject) const {
  if (subject.feature_count() != features_.mean.size() || subject.context.size() != context_.mean.size()) {
    throw DataError(fmt::format("subject '{}' does not match the standardizer's column layout", subject.id));
  }
  RawSubject out = subject;
  for (auto& r : out.rows) {
    for (std::size_t j = 0; j < r.values.size(); ++j) {
      if (r.has(j)) r.values[j] = (r.values[j] - features_.mean[j]) / features_.std[j];
    }
  }
  for (std::size_t j = 0; j < out.context.size(); ++j) {
    if (out.context_observed[j]) out.context[j] = (out.context[j] - context_.mean[j]) / context_.std[j];
  }
  return out;
}

RawSubject impute_context(RawSubject subject) {
  for (std::size_t j = 0; j < subject.context.size(); ++j) {
    if (!subject.context_observed[j]) {
      subject.context[j] = 0.0;
      subject.context_observed[j] = 1;
    }
  }
  return subject;
}

}  // namespace ctsm
