#include "ctsm/prep/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "ctsm/error.hpp"

namespace ctsm {

std::string_view to_string(CausalMode m) { return m == CausalMode::copy ? "copy" : "recti"; }
std::string_view to_string(ImputeMode m) { return m == ImputeMode::interpolate ? "interpolate" : "zero"; }

CausalMode causal_from_string(std::string_view name) {
  if (name == "copy") return CausalMode::copy;
  if (name == "recti") return CausalMode::recti;
  throw ConfigError(fmt::format("unknown causal mode '{}' (copy|recti)", name));
}

ImputeMode impute_from_string(std::string_view name) {
  if (name == "interpolate") return ImputeMode::interpolate;
  if (name == "zero") return ImputeMode::zero;
  throw ConfigError(fmt::format("unknown impute mode '{}' (interpolate|zero)", name));
}

ResolvedScheme resolve_scheme(Scheme scheme, std::optional<CausalMode> causal) {
  if (is_recti(scheme)) {
    if (causal && *causal != CausalMode::recti) {
      throw ConfigError(fmt::format("scheme '{}' requires causal mode recti", to_string(scheme)));
    }
    return {scheme, CausalMode::recti};
  }
  if (!causal || *causal == CausalMode::copy) return {scheme, CausalMode::copy};
  if (scheme == Scheme::linear) return {Scheme::rectilinear, CausalMode::recti};
  if (scheme == Scheme::hermite) return {Scheme::recticubic, CausalMode::recti};
  throw ConfigError(fmt::format("scheme '{}' is not discretely online and cannot be used with recti",
                                to_string(scheme)));
}

std::vector<ControlSignal> Dataset::signals() const {
  std::vector<ControlSignal> out;
  out.reserve(subjects.size());
  for (const auto& s : subjects) out.push_back(s.signal);
  return out;
}

namespace {

std::vector<ChannelRole> channel_roles(std::size_t features) {
  std::vector<ChannelRole> roles(2 * features + 1, ChannelRole::feature);
  std::fill(roles.begin() + static_cast<std::ptrdiff_t>(features), roles.end() - 1, ChannelRole::count);
  roles.back() = ChannelRole::time;
  return roles;
}

}  // namespace

Dataset build_dataset(std::span<const RawSubject> subjects, const PreprocessConfig& config,
                      std::size_t target_length) {
  if (subjects.empty()) throw DataError("empty dataset");
  const auto resolved = resolve_scheme(config.scheme, config.causal);
  Dataset ds;
  ds.scheme = resolved.scheme;
  ds.causal = resolved.causal;
  ds.features = subjects.front().feature_count();
  ds.context = subjects.front().context.size();

  struct Pending {
    std::size_t source;
    std::size_t copy;
    Sequence seq;
  };
  std::vector<Pending> pending;
  std::size_t rows = 0;
  for (std::size_t s = 0; s < subjects.size(); ++s) {
    const auto& subj = subjects[s];
    if (subj.feature_count() != ds.features || subj.context.size() != ds.context) {
      throw DataError(fmt::format("subject '{}' has a different column layout", subj.id));
    }
    Sequence seq = count_observations(subj);
    if (ds.causal == CausalMode::copy) {
      auto copies = copy_expand(seq);
      rows += copies.size() * seq.length();
      for (std::size_t k = 0; k < copies.size(); ++k) pending.push_back({s, k, std::move(copies[k])});
    } else {
      Sequence r = recti_expand(seq);
      rows += r.length();
      pending.push_back({s, 0, std::move(r)});
    }
    if (rows > config.max_rows) {
      throw DataError(fmt::format("expanded dataset exceeds {} rows; raise max_rows or use recti",
                                  config.max_rows));
    }
  }

  std::size_t longest = 0;
  for (const auto& p : pending) longest = std::max(longest, p.seq.length());
  if (target_length != 0 && target_length < longest) {
    throw DataError(fmt::format("target length {} is shorter than the longest sequence {}", target_length, longest));
  }
  ds.length = target_length != 0 ? target_length : longest;

  const auto roles = channel_roles(ds.features);
  const bool zero_fill = config.impute == ImputeMode::zero;
  ds.subjects.reserve(pending.size());
  for (auto& p : pending) {
    const auto& subj = subjects[p.source];
    Sequence seq = pad_sequence(p.seq, ds.length);
    ProcessedSubject out;
    out.id = subj.id;
    out.source = p.source;
    out.copy = p.copy;
    auto channels = sequence_channels(seq, zero_fill);
    for (std::size_t j = 0; j < ds.features; ++j) {
      if (std::none_of(channels[j].begin(), channels[j].end(), [](double v) { return !std::isnan(v); })) {
        std::fill(channels[j].begin(), channels[j].end(), 0.0);
      }
    }
    out.signal = build_control_signal(channels, roles, ds.scheme);
    out.context.resize(ds.context);
    for (std::size_t j = 0; j < ds.context; ++j) {
      if (!subj.context_observed[j]) {
        throw DataError(fmt::format("subject '{}': context column {} missing after imputation", subj.id, j));
      }
      out.context[j] = subj.context[j];
    }
    out.label = seq.label;
    out.weight = seq.weight;
    out.mask = build_update_mask(seq);
    out.rows = sequence_rows(seq);
    ds.subjects.push_back(std::move(out));
  }
  return ds;
}

Split train_test_split(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (test_fraction < 0.0 || test_fraction >= 1.0) {
    throw ConfigError(fmt::format("test fraction must be in [0, 1), got {}", test_fraction));
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::round(test_fraction * static_cast<double>(n)));
  Split out;
  out.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  out.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  std::sort(out.test.begin(), out.test.end());
  std::sort(out.train.begin(), out.train.end());
  return out;
}

std::vector<std::vector<std::size_t>> kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError(fmt::format("cross-validation needs at least 2 folds, got {}", k));
  if (n < k) throw ConfigError(fmt::format("{} subjects cannot fill {} folds", n, k));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t i = 0; i < n; ++i) folds[i % k].push_back(idx[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::vector<RawSubject> select(std::span<const RawSubject> subjects, std::span<const std::size_t> idx) {
  std::vector<RawSubject> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(subjects[i]);
  return out;
}

PreparedData prepare(std::span<const RawSubject> train, std::span<const RawSubject> test,
                     const PreprocessConfig& config) {
  if (train.empty()) throw DataError("empty training set");
  PreparedData out;
  out.standardizer = config.standardize
                         ? Standardizer::fit(train)
                         : Standardizer::identity(train.front().feature_count(), train.front().context.size());
  auto transform = [&](std::span<const RawSubject> in) {
    std::vector<RawSubject> v;
    v.reserve(in.size());
    for (const auto& s : in) v.push_back(impute_context(out.standardizer.apply(s)));
    return v;
  };
  const auto tr = transform(train);
  out.train = build_dataset(tr, config);
  if (!test.empty()) {
    const auto te = transform(test);
    out.test = build_dataset(te, config);
  }
  return out;
}

AssembledData assemble_dataset(std::span<const RawSubject> subjects, const PreprocessConfig& config,
                               double test_fraction, std::uint64_t seed) {
  if (subjects.empty()) throw DataError("empty dataset");
  AssembledData out;
  out.split = train_test_split(subjects.size(), test_fraction, seed);
  const auto tr = select(subjects, out.split.train);
  const auto te = select(subjects, out.split.test);
  out.data = prepare(tr, te, config);
  return out;
}

}  // namespace ctsm
