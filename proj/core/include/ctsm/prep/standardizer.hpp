#pragma once

#include <span>
#include <string>
#include <vector>

#include "ctsm/prep/raw.hpp"

namespace ctsm {

// Per-column mean and population standard deviation over observed values.
struct ColumnStats {
  std::vector<double> mean;
  std::vector<double> std;
};

class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(ColumnStats features, ColumnStats context);

  // Columns observed fewer than twice or with zero spread keep std = 1;
  // columns never observed get mean 0 and a warning.
  static Standardizer fit(std::span<const RawSubject> subjects);
  static Standardizer identity(std::size_t features, std::size_t context);

  // Transforms observed values; missing markers are preserved.
  RawSubject apply(const RawSubject& subject) const;

  const ColumnStats& features() const noexcept { return features_; }
  const ColumnStats& context() const noexcept { return context_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  ColumnStats features_;
  ColumnStats context_;
  std::vector<std::string> warnings_;
};

// Replaces missing context entries with 0 and marks them observed.
RawSubject impute_context(RawSubject subject);

}  // namespace ctsm
