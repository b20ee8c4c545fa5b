#pragma once

#include "polsar/pipeline.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace polsar {

/// counts(t, p): pixels of truth class t+1 predicted as p+1. A prediction of 0
/// on a labeled pixel lands in the per-row rejected tally.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int classes, std::vector<std::string> class_names = {});
  /// Row-major K x K counts; optional rejected column (defaults to zeros).
  ConfusionMatrix(int classes, std::vector<std::uint64_t> counts,
                  std::vector<std::uint64_t> rejected = {},
                  std::vector<std::string> class_names = {});

  [[nodiscard]] int classes() const noexcept { return classes_; }
  [[nodiscard]] std::uint64_t count(int truth, int predicted) const;
  [[nodiscard]] std::uint64_t& count(int truth, int predicted);
  [[nodiscard]] std::uint64_t rejected(int truth) const;
  [[nodiscard]] std::uint64_t& rejected(int truth);
  [[nodiscard]] std::uint64_t row_sum(int truth) const;
  [[nodiscard]] std::uint64_t col_sum(int predicted) const;
  [[nodiscard]] std::uint64_t total() const;
  [[nodiscard]] std::uint64_t correct() const;
  [[nodiscard]] const std::vector<std::string>& class_names() const noexcept { return names_; }
  void set_class_names(std::vector<std::string> names);

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  int classes_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> rejected_;
  std::vector<std::string> names_;
};

/// Tally over pixels with truth > 0. Ids must not exceed `classes`.
[[nodiscard]] ConfusionMatrix confusion_matrix(const LabelRaster& pred, const LabelRaster& truth,
                                               int classes);

struct AccuracyStats {
  double overall = 0.0;
  std::vector<std::optional<double>> producer;  // recall; nullopt for an empty row
  std::vector<std::optional<double>> user;      // precision; nullopt for an empty column
  std::vector<std::uint64_t> row_totals;
  std::vector<std::uint64_t> col_totals;
  std::uint64_t correct = 0;
  std::uint64_t total = 0;
};

/// Throws std::invalid_argument on a matrix with no counts.
[[nodiscard]] AccuracyStats accuracy_stats(const ConfusionMatrix& cm);

/// "99.23%" at two decimals, or "NA".
[[nodiscard]] std::string format_percent(std::optional<double> fraction);

}  // namespace polsar
