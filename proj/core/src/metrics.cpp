#include "polsar/metrics.hpp"

#include "polsar/error.hpp"

#include <cstdio>
#include <stdexcept>

namespace polsar {

ConfusionMatrix::ConfusionMatrix(int classes, std::vector<std::string> class_names)
    : ConfusionMatrix(classes,
                      std::vector<std::uint64_t>(
                          static_cast<std::size_t>(classes > 0 ? classes * classes : 0), 0),
                      {}, std::move(class_names)) {}

ConfusionMatrix::ConfusionMatrix(int classes, std::vector<std::uint64_t> counts,
                                 std::vector<std::uint64_t> rejected,
                                 std::vector<std::string> class_names)
    : classes_(classes), counts_(std::move(counts)), rejected_(std::move(rejected)) {
  if (classes < 1) {
    throw std::invalid_argument("a confusion matrix needs at least one class");
  }
  const auto k = static_cast<std::size_t>(classes);
  if (counts_.size() != k * k) {
    throw std::invalid_argument("confusion matrix needs " + std::to_string(k * k) + " counts");
  }
  if (rejected_.empty()) {
    rejected_.assign(k, 0);
  } else if (rejected_.size() != k) {
    throw std::invalid_argument("rejected column must have one entry per class");
  }
  set_class_names(std::move(class_names));
}

void ConfusionMatrix::set_class_names(std::vector<std::string> names) {
  if (names.empty()) {
    for (int c = 1; c <= classes_; ++c) {
      names.push_back("class" + std::to_string(c));
    }
  }
  if (names.size() != static_cast<std::size_t>(classes_)) {
    throw std::invalid_argument("class name count does not match class count");
  }
  names_ = std::move(names);
}

std::uint64_t ConfusionMatrix::count(int truth, int predicted) const {
  return counts_.at(static_cast<std::size_t>(truth) * classes_ + predicted);
}

std::uint64_t& ConfusionMatrix::count(int truth, int predicted) {
  return counts_.at(static_cast<std::size_t>(truth) * classes_ + predicted);
}

std::uint64_t ConfusionMatrix::rejected(int truth) const {
  return rejected_.at(static_cast<std::size_t>(truth));
}

std::uint64_t& ConfusionMatrix::rejected(int truth) {
  return rejected_.at(static_cast<std::size_t>(truth));
}

std::uint64_t ConfusionMatrix::row_sum(int truth) const {
  std::uint64_t sum = rejected(truth);
  for (int p = 0; p < classes_; ++p) {
    sum += count(truth, p);
  }
  return sum;
}

std::uint64_t ConfusionMatrix::col_sum(int predicted) const {
  std::uint64_t sum = 0;
  for (int t = 0; t < classes_; ++t) {
    sum += count(t, predicted);
  }
  return sum;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t sum = 0;
  for (int t = 0; t < classes_; ++t) {
    sum += row_sum(t);
  }
  return sum;
}

std::uint64_t ConfusionMatrix::correct() const {
  std::uint64_t sum = 0;
  for (int c = 0; c < classes_; ++c) {
    sum += count(c, c);
  }
  return sum;
}

ConfusionMatrix confusion_matrix(const LabelRaster& pred, const LabelRaster& truth, int classes) {
  if (pred.width != truth.width || pred.height != truth.height) {
    throw DataError("prediction is " + std::to_string(pred.width) + "x" +
                    std::to_string(pred.height) + " but truth is " + std::to_string(truth.width) +
                    "x" + std::to_string(truth.height));
  }
  ConfusionMatrix cm(classes, truth.class_names.size() == static_cast<std::size_t>(classes)
                                  ? truth.class_names
                                  : std::vector<std::string>{});
  for (std::size_t i = 0; i < truth.ids.size(); ++i) {
    const int t = truth.ids[i];
    const int p = pred.ids[i];
    if (t < 0 || t > classes || p < 0 || p > classes) {
      throw DataError("class id outside [0, " + std::to_string(classes) + "] at pixel " +
                      std::to_string(i));
    }
    if (t == 0) {
      continue;
    }
    if (p == 0) {
      ++cm.rejected(t - 1);
    } else {
      ++cm.count(t - 1, p - 1);
    }
  }
  return cm;
}

AccuracyStats accuracy_stats(const ConfusionMatrix& cm) {
  AccuracyStats s;
  s.total = cm.total();
  if (s.total == 0) {
    throw std::invalid_argument("confusion matrix is empty");
  }
  s.correct = cm.correct();
  s.overall = static_cast<double>(s.correct) / static_cast<double>(s.total);
  for (int c = 0; c < cm.classes(); ++c) {
    const auto row = cm.row_sum(c);
    const auto col = cm.col_sum(c);
    const auto diag = static_cast<double>(cm.count(c, c));
    s.row_totals.push_back(row);
    s.col_totals.push_back(col);
    s.producer.push_back(row == 0 ? std::nullopt
                                  : std::optional<double>(diag / static_cast<double>(row)));
    s.user.push_back(col == 0 ? std::nullopt
                              : std::optional<double>(diag / static_cast<double>(col)));
  }
  return s;
}

std::string format_percent(std::optional<double> fraction) {
  if (!fraction) {
    return "NA";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", *fraction * 100.0);
  return buf;
}

}  // namespace polsar
