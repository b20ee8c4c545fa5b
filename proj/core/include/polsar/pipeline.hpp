#pragma once

// Training-set construction, sliding-window classification and class
// remapping for cross-site evaluation.
//
// Class ids are 1-based in rasters and sample sets (0 = unlabeled) and
// 0-based inside the network; build_dataset and classify_image are the only
// places that convert.

#include "polsar/cnn.hpp"
#include "polsar/polsar_core.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace polsar {

struct LabelRaster {
  int width = 0;
  int height = 0;
  std::vector<int> ids;  // row-major
  std::vector<std::string> class_names;

  LabelRaster() = default;
  LabelRaster(int w, int h, int fill = 0);

  [[nodiscard]] int& at(int x, int y) { return ids[static_cast<std::size_t>(y) * width + x]; }
  [[nodiscard]] int at(int x, int y) const { return ids[static_cast<std::size_t>(y) * width + x]; }
  [[nodiscard]] int max_id() const noexcept;
  /// Pixel count per id, indexed 0..max_id.
  [[nodiscard]] std::vector<std::size_t> histogram() const;

  friend bool operator==(const LabelRaster&, const LabelRaster&) = default;
};

struct SamplingSpec {
  std::optional<int> per_class;
  std::optional<double> fraction;
  bool clamp_to_available = false;

  static SamplingSpec count(int n) { return {n, std::nullopt, false}; }
  static SamplingSpec ratio(double f) { return {std::nullopt, f, false}; }

  void validate() const;
};

struct SamplePoint {
  int x = 0;
  int y = 0;
  int class_id = 0;  // 1-based

  friend bool operator==(const SamplePoint&, const SamplePoint&) = default;
  friend auto operator<=>(const SamplePoint&, const SamplePoint&) = default;
};

struct SampleSet {
  std::vector<SamplePoint> points;
  int source_width = 0;
  int source_height = 0;
  SamplingSpec spec;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  /// Number of samples per class id (index 0 unused).
  [[nodiscard]] std::map<int, std::size_t> class_counts() const;
};

/// Uniform per-class sampling without replacement over labeled pixels. Each
/// class draws from its own seeded stream; within a class the selected pixels
/// are returned in row-major order, classes ascending.
/// Throws DataError when a class is too small unless spec.clamp_to_available.
[[nodiscard]] SampleSet sample_training_pixels(const LabelRaster& labels, const SamplingSpec& spec,
                                               std::uint64_t seed);

struct TrainValidationSplit {
  SampleSet train;
  SampleSet validation;
  std::vector<std::string> warnings;
};

/// Stratified split; each class of size s sends floor(ratio * s) samples to
/// validation. Relative order inside each output follows the input.
[[nodiscard]] TrainValidationSplit split_train_validation(const SampleSet& samples, double ratio,
                                                          std::uint64_t seed);

/// N x N window per channel centred on (x, y), mirror-reflected at the edges.
[[nodiscard]] cnn::Patch extract_patch(const FeatureCube& cube, int x, int y, int window);

/// Allocation-free variant; `patch` must already have the right shape.
void extract_patch_into(const FeatureCube& cube, int x, int y, cnn::Patch& patch);

[[nodiscard]] std::vector<cnn::Sample> build_dataset(const FeatureCube& cube,
                                                     const SampleSet& samples, int window);

struct Classification {
  LabelRaster labels;
  std::vector<std::vector<double>> scores;  // one raster per class, row-major
};

/// Classifies every pixel. `threads` = 0 picks the hardware concurrency; the
/// result does not depend on the thread count.
[[nodiscard]] Classification classify_image(const cnn::CompactCnn& net, const FeatureCube& cube,
                                            int window, unsigned threads = 0);

/// source id -> target id, or std::nullopt to drop (relabel as unlabeled).
using ClassMapping = std::map<int, std::optional<int>>;

[[nodiscard]] LabelRaster cross_site_remap(const LabelRaster& labels, const ClassMapping& mapping);

/// Copy of `truth` with the given coordinates set to unlabeled.
[[nodiscard]] LabelRaster exclude_pixels(const LabelRaster& truth,
                                         const std::vector<SamplePoint>& points);

}  // namespace polsar
