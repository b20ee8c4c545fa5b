#include "polsar/pipeline.hpp"

#include "polsar/error.hpp"
#include "polsar/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <thread>

namespace polsar {

LabelRaster::LabelRaster(int w, int h, int fill) : width(w), height(h) {
  if (w <= 0 || h <= 0) {
    throw std::invalid_argument("label raster dimensions must be positive");
  }
  ids.assign(static_cast<std::size_t>(w) * h, fill);
}

int LabelRaster::max_id() const noexcept {
  return ids.empty() ? 0 : *std::max_element(ids.begin(), ids.end());
}

std::vector<std::size_t> LabelRaster::histogram() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(max_id(), 0)) + 1, 0);
  for (int id : ids) {
    if (id >= 0) {
      ++counts[static_cast<std::size_t>(id)];
    }
  }
  return counts;
}

void SamplingSpec::validate() const {
  if (per_class.has_value() == fraction.has_value()) {
    throw std::invalid_argument("sampling needs exactly one of per-class count or fraction");
  }
  if (per_class && *per_class < 1) {
    throw std::invalid_argument("per-class sample count must be >= 1");
  }
  if (fraction && !(*fraction > 0.0 && *fraction < 1.0)) {
    throw std::invalid_argument("sampling fraction must lie in (0, 1)");
  }
}

std::map<int, std::size_t> SampleSet::class_counts() const {
  std::map<int, std::size_t> counts;
  for (const auto& p : points) {
    ++counts[p.class_id];
  }
  return counts;
}

SampleSet sample_training_pixels(const LabelRaster& labels, const SamplingSpec& spec,
                                 std::uint64_t seed) {
  spec.validate();
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.ids.size(); ++i) {
    const int id = labels.ids[i];
    if (id < 0) {
      throw DataError("negative class id in label raster");
    }
    if (id > 0) {
      by_class[id].push_back(i);
    }
  }
  if (by_class.empty()) {
    throw DataError("label raster has no labeled pixels");
  }

  SampleSet out;
  out.source_width = labels.width;
  out.source_height = labels.height;
  out.spec = spec;
  out.seed = seed;

  for (auto& [id, pixels] : by_class) {
    std::size_t want = 0;
    if (spec.per_class) {
      want = static_cast<std::size_t>(*spec.per_class);
    } else {
      // Tolerance keeps products like 0.07 * 100 = 7.000000000000001 at 7.
      want = static_cast<std::size_t>(
          std::ceil(*spec.fraction * static_cast<double>(pixels.size()) - 1e-9));
    }
    if (want > pixels.size()) {
      const std::string msg = "class " + std::to_string(id) + " has " +
                              std::to_string(pixels.size()) + " labeled pixels, " +
                              std::to_string(want) + " requested";
      if (!spec.clamp_to_available) {
        throw DataError(msg);
      }
      out.warnings.push_back(msg + "; using all available");
      want = pixels.size();
    }
    // Partial Fisher-Yates: the first `want` slots become the selection.
    CounterRng rng(seed, static_cast<std::uint64_t>(id));
    for (std::size_t i = 0; i < want; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(pixels.size() - i));
      std::swap(pixels[i], pixels[j]);
    }
    std::vector<std::size_t> chosen(pixels.begin(),
                                    pixels.begin() + static_cast<std::ptrdiff_t>(want));
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t idx : chosen) {
      out.points.push_back({static_cast<int>(idx % static_cast<std::size_t>(labels.width)),
                            static_cast<int>(idx / static_cast<std::size_t>(labels.width)), id});
    }
  }
  return out;
}

TrainValidationSplit split_train_validation(const SampleSet& samples, double ratio,
                                            std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("validation ratio must lie in (0, 1)");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < samples.points.size(); ++i) {
    by_class[samples.points[i].class_id].push_back(i);
  }

  std::vector<bool> to_validation(samples.points.size(), false);
  TrainValidationSplit out;
  for (auto& [id, members] : by_class) {
    const auto n_val = static_cast<std::size_t>(
        std::floor(ratio * static_cast<double>(members.size())));
    if (n_val == 0) {
      out.warnings.push_back("class " + std::to_string(id) + " has " +
                             std::to_string(members.size()) +
                             " sample(s); none moved to validation");
    }
    CounterRng rng(seed, 0x56414C00ULL + static_cast<std::uint64_t>(id));
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t i = 0; i < n_val; ++i) {
      to_validation[members[i]] = true;
    }
  }

  out.train.source_width = out.validation.source_width = samples.source_width;
  out.train.source_height = out.validation.source_height = samples.source_height;
  out.train.spec = samples.spec;
  out.validation.spec = samples.spec;
  out.train.seed = out.validation.seed = samples.seed;
  for (std::size_t i = 0; i < samples.points.size(); ++i) {
    (to_validation[i] ? out.validation : out.train).points.push_back(samples.points[i]);
  }
  out.train.warnings = out.warnings;
  return out;
}

void extract_patch_into(const FeatureCube& cube, int x, int y, cnn::Patch& patch) {
  const int n = patch.size;
  const int radius = n / 2;
  for (int c = 0; c < patch.channels; ++c) {
    const auto& plane = cube.channels[static_cast<std::size_t>(c)].plane;
    auto dst = patch.channel(c);
    for (int r = 0; r < n; ++r) {
      const int yy = mirror_index(y - radius + r, cube.height);
      const double* row = plane.data() + static_cast<std::size_t>(yy) * cube.width;
      double* out = dst.data() + static_cast<std::size_t>(r) * n;
      const int x0 = x - radius;
      if (x0 >= 0 && x0 + n <= cube.width) {
        std::copy(row + x0, row + x0 + n, out);
      } else {
        for (int col = 0; col < n; ++col) {
          out[col] = row[mirror_index(x0 + col, cube.width)];
        }
      }
    }
  }
}

cnn::Patch extract_patch(const FeatureCube& cube, int x, int y, int window) {
  if (window < 1 || window % 2 == 0) {
    throw std::invalid_argument("window must be a positive odd integer, got " +
                                std::to_string(window));
  }
  if (cube.stage != Stage::scaled) {
    throw std::invalid_argument("patches are extracted from scaled cubes only (cube stage is " +
                                std::string(to_string(cube.stage)) + ")");
  }
  if (x < 0 || y < 0 || x >= cube.width || y >= cube.height) {
    throw std::out_of_range("pixel (" + std::to_string(x) + "," + std::to_string(y) +
                            ") outside cube");
  }
  cnn::Patch patch(static_cast<int>(cube.channels.size()), window);
  extract_patch_into(cube, x, y, patch);
  return patch;
}

std::vector<cnn::Sample> build_dataset(const FeatureCube& cube, const SampleSet& samples,
                                       int window) {
  if (samples.source_width != cube.width || samples.source_height != cube.height) {
    throw DataError("sample set was drawn from a " + std::to_string(samples.source_width) + "x" +
                    std::to_string(samples.source_height) + " raster but the cube is " +
                    std::to_string(cube.width) + "x" + std::to_string(cube.height));
  }
  std::vector<cnn::Sample> out;
  out.reserve(samples.points.size());
  for (const auto& p : samples.points) {
    if (p.class_id < 1) {
      throw DataError("sample at (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                      ") has no class");
    }
    out.push_back({extract_patch(cube, p.x, p.y, window), p.class_id - 1});
  }
  return out;
}

namespace {

std::string join(const std::vector<std::string>& names) {
  std::string out = "[";
  for (std::size_t i = 0; i < names.size(); ++i) {
    out += (i ? ", " : "") + names[i];
  }
  return out + "]";
}

}  // namespace

Classification classify_image(const cnn::CompactCnn& net, const FeatureCube& cube, int window,
                              unsigned threads) {
  const auto& cfg = net.config();
  if (window != cfg.window) {
    throw std::invalid_argument("window " + std::to_string(window) +
                                " does not match the network window " +
                                std::to_string(cfg.window));
  }
  if (cube.stage != Stage::scaled) {
    throw std::invalid_argument("classification needs a scaled cube");
  }
  const auto names = cube.channel_names();
  const bool names_differ = !net.channel_names.empty() && net.channel_names != names;
  if (names_differ || static_cast<int>(names.size()) != cfg.input_channels) {
    throw DataError("channel mismatch: model expects " +
                    (net.channel_names.empty()
                         ? std::to_string(cfg.input_channels) + " channels"
                         : join(net.channel_names)) +
                    ", cube has " + join(names));
  }

  const int classes = cfg.num_classes;
  Classification out;
  out.labels = LabelRaster(cube.width, cube.height);
  out.scores.assign(static_cast<std::size_t>(classes), std::vector<double>(cube.pixel_count()));

  auto work = [&](int row_begin, int row_end) {
    cnn::Patch patch(cfg.input_channels, window);
    cnn::ForwardTrace trace;
    for (int y = row_begin; y < row_end; ++y) {
      for (int x = 0; x < cube.width; ++x) {
        extract_patch_into(cube, x, y, patch);
        const auto scores = net.forward(patch, trace);
        const auto idx = static_cast<std::size_t>(y) * cube.width + x;
        for (std::size_t c = 0; c < scores.size(); ++c) {
          out.scores[c][idx] = scores[c];
        }
        out.labels.ids[idx] = cnn::argmax(scores) + 1;
      }
    }
  };

  unsigned n = threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : threads;
  n = std::min<unsigned>(n, static_cast<unsigned>(cube.height));
  if (n <= 1) {
    work(0, cube.height);
    return out;
  }
  std::vector<std::jthread> pool;
  const int chunk = (cube.height + static_cast<int>(n) - 1) / static_cast<int>(n);
  for (int begin = 0; begin < cube.height; begin += chunk) {
    pool.emplace_back(work, begin, std::min(cube.height, begin + chunk));
  }
  return out;
}

LabelRaster cross_site_remap(const LabelRaster& labels, const ClassMapping& mapping) {
  LabelRaster out = labels;
  for (int& id : out.ids) {
    if (id == 0) {
      continue;
    }
    const auto it = mapping.find(id);
    if (it == mapping.end()) {
      throw DataError("class id " + std::to_string(id) + " has no remap rule");
    }
    id = it->second.value_or(0);
  }
  out.class_names.clear();
  return out;
}

LabelRaster exclude_pixels(const LabelRaster& truth, const std::vector<SamplePoint>& points) {
  LabelRaster out = truth;
  for (const auto& p : points) {
    if (p.x < 0 || p.y < 0 || p.x >= truth.width || p.y >= truth.height) {
      throw DataError("excluded pixel (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                      ") lies outside the raster");
    }
    out.at(p.x, p.y) = 0;
  }
  return out;
}

}  // namespace polsar
