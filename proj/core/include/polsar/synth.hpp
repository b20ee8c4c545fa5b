#pragma once

// Synthetic multilook PolSAR scenes under the complex-Wishart clutter model.
// Each pixel draws `looks` circular complex Gaussian Pauli vectors from its
// class coherency matrix and averages their outer products.

#include "polsar/pipeline.hpp"
#include "polsar/polsar_core.hpp"
#include "polsar/rng.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

namespace polsar::synth {

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct Rect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
};

/// Pixels (x, y) within `radius` of (cx, cy), pixel centres at integer coordinates.
struct Disk {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.0;
};

struct Region {
  std::variant<Rect, Disk> shape;
  int class_id = 1;

  [[nodiscard]] bool contains(int x, int y) const noexcept;
};

/// Regions are painted in order (later regions win); pixels no region covers
/// take the background class, if any.
struct SceneSpec {
  int width = 0;
  int height = 0;
  std::vector<Region> regions;
  std::optional<int> background_class;
  std::map<int, Hermitian3> class_models;  // class id -> coherency matrix (Pauli basis)
  int looks = 4;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on bad dimensions, looks, or a model that is
  /// not Hermitian PSD, and DataError on a region whose class has no model.
  void validate() const;
};

/// Lower-triangular L with L L^H = sigma. Rank-deficient sigma is accepted;
/// columns with a vanishing pivot are zero. Throws std::invalid_argument for
/// a non-PSD matrix.
struct CholeskyFactor {
  std::array<cplx, 6> lower{};  // (0,0) (1,0) (1,1) (2,0) (2,1) (2,2)
};
[[nodiscard]] CholeskyFactor cholesky(const Hermitian3& sigma);

/// k = L z with z i.i.d. standard circular complex Gaussian.
[[nodiscard]] CVec3 sample_scattering_vector(const CholeskyFactor& factor, CounterRng& rng);
[[nodiscard]] CVec3 sample_scattering_vector(const Hermitian3& sigma, CounterRng& rng);

struct Scene {
  HermitianImage coherency;
  LabelRaster labels;
};

/// Class id of every pixel; throws DataError for an uncovered pixel.
[[nodiscard]] LabelRaster rasterize_labels(const SceneSpec& spec);

/// The looks drawn for pixel (x, y); generate_scene averages exactly these.
[[nodiscard]] std::vector<CVec3> pixel_looks(const SceneSpec& spec, int class_id, int x, int y);

/// Deterministic per seed and independent of `threads` (0 = hardware).
[[nodiscard]] Scene generate_scene(const SceneSpec& spec, unsigned threads = 0);

/// 256 x 256, four quadrants, 4 looks:
///   1 top-left  diag(1.0, 0.1, 0.05)
///   2 top-right diag(0.1, 1.0, 0.05)
///   3 bottom-left diag(0.3, 0.3, 0.3)
///   4 bottom-right [[0.5, 0.2, 0], [0.2, 0.5, 0], [0, 0, 0.2]]
[[nodiscard]] SceneSpec synth4_preset(std::uint64_t seed, int size = 256);

}  // namespace polsar::synth
