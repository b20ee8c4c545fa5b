#pragma once

// Polarimetric preprocessing: scattering vectors, multilook second-order
// matrices, boxcar averaging and the real-valued channel cubes that feed the
// classifier.

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace polsar {

using cplx = std::complex<double>;
using CVec3 = std::array<cplx, 3>;

/// Monostatic scattering matrix of one pixel. Reciprocity is assumed, so a
/// single cross-polar term stands for both S_hv and S_vh.
struct ScatteringPixel {
  cplx s_hh;
  cplx s_hv;
  cplx s_vv;
};

/// One or more co-registered looks of per-pixel scattering matrices.
class ScatteringImage {
 public:
  ScatteringImage(int width, int height, int looks);

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] int looks() const noexcept { return static_cast<int>(looks_.size()); }

  ScatteringPixel& at(int look, int x, int y);
  [[nodiscard]] const ScatteringPixel& at(int look, int x, int y) const;

 private:
  int width_;
  int height_;
  std::vector<std::vector<ScatteringPixel>> looks_;
};

/// 3x3 complex Hermitian matrix stored as its real diagonal plus the three
/// upper-triangle entries (0,1), (0,2), (1,2).
struct Hermitian3 {
  std::array<double, 3> diag{};
  std::array<cplx, 3> upper{};

  [[nodiscard]] cplx operator()(int row, int col) const;
  [[nodiscard]] double trace() const noexcept { return diag[0] + diag[1] + diag[2]; }

  /// v v^H
  static Hermitian3 outer(const CVec3& v) noexcept;

  Hermitian3& operator+=(const Hermitian3& other) noexcept;
  Hermitian3& operator*=(double scale) noexcept;

  friend bool operator==(const Hermitian3&, const Hermitian3&) = default;
};

/// Hermitian and positive semidefinite, with eigenvalues >= -tol * trace.
[[nodiscard]] bool is_hermitian_psd(const Hermitian3& m, double rel_tol = 1e-10);
/// Eigenvalues in ascending order.
[[nodiscard]] std::array<double, 3> eigenvalues(const Hermitian3& m);

class HermitianImage {
 public:
  HermitianImage(int width, int height);

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }

  Hermitian3& at(int x, int y) { return pixels_[index(x, y)]; }
  [[nodiscard]] const Hermitian3& at(int x, int y) const { return pixels_[index(x, y)]; }

  [[nodiscard]] std::span<Hermitian3> pixels() noexcept { return pixels_; }
  [[nodiscard]] std::span<const Hermitian3> pixels() const noexcept { return pixels_; }

 private:
  [[nodiscard]] std::size_t index(int x, int y) const;

  int width_;
  int height_;
  std::vector<Hermitian3> pixels_;
};

enum class Stage : std::uint8_t { linear = 0, db = 1, scaled = 2 };

/// Affine record of a scaled channel: [min_db, max_db] was mapped to [-1, 1].
struct ChannelScaling {
  double min_db = 0.0;
  double max_db = 0.0;

  friend bool operator==(const ChannelScaling&, const ChannelScaling&) = default;
};

struct Channel {
  std::string name;
  std::vector<double> plane;  // row-major, width * height

  friend bool operator==(const Channel&, const Channel&) = default;
};

/// Real-valued multi-channel raster.
struct FeatureCube {
  int width = 0;
  int height = 0;
  Stage stage = Stage::linear;
  std::vector<Channel> channels;
  std::vector<ChannelScaling> scaling;  // empty, or one record per channel

  /// Throws std::invalid_argument when an invariant does not hold.
  void validate() const;

  [[nodiscard]] std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  [[nodiscard]] std::vector<std::string> channel_names() const;
  [[nodiscard]] std::optional<std::size_t> find_channel(std::string_view name) const;
  [[nodiscard]] double at(std::size_t channel, int x, int y) const {
    return channels[channel].plane[static_cast<std::size_t>(y) * width + x];
  }

  friend bool operator==(const FeatureCube&, const FeatureCube&) = default;
};

struct RealRaster {
  int width = 0;
  int height = 0;
  std::vector<double> values;
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // interleaved, row-major
};

enum class Basis { pauli, lexicographic };
enum class ChannelSet { T3, T3_SPAN, T3_C3 };

[[nodiscard]] std::string_view to_string(ChannelSet set) noexcept;
[[nodiscard]] ChannelSet parse_channel_set(std::string_view text);
[[nodiscard]] std::string_view to_string(Stage stage) noexcept;

/// k = [S_hh + S_vv, S_hh - S_vv, 2 S_hv] / sqrt(2)
[[nodiscard]] CVec3 pauli_vector(const ScatteringPixel& p) noexcept;
/// Omega = [S_hh, sqrt(2) S_hv, S_vv]
[[nodiscard]] CVec3 lexicographic_vector(const ScatteringPixel& p) noexcept;
/// |S_hh|^2 + 2 |S_hv|^2 + |S_vv|^2
[[nodiscard]] double span(const ScatteringPixel& p) noexcept;

/// (1/n) sum v_i v_i^H. Throws std::invalid_argument("no looks") on empty input.
[[nodiscard]] Hermitian3 second_order_average(std::span<const CVec3> vectors);

/// Per-pixel multilook coherency (pauli) or covariance (lexicographic) matrix.
[[nodiscard]] HermitianImage build_hermitian_image(const ScatteringImage& img, Basis basis);

/// Mean look span per pixel.
[[nodiscard]] RealRaster mean_span(const ScatteringImage& img);
/// Trace of every pixel's matrix.
[[nodiscard]] RealRaster trace_raster(const HermitianImage& h);

/// C = A^T T A for the real orthogonal A mapping Omega to k.
[[nodiscard]] Hermitian3 coherency_to_covariance(const Hermitian3& t) noexcept;
[[nodiscard]] HermitianImage coherency_to_covariance(const HermitianImage& t);

/// Mirror-reflected index (no edge repetition): -1 -> 1, n -> n - 2.
[[nodiscard]] int mirror_index(int i, int n) noexcept;

/// Element-wise window x window mean with mirror padding. Substitute for a
/// refined polarimetric speckle filter.
[[nodiscard]] HermitianImage boxcar_multilook(const HermitianImage& h, int window);

[[nodiscard]] FeatureCube extract_channels(const HermitianImage& coherency,
                                           const HermitianImage* covariance,
                                           const RealRaster* spans, ChannelSet set);

inline constexpr double kDefaultDbFloor = 1e-15;

/// v -> 10 log10(max(v, floor_eps)). Negative input throws DataError.
[[nodiscard]] FeatureCube db_transform(const FeatureCube& cube, double floor_eps = kDefaultDbFloor);

/// Per-channel global min/max affine map onto [-1, 1]; constant channels map to 0.
[[nodiscard]] FeatureCube scale_to_unit(const FeatureCube& cube);

/// Maps a dB cube with externally supplied scaling (e.g. from a trained model),
/// clamping to [-1, 1].
[[nodiscard]] FeatureCube apply_scaling(const FeatureCube& cube,
                                        std::span<const ChannelScaling> scaling);

/// Inverse of scale_to_unit using the stored records; returns a dB-stage cube.
[[nodiscard]] FeatureCube unscale(const FeatureCube& cube);

/// R = sqrt(T22), G = sqrt(T33), B = sqrt(T11) in dB, stretched between the
/// 1st and 99th percentile of the pooled three-channel distribution.
[[nodiscard]] RgbImage pauli_rgb(const HermitianImage& coherency);

}  // namespace polsar
