#include "polsar/polsar_core.hpp"

#include "polsar/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace polsar {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void require_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("image dimensions must be positive, got " +
                                std::to_string(width) + "x" + std::to_string(height));
  }
}

// Upper-triangle slot of (row, col) with row < col.
constexpr int upper_slot(int row, int col) noexcept { return row + col - 1; }

Eigen::Matrix3cd to_eigen(const Hermitian3& m) {
  Eigen::Matrix3cd out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out(r, c) = m(r, c);
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// ScatteringImage / Hermitian3 / HermitianImage

ScatteringImage::ScatteringImage(int width, int height, int looks)
    : width_(width), height_(height) {
  require_dims(width, height);
  if (looks < 1) {
    throw std::invalid_argument("a scattering image needs at least one look");
  }
  looks_.assign(static_cast<std::size_t>(looks),
                std::vector<ScatteringPixel>(static_cast<std::size_t>(width) * height));
}

ScatteringPixel& ScatteringImage::at(int look, int x, int y) {
  return looks_.at(static_cast<std::size_t>(look))[static_cast<std::size_t>(y) * width_ + x];
}

const ScatteringPixel& ScatteringImage::at(int look, int x, int y) const {
  return looks_.at(static_cast<std::size_t>(look))[static_cast<std::size_t>(y) * width_ + x];
}

cplx Hermitian3::operator()(int row, int col) const {
  if (row == col) {
    return {diag[static_cast<std::size_t>(row)], 0.0};
  }
  if (row < col) {
    return upper[static_cast<std::size_t>(upper_slot(row, col))];
  }
  return std::conj(upper[static_cast<std::size_t>(upper_slot(col, row))]);
}

Hermitian3 Hermitian3::outer(const CVec3& v) noexcept {
  Hermitian3 m;
  for (std::size_t i = 0; i < 3; ++i) {
    m.diag[i] = std::norm(v[i]);
  }
  m.upper[0] = v[0] * std::conj(v[1]);
  m.upper[1] = v[0] * std::conj(v[2]);
  m.upper[2] = v[1] * std::conj(v[2]);
  return m;
}

Hermitian3& Hermitian3::operator+=(const Hermitian3& other) noexcept {
  for (std::size_t i = 0; i < 3; ++i) {
    diag[i] += other.diag[i];
    upper[i] += other.upper[i];
  }
  return *this;
}

Hermitian3& Hermitian3::operator*=(double scale) noexcept {
  for (std::size_t i = 0; i < 3; ++i) {
    diag[i] *= scale;
    upper[i] *= scale;
  }
  return *this;
}

std::array<double, 3> eigenvalues(const Hermitian3& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> solver(to_eigen(m), Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {ev(0), ev(1), ev(2)};
}

bool is_hermitian_psd(const Hermitian3& m, double rel_tol) {
  for (double d : m.diag) {
    if (!std::isfinite(d) || d < 0.0) {
      return false;
    }
  }
  for (const cplx& u : m.upper) {
    if (!std::isfinite(u.real()) || !std::isfinite(u.imag())) {
      return false;
    }
  }
  const auto ev = eigenvalues(m);
  return ev[0] >= -rel_tol * std::max(m.trace(), 0.0);
}

HermitianImage::HermitianImage(int width, int height) : width_(width), height_(height) {
  require_dims(width, height);
  pixels_.resize(static_cast<std::size_t>(width) * height);
}

std::size_t HermitianImage::index(int x, int y) const {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) {
    throw std::out_of_range("pixel (" + std::to_string(x) + "," + std::to_string(y) +
                            ") outside image");
  }
  return static_cast<std::size_t>(y) * width_ + x;
}

// ---------------------------------------------------------------------------
// FeatureCube

void FeatureCube::validate() const {
  require_dims(width, height);
  std::set<std::string> seen;
  for (const auto& ch : channels) {
    if (ch.plane.size() != pixel_count()) {
      throw std::invalid_argument("channel '" + ch.name + "' has " +
                                  std::to_string(ch.plane.size()) + " values, expected " +
                                  std::to_string(pixel_count()));
    }
    if (!seen.insert(ch.name).second) {
      throw std::invalid_argument("duplicate channel name '" + ch.name + "'");
    }
  }
  if (!scaling.empty() && scaling.size() != channels.size()) {
    throw std::invalid_argument("scaling record count does not match channel count");
  }
  if (stage == Stage::scaled) {
    if (scaling.size() != channels.size()) {
      throw std::invalid_argument("scaled cube requires a scaling record per channel");
    }
    for (const auto& ch : channels) {
      for (double v : ch.plane) {
        if (!(v >= -1.0 && v <= 1.0)) {
          throw std::invalid_argument("scaled channel '" + ch.name +
                                      "' has a value outside [-1, 1]");
        }
      }
    }
  }
}

std::vector<std::string> FeatureCube::channel_names() const {
  std::vector<std::string> names;
  names.reserve(channels.size());
  for (const auto& ch : channels) {
    names.push_back(ch.name);
  }
  return names;
}

std::optional<std::size_t> FeatureCube::find_channel(std::string_view name) const {
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i].name == name) {
      return i;
    }
  }
  return std::nullopt;
}

std::string_view to_string(ChannelSet set) noexcept {
  switch (set) {
    case ChannelSet::T3: return "T3";
    case ChannelSet::T3_SPAN: return "T3_SPAN";
    case ChannelSet::T3_C3: return "T3_C3";
  }
  return "?";
}

ChannelSet parse_channel_set(std::string_view text) {
  if (text == "T3") return ChannelSet::T3;
  if (text == "T3_SPAN") return ChannelSet::T3_SPAN;
  if (text == "T3_C3") return ChannelSet::T3_C3;
  throw std::invalid_argument("unknown channel set '" + std::string(text) +
                              "' (expected T3, T3_SPAN or T3_C3)");
}

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::linear: return "linear";
    case Stage::db: return "db";
    case Stage::scaled: return "scaled";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Scattering vectors

CVec3 pauli_vector(const ScatteringPixel& p) noexcept {
  return {(p.s_hh + p.s_vv) * kInvSqrt2, (p.s_hh - p.s_vv) * kInvSqrt2,
          2.0 * p.s_hv * kInvSqrt2};
}

CVec3 lexicographic_vector(const ScatteringPixel& p) noexcept {
  return {p.s_hh, std::numbers::sqrt2 * p.s_hv, p.s_vv};
}

double span(const ScatteringPixel& p) noexcept {
  return std::norm(p.s_hh) + 2.0 * std::norm(p.s_hv) + std::norm(p.s_vv);
}

Hermitian3 second_order_average(std::span<const CVec3> vectors) {
  if (vectors.empty()) {
    throw std::invalid_argument("no looks");
  }
  Hermitian3 sum;
  for (const auto& v : vectors) {
    sum += Hermitian3::outer(v);
  }
  sum *= 1.0 / static_cast<double>(vectors.size());
  return sum;
}

HermitianImage build_hermitian_image(const ScatteringImage& img, Basis basis) {
  HermitianImage out(img.width(), img.height());
  std::vector<CVec3> looks(static_cast<std::size_t>(img.looks()));
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int l = 0; l < img.looks(); ++l) {
        const auto& p = img.at(l, x, y);
        looks[static_cast<std::size_t>(l)] =
            basis == Basis::pauli ? pauli_vector(p) : lexicographic_vector(p);
      }
      out.at(x, y) = second_order_average(looks);
    }
  }
  return out;
}

RealRaster mean_span(const ScatteringImage& img) {
  RealRaster out{img.width(), img.height(), {}};
  out.values.resize(static_cast<std::size_t>(img.width()) * img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double sum = 0.0;
      for (int l = 0; l < img.looks(); ++l) {
        sum += span(img.at(l, x, y));
      }
      out.values[static_cast<std::size_t>(y) * img.width() + x] = sum / img.looks();
    }
  }
  return out;
}

RealRaster trace_raster(const HermitianImage& h) {
  RealRaster out{h.width(), h.height(), {}};
  out.values.reserve(h.pixels().size());
  for (const auto& m : h.pixels()) {
    out.values.push_back(m.trace());
  }
  return out;
}

Hermitian3 coherency_to_covariance(const Hermitian3& t) noexcept {
  // k = A Omega with A = [[1,0,1]/r2, [1,0,-1]/r2, [0,1,0]], A real orthogonal.
  static constexpr double a[3][3] = {
      {kInvSqrt2, 0.0, kInvSqrt2}, {kInvSqrt2, 0.0, -kInvSqrt2}, {0.0, 1.0, 0.0}};
  cplx c[3][3];
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      cplx acc{0.0, 0.0};
      for (int p = 0; p < 3; ++p) {
        for (int q = 0; q < 3; ++q) {
          const double w = a[p][i] * a[q][j];
          if (w != 0.0) {
            acc += w * t(p, q);
          }
        }
      }
      c[i][j] = acc;
    }
  }
  Hermitian3 out;
  for (int i = 0; i < 3; ++i) {
    out.diag[static_cast<std::size_t>(i)] = c[i][i].real();
  }
  out.upper[0] = c[0][1];
  out.upper[1] = c[0][2];
  out.upper[2] = c[1][2];
  return out;
}

HermitianImage coherency_to_covariance(const HermitianImage& t) {
  HermitianImage out(t.width(), t.height());
  auto dst = out.pixels();
  auto src = t.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = coherency_to_covariance(src[i]);
  }
  return out;
}

int mirror_index(int i, int n) noexcept {
  if (n <= 1) {
    return 0;
  }
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) {
    i += period;
  }
  return i < n ? i : period - i;
}

HermitianImage boxcar_multilook(const HermitianImage& h, int window) {
  if (window < 1 || window % 2 == 0) {
    throw std::invalid_argument("boxcar window must be a positive odd integer, got " +
                                std::to_string(window));
  }
  if (window == 1) {
    return h;
  }
  const int radius = window / 2;
  const double inv = 1.0 / (static_cast<double>(window) * window);
  HermitianImage out(h.width(), h.height());
  for (int y = 0; y < h.height(); ++y) {
    for (int x = 0; x < h.width(); ++x) {
      Hermitian3 acc;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int yy = mirror_index(y + dy, h.height());
        for (int dx = -radius; dx <= radius; ++dx) {
          acc += h.at(mirror_index(x + dx, h.width()), yy);
        }
      }
      acc *= inv;
      out.at(x, y) = acc;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Channel cubes

FeatureCube extract_channels(const HermitianImage& coherency, const HermitianImage* covariance,
                             const RealRaster* spans, ChannelSet set) {
  const int w = coherency.width();
  const int h = coherency.height();
  FeatureCube cube;
  cube.width = w;
  cube.height = h;
  cube.stage = Stage::linear;

  auto diagonal = [](const HermitianImage& img, std::size_t d) {
    std::vector<double> plane;
    plane.reserve(img.pixels().size());
    for (const auto& m : img.pixels()) {
      plane.push_back(m.diag[d]);
    }
    return plane;
  };

  for (std::size_t d = 0; d < 3; ++d) {
    cube.channels.push_back({"T" + std::to_string(d + 1) + std::to_string(d + 1),
                             diagonal(coherency, d)});
  }

  if (set == ChannelSet::T3_SPAN) {
    if (spans == nullptr) {
      throw std::invalid_argument("channel set T3_SPAN requires the span raster");
    }
    if (spans->width != w || spans->height != h ||
        spans->values.size() != cube.pixel_count()) {
      throw std::invalid_argument("span raster dimensions do not match the coherency image");
    }
    cube.channels.push_back({"span", spans->values});
  } else if (set == ChannelSet::T3_C3) {
    if (covariance == nullptr) {
      throw std::invalid_argument("channel set T3_C3 requires the covariance image");
    }
    if (covariance->width() != w || covariance->height() != h) {
      throw std::invalid_argument("covariance image dimensions do not match the coherency image");
    }
    for (std::size_t d = 0; d < 3; ++d) {
      cube.channels.push_back({"C" + std::to_string(d + 1) + std::to_string(d + 1),
                               diagonal(*covariance, d)});
    }
  }
  return cube;
}

FeatureCube db_transform(const FeatureCube& cube, double floor_eps) {
  if (!(floor_eps > 0.0)) {
    throw std::invalid_argument("dB floor must be positive");
  }
  if (cube.stage != Stage::linear) {
    throw std::invalid_argument("db_transform expects a linear-stage cube");
  }
  FeatureCube out = cube;
  out.stage = Stage::db;
  out.scaling.clear();
  for (auto& ch : out.channels) {
    for (double& v : ch.plane) {
      if (v < 0.0) {
        throw DataError("negative intensity in channel '" + ch.name + "'");
      }
      v = 10.0 * std::log10(std::max(v, floor_eps));
    }
  }
  return out;
}

namespace {

double to_unit(double v, const ChannelScaling& s) noexcept {
  if (s.max_db == s.min_db) {
    return 0.0;
  }
  return 2.0 * (v - s.min_db) / (s.max_db - s.min_db) - 1.0;
}

}  // namespace

FeatureCube scale_to_unit(const FeatureCube& cube) {
  if (cube.stage != Stage::db) {
    throw std::invalid_argument("scale_to_unit expects a dB-stage cube");
  }
  FeatureCube out = cube;
  out.stage = Stage::scaled;
  out.scaling.clear();
  for (auto& ch : out.channels) {
    const auto [lo, hi] = std::minmax_element(ch.plane.begin(), ch.plane.end());
    const ChannelScaling s{*lo, *hi};
    for (double& v : ch.plane) {
      // Pin the extrema so rounding never pushes a value past +-1.
      v = std::clamp(to_unit(v, s), -1.0, 1.0);
    }
    out.scaling.push_back(s);
  }
  return out;
}

FeatureCube apply_scaling(const FeatureCube& cube, std::span<const ChannelScaling> scaling) {
  if (cube.stage != Stage::db) {
    throw std::invalid_argument("apply_scaling expects a dB-stage cube");
  }
  if (scaling.size() != cube.channels.size()) {
    throw std::invalid_argument("scaling has " + std::to_string(scaling.size()) +
                                " records for " + std::to_string(cube.channels.size()) +
                                " channels");
  }
  FeatureCube out = cube;
  out.stage = Stage::scaled;
  out.scaling.assign(scaling.begin(), scaling.end());
  for (std::size_t c = 0; c < out.channels.size(); ++c) {
    for (double& v : out.channels[c].plane) {
      v = std::clamp(to_unit(v, scaling[c]), -1.0, 1.0);
    }
  }
  return out;
}

FeatureCube unscale(const FeatureCube& cube) {
  if (cube.stage != Stage::scaled || cube.scaling.size() != cube.channels.size()) {
    throw std::invalid_argument("unscale expects a scaled cube with scaling records");
  }
  FeatureCube out = cube;
  out.stage = Stage::db;
  out.scaling.clear();
  for (std::size_t c = 0; c < out.channels.size(); ++c) {
    const auto& s = cube.scaling[c];
    for (double& v : out.channels[c].plane) {
      v = s.min_db + (v + 1.0) * 0.5 * (s.max_db - s.min_db);
    }
  }
  return out;
}

RgbImage pauli_rgb(const HermitianImage& coherency) {
  const std::size_t n = coherency.pixels().size();
  // Channel order R, G, B <- T22, T33, T11.
  constexpr std::array<std::size_t, 3> source{1, 2, 0};
  std::array<std::vector<double>, 3> db;
  for (std::size_t c = 0; c < 3; ++c) {
    db[c].reserve(n);
    for (const auto& m : coherency.pixels()) {
      const double amplitude = std::sqrt(std::max(m.diag[source[c]], 0.0));
      db[c].push_back(20.0 * std::log10(std::max(amplitude, 1e-30)));
    }
  }

  std::vector<double> pooled;
  pooled.reserve(3 * n);
  for (const auto& plane : db) {
    pooled.insert(pooled.end(), plane.begin(), plane.end());
  }
  auto percentile = [&pooled](double q) {
    const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(pooled.size() - 1)));
    std::nth_element(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(k), pooled.end());
    return pooled[k];
  };
  const double lo = percentile(0.01);
  const double hi = percentile(0.99);

  RgbImage out{coherency.width(), coherency.height(), {}};
  out.rgb.resize(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      double v = hi > lo ? (db[c][i] - lo) / (hi - lo) : 0.5;
      v = std::clamp(v, 0.0, 1.0);
      out.rgb[3 * i + c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
  }
  return out;
}

}  // namespace polsar
