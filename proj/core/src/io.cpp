#include "polsar/io.hpp"

#include "byte_io.hpp"
#include "polsar/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace polsar::io {

namespace detail {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open '" + path.string() + "' for reading");
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("cannot open '" + path.string() + "' for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw DataError("failed writing '" + path.string() + "'");
  }
}

}  // namespace detail

using detail::ByteReader;
using detail::ByteWriter;

namespace {

constexpr std::string_view kCubeMagic = "POLC1";
constexpr std::string_view kModelMagic = "PCNN1";

void expect_magic(ByteReader& r, std::string_view magic) {
  const auto got = r.raw(std::min(magic.size(), r.remaining()), "magic");
  if (got != magic) {
    throw FormatError("bad magic: expected '" + std::string(magic) + "'", 0);
  }
}

Stage decode_stage(std::uint8_t v, std::size_t offset) {
  if (v > 2) {
    throw FormatError("unknown stage tag " + std::to_string(v), offset);
  }
  return static_cast<Stage>(v);
}

}  // namespace

// ---------------------------------------------------------------------------
// Cube

std::vector<std::uint8_t> encode_cube(const FeatureCube& cube) {
  cube.validate();
  ByteWriter w;
  w.reserve(64 + cube.pixel_count() * cube.channels.size() * 8);
  w.raw(kCubeMagic);
  w.u32(static_cast<std::uint32_t>(cube.width));
  w.u32(static_cast<std::uint32_t>(cube.height));
  w.u32(static_cast<std::uint32_t>(cube.channels.size()));
  w.u8(static_cast<std::uint8_t>(cube.stage));
  w.u8(cube.scaling.empty() ? 0 : 1);
  for (const auto& ch : cube.channels) {
    w.string16(ch.name);
  }
  for (const auto& s : cube.scaling) {
    w.f64(s.min_db);
    w.f64(s.max_db);
  }
  for (const auto& ch : cube.channels) {
    for (double v : ch.plane) {
      w.f64(v);
    }
  }
  return std::move(w).take();
}

FeatureCube decode_cube(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  expect_magic(r, kCubeMagic);
  FeatureCube cube;
  const auto dims_at = r.position();
  const auto width = r.u32("width");
  const auto height = r.u32("height");
  const auto channels = r.u32("channel count");
  if (width == 0 || height == 0 || width > 0x7FFFFFFF || height > 0x7FFFFFFF) {
    throw FormatError("invalid cube dimensions " + std::to_string(width) + "x" +
                          std::to_string(height),
                      dims_at);
  }
  cube.width = static_cast<int>(width);
  cube.height = static_cast<int>(height);
  const auto stage_at = r.position();
  cube.stage = decode_stage(r.u8("stage"), stage_at);
  const auto scaling_at = r.position();
  const auto has_scaling = r.u8("scaling flag");
  if (has_scaling > 1) {
    throw FormatError("invalid scaling flag", scaling_at);
  }
  for (std::uint32_t c = 0; c < channels; ++c) {
    cube.channels.push_back({r.string16("channel name"), {}});
  }
  if (has_scaling) {
    for (std::uint32_t c = 0; c < channels; ++c) {
      const double lo = r.f64("scaling");
      const double hi = r.f64("scaling");
      cube.scaling.push_back({lo, hi});
    }
  }

  const auto payload_at = r.position();
  const std::uint64_t pixels = std::uint64_t{width} * height;
  const std::uint64_t expected = pixels * channels * 8;
  if (r.remaining() != expected) {
    throw FormatError("payload length mismatch: expected " + std::to_string(expected) +
                          " bytes, found " + std::to_string(r.remaining()),
                      payload_at);
  }
  for (auto& ch : cube.channels) {
    ch.plane.resize(pixels);
    for (double& v : ch.plane) {
      v = r.f64("payload");
    }
  }
  try {
    cube.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("inconsistent cube: ") + e.what(), dims_at);
  }
  return cube;
}

void write_cube(const FeatureCube& cube, const std::filesystem::path& path) {
  detail::write_file(path, encode_cube(cube));
}

FeatureCube read_cube(const std::filesystem::path& path) {
  return decode_cube(detail::read_file(path));
}

// ---------------------------------------------------------------------------
// Model

std::vector<std::uint8_t> encode_model(const cnn::CompactCnn& net) {
  const auto& cfg = net.config();
  ByteWriter w;
  w.raw(kModelMagic);
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(cfg.input_channels));
  w.u32(static_cast<std::uint32_t>(cfg.window));
  w.u32(static_cast<std::uint32_t>(cfg.cnn_layers.size()));
  for (const auto& l : cfg.cnn_layers) {
    for (int v : {l.neurons, l.kx, l.ky, l.ssx, l.ssy}) {
      w.u32(static_cast<std::uint32_t>(v));
    }
  }
  w.u32(static_cast<std::uint32_t>(cfg.mlp_layers.size()));
  for (int n : cfg.mlp_layers) {
    w.u32(static_cast<std::uint32_t>(n));
  }
  w.u32(static_cast<std::uint32_t>(cfg.num_classes));
  w.u8(static_cast<std::uint8_t>(cfg.activation));
  w.u64(cfg.seed);
  w.u32(static_cast<std::uint32_t>(net.channel_names.size()));
  for (const auto& name : net.channel_names) {
    w.string16(name);
  }
  w.u8(net.scaling.empty() ? 0 : 1);
  for (const auto& s : net.scaling) {
    w.f64(s.min_db);
    w.f64(s.max_db);
  }
  const auto params = net.parameters();
  w.u64(params.size());
  for (double p : params) {
    w.f64(p);
  }
  return std::move(w).take();
}

cnn::CompactCnn decode_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  expect_magic(r, kModelMagic);
  const auto version_at = r.position();
  const auto version = r.u32("format version");
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version) +
                          " (supported: " + std::to_string(kModelFormatVersion) + ")",
                      version_at);
  }
  cnn::NetworkConfig cfg;
  const auto config_at = r.position();
  cfg.input_channels = static_cast<int>(r.u32("input channels"));
  cfg.window = static_cast<int>(r.u32("window"));
  const auto n_cnn = r.u32("CNN layer count");
  if (n_cnn > 1024) {
    throw FormatError("implausible CNN layer count " + std::to_string(n_cnn), config_at);
  }
  cfg.cnn_layers.clear();
  for (std::uint32_t l = 0; l < n_cnn; ++l) {
    cnn::ConvLayerSpec spec;
    spec.neurons = static_cast<int>(r.u32("layer neurons"));
    spec.kx = static_cast<int>(r.u32("kernel rows"));
    spec.ky = static_cast<int>(r.u32("kernel cols"));
    spec.ssx = static_cast<int>(r.u32("subsample rows"));
    spec.ssy = static_cast<int>(r.u32("subsample cols"));
    cfg.cnn_layers.push_back(spec);
  }
  const auto n_mlp = r.u32("MLP layer count");
  if (n_mlp > 1024) {
    throw FormatError("implausible MLP layer count " + std::to_string(n_mlp), config_at);
  }
  cfg.mlp_layers.clear();
  for (std::uint32_t l = 0; l < n_mlp; ++l) {
    cfg.mlp_layers.push_back(static_cast<int>(r.u32("MLP neurons")));
  }
  cfg.num_classes = static_cast<int>(r.u32("class count"));
  const auto act_at = r.position();
  const auto act = r.u8("activation");
  if (act > 1) {
    throw FormatError("unknown activation tag " + std::to_string(act), act_at);
  }
  cfg.activation = static_cast<cnn::Activation>(act);
  cfg.seed = r.u64("seed");

  std::vector<std::string> names(r.u32("channel name count"));
  for (auto& name : names) {
    name = r.string16("channel name");
  }
  const auto scaling_at = r.position();
  const auto has_scaling = r.u8("scaling flag");
  if (has_scaling > 1) {
    throw FormatError("invalid scaling flag", scaling_at);
  }
  std::vector<ChannelScaling> scaling;
  if (has_scaling) {
    for (int c = 0; c < cfg.input_channels; ++c) {
      const double lo = r.f64("scaling");
      const double hi = r.f64("scaling");
      scaling.push_back({lo, hi});
    }
  }

  std::size_t expected_params = 0;
  try {
    expected_params = cnn::parameter_count(cfg);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid network configuration: ") + e.what(), config_at);
  }
  const auto count_at = r.position();
  const auto count = r.u64("parameter count");
  if (count != expected_params) {
    throw FormatError("parameter count " + std::to_string(count) + " does not match the " +
                          std::to_string(expected_params) + " the configuration needs",
                      count_at);
  }
  const auto payload_at = r.position();
  if (r.remaining() != count * 8) {
    throw FormatError("payload length mismatch: expected " + std::to_string(count * 8) +
                          " bytes, found " + std::to_string(r.remaining()),
                      payload_at);
  }
  std::vector<double> params(count);
  for (double& p : params) {
    p = r.f64("parameters");
  }
  try {
    cnn::CompactCnn net(cfg, std::move(params));
    net.channel_names = std::move(names);
    net.scaling = std::move(scaling);
    return net;
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid model: ") + e.what(), payload_at);
  }
}

void save_model(const cnn::CompactCnn& net, const std::filesystem::path& path) {
  detail::write_file(path, encode_model(net));
}

cnn::CompactCnn load_model(const std::filesystem::path& path) {
  return decode_model(detail::read_file(path));
}

// ---------------------------------------------------------------------------
// PGM / PPM

namespace {

class NetpbmHeader {
 public:
  explicit NetpbmHeader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::string token() {
    skip_space_and_comments();
    std::string tok;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#') {
      tok.push_back(static_cast<char>(bytes_[pos_++]));
    }
    if (tok.empty()) {
      throw FormatError("truncated PGM header", pos_);
    }
    return tok;
  }

  long number(const char* what) {
    const auto at = pos_;
    const auto tok = token();
    if (!std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(c); }) ||
        tok.size() > 9) {
      throw FormatError(std::string("invalid ") + what + " '" + tok + "'", at);
    }
    return std::stol(tok);
  }

  // Exactly one whitespace byte separates the header from the raster.
  void end_header() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError("missing whitespace after PGM header", pos_);
    }
    ++pos_;
  }

  [[nodiscard]] std::size_t position() const noexcept { return pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
          ++pos_;
        }
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_labels(const LabelRaster& raster) {
  if (raster.width <= 0 || raster.height <= 0 ||
      raster.ids.size() != static_cast<std::size_t>(raster.width) * raster.height) {
    throw std::invalid_argument("label raster shape is inconsistent");
  }
  int max_id = 0;
  for (int id : raster.ids) {
    if (id < 0 || id > 65535) {
      throw std::invalid_argument("class id " + std::to_string(id) +
                                  " cannot be stored in a PGM");
    }
    max_id = std::max(max_id, id);
  }
  const bool wide = max_id > 255;
  const std::string header = "P5\n" + std::to_string(raster.width) + " " +
                             std::to_string(raster.height) + "\n" +
                             (wide ? "65535" : "255") + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + raster.ids.size() * (wide ? 2 : 1));
  for (int id : raster.ids) {
    if (wide) {
      out.push_back(static_cast<std::uint8_t>(id >> 8));
    }
    out.push_back(static_cast<std::uint8_t>(id & 0xFF));
  }
  return out;
}

LabelRaster decode_labels(std::span<const std::uint8_t> bytes) {
  NetpbmHeader h(bytes);
  const auto magic = h.token();
  if (magic == "P2") {
    throw FormatError("unsupported format: ASCII PGM (P2); convert to binary P5", 0);
  }
  if (magic != "P5") {
    throw FormatError("not a binary PGM (magic '" + magic + "')", 0);
  }
  const auto dims_at = h.position();
  const long width = h.number("width");
  const long height = h.number("height");
  if (width <= 0 || height <= 0) {
    throw FormatError("invalid PGM dimensions " + std::to_string(width) + "x" +
                          std::to_string(height),
                      dims_at);
  }
  const auto maxval_at = h.position();
  const long maxval = h.number("maxval");
  if (maxval <= 0 || maxval > 65535) {
    throw FormatError("PGM maxval must lie in [1, 65535], got " + std::to_string(maxval),
                      maxval_at);
  }
  h.end_header();
  const std::size_t bpp = maxval > 255 ? 2 : 1;
  const std::size_t pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t data_at = h.position();
  const std::size_t available = bytes.size() - data_at;
  if (available < pixels * bpp) {
    throw FormatError("truncated PGM raster: expected " + std::to_string(pixels * bpp) +
                          " bytes, found " + std::to_string(available),
                      data_at);
  }
  LabelRaster raster(static_cast<int>(width), static_cast<int>(height));
  for (std::size_t i = 0; i < pixels; ++i) {
    int v = bytes[data_at + i * bpp];
    if (bpp == 2) {
      v = (v << 8) | bytes[data_at + i * bpp + 1];
    }
    if (v > maxval) {
      throw FormatError("pixel value " + std::to_string(v) + " exceeds maxval",
                        data_at + i * bpp);
    }
    raster.ids[i] = v;
  }
  return raster;
}

void write_labels(const LabelRaster& raster, const std::filesystem::path& path) {
  detail::write_file(path, encode_labels(raster));
}

LabelRaster read_labels(const std::filesystem::path& path) {
  return decode_labels(detail::read_file(path));
}

std::vector<Rgb> default_palette(int classes) {
  static constexpr std::array<Rgb, 16> base = {{
      {0, 0, 255},     {255, 0, 0},     {0, 160, 0},     {255, 255, 0},
      {0, 255, 255},   {255, 0, 255},   {255, 128, 0},   {128, 0, 255},
      {128, 255, 0},   {0, 128, 255},   {255, 128, 128}, {128, 64, 0},
      {128, 128, 128}, {0, 255, 128},   {255, 192, 255}, {255, 255, 255},
  }};
  std::vector<Rgb> palette{{0, 0, 0}};
  for (int c = 0; c < classes; ++c) {
    palette.push_back(base[static_cast<std::size_t>(c) % base.size()]);
  }
  return palette;
}

std::vector<std::uint8_t> encode_mask(const LabelRaster& pred, std::span<const Rgb> palette) {
  const int max_id = pred.max_id();
  if (palette.size() <= static_cast<std::size_t>(max_id)) {
    throw std::invalid_argument("palette has " + std::to_string(palette.size()) +
                                " entries but the raster uses class id " +
                                std::to_string(max_id));
  }
  const std::string header =
      "P6\n" + std::to_string(pred.width) + " " + std::to_string(pred.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + pred.ids.size() * 3);
  for (int id : pred.ids) {
    const auto& c = palette[static_cast<std::size_t>(std::max(id, 0))];
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

void write_mask(const LabelRaster& pred, std::span<const Rgb> palette,
                const std::filesystem::path& path) {
  detail::write_file(path, encode_mask(pred, palette));
}

void write_ppm(const RgbImage& image, const std::filesystem::path& path) {
  const std::string header =
      "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.rgb.begin(), image.rgb.end());
  detail::write_file(path, out);
}

// ---------------------------------------------------------------------------
// Complex images as cubes

namespace {

const std::vector<std::string>& hermitian_suffixes() {
  static const std::vector<std::string> s = {"11",    "22",    "33",    "12_re", "12_im",
                                             "13_re", "13_im", "23_re", "23_im"};
  return s;
}

std::vector<std::string> scattering_names(int looks) {
  std::vector<std::string> names;
  for (int l = 0; l < looks; ++l) {
    for (const char* pol : {"HH", "HV", "VV"}) {
      for (const char* part : {"re", "im"}) {
        names.push_back("L" + std::to_string(l) + "_" + pol + "_" + part);
      }
    }
  }
  return names;
}

std::optional<char> hermitian_prefix(const FeatureCube& cube) {
  if (cube.channels.size() != 9) {
    return std::nullopt;
  }
  for (char prefix : {'T', 'C'}) {
    bool ok = true;
    for (std::size_t i = 0; i < 9 && ok; ++i) {
      ok = cube.channels[i].name == prefix + hermitian_suffixes()[i];
    }
    if (ok) {
      return prefix;
    }
  }
  return std::nullopt;
}

}  // namespace

CubeKind detect_kind(const FeatureCube& cube) {
  if (hermitian_prefix(cube)) {
    return CubeKind::hermitian;
  }
  if (!cube.channels.empty() && cube.channels.size() % 6 == 0 &&
      cube.channel_names() == scattering_names(static_cast<int>(cube.channels.size() / 6))) {
    return CubeKind::scattering;
  }
  return CubeKind::features;
}

FeatureCube hermitian_to_cube(const HermitianImage& image, char prefix) {
  FeatureCube cube;
  cube.width = image.width();
  cube.height = image.height();
  cube.stage = Stage::linear;
  for (const auto& suffix : hermitian_suffixes()) {
    cube.channels.push_back({prefix + suffix, {}});
    cube.channels.back().plane.reserve(cube.pixel_count());
  }
  for (const auto& m : image.pixels()) {
    auto* ch = cube.channels.data();
    ch[0].plane.push_back(m.diag[0]);
    ch[1].plane.push_back(m.diag[1]);
    ch[2].plane.push_back(m.diag[2]);
    for (std::size_t u = 0; u < 3; ++u) {
      ch[3 + 2 * u].plane.push_back(m.upper[u].real());
      ch[4 + 2 * u].plane.push_back(m.upper[u].imag());
    }
  }
  return cube;
}

HermitianImage cube_to_hermitian(const FeatureCube& cube) {
  if (!hermitian_prefix(cube)) {
    throw DataError("cube does not hold a Hermitian image (expected channels T11..T23_im)");
  }
  if (cube.stage != Stage::linear) {
    throw DataError("Hermitian cubes must be at the linear stage");
  }
  HermitianImage image(cube.width, cube.height);
  auto pixels = image.pixels();
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    auto& m = pixels[i];
    for (std::size_t d = 0; d < 3; ++d) {
      m.diag[d] = cube.channels[d].plane[i];
    }
    for (std::size_t u = 0; u < 3; ++u) {
      m.upper[u] = {cube.channels[3 + 2 * u].plane[i], cube.channels[4 + 2 * u].plane[i]};
    }
    if (!std::all_of(m.diag.begin(), m.diag.end(), [](double d) { return d >= 0.0; })) {
      throw DataError("negative diagonal power at pixel " + std::to_string(i));
    }
  }
  return image;
}

FeatureCube scattering_to_cube(const ScatteringImage& image) {
  FeatureCube cube;
  cube.width = image.width();
  cube.height = image.height();
  cube.stage = Stage::linear;
  const auto names = scattering_names(image.looks());
  for (const auto& name : names) {
    cube.channels.push_back({name, std::vector<double>(cube.pixel_count())});
  }
  for (int l = 0; l < image.looks(); ++l) {
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < image.width(); ++x) {
        const auto& p = image.at(l, x, y);
        const auto idx = static_cast<std::size_t>(y) * image.width() + x;
        const cplx values[3] = {p.s_hh, p.s_hv, p.s_vv};
        for (std::size_t k = 0; k < 3; ++k) {
          cube.channels[static_cast<std::size_t>(6 * l) + 2 * k].plane[idx] = values[k].real();
          cube.channels[static_cast<std::size_t>(6 * l) + 2 * k + 1].plane[idx] = values[k].imag();
        }
      }
    }
  }
  return cube;
}

ScatteringImage cube_to_scattering(const FeatureCube& cube) {
  if (detect_kind(cube) != CubeKind::scattering) {
    throw DataError("cube does not hold a scattering image (expected channels L0_HH_re ...)");
  }
  const int looks = static_cast<int>(cube.channels.size() / 6);
  ScatteringImage image(cube.width, cube.height, looks);
  for (int l = 0; l < looks; ++l) {
    for (int y = 0; y < cube.height; ++y) {
      for (int x = 0; x < cube.width; ++x) {
        const auto idx = static_cast<std::size_t>(y) * cube.width + x;
        auto component = [&](std::size_t k) {
          const auto base = static_cast<std::size_t>(6 * l) + 2 * k;
          const cplx v{cube.channels[base].plane[idx], cube.channels[base + 1].plane[idx]};
          if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw DataError("non-finite scattering value at pixel " + std::to_string(idx));
          }
          return v;
        };
        image.at(l, x, y) = {component(0), component(1), component(2)};
      }
    }
  }
  return image;
}

}  // namespace polsar::io
