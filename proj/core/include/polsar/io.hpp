#pragma once

// File formats.
//
// Cube file (.polc), little-endian:
//   "POLC1"                          5 bytes magic (format version 1)
//   u32 width, u32 height, u32 channel count
//   u8 stage (0 linear, 1 dB, 2 scaled), u8 has_scaling
//   per channel: u16 name length, name bytes (UTF-8)
//   if has_scaling: per channel f64 min_db, f64 max_db
//   payload: channel-planar, row-major f64
//
// Model file (.pcnn), little-endian:
//   "PCNN1", u32 format version
//   u32 input channels, u32 window, u32 CNN layer count,
//     per layer u32 neurons, kx, ky, ssx, ssy
//   u32 hidden MLP layer count, per layer u32 neurons
//   u32 classes, u8 activation, u64 seed
//   u32 channel-name count, per name u16 length + bytes
//   u8 has_scaling, per channel f64 min_db, f64 max_db
//   u64 parameter count, parameters as f64 in CompactCnn layout order
//
// Labels are binary PGM (P5), masks binary PPM (P6).
//
// Hermitian and scattering images travel as linear-stage cubes with reserved
// channel names (see hermitian_to_cube / scattering_to_cube).

#include "polsar/cnn.hpp"
#include "polsar/metrics.hpp"
#include "polsar/pipeline.hpp"
#include "polsar/polsar_core.hpp"
#include "polsar/synth.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace polsar::io {

inline constexpr std::uint32_t kModelFormatVersion = 1;

[[nodiscard]] std::vector<std::uint8_t> encode_cube(const FeatureCube& cube);
[[nodiscard]] FeatureCube decode_cube(std::span<const std::uint8_t> bytes);
void write_cube(const FeatureCube& cube, const std::filesystem::path& path);
[[nodiscard]] FeatureCube read_cube(const std::filesystem::path& path);

[[nodiscard]] std::vector<std::uint8_t> encode_model(const cnn::CompactCnn& net);
[[nodiscard]] cnn::CompactCnn decode_model(std::span<const std::uint8_t> bytes);
void save_model(const cnn::CompactCnn& net, const std::filesystem::path& path);
[[nodiscard]] cnn::CompactCnn load_model(const std::filesystem::path& path);

/// Binary PGM, 8-bit when every id fits, 16-bit big-endian otherwise.
[[nodiscard]] std::vector<std::uint8_t> encode_labels(const LabelRaster& raster);
[[nodiscard]] LabelRaster decode_labels(std::span<const std::uint8_t> bytes);
void write_labels(const LabelRaster& raster, const std::filesystem::path& path);
[[nodiscard]] LabelRaster read_labels(const std::filesystem::path& path);

using Rgb = std::array<std::uint8_t, 3>;

/// Index = class id; entry 0 is used for unlabeled pixels.
[[nodiscard]] std::vector<Rgb> default_palette(int classes);
[[nodiscard]] std::vector<std::uint8_t> encode_mask(const LabelRaster& pred,
                                                    std::span<const Rgb> palette);
void write_mask(const LabelRaster& pred, std::span<const Rgb> palette,
                const std::filesystem::path& path);
void write_ppm(const RgbImage& image, const std::filesystem::path& path);

// Hermitian images: channels T11 T22 T33 T12_re T12_im T13_re T13_im T23_re T23_im
// (prefix "T" or "C"). Scattering images: L<i>_HH_re, L<i>_HH_im, L<i>_HV_re,
// L<i>_HV_im, L<i>_VV_re, L<i>_VV_im for each look i.
enum class CubeKind { features, hermitian, scattering };

[[nodiscard]] CubeKind detect_kind(const FeatureCube& cube);
[[nodiscard]] FeatureCube hermitian_to_cube(const HermitianImage& image, char prefix = 'T');
[[nodiscard]] HermitianImage cube_to_hermitian(const FeatureCube& cube);
[[nodiscard]] FeatureCube scattering_to_cube(const ScatteringImage& image);
[[nodiscard]] ScatteringImage cube_to_scattering(const FeatureCube& cube);

// ---------------------------------------------------------------------------
// Text formats

/// Lines `source_id -> target_id` or `source_id -> drop`; '#' starts a comment.
[[nodiscard]] ClassMapping parse_remap(std::istream& in);
[[nodiscard]] ClassMapping read_remap(const std::filesystem::path& path);

/// Lines `id r g b`.
[[nodiscard]] std::vector<Rgb> parse_palette(std::istream& in);
[[nodiscard]] std::vector<Rgb> read_palette(const std::filesystem::path& path);

/// Scene description, one directive per line:
///   size <width> <height>
///   looks <n>
///   seed <s>
///   background <class>
///   class <id> <T11> <T22> <T33> <T12re> <T12im> <T13re> <T13im> <T23re> <T23im>
///   rect <class> <x0> <y0> <x1> <y1>
///   disk <class> <cx> <cy> <radius>
[[nodiscard]] synth::SceneSpec parse_scene_spec(std::istream& in);
[[nodiscard]] synth::SceneSpec read_scene_spec(const std::filesystem::path& path);

/// "20x3x3s2" (neurons x Kx x Ky, subsampling 2x2) or "20x3x3s2x1"; comma separated.
[[nodiscard]] std::vector<cnn::ConvLayerSpec> parse_cnn_layers(const std::string& text);
/// "10" or "16,8"; empty string for no hidden MLP layer.
[[nodiscard]] std::vector<int> parse_mlp_layers(const std::string& text);
[[nodiscard]] std::string format_cnn_layers(const std::vector<cnn::ConvLayerSpec>& layers);

/// CSV `x,y,class`.
void write_samples_csv(const std::vector<SamplePoint>& points, std::ostream& out);
[[nodiscard]] std::vector<SamplePoint> parse_samples_csv(std::istream& in);
[[nodiscard]] std::vector<SamplePoint> read_samples_csv(const std::filesystem::path& path);

/// `epoch,train_mse,learning_rate,next_learning_rate,validation_mse,validation_accuracy`.
void write_history_csv(const cnn::TrainHistory& history, std::ostream& out);

/// Header of class names, K count rows (with rejected and total columns),
/// then overall, producer and user rows at full precision; undefined values
/// are written as NA.
void write_metrics_csv(const ConfusionMatrix& cm, const AccuracyStats& stats, std::ostream& out);

/// Human-readable table with percentages at two decimals.
void print_metrics(const ConfusionMatrix& cm, const AccuracyStats& stats, std::ostream& out);

}  // namespace polsar::io
