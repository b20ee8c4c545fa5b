#pragma once

// Shared fixtures and independent reference implementations for the tests.
// Nothing here calls into the code under test for the quantity it checks.

#include "polsar/cnn.hpp"
#include "polsar/pipeline.hpp"
#include "polsar/polsar_core.hpp"
#include "polsar/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

using polsar::cplx;

inline polsar::ScatteringPixel random_pixel(std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  return {{n(gen), n(gen)}, {n(gen), n(gen)}, {n(gen), n(gen)}};
}

inline polsar::CVec3 random_vec(std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  return {cplx{n(gen), n(gen)}, cplx{n(gen), n(gen)}, cplx{n(gen), n(gen)}};
}

inline Eigen::Matrix3cd dense(const polsar::Hermitian3& m) {
  Eigen::Matrix3cd out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out(r, c) = m(r, c);
    }
  }
  return out;
}

inline double norm2(const polsar::CVec3& v) {
  return std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]);
}

/// Element-wise (1/n) sum v v^H with an explicit triple loop.
inline Eigen::Matrix3cd brute_outer_average(const std::vector<polsar::CVec3>& vs) {
  Eigen::Matrix3cd acc = Eigen::Matrix3cd::Zero();
  for (const auto& v : vs) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        acc(r, c) += v[static_cast<std::size_t>(r)] * std::conj(v[static_cast<std::size_t>(c)]);
      }
    }
  }
  return acc / static_cast<double>(vs.size());
}

/// Reflection without edge repetition, spelled out for single reflections.
inline int reflect(int idx, int d) {
  if (idx < 0) {
    return -idx;
  }
  if (idx >= d) {
    return 2 * (d - 1) - idx;
  }
  return idx;
}

inline polsar::cnn::Map naive_conv(const polsar::cnn::Map& k, const polsar::cnn::Map& in) {
  polsar::cnn::Map out(in.rows - k.rows + 1, in.cols - k.cols + 1);
  for (int r = 0; r < out.rows; ++r) {
    for (int c = 0; c < out.cols; ++c) {
      double s = 0.0;
      for (int u = 0; u < k.rows; ++u) {
        for (int v = 0; v < k.cols; ++v) {
          s += k(u, v) * in(r + u, c + v);
        }
      }
      out(r, c) = s;
    }
  }
  return out;
}

inline polsar::cnn::Map random_map(std::mt19937_64& gen, int rows, int cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  polsar::cnn::Map m(rows, cols);
  for (double& v : m.data) {
    v = u(gen);
  }
  return m;
}

inline polsar::HermitianImage random_hermitian_image(std::mt19937_64& gen, int w, int h,
                                                     int looks = 3) {
  polsar::HermitianImage img(w, h);
  for (auto& m : img.pixels()) {
    std::vector<polsar::CVec3> vs;
    for (int l = 0; l < looks; ++l) {
      vs.push_back(random_vec(gen));
    }
    m = polsar::second_order_average(vs);
  }
  return img;
}

/// Scaled cube with smooth random content.
inline polsar::FeatureCube random_scaled_cube(std::mt19937_64& gen, int w, int h, int channels) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  polsar::FeatureCube cube;
  cube.width = w;
  cube.height = h;
  cube.stage = polsar::Stage::scaled;
  for (int c = 0; c < channels; ++c) {
    polsar::Channel ch{"ch" + std::to_string(c), std::vector<double>(static_cast<std::size_t>(w) * h)};
    for (double& v : ch.plane) {
      v = u(gen);
    }
    cube.channels.push_back(std::move(ch));
    cube.scaling.push_back({-10.0 * (c + 1), 5.0 * (c + 1)});
  }
  return cube;
}

/// Per-pixel maximum-likelihood classifier under the complex Wishart model:
/// class c minimises ln|S_c| + tr(S_c^{-1} T), where S_c is the mean T over
/// that class's training pixels. Predicts every pixel.
inline polsar::LabelRaster wishart_ml_classify(const polsar::HermitianImage& t,
                                               const polsar::LabelRaster& truth,
                                               const std::vector<polsar::SamplePoint>& train) {
  const int classes = truth.max_id();
  std::vector<Eigen::Matrix3cd> mean(static_cast<std::size_t>(classes) + 1,
                                     Eigen::Matrix3cd::Zero());
  std::vector<int> count(static_cast<std::size_t>(classes) + 1, 0);
  for (const auto& p : train) {
    mean[static_cast<std::size_t>(p.class_id)] += dense(t.at(p.x, p.y));
    ++count[static_cast<std::size_t>(p.class_id)];
  }
  std::vector<Eigen::Matrix3cd> inv(mean.size());
  std::vector<double> logdet(mean.size(), 0.0);
  for (int c = 1; c <= classes; ++c) {
    auto& m = mean[static_cast<std::size_t>(c)];
    m /= static_cast<double>(count[static_cast<std::size_t>(c)]);
    inv[static_cast<std::size_t>(c)] = m.inverse();
    logdet[static_cast<std::size_t>(c)] = std::log(m.determinant().real());
  }
  polsar::LabelRaster pred(t.width(), t.height());
  for (int y = 0; y < t.height(); ++y) {
    for (int x = 0; x < t.width(); ++x) {
      const auto tm = dense(t.at(x, y));
      int best = 1;
      double best_d = 0.0;
      for (int c = 1; c <= classes; ++c) {
        const double d = logdet[static_cast<std::size_t>(c)] +
                         (inv[static_cast<std::size_t>(c)] * tm).trace().real();
        if (c == 1 || d < best_d) {
          best = c;
          best_d = d;
        }
      }
      pred.at(x, y) = best;
    }
  }
  return pred;
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("polsarcnn_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testsupport
