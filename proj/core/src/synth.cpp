#include "polsar/synth.hpp"

#include "polsar/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace polsar::synth {

bool Region::contains(int x, int y) const noexcept {
  if (const auto* r = std::get_if<Rect>(&shape)) {
    return x >= r->x0 && x < r->x1 && y >= r->y0 && y < r->y1;
  }
  const auto& d = std::get<Disk>(shape);
  const double dx = x - d.cx;
  const double dy = y - d.cy;
  return dx * dx + dy * dy <= d.radius * d.radius;
}

void SceneSpec::validate() const {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("scene dimensions must be positive");
  }
  if (looks < 1) {
    throw std::invalid_argument("scene needs at least one look");
  }
  for (const auto& [id, sigma] : class_models) {
    if (id < 1) {
      throw std::invalid_argument("class ids must be >= 1");
    }
    if (!is_hermitian_psd(sigma)) {
      throw std::invalid_argument("class " + std::to_string(id) +
                                  " covariance is not Hermitian positive semidefinite");
    }
  }
  auto require_model = [this](int id) {
    if (!class_models.contains(id)) {
      throw DataError("class " + std::to_string(id) + " has no covariance model");
    }
  };
  for (const auto& r : regions) {
    require_model(r.class_id);
  }
  if (background_class) {
    require_model(*background_class);
  }
}

CholeskyFactor cholesky(const Hermitian3& sigma) {
  if (!is_hermitian_psd(sigma)) {
    throw std::invalid_argument("covariance is not Hermitian positive semidefinite");
  }
  const double tol = 1e-12 * std::max(sigma.trace(), 1e-300);
  cplx l[3][3] = {};
  for (int j = 0; j < 3; ++j) {
    double d = sigma.diag[static_cast<std::size_t>(j)];
    for (int k = 0; k < j; ++k) {
      d -= std::norm(l[j][k]);
    }
    if (d <= tol) {
      continue;  // degenerate direction: column stays zero
    }
    const double pivot = std::sqrt(d);
    l[j][j] = pivot;
    for (int i = j + 1; i < 3; ++i) {
      cplx s = sigma(i, j);
      for (int k = 0; k < j; ++k) {
        s -= l[i][k] * std::conj(l[j][k]);
      }
      l[i][j] = s / pivot;
    }
  }
  return {{l[0][0], l[1][0], l[1][1], l[2][0], l[2][1], l[2][2]}};
}

CVec3 sample_scattering_vector(const CholeskyFactor& f, CounterRng& rng) {
  const cplx z0 = rng.circular_normal();
  const cplx z1 = rng.circular_normal();
  const cplx z2 = rng.circular_normal();
  const auto& l = f.lower;
  return {l[0] * z0, l[1] * z0 + l[2] * z1, l[3] * z0 + l[4] * z1 + l[5] * z2};
}

CVec3 sample_scattering_vector(const Hermitian3& sigma, CounterRng& rng) {
  return sample_scattering_vector(cholesky(sigma), rng);
}

LabelRaster rasterize_labels(const SceneSpec& spec) {
  LabelRaster labels(spec.width, spec.height, spec.background_class.value_or(0));
  for (const auto& region : spec.regions) {
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        if (region.contains(x, y)) {
          labels.at(x, y) = region.class_id;
        }
      }
    }
  }
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      if (labels.at(x, y) == 0) {
        throw DataError("pixel (" + std::to_string(x) + "," + std::to_string(y) +
                        ") is not covered by any region and no background class is set");
      }
    }
  }
  return labels;
}

namespace {

std::vector<CVec3> draw_looks(const CholeskyFactor& factor, const SceneSpec& spec, int x, int y) {
  CounterRng rng(spec.seed,
                 static_cast<std::uint64_t>(y) * static_cast<std::uint64_t>(spec.width) +
                     static_cast<std::uint64_t>(x));
  std::vector<CVec3> looks(static_cast<std::size_t>(spec.looks));
  for (auto& k : looks) {
    k = sample_scattering_vector(factor, rng);
  }
  return looks;
}

}  // namespace

std::vector<CVec3> pixel_looks(const SceneSpec& spec, int class_id, int x, int y) {
  return draw_looks(cholesky(spec.class_models.at(class_id)), spec, x, y);
}

Scene generate_scene(const SceneSpec& spec, unsigned threads) {
  spec.validate();
  LabelRaster labels = rasterize_labels(spec);
  std::map<int, CholeskyFactor> factors;
  for (const auto& [id, sigma] : spec.class_models) {
    factors.emplace(id, cholesky(sigma));
  }

  HermitianImage coherency(spec.width, spec.height);
  auto work = [&](int row_begin, int row_end) {
    for (int y = row_begin; y < row_end; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const auto looks = draw_looks(factors.at(labels.at(x, y)), spec, x, y);
        coherency.at(x, y) = second_order_average(looks);
      }
    }
  };

  unsigned n = threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : threads;
  n = std::min<unsigned>(n, static_cast<unsigned>(spec.height));
  if (n <= 1) {
    work(0, spec.height);
  } else {
    std::vector<std::jthread> pool;
    const int chunk = (spec.height + static_cast<int>(n) - 1) / static_cast<int>(n);
    for (int begin = 0; begin < spec.height; begin += chunk) {
      pool.emplace_back(work, begin, std::min(spec.height, begin + chunk));
    }
  }
  return {std::move(coherency), std::move(labels)};
}

SceneSpec synth4_preset(std::uint64_t seed, int size) {
  SceneSpec spec;
  spec.width = size;
  spec.height = size;
  spec.looks = 4;
  spec.seed = seed;
  const int half = size / 2;
  spec.regions = {
      {Rect{0, 0, half, half}, 1},
      {Rect{half, 0, size, half}, 2},
      {Rect{0, half, half, size}, 3},
      {Rect{half, half, size, size}, 4},
  };
  auto diag = [](double a, double b, double c) {
    Hermitian3 m;
    m.diag = {a, b, c};
    return m;
  };
  Hermitian3 correlated = diag(0.5, 0.5, 0.2);
  correlated.upper[0] = {0.2, 0.0};
  spec.class_models = {
      {1, diag(1.0, 0.1, 0.05)},
      {2, diag(0.1, 1.0, 0.05)},
      {3, diag(0.3, 0.3, 0.3)},
      {4, correlated},
  };
  return spec;
}

}  // namespace polsar::synth
