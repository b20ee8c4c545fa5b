#include "polsar/error.hpp"
#include "polsar/polsar_core.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace polsar;
using testsupport::norm2;

namespace {

constexpr double kRt2 = std::numbers::sqrt2;

void expect_vec(const CVec3& v, cplx a, cplx b, cplx c) {
  EXPECT_NEAR(std::abs(v[0] - a), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(v[1] - b), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(v[2] - c), 0.0, 1e-15);
}

FeatureCube one_channel(std::vector<double> values, Stage stage, int w) {
  FeatureCube cube;
  cube.width = w;
  cube.height = static_cast<int>(values.size()) / w;
  cube.stage = stage;
  cube.channels.push_back({"a", std::move(values)});
  return cube;
}

}  // namespace

TEST(PauliVector, Examples) {
  expect_vec(pauli_vector({1.0, 0.0, 1.0}), kRt2, 0.0, 0.0);
  expect_vec(pauli_vector({1.0, 0.0, -1.0}), 0.0, kRt2, 0.0);
  expect_vec(pauli_vector({0.0, cplx{0, 1}, 0.0}), 0.0, 0.0, cplx{0, kRt2});
}

TEST(LexicographicVector, Examples) {
  expect_vec(lexicographic_vector({1.0, 0.0, 0.0}), 1.0, 0.0, 0.0);
  expect_vec(lexicographic_vector({0.0, 1.0, 0.0}), 0.0, kRt2, 0.0);
  expect_vec(lexicographic_vector({cplx{0, 2}, 0.0, -1.0}), cplx{0, 2}, 0.0, -1.0);
}

TEST(Span, Examples) {
  EXPECT_DOUBLE_EQ(span({1.0, cplx{0, 1}, -1.0}), 4.0);
  EXPECT_DOUBLE_EQ(span({0.0, 0.0, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(span({cplx{0, 3}, 0.0, 0.0}), 9.0);
}

TEST(Span, NormIdentitiesOnRandomPixels) {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 2000; ++i) {
    const auto p = testsupport::random_pixel(gen, 3.0);
    const double s = span(p);
    EXPECT_NEAR(norm2(pauli_vector(p)), s, 1e-12 * s);
    EXPECT_NEAR(norm2(lexicographic_vector(p)), s, 1e-12 * s);
  }
}

TEST(SecondOrderAverage, Examples) {
  const std::vector<CVec3> one{{kRt2, 0.0, 0.0}};
  const auto a = second_order_average(one);
  EXPECT_NEAR(a.diag[0], 2.0, 1e-15);
  EXPECT_EQ(a.diag[1], 0.0);
  EXPECT_EQ(a.diag[2], 0.0);

  const std::vector<CVec3> two{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  const auto b = second_order_average(two);
  EXPECT_DOUBLE_EQ(b.diag[0], 0.5);
  EXPECT_DOUBLE_EQ(b.diag[1], 0.5);
  EXPECT_DOUBLE_EQ(b.diag[2], 0.0);
  for (const auto& u : b.upper) {
    EXPECT_EQ(u, cplx{});
  }
}

TEST(SecondOrderAverage, EmptyInputThrows) {
  try {
    (void)second_order_average(std::span<const CVec3>{});
    FAIL() << "expected an exception";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "no looks");
  }
}

TEST(SecondOrderAverage, MatchesBruteForceAndIsHermitianPsd) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<CVec3> vs;
    for (int i = 0; i < 50; ++i) {
      vs.push_back(testsupport::random_vec(gen));
    }
    const auto m = second_order_average(vs);
    const auto ref = testsupport::brute_outer_average(vs);
    const auto dense = testsupport::dense(m);
    EXPECT_LT((dense - ref).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((ref - ref.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_TRUE(is_hermitian_psd(m));
    double mean_norm = 0.0;
    for (const auto& v : vs) {
      mean_norm += norm2(v);
    }
    mean_norm /= static_cast<double>(vs.size());
    EXPECT_NEAR(m.trace(), mean_norm, 1e-12 * mean_norm);
  }
}

TEST(Hermitian3, AccessorIsConjugateSymmetric) {
  Hermitian3 m;
  m.diag = {1, 2, 3};
  m.upper = {cplx{1, 2}, cplx{3, -4}, cplx{0.5, 0.25}};
  EXPECT_EQ(m(1, 0), std::conj(m(0, 1)));
  EXPECT_EQ(m(2, 0), std::conj(m(0, 2)));
  EXPECT_EQ(m(2, 1), std::conj(m(1, 2)));
  EXPECT_EQ(m(1, 1), cplx(2.0));
}

TEST(Hermitian3, PsdCheckRejectsIndefinite) {
  Hermitian3 m;
  m.diag = {1, 1, 1};
  m.upper[0] = 2.0;  // eigenvalues -1, 1, 3
  EXPECT_FALSE(is_hermitian_psd(m));
  const auto ev = eigenvalues(m);
  EXPECT_NEAR(ev[0], -1.0, 1e-12);
  EXPECT_NEAR(ev[2], 3.0, 1e-12);
}

TEST(BuildHermitianImage, SinglePixelPauli) {
  ScatteringImage img(1, 1, 1);
  img.at(0, 0, 0) = {1.0, 0.0, 1.0};
  const auto t = build_hermitian_image(img, Basis::pauli);
  EXPECT_NEAR(t.at(0, 0).diag[0], 2.0, 1e-15);
  EXPECT_NEAR(t.at(0, 0).diag[1], 0.0, 1e-15);
  EXPECT_NEAR(t.at(0, 0).diag[2], 0.0, 1e-15);
}

TEST(BuildHermitianImage, ShapeAndTraceEqualsMeanSpan) {
  std::mt19937_64 gen(3);
  ScatteringImage img(2, 3, 4);
  for (int l = 0; l < 4; ++l) {
    for (int y = 0; y < 3; ++y) {
      for (int x = 0; x < 2; ++x) {
        img.at(l, x, y) = testsupport::random_pixel(gen);
      }
    }
  }
  const auto t = build_hermitian_image(img, Basis::pauli);
  const auto c = build_hermitian_image(img, Basis::lexicographic);
  EXPECT_EQ(t.width(), 2);
  EXPECT_EQ(t.height(), 3);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 2; ++x) {
      double mean = 0.0;
      for (int l = 0; l < 4; ++l) {
        mean += span(img.at(l, x, y)) / 4.0;
      }
      EXPECT_NEAR(t.at(x, y).trace(), mean, 1e-12 * mean);
      EXPECT_NEAR(c.at(x, y).trace(), mean, 1e-12 * mean);
    }
  }
}

TEST(CoherencyToCovariance, MatchesLexicographicAverage) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<CVec3> k;
    std::vector<CVec3> omega;
    for (int l = 0; l < 4; ++l) {
      const auto p = testsupport::random_pixel(gen);
      k.push_back(pauli_vector(p));
      omega.push_back(lexicographic_vector(p));
    }
    const auto c = coherency_to_covariance(second_order_average(k));
    const auto ref = testsupport::brute_outer_average(omega);
    EXPECT_LT((testsupport::dense(c) - ref).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(MirrorIndex, ReflectsWithoutEdgeRepetition) {
  EXPECT_EQ(mirror_index(-1, 5), 1);
  EXPECT_EQ(mirror_index(-2, 5), 2);
  EXPECT_EQ(mirror_index(5, 5), 3);
  EXPECT_EQ(mirror_index(6, 5), 2);
  EXPECT_EQ(mirror_index(3, 5), 3);
  EXPECT_EQ(mirror_index(-3, 1), 0);
  for (int i = -20; i < 30; ++i) {
    const int m = mirror_index(i, 4);
    EXPECT_GE(m, 0);
    EXPECT_LT(m, 4);
  }
}

TEST(Boxcar, ConstantImageAndIdentityWindow) {
  std::mt19937_64 gen(1);
  HermitianImage constant(6, 4);
  const auto value = testsupport::random_hermitian_image(gen, 1, 1).at(0, 0);
  for (auto& m : constant.pixels()) {
    m = value;
  }
  const auto out = boxcar_multilook(constant, 5);
  for (const auto& m : out.pixels()) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        EXPECT_NEAR(std::abs(m(r, c) - value(r, c)), 0.0, 1e-14);
      }
    }
  }
  const auto img = testsupport::random_hermitian_image(gen, 5, 7);
  const auto same = boxcar_multilook(img, 1);
  for (std::size_t i = 0; i < img.pixels().size(); ++i) {
    EXPECT_EQ(same.pixels()[i], img.pixels()[i]);
  }
}

TEST(Boxcar, SingleImpulseMatchesNeighbourhoodSum) {
  for (const auto& [px, py] : {std::pair{2, 2}, std::pair{0, 0}, std::pair{4, 1}}) {
    HermitianImage img(5, 5);
    Hermitian3 impulse;
    impulse.diag = {9.0, 4.5, 1.8};
    impulse.upper = {cplx{0.9, -0.9}, cplx{0.0, 0.45}, cplx{-0.9, 0.0}};
    img.at(px, py) = impulse;
    const auto out = boxcar_multilook(img, 3);
    for (int y = 0; y < 5; ++y) {
      for (int x = 0; x < 5; ++x) {
        int hits = 0;
        for (int v = -1; v <= 1; ++v) {
          for (int u = -1; u <= 1; ++u) {
            hits += testsupport::reflect(x + u, 5) == px && testsupport::reflect(y + v, 5) == py;
          }
        }
        for (int r = 0; r < 3; ++r) {
          for (int c = 0; c < 3; ++c) {
            EXPECT_NEAR(std::abs(out.at(x, y)(r, c) - impulse(r, c) * (hits / 9.0)), 0.0, 1e-14)
                << "at (" << x << "," << y << ") impulse (" << px << "," << py << ")";
          }
        }
      }
    }
  }
}

TEST(Boxcar, CommutesWithScalingAndKeepsPsd) {
  std::mt19937_64 gen(2);
  const auto img = testsupport::random_hermitian_image(gen, 9, 6);
  HermitianImage scaled = img;
  for (auto& m : scaled.pixels()) {
    m *= 3.5;
  }
  const auto a = boxcar_multilook(img, 5);
  const auto b = boxcar_multilook(scaled, 5);
  for (std::size_t i = 0; i < a.pixels().size(); ++i) {
    EXPECT_TRUE(is_hermitian_psd(a.pixels()[i]));
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        EXPECT_NEAR(std::abs(a.pixels()[i](r, c) * 3.5 - b.pixels()[i](r, c)), 0.0, 1e-12);
      }
    }
  }
}

TEST(Boxcar, RejectsBadWindows) {
  HermitianImage img(3, 3);
  EXPECT_THROW((void)boxcar_multilook(img, 4), std::invalid_argument);
  EXPECT_THROW((void)boxcar_multilook(img, 0), std::invalid_argument);
  EXPECT_THROW((void)boxcar_multilook(img, -3), std::invalid_argument);
}

TEST(ExtractChannels, ChannelSetsAndOrder) {
  std::mt19937_64 gen(4);
  const auto t = testsupport::random_hermitian_image(gen, 4, 3);
  const auto c = coherency_to_covariance(t);
  const auto spans = trace_raster(t);

  const auto t3 = extract_channels(t, nullptr, nullptr, ChannelSet::T3);
  EXPECT_EQ(t3.channel_names(), (std::vector<std::string>{"T11", "T22", "T33"}));
  EXPECT_EQ(t3.stage, Stage::linear);

  const auto ts = extract_channels(t, nullptr, &spans, ChannelSet::T3_SPAN);
  EXPECT_EQ(ts.channel_names(), (std::vector<std::string>{"T11", "T22", "T33", "span"}));

  const auto tc = extract_channels(t, &c, nullptr, ChannelSet::T3_C3);
  EXPECT_EQ(tc.channel_names(),
            (std::vector<std::string>{"T11", "T22", "T33", "C11", "C22", "C33"}));
  for (std::size_t i = 0; i < tc.pixel_count(); ++i) {
    const double st = tc.channels[0].plane[i] + tc.channels[1].plane[i] + tc.channels[2].plane[i];
    const double sc = tc.channels[3].plane[i] + tc.channels[4].plane[i] + tc.channels[5].plane[i];
    EXPECT_NEAR(st, sc, 1e-9);
    EXPECT_NEAR(st, ts.channels[3].plane[i], 1e-9);
  }
}

TEST(ExtractChannels, MissingInputsThrow) {
  HermitianImage t(2, 2);
  EXPECT_THROW((void)extract_channels(t, nullptr, nullptr, ChannelSet::T3_SPAN),
               std::invalid_argument);
  EXPECT_THROW((void)extract_channels(t, nullptr, nullptr, ChannelSet::T3_C3),
               std::invalid_argument);
  HermitianImage wrong(3, 2);
  EXPECT_THROW((void)extract_channels(t, &wrong, nullptr, ChannelSet::T3_C3),
               std::invalid_argument);
}

TEST(ChannelSetNames, RoundTrip) {
  for (auto set : {ChannelSet::T3, ChannelSet::T3_SPAN, ChannelSet::T3_C3}) {
    EXPECT_EQ(parse_channel_set(to_string(set)), set);
  }
  EXPECT_THROW((void)parse_channel_set("T4"), std::invalid_argument);
}

TEST(DbTransform, Examples) {
  const auto out = db_transform(one_channel({1.0, 100.0, 0.0}, Stage::linear, 3), 1e-15);
  EXPECT_EQ(out.stage, Stage::db);
  EXPECT_DOUBLE_EQ(out.channels[0].plane[0], 0.0);
  EXPECT_DOUBLE_EQ(out.channels[0].plane[1], 20.0);
  EXPECT_DOUBLE_EQ(out.channels[0].plane[2], -150.0);
}

TEST(DbTransform, MonotoneAndErrors) {
  std::vector<double> v;
  for (int i = 0; i < 50; ++i) {
    v.push_back(std::pow(1.3, i) * 1e-6);
  }
  const auto out = db_transform(one_channel(v, Stage::linear, 50));
  for (std::size_t i = 1; i < v.size(); ++i) {
    EXPECT_GT(out.channels[0].plane[i], out.channels[0].plane[i - 1]);
  }
  EXPECT_THROW((void)db_transform(one_channel({1.0, -0.5}, Stage::linear, 2)), DataError);
  EXPECT_THROW((void)db_transform(one_channel({1.0}, Stage::db, 1)), std::invalid_argument);
  EXPECT_THROW((void)db_transform(one_channel({1.0}, Stage::linear, 1), 0.0),
               std::invalid_argument);
}

TEST(ScaleToUnit, EndpointsMidpointAndConstantChannel) {
  auto cube = one_channel({0.0, 20.0, 10.0, 5.0}, Stage::db, 4);
  cube.channels.push_back({"b", {7.0, 7.0, 7.0, 7.0}});
  const auto s = scale_to_unit(cube);
  EXPECT_EQ(s.stage, Stage::scaled);
  EXPECT_DOUBLE_EQ(s.channels[0].plane[0], -1.0);
  EXPECT_DOUBLE_EQ(s.channels[0].plane[1], 1.0);
  EXPECT_DOUBLE_EQ(s.channels[0].plane[2], 0.0);
  EXPECT_DOUBLE_EQ(s.channels[0].plane[3], -0.5);
  for (double v : s.channels[1].plane) {
    EXPECT_EQ(v, 0.0);
  }
  ASSERT_EQ(s.scaling.size(), 2U);
  EXPECT_EQ(s.scaling[0], (ChannelScaling{0.0, 20.0}));
  EXPECT_EQ(s.scaling[1], (ChannelScaling{7.0, 7.0}));
  EXPECT_NO_THROW(s.validate());
}

TEST(ScaleToUnit, RoundTripThroughUnscale) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(-80.0, 30.0);
  FeatureCube cube;
  cube.width = 10;
  cube.height = 10;
  cube.stage = Stage::db;
  for (int c = 0; c < 3; ++c) {
    Channel ch{"c" + std::to_string(c), std::vector<double>(100)};
    for (double& v : ch.plane) {
      v = u(gen);
    }
    cube.channels.push_back(ch);
  }
  const auto s = scale_to_unit(cube);
  double lo = 1.0;
  double hi = -1.0;
  for (const auto& ch : s.channels) {
    for (double v : ch.plane) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  EXPECT_EQ(lo, -1.0);
  EXPECT_EQ(hi, 1.0);
  const auto back = unscale(s);
  EXPECT_EQ(back.stage, Stage::db);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < 100; ++i) {
      EXPECT_NEAR(back.channels[c].plane[i], cube.channels[c].plane[i], 1e-12);
    }
  }
}

TEST(ApplyScaling, ClampsOutsideTrainingRange) {
  const auto cube = one_channel({-20.0, 0.0, 10.0, 40.0}, Stage::db, 4);
  const std::vector<ChannelScaling> rec{{0.0, 20.0}};
  const auto s = apply_scaling(cube, rec);
  EXPECT_EQ(s.channels[0].plane, (std::vector<double>{-1.0, -1.0, 0.0, 1.0}));
  EXPECT_EQ(s.scaling, rec);
  const std::vector<ChannelScaling> two{{0.0, 1.0}, {0.0, 1.0}};
  EXPECT_THROW((void)apply_scaling(cube, two), std::invalid_argument);
}

TEST(FeatureCube, ValidateCatchesBrokenInvariants) {
  auto cube = one_channel({0.5, 0.2}, Stage::scaled, 2);
  EXPECT_THROW(cube.validate(), std::invalid_argument);  // no scaling record
  cube.scaling = {{0.0, 1.0}};
  EXPECT_NO_THROW(cube.validate());
  cube.channels[0].plane[1] = 1.5;
  EXPECT_THROW(cube.validate(), std::invalid_argument);
  cube.channels[0].plane[1] = 0.0;
  cube.channels.push_back({"a", {0.0, 0.0}});
  cube.scaling.push_back({0.0, 1.0});
  EXPECT_THROW(cube.validate(), std::invalid_argument);  // duplicate name
}

TEST(PauliRgb, RedDominantForDoubleBounceLikeMatrix) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> noise(0.0, 1e-4);
  HermitianImage t(8, 8);
  for (auto& m : t.pixels()) {
    m.diag = {noise(gen), 1.0 + noise(gen), noise(gen)};
  }
  const auto rgb = pauli_rgb(t);
  EXPECT_EQ(rgb.width, 8);
  EXPECT_EQ(rgb.height, 8);
  ASSERT_EQ(rgb.rgb.size(), 8U * 8U * 3U);
  for (std::size_t i = 0; i < 64; ++i) {
    EXPECT_GT(rgb.rgb[3 * i], rgb.rgb[3 * i + 1]);
    EXPECT_GT(rgb.rgb[3 * i], rgb.rgb[3 * i + 2]);
    EXPECT_GE(rgb.rgb[3 * i], 200);
  }
}

TEST(PauliRgb, EqualDiagonalsGiveGray) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> level(0.01, 10.0);
  HermitianImage t(6, 5);
  for (auto& m : t.pixels()) {
    const double v = level(gen);
    m.diag = {v, v, v};
  }
  const auto rgb = pauli_rgb(t);
  EXPECT_EQ(rgb.width, 6);
  EXPECT_EQ(rgb.height, 5);
  for (std::size_t i = 0; i < 30; ++i) {
    EXPECT_EQ(rgb.rgb[3 * i], rgb.rgb[3 * i + 1]);
    EXPECT_EQ(rgb.rgb[3 * i], rgb.rgb[3 * i + 2]);
  }
}
