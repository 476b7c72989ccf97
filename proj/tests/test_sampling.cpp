#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "test_util.hpp"
#include "vqa/error.hpp"
#include "vqa/sampling.hpp"

using namespace vqa;

namespace {

// Direct evaluation of the end-weighted subset formula in long double.
std::vector<int> subset_oracle(int m, int t) {
  std::vector<int> out;
  for (int j = 0; j < t; ++j) {
    const long double frac = static_cast<long double>(t - j) / t;
    long long i = std::llround(m * (1.0L - std::pow(frac, 1.5L)));
    i = std::min<long long>(i, m - t + j);
    if (!out.empty() && i <= out.back()) i = out.back() + 1;
    out.push_back(static_cast<int>(i));
  }
  return out;
}

Plane region_constant(int w, int h, int grid) {
  Plane p(w, h);
  const int rw = w / grid;
  const int rh = h / grid;
  for (int y = 0; y < h; ++y) {
    const int i = std::min(y / rh, grid - 1);
    for (int x = 0; x < w; ++x) {
      const int j = std::min(x / rw, grid - 1);
      p.at(x, y) = static_cast<float>(grid * i + j) / static_cast<float>(grid * grid);
    }
  }
  return p;
}

VideoClip clip_of(int frames, int w, int h, std::uint64_t seed) {
  std::vector<Frame> fs;
  for (int i = 0; i < frames; ++i) fs.emplace_back(testutil::random_plane(w, h, seed + i), std::nullopt);
  return VideoClip(std::move(fs), Fps{30, 1});
}

}  // namespace

TEST_CASE("frankenstone subset worked example") {
  CHECK(frankenstone_subset(20, 5) == std::vector<int>{0, 6, 11, 15, 18});
  CHECK(frankenstone_subset(5, 5) == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(frankenstone_subset(10, 5) == subset_oracle(10, 5));
  CHECK_THROWS_AS(frankenstone_subset(4, 5), InsufficientFrames);
}

TEST_CASE("frankenstone subset matches the formula and narrows toward the end") {
  for (int m = 5; m <= 600; ++m) {
    CAPTURE(m);
    const auto idx = frankenstone_subset(m, 5);
    REQUIRE(idx == subset_oracle(m, 5));
    CHECK(idx.front() == 0);
    CHECK(idx.back() < m);
    for (std::size_t k = 2; k < idx.size(); ++k) CHECK(idx[k] - idx[k - 1] <= idx[k - 1] - idx[k - 2]);
  }
  for (int t = 1; t <= 8; ++t) {
    for (int m = t; m <= 100; ++m) {
      const auto idx = frankenstone_subset(m, t);
      CHECK(std::is_sorted(idx.begin(), idx.end()));
      CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
      CHECK(idx.back() < m);
    }
  }
}

TEST_CASE("block sampling") {
  CHECK(temporal_sample(60, {30, 1}, TemporalMode::kOnePer30).indices == std::vector<int>{0, 30});
  CHECK(temporal_sample(60, {30, 1}, TemporalMode::kTwoPer30).indices == std::vector<int>{0, 15, 30, 45});
  CHECK(temporal_sample(30, {30, 1}, TemporalMode::kOneFps).indices == std::vector<int>{0});
  CHECK(temporal_sample(30, {30, 1}, TemporalMode::kFiveFps).indices == std::vector<int>{0, 6, 12, 18, 24});
  CHECK(temporal_sample(4, {30, 1}, TemporalMode::kAll).indices == std::vector<int>{0, 1, 2, 3});
  CHECK(temporal_sample(30, {30, 1}, TemporalMode::kFrankenstoneReduce).indices == std::vector<int>{0, 6, 12, 18, 24});
  CHECK(temporal_sample(20 * 30, {30, 1}, TemporalMode::kFrankenstoneReduce).indices ==
        std::vector<int>{0, 180, 330, 450, 540});
}

TEST_CASE("block sampling counts") {
  for (int n = 1; n <= 200; ++n) {
    CAPTURE(n);
    const int blocks = (n + 29) / 30;
    CHECK(temporal_sample(n, {30, 1}, TemporalMode::kOnePer30).indices.size() == static_cast<std::size_t>(blocks));
    const auto two = temporal_sample(n, {30, 1}, TemporalMode::kTwoPer30).indices.size();
    const int last_block = n - 30 * (blocks - 1);
    if (last_block >= 2) {
      CHECK(two == static_cast<std::size_t>(std::min(2 * blocks, n)));
    } else {
      CHECK(two == static_cast<std::size_t>(2 * blocks - 1));
    }
  }
}

TEST_CASE("per-second sampling follows the frame rate") {
  // 29.97 fps: first frame of each second is ceil(k * 30000 / 1001)
  const auto plan = temporal_sample(100, {30000, 1001}, TemporalMode::kOneFps).indices;
  CHECK(plan == std::vector<int>{0, 30, 60, 90});
  const auto five = temporal_sample(25, {25, 1}, TemporalMode::kFiveFps).indices;
  CHECK(five == std::vector<int>{0, 5, 10, 15, 20});
  CHECK(temporal_sample(3, {60, 1}, TemporalMode::kOneFps).indices == std::vector<int>{0});
}

TEST_CASE("temporal plans are sorted, unique and in range") {
  std::mt19937_64 rng(4);
  const TemporalMode modes[] = {TemporalMode::kOnePer30, TemporalMode::kTwoPer30, TemporalMode::kOneFps,
                                TemporalMode::kFiveFps,  TemporalMode::kAll,      TemporalMode::kFrankenstoneReduce};
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 400;
    const Fps fps{static_cast<std::int64_t>(1 + rng() % 120000), static_cast<std::int64_t>(1 + rng() % 2000)};
    for (auto mode : modes) {
      const auto a = temporal_sample(n, fps, mode);
      const auto b = temporal_sample(n, fps, mode);
      REQUIRE(!a.indices.empty());
      CHECK(a.indices == b.indices);
      CHECK(a.indices.front() == 0);
      CHECK(static_cast<std::size_t>(a.indices.back()) < n);
      for (std::size_t k = 1; k < a.indices.size(); ++k) CHECK(a.indices[k] > a.indices[k - 1]);
    }
  }
  CHECK_THROWS_AS(temporal_sample(0, {30, 1}, TemporalMode::kAll), EmptyInput);
}

TEST_CASE("temporal plan names and json") {
  for (auto name : {"one_per_30", "two_per_30", "one_fps", "five_fps", "all", "frankenstone_reduce"}) {
    CHECK(temporal_mode_name(parse_temporal_mode(name)) == name);
  }
  CHECK_THROWS(parse_temporal_mode("three_per_30"));
  const auto plan = temporal_sample(60, {30, 1}, TemporalMode::kTwoPer30);
  CHECK(temporal_plan_to_json(plan) == R"({"mode":"two_per_30","indices":[0,15,30,45]})");
}

TEST_CASE("bilinear resize") {
  const Plane c(64, 64, 0.25f);
  const Plane up = resize_bilinear(c, 224, 224);
  CHECK(up.width == 224);
  CHECK(std::all_of(up.data.begin(), up.data.end(), [](float v) { return v == 0.25f; }));

  Plane two(2, 1);
  two.data = {0.0f, 1.0f};
  const Plane four = resize_bilinear(two, 4, 1);
  // sample centres at -0.25, 0.25, 0.75, 1.25 clamp to [0,1]
  CHECK(four.data == std::vector<float>{0.0f, 0.25f, 0.75f, 1.0f});

  const Plane r = testutil::random_plane(37, 23, 1);
  CHECK(resize_bilinear(r, 37, 23) == r);
}

TEST_CASE("bilinear resize stays within the input range") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 40);
    const int h = 1 + static_cast<int>(rng() % 40);
    Plane p = testutil::random_plane(w, h, trial);
    for (float& v : p.data) v = 0.2f + 0.5f * v;
    const auto [lo, hi] = std::minmax_element(p.data.begin(), p.data.end());
    const Plane out = resize_bilinear(p, 1 + static_cast<int>(rng() % 90), 1 + static_cast<int>(rng() % 90));
    for (float v : out.data) {
      CHECK(v >= *lo);
      CHECK(v <= *hi);
    }
  }
}

TEST_CASE("pad to square") {
  const Plane wide(1920, 1080, 1.0f);
  const Plane sq = pad_to_square(wide);
  CHECK(sq.width == 1920);
  CHECK(sq.height == 1920);
  CHECK(sq.at(100, 419) == 0.0f);
  CHECK(sq.at(100, 420) == 1.0f);
  CHECK(sq.at(100, 1499) == 1.0f);
  CHECK(sq.at(100, 1500) == 0.0f);

  const Plane s = testutil::random_plane(5, 5, 3);
  CHECK(pad_to_square(s) == s);

  Plane row(3, 1);
  row.data = {0.1f, 0.2f, 0.3f};
  const Plane p = pad_to_square(row);
  CHECK(p.data == std::vector<float>{0, 0, 0, 0.1f, 0.2f, 0.3f, 0, 0, 0});
  Plane tall(1, 2, 0.5f);
  CHECK(pad_to_square(tall, 0.25f).data == std::vector<float>{0.5f, 0.25f, 0.5f, 0.25f});
}

TEST_CASE("fragment sampling shapes") {
  const Plane fhd = testutil::random_plane(1920, 1080, 5);
  const Plane out = fragment_sample(fhd, {}, 42);
  CHECK(out.width == 224);
  CHECK(out.height == 224);

  const Plane exact = testutil::random_plane(224, 224, 6);
  CHECK(fragment_sample(exact, {}, 1) == exact);
  CHECK(fragment_sample(exact, {}, 99) == exact);

  CHECK_THROWS_AS(fragment_sample(testutil::random_plane(223, 500, 1), {}, 0), SourceTooSmall);
  CHECK(fragment_sample(fhd, {}, 42) == out);
  CHECK_FALSE(fragment_sample(fhd, {}, 43) == out);
}

TEST_CASE("fragment cells come from their own region") {
  const Plane src = region_constant(1920, 1080, 7);
  const Plane out = fragment_sample(src, {}, 7);
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      const float want = static_cast<float>(7 * i + j) / 49.0f;
      for (int y = 32 * i; y < 32 * i + 32; ++y) {
        for (int x = 32 * j; x < 32 * j + 32; ++x) REQUIRE(out.at(x, y) == want);
      }
    }
  }
}

TEST_CASE("fragment layout windows stay inside their region") {
  const auto layout = fragment_layout(300, 250, {}, 11);
  REQUIRE(layout.x0.size() == 49);
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      const int x0 = layout.x0[7 * i + j];
      const int y0 = layout.y0[7 * i + j];
      const int rx = 300 / 7 * j;
      const int ry = 250 / 7 * i;
      const int rw = j == 6 ? 300 - rx : 300 / 7;
      const int rh = i == 6 ? 250 - ry : 250 / 7;
      CHECK(x0 >= rx);
      CHECK(x0 + 32 <= rx + rw);
      CHECK(y0 >= ry);
      CHECK(y0 + 32 <= ry + rh);
    }
  }
}

TEST_CASE("views are identical across thread counts") {
  const VideoClip clip = clip_of(6, 260, 240, 3);
  const auto plan = temporal_sample(clip, TemporalMode::kAll);
  const SpatialTransform t = transform::Fragment{{}, 1234};
  const SampledView a = make_view(clip, plan, t, false, 1);
  const SampledView b = make_view(clip, plan, t, false, 4);
  REQUIRE(a.frames.size() == 6);
  CHECK(a.origin_indices == plan.indices);
  for (std::size_t i = 0; i < a.frames.size(); ++i) CHECK(a.frames[i].luma == b.frames[i].luma);
  // per-frame seeds differ
  CHECK_FALSE(a.frames[0].luma == a.frames[1].luma);
  CHECK(a.frames[0].luma == fragment_sample(clip.frame(0).luma(), {}, 1234 ^ 0));
  CHECK(a.frames[3].luma == fragment_sample(clip.frame(3).luma(), {}, 1234 ^ 3));
}

TEST_CASE("views apply resize and pad-square transforms") {
  const VideoClip clip = clip_of(3, 64, 32, 8);
  const auto plan = temporal_sample(clip, TemporalMode::kAll);
  const auto r = make_view(clip, plan, transform::Resize{20, 10}, false);
  CHECK(r.frames[1].luma == resize_bilinear(clip.frame(1).luma(), 20, 10));
  const auto p = make_view(clip, plan, transform::PadSquareResize{48}, false);
  CHECK(p.frames[2].luma == resize_bilinear(pad_to_square(clip.frame(2).luma()), 48, 48));
  CHECK_FALSE(p.frames[0].rgb.has_value());
}

TEST_CASE("spatial transform parsing") {
  CHECK(std::holds_alternative<transform::Identity>(parse_spatial_transform("none")));
  const auto r = std::get<transform::Resize>(parse_spatial_transform("resize:512x256"));
  CHECK(r.width == 512);
  CHECK(r.height == 256);
  CHECK(std::get<transform::PadSquareResize>(parse_spatial_transform("pad_square:448")).side == 448);
  const auto f = std::get<transform::Fragment>(parse_spatial_transform("fragment", 9));
  CHECK(f.params.grid == 7);
  CHECK(f.params.patch == 32);
  CHECK(f.seed == 9);
  CHECK(std::get<transform::Fragment>(parse_spatial_transform("fragment:4x16")).params.patch == 16);
  for (auto text : {"none", "resize:512x256", "pad_square:448", "fragment:7x32"}) {
    CHECK(spatial_transform_name(parse_spatial_transform(text)) == text);
  }
  CHECK_THROWS(parse_spatial_transform("resize:0x5"));
  CHECK_THROWS(parse_spatial_transform("crop"));
}
