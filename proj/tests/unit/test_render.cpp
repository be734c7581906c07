#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "pat/checks.hpp"
#include "pat/error.hpp"
#include "pat/render/lighting.hpp"
#include "pat/render/renderer.hpp"
#include "pat/render/textures.hpp"

using namespace pat;
using namespace pat::render;

namespace {

SceneSpec facing_scene(double distance, int frame = 128) {
  SceneSpec s;
  s.camera.pose = {0.0, -distance, 1.0, 0.0, 0.0, 0.0};
  s.camera.frame_width = frame;
  s.camera.frame_height = frame;
  s.sprite.pose = {40.0, -1.0, 0.0, 0.0, 0.0, 90.0};  // far outside the view
  s.light = {0.0, 0.0, 1.0};
  s.ambient_fraction = 0.0;
  return s;
}

Texture random_texture(int res, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  Rng rng(seed);
  Texture t(res, res, 0.0);
  for (double& v : t.data()) v = uniform(rng, lo, hi);
  return t;
}

Vec3 project(const Mat3& h, double u, double v) {
  const Vec3 p = h * Vec3{u, v, 1.0};
  return {p.x / p.z, p.y / p.z, 1.0};
}

}  // namespace

TEST_SUITE("render") {
  TEST_CASE("white light is the identity") {
    const LightingParams p = light_params_from_spec({123.0, 0.0, 1.0}, 0.0);
    for (int c = 0; c < 3; ++c) {
      CHECK(p.gain[c] == doctest::Approx(1.0));
      CHECK(p.bias[c] == 0.0);
    }
  }

  TEST_CASE("zero value gives darkness: poster pixels equal the bias") {
    const LightingParams p = light_params_from_spec({40.0, 0.5, 0.0}, 0.3);
    for (int c = 0; c < 3; ++c) CHECK(p.gain[c] == 0.0);
    SceneSpec s = facing_scene(4.0, 32);
    s.light = {40.0, 0.5, 0.0};
    s.ambient_fraction = 0.3;
    const RenderOutput out = render_scene(s, random_texture(16, 1));
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        if (out.projection_map[static_cast<std::size_t>(y * 32 + x)].source != PixelSource::poster) continue;
        for (int c = 0; c < 3; ++c) CHECK(out.frame.at(x, y, c) == 0.0);
      }
  }

  TEST_CASE("hue 0, saturation 1, value 0.5 gives gain (0.5, 0, 0)") {
    const LightingParams p = light_params_from_spec({0.0, 1.0, 0.5}, 0.0);
    CHECK(p.gain[0] == doctest::Approx(0.5));
    CHECK(p.gain[1] == doctest::Approx(0.0));
    CHECK(p.gain[2] == doctest::Approx(0.0));
  }

  TEST_CASE("light out of range is rejected") {
    CHECK_THROWS_AS(light_params_from_spec({0.0, 1.5, 0.5}, 0.0), ConfigError);
    CHECK_THROWS_AS(light_params_from_spec({0.0, 0.5, 0.5}, 1.5), ConfigError);
    CHECK_THROWS_AS(light_params_from_spec({400.0, 0.5, 0.5}, 0.2), ConfigError);
  }

  TEST_CASE("fronto-parallel centred poster has no perspective terms") {
    const SceneSpec s = facing_scene(6.0);
    const Mat3 h = poster_homography(s.camera, s.poster);
    CHECK(std::fabs(h(2, 0) / h(2, 2)) < 1e-12);
    CHECK(std::fabs(h(2, 1) / h(2, 2)) < 1e-12);
  }

  TEST_CASE("doubling the distance halves the projected width") {
    auto width_px = [](double d) {
      const SceneSpec s = facing_scene(d);
      const Mat3 h = poster_homography(s.camera, s.poster);
      return project(h, 1.0, 0.5).x - project(h, 0.0, 0.5).x;
    };
    CHECK(width_px(10.0) == doctest::Approx(0.5 * width_px(5.0)).epsilon(1e-12));
    // Pinhole oracle: 2.6 m at 5 m, 60 degree fov, 128 px.
    CHECK(width_px(5.0) == doctest::Approx(128.0 * 2.6 / (2.0 * 5.0 * std::tan(M_PI / 6.0))).epsilon(1e-9));
  }

  TEST_CASE("texel (0, 0) round-trips through the inverse homography") {
    SceneSpec s = facing_scene(7.0);
    s.camera.pose = {0.8, -7.0, 1.3, 0.0, 3.0, 12.0};
    const Mat3 h = poster_homography(s.camera, s.poster);
    const Vec3 f = project(h, 0.0, 0.0);
    const Vec3 back = h.inverse() * f;
    CHECK(std::fabs(back.x / back.z) < 1e-6);
    CHECK(std::fabs(back.y / back.z) < 1e-6);
  }

  TEST_CASE("poster behind the camera or edge-on is a degenerate view") {
    SceneSpec s = facing_scene(5.0);
    s.camera.pose.yaw = 180.0;
    CHECK_THROWS_AS(poster_homography(s.camera, s.poster), DegenerateViewError);
    SceneSpec edge = facing_scene(5.0);
    edge.camera.pose = {0.0, 0.0, 1.0, 0.0, 0.0, 90.0};
    edge.camera.pose.x = 5.0;
    CHECK_THROWS_AS(poster_homography(edge.camera, edge.poster), DegenerateViewError);
  }

  TEST_CASE("constant texture under identity lighting renders as that constant") {
    const SceneSpec s = facing_scene(4.0, 48);
    const RenderOutput out = render_scene(s, Texture(16, 16, 0.42));
    int n = 0;
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 48; ++x) {
        if (out.projection_map[static_cast<std::size_t>(y * 48 + x)].source != PixelSource::poster) continue;
        ++n;
        for (int c = 0; c < 3; ++c) CHECK(out.frame.at(x, y, c) == doctest::Approx(0.42).epsilon(1e-14));
      }
    CHECK(n > 100);
  }

  TEST_CASE("sprite in front of the poster occludes it") {
    SceneSpec s = facing_scene(6.0, 64);
    s.sprite.pose = {0.0, -1.0, 0.0, 0.0, 0.0, 90.0};
    const RenderOutput out = render_scene(s, random_texture(16, 2));
    int sprite = 0;
    for (const PixelRecord& r : out.projection_map) {
      if (r.source != PixelSource::sprite) continue;
      ++sprite;
      if (r.occluded) CHECK(r.texel[0] >= 0);
    }
    CHECK(sprite > 20);
    const auto occluded = std::count_if(out.projection_map.begin(), out.projection_map.end(),
                                        [](const PixelRecord& r) { return r.occluded; });
    CHECK(occluded > 20);
    for (const PixelRecord& r : out.projection_map) {
      if (r.occluded) CHECK(r.source == PixelSource::sprite);
    }
  }

  TEST_CASE("gt box height of a 1.8 m sprite at 8 m matches the pinhole oracle") {
    SceneSpec s = facing_scene(12.0);
    s.camera.pose = {0.0, -9.0, 0.9, 0.0, 0.0, 0.0};
    s.sprite.pose = {0.0, -1.0, 0.0, 0.0, 0.0, 90.0};
    s.sprite.height_m = 1.8;
    const RenderOutput out = render_scene(s, random_texture(16, 3));
    REQUIRE(out.gt_bbox);
    const double expected_px = 24.94;  // 128 * 1.8 / (2 * 8 * tan 30deg)
    CHECK(out.gt_bbox->height() * 128.0 == doctest::Approx(expected_px).epsilon(2.0 / expected_px));
    CHECK(out.gt_bbox->valid());
  }

  TEST_CASE("sprite outside the frame flags the box absent") {
    const RenderOutput out = render_scene(facing_scene(5.0, 32), random_texture(8, 4));
    CHECK_FALSE(out.gt_bbox.has_value());
  }

  TEST_CASE("backproject: zero frame gradient gives zero texture gradient") {
    SceneSpec s = facing_scene(5.0, 32);
    s.sprite.pose = {0.2, -1.5, 0.0, 0.0, 0.0, 90.0};
    const RenderOutput out = render_scene(s, random_texture(16, 5));
    const Image g = backproject_gradient(Image(32, 32, 0.0), out);
    CHECK(g.width() == 16);
    for (double v : g.data()) CHECK(v == 0.0);
  }

  TEST_CASE("backproject: a pixel sampled exactly at a texel centre moves that texel by 1") {
    RenderOutput out;
    out.frame = Image(2, 1, 0.5);
    out.texture_width = 4;
    out.texture_height = 4;
    out.saturated.assign(2 * 1 * 3, 0);
    out.projection_map.resize(2);
    out.projection_map[1].source = PixelSource::poster;
    out.projection_map[1].texel = {9, 10, 13, 14};
    out.projection_map[1].weight = {1.0, 0.0, 0.0, 0.0};
    Image fg(2, 1, 0.0);
    fg.at(1, 0, 1) = 1.0;
    const Image g = backproject_gradient(fg, out);
    CHECK(g.at(1, 2, 1) == 1.0);
    CHECK(std::accumulate(g.data().begin(), g.data().end(), 0.0) == 1.0);
  }

  TEST_CASE("backproject conserves gradient mass scaled by the gain") {
    SceneSpec s = facing_scene(5.0, 40);
    s.sprite.pose = {0.3, -1.5, 0.0, 0.0, 0.0, 90.0};
    s.light = {200.0, 0.4, 0.6};
    s.ambient_fraction = 0.2;
    const RenderOutput out = render_scene(s, random_texture(16, 6));
    Rng rng(7);
    Image fg(40, 40, 0.0);
    for (double& v : fg.data()) v = uniform(rng, -1.0, 1.0);
    double expected = 0.0;
    for (std::size_t p = 0; p < out.projection_map.size(); ++p) {
      const PixelRecord& r = out.projection_map[p];
      if (r.source != PixelSource::poster || r.occluded) continue;
      for (int c = 0; c < 3; ++c) {
        if (out.saturated[p * 3 + static_cast<std::size_t>(c)]) continue;
        expected += fg.data()[p * 3 + static_cast<std::size_t>(c)] * out.lighting.gain[c];
      }
    }
    const Image g = backproject_gradient(fg, out);
    CHECK(std::accumulate(g.data().begin(), g.data().end(), 0.0) == doctest::Approx(expected).epsilon(1e-12));
  }

  TEST_CASE("backproject rejects a mismatched gradient shape") {
    const RenderOutput out = render_scene(facing_scene(5.0, 32), random_texture(8, 8));
    CHECK_THROWS_AS(backproject_gradient(Image(31, 32, 0.0), out), ShapeError);
  }

  TEST_CASE("frame gradient w.r.t. a 16x16 texture matches finite differences") {
    const checks::CompositeCheck c = checks::render_composite(21);
    CHECK(c.coordinates == 16 * 16 * 3);
    CHECK(c.result.max_rel_error < 1e-3);
  }

  TEST_CASE("gain g with texture chi equals unit gain with texture g * chi on the poster") {
    SceneSpec lit = facing_scene(5.0, 40);
    lit.light = {90.0, 0.5, 0.6};
    const LightingParams p = light_params_from_spec(lit.light, 0.0);
    const Texture chi = random_texture(16, 9);
    Texture scaled = chi;
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x)
        for (int c = 0; c < 3; ++c) scaled.at(x, y, c) *= p.gain[c];
    const RenderOutput a = render_scene(lit, chi);
    const RenderOutput b = render_scene(facing_scene(5.0, 40), scaled);
    for (std::size_t i = 0; i < a.projection_map.size(); ++i) {
      if (a.projection_map[i].source != PixelSource::poster) continue;
      for (std::size_t c = 0; c < 3; ++c) {
        CHECK(a.frame.data()[i * 3 + c] == doctest::Approx(b.frame.data()[i * 3 + c]).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("moving the sprite off the poster restores poster pixels bit-exactly") {
    SceneSpec with = facing_scene(6.0, 64);
    with.sprite.pose = {0.0, -1.0, 0.0, 0.0, 0.0, 90.0};
    const Texture chi = random_texture(16, 10);
    const RenderOutput a = render_scene(with, chi);
    const RenderOutput b = render_scene(facing_scene(6.0, 64), chi);
    int restored = 0;
    for (std::size_t i = 0; i < a.projection_map.size(); ++i) {
      const PixelRecord& r = a.projection_map[i];
      CHECK_FALSE((r.source == PixelSource::poster && r.occluded));
      if (r.occluded) {
        REQUIRE(b.projection_map[i].source == PixelSource::poster);
        for (std::size_t c = 0; c < 3; ++c) ++restored;
      }
      if (b.projection_map[i].source == PixelSource::poster && a.projection_map[i].source == PixelSource::poster) {
        for (std::size_t c = 0; c < 3; ++c) CHECK(a.frame.data()[i * 3 + c] == b.frame.data()[i * 3 + c]);
      }
    }
    CHECK(restored > 0);
  }

  TEST_CASE("identical scene specs render identically") {
    const attack::ScenePair pair = checks::tiny_scene_pair();
    const Texture chi = random_texture(16, 11);
    const RenderOutput a = render_scene(pair.current, chi);
    const RenderOutput b = render_scene(pair.current, chi);
    CHECK(a.frame == b.frame);
    CHECK(a.gt_bbox == b.gt_bbox);
    CHECK(a.saturated == b.saturated);
  }

  TEST_CASE("png round trip quantizes to 8 bits") {
    const Texture chi = random_texture(9, 12);
    const auto path = std::filesystem::temp_directory_path() / "pat_png_roundtrip.png";
    save_png(chi, path);
    const Texture back = load_png(path);
    REQUIRE(back.width() == 9);
    for (std::size_t i = 0; i < chi.size(); ++i) {
      CHECK(back.data()[i] == std::round(chi.data()[i] * 255.0) / 255.0);
    }
    std::filesystem::remove(path);
  }
}
