#include "colrec/geometry.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cstdio>
#include <random>

using namespace colrec;
using namespace colrec::testing;

TEST_CASE("backproject principal point") {
  Intrinsics K{1, 1, 0, 0, 4, 4};
  const Vec3 p = Backproject(K, Vec2(0, 0), 2.0);
  CHECK(p.isApprox(Vec3(0, 0, 2)));
}

TEST_CASE("backproject hand case") {
  Intrinsics K{100, 100, 50, 50, 100, 100};
  const Vec3 p = Backproject(K, Vec2(60, 50), 5.0);
  CHECK(p.x() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p.y() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.z() == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("project o backproject is identity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Intrinsics K{123.4, 98.7, 31.2, 34.8, 64, 64};
  for (int i = 0; i < 50; ++i) {
    const Vec2 pixel(uni(rng) * 63, uni(rng) * 63);
    const double d = 0.5 + 4.0 * uni(rng);
    const Vec2 back = Project(K, Backproject(K, pixel, d));
    CHECK((back - pixel).norm() < 1e-10);
  }
}

TEST_CASE("project rejects non-positive depth") {
  Intrinsics K{1, 1, 0, 0, 4, 4};
  CHECK_THROWS_AS(Project(K, Vec3(0, 0, -1)), InvalidInputError);
}

TEST_CASE("warp with identity pose is identity") {
  const Intrinsics K = SmallCamera(8);
  DepthMap depth(8, 8, 1.7, true);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      const WarpResult w = ProjectWarp(K, Pose::Identity(), depth, Vec2(x, y));
      REQUIRE(w.in_bounds);
      CHECK((w.pixel_s - Vec2(x, y)).norm() < 1e-12);
      CHECK(w.projected_depth == doctest::Approx(1.7).epsilon(1e-12));
    }
  }
}

TEST_CASE("warp axial translation at principal point") {
  Intrinsics K{1, 1, 0, 0, 4, 4};
  DepthMap depth(4, 4, 2.0, true);
  Pose pose;
  pose.translation = Vec3(0, 0, 1);
  const WarpResult w = ProjectWarp(K, pose, depth, Vec2(0, 0));
  REQUIRE(w.in_bounds);
  CHECK(w.pixel_s.norm() < 1e-12);
  CHECK(w.projected_depth == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("warp matches homogeneous matrix oracle") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Intrinsics K{40, 44, 15.5, 15.5, 32, 32};
  for (int trial = 0; trial < 40; ++trial) {
    const Pose pose = RandomPose(rng, 0.2);
    DepthMap depth(32, 32);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) depth.Set(x, y, 1.0 + 2.0 * uni(rng));
    const int px = int(uni(rng) * 31), py = int(uni(rng) * 31);

    // Explicit 4x4 chain: K4 * T * D * K4^-1 * p.
    Mat4 K4 = Mat4::Identity();
    K4(0, 0) = K.fx; K4(1, 1) = K.fy; K4(0, 2) = K.cx; K4(1, 2) = K.cy;
    const Eigen::Vector4d hp(px, py, 1.0, 1.0 / depth.At(px, py));
    const Eigen::Vector4d q =
        K4 * pose.Matrix() * (depth.At(px, py) * (K4.inverse() * hp));
    const WarpResult w = ProjectWarp(K, pose, depth, Vec2(px, py));
    if (q.z() <= 0.0) {
      CHECK_FALSE(w.in_bounds);
      continue;
    }
    const Vec2 oracle(q.x() / q.z(), q.y() / q.z());
    CHECK((w.pixel_s - oracle).norm() < 1e-10);
    CHECK(w.projected_depth == doctest::Approx(q.z()).epsilon(1e-10));
  }
}

TEST_CASE("warp equals backproject-transform-project") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> uni(0.2, 0.8);
  Intrinsics K{50, 50, 31.5, 31.5, 64, 64};
  for (int trial = 0; trial < 30; ++trial) {
    const Pose pose = RandomPose(rng, 0.1);
    const Vec2 pixel(uni(rng) * 63, uni(rng) * 63);
    const double d = 1.0 + uni(rng);
    const Vec3 transformed =
        pose.rotation * Backproject(K, pixel, d) + pose.translation;
    const WarpResult w = WarpPoint(K, pose, pixel, d);
    if (transformed.z() <= 0.0) {
      CHECK_FALSE(w.in_bounds);
      continue;
    }
    CHECK((w.pixel_s - Project(K, transformed)).norm() < 1e-10);
  }
}

TEST_CASE("bilinear sampling basics") {
  DepthMap depth(2, 2);
  depth.Set(0, 0, 0.0);
  depth.Set(1, 0, 1.0);
  depth.Set(0, 1, 0.0);
  depth.Set(1, 1, 1.0);

  auto lattice = SampleBilinear(depth, Vec2(1, 1));
  REQUIRE(lattice.valid);
  CHECK(lattice.value == doctest::Approx(1.0).epsilon(1e-15));

  auto mid = SampleBilinear(depth, Vec2(0.5, 0.0));
  REQUIRE(mid.valid);
  CHECK(mid.value == doctest::Approx(0.5).epsilon(1e-15));

  CHECK_FALSE(SampleBilinear(depth, Vec2(-0.5, 2)).valid);
}

TEST_CASE("bilinear sample with invalid neighbor is invalid") {
  DepthMap depth(2, 2, 1.0, true);
  depth.Invalidate(1, 0);
  CHECK_FALSE(SampleBilinear(depth, Vec2(0.5, 0.5)).valid);
  CHECK(SampleBilinear(depth, Vec2(0.0, 1.0)).valid);
}

TEST_CASE("bilinear normal samples stay unit") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  NormalMap normals(6, 6);
  for (auto& n : normals.vectors) {
    Vec3 v(gauss(rng), gauss(rng), -std::abs(gauss(rng)) - 0.1);
    n = v.normalized();
  }
  std::uniform_real_distribution<double> uni(0.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    auto s = SampleBilinear(normals, Vec2(uni(rng), uni(rng)));
    REQUIRE(s.valid);
    CHECK(std::abs(s.value.norm() - 1.0) < 1e-6);
  }
}

TEST_CASE("pose compose and invert") {
  std::mt19937_64 rng(9);
  const Pose p = RandomPose(rng), q = RandomPose(rng);

  const Pose idp = Compose(Pose::Identity(), p);
  CHECK((idp.rotation - p.rotation).norm() < 1e-15);
  CHECK((idp.translation - p.translation).norm() < 1e-15);

  const Pose inv = Compose(Invert(p), p);
  CHECK((inv.rotation - Mat3::Identity()).norm() < 1e-12);
  CHECK(inv.translation.norm() < 1e-12);

  const Pose pq = Compose(p, q);
  const Mat4 oracle = p.Matrix() * q.Matrix();
  CHECK((pq.Matrix() - oracle).norm() < 1e-12);

  // Orthonormality preserved.
  CHECK((pq.rotation * pq.rotation.transpose() - Mat3::Identity()).norm() <
        1e-9);
  CHECK(pq.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pose validation rejects non-rotations") {
  Pose p;
  p.rotation(0, 0) = 2.0;
  CHECK_THROWS_AS(p.Validate(), InvalidInputError);
}

TEST_CASE("intrinsics json round trip") {
  Intrinsics K{123.5, 98.25, 31.75, 30.5, 64, 48};
  const Intrinsics back = IntrinsicsFromJson(IntrinsicsToJson(K));
  CHECK(back.fx == K.fx);
  CHECK(back.fy == K.fy);
  CHECK(back.cx == K.cx);
  CHECK(back.cy == K.cy);
  CHECK(back.width == K.width);
  CHECK(back.height == K.height);
}

TEST_CASE("trajectory file round trip") {
  std::mt19937_64 rng(17);
  std::vector<TrajectoryEntry> entries;
  for (int i = 0; i < 5; ++i) {
    entries.push_back({"frame_" + std::to_string(i), RandomPose(rng)});
  }
  const std::string path = "test_trajectory_tmp.txt";
  WriteTrajectory(path, entries);
  const auto back = ReadTrajectory(path);
  std::remove(path.c_str());
  REQUIRE(back.size() == entries.size());
  for (size_t i = 0; i < entries.size(); ++i) {
    CHECK(back[i].frame_id == entries[i].frame_id);
    CHECK((back[i].pose.rotation - entries[i].pose.rotation).norm() < 1e-12);
    CHECK((back[i].pose.translation - entries[i].pose.translation).norm() <
          1e-12);
  }
}

TEST_CASE("warp image of identical pose reproduces the source") {
  const Intrinsics K = SmallCamera(8);
  DepthMap depth(8, 8, 2.0, true);
  ImageRGB image(8, 8);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (auto& p : image.pixels) p = Vec3(uni(rng), uni(rng), uni(rng));
  Mask validity;
  const ImageRGB warped = WarpImage(image, depth, Pose::Identity(), K, &validity);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      REQUIRE(validity.At(x, y) == 1.0);
      CHECK((warped.At(x, y) - image.At(x, y)).norm() < 1e-12);
    }
  }
}
