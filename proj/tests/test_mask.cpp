// SPDX-License-Identifier: Apache-2.0

#include <random>

#include "doctest.h"
#include "test_support.hpp"
#include "vrt/error.hpp"
#include "vrt/mask.hpp"

using namespace vrt;
using namespace vrt::testing;

TEST_CASE("decode_rle expands column-major runs") {
  SUBCASE("second column foreground") {
    const auto m = decode_rle({2, 2, {2, 2}});
    CHECK_FALSE(m.at(0, 0));
    CHECK_FALSE(m.at(1, 0));
    CHECK(m.at(0, 1));
    CHECK(m.at(1, 1));
    CHECK(m.area() == 2);
  }
  SUBCASE("leading zero means foreground first") {
    const auto m = decode_rle({2, 2, {0, 4}});
    CHECK(m.area() == 4);
    CHECK(m.to_dense() == Dense{1, 1, 1, 1});
  }
  SUBCASE("single background run") {
    const auto m = decode_rle({3, 3, {9}});
    CHECK(m.empty());
  }
  SUBCASE("interior zero runs merge into the canonical form") {
    const auto m = decode_rle({2, 2, {1, 0, 1, 2}});
    CHECK(encode_rle(m).counts == std::vector<std::uint32_t>{2, 2});
  }
}

TEST_CASE("decode_rle rejects malformed runs") {
  CHECK_THROWS_AS(decode_rle({2, 2, {2, 1}}), RleError);
  CHECK_THROWS_AS(decode_rle({2, 2, {3, 3}}), RleError);
  CHECK_THROWS_AS(decode_rle({0, 2, {}}), ShapeError);
}

TEST_CASE("encode_rle canonical examples") {
  CHECK(encode_rle(BinaryMask(3, 3)).counts == std::vector<std::uint32_t>{9});
  const auto full = BinaryMask::from_dense(2, 2, Dense{1, 1, 1, 1});
  CHECK(encode_rle(full).counts == std::vector<std::uint32_t>{0, 4});
}

TEST_CASE("RLE round trip matches the dense representation") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> dim(1, 24);
  std::uniform_real_distribution<double> density(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int h = dim(rng), w = dim(rng);
    const auto dense = random_dense(rng, h, w, density(rng));
    const auto mask = BinaryMask::from_dense(h, w, dense);
    const auto rle = encode_rle(mask);

    // Canonical: runs sum to H*W and only the first may be zero.
    CHECK(std::accumulate(rle.counts.begin(), rle.counts.end(), std::uint64_t{0}) ==
          std::uint64_t(h) * w);
    for (std::size_t i = 1; i < rle.counts.size(); ++i) REQUIRE(rle.counts[i] > 0);

    auto expected = dense_runs(dense, h, w);
    if (expected.size() > 1 && expected.back() == 0) expected.pop_back();
    REQUIRE(rle.counts == expected);
    REQUIRE(decode_rle(rle).to_dense() == dense);
    REQUIRE(decode_rle(rle) == mask);
  }
}

TEST_CASE("at() agrees with the dense buffer") {
  std::mt19937 rng(11);
  const auto dense = random_dense(rng, 9, 13, 0.4);
  const auto mask = BinaryMask::from_dense(9, 13, dense);
  for (int r = 0; r < 9; ++r) {
    for (int c = 0; c < 13; ++c) REQUIRE(mask.at(r, c) == bool(dense[r * 13 + c]));
  }
  CHECK_THROWS_AS(mask.at(9, 0), std::out_of_range);
}

TEST_CASE("iou examples") {
  const auto sq = rect_mask(20, 30, 5, 5, 10, 10);
  CHECK(iou(sq, sq).value == 1.0);
  CHECK(iou(sq, rect_mask(20, 30, 5, 18, 10, 10)).value == 0.0);

  const auto shifted = rect_mask(20, 30, 5, 10, 10, 10);
  const double oracle = dense_iou(dense_rect(20, 30, 5, 5, 10, 10),
                                  dense_rect(20, 30, 5, 10, 10, 10));
  CHECK(oracle == doctest::Approx(50.0 / 150.0));
  CHECK(iou(sq, shifted).value == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(intersection_area(sq, shifted) == 50);

  const auto empty = BinaryMask(20, 30);
  const auto degenerate = iou(empty, empty);
  CHECK(degenerate.value == 0.0);
  CHECK(degenerate.degenerate);
  CHECK_FALSE(iou(sq, empty).degenerate);

  CHECK_THROWS_AS(iou(sq, BinaryMask(20, 31)), ShapeError);
}

TEST_CASE("iou properties against the dense oracle") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const auto da = random_blob(rng, 17, 23);
    const auto db = random_dense(rng, 17, 23, 0.3);
    const auto a = BinaryMask::from_dense(17, 23, da);
    const auto b = BinaryMask::from_dense(17, 23, db);
    const double ab = iou(a, b).value;
    REQUIRE(ab == doctest::Approx(dense_iou(da, db)).epsilon(1e-12));
    REQUIRE(ab == iou(b, a).value);
    REQUIRE(ab >= 0.0);
    REQUIRE(ab <= 1.0);
    if (!a.empty()) REQUIRE(iou(a, a).value == 1.0);

    // Dropping foreground from a never grows the intersection.
    auto thinner = da;
    for (std::size_t i = 0; i < thinner.size(); i += 3) thinner[i] = 0;
    REQUIRE(intersection_area(BinaryMask::from_dense(17, 23, thinner), b) <=
            intersection_area(a, b));
  }
}

TEST_CASE("tight_box examples") {
  CHECK(tight_box(rect_mask(10, 10, 3, 7, 1, 1)) == Box{3, 7, 3, 7});
  CHECK(tight_box(rect_mask(6, 8, 0, 0, 6, 8)) == Box{0, 0, 5, 7});

  auto l_shape = dense_rect(12, 12, 0, 0, 5, 3);
  const auto foot = dense_rect(12, 12, 3, 0, 2, 10);
  for (std::size_t i = 0; i < foot.size(); ++i) l_shape[i] |= foot[i];
  // Scan the dense buffer for extremes.
  Box oracle{12, 12, -1, -1};
  for (int r = 0; r < 12; ++r) {
    for (int c = 0; c < 12; ++c) {
      if (!l_shape[r * 12 + c]) continue;
      oracle = {std::min(oracle.row_min, r), std::min(oracle.col_min, c),
                std::max(oracle.row_max, r), std::max(oracle.col_max, c)};
    }
  }
  CHECK(oracle == Box{0, 0, 4, 9});
  CHECK(tight_box(BinaryMask::from_dense(12, 12, l_shape)) == oracle);

  CHECK_THROWS_AS(tight_box(BinaryMask(4, 4)), EmptyMaskError);
}

TEST_CASE("tight_box is minimal") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto d = random_dense(rng, 11, 7, 0.05);
    const auto m = BinaryMask::from_dense(11, 7, d);
    if (m.empty()) continue;
    const auto box = tight_box(m);
    bool top = false, bottom = false, left = false, right = false;
    for (int r = 0; r < 11; ++r) {
      for (int c = 0; c < 7; ++c) {
        if (!d[r * 7 + c]) continue;
        REQUIRE(r >= box.row_min);
        REQUIRE(r <= box.row_max);
        REQUIRE(c >= box.col_min);
        REQUIRE(c <= box.col_max);
        top |= r == box.row_min;
        bottom |= r == box.row_max;
        left |= c == box.col_min;
        right |= c == box.col_max;
      }
    }
    REQUIRE((top && bottom && left && right));
  }
}

TEST_CASE("from_box matches a dense rectangle") {
  CHECK(BinaryMask::from_box(9, 14, {2, 3, 5, 11}) == rect_mask(9, 14, 2, 3, 4, 9));
  CHECK(BinaryMask::from_box(4, 4, {0, 0, 3, 3}).area() == 16);
  CHECK_THROWS_AS(BinaryMask::from_box(4, 4, {0, 0, 4, 3}), ShapeError);
}

TEST_CASE("box_iou examples") {
  const Box a{0, 0, 9, 9};
  CHECK(box_iou(a, a) == 1.0);
  CHECK(box_iou({0, 0, 9, 4}, a) == doctest::Approx(0.5));
  // 5 overlapping rows x 10 columns over a 150-pixel union.
  CHECK(box_iou(a, {5, 0, 14, 9}) == doctest::Approx(50.0 / 150.0));
  CHECK(box_iou(a, {20, 20, 21, 21}) == 0.0);
}

TEST_CASE("dedup_masks examples") {
  const auto sq = rect_mask(20, 20, 0, 0, 10, 10);
  CHECK(dedup_masks(std::vector{sq, sq}) == std::vector<std::size_t>{0});

  // 50-pixel mask inside an 80-pixel mask: IoU 50/80 = 0.625.
  const auto small = rect_mask(20, 20, 0, 0, 5, 10);
  const auto large = rect_mask(20, 20, 0, 0, 8, 10);
  CHECK(dedup_masks(std::vector{small, large}) == std::vector<std::size_t>{1});

  // IoU 40/100 = 0.4.
  const auto a = rect_mask(20, 20, 0, 0, 7, 10);
  const auto b = rect_mask(20, 20, 3, 0, 7, 10);
  CHECK(iou(a, b).value == doctest::Approx(0.4));
  CHECK(dedup_masks(std::vector{a, b}) == std::vector<std::size_t>{0, 1});

  CHECK_THROWS_AS(dedup_masks(std::vector{sq, BinaryMask(20, 21)}), ShapeError);
}

TEST_CASE("dedup_masks properties") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<BinaryMask> masks;
    const int n = 2 + int(rng() % 8);
    for (int i = 0; i < n; ++i) masks.push_back(BinaryMask::from_dense(16, 16, random_blob(rng, 16, 16, 2)));
    const auto kept = dedup_masks(masks);
    REQUIRE(std::is_sorted(kept.begin(), kept.end()));
    for (std::size_t i = 0; i < kept.size(); ++i) {
      for (std::size_t j = i + 1; j < kept.size(); ++j) {
        REQUIRE(iou(masks[kept[i]], masks[kept[j]]).value <= 0.5);
      }
    }
    for (std::size_t r = 0; r < masks.size(); ++r) {
      if (std::find(kept.begin(), kept.end(), r) != kept.end()) continue;
      const bool covered = std::any_of(kept.begin(), kept.end(), [&](auto k) {
        return iou(masks[k], masks[r]).value > 0.5 && masks[k].area() >= masks[r].area();
      });
      REQUIRE(covered);
    }
    std::vector<BinaryMask> survivors;
    for (auto k : kept) survivors.push_back(masks[k]);
    std::vector<std::size_t> all(survivors.size());
    std::iota(all.begin(), all.end(), 0);
    REQUIRE(dedup_masks(survivors) == all);
  }
}
