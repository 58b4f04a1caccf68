#pragma once

// SPDX-License-Identifier: Apache-2.0

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vrt {

/// Uncompressed run-length counts for an H x W binary image.
///
/// Runs alternate background/foreground in column-major scan order and the
/// first run always counts background pixels, so a mask that starts with a
/// foreground pixel has a leading 0.
struct RleCounts {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;

  friend bool operator==(const RleCounts&, const RleCounts&) = default;
};

/// Inclusive pixel rectangle.
struct Box {
  int row_min = 0;
  int col_min = 0;
  int row_max = 0;
  int col_max = 0;

  std::int64_t area() const {
    return std::int64_t{row_max - row_min + 1} * (col_max - col_min + 1);
  }

  friend bool operator==(const Box&, const Box&) = default;
};

/// A binary H x W mask stored as canonical column-major runs.
///
/// The canonical form has no zero-length run except an optional leading one
/// and no trailing zero run, so two masks with the same pixels always hold
/// identical run vectors.
class BinaryMask {
 public:
  /// Empty (all background) mask. Throws ShapeError unless both dims >= 1.
  BinaryMask(int height, int width);

  /// `pixels` is row-major, H*W entries, non-zero meaning foreground.
  static BinaryMask from_dense(int height, int width,
                               std::span<const std::uint8_t> pixels);
  static BinaryMask from_box(int height, int width, const Box& box);

  int height() const { return height_; }
  int width() const { return width_; }
  std::uint64_t area() const { return area_; }
  bool empty() const { return area_ == 0; }

  bool at(int row, int col) const;
  std::vector<std::uint8_t> to_dense() const;

  std::span<const std::uint32_t> runs() const { return runs_; }

  friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.runs_ == b.runs_;
  }

 private:
  friend BinaryMask decode_rle(const RleCounts& rle);

  BinaryMask(int height, int width, std::vector<std::uint32_t> runs);

  int height_;
  int width_;
  std::vector<std::uint32_t> runs_;
  std::uint64_t area_ = 0;
};

/// Throws RleError when the runs do not sum to height*width. Interior
/// zero-length runs are accepted and merged away.
BinaryMask decode_rle(const RleCounts& rle);
RleCounts encode_rle(const BinaryMask& mask);

struct IouResult {
  double value = 0.0;
  /// Both masks empty; value is 0 so such pairs never match.
  bool degenerate = false;
};

std::uint64_t intersection_area(const BinaryMask& a, const BinaryMask& b);
IouResult iou(const BinaryMask& a, const BinaryMask& b);

/// Minimal axis-aligned box around the foreground. Throws EmptyMaskError.
Box tight_box(const BinaryMask& mask);
double box_iou(const Box& a, const Box& b);

/// Removes near-duplicates: masks are visited largest first (lower index on
/// equal area) and dropped when their IoU with an already kept mask exceeds
/// `threshold`. Returns kept indices in ascending order.
std::vector<std::size_t> dedup_masks(std::span<const BinaryMask> masks,
                                     double threshold = 0.5);

}  // namespace vrt
