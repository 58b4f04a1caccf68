// SPDX-License-Identifier: Apache-2.0

#include "vrt/mask.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "vrt/error.hpp"

namespace vrt {
namespace {

void check_dims(int height, int width) {
  if (height < 1 || width < 1) {
    throw ShapeError("mask dimensions must be positive, got " +
                     std::to_string(height) + "x" + std::to_string(width));
  }
  if (std::uint64_t(height) * std::uint64_t(width) >
      std::numeric_limits<std::uint32_t>::max()) {
    throw ShapeError("mask too large: " + std::to_string(height) + "x" +
                     std::to_string(width));
  }
}

void check_same_shape(const BinaryMask& a, const BinaryMask& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ShapeError("mask shape mismatch: " + std::to_string(a.height()) +
                     "x" + std::to_string(a.width()) + " vs " +
                     std::to_string(b.height()) + "x" +
                     std::to_string(b.width()));
  }
}

// Accumulates (value, length) pieces into canonical runs.
class RunBuilder {
 public:
  void push(bool value, std::uint64_t length) {
    if (length == 0) return;
    if (runs_.empty()) {
      if (value) runs_.push_back(0);
      runs_.push_back(static_cast<std::uint32_t>(length));
    } else if (value == current_) {
      runs_.back() += static_cast<std::uint32_t>(length);
    } else {
      runs_.push_back(static_cast<std::uint32_t>(length));
    }
    current_ = value;
  }

  std::vector<std::uint32_t> finish(std::uint64_t total) && {
    if (runs_.empty()) runs_.push_back(static_cast<std::uint32_t>(total));
    return std::move(runs_);
  }

 private:
  std::vector<std::uint32_t> runs_;
  bool current_ = false;
};

// Walks a run vector one run at a time, skipping zero-length runs.
class RunCursor {
 public:
  explicit RunCursor(std::span<const std::uint32_t> runs) : runs_(runs) {
    if (!runs_.empty()) remaining_ = runs_[0];
    skip_empty();
  }

  bool done() const { return index_ >= runs_.size(); }
  bool value() const { return index_ % 2 == 1; }
  std::uint64_t remaining() const { return remaining_; }

  void advance(std::uint64_t n) {
    remaining_ -= n;
    skip_empty();
  }

 private:
  void skip_empty() {
    while (remaining_ == 0 && index_ < runs_.size()) {
      if (++index_ < runs_.size()) remaining_ = runs_[index_];
    }
  }

  std::span<const std::uint32_t> runs_;
  std::size_t index_ = 0;
  std::uint64_t remaining_ = 0;
};

}  // namespace

BinaryMask::BinaryMask(int height, int width) : height_(height), width_(width) {
  check_dims(height, width);
  runs_.push_back(static_cast<std::uint32_t>(std::uint64_t(height) * width));
}

BinaryMask::BinaryMask(int height, int width, std::vector<std::uint32_t> runs)
    : height_(height), width_(width), runs_(std::move(runs)) {
  for (std::size_t i = 1; i < runs_.size(); i += 2) area_ += runs_[i];
}

BinaryMask BinaryMask::from_dense(int height, int width,
                                  std::span<const std::uint8_t> pixels) {
  check_dims(height, width);
  const auto total = std::uint64_t(height) * width;
  if (pixels.size() != total) {
    throw ShapeError("dense buffer holds " + std::to_string(pixels.size()) +
                     " pixels, expected " + std::to_string(total));
  }
  RunBuilder builder;
  for (int c = 0; c < width; ++c) {
    for (int r = 0; r < height; ++r) {
      builder.push(pixels[std::size_t(r) * width + c] != 0, 1);
    }
  }
  return BinaryMask(height, width, std::move(builder).finish(total));
}

BinaryMask BinaryMask::from_box(int height, int width, const Box& box) {
  check_dims(height, width);
  if (box.row_min < 0 || box.col_min < 0 || box.row_max >= height ||
      box.col_max >= width || box.row_min > box.row_max ||
      box.col_min > box.col_max) {
    throw ShapeError("box outside a " + std::to_string(height) + "x" +
                     std::to_string(width) + " image");
  }
  RunBuilder builder;
  const int box_rows = box.row_max - box.row_min + 1;
  builder.push(false, std::uint64_t(box.col_min) * height);
  for (int c = box.col_min; c <= box.col_max; ++c) {
    builder.push(false, box.row_min);
    builder.push(true, box_rows);
    builder.push(false, height - 1 - box.row_max);
  }
  builder.push(false, std::uint64_t(width - 1 - box.col_max) * height);
  return BinaryMask(height, width,
                    std::move(builder).finish(std::uint64_t(height) * width));
}

bool BinaryMask::at(int row, int col) const {
  if (row < 0 || row >= height_ || col < 0 || col >= width_) {
    throw std::out_of_range("pixel (" + std::to_string(row) + "," +
                            std::to_string(col) + ") outside mask");
  }
  const std::uint64_t target = std::uint64_t(col) * height_ + row;
  std::uint64_t start = 0;
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    start += runs_[i];
    if (target < start) return i % 2 == 1;
  }
  return false;
}

std::vector<std::uint8_t> BinaryMask::to_dense() const {
  std::vector<std::uint8_t> out(std::size_t(height_) * width_, 0);
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    if (i % 2 == 1) {
      for (std::uint64_t p = pos; p < pos + runs_[i]; ++p) {
        const auto r = p % height_;
        const auto c = p / height_;
        out[r * width_ + c] = 1;
      }
    }
    pos += runs_[i];
  }
  return out;
}

BinaryMask decode_rle(const RleCounts& rle) {
  check_dims(rle.height, rle.width);
  const auto total = std::uint64_t(rle.height) * rle.width;
  const auto sum = std::accumulate(rle.counts.begin(), rle.counts.end(),
                                   std::uint64_t{0});
  if (sum != total) {
    throw RleError("run lengths sum to " + std::to_string(sum) +
                   ", expected " + std::to_string(rle.height) + "*" +
                   std::to_string(rle.width) + "=" + std::to_string(total));
  }
  RunBuilder builder;
  for (std::size_t i = 0; i < rle.counts.size(); ++i) {
    builder.push(i % 2 == 1, rle.counts[i]);
  }
  return BinaryMask(rle.height, rle.width, std::move(builder).finish(total));
}

RleCounts encode_rle(const BinaryMask& mask) {
  return RleCounts{mask.height(), mask.width(),
                   std::vector<std::uint32_t>(mask.runs().begin(),
                                              mask.runs().end())};
}

std::uint64_t intersection_area(const BinaryMask& a, const BinaryMask& b) {
  check_same_shape(a, b);
  if (a.empty() || b.empty()) return 0;
  RunCursor ca(a.runs());
  RunCursor cb(b.runs());
  std::uint64_t inter = 0;
  while (!ca.done() && !cb.done()) {
    const auto step = std::min(ca.remaining(), cb.remaining());
    if (ca.value() && cb.value()) inter += step;
    ca.advance(step);
    cb.advance(step);
  }
  return inter;
}

IouResult iou(const BinaryMask& a, const BinaryMask& b) {
  const auto inter = intersection_area(a, b);
  const auto uni = a.area() + b.area() - inter;
  if (uni == 0) return {0.0, true};
  return {double(inter) / double(uni), false};
}

Box tight_box(const BinaryMask& mask) {
  if (mask.empty()) throw EmptyMaskError("tight_box of an empty mask");
  const int h = mask.height();
  Box box{h, mask.width(), -1, -1};
  std::uint64_t pos = 0;
  const auto runs = mask.runs();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (i % 2 == 1 && runs[i] > 0) {
      const auto first = pos;
      const auto last = pos + runs[i] - 1;
      const int c0 = int(first / h);
      const int c1 = int(last / h);
      box.col_min = std::min(box.col_min, c0);
      box.col_max = std::max(box.col_max, c1);
      if (c0 == c1) {
        box.row_min = std::min(box.row_min, int(first % h));
        box.row_max = std::max(box.row_max, int(last % h));
      } else {
        // A run that wraps a column touches both the last and first row.
        box.row_min = 0;
        box.row_max = h - 1;
      }
    }
    pos += runs[i];
  }
  return box;
}

double box_iou(const Box& a, const Box& b) {
  const std::int64_t rows =
      std::min(a.row_max, b.row_max) - std::max(a.row_min, b.row_min) + 1;
  const std::int64_t cols =
      std::min(a.col_max, b.col_max) - std::max(a.col_min, b.col_min) + 1;
  const std::int64_t inter = (rows > 0 && cols > 0) ? rows * cols : 0;
  const std::int64_t uni = a.area() + b.area() - inter;
  return uni > 0 ? double(inter) / double(uni) : 0.0;
}

std::vector<std::size_t> dedup_masks(std::span<const BinaryMask> masks,
                                     double threshold) {
  for (std::size_t i = 1; i < masks.size(); ++i) {
    check_same_shape(masks[0], masks[i]);
  }
  std::vector<std::size_t> order(masks.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) {
    return masks[x].area() > masks[y].area();
  });

  std::vector<std::size_t> kept;
  for (auto idx : order) {
    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](auto k) {
      return iou(masks[idx], masks[k]).value > threshold;
    });
    if (!duplicate) kept.push_back(idx);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace vrt
