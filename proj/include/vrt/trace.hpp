#pragma once

// SPDX-License-Identifier: Apache-2.0

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vrt/mask.hpp"

namespace vrt {

// ---------------------------------------------------------------------------
// Categories
// ---------------------------------------------------------------------------

enum class Category : std::uint8_t { comp = 0, func = 1, loc = 2, visf = 3 };

inline constexpr std::array<Category, 4> kCategories = {
    Category::comp, Category::func, Category::loc, Category::visf};

std::string_view category_name(Category c);
std::optional<Category> parse_category(std::string_view name);

/// Reasoning-capability tags of a sample; a sample may carry several.
class CategorySet {
 public:
  CategorySet() = default;
  CategorySet(std::initializer_list<Category> cats) {
    for (auto c : cats) insert(c);
  }

  void insert(Category c) { bits_ |= bit(c); }
  bool contains(Category c) const { return (bits_ & bit(c)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const;

  friend bool operator==(CategorySet, CategorySet) = default;

 private:
  static std::uint8_t bit(Category c) {
    return std::uint8_t(1u << static_cast<unsigned>(c));
  }
  std::uint8_t bits_ = 0;
};

// ---------------------------------------------------------------------------
// Benchmark samples
// ---------------------------------------------------------------------------

struct ImageRef {
  int height = 0;
  int width = 0;
  std::string ref;
};

struct TraceObject {
  int obj = 0;
  std::string text;
  BinaryMask mask;
};

struct AnswerObject {
  int obj = 0;
  BinaryMask mask;
};

struct Answer {
  std::string text;
  std::vector<AnswerObject> objects;
};

struct Sample {
  std::string id;
  ImageRef image;
  std::string question;
  std::vector<TraceObject> trace;
  Answer answer;
  CategorySet categories;
};

/// Throws LoadError describing the first violated sample invariant.
void validate_sample(const Sample& sample);

/// Per-category sample counts; `multiple` counts samples with two or more
/// categories.
struct CategoryCounts {
  std::size_t total = 0;
  std::size_t comp = 0;
  std::size_t func = 0;
  std::size_t loc = 0;
  std::size_t visf = 0;
  std::size_t multiple = 0;

  std::size_t of(Category c) const;
  static CategoryCounts tally(const std::vector<Sample>& samples);

  friend bool operator==(const CategoryCounts&, const CategoryCounts&) =
      default;
};

/// Immutable after load; safe to share between evaluation workers.
class Benchmark {
 public:
  Benchmark(std::vector<Sample> samples, CategoryCounts declared);

  const std::vector<Sample>& samples() const { return samples_; }
  const CategoryCounts& declared_counts() const { return declared_; }
  const Sample* find(std::string_view id) const;

 private:
  std::vector<Sample> samples_;
  CategoryCounts declared_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Reads a JSONL manifest. The first record may be a header of the form
/// {"declared_counts": {"total", "comp", "func", "loc", "visf", "multiple"}};
/// when present the recomputed counts must match it exactly.
Benchmark load_manifest(const std::filesystem::path& path);
Benchmark load_manifest(std::istream& in, std::string_view source = "<stream>");

// ---------------------------------------------------------------------------
// Object tags: <ver><objN></ver> and <vea><objN></vea>
// ---------------------------------------------------------------------------

enum class TagKind { ver, vea };

struct ObjectTag {
  TagKind kind = TagKind::ver;
  int object = 0;
  std::size_t begin = 0;  ///< byte offset of the opening '<'
  std::size_t end = 0;    ///< one past the closing '>'

  friend bool operator==(const ObjectTag&, const ObjectTag&) = default;
};

struct TagSpanError {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string reason;
};

struct TagScan {
  std::vector<ObjectTag> tags;
  std::vector<TagSpanError> errors;
};

std::string serialize_tag(TagKind kind, int object);

/// Lenient scan that collects malformed spans instead of throwing.
TagScan scan_object_tags(std::string_view text);

/// Throws TagGrammarError listing every offending span.
std::vector<ObjectTag> parse_object_tags(std::string_view text);

// ---------------------------------------------------------------------------
// Model outputs
// ---------------------------------------------------------------------------

inline constexpr std::string_view kSegToken = "[SEG]";

struct ParsedOutput {
  std::string thinking;
  std::string answer;
  std::vector<BinaryMask> trace_masks;
  std::vector<BinaryMask> answer_masks;
  std::vector<ObjectTag> tags;

  std::size_t think_open_tags = 0;
  std::size_t think_close_tags = 0;
  std::size_t answer_open_tags = 0;
  std::size_t answer_close_tags = 0;
  /// Exactly one think region, closed, followed by exactly one closed
  /// answer region.
  bool format_compliant = false;

  /// [SEG] tokens (and their masks) that fell outside both regions.
  std::size_t stray_seg_tokens = 0;
  /// Non-whitespace text outside the two regions, kept for diagnostics.
  std::string outside_text;
  std::vector<std::string> diagnostics;
};

/// Splits `text` into its thinking and answering regions and binds the i-th
/// [SEG] token to masks[i]. Tag problems only clear `format_compliant`;
/// a token/mask count mismatch throws AlignmentError.
ParsedOutput parse_model_output(std::string_view text,
                                std::vector<BinaryMask> masks);

struct Prediction {
  std::string id;
  std::string raw_text;
  std::vector<BinaryMask> masks;
};

/// Reads a JSONL predictions file ({"id", "raw_text", "masks": [RLE...]}).
/// Duplicate ids are a LoadError.
std::vector<Prediction> load_predictions(const std::filesystem::path& path);
std::vector<Prediction> load_predictions(std::istream& in,
                                         std::string_view source = "<stream>");

}  // namespace vrt
