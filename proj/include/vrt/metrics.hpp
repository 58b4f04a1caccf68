#pragma once

// SPDX-License-Identifier: Apache-2.0

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vrt/assignment.hpp"
#include "vrt/mask.hpp"
#include "vrt/trace.hpp"

namespace vrt {

/// mask: pixel IoU. box: both sides are reduced to their tight boxes first.
enum class EvalMode { mask, box };
enum class LqAggregation { macro, micro };

std::string_view to_string(EvalMode mode);
std::string_view to_string(LqAggregation agg);
std::optional<EvalMode> parse_eval_mode(std::string_view s);
std::optional<LqAggregation> parse_lq_aggregation(std::string_view s);

/// Pairwise IoU (or tight-box IoU) between predictions (rows) and ground
/// truth (columns). Empty masks score 0 against everything.
WeightMatrix iou_matrix(std::span<const BinaryMask> pred,
                        std::span<const BinaryMask> gt,
                        EvalMode mode = EvalMode::mask);

/// Optimal trace pairing of the masks in the thinking region against the
/// ground-truth trace, keeping pairs with IoU > tau.
MatchResult trace_match(const ParsedOutput& pred, const Sample& gt, double tau,
                        EvalMode mode = EvalMode::mask);

/// Fraction of ground-truth trace objects recovered.
double logic_quality(const MatchResult& match, std::size_t gt_count);

/// Mean of the matched IoUs; 0 for an empty list.
double visual_quality(std::span<const double> matched_ious);

struct AnswerScore {
  double value = 0.0;
  bool empty_prediction = false;
};

/// Mean IoU over ground-truth answer objects after optimal (unthresholded)
/// pairing; unpaired ground truth contributes 0.
AnswerScore answer_score(std::span<const BinaryMask> pred,
                         std::span<const BinaryMask> gt,
                         EvalMode mode = EvalMode::mask);

struct SampleScore {
  std::string id;
  std::size_t matched_count = 0;
  std::size_t gt_count = 0;
  /// Ascending, so sums are independent of prediction order.
  std::vector<double> matched_ious;
  double lq = 0.0;
  double answer_iou = 0.0;
  CategorySet categories;
  /// No usable prediction (missing, unparsable or misaligned).
  bool degenerate = false;
  bool answer_empty = false;
};

SampleScore score_sample(const Sample& gt, const ParsedOutput& pred, double tau,
                         EvalMode mode = EvalMode::mask);
SampleScore degenerate_score(const Sample& gt);

/// Scores for one category column group, as unrounded percentages.
struct ReportCell {
  double r_lq = 0.0;
  double r_vq = 0.0;
  double a = 0.0;
  std::size_t samples = 0;
  std::size_t matched_traces = 0;
};

struct MetricsReport {
  std::array<ReportCell, 4> categories{};  ///< indexed by Category
  ReportCell overall;
  double tau = 0.5;
  EvalMode mode = EvalMode::mask;
  LqAggregation lq_aggregation = LqAggregation::macro;

  const ReportCell& cell(Category c) const {
    return categories[static_cast<std::size_t>(c)];
  }
};

/// Builds the category x {R-LQ, R-VQ, A} report. R-VQ pools matched IoUs
/// across samples; R-LQ is per-sample mean (macro) or pooled counts (micro).
/// Throws vrt::Error on empty input.
MetricsReport aggregate(std::span<const SampleScore> scores, double tau,
                        EvalMode mode = EvalMode::mask,
                        LqAggregation lq = LqAggregation::macro);

}  // namespace vrt
