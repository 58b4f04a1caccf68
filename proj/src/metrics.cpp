// SPDX-License-Identifier: Apache-2.0

#include "vrt/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "vrt/error.hpp"

namespace vrt {

std::string_view to_string(EvalMode mode) {
  return mode == EvalMode::box ? "box" : "mask";
}

std::string_view to_string(LqAggregation agg) {
  return agg == LqAggregation::micro ? "micro" : "macro";
}

std::optional<EvalMode> parse_eval_mode(std::string_view s) {
  if (s == "mask") return EvalMode::mask;
  if (s == "box") return EvalMode::box;
  return std::nullopt;
}

std::optional<LqAggregation> parse_lq_aggregation(std::string_view s) {
  if (s == "macro") return LqAggregation::macro;
  if (s == "micro") return LqAggregation::micro;
  return std::nullopt;
}

WeightMatrix iou_matrix(std::span<const BinaryMask> pred,
                        std::span<const BinaryMask> gt, EvalMode mode) {
  std::vector<double> w(pred.size() * gt.size(), 0.0);
  if (mode == EvalMode::mask) {
    for (std::size_t i = 0; i < pred.size(); ++i) {
      for (std::size_t j = 0; j < gt.size(); ++j) {
        w[i * gt.size() + j] = iou(pred[i], gt[j]).value;
      }
    }
    return WeightMatrix(pred.size(), gt.size(), std::move(w));
  }

  auto boxes_of = [](std::span<const BinaryMask> masks) {
    std::vector<std::optional<Box>> out;
    for (const auto& m : masks) {
      out.push_back(m.empty() ? std::nullopt : std::optional(tight_box(m)));
    }
    return out;
  };
  if (!pred.empty() && !gt.empty()) {
    for (const auto& p : pred) {
      if (p.height() != gt[0].height() || p.width() != gt[0].width()) {
        throw ShapeError("prediction mask shape differs from ground truth");
      }
    }
  }
  const auto pb = boxes_of(pred);
  const auto gb = boxes_of(gt);
  for (std::size_t i = 0; i < pb.size(); ++i) {
    for (std::size_t j = 0; j < gb.size(); ++j) {
      if (pb[i] && gb[j]) w[i * gt.size() + j] = box_iou(*pb[i], *gb[j]);
    }
  }
  return WeightMatrix(pred.size(), gt.size(), std::move(w));
}

namespace {

std::vector<BinaryMask> trace_masks_of(const Sample& s) {
  std::vector<BinaryMask> out;
  out.reserve(s.trace.size());
  for (const auto& t : s.trace) out.push_back(t.mask);
  return out;
}

std::vector<BinaryMask> answer_masks_of(const Sample& s) {
  std::vector<BinaryMask> out;
  out.reserve(s.answer.objects.size());
  for (const auto& o : s.answer.objects) out.push_back(o.mask);
  return out;
}

void check_image_shape(std::span<const BinaryMask> masks, const Sample& gt) {
  for (const auto& m : masks) {
    if (m.height() != gt.image.height || m.width() != gt.image.width) {
      throw ShapeError("prediction mask " + std::to_string(m.height()) + "x" +
                       std::to_string(m.width()) + " does not match image " +
                       std::to_string(gt.image.height) + "x" +
                       std::to_string(gt.image.width));
    }
  }
}

double sorted_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0);
}

}  // namespace

MatchResult trace_match(const ParsedOutput& pred, const Sample& gt, double tau,
                        EvalMode mode) {
  check_image_shape(pred.trace_masks, gt);
  const auto gt_masks = trace_masks_of(gt);
  return apply_threshold(hungarian_match(iou_matrix(pred.trace_masks, gt_masks, mode)),
                         tau);
}

double logic_quality(const MatchResult& match, std::size_t gt_count) {
  if (gt_count == 0) {
    throw std::invalid_argument("logic_quality needs at least one gt object");
  }
  return double(match.matched.size()) / double(gt_count);
}

double visual_quality(std::span<const double> matched_ious) {
  if (matched_ious.empty()) return 0.0;
  return sorted_sum({matched_ious.begin(), matched_ious.end()}) /
         double(matched_ious.size());
}

AnswerScore answer_score(std::span<const BinaryMask> pred,
                         std::span<const BinaryMask> gt, EvalMode mode) {
  if (gt.empty()) throw std::invalid_argument("answer_score needs gt objects");
  if (pred.empty()) return {0.0, true};
  const auto assignment = hungarian_match(iou_matrix(pred, gt, mode));
  std::vector<double> ious;
  for (const auto& p : assignment.pairs) ious.push_back(p.weight);
  return {sorted_sum(std::move(ious)) / double(gt.size()), false};
}

SampleScore degenerate_score(const Sample& gt) {
  SampleScore s;
  s.id = gt.id;
  s.gt_count = gt.trace.size();
  s.categories = gt.categories;
  s.degenerate = true;
  s.answer_empty = true;
  return s;
}

SampleScore score_sample(const Sample& gt, const ParsedOutput& pred, double tau,
                         EvalMode mode) {
  check_image_shape(pred.answer_masks, gt);
  const auto match = trace_match(pred, gt, tau, mode);

  SampleScore s;
  s.id = gt.id;
  s.gt_count = gt.trace.size();
  s.categories = gt.categories;
  s.matched_count = match.matched.size();
  for (const auto& p : match.matched) s.matched_ious.push_back(p.weight);
  std::sort(s.matched_ious.begin(), s.matched_ious.end());
  s.lq = logic_quality(match, s.gt_count);

  const auto gt_answer = answer_masks_of(gt);
  const auto a = answer_score(pred.answer_masks, gt_answer, mode);
  s.answer_iou = a.value;
  s.answer_empty = a.empty_prediction;
  return s;
}

namespace {

// Sums are accumulated over ascending-sorted values so the cell does not
// depend on sample order.
ReportCell reduce(const std::vector<const SampleScore*>& members, LqAggregation lq) {
  ReportCell cell;
  cell.samples = members.size();
  if (members.empty()) return cell;

  std::vector<double> lqs, ious, answers;
  std::size_t matched = 0, gt = 0;
  for (const auto* s : members) {
    lqs.push_back(s->lq);
    answers.push_back(s->answer_iou);
    ious.insert(ious.end(), s->matched_ious.begin(), s->matched_ious.end());
    matched += s->matched_count;
    gt += s->gt_count;
  }
  const double n = double(members.size());
  cell.r_lq = 100.0 * (lq == LqAggregation::macro
                           ? sorted_sum(lqs) / n
                           : (gt == 0 ? 0.0 : double(matched) / double(gt)));
  cell.r_vq = 100.0 * visual_quality(ious);
  cell.a = 100.0 * sorted_sum(answers) / n;
  cell.matched_traces = ious.size();
  return cell;
}

}  // namespace

MetricsReport aggregate(std::span<const SampleScore> scores, double tau,
                        EvalMode mode, LqAggregation lq) {
  if (scores.empty()) throw Error("no sample scores to aggregate");
  MetricsReport report;
  report.tau = tau;
  report.mode = mode;
  report.lq_aggregation = lq;

  std::vector<const SampleScore*> all;
  for (const auto& s : scores) {
    if (s.categories.empty()) {
      throw std::invalid_argument("sample '" + s.id + "' has no category");
    }
    all.push_back(&s);
  }
  for (auto c : kCategories) {
    std::vector<const SampleScore*> members;
    for (const auto* s : all) {
      if (s->categories.contains(c)) members.push_back(s);
    }
    report.categories[static_cast<std::size_t>(c)] = reduce(members, lq);
  }
  report.overall = reduce(all, lq);
  return report;
}

}  // namespace vrt
