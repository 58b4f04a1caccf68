// SPDX-License-Identifier: Apache-2.0

#include "vrt/reward.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "vrt/assignment.hpp"
#include "vrt/metrics.hpp"

namespace vrt {

std::string_view to_string(RewardScope scope) {
  return scope == RewardScope::joint ? "joint" : "answer_only";
}

std::optional<RewardScope> parse_reward_scope(std::string_view s) {
  if (s == "answer_only") return RewardScope::answer_only;
  if (s == "joint") return RewardScope::joint;
  return std::nullopt;
}

int format_reward_thinking(const ParsedOutput& parsed) {
  return parsed.format_compliant ? 1 : 0;
}

int format_reward_seg(const ParsedOutput& parsed) {
  return parsed.answer_masks.empty() ? 0 : 1;
}

IouReward matching_iou_reward(std::span<const BinaryMask> pred,
                              std::span<const BinaryMask> gt, double lambda) {
  const auto assignment = greedy_match(iou_matrix(pred, gt, EvalMode::mask));
  std::vector<double> ious;
  for (const auto& p : assignment.pairs) ious.push_back(p.weight);
  // Sorted so the sum does not depend on mask order.
  std::sort(ious.begin(), ious.end());

  IouReward r;
  r.matched = ious.size();
  r.unmatched = (pred.size() - r.matched) + (gt.size() - r.matched);
  const double mean =
      ious.empty() ? 0.0
                   : std::accumulate(ious.begin(), ious.end(), 0.0) / double(ious.size());
  r.value = mean - lambda * double(r.unmatched);
  return r;
}

std::vector<BinaryMask> reward_ground_truth(const Sample& gt, RewardScope scope) {
  std::vector<BinaryMask> out;
  std::set<int> seen;
  if (scope == RewardScope::joint) {
    for (const auto& t : gt.trace) {
      if (seen.insert(t.obj).second) out.push_back(t.mask);
    }
  }
  for (const auto& o : gt.answer.objects) {
    if (seen.insert(o.obj).second) out.push_back(o.mask);
  }
  return out;
}

RewardBreakdown total_reward(const ParsedOutput& parsed, const Sample& gt,
                             const RewardConfig& config) {
  std::vector<BinaryMask> pred = parsed.answer_masks;
  if (config.scope == RewardScope::joint) {
    pred.insert(pred.begin(), parsed.trace_masks.begin(), parsed.trace_masks.end());
  }
  const auto gt_masks = reward_ground_truth(gt, config.scope);
  const auto iou = matching_iou_reward(pred, gt_masks, config.lambda);

  RewardBreakdown r;
  r.format_think = format_reward_thinking(parsed);
  r.format_seg = format_reward_seg(parsed);
  r.iou_reward = iou.value;
  r.matched_count = iou.matched;
  r.unmatched_count = iou.unmatched;
  r.total = double(r.format_think) + double(r.format_seg) + r.iou_reward;
  return r;
}

nlohmann::ordered_json to_json(const RewardBreakdown& r) {
  return {{"format_think", r.format_think},   {"format_seg", r.format_seg},
          {"iou_reward", r.iou_reward},       {"total", r.total},
          {"matched_count", r.matched_count}, {"unmatched_count", r.unmatched_count}};
}

double population_stddev(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double n = double(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / n);
}

std::vector<std::string> reward_variance_filter(std::span<const GroupRewards> groups,
                                                std::size_t k) {
  if (groups.empty() || k == 0) return {};
  const auto n = groups.front().rewards.size();
  if (n < 2) throw std::invalid_argument("reward groups need at least 2 candidates");
  struct Ranked {
    double spread;
    const std::string* id;
  };
  std::vector<Ranked> ranked;
  for (const auto& g : groups) {
    if (g.rewards.size() != n) {
      throw std::invalid_argument("group '" + g.id + "' has " +
                                  std::to_string(g.rewards.size()) +
                                  " rewards, expected " + std::to_string(n));
    }
    ranked.push_back({population_stddev(g.rewards), &g.id});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.spread != b.spread) return a.spread > b.spread;
    return *a.id < *b.id;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) out.push_back(*ranked[i].id);
  return out;
}

}  // namespace vrt
