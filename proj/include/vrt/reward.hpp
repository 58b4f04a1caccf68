#pragma once

// SPDX-License-Identifier: Apache-2.0

// Rewards for reinforcement fine-tuning:
//
//   total = format_think + format_seg + iou_reward
//   iou_reward = mean(IoU over greedily matched pairs) - lambda * |unmatched|
//
// where |unmatched| counts unmatched predictions and unmatched ground truth
// alike. All functions are pure and reentrant.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vrt/mask.hpp"
#include "vrt/trace.hpp"

namespace vrt {

inline constexpr double kDefaultLambda = 0.1;

/// Which ground-truth objects the IoU reward is measured against.
/// answer_only: predicted answer masks vs. gt answer objects.
/// joint: all predicted masks vs. gt trace and answer objects (unique ids).
enum class RewardScope { answer_only, joint };

std::string_view to_string(RewardScope scope);
std::optional<RewardScope> parse_reward_scope(std::string_view s);

struct RewardConfig {
  double lambda = kDefaultLambda;
  RewardScope scope = RewardScope::answer_only;
};

int format_reward_thinking(const ParsedOutput& parsed);
int format_reward_seg(const ParsedOutput& parsed);

struct IouReward {
  double value = 0.0;
  std::size_t matched = 0;
  std::size_t unmatched = 0;
};

IouReward matching_iou_reward(std::span<const BinaryMask> pred,
                              std::span<const BinaryMask> gt,
                              double lambda = kDefaultLambda);

struct RewardBreakdown {
  int format_think = 0;
  int format_seg = 0;
  double iou_reward = 0.0;
  double total = 0.0;
  std::size_t matched_count = 0;
  std::size_t unmatched_count = 0;
};

std::vector<BinaryMask> reward_ground_truth(const Sample& gt, RewardScope scope);

RewardBreakdown total_reward(const ParsedOutput& parsed, const Sample& gt,
                             const RewardConfig& config = {});

nlohmann::ordered_json to_json(const RewardBreakdown& r);

/// Rewards of the N candidates sampled for one training prompt.
struct GroupRewards {
  std::string id;
  std::vector<double> rewards;
};

/// Population (divide-by-N) standard deviation.
double population_stddev(std::span<const double> values);

/// Ids of the k groups whose rewards spread the most, largest first, ties by
/// ascending id. Throws std::invalid_argument unless every group has the
/// same N >= 2.
std::vector<std::string> reward_variance_filter(std::span<const GroupRewards> groups,
                                                std::size_t k);

}  // namespace vrt
