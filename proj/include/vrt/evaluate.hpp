#pragma once

// SPDX-License-Identifier: Apache-2.0

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "vrt/metrics.hpp"
#include "vrt/report.hpp"
#include "vrt/reward.hpp"
#include "vrt/trace.hpp"

namespace vrt {

struct RunConfig {
  double tau = 0.5;
  EvalMode mode = EvalMode::mask;
  double lambda = kDefaultLambda;
  LqAggregation lq_aggregation = LqAggregation::macro;
  RewardScope reward_scope = RewardScope::answer_only;
  std::size_t jobs = 1;
  ReportFormat format = ReportFormat::table;
  /// Leave samples without a prediction out of the report instead of
  /// scoring them as degenerate.
  bool skip_missing = false;
  /// Prediction ids absent from the manifest are an error (otherwise only a
  /// diagnostic).
  bool strict_ids = true;
};

/// Run metadata kept apart from the report payload.
struct Diagnostics {
  std::vector<std::string> missing_ids;
  std::vector<std::string> unknown_ids;
  /// "id: message" lines in manifest order.
  std::vector<std::string> messages;
};

struct Evaluation {
  MetricsReport report;
  std::vector<SampleScore> scores;  ///< manifest order
  Diagnostics diagnostics;
};

/// Scores every manifest sample against its prediction. The result does not
/// depend on `config.jobs`. Unknown prediction ids throw LoadError when
/// `config.strict_ids` is set.
Evaluation evaluate_predictions(const Benchmark& bench,
                                const std::vector<Prediction>& predictions,
                                const RunConfig& config);

Evaluation evaluate_predictions(const std::filesystem::path& manifest,
                                const std::filesystem::path& predictions,
                                const RunConfig& config);

/// Runs `fn(i)` for i in [0, count) on up to `jobs` threads.
void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn);

}  // namespace vrt
