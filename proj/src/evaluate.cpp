// SPDX-License-Identifier: Apache-2.0

#include "vrt/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "vrt/error.hpp"

namespace vrt {

void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

Evaluation evaluate_predictions(const Benchmark& bench,
                                const std::vector<Prediction>& predictions,
                                const RunConfig& config) {
  Evaluation result;
  std::unordered_map<std::string_view, const Prediction*> by_id;
  for (const auto& p : predictions) {
    by_id.emplace(p.id, &p);
    if (!bench.find(p.id)) result.diagnostics.unknown_ids.push_back(p.id);
  }
  if (config.strict_ids && !result.diagnostics.unknown_ids.empty()) {
    std::string list;
    for (const auto& id : result.diagnostics.unknown_ids) list += " '" + id + "'";
    throw LoadError("predictions reference ids not in the manifest:" + list);
  }

  const auto& samples = bench.samples();
  std::vector<SampleScore> scores(samples.size());
  std::vector<std::vector<std::string>> messages(samples.size());
  std::vector<char> missing(samples.size(), 0);

  parallel_for(samples.size(), config.jobs, [&](std::size_t i) {
    const Sample& sample = samples[i];
    auto it = by_id.find(sample.id);
    if (it == by_id.end()) {
      missing[i] = 1;
      scores[i] = degenerate_score(sample);
      return;
    }
    const Prediction& pred = *it->second;
    try {
      const auto parsed = parse_model_output(pred.raw_text, pred.masks);
      for (const auto& d : parsed.diagnostics) messages[i].push_back(d);
      scores[i] = score_sample(sample, parsed, config.tau, config.mode);
    } catch (const Error& e) {
      messages[i].push_back(std::string("scored as degenerate: ") + e.what());
      scores[i] = degenerate_score(sample);
    }
  });

  std::vector<SampleScore> kept;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (missing[i]) result.diagnostics.missing_ids.push_back(samples[i].id);
    for (const auto& m : messages[i]) {
      result.diagnostics.messages.push_back(samples[i].id + ": " + m);
    }
    if (!(missing[i] && config.skip_missing)) kept.push_back(std::move(scores[i]));
  }
  if (kept.empty()) throw Error("no samples left to evaluate");
  result.report = aggregate(kept, config.tau, config.mode, config.lq_aggregation);
  result.scores = std::move(kept);
  return result;
}

Evaluation evaluate_predictions(const std::filesystem::path& manifest,
                                const std::filesystem::path& predictions,
                                const RunConfig& config) {
  const auto bench = load_manifest(manifest);
  const auto preds = load_predictions(predictions);
  return evaluate_predictions(bench, preds, config);
}

}  // namespace vrt
