// SPDX-License-Identifier: Apache-2.0

// vrt-eval: batch evaluation, validation and offline reward computation for
// object-grounded reasoning traces.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "vrt/error.hpp"
#include "vrt/evaluate.hpp"
#include "vrt/io.hpp"
#include "vrt/report.hpp"
#include "vrt/reward.hpp"
#include "vrt/trace.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string manifest;
  std::string predictions;
  std::string requests;
  std::string input;
  std::string out;
  std::string diagnostics;
  double tau = 0.5;
  double lambda = vrt::kDefaultLambda;
  std::string mode = "mask";
  std::string lq_agg = "macro";
  std::string reward_scope = "answer_only";
  std::string format = "table";
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  std::size_t select_top = 0;
  bool skip_missing = false;
  bool strict_ids = true;
};

void write_output(const std::string& path, const std::string& payload) {
  if (path.empty() || path == "-") {
    std::cout << payload << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw vrt::Error("cannot write '" + path + "'");
  out << payload;
}

vrt::RunConfig run_config(const Options& o) {
  vrt::RunConfig c;
  if (!(o.tau >= 0.0 && o.tau < 1.0)) throw UsageError("--tau must lie in [0,1)");
  c.tau = o.tau;
  c.lambda = o.lambda;
  c.mode = *vrt::parse_eval_mode(o.mode);
  c.lq_aggregation = *vrt::parse_lq_aggregation(o.lq_agg);
  c.reward_scope = *vrt::parse_reward_scope(o.reward_scope);
  c.jobs = std::max<std::size_t>(1, o.jobs);
  auto fmt = vrt::parse_report_format(o.format);
  if (!fmt) throw UsageError("unknown format '" + o.format + "'");
  c.format = *fmt;
  c.skip_missing = o.skip_missing;
  c.strict_ids = o.strict_ids;
  return c;
}

int cmd_evaluate(const Options& o) {
  const auto config = run_config(o);
  const auto eval = vrt::evaluate_predictions(o.manifest, o.predictions, config);
  write_output(o.out, vrt::emit_report(eval.report, config.format));

  const auto& d = eval.diagnostics;
  if (!o.diagnostics.empty()) {
    nlohmann::ordered_json j{{"missing_ids", d.missing_ids},
                             {"unknown_ids", d.unknown_ids},
                             {"messages", d.messages}};
    write_output(o.diagnostics, j.dump(2) + "\n");
  } else {
    if (!d.missing_ids.empty()) {
      std::cerr << d.missing_ids.size() << " sample(s) without prediction"
                << (config.skip_missing ? " skipped\n" : " scored as degenerate\n");
    }
    if (!d.unknown_ids.empty()) {
      std::cerr << d.unknown_ids.size() << " prediction(s) with unknown id ignored\n";
    }
    for (const auto& m : d.messages) std::cerr << m << '\n';
  }
  return 0;
}

int cmd_validate(const Options& o) {
  const auto bench = vrt::load_manifest(o.manifest);
  const auto& c = bench.declared_counts();
  std::cout << "ok: " << c.total << " samples (comp " << c.comp << ", func " << c.func
            << ", loc " << c.loc << ", visf " << c.visf << ", multiple " << c.multiple
            << ")\n";
  return 0;
}

vrt::Sample resolve_gt(const nlohmann::json& record, const vrt::Benchmark* bench) {
  auto lookup = [&](const std::string& id) -> vrt::Sample {
    if (!bench) throw vrt::LoadError("gt reference '" + id + "' needs --manifest");
    const auto* s = bench->find(id);
    if (!s) throw vrt::LoadError("gt reference '" + id + "' not in manifest");
    return *s;
  };
  if (!record.contains("gt")) return lookup(record.at("id").get<std::string>());
  const auto& gt = record.at("gt");
  if (gt.is_string()) return lookup(gt.get<std::string>());
  if (gt.is_object() && !gt.contains("trace")) {
    return lookup(gt.contains("ref") ? gt.at("ref").get<std::string>()
                                     : gt.at("id").get<std::string>());
  }
  auto sample = vrt::sample_from_json(gt);
  vrt::validate_sample(sample);
  return sample;
}

int cmd_reward(const Options& o) {
  vrt::RewardConfig config;
  config.lambda = o.lambda;
  config.scope = *vrt::parse_reward_scope(o.reward_scope);

  std::optional<vrt::Benchmark> bench;
  if (!o.manifest.empty()) bench = vrt::load_manifest(o.manifest);

  std::ifstream in(o.requests);
  if (!in) throw vrt::LoadError("cannot open '" + o.requests + "'");

  std::ostringstream out;
  std::vector<vrt::GroupRewards> groups;
  std::map<std::string, std::size_t> group_index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = o.requests + ":" + std::to_string(line_no) + ": ";
    try {
      const auto record = nlohmann::json::parse(line);
      const auto pred = vrt::prediction_from_json(record);
      const auto gt = resolve_gt(record, bench ? &*bench : nullptr);
      const auto parsed = vrt::parse_model_output(pred.raw_text, pred.masks);
      const auto r = vrt::total_reward(parsed, gt, config);

      nlohmann::ordered_json row{{"id", pred.id}};
      const auto fields = vrt::to_json(r);
      for (const auto& [k, v] : fields.items()) row[k] = v;
      out << row.dump() << '\n';

      auto [it, inserted] = group_index.emplace(pred.id, groups.size());
      if (inserted) groups.push_back({pred.id, {}});
      groups[it->second].rewards.push_back(r.total);
    } catch (const nlohmann::json::exception& e) {
      throw vrt::LoadError(where + e.what());
    } catch (const vrt::Error& e) {
      throw vrt::LoadError(where + e.what());
    }
  }

  if (o.select_top > 0) {
    std::string ids;
    for (const auto& id : vrt::reward_variance_filter(groups, o.select_top)) ids += id + "\n";
    write_output(o.out, ids);
  } else {
    write_output(o.out, out.str());
  }
  return 0;
}

int cmd_report(const Options& o) {
  std::ifstream in(o.input);
  if (!in) throw vrt::LoadError("cannot open '" + o.input + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw vrt::LoadError(o.input + ": " + e.what());
  }
  const auto fmt = vrt::parse_report_format(o.format);
  if (!fmt) throw UsageError("unknown format '" + o.format + "'");
  write_output(o.out, vrt::emit_report(vrt::report_from_json(j), *fmt));
  return 0;
}

vrt::BinaryMask boxed(const vrt::BinaryMask& m) {
  if (m.empty()) return m;
  return vrt::BinaryMask::from_box(m.height(), m.width(), vrt::tight_box(m));
}

int cmd_convert_box(const Options& o) {
  std::ostringstream out;
  if (!o.manifest.empty()) {
    const auto bench = vrt::load_manifest(o.manifest);
    out << nlohmann::json{{"declared_counts", vrt::counts_to_json(bench.declared_counts())}}
               .dump()
        << '\n';
    for (auto s : bench.samples()) {
      for (auto& t : s.trace) t.mask = boxed(t.mask);
      for (auto& a : s.answer.objects) a.mask = boxed(a.mask);
      out << vrt::sample_to_json(s).dump() << '\n';
    }
  } else {
    for (auto p : vrt::load_predictions(o.predictions)) {
      for (auto& m : p.masks) m = boxed(m);
      out << vrt::prediction_to_json(p).dump() << '\n';
    }
  }
  write_output(o.out, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluate and reward object-grounded reasoning traces"};
  app.set_config("--config", "", "TOML/INI file with option defaults (flags win)");
  app.require_subcommand(1);

  Options o;
  if (const char* env = std::getenv("VRT_EVAL_JOBS")) {
    try {
      o.jobs = std::stoul(env);
    } catch (const std::exception&) {
      std::cerr << "VRT_EVAL_JOBS must be a positive integer\n";
      return kExitUsage;
    }
  }

  const auto modes = CLI::IsMember({"mask", "box"});
  const auto aggs = CLI::IsMember({"macro", "micro"});
  const auto scopes = CLI::IsMember({"answer_only", "joint"});

  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against a manifest");
  evaluate->add_option("--manifest", o.manifest, "Benchmark manifest (JSONL)")->required();
  evaluate->add_option("--predictions", o.predictions, "Predictions (JSONL)")->required();
  evaluate->add_option("--tau", o.tau, "Trace match IoU threshold (strict >)")
      ->capture_default_str();
  evaluate->add_option("--mode", o.mode, "mask or box")->check(modes)->capture_default_str();
  evaluate->add_option("--lq-agg", o.lq_agg, "macro or micro")->check(aggs)->capture_default_str();
  evaluate->add_option("--jobs", o.jobs, "Worker threads (default: $VRT_EVAL_JOBS or all cores)");
  evaluate->add_option("--format", o.format, "csv, table or json")->capture_default_str();
  evaluate->add_option("--out", o.out, "Report path (default stdout)");
  evaluate->add_option("--diagnostics", o.diagnostics, "Write run diagnostics JSON here");
  evaluate->add_flag("--skip-missing", o.skip_missing, "Leave unpredicted samples out");
  evaluate->add_flag("--strict-ids,!--no-strict-ids", o.strict_ids,
                     "Fail on prediction ids missing from the manifest");
  // Accepted for config-file symmetry; unused by evaluate.
  evaluate->add_option("--lambda", o.lambda, "Unmatched penalty (reward only)");
  evaluate->add_option("--reward-scope", o.reward_scope)->check(scopes);

  auto* validate = app.add_subcommand("validate", "Check a manifest's invariants and counts");
  validate->add_option("--manifest", o.manifest, "Benchmark manifest (JSONL)")->required();

  auto* reward = app.add_subcommand("reward", "Compute rewards for request records");
  reward->add_option("--requests", o.requests,
                     "JSONL {id, raw_text, masks, gt?}; gt may be inline or an id")
      ->required();
  reward->add_option("--manifest", o.manifest, "Manifest for gt references");
  reward->add_option("--lambda", o.lambda, "Penalty per unmatched mask")->capture_default_str();
  reward->add_option("--reward-scope", o.reward_scope, "answer_only or joint")
      ->check(scopes)
      ->capture_default_str();
  reward->add_option("--select-top", o.select_top,
                     "Instead of rewards, print the K ids with the largest reward spread");
  reward->add_option("--out", o.out, "Output path (default stdout)");

  auto* report = app.add_subcommand("report", "Re-render a JSON report");
  report->add_option("--input", o.input, "Report JSON from `evaluate --format json`")->required();
  report->add_option("--format", o.format, "csv, table or json")->capture_default_str();
  report->add_option("--out", o.out, "Output path (default stdout)");

  auto* convert = app.add_subcommand("convert-box", "Replace every mask by its tight box");
  auto* cm = convert->add_option("--manifest", o.manifest, "Manifest to convert");
  auto* cp = convert->add_option("--predictions", o.predictions, "Predictions to convert");
  cm->excludes(cp);
  convert->add_option("--out", o.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*evaluate) return cmd_evaluate(o);
    if (*validate) return cmd_validate(o);
    if (*reward) return cmd_reward(o);
    if (*report) return cmd_report(o);
    if (*convert) {
      if (o.manifest.empty() && o.predictions.empty()) {
        throw UsageError("convert-box needs --manifest or --predictions");
      }
      return cmd_convert_box(o);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
