// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"
#include "vrt/error.hpp"
#include "vrt/io.hpp"
#include "vrt/trace.hpp"

using namespace vrt;
using namespace vrt::testing;

namespace {

std::vector<BinaryMask> n_masks(std::size_t n) {
  std::vector<BinaryMask> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(rect_mask(8, 8, int(i), 0, 1, 8));
  return out;
}

std::string manifest_text(const std::vector<Sample>& samples,
                          std::optional<CategoryCounts> declared) {
  std::ostringstream os;
  if (declared) os << nlohmann::json{{"declared_counts", counts_to_json(*declared)}}.dump() << '\n';
  for (const auto& s : samples) os << sample_to_json(s).dump() << '\n';
  return os.str();
}

Benchmark load_text(const std::string& text) {
  std::istringstream in(text);
  return load_manifest(in, "fixture");
}

}  // namespace

TEST_CASE("parse_model_output canonical form") {
  const auto masks = n_masks(2);
  const auto p = parse_model_output("<think>the ball [SEG]</think><answer>the hat [SEG]</answer>",
                                    masks);
  CHECK(p.format_compliant);
  CHECK(p.thinking == "the ball [SEG]");
  CHECK(p.answer == "the hat [SEG]");
  REQUIRE(p.trace_masks.size() == 1);
  REQUIRE(p.answer_masks.size() == 1);
  CHECK(p.trace_masks[0] == masks[0]);
  CHECK(p.answer_masks[0] == masks[1]);
  CHECK(p.stray_seg_tokens == 0);
  CHECK(p.diagnostics.empty());
}

TEST_CASE("parse_model_output binds masks positionally across regions") {
  const auto masks = n_masks(4);
  const auto p = parse_model_output(
      "<think>a [SEG] then b [SEG]</think> <answer>c [SEG] and d [SEG]</answer>", masks);
  REQUIRE(p.trace_masks.size() == 2);
  REQUIRE(p.answer_masks.size() == 2);
  CHECK(p.trace_masks[1] == masks[1]);
  CHECK(p.answer_masks[0] == masks[2]);
}

TEST_CASE("parse_model_output format violations") {
  SUBCASE("missing </think>") {
    const auto p = parse_model_output("<think>ball [SEG]<answer>hat [SEG]</answer>", n_masks(2));
    CHECK_FALSE(p.format_compliant);
    CHECK(p.think_close_tags == 0);
    // Best effort: thinking stops at <answer>.
    CHECK(p.trace_masks.size() == 1);
    CHECK(p.answer_masks.size() == 1);
  }
  SUBCASE("missing answer tags") {
    const auto p = parse_model_output("<think>ball [SEG]</think>hat [SEG]", n_masks(2));
    CHECK_FALSE(p.format_compliant);
    CHECK(p.answer_masks.empty());
    CHECK(p.stray_seg_tokens == 1);
    CHECK(p.outside_text == "hat [SEG]");
  }
  SUBCASE("two think regions") {
    const auto p = parse_model_output("<think>a</think><think>b</think><answer>c</answer>", {});
    CHECK_FALSE(p.format_compliant);
    CHECK(p.think_open_tags == 2);
  }
  SUBCASE("answer before think") {
    const auto p = parse_model_output("<answer>c</answer><think>a</think>", {});
    CHECK_FALSE(p.format_compliant);
  }
  SUBCASE("chatter outside regions is kept for diagnostics only") {
    const auto p = parse_model_output("Sure! <think>a</think>\n<answer>c</answer> Bye", {});
    CHECK(p.format_compliant);
    CHECK(p.outside_text == "Sure! \n Bye");
    CHECK_FALSE(p.diagnostics.empty());
  }
}

TEST_CASE("parse_model_output alignment errors are fatal") {
  CHECK_THROWS_AS(parse_model_output("<think>[SEG]</think><answer>[SEG]</answer>", n_masks(1)),
                  AlignmentError);
  CHECK_THROWS_AS(parse_model_output("<think>x</think><answer>y</answer>", n_masks(1)),
                  AlignmentError);
}

TEST_CASE("parse_model_output is total on tag-free text") {
  std::mt19937 rng(1);
  const std::string alphabet = "ab <>/[]SEGthinkanswr\n";
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const int len = int(rng() % 40);
    for (int i = 0; i < len; ++i) text += alphabet[rng() % alphabet.size()];
    std::size_t segs = 0;
    for (auto p = text.find("[SEG]"); p != std::string::npos; p = text.find("[SEG]", p + 1)) ++segs;
    const auto parsed = parse_model_output(text, n_masks(segs));
    REQUIRE(parsed.trace_masks.size() + parsed.answer_masks.size() + parsed.stray_seg_tokens ==
            segs);
  }
  const auto plain = parse_model_output("just some words", {});
  CHECK(plain.thinking.empty());
  CHECK(plain.answer.empty());
  CHECK_FALSE(plain.format_compliant);
}

TEST_CASE("parse_object_tags examples") {
  const auto t1 = parse_object_tags("near <ver><obj2></ver>");
  REQUIRE(t1.size() == 1);
  CHECK(t1[0].kind == TagKind::ver);
  CHECK(t1[0].object == 2);
  CHECK(t1[0].begin == 5);

  const auto t2 = parse_object_tags("(<vea><obj4></vea>)");
  REQUIRE(t2.size() == 1);
  CHECK(t2[0].kind == TagKind::vea);
  CHECK(t2[0].object == 4);

  CHECK_THROWS_AS(parse_object_tags("<ver><obj1></vea>"), TagGrammarError);
  CHECK_THROWS_AS(parse_object_tags("<ver><obj1>"), TagGrammarError);
  CHECK_THROWS_AS(parse_object_tags("stray </vea> close"), TagGrammarError);
  CHECK_THROWS_AS(parse_object_tags("<ver><vea><obj1></vea></ver>"), TagGrammarError);
  CHECK_THROWS_AS(parse_object_tags("<ver><obj01></ver>"), TagGrammarError);

  // Bare object ids, as in caption lists, are not tags.
  CHECK(parse_object_tags("<obj0>: The house is a two-story brick structure").empty());
}

TEST_CASE("parse_object_tags reports every offending span") {
  try {
    parse_object_tags("<ver><obj1></vea> ok <vea><obj2></vea> bad </ver>");
    FAIL("expected TagGrammarError");
  } catch (const TagGrammarError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[0,17)") != std::string::npos);
    CHECK(msg.find("[43,49)") != std::string::npos);
  }
}

TEST_CASE("object tags re-serialize to the original text") {
  const std::string reasoning =
      "The tree (<ver><obj2></ver>) has reddish-brown leaves, and the sky (<ver><obj1></ver>) "
      "is blue. However, the grass (<ver><obj4></ver>) is lush.";
  const auto tags = parse_object_tags(reasoning);
  REQUIRE(tags.size() == 3);
  CHECK(tags[2].object == 4);

  std::mt19937 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    std::vector<std::pair<TagKind, int>> expected;
    const int pieces = int(rng() % 6);
    for (int i = 0; i < pieces; ++i) {
      text += std::string(rng() % 5, 'x') + " ";
      const auto kind = rng() % 2 ? TagKind::ver : TagKind::vea;
      const int obj = int(rng() % 120);
      text += serialize_tag(kind, obj);
      expected.emplace_back(kind, obj);
    }
    const auto parsed = parse_object_tags(text);
    REQUIRE(parsed.size() == expected.size());
    std::string rebuilt = text;
    for (std::size_t i = 0; i < parsed.size(); ++i) {
      REQUIRE(parsed[i].kind == expected[i].first);
      REQUIRE(parsed[i].object == expected[i].second);
      REQUIRE(text.substr(parsed[i].begin, parsed[i].end - parsed[i].begin) ==
              serialize_tag(parsed[i].kind, parsed[i].object));
      if (i > 0) REQUIRE(parsed[i - 1].end <= parsed[i].begin);
    }
  }
}

TEST_CASE("load_manifest accepts the full benchmark-shaped fixture") {
  const auto samples = square_samples(benchmark_category_plan());
  const auto bench = load_text(manifest_text(samples, benchmark_counts()));
  CHECK(bench.samples().size() == 304);
  CHECK(bench.declared_counts() == benchmark_counts());
  CHECK(CategoryCounts::tally(bench.samples()) == benchmark_counts());
  REQUIRE(bench.find("s17") != nullptr);
  CHECK(bench.find("s17")->trace.size() == 2);
  CHECK(bench.find("nope") == nullptr);
}

TEST_CASE("load_manifest rejects count perturbations") {
  const auto samples = square_samples(benchmark_category_plan());
  for (std::size_t field = 0; field < 6; ++field) {
    for (int delta : {-1, 1}) {
      auto counts = benchmark_counts();
      std::size_t* fields[] = {&counts.total, &counts.comp, &counts.func,
                               &counts.loc,   &counts.visf, &counts.multiple};
      *fields[field] += delta;
      CHECK_THROWS_AS(load_text(manifest_text(samples, counts)), LoadError);
    }
  }
}

TEST_CASE("load_manifest invariant errors") {
  auto base = square_samples({{Category::comp}, {Category::loc}});

  SUBCASE("missing trace") {
    auto j = sample_to_json(base[0]);
    j["trace"] = nlohmann::json::array();
    CHECK_THROWS_WITH_AS(load_text(j.dump() + "\n"), doctest::Contains("no objects"), LoadError);
  }
  SUBCASE("duplicate id") {
    base[1].id = base[0].id;
    CHECK_THROWS_WITH_AS(load_text(manifest_text(base, std::nullopt)),
                         doctest::Contains("duplicate sample id"), LoadError);
  }
  SUBCASE("mask dimensions differ from the image") {
    base[0].trace[0].mask = BinaryMask(40, 65);
    CHECK_THROWS_AS(load_text(manifest_text(base, std::nullopt)), LoadError);
  }
  SUBCASE("empty manifest") {
    CHECK_THROWS_AS(load_text(""), LoadError);
    CHECK_THROWS_AS(load_text(manifest_text({}, CategoryCounts{})), LoadError);
  }
  SUBCASE("no categories") {
    base[0].categories = {};
    CHECK_THROWS_AS(load_text(manifest_text(base, std::nullopt)), LoadError);
  }
  SUBCASE("unknown category") {
    auto j = sample_to_json(base[0]);
    j["categories"] = {"color"};
    CHECK_THROWS_AS(load_text(j.dump()), LoadError);
  }
  SUBCASE("duplicate trace object id") {
    base[0].trace[1].obj = base[0].trace[0].obj;
    CHECK_THROWS_AS(load_text(manifest_text(base, std::nullopt)), LoadError);
  }
  SUBCASE("same id with conflicting masks") {
    base[0].answer.objects[0].obj = base[0].trace[0].obj;
    CHECK_THROWS_AS(load_text(manifest_text(base, std::nullopt)), LoadError);
  }
  SUBCASE("malformed RLE") {
    auto j = sample_to_json(base[0]);
    j["trace"][0]["mask"]["counts"] = {1, 2, 3};
    CHECK_THROWS_WITH_AS(load_text(j.dump()), doctest::Contains("fixture:1"), LoadError);
  }
  SUBCASE("invalid JSON") {
    CHECK_THROWS_AS(load_text("{not json"), LoadError);
  }
  SUBCASE("without header the counts are recomputed") {
    const auto bench = load_text(manifest_text(base, std::nullopt));
    CHECK(bench.declared_counts() == CategoryCounts{2, 1, 0, 1, 0, 0});
  }
}

TEST_CASE("answer objects may reuse a trace object id") {
  auto s = square_samples({{Category::func}})[0];
  s.answer.objects[0] = {s.trace[1].obj, s.trace[1].mask};
  CHECK_NOTHROW(validate_sample(s));
}

TEST_CASE("sample JSON round trip") {
  const auto s = square_samples({{Category::comp, Category::visf}})[0];
  const auto back = sample_from_json(sample_to_json(s));
  CHECK(back.id == s.id);
  CHECK(back.categories == s.categories);
  CHECK(back.trace[1].mask == s.trace[1].mask);
  CHECK(back.answer.objects[0].mask == s.answer.objects[0].mask);
}

TEST_CASE("load_predictions") {
  std::istringstream ok(R"({"id":"a","raw_text":"<think></think>","masks":[{"size":[2,2],"counts":[2,2]}]})"
                        "\n\n"
                        R"({"id":"b","raw_text":"x"})");
  const auto preds = load_predictions(ok);
  REQUIRE(preds.size() == 2);
  CHECK(preds[0].masks[0].area() == 2);
  CHECK(preds[1].masks.empty());

  std::istringstream dup(R"({"id":"a","raw_text":""})" "\n" R"({"id":"a","raw_text":""})");
  CHECK_THROWS_AS(load_predictions(dup), LoadError);

  std::istringstream compressed(R"({"id":"a","raw_text":"","masks":[{"size":[2,2],"counts":"PQ1"}]})");
  CHECK_THROWS_WITH_AS(load_predictions(compressed), doctest::Contains("compressed"), LoadError);
}
