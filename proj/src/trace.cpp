// SPDX-License-Identifier: Apache-2.0

#include "vrt/trace.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <set>
#include <sstream>

#include "vrt/error.hpp"
#include "vrt/io.hpp"

namespace vrt {

std::string_view category_name(Category c) {
  switch (c) {
    case Category::comp: return "comp";
    case Category::func: return "func";
    case Category::loc: return "loc";
    case Category::visf: return "visf";
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view name) {
  for (auto c : kCategories) {
    if (category_name(c) == name) return c;
  }
  return std::nullopt;
}

std::size_t CategorySet::size() const { return std::popcount(bits_); }

// ---------------------------------------------------------------------------

void validate_sample(const Sample& s) {
  auto fail = [&](const std::string& what) {
    throw LoadError("sample '" + s.id + "': " + what);
  };
  if (s.id.empty()) throw LoadError("sample with empty id");
  if (s.image.height < 1 || s.image.width < 1) fail("image dimensions must be positive");
  if (s.trace.empty()) fail("gt trace has no objects");
  if (s.answer.objects.empty()) fail("answer has no objects");
  if (s.categories.empty()) fail("no categories");

  auto check_mask = [&](const BinaryMask& m, int obj) {
    if (m.height() != s.image.height || m.width() != s.image.width) {
      fail("mask of obj" + std::to_string(obj) + " is " +
           std::to_string(m.height()) + "x" + std::to_string(m.width()) +
           ", image is " + std::to_string(s.image.height) + "x" +
           std::to_string(s.image.width));
    }
  };
  std::unordered_map<int, const BinaryMask*> trace_ids;
  for (const auto& t : s.trace) {
    check_mask(t.mask, t.obj);
    if (!trace_ids.emplace(t.obj, &t.mask).second) {
      fail("duplicate trace object id obj" + std::to_string(t.obj));
    }
  }
  std::set<int> answer_ids;
  for (const auto& o : s.answer.objects) {
    check_mask(o.mask, o.obj);
    if (!answer_ids.insert(o.obj).second) {
      fail("duplicate answer object id obj" + std::to_string(o.obj));
    }
    // An id names one object; trace and answer must agree on its mask.
    auto it = trace_ids.find(o.obj);
    if (it != trace_ids.end() && !(*it->second == o.mask)) {
      fail("obj" + std::to_string(o.obj) +
           " has different masks in trace and answer");
    }
  }
}

std::size_t CategoryCounts::of(Category c) const {
  switch (c) {
    case Category::comp: return comp;
    case Category::func: return func;
    case Category::loc: return loc;
    case Category::visf: return visf;
  }
  return 0;
}

CategoryCounts CategoryCounts::tally(const std::vector<Sample>& samples) {
  CategoryCounts c;
  c.total = samples.size();
  for (const auto& s : samples) {
    c.comp += s.categories.contains(Category::comp);
    c.func += s.categories.contains(Category::func);
    c.loc += s.categories.contains(Category::loc);
    c.visf += s.categories.contains(Category::visf);
    c.multiple += s.categories.size() >= 2;
  }
  return c;
}

Benchmark::Benchmark(std::vector<Sample> samples, CategoryCounts declared)
    : samples_(std::move(samples)), declared_(declared) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!index_.emplace(samples_[i].id, i).second) {
      throw LoadError("duplicate sample id '" + samples_[i].id + "'");
    }
  }
}

const Sample* Benchmark::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &samples_[it->second];
}

namespace {

std::string describe(const CategoryCounts& c) {
  std::ostringstream os;
  os << "total " << c.total << ", comp " << c.comp << ", func " << c.func
     << ", loc " << c.loc << ", visf " << c.visf << ", multiple " << c.multiple;
  return os.str();
}

// Calls `on_record(json, line_number)` for every non-blank line.
template <typename F>
void for_each_jsonl(std::istream& in, std::string_view source, F&& on_record) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw LoadError(where + "invalid JSON: " + e.what());
    }
    try {
      on_record(record, line_no);
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(where + e.what());
    } catch (const Error& e) {
      throw LoadError(where + e.what());
    }
  }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

Benchmark load_manifest(std::istream& in, std::string_view source) {
  std::vector<Sample> samples;
  std::optional<CategoryCounts> declared;
  std::unordered_map<std::string, std::size_t> seen;
  bool first = true;
  for_each_jsonl(in, source, [&](const nlohmann::json& record, std::size_t line) {
    const bool is_header = first && record.is_object() &&
                           record.contains("declared_counts") &&
                           !record.contains("id");
    first = false;
    if (is_header) {
      declared = counts_from_json(record.at("declared_counts"));
      return;
    }
    Sample s = sample_from_json(record);
    validate_sample(s);
    auto [it, inserted] = seen.emplace(s.id, line);
    if (!inserted) {
      throw LoadError("duplicate sample id '" + s.id + "' (first seen on line " +
                      std::to_string(it->second) + ")");
    }
    samples.push_back(std::move(s));
  });

  if (samples.empty()) {
    throw LoadError(std::string(source) + ": manifest contains no samples");
  }
  const auto actual = CategoryCounts::tally(samples);
  if (declared && !(*declared == actual)) {
    throw LoadError(std::string(source) + ": declared counts (" +
                    describe(*declared) + ") disagree with samples (" +
                    describe(actual) + ")");
  }
  return Benchmark(std::move(samples), declared.value_or(actual));
}

Benchmark load_manifest(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return load_manifest(in, path.string());
}

std::vector<Prediction> load_predictions(std::istream& in,
                                         std::string_view source) {
  std::vector<Prediction> out;
  std::unordered_map<std::string, std::size_t> seen;
  for_each_jsonl(in, source, [&](const nlohmann::json& record, std::size_t line) {
    Prediction p = prediction_from_json(record);
    auto [it, inserted] = seen.emplace(p.id, line);
    if (!inserted) {
      throw LoadError("duplicate prediction id '" + p.id +
                      "' (first seen on line " + std::to_string(it->second) + ")");
    }
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return load_predictions(in, path.string());
}

// ---------------------------------------------------------------------------
// Object tags
// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kVerOpen = "<ver>";
constexpr std::string_view kVerClose = "</ver>";
constexpr std::string_view kVeaOpen = "<vea>";
constexpr std::string_view kVeaClose = "</vea>";

std::string_view open_of(TagKind k) { return k == TagKind::ver ? kVerOpen : kVeaOpen; }
std::string_view close_of(TagKind k) { return k == TagKind::ver ? kVerClose : kVeaClose; }

// Parses "<objN>" at `pos`; N is canonical decimal (no leading zeros).
std::optional<std::pair<int, std::size_t>> parse_obj_token(std::string_view text,
                                                           std::size_t pos) {
  constexpr std::string_view kPrefix = "<obj";
  if (text.substr(pos, kPrefix.size()) != kPrefix) return std::nullopt;
  std::size_t p = pos + kPrefix.size();
  const std::size_t digits_begin = p;
  while (p < text.size() && text[p] >= '0' && text[p] <= '9') ++p;
  const std::size_t ndigits = p - digits_begin;
  if (ndigits == 0 || ndigits > 9) return std::nullopt;
  if (ndigits > 1 && text[digits_begin] == '0') return std::nullopt;
  if (p >= text.size() || text[p] != '>') return std::nullopt;
  return std::pair{std::stoi(std::string(text.substr(digits_begin, ndigits))), p + 1};
}

}  // namespace

std::string serialize_tag(TagKind kind, int object) {
  std::string out(open_of(kind));
  out += "<obj" + std::to_string(object) + ">";
  out += close_of(kind);
  return out;
}

TagScan scan_object_tags(std::string_view text) {
  TagScan scan;
  std::size_t pos = 0;
  while ((pos = text.find('<', pos)) != std::string_view::npos) {
    const auto rest = text.substr(pos);
    std::optional<TagKind> kind;
    if (rest.starts_with(kVerOpen)) kind = TagKind::ver;
    if (rest.starts_with(kVeaOpen)) kind = TagKind::vea;

    if (kind) {
      const auto obj = parse_obj_token(text, pos + open_of(*kind).size());
      if (obj) {
        const auto [id, after] = *obj;
        const auto tail = text.substr(after);
        const TagKind other = *kind == TagKind::ver ? TagKind::vea : TagKind::ver;
        if (tail.starts_with(close_of(*kind))) {
          const auto end = after + close_of(*kind).size();
          scan.tags.push_back({*kind, id, pos, end});
          pos = end;
          continue;
        }
        if (tail.starts_with(close_of(other))) {
          const auto end = after + close_of(other).size();
          scan.errors.push_back({pos, end,
                                 "opened with " + std::string(open_of(*kind)) +
                                     " but closed with " +
                                     std::string(close_of(other))});
          pos = end;
          continue;
        }
      }
      scan.errors.push_back({pos, pos + open_of(*kind).size(),
                             std::string(open_of(*kind)) +
                                 " not followed by <objN> and its closing tag"});
      pos += open_of(*kind).size();
      continue;
    }
    if (rest.starts_with(kVerClose) || rest.starts_with(kVeaClose)) {
      scan.errors.push_back({pos, pos + kVerClose.size(),
                             "closing " + std::string(rest.substr(0, kVerClose.size())) +
                                 " without an opening tag"});
      pos += kVerClose.size();
      continue;
    }
    ++pos;
  }
  return scan;
}

std::vector<ObjectTag> parse_object_tags(std::string_view text) {
  auto scan = scan_object_tags(text);
  if (!scan.errors.empty()) {
    std::string msg = "malformed object tags:";
    for (const auto& e : scan.errors) {
      msg += " [" + std::to_string(e.begin) + "," + std::to_string(e.end) +
             ") " + e.reason + ";";
    }
    msg.pop_back();
    throw TagGrammarError(msg);
  }
  return std::move(scan.tags);
}

// ---------------------------------------------------------------------------
// Model output
// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";
constexpr auto npos = std::string_view::npos;

std::vector<std::size_t> find_all(std::string_view text, std::string_view needle) {
  std::vector<std::size_t> out;
  for (auto p = text.find(needle); p != npos; p = text.find(needle, p + needle.size())) {
    out.push_back(p);
  }
  return out;
}

struct Region {
  std::size_t begin = npos;
  std::size_t end = npos;
  std::size_t consumed_end = 0;  // first byte after the region's closing tag

  bool valid() const { return begin != npos; }
  bool contains(std::size_t p) const { return valid() && p >= begin && p < end; }
};

// Best-effort location of the region delimited by open/close, starting the
// search at `from`. A missing close ends the region at `fallback_end`.
Region locate(std::string_view text, std::string_view open, std::string_view close,
              std::size_t from, std::string_view fallback_stop) {
  Region r;
  r.consumed_end = from;
  const auto o = text.find(open, from);
  if (o != npos) {
    r.begin = o + open.size();
    const auto c = text.find(close, r.begin);
    if (c != npos) {
      r.end = c;
      r.consumed_end = c + close.size();
    } else {
      const auto stop = fallback_stop.empty() ? npos : text.find(fallback_stop, r.begin);
      r.end = stop != npos ? stop : text.size();
      r.consumed_end = r.end;
    }
    return r;
  }
  const auto c = text.find(close, from);
  if (c != npos) {
    r.begin = from;
    r.end = c;
    r.consumed_end = c + close.size();
  }
  return r;
}

}  // namespace

ParsedOutput parse_model_output(std::string_view text, std::vector<BinaryMask> masks) {
  const auto segs = find_all(text, kSegToken);
  if (segs.size() != masks.size()) {
    throw AlignmentError(std::to_string(segs.size()) + " [SEG] tokens but " +
                         std::to_string(masks.size()) + " masks");
  }

  ParsedOutput out;
  const auto think_opens = find_all(text, kThinkOpen);
  const auto think_closes = find_all(text, kThinkClose);
  const auto answer_opens = find_all(text, kAnswerOpen);
  const auto answer_closes = find_all(text, kAnswerClose);
  out.think_open_tags = think_opens.size();
  out.think_close_tags = think_closes.size();
  out.answer_open_tags = answer_opens.size();
  out.answer_close_tags = answer_closes.size();
  out.format_compliant = think_opens.size() == 1 && think_closes.size() == 1 &&
                         answer_opens.size() == 1 && answer_closes.size() == 1 &&
                         think_opens[0] < think_closes[0] &&
                         think_closes[0] < answer_opens[0] &&
                         answer_opens[0] < answer_closes[0];

  const Region think = locate(text, kThinkOpen, kThinkClose, 0, kAnswerOpen);
  const Region answer = locate(text, kAnswerOpen, kAnswerClose, think.consumed_end, {});
  if (think.valid()) out.thinking = std::string(text.substr(think.begin, think.end - think.begin));
  if (answer.valid()) out.answer = std::string(text.substr(answer.begin, answer.end - answer.begin));

  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (think.contains(segs[i])) {
      out.trace_masks.push_back(std::move(masks[i]));
    } else if (answer.contains(segs[i])) {
      out.answer_masks.push_back(std::move(masks[i]));
    } else {
      ++out.stray_seg_tokens;
    }
  }

  // Everything outside both regions and their delimiters.
  std::string outside;
  std::size_t cursor = 0;
  auto take_until = [&](std::size_t stop) {
    if (stop > cursor) outside += text.substr(cursor, stop - cursor);
  };
  for (const Region* r : {&think, &answer}) {
    if (!r->valid()) continue;
    const auto open = r == &think ? kThinkOpen : kAnswerOpen;
    const bool opened = r->begin >= open.size() &&
                        text.substr(r->begin - open.size(), open.size()) == open;
    take_until(opened ? r->begin - open.size() : r->begin);
    cursor = std::max(cursor, r->consumed_end);
  }
  take_until(text.size());
  if (outside.find_first_not_of(" \t\r\n") != std::string::npos) {
    out.outside_text = std::move(outside);
    out.diagnostics.push_back("text outside think/answer regions ignored");
  }

  if (!out.format_compliant) {
    out.diagnostics.push_back(
        "think/answer tags malformed (think " + std::to_string(out.think_open_tags) +
        "/" + std::to_string(out.think_close_tags) + ", answer " +
        std::to_string(out.answer_open_tags) + "/" +
        std::to_string(out.answer_close_tags) + ")");
  }
  if (out.stray_seg_tokens > 0) {
    out.diagnostics.push_back(std::to_string(out.stray_seg_tokens) +
                              " [SEG] token(s) outside think/answer regions");
  }

  auto tags = scan_object_tags(text);
  out.tags = std::move(tags.tags);
  for (const auto& e : tags.errors) {
    out.diagnostics.push_back("tag grammar at [" + std::to_string(e.begin) + "," +
                              std::to_string(e.end) + "): " + e.reason);
  }
  return out;
}

}  // namespace vrt
