// SPDX-License-Identifier: Apache-2.0

#include "vrt/io.hpp"

#include <limits>
#include <string>

#include "vrt/error.hpp"

namespace vrt {
namespace {

using nlohmann::json;

const json& field(const json& j, const char* key) {
  if (!j.is_object()) throw LoadError("expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw LoadError(std::string("missing field '") + key + "'");
  return *it;
}

int int_field(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_integer()) {
    throw LoadError(std::string("field '") + key + "' must be an integer");
  }
  return v.get<int>();
}

std::string string_field(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) {
    throw LoadError(std::string("field '") + key + "' must be a string");
  }
  return v.get<std::string>();
}

const json& array_field(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_array()) {
    throw LoadError(std::string("field '") + key + "' must be an array");
  }
  return v;
}

std::size_t count_field(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw LoadError(std::string("count '") + key +
                    "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

}  // namespace

RleCounts rle_from_json(const json& j) {
  const auto& size = array_field(j, "size");
  if (size.size() != 2 || !size[0].is_number_integer() ||
      !size[1].is_number_integer()) {
    throw LoadError("RLE 'size' must be [H, W]");
  }
  const auto& counts = field(j, "counts");
  if (counts.is_string()) {
    throw LoadError("compressed string RLE is not supported; use integer counts");
  }
  if (!counts.is_array()) throw LoadError("RLE 'counts' must be an array");
  RleCounts rle;
  rle.height = size[0].get<int>();
  rle.width = size[1].get<int>();
  rle.counts.reserve(counts.size());
  for (const auto& c : counts) {
    if (!c.is_number_integer() || c.get<std::int64_t>() < 0 ||
        c.get<std::int64_t>() > std::numeric_limits<std::uint32_t>::max()) {
      throw LoadError("RLE counts must be non-negative 32-bit integers");
    }
    rle.counts.push_back(c.get<std::uint32_t>());
  }
  return rle;
}

json rle_to_json(const RleCounts& rle) {
  return json{{"size", {rle.height, rle.width}}, {"counts", rle.counts}};
}

BinaryMask mask_from_json(const json& j) { return decode_rle(rle_from_json(j)); }

json mask_to_json(const BinaryMask& mask) { return rle_to_json(encode_rle(mask)); }

Sample sample_from_json(const json& j) {
  Sample s;
  s.id = string_field(j, "id");
  const auto& image = field(j, "image");
  s.image.height = int_field(image, "h");
  s.image.width = int_field(image, "w");
  if (image.contains("ref")) s.image.ref = string_field(image, "ref");
  s.question = string_field(j, "question");

  for (const auto& t : array_field(j, "trace")) {
    s.trace.push_back(TraceObject{int_field(t, "obj"),
                                  t.contains("text") ? string_field(t, "text")
                                                     : std::string{},
                                  mask_from_json(field(t, "mask"))});
  }
  const auto& answer = field(j, "answer");
  s.answer.text = string_field(answer, "text");
  for (const auto& o : array_field(answer, "objects")) {
    s.answer.objects.push_back(
        AnswerObject{int_field(o, "obj"), mask_from_json(field(o, "mask"))});
  }
  for (const auto& c : array_field(j, "categories")) {
    if (!c.is_string()) throw LoadError("categories must be strings");
    auto cat = parse_category(c.get<std::string>());
    if (!cat) throw LoadError("unknown category '" + c.get<std::string>() + "'");
    s.categories.insert(*cat);
  }
  return s;
}

json sample_to_json(const Sample& s) {
  json trace = json::array();
  for (const auto& t : s.trace) {
    trace.push_back({{"obj", t.obj}, {"text", t.text}, {"mask", mask_to_json(t.mask)}});
  }
  json objects = json::array();
  for (const auto& o : s.answer.objects) {
    objects.push_back({{"obj", o.obj}, {"mask", mask_to_json(o.mask)}});
  }
  json cats = json::array();
  for (auto c : kCategories) {
    if (s.categories.contains(c)) cats.push_back(std::string(category_name(c)));
  }
  return json{{"id", s.id},
              {"image", {{"h", s.image.height}, {"w", s.image.width}, {"ref", s.image.ref}}},
              {"question", s.question},
              {"trace", std::move(trace)},
              {"answer", {{"text", s.answer.text}, {"objects", std::move(objects)}}},
              {"categories", std::move(cats)}};
}

Prediction prediction_from_json(const json& j) {
  Prediction p;
  p.id = string_field(j, "id");
  p.raw_text = string_field(j, "raw_text");
  if (j.contains("masks")) {
    for (const auto& m : array_field(j, "masks")) {
      p.masks.push_back(mask_from_json(m));
    }
  }
  return p;
}

json prediction_to_json(const Prediction& p) {
  json masks = json::array();
  for (const auto& m : p.masks) masks.push_back(mask_to_json(m));
  return json{{"id", p.id}, {"raw_text", p.raw_text}, {"masks", std::move(masks)}};
}

CategoryCounts counts_from_json(const json& j) {
  CategoryCounts c;
  c.total = count_field(j, "total");
  c.comp = count_field(j, "comp");
  c.func = count_field(j, "func");
  c.loc = count_field(j, "loc");
  c.visf = count_field(j, "visf");
  c.multiple = count_field(j, "multiple");
  return c;
}

json counts_to_json(const CategoryCounts& c) {
  return json{{"total", c.total}, {"comp", c.comp},   {"func", c.func},
              {"loc", c.loc},     {"visf", c.visf},   {"multiple", c.multiple}};
}

}  // namespace vrt
