#pragma once

// SPDX-License-Identifier: Apache-2.0

// JSON forms of the on-disk records. Every *_from_json throws LoadError on
// schema violations.
//
//   RLE:        {"size": [H, W], "counts": [int, ...]}  column-major, the
//               first run counts background pixels
//   Sample:     {"id", "image": {"h", "w", "ref"}, "question",
//                "trace": [{"obj", "text", "mask": RLE}],
//                "answer": {"text", "objects": [{"obj", "mask": RLE}]},
//                "categories": ["comp" | "func" | "loc" | "visf", ...]}
//   Prediction: {"id", "raw_text", "masks": [RLE, ...]}
//   Header:     {"declared_counts": {"total", "comp", "func", "loc", "visf",
//                                    "multiple"}}

#include "json.hpp"
#include "vrt/mask.hpp"
#include "vrt/trace.hpp"

namespace vrt {

RleCounts rle_from_json(const nlohmann::json& j);
nlohmann::json rle_to_json(const RleCounts& rle);

BinaryMask mask_from_json(const nlohmann::json& j);
nlohmann::json mask_to_json(const BinaryMask& mask);

Sample sample_from_json(const nlohmann::json& j);
nlohmann::json sample_to_json(const Sample& sample);

Prediction prediction_from_json(const nlohmann::json& j);
nlohmann::json prediction_to_json(const Prediction& prediction);

CategoryCounts counts_from_json(const nlohmann::json& j);
nlohmann::json counts_to_json(const CategoryCounts& counts);

}  // namespace vrt
