// Copyright 2026 The PrivTier Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "privtier/corpus.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

#include "json.hpp"
#include "privtier/error.hpp"

namespace privtier {

using nlohmann::json;

std::string_view to_string(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

Split split_from_string(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  throw DomainError(fmt::format("unknown split name '{}'", name));
}

const std::vector<std::string>& default_class_list() {
  static const std::vector<std::string> kClasses = {
      "BrushingTeeth", "Haircut",         "MoppingFloor", "ApplyEyeMakeup",
      "BabyCrawling",  "ShavingBeard",    "BodyWeightSquats", "Lunges",
      "TaiChi",        "JumpRope",        "WritingOnBoard", "WallPushups",
      "JumpingJack",   "CleanAndJerk",    "WalkingWithDog"};
  return kClasses;
}

CorpusOptions default_corpus_options() {
  CorpusOptions options;
  options.class_list = default_class_list();
  return options;
}

Split assign_split(int group_id) {
  if (group_id < 1 || group_id > kGroupCount) {
    throw DomainError(
        fmt::format("group_id {} outside [1, {}]", group_id, kGroupCount));
  }
  return group_id <= kLastTrainGroup ? Split::kTrain : Split::kTest;
}

Ratio detection_rate(const FrameAnnotations& annotations) {
  if (annotations.empty()) {
    throw DomainError("detection_rate of an empty annotation list");
  }
  const auto detected = static_cast<std::uint64_t>(std::count_if(
      annotations.begin(), annotations.end(),
      [](const auto& a) { return a.has_value(); }));
  return Ratio{detected, annotations.size()};
}

std::optional<BBox> mean_bbox(const FrameAnnotations& annotations) {
  double sums[4] = {0, 0, 0, 0};
  std::size_t count = 0;
  for (const auto& a : annotations) {
    if (!a) continue;
    sums[0] += a->bbox.x_min;
    sums[1] += a->bbox.y_min;
    sums[2] += a->bbox.x_max;
    sums[3] += a->bbox.y_max;
    ++count;
  }
  if (count == 0) return std::nullopt;
  auto avg = [&](int i) {
    return static_cast<int>(std::lround(sums[i] / static_cast<double>(count)));
  };
  return BBox{avg(0), avg(1), avg(2), avg(3)};
}

std::optional<int> group_from_source_file(std::string_view source_file) {
  static const std::regex kGroup(R"(_g(\d{1,3})_c\d+)");
  std::match_results<std::string_view::const_iterator> match;
  if (!std::regex_search(source_file.begin(), source_file.end(), match,
                         kGroup)) {
    return std::nullopt;
  }
  return std::stoi(match[1].str());
}

namespace {

double round4(double value) { return std::round(value * 1e4) / 1e4; }

[[noreturn]] void fail(const std::string& video_id, const std::string& field,
                       const std::string& message) {
  throw ValidationError(
      fmt::format("record '{}': field '{}': {}", video_id, field, message),
      video_id, field);
}

const json& require(const json& object, const char* key,
                    const std::string& video_id) {
  auto it = object.find(key);
  if (it == object.end()) fail(video_id, key, "missing");
  return *it;
}

std::string require_string(const json& object, const char* key,
                           const std::string& video_id) {
  const json& v = require(object, key, video_id);
  if (!v.is_string()) fail(video_id, key, "expected a string");
  return v.get<std::string>();
}

double require_number(const json& object, const char* key,
                      const std::string& video_id) {
  const json& v = require(object, key, video_id);
  if (!v.is_number()) fail(video_id, key, "expected a number");
  return v.get<double>();
}

int require_int(const json& object, const char* key,
                const std::string& video_id) {
  const json& v = require(object, key, video_id);
  if (!v.is_number_integer()) fail(video_id, key, "expected an integer");
  return v.get<int>();
}

BBox parse_bbox(const json& v, const std::string& video_id,
                const std::string& field) {
  if (!v.is_array() || v.size() != 4) {
    fail(video_id, field, "expected [x_min, y_min, x_max, y_max]");
  }
  for (const auto& c : v) {
    if (!c.is_number_integer()) fail(video_id, field, "expected integers");
  }
  return BBox{v[0].get<int>(), v[1].get<int>(), v[2].get<int>(),
              v[3].get<int>()};
}

json bbox_json(const BBox& b) {
  return json::array({b.x_min, b.y_min, b.x_max, b.y_max});
}

std::optional<RoiAnnotation> parse_frame_annotation(const json& v,
                                                    const std::string& video_id,
                                                    std::size_t index) {
  const std::string field = fmt::format("annotations[{}]", index);
  if (v.is_null()) return std::nullopt;
  if (!v.is_object()) fail(video_id, field, "expected null or an object");

  RoiAnnotation roi;
  auto bbox_it = v.find("bbox");
  if (bbox_it == v.end()) fail(video_id, field + ".bbox", "missing");
  roi.bbox = parse_bbox(*bbox_it, video_id, field + ".bbox");

  auto conf_it = v.find("confidence");
  if (conf_it == v.end() || !conf_it->is_number()) {
    fail(video_id, field + ".confidence", "missing or not a number");
  }
  roi.confidence = conf_it->get<double>();

  if (auto kind_it = v.find("mask_kind"); kind_it != v.end()) {
    if (!kind_it->is_string() || kind_it->get<std::string>() != "bbox") {
      fail(video_id, field + ".mask_kind",
           "only rectangular 'bbox' masks are supported");
    }
  }

  auto kp_it = v.find("keypoints");
  if (kp_it == v.end() || !kp_it->is_array()) {
    fail(video_id, field + ".keypoints", "missing or not an array");
  }
  if (kp_it->size() != static_cast<std::size_t>(kKeypointCount)) {
    fail(video_id, field + ".keypoints",
         fmt::format("expected {} keypoints, got {}", kKeypointCount,
                     kp_it->size()));
  }
  for (std::size_t k = 0; k < roi.keypoints.size(); ++k) {
    const json& kp = (*kp_it)[k];
    if (!kp.is_array() || kp.size() != 3 || !kp[0].is_number() ||
        !kp[1].is_number() || !kp[2].is_number()) {
      fail(video_id, fmt::format("{}.keypoints[{}]", field, k),
           "expected [x, y, c]");
    }
    roi.keypoints[k] = {kp[0].get<double>(), kp[1].get<double>(),
                        kp[2].get<double>()};
  }
  return roi;
}

json frame_annotation_json(const std::optional<RoiAnnotation>& roi) {
  if (!roi) return nullptr;
  json kps = json::array();
  for (const auto& kp : roi->keypoints) kps.push_back({kp.x, kp.y, kp.c});
  return json{{"bbox", bbox_json(roi->bbox)},
              {"confidence", roi->confidence},
              {"keypoints", std::move(kps)}};
}

const std::set<std::string>& known_fields() {
  static const std::set<std::string> kKnown = {
      "video_id",     "source_file",    "class",       "split",
      "source_fps",   "total_frames",   "clip_frames", "detection_rate",
      "roi_bbox_mean", "annotations",   "group_id",    "padded"};
  return kKnown;
}

ClipRecord parse_record(const json& v, std::size_t index,
                        const CorpusOptions& options) {
  std::string video_id = fmt::format("#{}", index);
  if (!v.is_object()) fail(video_id, "<record>", "expected an object");
  video_id = require_string(v, "video_id", video_id);

  ClipRecord r;
  r.video_id = video_id;
  r.source_file = require_string(v, "source_file", video_id);
  r.class_label = require_string(v, "class", video_id);
  try {
    r.split = split_from_string(require_string(v, "split", video_id));
  } catch (const DomainError& e) {
    fail(video_id, "split", e.what());
  }
  r.source_fps = require_number(v, "source_fps", video_id);
  r.total_frames = require_int(v, "total_frames", video_id);
  r.clip_frames = require_int(v, "clip_frames", video_id);
  r.detection_rate = require_number(v, "detection_rate", video_id);

  const json& mean = require(v, "roi_bbox_mean", video_id);
  if (!mean.is_null()) r.roi_bbox_mean = parse_bbox(mean, video_id, "roi_bbox_mean");

  const std::optional<int> derived_group = group_from_source_file(r.source_file);
  if (auto it = v.find("group_id"); it != v.end()) {
    if (!it->is_number_integer()) fail(video_id, "group_id", "expected an integer");
    r.group_id = it->get<int>();
    if (derived_group && *derived_group != r.group_id) {
      fail(video_id, "group_id", "disagrees with the group in source_file");
    }
  } else if (derived_group) {
    r.group_id = *derived_group;
  } else {
    fail(video_id, "group_id",
         "missing and not derivable from source_file (_gNN_cNN)");
  }

  if (auto it = v.find("padded"); it != v.end()) {
    if (!it->is_boolean()) fail(video_id, "padded", "expected a boolean");
    r.padded = it->get<bool>();
  }

  if (auto it = v.find("annotations"); it != v.end()) {
    if (!it->is_array()) fail(video_id, "annotations", "expected an array");
    FrameAnnotations frames;
    frames.reserve(it->size());
    for (std::size_t i = 0; i < it->size(); ++i) {
      frames.push_back(parse_frame_annotation((*it)[i], video_id, i));
    }
    r.annotations = std::move(frames);
  }

  for (const auto& [key, value] : v.items()) {
    if (!known_fields().contains(key)) r.extra_fields.emplace(key, value.dump());
  }

  validate_record(r, options);
  if (r.annotations && !r.annotations->empty()) {
    // Keep the exact ratio internally; the document holds a rounded value.
    r.detection_rate = detection_rate(*r.annotations).value();
  }
  return r;
}

}  // namespace

void validate_record(const ClipRecord& r, const CorpusOptions& options) {
  const std::string& id = r.video_id;
  if (id.empty()) fail(id, "video_id", "empty");
  if (!options.class_list.empty() &&
      std::find(options.class_list.begin(), options.class_list.end(),
                r.class_label) == options.class_list.end()) {
    fail(id, "class", fmt::format("'{}' is not a configured class", r.class_label));
  }
  if (!(r.source_fps > 0.0)) fail(id, "source_fps", "must be positive");
  if (r.total_frames <= 0) fail(id, "total_frames", "must be positive");
  if (r.clip_frames != kClipFrames) {
    fail(id, "clip_frames", fmt::format("must be {}", kClipFrames));
  }
  if (!(r.detection_rate >= 0.0 && r.detection_rate <= 1.0)) {
    fail(id, "detection_rate", "must lie in [0, 1]");
  }
  if (r.group_id < 1 || r.group_id > kGroupCount) {
    fail(id, "group_id", fmt::format("must lie in [1, {}]", kGroupCount));
  }
  if (assign_split(r.group_id) != r.split) {
    fail(id, "split",
         fmt::format("group {} belongs to '{}'", r.group_id,
                     to_string(assign_split(r.group_id))));
  }
  if (r.roi_bbox_mean &&
      !r.roi_bbox_mean->fits_within(options.frame_width, options.frame_height)) {
    fail(id, "roi_bbox_mean", "box outside the frame or degenerate");
  }
  if (!r.annotations) return;

  const FrameAnnotations& frames = *r.annotations;
  if (frames.size() != static_cast<std::size_t>(r.clip_frames)) {
    fail(id, "annotations",
         fmt::format("expected {} entries, got {}", r.clip_frames, frames.size()));
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (!frames[i]) continue;
    const RoiAnnotation& a = *frames[i];
    const std::string field = fmt::format("annotations[{}]", i);
    if (!a.bbox.fits_within(options.frame_width, options.frame_height)) {
      fail(id, field + ".bbox", "box outside the frame or degenerate");
    }
    if (!(a.confidence >= kMinDetectionConfidence && a.confidence <= 1.0)) {
      fail(id, field + ".confidence", "must lie in [0.5, 1]");
    }
    for (std::size_t k = 0; k < a.keypoints.size(); ++k) {
      const double c = a.keypoints[k].c;
      if (!(c >= 0.0 && c <= 1.0)) {
        fail(id, fmt::format("{}.keypoints[{}]", field, k),
             "confidence must lie in [0, 1]");
      }
    }
  }
  const double exact = detection_rate(frames).value();
  if (std::abs(round4(exact) - round4(r.detection_rate)) > 1e-9) {
    fail(id, "detection_rate",
         fmt::format("{} does not match {} detected of {} frames",
                     r.detection_rate, detection_rate(frames).numerator,
                     frames.size()));
  }
}

std::vector<ClipRecord> parse_annotations(std::string_view document,
                                          const CorpusOptions& options) {
  json root;
  try {
    root = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("annotations document: {}", e.what()), e.byte);
  }
  if (!root.is_array()) {
    throw ParseError("annotations document must be a JSON array", 0);
  }
  std::vector<ClipRecord> records;
  records.reserve(root.size());
  std::set<std::string> seen;
  for (std::size_t i = 0; i < root.size(); ++i) {
    ClipRecord r = parse_record(root[i], i, options);
    if (!seen.insert(r.video_id).second) fail(r.video_id, "video_id", "duplicate");
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<ClipRecord> parse_annotations(std::string_view document) {
  return parse_annotations(document, default_corpus_options());
}

std::string serialize_annotations(std::span<const ClipRecord> records) {
  json root = json::array();
  for (const ClipRecord& r : records) {
    json v;
    v["video_id"] = r.video_id;
    v["source_file"] = r.source_file;
    v["class"] = r.class_label;
    v["split"] = std::string(to_string(r.split));
    if (r.source_fps == std::floor(r.source_fps) && r.source_fps < 1e9) {
      v["source_fps"] = static_cast<long long>(r.source_fps);
    } else {
      v["source_fps"] = r.source_fps;
    }
    v["total_frames"] = r.total_frames;
    v["clip_frames"] = r.clip_frames;
    v["detection_rate"] = round4(r.detection_rate);
    v["roi_bbox_mean"] = r.roi_bbox_mean ? bbox_json(*r.roi_bbox_mean) : json(nullptr);
    if (group_from_source_file(r.source_file) != r.group_id) {
      v["group_id"] = r.group_id;
    }
    if (r.padded) v["padded"] = true;
    if (r.annotations) {
      json frames = json::array();
      for (const auto& a : *r.annotations) frames.push_back(frame_annotation_json(a));
      v["annotations"] = std::move(frames);
    }
    for (const auto& [key, text] : r.extra_fields) v[key] = json::parse(text);
    root.push_back(std::move(v));
  }
  return root.dump(2) + "\n";
}

SplitAssignment parse_split_file(std::string_view text, Split split) {
  SplitAssignment out{split, {}};
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) {
      if (line.find_first_of(" \t,") != std::string_view::npos) {
        throw ParseError(fmt::format("split file line {}: whitespace or comma in id",
                                     line_no),
                         line_no);
      }
      out.video_ids.emplace_back(line);
    }
    pos = end + 1;
  }
  std::sort(out.video_ids.begin(), out.video_ids.end());
  if (std::adjacent_find(out.video_ids.begin(), out.video_ids.end()) !=
      out.video_ids.end()) {
    throw ParseError("split file lists a video id twice", 0);
  }
  return out;
}

std::string serialize_split_file(const SplitAssignment& assignment) {
  std::vector<std::string> ids = assignment.video_ids;
  std::sort(ids.begin(), ids.end());
  std::string out;
  for (const auto& id : ids) {
    out += id;
    out += '\n';
  }
  return out;
}

SplitPair make_splits(std::span<const ClipRecord> records) {
  SplitPair pair;
  for (const ClipRecord& r : records) {
    const Split expected = assign_split(r.group_id);
    if (expected != r.split) {
      fail(r.video_id, "split", "disagrees with the fixed group rule");
    }
    (expected == Split::kTrain ? pair.train : pair.test).video_ids.push_back(r.video_id);
  }
  std::sort(pair.train.video_ids.begin(), pair.train.video_ids.end());
  std::sort(pair.test.video_ids.begin(), pair.test.video_ids.end());
  return pair;
}

std::vector<std::string> check_split_integrity(std::span<const ClipRecord> records,
                                               const SplitPair& splits) {
  std::map<std::string, const ClipRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.video_id, &r);

  std::vector<std::string> problems;
  std::set<std::string> train_ids(splits.train.video_ids.begin(),
                                  splits.train.video_ids.end());
  std::map<int, std::set<Split>> group_splits;
  auto visit = [&](const SplitAssignment& s) {
    for (const auto& id : s.video_ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        problems.push_back(fmt::format("{}: listed in {} split but not in corpus", id,
                                       to_string(s.split)));
        continue;
      }
      group_splits[it->second->group_id].insert(s.split);
      if (assign_split(it->second->group_id) != s.split) {
        problems.push_back(fmt::format("{}: group {} listed in {} split", id,
                                       it->second->group_id, to_string(s.split)));
      }
    }
  };
  visit(splits.train);
  visit(splits.test);
  for (const auto& id : splits.test.video_ids) {
    if (train_ids.contains(id)) {
      problems.push_back(fmt::format("{}: present in both splits", id));
    }
  }
  for (const auto& [group, seen] : group_splits) {
    if (seen.size() > 1) {
      problems.push_back(fmt::format("group {} has members in both splits", group));
    }
  }
  return problems;
}

}  // namespace privtier
