// Copyright 2026 The actsum Authors
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

// On-disk formats: binary feature files, JSON annotation files, binary
// checkpoints with an FNV-1a checksum, and the JSON/key-value outputs of
// summaries, reports and training histories.

#ifndef ACTSUM_IO_HPP_
#define ACTSUM_IO_HPP_

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "actsum/error.hpp"
#include "actsum/evaluation.hpp"
#include "actsum/labels.hpp"
#include "actsum/model.hpp"
#include "actsum/numerics.hpp"
#include "actsum/summary.hpp"
#include "actsum/training.hpp"

namespace actsum {

using Json = nlohmann::json;

inline constexpr std::array<char, 4> kFeatureMagic = {'A', 'V', 'S', 'F'};
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::array<char, 4> kCheckpointMagic = {'A', 'V', 'S', 'C'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline std::string ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void WriteFileBytes(const std::filesystem::path& path,
                           const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

// Little-endian byte packing independent of host order.
class ByteWriter {
 public:
  void raw(const void* data, std::size_t n) {
    bytes_.append(static_cast<const char*>(data), n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes_ += s;
  }
  const std::string& bytes() const { return bytes_; }
  std::string& bytes() { return bytes_; }

 private:
  std::string bytes_;
};

class ByteReader {
 public:
  ByteReader(const std::string& bytes, std::string source)
      : bytes_(bytes), source_(std::move(source)) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t n, const char* field) const {
    if (remaining() < n) {
      throw Error(ErrorCode::kTruncatedFile,
                  source_ + ": " + field + " at byte " + std::to_string(pos_) +
                      " needs " + std::to_string(n) + " bytes, " +
                      std::to_string(remaining()) + " left");
    }
  }
  std::uint32_t u32(const char* field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* field) {
    need(8, field);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(
               static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32(const char* field) { return std::bit_cast<float>(u32(field)); }
  double f64(const char* field) { return std::bit_cast<double>(u64(field)); }
  std::string str(const char* field) {
    const std::uint32_t n = u32(field);
    need(n, field);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string raw(std::size_t n, const char* field) {
    need(n, field);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  const std::string& bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

inline std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// ---------------------------------------------------------------- features

inline std::string EncodeFeatures(const Matrix& features) {
  detail::ByteWriter w;
  w.raw(kFeatureMagic.data(), 4);
  w.u32(kFeatureVersion);
  w.u32(static_cast<std::uint32_t>(features.rows()));
  w.u32(static_cast<std::uint32_t>(features.cols()));
  for (double v : features.values()) w.f32(static_cast<float>(v));
  return w.bytes();
}

inline Matrix DecodeFeatures(const std::string& bytes,
                             const std::string& source = "features") {
  detail::ByteReader r(bytes, source);
  const std::string magic = r.raw(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), kFeatureMagic.begin())) {
    throw Error(ErrorCode::kBadMagic, source + ": not an AVSF feature file");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kFeatureVersion) {
    throw Error(ErrorCode::kVersionUnsupported,
                source + ": feature version " + std::to_string(version));
  }
  const std::uint64_t n = r.u32("n_frames");
  const std::uint64_t d = r.u32("dim");
  const std::uint64_t payload = 4 * n * d;
  if (r.remaining() < payload) {
    throw Error(ErrorCode::kTruncatedFile,
                source + ": payload has " + std::to_string(r.remaining()) +
                    " bytes, header promises " + std::to_string(payload));
  }
  if (r.remaining() > payload) {
    throw Error(ErrorCode::kParseError,
                source + ": " + std::to_string(r.remaining() - payload) +
                    " trailing bytes after payload");
  }
  Matrix m(static_cast<std::size_t>(n), static_cast<std::size_t>(d));
  for (double& v : m.values()) {
    const std::size_t offset = r.offset();
    const float f = r.f32("payload");
    if (!std::isfinite(f)) {
      throw Error(ErrorCode::kNonFiniteEntry,
                  source + ": non-finite value at byte offset " +
                      std::to_string(offset));
    }
    v = static_cast<double>(f);
  }
  return m;
}

inline void SaveFeatures(const Matrix& features,
                         const std::filesystem::path& path) {
  detail::WriteFileBytes(path, EncodeFeatures(features));
}

inline Matrix LoadFeatures(const std::filesystem::path& path) {
  return DecodeFeatures(detail::ReadFileBytes(path), path.string());
}

// ------------------------------------------------------------- annotations

inline Json SegmentsToJson(const SegmentList& segments) {
  Json arr = Json::array();
  for (const Segment& s : segments) arr.push_back({s.start, s.end});
  return arr;
}

inline SegmentList SegmentsFromJson(const Json& j, const std::string& field) {
  if (!j.is_array()) {
    throw Error(ErrorCode::kParseError, field + " must be an array");
  }
  SegmentList out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& pair = j[i];
    if (!pair.is_array() || pair.size() != 2 ||
        !pair[0].is_number_unsigned() || !pair[1].is_number_unsigned()) {
      throw Error(ErrorCode::kParseError,
                  field + "[" + std::to_string(i) +
                      "] must be a [start, end] pair of unsigned integers");
    }
    out.push_back({pair[0].get<std::size_t>(), pair[1].get<std::size_t>()});
  }
  return out;
}

inline Json AnnotationsToJson(const AnnotationSet& a) {
  Json users = Json::array();
  for (const UserAnnotation& u : a.users) {
    std::vector<int> ranks;
    for (ActionnessRank r : u.segment_ranks) ranks.push_back(r.value());
    users.push_back({{"summary_frames", SelectedFrames(u.summary)},
                     {"segment_ranks", ranks}});
  }
  return {{"video_id", a.video_id},
          {"fps", 1},
          {"n_frames", a.n_frames},
          {"segments", SegmentsToJson(a.segments)},
          {"users", users}};
}

inline AnnotationSet AnnotationsFromJson(const Json& j,
                                         const std::string& source = "annotations") {
  auto field = [&](const char* name) -> const Json& {
    if (!j.contains(name)) {
      throw Error(ErrorCode::kParseError, source + ": missing field '" +
                                              std::string(name) + "'");
    }
    return j.at(name);
  };
  AnnotationSet a;
  try {
    a.video_id = field("video_id").get<std::string>();
    if (j.contains("fps") && j.at("fps").get<double>() != 1.0) {
      throw Error(ErrorCode::kParseError, source + ": fps must be 1");
    }
    a.segments = SegmentsFromJson(field("segments"), source + ": segments");
    a.n_frames = j.contains("n_frames")
                     ? j.at("n_frames").get<std::size_t>()
                     : (a.segments.empty() ? 0 : a.segments.back().end);
    const Json& users = field("users");
    if (!users.is_array()) {
      throw Error(ErrorCode::kParseError, source + ": users must be an array");
    }
    for (std::size_t u = 0; u < users.size(); ++u) {
      const std::string where = source + ": users[" + std::to_string(u) + "]";
      if (!users[u].contains("summary_frames") ||
          !users[u].contains("segment_ranks")) {
        throw Error(ErrorCode::kParseError,
                    where + " needs summary_frames and segment_ranks");
      }
      UserAnnotation ua;
      const auto frames =
          users[u].at("summary_frames").get<std::vector<std::size_t>>();
      try {
        ua.summary = MaskFromFrames(frames, a.n_frames);
      } catch (const Error& e) {
        throw Error(ErrorCode::kParseError, where + ".summary_frames: " + e.what());
      }
      for (int r : users[u].at("segment_ranks").get<std::vector<int>>()) {
        if (r < 0 || r > 3) {
          throw Error(ErrorCode::kParseError,
                      where + ".segment_ranks has value " + std::to_string(r));
        }
        ua.segment_ranks.emplace_back(r);
      }
      a.users.push_back(std::move(ua));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, source + ": " + e.what());
  }
  try {
    a.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kParseError, source + ": " + e.what());
  }
  return a;
}

inline Json ReadJsonFile(const std::filesystem::path& path) {
  const std::string text = detail::ReadFileBytes(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

inline void WriteJsonFile(const Json& j, const std::filesystem::path& path) {
  detail::WriteFileBytes(path, j.dump(2) + "\n");
}

inline AnnotationSet LoadAnnotations(const std::filesystem::path& path) {
  return AnnotationsFromJson(ReadJsonFile(path), path.string());
}

inline void SaveAnnotations(const AnnotationSet& a,
                            const std::filesystem::path& path) {
  WriteJsonFile(AnnotationsToJson(a), path);
}

// Pairs every <id>.json annotation file in `dir` with <id>.avsf, sorted by id.
inline std::vector<Video> LoadDataset(const std::filesystem::path& dir,
                                      SmoothingOptions smoothing = {}) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIoError, dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Video> videos;
  for (const auto& json_path : files) {
    std::filesystem::path feat_path = json_path;
    feat_path.replace_extension(".avsf");
    if (!std::filesystem::exists(feat_path)) continue;
    AnnotationSet a = LoadAnnotations(json_path);
    Matrix features = LoadFeatures(feat_path);
    std::string id = a.video_id;
    videos.push_back(
        MakeVideo(std::move(id), std::move(features), std::move(a), smoothing));
  }
  if (videos.empty()) {
    throw Error(ErrorCode::kEmptyDataset,
                "no <id>.json/<id>.avsf pairs in " + dir.string());
  }
  return videos;
}

// ------------------------------------------------------------------ config

inline Json ConfigToJson(const TrainConfig& c) {
  return {{"lambda", c.lambda},
          {"learning_rate", c.learning_rate},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"val_ratio", c.val_ratio},
          {"budget", c.budget},
          {"seed", c.seed},
          {"subset_mode", c.subset_mode == SubsetMode::kStochastic
                              ? "stochastic"
                              : "deterministic"},
          {"sigma_divisor", c.smoothing.sigma_divisor},
          {"kts_penalty", c.kts_penalty},
          {"grad_clip", c.grad_clip},
          {"normalize_actionness", c.normalize_actionness},
          {"hidden", c.hidden},
          {"head_hidden", c.head_hidden},
          {"phi_dim", c.phi_dim}};
}

// Fields missing from `j` keep the values already in `base`.
inline TrainConfig ConfigFromJson(const Json& j, TrainConfig base = {}) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kParseError, "config must be a JSON object");
  }
  static const std::vector<std::string> kKnown = {
      "lambda", "learning_rate", "max_epochs", "patience", "val_ratio",
      "budget", "seed", "subset_mode", "sigma_divisor", "kts_penalty",
      "grad_clip", "normalize_actionness", "hidden", "head_hidden", "phi_dim"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) {
      throw Error(ErrorCode::kParseError, "unknown config field '" + key + "'");
    }
  }
  try {
    auto get = [&](const char* key, auto& out) {
      if (j.contains(key)) j.at(key).get_to(out);
    };
    get("lambda", base.lambda);
    get("learning_rate", base.learning_rate);
    get("max_epochs", base.max_epochs);
    get("patience", base.patience);
    get("val_ratio", base.val_ratio);
    get("budget", base.budget);
    get("seed", base.seed);
    get("sigma_divisor", base.smoothing.sigma_divisor);
    get("kts_penalty", base.kts_penalty);
    get("grad_clip", base.grad_clip);
    get("normalize_actionness", base.normalize_actionness);
    get("hidden", base.hidden);
    get("head_hidden", base.head_hidden);
    get("phi_dim", base.phi_dim);
    if (j.contains("subset_mode")) {
      const std::string mode = j.at("subset_mode").get<std::string>();
      if (mode == "stochastic") {
        base.subset_mode = SubsetMode::kStochastic;
      } else if (mode == "deterministic") {
        base.subset_mode = SubsetMode::kDeterministic;
      } else {
        throw Error(ErrorCode::kParseError, "subset_mode '" + mode + "'");
      }
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("config: ") + e.what());
  }
  return base;
}

// -------------------------------------------------------------- checkpoint

struct Checkpoint {
  ModelParameters params;
  TrainConfig config;
};

inline std::string EncodeCheckpoint(const ModelParameters& params,
                                    const TrainConfig& config) {
  Json meta = {{"config", ConfigToJson(config)},
               {"seed", config.seed},
               {"model_dims",
                {{"input_dim", params.dims.input_dim},
                 {"hidden", params.dims.hidden},
                 {"head_hidden", params.dims.head_hidden},
                 {"phi_dim", params.dims.phi_dim}}}};
  detail::ByteWriter w;
  w.raw(kCheckpointMagic.data(), 4);
  w.u32(kCheckpointVersion);
  const std::string meta_text = meta.dump();
  w.u64(meta_text.size());
  w.raw(meta_text.data(), meta_text.size());
  std::uint32_t count = 0;
  params.for_each_tensor([&](const std::string&, const Matrix&) { ++count; });
  w.u32(count);
  params.for_each_tensor([&](const std::string& name, const Matrix& m) {
    w.str(name);
    w.u64(m.rows());
    w.u64(m.cols());
    for (double v : m.values()) w.f64(v);
  });
  w.u64(detail::Fnv1a64(w.bytes()));
  return w.bytes();
}

inline Checkpoint DecodeCheckpoint(const std::string& bytes,
                                   const std::string& source = "checkpoint") {
  detail::ByteReader r(bytes, source);
  const std::string magic = r.raw(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), kCheckpointMagic.begin())) {
    throw Error(ErrorCode::kBadMagic, source + ": not an AVSC checkpoint");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kVersionUnsupported,
                source + ": checkpoint version " + std::to_string(version) +
                    ", this build reads " + std::to_string(kCheckpointVersion));
  }
  if (bytes.size() < 16) {
    throw Error(ErrorCode::kTruncatedFile, source + ": too short");
  }
  const std::string_view body(bytes.data(), bytes.size() - 8);
  detail::ByteReader tail(bytes, source);
  tail.raw(bytes.size() - 8, "body");
  if (detail::Fnv1a64(body) != tail.u64("checksum")) {
    throw Error(ErrorCode::kChecksumMismatch, source + ": checksum mismatch");
  }

  const std::uint64_t meta_len = r.u64("metadata length");
  Json meta;
  try {
    meta = Json::parse(r.raw(meta_len, "metadata"));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, source + ": metadata: " + e.what());
  }
  Checkpoint ck;
  ck.config = ConfigFromJson(meta.at("config"));
  ModelDims dims;
  try {
    const Json& d = meta.at("model_dims");
    dims = {d.at("input_dim").get<std::size_t>(), d.at("hidden").get<std::size_t>(),
            d.at("head_hidden").get<std::size_t>(),
            d.at("phi_dim").get<std::size_t>()};
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, source + ": model_dims: " + e.what());
  }
  ck.params = ModelParameters::Zeros(dims);
  std::uint32_t expected = 0;
  ck.params.for_each_tensor([&](const std::string&, const Matrix&) { ++expected; });
  const std::uint32_t count = r.u32("tensor count");
  if (count != expected) {
    throw Error(ErrorCode::kShapeMismatch,
                source + ": " + std::to_string(count) + " tensors, expected " +
                    std::to_string(expected));
  }
  ck.params.for_each_tensor([&](const std::string& name, Matrix& m) {
    const std::string stored = r.str("tensor name");
    if (stored != name) {
      throw Error(ErrorCode::kParseError,
                  source + ": tensor '" + stored + "' where '" + name +
                      "' was expected");
    }
    const std::uint64_t rows = r.u64("rows");
    const std::uint64_t cols = r.u64("cols");
    if (rows != m.rows() || cols != m.cols()) {
      throw Error(ErrorCode::kShapeMismatch, source + ": tensor " + name);
    }
    for (double& v : m.values()) v = r.f64("tensor data");
  });
  if (r.remaining() != 8) {
    throw Error(ErrorCode::kParseError, source + ": unexpected trailing bytes");
  }
  ck.params.validate();
  return ck;
}

inline void SaveCheckpoint(const ModelParameters& params,
                           const TrainConfig& config,
                           const std::filesystem::path& path) {
  detail::WriteFileBytes(path, EncodeCheckpoint(params, config));
}

inline Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  return DecodeCheckpoint(detail::ReadFileBytes(path), path.string());
}

// ----------------------------------------------------------------- outputs

inline Json SummaryToJson(const SummaryMask& s, double budget) {
  Json shots = Json::array();
  for (std::size_t idx : s.selected_shots)
    shots.push_back({s.shots[idx].start, s.shots[idx].end});
  return {{"n_frames", s.selected.size()},
          {"budget", budget},
          {"budget_frames", s.budget_frames},
          {"selected_frames", CountSelected(s.selected)},
          {"shots", shots}};
}

// Rebuilds a frame mask from a summary document.
inline FrameMask SummaryMaskFromJson(const Json& j) {
  try {
    const std::size_t n = j.at("n_frames").get<std::size_t>();
    FrameMask mask(n, false);
    for (const Segment& s : SegmentsFromJson(j.at("shots"), "shots")) {
      if (s.start >= s.end || s.end > n) {
        throw Error(ErrorCode::kParseError, "shot outside [0, n_frames)");
      }
      for (std::size_t f = s.start; f < s.end; ++f) mask[f] = true;
    }
    return mask;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("summary: ") + e.what());
  }
}

inline std::string FormatDouble(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

// One `key=value` line per field.
inline std::string ReportToKeyValue(const EvalReport& r) {
  std::ostringstream out;
  out << "f1=" << FormatDouble(r.f1) << "\n";
  out << "precision=" << FormatDouble(r.precision) << "\n";
  out << "recall=" << FormatDouble(r.recall) << "\n";
  for (std::size_t u = 0; u < r.per_user_f1.size(); ++u)
    out << "user" << u << ".f1=" << FormatDouble(r.per_user_f1[u]) << "\n";
  auto dist = [&](const char* key, const std::optional<ScaleDistribution>& d) {
    if (!d) return;
    for (std::size_t s = 0; s < d->size(); ++s)
      out << key << ".scale" << s << "=" << FormatDouble((*d)[s]) << "\n";
  };
  dist("summary_distribution", r.summary_distribution);
  dist("video_distribution", r.video_distribution);
  if (r.accuracy) out << "accuracy=" << FormatDouble(*r.accuracy) << "\n";
  if (r.chance) out << "chance=" << FormatDouble(*r.chance) << "\n";
  return out.str();
}

inline Json HistoryToJson(const TrainHistory& h) {
  Json epochs = Json::array();
  for (const EpochRecord& e : h.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"summarization_loss", e.summarization},
                      {"actionness_loss", e.regularizer},
                      {"joint_loss", e.joint},
                      {"validation_f1", e.validation_f1}});
  }
  return {{"epochs", epochs},
          {"stopping_epoch", h.stopping_epoch},
          {"best_epoch", h.best_epoch},
          {"best_validation_f1", h.best_validation_f1}};
}

inline std::string FormatEpochLine(const EpochRecord& e) {
  std::ostringstream ss;
  ss << "epoch " << e.epoch << " S=" << std::setprecision(6) << e.summarization
     << " R=" << e.regularizer << " joint=" << e.joint
     << " val_f1=" << e.validation_f1 << " time=" << std::setprecision(3)
     << e.seconds << "s";
  return ss.str();
}

}  // namespace actsum

#endif  // ACTSUM_IO_HPP_
