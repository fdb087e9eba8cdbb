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

// Synthetic corpus with planted structure: each video is a run of segments
// whose frames scatter around a segment centroid. Centroids mix a per-scale
// prototype with a per-segment direction, so actionness is visible in the
// features. Three simulated users rank segments with small perturbations and
// build summaries dominated by scale-3 segments.

#ifndef ACTSUM_SYNTHETIC_HPP_
#define ACTSUM_SYNTHETIC_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "actsum/error.hpp"
#include "actsum/io.hpp"
#include "actsum/labels.hpp"
#include "actsum/numerics.hpp"
#include "actsum/random.hpp"
#include "actsum/summary.hpp"

namespace actsum {

struct SyntheticSpec {
  std::size_t n_videos = 20;
  std::size_t min_frames = 60;
  std::size_t max_frames = 120;
  std::size_t dim = 64;
  // Planted segments per video; 0 picks round(n / 10).
  std::size_t n_key_segments = 0;
  // Standard deviation of the per-frame noise vector's norm, relative to the
  // unit-norm centroids.
  double noise_level = 1.0;
  // Weight of the per-scale prototype in each centroid, relative to the
  // unit per-segment direction.
  double prototype_weight = 0.5;
  std::size_t n_users = 3;
  // Full-video share of frames at each scale.
  std::array<double, 4> scale_frequencies = {0.55, 0.2, 0.15, 0.1};
  // Chance that a user reports a neighbouring scale instead of the true one.
  double rank_noise = 0.2;
  double summary_budget = kDefaultBudget;
  // Minimum share of scale-3 frames in every user summary.
  double min_scale3_share = 0.6;

  void validate() const {
    auto fail = [](const std::string& what) {
      throw Error(ErrorCode::kInvalidSpec, what);
    };
    if (n_videos == 0) fail("n_videos must be >= 1");
    if (dim < 2) fail("dim must be >= 2");
    if (min_frames < 40 || max_frames > 2000 || min_frames > max_frames) {
      fail("frames_range must lie within [40, 2000]");
    }
    if (n_key_segments != 0 &&
        (n_key_segments < 2 || n_key_segments * kMinSegmentLength > min_frames)) {
      fail("n_key_segments must be in [2, min_frames / 4]");
    }
    if (!(noise_level >= 0.0) || !std::isfinite(noise_level)) {
      fail("noise_level must be >= 0");
    }
    if (!(prototype_weight >= 0.0)) fail("prototype_weight must be >= 0");
    if (n_users == 0) fail("n_users must be >= 1");
    double total = 0.0;
    for (double f : scale_frequencies) {
      if (f < 0.0) fail("scale frequencies must be >= 0");
      total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) fail("scale frequencies must sum to 1");
    if (!(rank_noise >= 0.0 && rank_noise <= 1.0)) fail("rank_noise in [0, 1]");
    if (!(summary_budget > 0.0 && summary_budget <= 1.0)) {
      fail("summary_budget in (0, 1]");
    }
  }

  static constexpr std::size_t kMinSegmentLength = 4;
};

struct SyntheticVideo {
  std::string id;
  Matrix features;
  AnnotationSet annotations;
  std::vector<ActionnessRank> planted_ranks;  // per segment
};

namespace detail {

inline std::vector<double> RandomUnit(std::size_t dim, Rng& rng) {
  std::vector<double> v(dim);
  double norm = 0.0;
  while (norm == 0.0) {
    for (double& x : v) x = rng.normal();
    norm = Norm2(v);
  }
  for (double& x : v) x /= norm;
  return v;
}

inline std::vector<std::size_t> PlantedLengths(std::size_t n, std::size_t m,
                                               Rng& rng) {
  const std::size_t min_len = SyntheticSpec::kMinSegmentLength;
  std::vector<double> w(m);
  double total = 0.0;
  for (double& x : w) {
    x = rng.uniform(0.5, 1.5);
    total += x;
  }
  const std::size_t extra = n - min_len * m;
  std::vector<std::size_t> len(m, min_len);
  std::size_t used = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto add = static_cast<std::size_t>(
        std::floor(static_cast<double>(extra) * w[i] / total));
    len[i] += add;
    used += add;
  }
  for (std::size_t i = 0; used < extra; i = (i + 1) % m, ++used) ++len[i];
  return len;
}

// Segments visited in random order each take the scale furthest below its
// frame target.
inline std::vector<int> AssignScales(const std::vector<std::size_t>& lengths,
                                     const std::array<double, 4>& freq,
                                     Rng& rng) {
  std::size_t n = 0;
  for (std::size_t l : lengths) n += l;
  std::vector<std::size_t> order(lengths.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  std::array<double, 4> assigned{};
  std::vector<int> scale(lengths.size(), 0);
  for (std::size_t s : order) {
    int best = 0;
    double best_deficit = -1e300;
    for (int r = 0; r < 4; ++r) {
      const double deficit =
          freq[static_cast<std::size_t>(r)] * static_cast<double>(n) -
          assigned[static_cast<std::size_t>(r)];
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = r;
      }
    }
    scale[s] = best;
    assigned[static_cast<std::size_t>(best)] += static_cast<double>(lengths[s]);
  }
  if (freq[3] > 0.0 && std::find(scale.begin(), scale.end(), 3) == scale.end()) {
    std::size_t shortest = 0;
    for (std::size_t s = 1; s < lengths.size(); ++s)
      if (lengths[s] < lengths[shortest]) shortest = s;
    scale[shortest] = 3;
  }
  return scale;
}

}  // namespace detail

inline std::vector<SyntheticVideo> GenerateSynthetic(const SyntheticSpec& spec,
                                                     std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  std::array<std::vector<double>, 4> prototypes;
  for (auto& p : prototypes) p = detail::RandomUnit(spec.dim, rng);
  const double noise_sd = spec.noise_level / std::sqrt(static_cast<double>(spec.dim));

  std::vector<SyntheticVideo> corpus;
  for (std::size_t v = 0; v < spec.n_videos; ++v) {
    SyntheticVideo out;
    std::ostringstream id;
    id << "video_" << std::setw(3) << std::setfill('0') << v;
    out.id = id.str();

    const std::size_t n =
        spec.min_frames +
        static_cast<std::size_t>(rng.below(spec.max_frames - spec.min_frames + 1));
    std::size_t m = spec.n_key_segments != 0
                        ? spec.n_key_segments
                        : static_cast<std::size_t>(std::lround(n / 10.0));
    m = std::clamp<std::size_t>(m, 2, n / SyntheticSpec::kMinSegmentLength);
    const std::vector<std::size_t> lengths = detail::PlantedLengths(n, m, rng);
    const std::vector<int> scales =
        detail::AssignScales(lengths, spec.scale_frequencies, rng);

    SegmentList segments;
    std::size_t start = 0;
    for (std::size_t l : lengths) {
      segments.push_back({start, start + l});
      start += l;
    }

    out.features = Matrix(n, spec.dim);
    for (std::size_t s = 0; s < m; ++s) {
      std::vector<double> centroid = detail::RandomUnit(spec.dim, rng);
      const auto& proto = prototypes[static_cast<std::size_t>(scales[s])];
      for (std::size_t k = 0; k < spec.dim; ++k)
        centroid[k] += spec.prototype_weight * proto[k];
      const double norm = Norm2(centroid);
      for (double& x : centroid) x /= norm;
      for (std::size_t f = segments[s].start; f < segments[s].end; ++f) {
        auto row = out.features.row(f);
        for (std::size_t k = 0; k < spec.dim; ++k) {
          // Round through float so in-memory and on-disk corpora agree.
          row[k] = static_cast<double>(
              static_cast<float>(centroid[k] + noise_sd * rng.normal()));
        }
      }
      out.planted_ranks.emplace_back(scales[s]);
    }

    AnnotationSet& a = out.annotations;
    a.video_id = out.id;
    a.n_frames = n;
    a.segments = segments;
    const std::size_t budget = BudgetFrames(spec.summary_budget, n);
    for (std::size_t u = 0; u < spec.n_users; ++u) {
      UserAnnotation ua;
      std::vector<int> perceived(m);
      for (std::size_t s = 0; s < m; ++s) {
        int r = scales[s];
        if (rng.uniform() < spec.rank_noise) {
          r += rng.uniform() < 0.5 ? -1 : 1;
          r = std::clamp(r, 0, 3);
        }
        perceived[s] = r;
        ua.segment_ranks.emplace_back(r);
      }
      // Highest perceived scale first, random order within a scale.
      std::vector<std::size_t> order(m);
      for (std::size_t s = 0; s < m; ++s) order[s] = s;
      rng.shuffle(std::span<std::size_t>(order));
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t x, std::size_t y) {
                         return perceived[x] > perceived[y];
                       });
      std::vector<std::size_t> chosen;
      std::size_t used = 0;
      std::size_t scale3 = 0;
      for (std::size_t s : order) {
        const std::size_t len = segments[s].length();
        if (used + len > budget) continue;
        const std::size_t s3 = scale3 + (scales[s] == 3 ? len : 0);
        if (static_cast<double>(s3) <
            spec.min_scale3_share * static_cast<double>(used + len)) {
          continue;
        }
        chosen.push_back(s);
        used += len;
        scale3 = s3;
      }
      if (chosen.empty()) {
        std::size_t pick = m;
        for (std::size_t s = 0; s < m; ++s)
          if (scales[s] == 3 &&
              (pick == m || segments[s].length() < segments[pick].length()))
            pick = s;
        chosen.push_back(pick);
      }
      ua.summary = MaskFromSegments(segments, chosen, n);
      a.users.push_back(std::move(ua));
    }
    a.validate();
    corpus.push_back(std::move(out));
  }
  return corpus;
}

inline std::vector<Video> ToVideos(const std::vector<SyntheticVideo>& corpus,
                                   SmoothingOptions smoothing = {}) {
  std::vector<Video> out;
  out.reserve(corpus.size());
  for (const SyntheticVideo& s : corpus)
    out.push_back(MakeVideo(s.id, s.features, s.annotations, smoothing));
  return out;
}

// Writes <id>.avsf and <id>.json per video into `dir` (created if needed).
inline void WriteSynthetic(const std::vector<SyntheticVideo>& corpus,
                           const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const SyntheticVideo& v : corpus) {
    SaveFeatures(v.features, dir / (v.id + ".avsf"));
    SaveAnnotations(v.annotations, dir / (v.id + ".json"));
  }
}

}  // namespace actsum

#endif  // ACTSUM_SYNTHETIC_HPP_
