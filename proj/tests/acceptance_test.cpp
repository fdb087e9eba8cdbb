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

// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "actsum.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace {

using namespace actsum;
using namespace actsum::testing;

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void Run(const std::string& name, double time_limit_s,
         const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  const bool in_time = secs < time_limit_s;
  const bool ok = out.passed && in_time;
  if (!ok) ++failures;
  std::ostringstream line;
  line << (ok ? "PASS" : "FAIL") << "  " << name << "  " << out.detail
       << "  time=" << std::fixed << std::setprecision(2) << secs << "s"
       << " (limit " << std::setprecision(0) << time_limit_s << "s"
       << (in_time ? "" : ", exceeded") << ")";
  std::cout << line.str() << std::endl;
}

std::string Fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

Outcome DppNormalization() {
  Rng rng(20240501);
  double worst = 0.0;
  double worst_oracle = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = 1 + rng.below(10);
    // Rank varies so that some kernels have singular minors.
    const std::size_t rank = 1 + rng.below(n + 2);
    const Matrix phi = RandomMatrix(n, rank, rng);
    std::vector<double> q(n);
    for (double& v : q) v = rng.uniform(0.2, 2.0);
    const DppKernel kernel = BuildDppKernel(phi, q);
    Matrix shifted = kernel.L;
    for (std::size_t i = 0; i < n; ++i) shifted(i, i) += 1.0;
    const double normalizer = DeterminantByElimination(shifted);
    double prob_total = 0.0;
    double det_total = 0.0;
    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
      const auto y = SubsetFromMask(mask, n);
      det_total += y.empty() ? 1.0 : DeterminantByElimination(Submatrix(kernel.L, y, y));
      try {
        prob_total += std::exp(-DppMleLoss(kernel, y));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kSingularSubset) throw;
      }
    }
    worst = std::max(worst, std::abs(prob_total - 1.0));
    worst_oracle = std::max(worst_oracle, std::abs(det_total / normalizer - 1.0));
  }
  return {worst <= 1e-8 && worst_oracle <= 1e-8,
          "kernels=50 max|sum P(y)-1|=" + Fmt(worst, 3) +
              " max_rel(sum det L_y, det(L+I))=" + Fmt(worst_oracle, 3) +
              " tol=1e-8"};
}

Outcome GradientFidelity() {
  double worst = 0.0;
  bool all = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ToyProblem toy = MakeToyProblem(seed, 8);
    const LossOptions opts{0.003, false};
    const auto analytic =
        ModelBackward(toy.params, toy.features, toy.targets, opts).gradient.flatten();
    ModelParameters probe = toy.params;
    auto f = [&](std::span<const double> theta) {
      probe.unflatten(theta);
      return EvaluateLoss(probe, toy.features, toy.targets, opts).joint;
    };
    const GradCheckReport r = GradCheck(f, analytic, toy.params.flatten(), 1e-5, 1e-4);
    worst = std::max(worst, r.max_rel_error);
    all = all && r.passed;
  }
  return {all, "seeds=10 frames=8 d=6 hidden=5 lambda=0.003 max_rel_error=" +
                   Fmt(worst, 3) + " tol=1e-4"};
}

double IndexOrderValue(const std::vector<double>& values,
                       const std::vector<std::size_t>& set) {
  double v = 0.0;
  for (std::size_t i : set) v += values[i];
  return v;
}

Outcome KnapsackExactness() {
  Rng rng(77);
  int value_mismatch = 0;
  int set_mismatch = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 1 + rng.below(15);
    std::vector<double> values(k);
    std::vector<std::size_t> lengths(k);
    for (std::size_t i = 0; i < k; ++i) {
      values[i] = t % 2 == 0 ? static_cast<double>(rng.below(5)) : rng.uniform();
      lengths[i] = 1 + rng.below(10);
    }
    const std::size_t budget = rng.below(40);
    const auto got = KnapsackSelect(values, lengths, budget);
    const Choice want = ExhaustiveKnapsack(values, lengths, budget);
    std::size_t used = 0;
    for (std::size_t i : got) used += lengths[i];
    if (used > budget || IndexOrderValue(values, got) != want.value) ++value_mismatch;
    if (got != want.set) ++set_mismatch;
  }
  // Crafted ties.
  bool ties = true;
  ties &= KnapsackSelect(std::vector<double>{3, 2, 2},
                         std::vector<std::size_t>{5, 5, 5}, 10) ==
          std::vector<std::size_t>{0, 1};
  ties &= KnapsackSelect(std::vector<double>{1, 1},
                         std::vector<std::size_t>{4, 2}, 4) ==
          std::vector<std::size_t>{1};
  ties &= KnapsackSelect(std::vector<double>{2, 1, 1},
                         std::vector<std::size_t>{2, 1, 1}, 2) ==
          std::vector<std::size_t>{0};
  ties &= KnapsackSelect(std::vector<double>{1, 1, 1},
                         std::vector<std::size_t>{3, 3, 3}, 6) ==
          std::vector<std::size_t>{0, 1};
  return {value_mismatch == 0 && set_mismatch == 0 && ties,
          "instances=200 value_mismatches=" + std::to_string(value_mismatch) +
              " tie_rule_mismatches=" + std::to_string(set_mismatch) +
              " crafted_ties=" + (ties ? "ok" : "wrong")};
}

Outcome KtsExactness() {
  Rng rng(4242);
  int mismatches = 0;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.below(12);
    const std::size_t max_m = 1 + rng.below(4);  // at most 3 boundaries
    const double penalty = t % 4 == 0 ? 0.0 : rng.uniform(0.0, 1.0);
    const Matrix kernel = NormalizedGram(RandomMatrix(n, 1 + rng.below(4), rng));
    const SegmentList dp = KtsSegmentKernel(kernel, {max_m, penalty});
    const BruteForceResult bf = BruteForceKts(kernel, max_m, penalty);
    const double gap = std::abs(KtsObjective(kernel, dp, penalty) - bf.objective);
    worst = std::max(worst, gap);
    if (gap > 1e-9 || dp != bf.segments) ++mismatches;
  }
  // Two noisy clusters of 6 and 4 frames along orthogonal directions.
  Matrix x(10, 4);
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t k = 0; k < 4; ++k) x(i, k) = 0.05 * rng.normal();
    x(i, i < 6 ? 0 : 1) += 1.0;
  }
  const SegmentList planted = KtsSegment(x, {3, 1.0});
  const bool recovered = planted == SegmentList{{0, 6}, {6, 10}};
  return {mismatches == 0 && recovered,
          "sequences=100 mismatches=" + std::to_string(mismatches) +
              " max_objective_gap=" + Fmt(worst, 3) +
              " planted_boundary=" + (recovered ? "recovered" : "missed")};
}

Outcome OracleLabelCorrectness() {
  Rng rng(99);
  int single_failures = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<std::size_t> lengths(1 + rng.below(10));
    for (auto& l : lengths) l = 1 + rng.below(8);
    const SegmentList segs = SegmentsFromLengths(lengths);
    std::vector<std::size_t> chosen;
    for (std::size_t s = 0; s < segs.size(); ++s)
      if (rng.uniform() < 0.4) chosen.push_back(s);
    std::vector<ActionnessRank> ranks(segs.size(), ActionnessRank(0));
    UserAnnotation u;
    u.summary = MaskFromSegments(segs, chosen, segs.back().end);
    u.segment_ranks = ranks;
    if (OracleSummary(std::vector<UserAnnotation>{u}, segs) != u.summary)
      ++single_failures;
  }
  int monotone_failures = 0;
  int optimal = 0;
  int gapped = 0;
  int above_best = 0;
  double max_gap = 0.0;
  for (int t = 0; t < 100; ++t) {
    std::vector<std::size_t> lengths(2 + rng.below(9));
    for (auto& l : lengths) l = 1 + rng.below(6);
    const SegmentList segs = SegmentsFromLengths(lengths);
    const std::size_t n = segs.back().end;
    std::vector<UserAnnotation> users(2 + rng.below(4));
    for (auto& u : users) {
      u.summary = FrameMask(n, false);
      for (std::size_t f = 0; f < n; ++f) u.summary[f] = rng.uniform() < 0.3;
      u.segment_ranks.assign(segs.size(), ActionnessRank(0));
    }
    const OracleTrace tr = OracleSummaryTrace(users, segs);
    for (std::size_t i = 1; i < tr.mean_f1.size(); ++i)
      if (!(tr.mean_f1[i] > tr.mean_f1[i - 1])) ++monotone_failures;
    const double greedy = MeanF1(tr.mask, users);
    const double best = ExhaustiveBestMeanF1(users, segs);
    if (greedy > best + 1e-12) ++above_best;
    const double gap = best - greedy;
    if (gap > 1e-12) {
      ++gapped;
      max_gap = std::max(max_gap, gap);
      std::cout << "  note: greedy below exhaustive optimum, case " << t
                << " segments=" << segs.size() << " users=" << users.size()
                << " gap=" << Fmt(gap) << std::endl;
    } else {
      ++optimal;
    }
  }
  return {single_failures == 0 && monotone_failures == 0 && above_best == 0,
          "single_user_exact=" + std::to_string(100 - single_failures) +
              "/100 monotone_violations=" + std::to_string(monotone_failures) +
              " greedy_optimal=" + std::to_string(optimal) +
              "/100 reported_gaps=" + std::to_string(gapped) +
              " max_gap=" + Fmt(max_gap)};
}

Outcome MetricHandCases() {
  FrameMask pred(40, false), gt(40, false);
  for (std::size_t i = 0; i < 10; ++i) pred[i] = true;
  for (std::size_t i = 5; i < 25; ++i) gt[i] = true;
  const double f1 = KeyshotF1(pred, std::vector<FrameMask>{gt}).f1;
  const std::size_t n = 13;
  Matrix t(n, 4);
  for (std::size_t i = 0; i < n; ++i) t(i, i % 4) = 1.0;
  const double ce = ActionnessCrossEntropy(Matrix(n, 4, 0.25), t);
  const double dpp =
      DppMleLoss(DppKernel{Matrix::Identity(2)}, std::vector<std::size_t>{0});
  const bool ok = std::abs(f1 - 1.0 / 3.0) <= 1e-12 &&
                  std::abs(ce - n * std::log(4.0)) <= 1e-12 &&
                  std::abs(dpp - std::log(4.0)) <= 1e-12;
  return {ok, "keyshot_f1=" + Fmt(f1, 12) + " ce(n=13)=" + Fmt(ce, 12) +
                  " dpp(I2,{0})=" + Fmt(dpp, 12)};
}

struct EndToEndRun {
  DatasetEvaluation eval;
  TrainHistory history;
  std::string checkpoint;
  std::string report;
  double seconds = 0.0;
};

EndToEndRun RunEndToEnd(std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  SyntheticSpec spec;
  spec.n_videos = 20;
  const std::vector<Video> videos = ToVideos(GenerateSynthetic(spec, seed));
  TrainConfig config;  // lambda 0.003, lr 0.001, 100 epochs, patience 5, 20%
  config.seed = seed;
  DatasetSplit split;
  const TrainResult result = TrainWithSplit(videos, config, {}, &split);
  std::vector<Video> validation;
  for (std::size_t i : split.validation) validation.push_back(videos[i]);
  EvaluationOptions opts;
  opts.budget = config.budget;
  opts.baseline_draws = 100;
  opts.seed = seed;
  EndToEndRun run;
  run.eval = EvaluateModel(result.params, validation, opts);
  run.history = result.history;
  run.checkpoint = EncodeCheckpoint(result.params, config);
  run.report = ReportToKeyValue(run.eval.report) +
               "random_baseline_f1=" + FormatDouble(run.eval.random_baseline_f1) +
               "\n" + HistoryToJson(result.history).dump();
  run.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

}  // namespace

int main() {
  std::cout << "acceptance criteria" << std::endl;
  Run("dpp_normalization", 5, DppNormalization);
  Run("gradient_fidelity", 30, GradientFidelity);
  Run("knapsack_exactness", 10, KnapsackExactness);
  Run("kts_exactness", 10, KtsExactness);
  Run("oracle_label_correctness", 20, OracleLabelCorrectness);
  Run("metric_hand_cases", 1, MetricHandCases);

  std::vector<EndToEndRun> runs;
  Run("end_to_end_synthetic", 600, [&]() -> Outcome {
    int good = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      runs.push_back(RunEndToEnd(seed));
      const EndToEndRun& r = runs.back();
      const double f1 = r.eval.report.f1;
      const double base = r.eval.random_baseline_f1;
      const double acc = *r.eval.report.accuracy;
      const double chance = *r.eval.report.chance;
      const bool ok = f1 >= base + 0.10 && acc > chance;
      good += ok ? 1 : 0;
      std::cout << "  seed " << seed << ": val_f1=" << Fmt(f1)
                << " random_f1=" << Fmt(base) << " accuracy=" << Fmt(acc)
                << " chance=" << Fmt(chance) << " epochs="
                << r.history.stopping_epoch << " best_epoch="
                << r.history.best_epoch << " time=" << Fmt(r.seconds, 3) << "s"
                << (ok ? "" : "  [below target]") << std::endl;
    }
    return {good >= 4, "seeds_meeting_targets=" + std::to_string(good) +
                           "/5 (need 4; f1 >= random+0.10 and accuracy > chance)"};
  });

  Run("scale3_summary_shape", 1, [&]() -> Outcome {
    if (runs.size() != 5) return {false, "end-to-end runs unavailable"};
    int good = 0;
    std::string shares;
    for (const EndToEndRun& r : runs) {
      const auto& s = r.eval.report.summary_distribution;
      const auto& v = r.eval.report.video_distribution;
      const bool ok = s && v && (*s)[3] > (*v)[3];
      good += ok ? 1 : 0;
      shares += " " + (s ? Fmt((*s)[3], 3) : std::string("n/a")) + ">" +
                (v ? Fmt((*v)[3], 3) : std::string("n/a"));
    }
    return {good >= 4, "seeds_meeting_targets=" + std::to_string(good) +
                           "/5 summary>video scale-3 share:" + shares};
  });

  Run("determinism", 600, [&]() -> Outcome {
    if (runs.empty()) return {false, "end-to-end runs unavailable"};
    const EndToEndRun again = RunEndToEnd(1);
    const bool same_ckpt = again.checkpoint == runs[0].checkpoint;
    const bool same_report = again.report == runs[0].report;
    return {same_ckpt && same_report,
            std::string("seed=1 checkpoint_bytes=") +
                (same_ckpt ? "identical" : "differ") +
                " (" + std::to_string(again.checkpoint.size()) + " bytes) report=" +
                (same_report ? "identical" : "differ")};
  });

  std::cout << (failures == 0 ? "all criteria passed" : "criteria failed: ")
            << (failures == 0 ? "" : std::to_string(failures)) << std::endl;
  return failures;
}
