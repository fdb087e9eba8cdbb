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

// Command-line front end: segmentation, oracle labels, synthetic data,
// training, summarization, evaluation and analysis tables.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "actsum.hpp"

namespace {

namespace fs = std::filesystem;
using namespace actsum;

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string config_path;
  double budget = kDefaultBudget;
  double lambda = 0.003;
  std::string mode = "average";
  CLI::Option* seed_opt = nullptr;
  CLI::Option* budget_opt = nullptr;
  CLI::Option* lambda_opt = nullptr;
};

// Defaults, then the config file, then flags given on the command line.
TrainConfig ResolveConfig(const GlobalOptions& g) {
  TrainConfig c;
  if (!g.config_path.empty()) c = ConfigFromJson(ReadJsonFile(g.config_path), c);
  if (g.seed_opt->count() > 0) c.seed = g.seed;
  if (g.budget_opt->count() > 0) c.budget = g.budget;
  if (g.lambda_opt->count() > 0) c.lambda = g.lambda;
  return c;
}

CombineMode ParseMode(const std::string& mode) {
  return mode == "max" ? CombineMode::kMax : CombineMode::kAverage;
}

void PrintResolved(const TrainConfig& c, const GlobalOptions& g) {
  Json j = ConfigToJson(c);
  j["mode"] = g.mode;
  std::cerr << "seed: " << c.seed << "\n"
            << "config: " << j.dump() << "\n";
}

// Writes `text` to `path`, or to stdout when the path is empty or "-".
void Emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  if (fs::path(path).has_parent_path())
    fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path);
}

std::string Dump(const Json& j) { return j.dump(2) + "\n"; }

Json SegmentsDocument(const SegmentList& segments, std::size_t n) {
  return {{"n_frames", n}, {"segments", SegmentsToJson(segments)}};
}

SegmentList LoadShots(const std::string& path) {
  const Json j = ReadJsonFile(path);
  if (!j.is_object() || !j.contains("segments")) {
    throw Error(ErrorCode::kParseError, path + ": missing field 'segments'");
  }
  return SegmentsFromJson(j.at("segments"), path + ": segments");
}

std::vector<int> RankValues(std::span<const ActionnessRank> ranks) {
  std::vector<int> out;
  for (ActionnessRank r : ranks) out.push_back(r.value());
  return out;
}

// ------------------------------------------------------------ subcommands

struct SegmentArgs {
  std::string features;
  std::size_t max_segments = 0;
  std::optional<double> penalty;
  std::string out;
};

void RunSegment(const SegmentArgs& a, const TrainConfig& c) {
  const Matrix x = LoadFeatures(a.features);
  KtsOptions opts;
  opts.max_segments = a.max_segments;
  opts.penalty = a.penalty.value_or(c.kts_penalty);
  const SegmentList segs = KtsSegment(x, opts);
  Emit(Dump(SegmentsDocument(segs, x.rows())), a.out);
  std::cerr << "segments: " << segs.size() << "\n";
}

struct OracleArgs {
  std::string annotations;
  std::string out;
};

void RunOracle(const OracleArgs& a, const TrainConfig& c) {
  const AnnotationSet set = LoadAnnotations(a.annotations);
  const OracleLabels labels = BuildOracleLabels(set, c.smoothing);
  const OracleTrace trace = OracleSummaryTrace(set.users, set.segments);
  Json j = {{"video_id", set.video_id},
            {"n_frames", set.n_frames},
            {"summary_frames", SelectedFrames(labels.summary_mask)},
            {"picked_segments", trace.picked},
            {"mean_f1_trace", trace.mean_f1},
            {"segment_ranks", RankValues(labels.segment_ranks)},
            {"frame_ranks", RankValues(labels.frame_ranks)},
            {"smoothed", labels.smoothed}};
  Emit(Dump(j), a.out);
}

struct SyntheticArgs {
  std::string out;
  SyntheticSpec spec;
};

void RunGenSynthetic(const SyntheticArgs& a, const TrainConfig& c) {
  const auto corpus = GenerateSynthetic(a.spec, c.seed);
  WriteSynthetic(corpus, a.out);
  std::cerr << "wrote " << corpus.size() << " videos to " << a.out << "\n";
}

struct TrainArgs {
  std::string data;
  std::string out;
  std::string history;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> patience;
  std::optional<double> learning_rate;
  std::optional<double> val_ratio;
  std::optional<std::string> subset_mode;
};

void RunTrain(const TrainArgs& a, TrainConfig c, const GlobalOptions& g) {
  if (a.epochs) c.max_epochs = *a.epochs;
  if (a.patience) c.patience = *a.patience;
  if (a.learning_rate) c.learning_rate = *a.learning_rate;
  if (a.val_ratio) c.val_ratio = *a.val_ratio;
  if (a.subset_mode) {
    c.subset_mode = *a.subset_mode == "deterministic" ? SubsetMode::kDeterministic
                                                      : SubsetMode::kStochastic;
  }
  PrintResolved(c, g);
  const std::vector<Video> videos = LoadDataset(a.data, c.smoothing);
  DatasetSplit split;
  const TrainResult result = TrainWithSplit(
      videos, c, [](const EpochRecord& e) { std::cerr << FormatEpochLine(e) << "\n"; },
      &split);
  SaveCheckpoint(result.params, c, a.out);
  Json history = HistoryToJson(result.history);
  std::vector<std::string> train_ids, val_ids;
  for (std::size_t i : split.train) train_ids.push_back(videos[i].id);
  for (std::size_t i : split.validation) val_ids.push_back(videos[i].id);
  history["train_videos"] = train_ids;
  history["validation_videos"] = val_ids;
  const std::string history_path = a.history.empty() ? a.out + ".history.json" : a.history;
  WriteJsonFile(history, history_path);
  std::cout << "stopping_epoch=" << result.history.stopping_epoch << "\n"
            << "best_epoch=" << result.history.best_epoch << "\n"
            << "best_validation_f1=" << FormatDouble(result.history.best_validation_f1)
            << "\n";
}

struct SummarizeArgs {
  std::string model;
  std::string features;
  std::string shots;
  std::string annotations;
  std::string out;
};

void RunSummarize(const SummarizeArgs& a, const TrainConfig& c) {
  const Checkpoint ck = LoadCheckpoint(a.model);
  const Matrix x = LoadFeatures(a.features);
  SegmentList shots;
  if (!a.shots.empty()) {
    shots = LoadShots(a.shots);
  } else if (!a.annotations.empty()) {
    shots = LoadAnnotations(a.annotations).segments;
  } else {
    shots = KtsSegment(x, {0, c.kts_penalty});
  }
  const SummaryMask s = GenerateSummary(ck.params, x, shots, c.budget);
  Emit(Dump(SummaryToJson(s, c.budget)), a.out);
}

struct EvaluateArgs {
  std::string summary;
  std::string annotations;
  std::string model;
  std::string data;
  std::size_t baseline_draws = 100;
  std::string out;
};

void RunEvaluate(const EvaluateArgs& a, const TrainConfig& c,
                 const GlobalOptions& g) {
  const CombineMode mode = ParseMode(g.mode);
  if (!a.summary.empty()) {
    if (a.annotations.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "--summary needs --annotations");
    }
    const FrameMask pred = SummaryMaskFromJson(ReadJsonFile(a.summary));
    const AnnotationSet set = LoadAnnotations(a.annotations);
    std::vector<FrameMask> refs;
    for (const UserAnnotation& u : set.users) refs.push_back(u.summary);
    EvalReport r = KeyshotF1(pred, refs, mode);
    const OracleLabels labels = BuildOracleLabels(set, c.smoothing);
    if (CountSelected(pred) > 0)
      r.summary_distribution = ActionnessDistribution(labels.frame_ranks, &pred);
    r.video_distribution = ActionnessDistribution(labels.frame_ranks);
    Emit(ReportToKeyValue(r), a.out);
    return;
  }
  if (a.model.empty() || a.data.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "give --summary with --annotations, or --model with --data");
  }
  const Checkpoint ck = LoadCheckpoint(a.model);
  const std::vector<Video> videos = LoadDataset(a.data, c.smoothing);
  EvaluationOptions opts;
  opts.budget = c.budget;
  opts.mode = mode;
  opts.baseline_draws = a.baseline_draws;
  opts.seed = c.seed;
  const DatasetEvaluation e = EvaluateModel(ck.params, videos, opts);
  std::string text = "videos=" + std::to_string(e.videos) + "\n" +
                     "frames=" + std::to_string(e.frames) + "\n" +
                     ReportToKeyValue(e.report);
  for (std::size_t i = 0; i < videos.size(); ++i)
    text += "video." + videos[i].id + ".f1=" + FormatDouble(e.per_video_f1[i]) + "\n";
  if (a.baseline_draws > 0)
    text += "random_baseline_f1=" + FormatDouble(e.random_baseline_f1) + "\n";
  Emit(text, a.out);
}

struct AnalyzeArgs {
  std::string data;
  std::string model;
  std::string out;
};

// Tab-separated tables: per-user rank frequency, consensus f1 per scale, and
// scale distributions over videos, reference summaries and (with a model)
// generated summaries.
void RunAnalyze(const AnalyzeArgs& a, const TrainConfig& c) {
  const std::vector<Video> videos = LoadDataset(a.data, c.smoothing);
  std::ostringstream out;
  out << "# rank_frequency\nvideo\tuser\tscale0\tscale1\tscale2\tscale3\n";
  for (const Video& v : videos) {
    const auto hist = RankFrequency(v.annotations);
    for (std::size_t u = 0; u < hist.size(); ++u) {
      out << v.id << "\t" << u;
      for (double x : hist[u]) out << "\t" << FormatDouble(x);
      out << "\n";
    }
  }
  out << "\n# consensus_f1\nvideo\tscale0\tscale1\tscale2\tscale3\toverall\n";
  for (const Video& v : videos) {
    if (v.annotations.users.size() < 2) continue;
    const ConsensusReport r = PairwiseConsensusF1(v.annotations);
    out << v.id;
    for (const auto& s : r.per_scale) out << "\t" << (s ? FormatDouble(*s) : "nan");
    out << "\t" << FormatDouble(r.overall) << "\n";
  }

  std::vector<ActionnessRank> ranks;
  FrameMask oracle_summary, user_summaries_all;
  std::vector<ActionnessRank> user_ranks;
  FrameMask generated;
  std::optional<Checkpoint> ck;
  if (!a.model.empty()) ck = LoadCheckpoint(a.model);
  for (const Video& v : videos) {
    ranks.insert(ranks.end(), v.labels.frame_ranks.begin(), v.labels.frame_ranks.end());
    oracle_summary.insert(oracle_summary.end(), v.labels.summary_mask.begin(),
                          v.labels.summary_mask.end());
    for (const UserAnnotation& u : v.annotations.users) {
      user_summaries_all.insert(user_summaries_all.end(), u.summary.begin(),
                                u.summary.end());
      const auto fr = SegmentToFrameRanks(u.segment_ranks, v.segments());
      user_ranks.insert(user_ranks.end(), fr.begin(), fr.end());
    }
    if (ck) {
      const SummaryMask s = GenerateSummary(ck->params, v.features, v.segments(), c.budget);
      generated.insert(generated.end(), s.selected.begin(), s.selected.end());
    }
  }
  out << "\n# scale_distribution\nset\tscale0\tscale1\tscale2\tscale3\n";
  auto row = [&](const std::string& name, const ScaleDistribution& d) {
    out << name;
    for (double x : d) out << "\t" << FormatDouble(x);
    out << "\n";
  };
  row("full_video", ActionnessDistribution(ranks));
  if (CountSelected(oracle_summary) > 0)
    row("oracle_summary", ActionnessDistribution(ranks, &oracle_summary));
  if (CountSelected(user_summaries_all) > 0)
    row("user_summaries", ActionnessDistribution(user_ranks, &user_summaries_all));
  if (ck && CountSelected(generated) > 0)
    row("generated_summary", ActionnessDistribution(ranks, &generated));
  Emit(out.str(), a.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Actionness-regularized video summarization"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  g.seed_opt = app.add_option("--seed", g.seed, "Run seed (default 0)");
  app.add_option("--config", g.config_path, "JSON file with training configuration")
      ->check(CLI::ExistingFile);
  g.budget_opt = app.add_option("--budget", g.budget, "Summary length budget")
                     ->capture_default_str();
  g.lambda_opt = app.add_option("--lambda", g.lambda, "Actionness loss weight")
                     ->capture_default_str();
  app.add_option("--mode", g.mode, "Combine f1 across users")
      ->check(CLI::IsMember({"average", "max"}))
      ->capture_default_str();

  SegmentArgs seg;
  auto* seg_cmd = app.add_subcommand("segment", "Kernel temporal segmentation of a feature file");
  seg_cmd->add_option("--features", seg.features, "Feature file (.avsf)")
      ->required()->check(CLI::ExistingFile);
  seg_cmd->add_option("--max-segments", seg.max_segments,
                      "Upper bound on segments; 0 means ceil(n/10)");
  seg_cmd->add_option("--penalty", seg.penalty, "Segment-count penalty weight");
  seg_cmd->add_option("--out", seg.out, "Output JSON (default stdout)");

  OracleArgs ora;
  auto* ora_cmd = app.add_subcommand("oracle", "Consensus labels from user annotations");
  ora_cmd->add_option("--annotations", ora.annotations, "Annotation file (.json)")
      ->required()->check(CLI::ExistingFile);
  ora_cmd->add_option("--out", ora.out, "Output JSON (default stdout)");

  SyntheticArgs syn;
  auto* syn_cmd = app.add_subcommand("gen-synthetic", "Write a synthetic corpus");
  syn_cmd->add_option("--out", syn.out, "Output directory")->required();
  syn_cmd->add_option("--videos", syn.spec.n_videos, "Number of videos")->capture_default_str();
  syn_cmd->add_option("--min-frames", syn.spec.min_frames)->capture_default_str();
  syn_cmd->add_option("--max-frames", syn.spec.max_frames)->capture_default_str();
  syn_cmd->add_option("--dim", syn.spec.dim, "Feature dimension")->capture_default_str();
  syn_cmd->add_option("--key-segments", syn.spec.n_key_segments,
                      "Planted segments per video; 0 means round(n/10)");
  syn_cmd->add_option("--noise", syn.spec.noise_level, "Feature noise level")
      ->capture_default_str();
  syn_cmd->add_option("--users", syn.spec.n_users, "Annotators per video")
      ->capture_default_str();

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train", "Train on a directory of <id>.avsf/<id>.json pairs");
  tr_cmd->add_option("--data", tr.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  tr_cmd->add_option("--out", tr.out, "Checkpoint path (.avsc)")->required();
  tr_cmd->add_option("--history", tr.history, "History JSON (default <out>.history.json)");
  tr_cmd->add_option("--epochs", tr.epochs, "Maximum epochs");
  tr_cmd->add_option("--patience", tr.patience, "Early-stopping patience");
  tr_cmd->add_option("--lr", tr.learning_rate, "Adam learning rate");
  tr_cmd->add_option("--val-ratio", tr.val_ratio, "Validation fraction");
  tr_cmd->add_option("--subset-mode", tr.subset_mode, "DPP target subset sampling")
      ->check(CLI::IsMember({"stochastic", "deterministic"}));

  SummarizeArgs sum;
  auto* sum_cmd = app.add_subcommand("summarize", "Select keyshots for one video");
  sum_cmd->add_option("--model", sum.model, "Checkpoint (.avsc)")->required()->check(CLI::ExistingFile);
  sum_cmd->add_option("--features", sum.features, "Feature file (.avsf)")
      ->required()->check(CLI::ExistingFile);
  auto* shots_opt = sum_cmd->add_option("--shots", sum.shots, "Segments JSON from `segment`")
                        ->check(CLI::ExistingFile);
  sum_cmd->add_option("--annotations", sum.annotations, "Take shots from an annotation file")
      ->check(CLI::ExistingFile)->excludes(shots_opt);
  sum_cmd->add_option("--out", sum.out, "Output JSON (default stdout)");

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Score summaries against user annotations");
  ev_cmd->add_option("--summary", ev.summary, "Summary JSON from `summarize`")->check(CLI::ExistingFile);
  ev_cmd->add_option("--annotations", ev.annotations, "Annotation file for --summary")
      ->check(CLI::ExistingFile);
  ev_cmd->add_option("--model", ev.model, "Checkpoint to evaluate on --data")->check(CLI::ExistingFile);
  ev_cmd->add_option("--data", ev.data, "Dataset directory")->check(CLI::ExistingDirectory);
  ev_cmd->add_option("--baseline-draws", ev.baseline_draws,
                     "Random-shot summaries per video (0 disables)")
      ->capture_default_str();
  ev_cmd->add_option("--out", ev.out, "Output key=value file (default stdout)");

  AnalyzeArgs an;
  auto* an_cmd = app.add_subcommand("analyze", "Rank-frequency, consensus and distribution tables");
  an_cmd->add_option("--data", an.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  an_cmd->add_option("--model", an.model, "Optional checkpoint for generated summaries")
      ->check(CLI::ExistingFile);
  an_cmd->add_option("--out", an.out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const TrainConfig config = ResolveConfig(g);
    config.validate();
    if (*tr_cmd) {
      RunTrain(tr, config, g);  // prints the config after train-only overrides
      return 0;
    }
    PrintResolved(config, g);
    if (*seg_cmd) RunSegment(seg, config);
    if (*ora_cmd) RunOracle(ora, config);
    if (*syn_cmd) RunGenSynthetic(syn, config);
    if (*sum_cmd) RunSummarize(sum, config);
    if (*ev_cmd) RunEvaluate(ev, config, g);
    if (*an_cmd) RunAnalyze(an, config);
  } catch (const Error& e) {
    std::cerr << "actsum: error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "actsum: error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
