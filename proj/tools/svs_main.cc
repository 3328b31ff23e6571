// Copyright (c) 2026 The SVS Toolkit Authors
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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "glog/logging.h"
#include "nlohmann/json.hpp"

#include "svs/dsp/audio.h"
#include "svs/dsp/features.h"
#include "svs/eval/metrics.h"
#include "svs/score/corpus.h"
#include "svs/trainer/checkpoint.h"
#include "svs/trainer/config.h"
#include "svs/trainer/toy_corpus.h"
#include "svs/trainer/trainer.h"

namespace fs = std::filesystem;
using namespace svs;

namespace {

struct Lexicons {
  score::PhonemeLexicon lexicon;
  std::unique_ptr<score::GraphemeToPhoneme> g2p;
};

Lexicons lexicons(const trainer::TrainConfig& config) {
  Lexicons l{config.lexicon_path.empty()
                 ? score::PhonemeLexicon::standard()
                 : score::PhonemeLexicon::load(config.lexicon_path),
             nullptr};
  l.g2p = std::make_unique<score::SyllableTable>(
      config.syllables_path.empty() ? score::SyllableTable::toy()
                                    : score::SyllableTable::load(config.syllables_path));
  return l;
}

trainer::TrainConfig config_or_default(const std::string& path) {
  return path.empty() ? trainer::TrainConfig{} : trainer::load_config(path);
}

std::vector<score::PreparedUtterance> load_corpus(const trainer::TrainConfig& config,
                                                  const fs::path& manifest) {
  const Lexicons l = lexicons(config);
  const score::FrameTiming timing{config.features.sample_rate, config.features.hop};
  auto utts = score::read_manifest(manifest, l.lexicon, *l.g2p, timing);
  LOG(INFO) << "preparing " << utts.size() << " utterances from " << manifest;
  return score::prepare_corpus(utts, config.features);
}

void write_numbers(const fs::path& path, const std::vector<double>& values) {
  std::ofstream out(path);
  require(out.good(), "cannot write " + path.string());
  for (size_t i = 0; i < values.size(); ++i) out << (i ? " " : "") << values[i];
  out << "\n";
}

std::vector<double> read_numbers(const fs::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open " + path.string());
  std::vector<double> v;
  double x;
  while (in >> x) v.push_back(x);
  return v;
}

int run_train(score::Stage stage, const std::string& config_path,
              const std::string& corpus, const std::string& out,
              const std::string& init, int steps) {
  const trainer::TrainConfig config = config_or_default(config_path);
  const auto prepared = load_corpus(config, corpus);
  trainer::RunOptions options;
  options.out_dir = out;
  if (steps >= 0) options.steps = steps;
  if (!init.empty()) options.init = init;
  const auto result = trainer::run_stage(config, stage, prepared, options);
  LOG(INFO) << "checkpoint written to " << result.checkpoint;
  return 0;
}

int run_synthesize(const std::string& ckpt_path, const std::string& score_path,
                   const std::string& out, const std::string& utt, uint64_t seed) {
  const trainer::Checkpoint ckpt = trainer::load_checkpoint(ckpt_path);
  const trainer::TrainConfig config =
      trainer::config_from_json(nlohmann::json::parse(ckpt.config_json));
  const Lexicons l = lexicons(config);
  const score::FrameTiming timing{config.features.sample_rate, config.features.hop};

  std::ifstream in(score_path);
  require(in.good(), "cannot open score: " + score_path);
  std::string line, chosen;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    // Manifest lines carry the annotation in the third column.
    const auto tab = line.rfind('\t');
    std::string ann = tab == std::string::npos ? line : line.substr(tab + 1);
    if (utt.empty() || ann.substr(0, ann.find('|')) == utt) {
      chosen = ann;
      break;
    }
  }
  require(!chosen.empty(), "no matching annotation in " + score_path);
  const score::MusicalScore sc = score::parse_annotation(chosen, l.lexicon, timing);
  const auto result = trainer::synthesize(sc, ckpt, seed);
  const fs::path wav(out);
  dsp::write_wav(wav, result.audio);
  write_numbers(fs::path(wav).replace_extension(".dur"), result.durations);
  std::vector<double> f0(result.f0.hz.data(), result.f0.hz.data() + result.f0.size());
  write_numbers(fs::path(wav).replace_extension(".f0"), f0);
  LOG(INFO) << "wrote " << wav << " (" << result.frames << " frames)";
  return 0;
}

int run_evaluate(const std::string& ref_dir, const std::string& hyp_dir,
                 const std::string& report_path, const std::string& plot_dir,
                 const std::string& ckpt_path) {
  dsp::FeatureConfig features;
  std::unique_ptr<trainer::SvsModel> model;
  std::unique_ptr<eval::EncoderEmbedder> embedder;
  if (!ckpt_path.empty()) {
    const trainer::Checkpoint ckpt = trainer::load_checkpoint(ckpt_path);
    const auto config = trainer::config_from_json(nlohmann::json::parse(ckpt.config_json));
    features = config.features;
    model = std::make_unique<trainer::SvsModel>(config, config.seed);
    trainer::restore_parameters(ckpt, model->store, trainer::kFinetuneOnlyGroups);
    embedder = std::make_unique<eval::EncoderEmbedder>(model->speaker_encoder, features);
  }
  if (!plot_dir.empty()) fs::create_directories(plot_dir);

  std::vector<fs::path> refs;
  for (const auto& e : fs::directory_iterator(ref_dir))
    if (e.path().extension() == ".wav") refs.push_back(e.path());
  std::sort(refs.begin(), refs.end());
  std::vector<eval::EvalUtterance> utts;
  for (const auto& ref : refs) {
    const fs::path hyp = fs::path(hyp_dir) / ref.filename();
    if (!fs::exists(hyp)) {
      LOG(WARNING) << "no hypothesis for " << ref.filename();
      continue;
    }
    eval::EvalUtterance u;
    u.utt_id = ref.stem().string();
    u.ref_audio = dsp::load_audio(ref, features.sample_rate);
    u.pred_audio = dsp::load_audio(hyp, features.sample_rate);
    u.ref_f0 = dsp::estimate_f0(*u.ref_audio, features);
    u.pred_f0 = dsp::estimate_f0(*u.pred_audio, features);
    if (u.ref_f0.size() != u.pred_f0.size()) {
      LOG(WARNING) << u.utt_id << ": frame counts differ (" << u.ref_f0.size()
                   << " vs " << u.pred_f0.size() << "), truncating";
      const Eigen::Index n = std::min(u.ref_f0.size(), u.pred_f0.size());
      u.ref_f0 = dsp::F0Contour::from_hz(u.ref_f0.hz.head(n));
      u.pred_f0 = dsp::F0Contour::from_hz(u.pred_f0.hz.head(n));
    }
    const fs::path rd = fs::path(ref).replace_extension(".dur");
    const fs::path hd = fs::path(hyp).replace_extension(".dur");
    if (fs::exists(rd) && fs::exists(hd)) {
      u.ref_durations = read_numbers(rd);
      u.pred_durations = read_numbers(hd);
    }
    if (!plot_dir.empty())
      eval::write_pitch_plot(fs::path(plot_dir) / (u.utt_id + ".svg"), u.ref_f0,
                             u.pred_f0,
                             static_cast<double>(features.hop) / features.sample_rate,
                             u.utt_id);
    utts.push_back(std::move(u));
  }
  require(!utts.empty(), "evaluate: no matching utterances");

  std::ofstream report(report_path);
  require(report.good(), "cannot write report: " + report_path);
  for (const auto& u : utts) {
    auto r = eval::compute_report({u}, embedder.get(), "utt:" + u.utt_id);
    report << eval::report_line(r) << "\n";
  }
  const auto all = eval::compute_report(utts, embedder.get(), "all");
  report << eval::report_line(all) << "\n";
  const auto subset = eval::range_restricted_subset(utts);
  report << eval::report_line(
                eval::compute_report(subset, embedder.get(), "range-restricted"))
         << "\n";
  std::cout << eval::report_line(all) << std::endl;
  return 0;
}

int run_features(const std::string& wav, const std::string& out) {
  const dsp::FeatureConfig cfg;
  const dsp::AudioClip clip = dsp::load_audio(wav, cfg.sample_rate);
  const dsp::FeatureBundle f = dsp::extract_features(clip, cfg);
  nlohmann::ordered_json j;
  j["sample_rate"] = cfg.sample_rate;
  j["hop"] = cfg.hop;
  j["frames"] = f.frames();
  j["f0_hz"] = std::vector<double>(f.f0.hz.data(), f.f0.hz.data() + f.f0.size());
  j["energy"] = std::vector<double>(f.energy.data(), f.energy.data() + f.energy.size());
  std::vector<std::vector<double>> mel(f.frames());
  for (Eigen::Index t = 0; t < f.frames(); ++t)
    mel[t].assign(f.mel_spec.row(t).data(), f.mel_spec.row(t).data() + f.mel_spec.cols());
  j["log_mel"] = mel;
  std::ofstream o(out);
  require(o.good(), "cannot write " + out);
  o << j.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  google::InitGoogleLogging(argv[0]);
  FLAGS_logtostderr = true;

  CLI::App app{"Singing voice synthesis toolkit"};
  app.require_subcommand(1);

  std::string config, corpus, out, init, ckpt, score_path, utt, ref, hyp, report,
      plot_dir, wav;
  int steps = -1;
  uint64_t seed = 0;

  auto* pre = app.add_subcommand("pretrain", "Melody-unsupervised multi-singer pre-training");
  pre->add_option("--config", config, "JSON config");
  pre->add_option("--corpus", corpus, "Lyrics manifest")->required();
  pre->add_option("--out", out, "Output directory")->required();
  pre->add_option("--steps", steps, "Override the configured step count");

  auto* fine = app.add_subcommand("finetune", "Single-singer fine-tuning");
  fine->add_option("--config", config, "JSON config");
  fine->add_option("--corpus", corpus, "Annotated manifest")->required();
  fine->add_option("--init", init, "Pre-trained checkpoint");
  fine->add_option("--out", out, "Output directory")->required();
  fine->add_option("--steps", steps, "Override the configured step count");

  auto* syn = app.add_subcommand("synthesize", "Render a score with a fine-tuned checkpoint");
  syn->add_option("--ckpt", ckpt, "Fine-tuned checkpoint")->required();
  syn->add_option("--score", score_path, "Annotation file")->required();
  syn->add_option("--out", out, "Output WAV")->required();
  syn->add_option("--utt", utt, "Utterance id when the file holds several");
  syn->add_option("--seed", seed, "Sampling seed");

  auto* ev = app.add_subcommand("evaluate", "Objective metrics over two WAV directories");
  ev->add_option("--ref", ref, "Reference directory")->required();
  ev->add_option("--hyp", hyp, "Hypothesis directory")->required();
  ev->add_option("--report", report, "Report file (JSON lines)")->required();
  ev->add_option("--plot-dir", plot_dir, "Directory for pitch overlay plots");
  ev->add_option("--ckpt", ckpt, "Checkpoint whose speaker encoder scores similarity");

  auto* feat = app.add_subcommand("features", "Extract features from one WAV");
  feat->add_option("--wav", wav, "Input WAV")->required();
  feat->add_option("--out", out, "Output JSON")->required();

  auto* toy = app.add_subcommand("make-toy-corpus", "Write the synthetic two-singer corpus");
  toy->add_option("--out", out, "Output directory")->required();
  toy->add_option("--seed", seed, "Generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pre) return run_train(score::Stage::kPretrain, config, corpus, out, "", steps);
    if (*fine) return run_train(score::Stage::kFinetune, config, corpus, out, init, steps);
    if (*syn) return run_synthesize(ckpt, score_path, out, utt, seed);
    if (*ev) return run_evaluate(ref, hyp, report, plot_dir, ckpt);
    if (*feat) return run_features(wav, out);
    if (*toy) {
      trainer::ToyCorpusConfig cfg;
      if (seed) cfg.seed = seed;
      const auto paths = trainer::make_toy_corpus(out, cfg);
      std::cout << paths.pretrain_manifest.string() << "\n"
                << paths.finetune_manifest.string() << "\n"
                << paths.finetune_single.string() << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    LOG(ERROR) << e.what();
    return 1;
  }
  return 0;
}
