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

#ifndef SVS_EVAL_METRICS_H_
#define SVS_EVAL_METRICS_H_

#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svs/dsp/features.h"
#include "svs/dsp/pitch.h"
#include "svs/prior/speaker_encoder.h"

namespace svs::eval {

double f0_mae(const dsp::F0Contour& pred, const dsp::F0Contour& ref);
double f0_correlation(const dsp::F0Contour& pred, const dsp::F0Contour& ref);
double duration_mae(std::span<const double> pred, std::span<const double> ref);

// Any source of fixed-size utterance embeddings.
class SpeakerEmbedder {
 public:
  virtual ~SpeakerEmbedder() = default;
  virtual Eigen::VectorXd embed(const dsp::AudioClip& audio) const = 0;
  virtual std::string name() const = 0;
};

// Pooled output of the toolkit's own speaker encoder on log-mel input.
class EncoderEmbedder : public SpeakerEmbedder {
 public:
  EncoderEmbedder(const prior::SpeakerEncoder& encoder,
                  const dsp::FeatureConfig& features)
      : encoder_(encoder), features_(features) {}
  Eigen::VectorXd embed(const dsp::AudioClip& audio) const override;
  std::string name() const override { return "svs-speaker-encoder"; }

 private:
  const prior::SpeakerEncoder& encoder_;
  dsp::FeatureConfig features_;
};

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double speaker_similarity(const dsp::AudioClip& a, const dsp::AudioClip& b,
                          const SpeakerEmbedder& encoder);

struct EvalUtterance {
  std::string utt_id;
  dsp::F0Contour ref_f0;
  dsp::F0Contour pred_f0;
  std::vector<double> ref_durations;
  std::vector<double> pred_durations;
  std::optional<dsp::AudioClip> ref_audio;
  std::optional<dsp::AudioClip> pred_audio;
};

inline const double kRangeLowHz = dsp::midi_to_hz<double>(53);   // F3
inline const double kRangeHighHz = dsp::midi_to_hz<double>(74);  // D5

// Utterances with at least one voiced reference frame outside
// [low_hz, high_hz].
std::vector<EvalUtterance> range_restricted_subset(
    const std::vector<EvalUtterance>& utterances, double low_hz = kRangeLowHz,
    double high_hz = kRangeHighHz);

struct MetricReport {
  std::string subset = "all";
  size_t utterances = 0;
  std::optional<double> f0_mae;
  std::optional<double> f0_corr;
  std::optional<double> duration_mae;
  std::optional<double> speaker_sim;
  std::string speaker_encoder;
};

// Frames and phonemes are pooled across utterances; similarity is averaged.
MetricReport compute_report(const std::vector<EvalUtterance>& utterances,
                            const SpeakerEmbedder* encoder = nullptr,
                            const std::string& subset = "all");

std::string report_line(const MetricReport& report);

// Reference and predicted contours overlaid on a time axis.
void write_pitch_plot(const std::filesystem::path& path,
                      const dsp::F0Contour& ref, const dsp::F0Contour& pred,
                      double frame_seconds, const std::string& title);

}  // namespace svs::eval

#endif  // SVS_EVAL_METRICS_H_
