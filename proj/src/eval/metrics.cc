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

#include "svs/eval/metrics.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace svs::eval {

namespace {

std::vector<Eigen::Index> mutually_voiced(const dsp::F0Contour& pred,
                                          const dsp::F0Contour& ref) {
  require(pred.size() == ref.size(),
          "f0 metrics: frame counts differ (" + std::to_string(pred.size()) +
              " vs " + std::to_string(ref.size()) + ")");
  std::vector<Eigen::Index> idx;
  for (Eigen::Index t = 0; t < ref.size(); ++t)
    if (pred.voiced[t] && ref.voiced[t]) idx.push_back(t);
  return idx;
}

dsp::F0Contour concat(const std::vector<const dsp::F0Contour*>& parts) {
  Eigen::Index total = 0;
  for (const auto* p : parts) total += p->size();
  dsp::F0Contour out;
  out.hz.resize(total);
  Eigen::Index at = 0;
  for (const auto* p : parts) {
    out.hz.segment(at, p->size()) = p->hz;
    out.voiced.insert(out.voiced.end(), p->voiced.begin(), p->voiced.end());
    at += p->size();
  }
  return out;
}

}  // namespace

double f0_mae(const dsp::F0Contour& pred, const dsp::F0Contour& ref) {
  const auto idx = mutually_voiced(pred, ref);
  require(!idx.empty(), "f0_mae: undefined, no mutually voiced frames");
  double sum = 0.0;
  for (auto t : idx) sum += std::abs(pred.hz(t) - ref.hz(t));
  return sum / static_cast<double>(idx.size());
}

double f0_correlation(const dsp::F0Contour& pred, const dsp::F0Contour& ref) {
  const auto idx = mutually_voiced(pred, ref);
  require(idx.size() >= 2, "f0_correlation: fewer than two mutually voiced frames");
  const double n = static_cast<double>(idx.size());
  double mp = 0, mr = 0;
  for (auto t : idx) {
    mp += pred.hz(t);
    mr += ref.hz(t);
  }
  mp /= n;
  mr /= n;
  double cov = 0, vp = 0, vr = 0;
  for (auto t : idx) {
    const double a = pred.hz(t) - mp, b = ref.hz(t) - mr;
    cov += a * b;
    vp += a * a;
    vr += b * b;
  }
  require(vp > 0 && vr > 0, "f0_correlation: zero variance contour");
  return std::clamp(cov / std::sqrt(vp * vr), -1.0, 1.0);
}

double duration_mae(std::span<const double> pred, std::span<const double> ref) {
  require(pred.size() == ref.size(),
          "duration_mae: length mismatch (" + std::to_string(pred.size()) +
              " vs " + std::to_string(ref.size()) + ")");
  require(!pred.empty(), "duration_mae: empty duration vectors");
  double sum = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - ref[i]);
  return sum / static_cast<double>(pred.size());
}

Eigen::VectorXd EncoderEmbedder::embed(const dsp::AudioClip& audio) const {
  const dsp::FeatureBundle f = dsp::extract_features(audio, features_);
  nn::NoGradGuard no_grad;
  const prior::SpeakerEmbedding e =
      encoder_.speaker_encode(nn::constant(f.mel_spec.cast<Real>()));
  return e.vec.value().row(0).transpose().cast<double>();
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  require(a.size() == b.size(), "speaker_similarity: embedding sizes differ");
  const double na = a.norm(), nb = b.norm();
  require(na > 0 && nb > 0, "speaker_similarity: zero-norm embedding");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

double speaker_similarity(const dsp::AudioClip& a, const dsp::AudioClip& b,
                          const SpeakerEmbedder& encoder) {
  return cosine_similarity(encoder.embed(a), encoder.embed(b));
}

std::vector<EvalUtterance> range_restricted_subset(
    const std::vector<EvalUtterance>& utterances, double low_hz,
    double high_hz) {
  require(!utterances.empty(), "range_restricted_subset: empty corpus");
  std::vector<EvalUtterance> out;
  for (const auto& u : utterances) {
    bool outside = false;
    for (Eigen::Index t = 0; t < u.ref_f0.size() && !outside; ++t)
      outside = u.ref_f0.voiced[t] &&
                (u.ref_f0.hz(t) < low_hz || u.ref_f0.hz(t) > high_hz);
    if (outside) out.push_back(u);
  }
  return out;
}

MetricReport compute_report(const std::vector<EvalUtterance>& utterances,
                            const SpeakerEmbedder* encoder,
                            const std::string& subset) {
  MetricReport report;
  report.subset = subset;
  report.utterances = utterances.size();
  if (utterances.empty()) return report;

  std::vector<const dsp::F0Contour*> refs, preds;
  std::vector<double> ref_d, pred_d;
  for (const auto& u : utterances) {
    refs.push_back(&u.ref_f0);
    preds.push_back(&u.pred_f0);
    if (!u.ref_durations.empty() && !u.pred_durations.empty()) {
      require(u.ref_durations.size() == u.pred_durations.size(),
              "duration_mae: length mismatch in " + u.utt_id);
      ref_d.insert(ref_d.end(), u.ref_durations.begin(), u.ref_durations.end());
      pred_d.insert(pred_d.end(), u.pred_durations.begin(), u.pred_durations.end());
    }
  }
  const dsp::F0Contour ref = concat(refs), pred = concat(preds);
  if (!mutually_voiced(pred, ref).empty()) report.f0_mae = f0_mae(pred, ref);
  try {
    report.f0_corr = f0_correlation(pred, ref);
  } catch (const Error&) {
  }
  if (!ref_d.empty()) report.duration_mae = duration_mae(pred_d, ref_d);

  if (encoder) {
    double sum = 0.0;
    int n = 0;
    for (const auto& u : utterances) {
      if (!u.ref_audio || !u.pred_audio) continue;
      sum += speaker_similarity(*u.pred_audio, *u.ref_audio, *encoder);
      ++n;
    }
    if (n > 0) report.speaker_sim = sum / n;
    report.speaker_encoder = encoder->name();
  }
  return report;
}

std::string report_line(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["subset"] = r.subset;
  j["utterances"] = r.utterances;
  auto put = [&](const char* key, const std::optional<double>& v) {
    j[key] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  put("f0_mae_hz", r.f0_mae);
  put("f0_corr", r.f0_corr);
  put("duration_mae_frames", r.duration_mae);
  put("speaker_sim", r.speaker_sim);
  if (!r.speaker_encoder.empty()) j["speaker_encoder"] = r.speaker_encoder;
  return j.dump();
}

void write_pitch_plot(const std::filesystem::path& path,
                      const dsp::F0Contour& ref, const dsp::F0Contour& pred,
                      double frame_seconds, const std::string& title) {
  const double width = 800, height = 300, margin = 40;
  double fmax = 1.0;
  for (Eigen::Index t = 0; t < ref.size(); ++t) fmax = std::max(fmax, ref.hz(t));
  for (Eigen::Index t = 0; t < pred.size(); ++t) fmax = std::max(fmax, pred.hz(t));
  fmax *= 1.1;
  const Eigen::Index frames = std::max<Eigen::Index>({ref.size(), pred.size(), 1});
  auto x = [&](Eigen::Index t) {
    return margin + (width - 2 * margin) * static_cast<double>(t) / frames;
  };
  auto y = [&](double hz) {
    return height - margin - (height - 2 * margin) * hz / fmax;
  };
  auto polyline = [&](const dsp::F0Contour& c, const char* color) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(1);
    bool open = false;
    for (Eigen::Index t = 0; t < c.size(); ++t) {
      if (!c.voiced[t]) {
        if (open) s << "\"/>\n";
        open = false;
        continue;
      }
      if (!open)
        s << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\" points=\"";
      open = true;
      s << x(t) << "," << y(c.hz(t)) << " ";
    }
    if (open) s << "\"/>\n";
    return s.str();
  };

  std::ofstream out(path);
  require(out.good(), "cannot write plot: " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << margin << "\" y=\"20\" font-size=\"14\">" << title
      << "</text>\n"
      << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
      << width - margin << "\" y2=\"" << height - margin
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\""
      << margin << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << width - margin << "\" y=\"" << height - 10
      << "\" font-size=\"11\" text-anchor=\"end\">"
      << frames * frame_seconds << " s</text>\n"
      << "<text x=\"5\" y=\"" << margin << "\" font-size=\"11\">"
      << static_cast<int>(fmax) << " Hz</text>\n"
      << polyline(ref, "#1f77b4") << polyline(pred, "#d62728")
      << "<text x=\"" << width - 150 << "\" y=\"20\" font-size=\"11\" "
         "fill=\"#1f77b4\">reference</text>\n"
      << "<text x=\"" << width - 80 << "\" y=\"20\" font-size=\"11\" "
         "fill=\"#d62728\">predicted</text>\n"
      << "</svg>\n";
}

}  // namespace svs::eval
