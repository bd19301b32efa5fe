// Copyright 2026 The eend Authors. All Rights Reserved.
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

#include "eend/score.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <set>
#include <sstream>

#include "json.hpp"

#include "eend/errors.h"

namespace eend {

std::string FormatSeconds(double seconds) {
  char buf[64];
  for (int p = 2; p <= 9; ++p) {
    std::snprintf(buf, sizeof(buf), "%.*f", p, seconds);
    if (std::abs(std::strtod(buf, nullptr) - seconds) <= 5e-10) break;
  }
  return buf;
}

namespace {

double ParseNumber(const std::string& field, const char* what, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != field.size() || !std::isfinite(v)) {
    throw FormatError("rttm line " + std::to_string(line_no) + ": " + what + " '" + field +
                      "' is not a number");
  }
  return v;
}

}  // namespace

std::vector<RttmRecord> ParseRttm(const std::string& text) {
  std::vector<RttmRecord> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> f{std::istream_iterator<std::string>(ls),
                               std::istream_iterator<std::string>()};
    if (f.empty() || f[0][0] == '#') continue;
    if (f.size() != 10) {
      throw FormatError("rttm line " + std::to_string(line_no) + ": expected 10 fields, got " +
                        std::to_string(f.size()));
    }
    if (f[0] != "SPEAKER") {
      throw FormatError("rttm line " + std::to_string(line_no) + ": record type '" + f[0] +
                        "' is not SPEAKER");
    }
    RttmRecord r;
    r.file = f[1];
    r.channel = f[2];
    r.onset = ParseNumber(f[3], "onset", line_no);
    r.duration = ParseNumber(f[4], "duration", line_no);
    r.speaker = f[7];
    if (r.onset < 0) {
      throw FormatError("rttm line " + std::to_string(line_no) + ": negative onset");
    }
    if (!(r.duration > 0)) {
      throw FormatError("rttm line " + std::to_string(line_no) + ": duration must be positive");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string EmitRttm(const std::vector<RttmRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += "SPEAKER " + r.file + " " + r.channel + " " + FormatSeconds(r.onset) + " " +
           FormatSeconds(r.duration) + " <NA> <NA> " + r.speaker + " <NA> <NA>\n";
  }
  return out;
}

std::vector<RttmRecord> ReadRttm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open rttm '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return ParseRttm(text);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void WriteRttm(const std::string& path, const std::vector<RttmRecord>& records) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write rttm '" + path + "'");
  out << EmitRttm(records);
}

std::vector<std::string> RecordingIds(const std::vector<RttmRecord>& records) {
  std::set<std::string> ids;
  for (const auto& r : records) ids.insert(r.file);
  return {ids.begin(), ids.end()};
}

std::vector<std::string> SpeakerNames(const std::vector<RttmRecord>& records,
                                      const std::string& file) {
  std::set<std::string> names;
  for (const auto& r : records)
    if (r.file == file) names.insert(r.speaker);
  return {names.begin(), names.end()};
}

namespace {

std::size_t GridFrames(const std::vector<RttmRecord>& records, const std::string& file,
                       double step) {
  double end = 0;
  for (const auto& r : records)
    if (r.file == file) end = std::max(end, r.onset + r.duration);
  return static_cast<std::size_t>(std::ceil(end / step));
}

void CheckGrid(double step) {
  if (!(step > 0)) throw ParameterError("frame_step must be positive");
}

}  // namespace

LabelSequence Rasterize(const std::vector<RttmRecord>& records, const std::string& file,
                        const std::vector<std::string>& speakers, double frame_step,
                        std::size_t num_frames) {
  CheckGrid(frame_step);
  if (num_frames == 0) num_frames = GridFrames(records, file, frame_step);
  LabelSequence out(num_frames, std::max<std::size_t>(speakers.size(), 1), frame_step);
  for (const auto& r : records) {
    if (r.file != file) continue;
    const auto it = std::find(speakers.begin(), speakers.end(), r.speaker);
    if (it == speakers.end()) {
      throw ContractError("speaker '" + r.speaker + "' of " + file + " is not in the column list");
    }
    const auto c = static_cast<std::size_t>(it - speakers.begin());
    const double end = r.onset + r.duration;
    const auto lo = static_cast<std::int64_t>(std::floor(r.onset / frame_step)) - 1;
    const auto hi = static_cast<std::int64_t>(std::ceil(end / frame_step)) + 1;
    for (std::int64_t t = std::max<std::int64_t>(lo, 0);
         t <= hi && t < static_cast<std::int64_t>(num_frames); ++t) {
      const double mid = (static_cast<double>(t) + 0.5) * frame_step;
      if (mid >= r.onset && mid < end) out.set(static_cast<std::size_t>(t), c, true);
    }
  }
  return out;
}

DerCounts& DerCounts::operator+=(const DerCounts& o) {
  ref_speech += o.ref_speech;
  miss += o.miss;
  false_alarm += o.false_alarm;
  confusion += o.confusion;
  ref_sad += o.ref_sad;
  sad_miss += o.sad_miss;
  sad_fa += o.sad_fa;
  scored_frames += o.scored_frames;
  return *this;
}

namespace {

// Enumerates injective maps from `n` items into `m >= n` slots in
// lexicographic order, keeping the first with the largest total weight.
struct MappingSearch {
  const std::vector<std::vector<std::int64_t>>& weight;  // [n][m]
  std::size_t n, m;
  std::vector<std::size_t> current, best;
  std::vector<bool> used;
  std::int64_t best_score = -1;

  void Run(std::size_t i, std::int64_t score) {
    if (i == n) {
      if (score > best_score) best_score = score, best = current;
      return;
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (used[j]) continue;
      used[j] = true;
      current[i] = j;
      Run(i + 1, score + weight[i][j]);
      used[j] = false;
    }
  }
};

}  // namespace

DerCounts CountErrors(const LabelSequence& ref, const LabelSequence& hyp,
                      const std::vector<bool>& scored, int max_speakers) {
  const std::size_t frames = ref.num_frames();
  if (hyp.num_frames() != frames || scored.size() != frames) {
    throw DimensionError("CountErrors: reference has " + std::to_string(frames) +
                         " frames, hypothesis " + std::to_string(hyp.num_frames()) +
                         ", mask " + std::to_string(scored.size()));
  }
  const std::size_t nr = ref.num_speakers(), nh = hyp.num_speakers();
  if (nr > static_cast<std::size_t>(max_speakers) ||
      nh > static_cast<std::size_t>(max_speakers)) {
    throw CapacityError("speaker mapping search is capped at " + std::to_string(max_speakers) +
                        " speakers, got " + std::to_string(nr) + " reference and " +
                        std::to_string(nh) + " hypothesis");
  }
  std::vector<std::vector<std::int64_t>> co(nr, std::vector<std::int64_t>(nh, 0));
  for (std::size_t t = 0; t < frames; ++t) {
    if (!scored[t]) continue;
    for (std::size_t r = 0; r < nr; ++r)
      if (ref(t, r))
        for (std::size_t h = 0; h < nh; ++h) co[r][h] += hyp(t, h);
  }
  // pair_of[r] = mapped hyp speaker or -1.
  std::vector<std::int64_t> pair_of(nr, -1);
  if (nr <= nh) {
    MappingSearch s{co, nr, nh, std::vector<std::size_t>(nr), {}, std::vector<bool>(nh), -1};
    s.Run(0, 0);
    for (std::size_t r = 0; r < nr; ++r) pair_of[r] = static_cast<std::int64_t>(s.best[r]);
  } else {
    std::vector<std::vector<std::int64_t>> tr(nh, std::vector<std::int64_t>(nr));
    for (std::size_t r = 0; r < nr; ++r)
      for (std::size_t h = 0; h < nh; ++h) tr[h][r] = co[r][h];
    MappingSearch s{tr, nh, nr, std::vector<std::size_t>(nh), {}, std::vector<bool>(nr), -1};
    s.Run(0, 0);
    for (std::size_t h = 0; h < nh; ++h) pair_of[s.best[h]] = static_cast<std::int64_t>(h);
  }

  DerCounts c;
  for (std::size_t t = 0; t < frames; ++t) {
    if (!scored[t]) continue;
    ++c.scored_frames;
    const auto R = static_cast<std::int64_t>(ref.RowSum(t));
    const auto H = static_cast<std::int64_t>(hyp.RowSum(t));
    std::int64_t k = 0;
    for (std::size_t r = 0; r < nr; ++r)
      if (pair_of[r] >= 0 && ref(t, r) && hyp(t, static_cast<std::size_t>(pair_of[r]))) ++k;
    c.ref_speech += R;
    c.miss += std::max<std::int64_t>(0, R - H);
    c.false_alarm += std::max<std::int64_t>(0, H - R);
    c.confusion += std::min(R, H) - k;
    c.ref_sad += R > 0;
    c.sad_miss += R > 0 && H == 0;
    c.sad_fa += R == 0 && H > 0;
  }
  return c;
}

std::vector<bool> CollarMask(const std::vector<RttmRecord>& ref, const std::string& file,
                             std::size_t num_frames, double frame_step, double collar) {
  CheckGrid(frame_step);
  if (!(collar >= 0)) throw ParameterError("collar must be >= 0");
  std::vector<bool> scored(num_frames, true);
  if (collar == 0) return scored;
  for (const auto& r : ref) {
    if (r.file != file) continue;
    for (double b : {r.onset, r.onset + r.duration}) {
      const auto lo = static_cast<std::int64_t>(std::floor((b - collar) / frame_step)) - 1;
      const auto hi = static_cast<std::int64_t>(std::ceil((b + collar) / frame_step)) + 1;
      for (std::int64_t t = std::max<std::int64_t>(lo, 0);
           t <= hi && t < static_cast<std::int64_t>(num_frames); ++t) {
        const double mid = (static_cast<double>(t) + 0.5) * frame_step;
        if (std::abs(mid - b) < collar) scored[static_cast<std::size_t>(t)] = false;
      }
    }
  }
  return scored;
}

DerReport FinishReport(const DerCounts& counts, double frame_step) {
  if (counts.ref_speech == 0) {
    throw ScoreError("no reference speech in the scored region; DER is undefined");
  }
  DerReport rep;
  rep.counts = counts;
  const double denom = static_cast<double>(counts.ref_speech);
  rep.miss = 100.0 * static_cast<double>(counts.miss) / denom;
  rep.false_alarm = 100.0 * static_cast<double>(counts.false_alarm) / denom;
  rep.confusion = 100.0 * static_cast<double>(counts.confusion) / denom;
  rep.der = rep.miss + rep.false_alarm + rep.confusion;
  const double sad = static_cast<double>(counts.ref_sad);
  rep.sad_miss = 100.0 * static_cast<double>(counts.sad_miss) / sad;
  rep.sad_fa = 100.0 * static_cast<double>(counts.sad_fa) / sad;
  rep.scored_time = denom * frame_step;
  return rep;
}

DerReport ScoreDer(const std::vector<RttmRecord>& ref, const std::vector<RttmRecord>& hyp,
                   const ScoreOptions& options) {
  CheckGrid(options.frame_step);
  const auto ref_ids = RecordingIds(ref);
  const auto hyp_ids = RecordingIds(hyp);
  if (ref_ids != hyp_ids) {
    std::vector<std::string> only_ref, only_hyp;
    std::set_difference(ref_ids.begin(), ref_ids.end(), hyp_ids.begin(), hyp_ids.end(),
                        std::back_inserter(only_ref));
    std::set_difference(hyp_ids.begin(), hyp_ids.end(), ref_ids.begin(), ref_ids.end(),
                        std::back_inserter(only_hyp));
    std::string msg = "recording ids differ;";
    auto join = [](const std::vector<std::string>& v) {
      std::string s;
      for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
      return s.empty() ? std::string("none") : s;
    };
    msg += " missing from hypothesis: " + join(only_ref) +
           "; missing from reference: " + join(only_hyp);
    throw ScoreError(msg);
  }
  return ScoreDerFiles(ref, hyp, ref_ids, options);
}

DerReport ScoreDerFiles(const std::vector<RttmRecord>& ref, const std::vector<RttmRecord>& hyp,
                        const std::vector<std::string>& ids, const ScoreOptions& options) {
  CheckGrid(options.frame_step);
  std::vector<std::string> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (const auto* records : {&ref, &hyp}) {
    for (const auto& id : RecordingIds(*records)) {
      if (!std::binary_search(sorted.begin(), sorted.end(), id)) {
        throw ScoreError("recording " + id + " is not in the list of files to score");
      }
    }
  }
  DerCounts total;
  for (const auto& id : sorted) {
    const std::size_t frames = std::max(GridFrames(ref, id, options.frame_step),
                                        GridFrames(hyp, id, options.frame_step));
    const auto rl = Rasterize(ref, id, SpeakerNames(ref, id), options.frame_step, frames);
    const auto hl = Rasterize(hyp, id, SpeakerNames(hyp, id), options.frame_step, frames);
    total += CountErrors(rl, hl, CollarMask(ref, id, frames, options.frame_step, options.collar),
                         options.max_speakers);
  }
  return FinishReport(total, options.frame_step);
}

std::string FormatReportTable(const DerReport& r) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2);
  s << std::left << std::setw(14) << "metric" << std::right << std::setw(10) << "value" << "\n";
  auto row = [&](const char* name, double v, const char* unit) {
    s << std::left << std::setw(14) << name << std::right << std::setw(10) << v << unit << "\n";
  };
  row("DER", r.der, " %");
  row("MI", r.miss, " %");
  row("FA", r.false_alarm, " %");
  row("CF", r.confusion, " %");
  row("SAD MI", r.sad_miss, " %");
  row("SAD FA", r.sad_fa, " %");
  row("scored time", r.scored_time, " s");
  return s.str();
}

std::string ReportJson(const DerReport& r) {
  nlohmann::json j;
  j["der"] = r.der;
  j["mi"] = r.miss;
  j["fa"] = r.false_alarm;
  j["cf"] = r.confusion;
  j["sad_mi"] = r.sad_miss;
  j["sad_fa"] = r.sad_fa;
  j["scored_time"] = r.scored_time;
  return j.dump(2);
}

}  // namespace eend
