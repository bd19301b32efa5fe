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

// RTTM I/O and frame-rasterized diarization error rate.
//
// Both sides are rasterized on a frame_step grid: frame t covers the
// midpoint (t + 0.5) * frame_step and is active for a speaker when the
// midpoint falls in [onset, onset + duration). Frames whose midpoint lies
// strictly within collar seconds of a reference segment boundary are not
// scored. Per scored frame with R reference and H hypothesis speakers and
// K correctly mapped pairs:
//   miss += max(0, R - H), false alarm += max(0, H - R),
//   confusion += min(R, H) - K.
// The speaker mapping maximizes the total of K over the whole recording
// (exhaustive search; ties go to the lexicographically smallest mapping).
// Components are percentages of the scored reference speaker time. SAD
// errors use the any-speaker projection and are percentages of the scored
// reference speech time.

#ifndef EEND_SCORE_H_
#define EEND_SCORE_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "eend/labels.h"

namespace eend {

struct RttmRecord {
  std::string file;
  std::string channel = "1";
  double onset = 0;
  double duration = 0;
  std::string speaker;

  bool operator==(const RttmRecord& other) const = default;
};

// Shortest fixed notation with 2 to 9 decimals within 5e-10 of the value.
std::string FormatSeconds(double seconds);

// SPEAKER <file> <chan> <onset> <dur> <NA> <NA> <spk> <NA> <NA>. Blank lines
// and lines starting with '#' are skipped. Errors are FormatError with the
// 1-based line number.
std::vector<RttmRecord> ParseRttm(const std::string& text);
std::string EmitRttm(const std::vector<RttmRecord>& records);
std::vector<RttmRecord> ReadRttm(const std::string& path);
void WriteRttm(const std::string& path, const std::vector<RttmRecord>& records);

// Sorted unique file ids.
std::vector<std::string> RecordingIds(const std::vector<RttmRecord>& records);
// Sorted unique speaker names within one file.
std::vector<std::string> SpeakerNames(const std::vector<RttmRecord>& records,
                                      const std::string& file);

// Frames of one file on the step grid, one column per entry of speakers.
// With num_frames == 0 the grid ends at the last segment end.
LabelSequence Rasterize(const std::vector<RttmRecord>& records,
                        const std::string& file,
                        const std::vector<std::string>& speakers,
                        double frame_step, std::size_t num_frames = 0);

struct ScoreOptions {
  double collar = 0.25;
  double frame_step = 0.01;
  int max_speakers = 8;
};

// Integer frame counts; reference "speech" is speaker-frames.
struct DerCounts {
  std::int64_t ref_speech = 0;
  std::int64_t miss = 0;
  std::int64_t false_alarm = 0;
  std::int64_t confusion = 0;
  std::int64_t ref_sad = 0;
  std::int64_t sad_miss = 0;
  std::int64_t sad_fa = 0;
  std::int64_t scored_frames = 0;

  DerCounts& operator+=(const DerCounts& o);
};

struct DerReport {
  double der = 0;
  double miss = 0;
  double false_alarm = 0;
  double confusion = 0;
  double sad_miss = 0;
  double sad_fa = 0;
  double scored_time = 0;  // seconds of reference speaker time scored
  DerCounts counts;
};

// Frames with scored[t] == false are ignored. ref and hyp must have the same
// frame count. Throws CapacityError above max_speakers on either side.
DerCounts CountErrors(const LabelSequence& ref, const LabelSequence& hyp,
                      const std::vector<bool>& scored, int max_speakers = 8);

// Scored-frame mask from the reference boundaries of one file.
std::vector<bool> CollarMask(const std::vector<RttmRecord>& ref,
                             const std::string& file, std::size_t num_frames,
                             double frame_step, double collar);

// Converts counts to percentages. ScoreError when no reference speech was
// scored.
DerReport FinishReport(const DerCounts& counts, double frame_step);

// Both record sets must cover the same file ids (ScoreError listing the
// differences otherwise). Files are scored in sorted id order.
DerReport ScoreDer(const std::vector<RttmRecord>& ref,
                   const std::vector<RttmRecord>& hyp,
                   const ScoreOptions& options = {});

// Scores exactly the listed files. A file without records on one side is
// scored as empty on that side; records of unlisted files are a
// ScoreError.
DerReport ScoreDerFiles(const std::vector<RttmRecord>& ref,
                        const std::vector<RttmRecord>& hyp,
                        const std::vector<std::string>& ids,
                        const ScoreOptions& options = {});

// Aligned text table and JSON (keys der, mi, fa, cf, sad_mi, sad_fa,
// scored_time).
std::string FormatReportTable(const DerReport& report);
std::string ReportJson(const DerReport& report);

}  // namespace eend

#endif  // EEND_SCORE_H_
