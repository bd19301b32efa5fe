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

#ifndef EEND_TESTS_SCORE_ORACLE_H_
#define EEND_TESTS_SCORE_ORACLE_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "eend/rng.h"
#include "eend/score.h"

namespace eend::testing {

struct OracleCounts {
  std::int64_t ref_speech = 0;
  std::int64_t miss = 0;
  std::int64_t false_alarm = 0;
  std::int64_t confusion = 0;
};

// Frame-by-frame scorer that tries every speaker mapping and evaluates the
// error of each mapping directly over all frames.
inline OracleCounts BruteForceDer(const std::vector<RttmRecord>& ref,
                                  const std::vector<RttmRecord>& hyp, double collar,
                                  double step) {
  std::set<std::string> files;
  for (const auto& r : ref) files.insert(r.file);
  OracleCounts total;
  for (const auto& file : files) {
    std::vector<std::string> rs, hs;
    double end = 0;
    for (const auto& r : ref)
      if (r.file == file) {
        if (std::find(rs.begin(), rs.end(), r.speaker) == rs.end()) rs.push_back(r.speaker);
        end = std::max(end, r.onset + r.duration);
      }
    for (const auto& h : hyp)
      if (h.file == file) {
        if (std::find(hs.begin(), hs.end(), h.speaker) == hs.end()) hs.push_back(h.speaker);
        end = std::max(end, h.onset + h.duration);
      }
    const auto frames = static_cast<std::size_t>(std::ceil(end / step)) + 2;
    auto active = [&](const std::vector<RttmRecord>& recs, const std::string& spk, double mid) {
      for (const auto& r : recs)
        if (r.file == file && r.speaker == spk && mid >= r.onset && mid < r.onset + r.duration)
          return true;
      return false;
    };
    std::vector<std::vector<bool>> R(frames), H(frames);
    std::vector<bool> scored(frames, true);
    for (std::size_t t = 0; t < frames; ++t) {
      const double mid = (t + 0.5) * step;
      for (const auto& s : rs) R[t].push_back(active(ref, s, mid));
      for (const auto& s : hs) H[t].push_back(active(hyp, s, mid));
      for (const auto& r : ref) {
        if (r.file != file) continue;
        if (std::abs(mid - r.onset) < collar || std::abs(mid - (r.onset + r.duration)) < collar)
          scored[t] = false;
      }
    }
    // Every assignment of reference speakers to distinct hypothesis slots,
    // where slots beyond the hypothesis count mean "unmapped".
    const std::size_t slots = std::max(rs.size(), hs.size());
    std::vector<std::size_t> perm(slots);
    for (std::size_t i = 0; i < slots; ++i) perm[i] = i;
    OracleCounts best;
    std::int64_t best_err = std::numeric_limits<std::int64_t>::max();
    do {
      OracleCounts c;
      for (std::size_t t = 0; t < frames; ++t) {
        if (!scored[t]) continue;
        std::int64_t nr = 0, nh = 0, ok = 0;
        for (std::size_t i = 0; i < rs.size(); ++i) nr += R[t][i];
        for (std::size_t j = 0; j < hs.size(); ++j) nh += H[t][j];
        for (std::size_t i = 0; i < rs.size(); ++i)
          if (perm[i] < hs.size() && R[t][i] && H[t][perm[i]]) ++ok;
        c.ref_speech += nr;
        c.miss += std::max<std::int64_t>(0, nr - nh);
        c.false_alarm += std::max<std::int64_t>(0, nh - nr);
        c.confusion += std::min(nr, nh) - ok;
      }
      const std::int64_t err = c.miss + c.false_alarm + c.confusion;
      if (err < best_err) best_err = err, best = c;
    } while (std::next_permutation(perm.begin(), perm.end()));
    total.ref_speech += best.ref_speech;
    total.miss += best.miss;
    total.false_alarm += best.false_alarm;
    total.confusion += best.confusion;
  }
  return total;
}

struct RttmCase {
  std::vector<RttmRecord> ref, hyp;
};

// One recording under one second (<= 100 frames at 10 ms), up to three
// speakers per side, segment edges at arbitrary millisecond times.
inline RttmCase RandomRttmCase(std::uint64_t seed) {
  SplitMix64 rng(seed);
  RttmCase c;
  auto side = [&](std::vector<RttmRecord>& out, const char* prefix) {
    const int speakers = static_cast<int>(rng.UniformInt(1, 3));
    for (int s = 0; s < speakers; ++s) {
      const int segs = static_cast<int>(rng.UniformInt(1, 3));
      for (int k = 0; k < segs; ++k) {
        RttmRecord r;
        r.file = "rec";
        r.speaker = std::string(prefix) + std::to_string(s);
        r.onset = static_cast<double>(rng.UniformInt(0, 900)) / 1000.0;
        r.duration = static_cast<double>(rng.UniformInt(5, 400)) / 1000.0;
        if (r.onset + r.duration > 0.999) r.duration = 0.999 - r.onset;
        out.push_back(r);
      }
    }
  };
  side(c.ref, "r");
  side(c.hyp, "h");
  return c;
}

}  // namespace eend::testing

#endif  // EEND_TESTS_SCORE_ORACLE_H_
