// Copyright 2026 The prosoref Authors. All Rights Reserved.
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

#ifndef PROSOREF_ALIGNMENT_H_
#define PROSOREF_ALIGNMENT_H_

// Forced-alignment label files: one phone per row with optional HMM state
// index, always expanded to three contiguous sub-states per phone.

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace prosoref {

inline constexpr std::string_view kPauseSymbol = "pau";

struct Interval {
  double start_s = 0.0;
  double end_s = 0.0;

  double duration() const { return end_s - start_s; }
  bool operator==(const Interval&) const = default;
};

struct PhoneSegment {
  std::string phone;
  double start_s = 0.0;
  double end_s = 0.0;
  std::array<Interval, 3> states;

  double duration() const { return end_s - start_s; }
};

struct PhoneAlignment {
  std::vector<PhoneSegment> segments;
  double total_s = 0.0;
};

// Equal thirds; the last state ends exactly at end_s.
std::array<Interval, 3> TriPartition(double start_s, double end_s);

// Rows are "start<TAB>end<TAB>phone[<TAB>state]"; '#' starts a comment line.
// Phone rows (3 columns) are tri-partitioned; state rows come as three
// consecutive rows with indices 1, 2, 3 for the same phone.
PhoneAlignment ParseAlignment(std::string_view text);

enum class LabelLevel { kPhone, kState };

// Times are written with six decimals.
std::string SerializeAlignment(const PhoneAlignment& alignment,
                               LabelLevel level = LabelLevel::kState);

// Half-open range [begin, end) of frame indices.
struct FrameRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin >= end; }
  bool operator==(const FrameRange&) const = default;
};

// Time of the centre of frame i: i·hop + hop/2.
double FrameCenterSeconds(std::size_t frame, double hop_ms);

// Frames whose centre lies in [start, end), clipped to [0, n_frames). A
// centre exactly on a boundary belongs to the later interval.
FrameRange FramesInInterval(const Interval& interval, double hop_ms, std::size_t n_frames);

}  // namespace prosoref

#endif  // PROSOREF_ALIGNMENT_H_
