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

#include "prosoref/alignment.h"

#include <algorithm>
#include <cmath>
#include <optional>

#include "prosoref/error.h"
#include "prosoref/text_format.h"

namespace prosoref {
namespace {

struct LabelRow {
  double start_s;
  double end_s;
  std::string phone;
  int state;  // 0 for phone-level rows
  std::size_t line;
};

std::string AtLine(std::size_t line) { return "line " + std::to_string(line) + ": "; }

LabelRow ParseRow(std::string_view line, std::size_t line_no) {
  auto fields = SplitFields(line, '\t');
  if (fields.size() != 3 && fields.size() != 4) {
    Fail(ErrorCode::kMalformedLine,
         AtLine(line_no) + "expected 3 or 4 tab-separated fields, got " +
             std::to_string(fields.size()));
  }
  auto start = ParseDouble(fields[0]);
  auto end = ParseDouble(fields[1]);
  std::string_view phone = Trim(fields[2]);
  if (!start || !end || !std::isfinite(*start) || !std::isfinite(*end) || *start < 0.0) {
    Fail(ErrorCode::kMalformedLine, AtLine(line_no) + "bad time field");
  }
  if (phone.empty()) Fail(ErrorCode::kMalformedLine, AtLine(line_no) + "empty phone");
  int state = 0;
  if (fields.size() == 4) {
    auto idx = ParseInt(fields[3]);
    if (!idx || *idx < 1 || *idx > 3) {
      Fail(ErrorCode::kMalformedLine, AtLine(line_no) + "state index must be 1, 2 or 3");
    }
    state = static_cast<int>(*idx);
  }
  if (!(*start < *end)) {
    Fail(ErrorCode::kNonMonotoneTimes, AtLine(line_no) + "start must precede end");
  }
  return {*start, *end, std::string(phone), state, line_no};
}

}  // namespace

std::array<Interval, 3> TriPartition(double start_s, double end_s) {
  if (!(start_s < end_s)) {
    Fail(ErrorCode::kEmptySegment, "segment [" + FormatShortest(start_s) + ", " +
                                       FormatShortest(end_s) + ") is empty");
  }
  const double third = (end_s - start_s) / 3.0;
  const double b1 = start_s + third;
  const double b2 = start_s + 2.0 * third;
  return {Interval{start_s, b1}, Interval{b1, b2}, Interval{b2, end_s}};
}

PhoneAlignment ParseAlignment(std::string_view text) {
  PhoneAlignment out;
  std::vector<LabelRow> pending;  // state rows of the phone being assembled
  std::optional<LabelRow> previous;

  auto flush_states = [&](std::size_t line_no) {
    if (pending.size() != 3) {
      Fail(ErrorCode::kIncompleteStateTriple,
           AtLine(line_no) + "phone '" + pending.front().phone + "' has " +
               std::to_string(pending.size()) + " of 3 state rows");
    }
    PhoneSegment seg;
    seg.phone = pending.front().phone;
    seg.start_s = pending.front().start_s;
    seg.end_s = pending.back().end_s;
    for (int i = 0; i < 3; ++i) seg.states[i] = {pending[i].start_s, pending[i].end_s};
    out.segments.push_back(std::move(seg));
    pending.clear();
  };

  auto lines = SplitLines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    std::string_view line = lines[i];
    if (Trim(line).empty() || Trim(line).front() == '#') continue;
    LabelRow row = ParseRow(line, line_no);

    if (previous) {
      if (row.start_s < previous->start_s) {
        Fail(ErrorCode::kNonMonotoneTimes, AtLine(line_no) + "rows are not in time order");
      }
      if (row.start_s < previous->end_s) {
        Fail(ErrorCode::kOverlappingSegments,
             AtLine(line_no) + "starts at " + FormatShortest(row.start_s) +
                 " before previous row ends at " + FormatShortest(previous->end_s));
      }
    }

    if (row.state == 0) {
      if (!pending.empty()) flush_states(line_no);
      PhoneSegment seg;
      seg.phone = row.phone;
      seg.start_s = row.start_s;
      seg.end_s = row.end_s;
      seg.states = TriPartition(row.start_s, row.end_s);
      out.segments.push_back(std::move(seg));
    } else {
      if (row.state == 1 && !pending.empty()) flush_states(line_no);
      if (static_cast<std::size_t>(row.state) != pending.size() + 1) {
        Fail(ErrorCode::kIncompleteStateTriple,
             AtLine(line_no) + "state " + std::to_string(row.state) + " out of sequence");
      }
      if (!pending.empty() &&
          (row.phone != pending.back().phone || row.start_s != pending.back().end_s)) {
        Fail(ErrorCode::kIncompleteStateTriple,
             AtLine(line_no) + "state rows of one phone must share the label and be contiguous");
      }
      pending.push_back(row);
      if (pending.size() == 3) flush_states(line_no);
    }
    previous = std::move(row);
  }
  if (!pending.empty()) flush_states(lines.size());
  out.total_s = out.segments.empty() ? 0.0 : out.segments.back().end_s;
  return out;
}

std::string SerializeAlignment(const PhoneAlignment& alignment, LabelLevel level) {
  std::string out;
  for (const auto& seg : alignment.segments) {
    if (level == LabelLevel::kPhone) {
      out += FormatFixed(seg.start_s, 6) + '\t' + FormatFixed(seg.end_s, 6) + '\t' + seg.phone + '\n';
      continue;
    }
    for (int s = 0; s < 3; ++s) {
      out += FormatFixed(seg.states[s].start_s, 6) + '\t' + FormatFixed(seg.states[s].end_s, 6) +
             '\t' + seg.phone + '\t' + std::to_string(s + 1) + '\n';
    }
  }
  return out;
}

double FrameCenterSeconds(std::size_t frame, double hop_ms) {
  return (static_cast<double>(frame) + 0.5) * hop_ms / 1000.0;
}

FrameRange FramesInInterval(const Interval& interval, double hop_ms, std::size_t n_frames) {
  // First frame with centre >= t. The estimate is refined with the exact
  // comparison so adjacent intervals never disagree on a shared boundary.
  auto first_at_or_after = [&](double t) {
    const double guess = std::ceil(t * 1000.0 / hop_ms - 0.5);
    auto i = static_cast<std::size_t>(std::clamp(guess, 0.0, static_cast<double>(n_frames)));
    while (i > 0 && FrameCenterSeconds(i - 1, hop_ms) >= t) --i;
    while (i < n_frames && FrameCenterSeconds(i, hop_ms) < t) ++i;
    return i;
  };
  const std::size_t begin = first_at_or_after(interval.start_s);
  const std::size_t end = std::max(begin, first_at_or_after(interval.end_s));
  return {begin, end};
}

}  // namespace prosoref
