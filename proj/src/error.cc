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

#include "prosoref/error.h"

namespace prosoref {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvalidRange: return "InvalidRange";
    case ErrorCode::kInvalidOrder: return "InvalidOrder";
    case ErrorCode::kInvalidWave: return "InvalidWave";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kOverlappingSegments: return "OverlappingSegments";
    case ErrorCode::kNonMonotoneTimes: return "NonMonotoneTimes";
    case ErrorCode::kIncompleteStateTriple: return "IncompleteStateTriple";
    case ErrorCode::kEmptySegment: return "EmptySegment";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kTrackAlignmentMismatch: return "TrackAlignmentMismatch";
    case ErrorCode::kInvalidPosteriorgram: return "InvalidPosteriorgram";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kDivergedLoss: return "DivergedLoss";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kNoVoicedOverlap: return "NoVoicedOverlap";
    case ErrorCode::kZeroVariance: return "ZeroVariance";
    case ErrorCode::kEmptyScores: return "EmptyScores";
    case ErrorCode::kDegenerateSample: return "DegenerateSample";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kInvalidP: return "InvalidP";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kMissingReference: return "MissingReference";
    case ErrorCode::kFileNotFound: return "FileNotFound";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
      code_(code),
      detail_(what) {}

void Fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace prosoref
