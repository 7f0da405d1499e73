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

#ifndef PROSOREF_ERROR_H_
#define PROSOREF_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace prosoref {

enum class ErrorCode {
  kInvalidArgument,
  kIoError,
  // dsp-features
  kInvalidRange,
  kInvalidOrder,
  kInvalidWave,
  // alignment-io
  kMalformedLine,
  kOverlappingSegments,
  kNonMonotoneTimes,
  kIncompleteStateTriple,
  kEmptySegment,
  // prosody-agg / textless-ref
  kEmptyCorpus,
  kTrackAlignmentMismatch,
  kInvalidPosteriorgram,
  // vae-refenc
  kNonFiniteInput,
  kEmptyDataset,
  kDivergedLoss,
  kLengthMismatch,
  // objective-eval
  kEmptySequence,
  kDimMismatch,
  kNoVoicedOverlap,
  kZeroVariance,
  // listening-stats
  kEmptyScores,
  kDegenerateSample,
  kTooFewSamples,
  kInvalidP,
  // manifest
  kDuplicateId,
  kMissingReference,
  kFileNotFound,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every library failure is reported through this type; `code()` tells the
// caller which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const { return code_; }
  // Message without the code prefix.
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& what);

}  // namespace prosoref

#endif  // PROSOREF_ERROR_H_
