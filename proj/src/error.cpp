// Copyright 2026 The ELDM Authors
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

#include "eldm/error.hpp"

namespace eldm
{

std::string_view to_string(ErrorCode code)
{
  switch (code) {
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DegenerateSegment: return "DegenerateSegment";
    case ErrorCode::NonMonotoneStations: return "NonMonotoneStations";
    case ErrorCode::OutOfCorridor: return "OutOfCorridor";
    case ErrorCode::StationOutOfRange: return "StationOutOfRange";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::HorizonExceedsRoad: return "HorizonExceedsRoad";
    case ErrorCode::PlanInfeasible: return "PlanInfeasible";
    case ErrorCode::WrongLength: return "WrongLength";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::LogTooShort: return "LogTooShort";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::SingleCluster: return "SingleCluster";
    case ErrorCode::NoEligibleK: return "NoEligibleK";
    case ErrorCode::EmptyCluster: return "EmptyCluster";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::NoTypesSurvive: return "NoTypesSurvive";
    case ErrorCode::EmptyModel: return "EmptyModel";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::GoalNotFound: return "GoalNotFound";
    case ErrorCode::NoCurvesDetected: return "NoCurvesDetected";
    case ErrorCode::RoadMismatch: return "RoadMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace eldm
