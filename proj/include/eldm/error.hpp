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

#ifndef ELDM__ERROR_HPP_
#define ELDM__ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace eldm
{

/// Every failure raised by the library carries one of these codes so callers
/// (and the CLI) can branch on the kind of failure without parsing messages.
enum class ErrorCode
{
  // road_geometry
  TooFewPoints,
  DegenerateSegment,
  NonMonotoneStations,
  OutOfCorridor,
  StationOutOfRange,
  NoConvergence,
  DegenerateInput,
  OutOfRange,
  // eldm_planner
  HorizonExceedsRoad,
  PlanInfeasible,
  WrongLength,
  InvalidConfig,
  // identification
  LogTooShort,
  RankDeficient,
  // clustering
  LengthMismatch,
  KOutOfRange,
  SingleCluster,
  NoEligibleK,
  EmptyCluster,
  TooFewSamples,
  ZeroVariance,
  NoTypesSurvive,
  EmptyModel,
  InvalidArgument,
  // simulation
  GoalNotFound,
  NoCurvesDetected,
  RoadMismatch,
  // io / cli
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string & message)
  : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
  {
  }

  ErrorCode code() const noexcept {return code_;}

private:
  ErrorCode code_;
};

}  // namespace eldm

#endif  // ELDM__ERROR_HPP_
