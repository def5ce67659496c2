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

#include "eldm/fixtures.hpp"

namespace eldm::fixtures
{

// 3x7 interchange form [p_left | p_right | dy0 dy0 dy0], one row per node.

DriverParams type1_centroid()
{
  DriverParams p;
  p.p_left = {{{1.26, -1.32, 0.14}, {0.37, -0.24, -0.05}, {-0.60, 0.69, 0.00}}};
  p.p_right = {{{0.16, 0.03, -0.12}, {-0.75, 1.07, -0.25}, {-0.35, 0.21, 0.22}}};
  p.dy0 = -0.09;
  return p;
}

DriverParams type3_centroid()
{
  DriverParams p;
  p.p_left = {{{-0.45, 0.64, -0.21}, {-1.00, 1.32, -0.33}, {-0.51, 0.66, -0.17}}};
  p.p_right = {{{-0.38, 0.71, -0.26}, {-1.67, 2.21, -0.48}, {0.58, -0.78, 0.28}}};
  p.dy0 = 0.00;
  return p;
}

std::vector<std::string> sample_ids()
{
  return {"1/1", "1/2", "2/1", "2/2", "2/3", "3", "4/1", "4/2", "5", "6",
    "7", "8", "9", "10", "11", "12", "13", "14", "15"};
}

std::vector<int> kmeans_labels()
{
  return {1, 1, 1, 3, 1, 1, 3, 3, 3, 1, 3, 3, 1, 1, 3, 2, 1, 3, 1};
}

std::vector<int> hierarchical_labels()
{
  return {1, 1, 1, 3, 2, 1, 3, 3, 3, 1, 2, 3, 1, 1, 3, 2, 2, 3, 1};
}

}  // namespace eldm::fixtures
