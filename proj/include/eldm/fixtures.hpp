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

/// \file
/// \brief Published reference values bundled with the library: the two
/// driver-type centroids and the 19-sample label rows of the k-means and
/// hierarchical runs they came from.

#ifndef ELDM__FIXTURES_HPP_
#define ELDM__FIXTURES_HPP_

#include <string>
#include <vector>

#include "eldm/eldm_planner.hpp"

namespace eldm::fixtures
{

/// Driver type 1: negative straight offset, late symmetric curve cutting.
DriverParams type1_centroid();
/// Driver type 3: near-zero straight offset, early asymmetric cutting.
DriverParams type3_centroid();

/// Sample ids in table order ("1/1", "1/2", ..., "15").
std::vector<std::string> sample_ids();
/// Cluster labels per sample; label 2 is the outlier group.
std::vector<int> kmeans_labels();
std::vector<int> hierarchical_labels();

}  // namespace eldm::fixtures

#endif  // ELDM__FIXTURES_HPP_
