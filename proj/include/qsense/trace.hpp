// Copyright 2026 The qsense Authors
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

#pragma once

#include <vector>

namespace qsense {

/// Population of the measured level versus Ramsey delay.
struct RamseyTrace {
  std::vector<double> delays;       // ns, strictly increasing
  std::vector<double> populations;  // in [0, 1]
  long n_avg = 0;                   // 0 marks a noiseless trace

  size_t size() const { return delays.size(); }
  /// Throws ValidationError unless delays increase, lengths match and at
  /// least 8 points are present.
  void validate() const;
};

}  // namespace qsense
