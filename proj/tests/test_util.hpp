// Copyright 2026 The ssinfer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SSINFER_TESTS_TEST_UTIL_HPP_
#define SSINFER_TESTS_TEST_UTIL_HPP_

#include <boost/math/distributions/chi_squared.hpp>

#include <cstdint>
#include <vector>

namespace ssinfer::testing {

// p-value of Pearson's goodness-of-fit test against the uniform distribution.
inline double UniformChiSquareP(const std::vector<std::uint64_t>& counts) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  const double expected = static_cast<double>(total) / counts.size();
  double stat = 0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

// p-value of the chi-square test of homogeneity for two histograms.
inline double HomogeneityChiSquareP(const std::vector<std::uint64_t>& a,
                                    const std::vector<std::uint64_t>& b) {
  double na = 0, nb = 0;
  for (auto c : a) na += c;
  for (auto c : b) nb += c;
  double stat = 0;
  int dof = -1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double row = static_cast<double>(a[i] + b[i]);
    if (row == 0) continue;
    ++dof;
    const double ea = row * na / (na + nb);
    const double eb = row * nb / (na + nb);
    stat += (a[i] - ea) * (a[i] - ea) / ea + (b[i] - eb) * (b[i] - eb) / eb;
  }
  if (dof <= 0) return 1.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace ssinfer::testing

#endif  // SSINFER_TESTS_TEST_UTIL_HPP_
