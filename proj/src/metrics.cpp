// Copyright 2026 The Dephasim Authors
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

#include "dephasim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dephasim {

double population_infidelity(const Eigen::VectorXd& p_a, const Eigen::VectorXd& p_b) {
  if (p_a.size() != p_b.size()) {
    throw std::invalid_argument("population_infidelity: dimension mismatch");
  }
  return (p_a - p_b).norm();
}

double population_infidelity(const DensityMatrix& a, const DensityMatrix& b) {
  return population_infidelity(a.populations(), b.populations());
}

double state_infidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("state_infidelity: dimension mismatch");
  }
  return (a.entries - b.entries).norm();
}

DecayTiming quarter_decay_time(const std::vector<double>& times,
                               const std::vector<Eigen::VectorXd>& populations) {
  if (times.empty() || times.size() != populations.size()) {
    throw std::invalid_argument("quarter_decay_time: empty or mismatched trajectory");
  }
  if (times.front() != 0.0) {
    throw std::invalid_argument("quarter_decay_time: trajectory must start at t = 0");
  }

  DecayTiming out;
  populations.front().maxCoeff(&out.peak_site);
  const double initial = populations.front()[out.peak_site];
  if (initial <= 0.0) {
    throw std::invalid_argument("quarter_decay_time: non-positive initial peak");
  }
  const double target = 0.25 * initial;

  double previous = initial;
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (times[k] <= times[k - 1]) {
      throw std::invalid_argument("quarter_decay_time: times must be increasing");
    }
    const double current = populations[k][out.peak_site];
    if (previous > target && current <= target) {
      const double frac = (previous - target) / (previous - current);
      out.quarter_decay_time = times[k - 1] + frac * (times[k] - times[k - 1]);
      out.final_ratio = current / initial;
      return out;
    }
    previous = current;
  }
  out.final_ratio = populations.back()[out.peak_site] / initial;
  return out;
}

double quantile(const std::vector<double>& sorted_values, double q) {
  if (sorted_values.empty()) throw std::invalid_argument("quantile: empty input");
  if (q <= 0.0) return sorted_values.front();
  if (q >= 1.0) return sorted_values.back();
  const double pos = q * static_cast<double>(sorted_values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted_values.size()) return sorted_values.back();
  return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

DistributionSummary infidelity_distribution(std::vector<double> values, int bins,
                                            const std::vector<double>& thresholds,
                                            const std::vector<double>& quantile_levels) {
  if (values.empty()) throw std::invalid_argument("infidelity_distribution: empty input");
  if (bins < 1) throw std::invalid_argument("infidelity_distribution: bins must be >= 1");
  std::sort(values.begin(), values.end());

  DistributionSummary out;
  out.count = static_cast<int>(values.size());
  out.minimum = values.front();
  out.maximum = values.back();
  out.median = quantile(values, 0.5);
  out.quantile_levels = quantile_levels;
  for (double q : quantile_levels) out.quantile_values.push_back(quantile(values, q));

  const double span = out.maximum - out.minimum;
  const int used_bins = span > 0.0 ? bins : 1;
  out.bin_counts.assign(static_cast<std::size_t>(used_bins), 0);
  for (int b = 0; b <= used_bins; ++b) {
    out.bin_edges.push_back(out.minimum + span * static_cast<double>(b) / used_bins);
  }
  for (double v : values) {
    int b = span > 0.0
                ? static_cast<int>((v - out.minimum) / span * used_bins)
                : 0;
    b = std::clamp(b, 0, used_bins - 1);  // maximum lands in the last bin
    ++out.bin_counts[static_cast<std::size_t>(b)];
  }

  out.thresholds = thresholds;
  for (double threshold : thresholds) {
    const auto below = std::lower_bound(values.begin(), values.end(), threshold);
    out.fraction_below.push_back(static_cast<double>(below - values.begin()) /
                                 static_cast<double>(values.size()));
  }
  return out;
}

}  // namespace dephasim
