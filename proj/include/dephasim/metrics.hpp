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

#pragma once

#include <optional>
#include <vector>

#include "dephasim/lindblad.hpp"

namespace dephasim {

// I_p: Euclidean norm of the per-site population difference.
double population_infidelity(const Eigen::VectorXd& p_a, const Eigen::VectorXd& p_b);
double population_infidelity(const DensityMatrix& a, const DensityMatrix& b);

// I_s: Frobenius norm of the density-matrix difference. Always >= I_p.
double state_infidelity(const DensityMatrix& a, const DensityMatrix& b);

struct InfidelityReport {
  double population_infidelity = 0.0;
  std::optional<double> state_infidelity;
};

struct DecayTiming {
  int peak_site = 0;
  // First time the peak site's population crosses 1/4 of its initial value
  // (linear interpolation between samples); empty when the trajectory never
  // crosses, in which case final_ratio reports how far it got.
  std::optional<double> quarter_decay_time;
  double final_ratio = 1.0;
};

// Tracks the site with maximum initial population (ties toward lower index).
// The trajectory must start at t = 0 and times must be strictly increasing.
DecayTiming quarter_decay_time(const std::vector<double>& times,
                               const std::vector<Eigen::VectorXd>& populations);

struct DistributionSummary {
  int count = 0;
  double minimum = 0.0;
  double maximum = 0.0;
  double median = 0.0;
  // quantile levels and values, as requested (default deciles/quartiles)
  std::vector<double> quantile_levels;
  std::vector<double> quantile_values;
  std::vector<double> bin_edges;  // bins + 1 edges, equal width over [min, max]
  std::vector<long> bin_counts;
  std::vector<double> thresholds;
  std::vector<double> fraction_below;  // strictly below each threshold
};

// Order statistics with linear interpolation; q = 0.5 reduces to the
// midpoint convention for even counts.
double quantile(const std::vector<double>& sorted_values, double q);

DistributionSummary infidelity_distribution(
    std::vector<double> values, int bins = 20,
    const std::vector<double>& thresholds = {0.01},
    const std::vector<double>& quantile_levels = {0.1, 0.25, 0.5, 0.75, 0.9});

}  // namespace dephasim
