// Copyright (c) The FaaSim Authors.
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

#ifndef FAASIM_METRICS_H_
#define FAASIM_METRICS_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace faasim {

// Arithmetic mean; sample must be nonempty.
double Mean(std::span<const double> xs);

// Population variance (divide by n).  Needs n >= 2; a singleton has a
// mean but no spread to report, so asking for its variance is an error.
double PopulationVariance(std::span<const double> xs);

struct MeanVar {
  double mean;
  double variance;
};
MeanVar MeanVariance(std::span<const double> xs);

// Quantile by linear interpolation at fractional rank q * (n - 1) over the
// sorted sample, q in [0, 1].
double Quantile(std::span<const double> xs, double q);

// Q3 - Q1 under the same interpolation rule. {1,2,3,4} -> 1.5.
double Iqr(std::span<const double> xs);

// sigma / mu with the population sigma; the mean must be nonzero.
double CoefficientOfVariation(std::span<const double> xs);

// Sample Pearson correlation; both series need n >= 2 and nonzero spread.
double Pearson(std::span<const double> xs, std::span<const double> ys);

// Colocated-over-isolated ratio; isolated must be positive.
double NormalizeToIsolated(double colocated, double isolated);

}  // namespace faasim

#endif  // FAASIM_METRICS_H_
