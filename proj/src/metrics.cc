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

#include "faasim/metrics.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace faasim {

double Mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("Mean: empty sample");
  double sum = 0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double PopulationVariance(std::span<const double> xs) {
  if (xs.size() < 2)
    throw std::invalid_argument("PopulationVariance: need n >= 2");
  double m = Mean(xs);
  double acc = 0;
  for (double x : xs) acc += (x - m) * (x - m);
  return acc / static_cast<double>(xs.size());
}

MeanVar MeanVariance(std::span<const double> xs) {
  return MeanVar{Mean(xs), PopulationVariance(xs)};
}

double Quantile(std::span<const double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("Quantile: empty sample");
  if (q < 0 || q > 1) throw std::invalid_argument("Quantile: q outside [0,1]");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  double rank = q * static_cast<double>(sorted.size() - 1);
  size_t lo = static_cast<size_t>(rank);
  double frac = rank - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double Iqr(std::span<const double> xs) {
  return Quantile(xs, 0.75) - Quantile(xs, 0.25);
}

double CoefficientOfVariation(std::span<const double> xs) {
  double m = Mean(xs);
  if (m == 0)
    throw std::invalid_argument("CoefficientOfVariation: zero mean");
  return std::sqrt(PopulationVariance(xs)) / m;
}

double Pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("Pearson: length mismatch");
  if (xs.size() < 2) throw std::invalid_argument("Pearson: need n >= 2");
  double mx = Mean(xs), my = Mean(ys);
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0)
    throw std::invalid_argument("Pearson: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

double NormalizeToIsolated(double colocated, double isolated) {
  if (isolated <= 0)
    throw std::invalid_argument("NormalizeToIsolated: isolated must be > 0");
  return colocated / isolated;
}

}  // namespace faasim
