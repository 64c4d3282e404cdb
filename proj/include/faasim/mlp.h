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

#ifndef FAASIM_MLP_H_
#define FAASIM_MLP_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace faasim {

// Small dense network: tanh hidden layers, linear output.  Weights start
// uniform in +-1/sqrt(fan_in) from a seeded generator; biases start at 0.
class Mlp {
 public:
  Mlp(std::vector<int> layers, uint64_t seed, uint64_t stream);

  int in_dim() const { return layers_.front(); }
  int out_dim() const { return layers_.back(); }
  const std::vector<int>& layers() const { return layers_; }

  // Activations kept for backprop: act[0] is the input, act.back() the
  // linear output.
  struct Tape {
    std::vector<std::vector<double>> act;
  };

  std::vector<double> Forward(std::span<const double> x,
                              Tape* tape = nullptr) const;

  // Same shapes as the parameters, flattened row-major per layer.
  struct Grad {
    std::vector<std::vector<double>> w, b;
  };
  Grad ZeroGrad() const;

  // Accumulates d(dout . output)/d(params) into g.
  void Backward(const Tape& tape, std::span<const double> dout,
                Grad* g) const;

  // True when every scale*g component is finite.
  bool CanStep(const Grad& g, double scale) const;

  // params += scale * g; refuses (returns false, applies nothing) when any
  // scaled component is non-finite.
  bool Step(const Grad& g, double scale);

  // Text serialization via shortest hex floats: bit-exact round trip.
  void Save(std::ostream& os) const;
  static Mlp Load(std::istream& is);

  // Parameter access for tests and finite-difference checks.
  double& weight(int layer, int row, int col);
  double weight(int layer, int row, int col) const;
  double& bias(int layer, int row);

 private:
  Mlp() = default;
  std::vector<int> layers_;
  std::vector<std::vector<double>> w_;  // w_[l]: layers_[l+1] x layers_[l]
  std::vector<std::vector<double>> b_;
};

// Numerically stable; logits may be any finite values.
std::vector<double> Softmax(std::span<const double> logits);

// Masked-out entries get probability 0; the rest renormalize.  Throws when
// no entry stays valid.
std::vector<double> MaskedSoftmax(std::span<const double> logits,
                                  std::span<const bool> mask);

}  // namespace faasim

#endif  // FAASIM_MLP_H_
