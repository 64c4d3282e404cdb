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

#include "faasim/mlp.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "faasim/rng.h"

namespace faasim {
namespace {

void WriteHex(std::ostream& os, double v) {
  char buf[48];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v,
                                 std::chars_format::hex);
  if (ec != std::errc()) throw std::runtime_error("hexfloat encode failed");
  os.write(buf, end - buf);
}

double ReadHex(std::istream& is) {
  std::string tok;
  if (!(is >> tok)) throw std::runtime_error("truncated network file");
  double v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v,
                                 std::chars_format::hex);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw std::runtime_error("bad hexfloat token: " + tok);
  return v;
}

}  // namespace

Mlp::Mlp(std::vector<int> layers, uint64_t seed, uint64_t stream)
    : layers_(std::move(layers)) {
  if (layers_.size() < 2) throw std::invalid_argument("need >= 2 layers");
  for (int d : layers_)
    if (d < 1) throw std::invalid_argument("layer sizes must be >= 1");
  CounterRng rng(seed, stream);
  for (size_t l = 0; l + 1 < layers_.size(); ++l) {
    int rows = layers_[l + 1], cols = layers_[l];
    double lim = 1.0 / std::sqrt(static_cast<double>(cols));
    std::vector<double> w(static_cast<size_t>(rows) * cols);
    for (double& x : w) x = rng.NextUniform(-lim, lim);
    w_.push_back(std::move(w));
    b_.emplace_back(rows, 0.0);
  }
}

std::vector<double> Mlp::Forward(std::span<const double> x,
                                 Tape* tape) const {
  if (static_cast<int>(x.size()) != in_dim())
    throw std::invalid_argument("input dimension mismatch");
  std::vector<double> cur(x.begin(), x.end());
  if (tape) {
    tape->act.clear();
    tape->act.push_back(cur);
  }
  for (size_t l = 0; l < w_.size(); ++l) {
    int rows = layers_[l + 1], cols = layers_[l];
    std::vector<double> nxt(rows);
    const double* w = w_[l].data();
    for (int r = 0; r < rows; ++r) {
      double z = b_[l][r];
      const double* row = w + static_cast<size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) z += row[c] * cur[c];
      nxt[r] = (l + 1 == w_.size()) ? z : std::tanh(z);
    }
    cur = std::move(nxt);
    if (tape) tape->act.push_back(cur);
  }
  return cur;
}

Mlp::Grad Mlp::ZeroGrad() const {
  Grad g;
  for (size_t l = 0; l < w_.size(); ++l) {
    g.w.emplace_back(w_[l].size(), 0.0);
    g.b.emplace_back(b_[l].size(), 0.0);
  }
  return g;
}

void Mlp::Backward(const Tape& tape, std::span<const double> dout,
                   Grad* g) const {
  if (tape.act.size() != layers_.size())
    throw std::invalid_argument("tape does not match network");
  if (static_cast<int>(dout.size()) != out_dim())
    throw std::invalid_argument("output gradient dimension mismatch");
  std::vector<double> delta(dout.begin(), dout.end());
  for (int l = static_cast<int>(w_.size()) - 1; l >= 0; --l) {
    int rows = layers_[l + 1], cols = layers_[l];
    const std::vector<double>& in = tape.act[l];
    for (int r = 0; r < rows; ++r) {
      double d = delta[r];
      double* grow = g->w[l].data() + static_cast<size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) grow[c] += d * in[c];
      g->b[l][r] += d;
    }
    if (l == 0) break;
    std::vector<double> prev(cols, 0.0);
    const double* w = w_[l].data();
    for (int r = 0; r < rows; ++r) {
      double d = delta[r];
      const double* row = w + static_cast<size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) prev[c] += row[c] * d;
    }
    // tape.act[l] holds tanh outputs for every hidden layer.
    for (int c = 0; c < cols; ++c) prev[c] *= 1.0 - in[c] * in[c];
    delta = std::move(prev);
  }
}

bool Mlp::CanStep(const Grad& g, double scale) const {
  for (size_t l = 0; l < w_.size(); ++l) {
    for (double x : g.w[l])
      if (!std::isfinite(scale * x)) return false;
    for (double x : g.b[l])
      if (!std::isfinite(scale * x)) return false;
  }
  return true;
}

bool Mlp::Step(const Grad& g, double scale) {
  if (!CanStep(g, scale)) return false;
  for (size_t l = 0; l < w_.size(); ++l) {
    for (size_t i = 0; i < w_[l].size(); ++i) w_[l][i] += scale * g.w[l][i];
    for (size_t i = 0; i < b_[l].size(); ++i) b_[l][i] += scale * g.b[l][i];
  }
  return true;
}

void Mlp::Save(std::ostream& os) const {
  os << "layers " << layers_.size();
  for (int d : layers_) os << ' ' << d;
  os << '\n';
  for (size_t l = 0; l < w_.size(); ++l) {
    os << "w" << l;
    for (double v : w_[l]) {
      os << ' ';
      WriteHex(os, v);
    }
    os << '\n' << "b" << l;
    for (double v : b_[l]) {
      os << ' ';
      WriteHex(os, v);
    }
    os << '\n';
  }
}

Mlp Mlp::Load(std::istream& is) {
  std::string tag;
  size_t n = 0;
  if (!(is >> tag >> n) || tag != "layers" || n < 2)
    throw std::runtime_error("bad network header");
  Mlp m;
  m.layers_.resize(n);
  for (size_t i = 0; i < n; ++i) {
    if (!(is >> m.layers_[i]) || m.layers_[i] < 1)
      throw std::runtime_error("bad layer size");
  }
  for (size_t l = 0; l + 1 < n; ++l) {
    size_t rows = m.layers_[l + 1], cols = m.layers_[l];
    if (!(is >> tag) || tag != "w" + std::to_string(l))
      throw std::runtime_error("bad weight block tag");
    std::vector<double> w(rows * cols);
    for (double& v : w) v = ReadHex(is);
    m.w_.push_back(std::move(w));
    if (!(is >> tag) || tag != "b" + std::to_string(l))
      throw std::runtime_error("bad bias block tag");
    std::vector<double> b(rows);
    for (double& v : b) v = ReadHex(is);
    m.b_.push_back(std::move(b));
  }
  return m;
}

double& Mlp::weight(int layer, int row, int col) {
  return w_[layer][static_cast<size_t>(row) * layers_[layer] + col];
}
double Mlp::weight(int layer, int row, int col) const {
  return w_[layer][static_cast<size_t>(row) * layers_[layer] + col];
}
double& Mlp::bias(int layer, int row) { return b_[layer][row]; }

std::vector<double> Softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax of empty vector");
  double hi = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - hi);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

std::vector<double> MaskedSoftmax(std::span<const double> logits,
                                  std::span<const bool> mask) {
  if (logits.size() != mask.size())
    throw std::invalid_argument("mask size mismatch");
  double hi = 0;
  bool any = false;
  for (size_t i = 0; i < logits.size(); ++i) {
    if (!mask[i]) continue;
    hi = any ? std::max(hi, logits[i]) : logits[i];
    any = true;
  }
  if (!any) throw std::invalid_argument("all actions masked out");
  std::vector<double> out(logits.size(), 0.0);
  double sum = 0;
  for (size_t i = 0; i < logits.size(); ++i) {
    if (!mask[i]) continue;
    out[i] = std::exp(logits[i] - hi);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace faasim
