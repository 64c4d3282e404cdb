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

#ifndef FAASIM_AGENT_H_
#define FAASIM_AGENT_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "faasim/mlp.h"
#include "faasim/monitor.h"
#include "faasim/rng.h"

namespace faasim {

// Advantage actor-critic controller.  Once per window it revisits one
// latency-sensitive app, picks a joint (priority delta, allocation delta)
// action, enforces it, and scores the result against the next window.

inline constexpr int kNumActions = 16;
inline constexpr int kFeatureDim = 9;

// Per-dimension action component.  kNegInf revokes the resource.
enum class Delta { kNegInf = 0, kDown = 1, kHold = 2, kUp = 3 };

struct Action {
  Delta dp = Delta::kHold;
  Delta da = Delta::kHold;
};

int ActionId(const Action& a);      // dp * 4 + da
Action ActionFromId(int id);        // id in [0, 16)

// Attempted absolute policy values; kRevoke passes the revoke sentinel
// straight to enforcement.
struct PolicyRequest {
  int priority = kRevoke;
  int alloc = kRevoke;
};
PolicyRequest ApplyAction(const Action& a, int p_id, int a_id, int p_step,
                          int a_step);

// Lock-bound apps gain nothing from extra cores, so the only allocation
// component left open is revocation.
std::array<bool, kNumActions> MaskActions(bool f_lock);

// Scaling ranges measured during calibration.
struct FeatureBounds {
  std::array<double, 3> cont_lo{0, 0, 0};
  std::array<double, 3> cont_hi{1, 1, 1};
  double pcount_max = 1;  // cap for the peer priority census
  int num_cores = 6;
};

// Min-max scales the contention triple into [0, 10], clamping overshoot.
std::array<double, 3> ScaleContention(const std::array<double, 3>& raw,
                                      const FeatureBounds& b);

// Model input: [cont x3 (L2-normalized direction), s_fair, f_lock,
// p_id/99, a_id/(cores-1), peer-priority census, a_other/(cores-1)].
std::array<double, kFeatureDim> Preprocess(const AppState& st,
                                           const FeatureBounds& b);

struct AgentConfig {
  double alpha = 1e-4;
  double gamma = 0.99;
  double epsilon = 0.3;    // uniform-random share of exploration steps
  int p_step = 10;
  int a_step = 2;
  double reward_a = 1000;  // fairness weight
  double reward_b = 100;   // contention weight
  double reward_c = 1000;  // invalid-action penalty
  double tau = 0.75;       // fairness credit threshold
  int hidden = 64;
  uint64_t seed = 1;
};

struct RewardInputs {
  double s_fair = 1.0;                     // next-window fairness
  std::array<double, 3> cont_scaled{0, 0, 0};  // next window, [0, 10] scale
  int p_id = 0;      // priority before the action
  int a_id = 0;      // dedicated cores before the action
  int a_other = 0;   // dedicated cores held by peers
  int num_cores = 6;
  Action action;
};

// -c on an out-of-range attempt (revoked dimensions skip their check),
// otherwise a * fairness-credit - b * contention-magnitude.
double Reward(const RewardInputs& in, const AgentConfig& cfg);

inline double TdError(double r, double gamma, double v_next, double v) {
  return r + gamma * v_next - v;
}

// Linear decay hi -> lo as t goes 0 -> total; clamped outside.
double ExplorationRatio(double t, double total, double hi, double lo);

class A2cAgent {
 public:
  explicit A2cAgent(const AgentConfig& cfg, int feature_dim = kFeatureDim);
  A2cAgent(const AgentConfig& cfg, Mlp actor, Mlp critic);

  std::vector<double> Policy(std::span<const double> s,
                             const std::array<bool, kNumActions>& mask) const;
  double Value(std::span<const double> s) const;

  // Exploration steps: with prob epsilon a uniform valid action, else the
  // masked argmax.  Exploitation steps: always the masked argmax.
  int SelectAction(std::span<const double> s,
                   const std::array<bool, kNumActions>& mask, bool explore);

  // One actor-critic update on (s, a, r, s').  Skips (returns false) when
  // any resulting parameter step would be non-finite.
  bool Update(std::span<const double> s, int action,
              const std::array<bool, kNumActions>& mask, double r,
              std::span<const double> s_next, double* td_out = nullptr);

  int64_t updates() const { return updates_; }
  int64_t skipped_updates() const { return skipped_; }
  const AgentConfig& config() const { return cfg_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  Mlp& mutable_actor() { return actor_; }
  Mlp& mutable_critic() { return critic_; }

 private:
  AgentConfig cfg_;
  Mlp actor_, critic_;
  CounterRng rng_;
  int64_t updates_ = 0;
  int64_t skipped_ = 0;
};

struct DecisionRecord {
  int window = 0;
  int app = -1;
  int action = 0;
  bool explore = false;
  bool applied = true;   // enforcement accepted
  bool updated = false;  // a learning step ran on this transition
  int p_before = 0, a_before = 0;
  int p_after = 0, a_after = 0;
  double value = 0;     // critic estimate at decision time
  double reward = 0;    // filled one window later
  double td_error = 0;
};

struct FaaschedConfig {
  AgentConfig agent;
  FeatureBounds bounds;
  bool train = true;          // exploration and updates on
  double explore_hi = 5.0 / 6.0;
  double explore_lo = 1.0 / 101.0;
  double total_duration = 0;  // seconds; scales the exploration decay
};

class FaaschedController : public Controller {
 public:
  FaaschedController(const FaaschedConfig& cfg, A2cAgent agent);

  void OnWindow(const WindowSnapshot& snap, HostControl& host) override;

  const std::vector<DecisionRecord>& decisions() const { return decisions_; }
  const A2cAgent& agent() const { return agent_; }
  A2cAgent& agent() { return agent_; }

 private:
  struct Pending {
    bool active = false;
    int app = -1;
    std::array<double, kFeatureDim> s{};
    std::array<bool, kNumActions> mask{};
    int action = 0;
    bool explore = false;
    int p = 0, a = 0, ao = 0, cores = 0;
    size_t rec = 0;
  };

  FaaschedConfig cfg_;
  A2cAgent agent_;
  CounterRng rng_;  // exploration-step coin, separate from action draws
  std::vector<int> ls_apps_;
  bool scanned_ = false;
  size_t rotation_ = 0;
  Pending pending_;
  std::vector<DecisionRecord> decisions_;
};

// Checkpoint: config, bounds, and both networks; hex floats make the
// round trip bit-exact.
void SaveCheckpoint(const std::string& path, const A2cAgent& agent,
                    const FeatureBounds& bounds);

struct Checkpoint {
  AgentConfig config;
  FeatureBounds bounds;
  A2cAgent agent;
};
Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace faasim

#endif  // FAASIM_AGENT_H_
