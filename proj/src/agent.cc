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

#include "faasim/agent.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace faasim {
namespace {

void WriteHex(std::ostream& os, double v) {
  char buf[48];
  auto [end, ec] =
      std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  if (ec != std::errc()) throw std::runtime_error("hexfloat encode failed");
  os.write(buf, end - buf);
}

double ParseHex(const std::string& tok) {
  double v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v,
                                 std::chars_format::hex);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw std::runtime_error("bad hexfloat token: " + tok);
  return v;
}

double ExpectHex(std::istream& is, const char* key) {
  std::string k, v;
  if (!(is >> k >> v) || k != key)
    throw std::runtime_error(std::string("checkpoint: expected ") + key);
  return ParseHex(v);
}

int64_t ExpectInt(std::istream& is, const char* key) {
  std::string k;
  int64_t v = 0;
  if (!(is >> k >> v) || k != key)
    throw std::runtime_error(std::string("checkpoint: expected ") + key);
  return v;
}

int StepOf(Delta d, int step) {
  switch (d) {
    case Delta::kDown:
      return -step;
    case Delta::kUp:
      return step;
    default:
      return 0;
  }
}

}  // namespace

int ActionId(const Action& a) {
  return static_cast<int>(a.dp) * 4 + static_cast<int>(a.da);
}

Action ActionFromId(int id) {
  if (id < 0 || id >= kNumActions) throw std::invalid_argument("bad action id");
  return Action{static_cast<Delta>(id / 4), static_cast<Delta>(id % 4)};
}

PolicyRequest ApplyAction(const Action& a, int p_id, int a_id, int p_step,
                          int a_step) {
  PolicyRequest req;
  if (a.dp == Delta::kNegInf) {
    req.priority = kRevoke;
  } else {
    req.priority = p_id + StepOf(a.dp, p_step);
    // Keep an accidental -1 from reading as the revoke sentinel; -2 is
    // rejected just the same.
    if (req.priority == kRevoke) req.priority = kRevoke - 1;
  }
  if (a.da == Delta::kNegInf) {
    req.alloc = kRevoke;
  } else {
    req.alloc = a_id + StepOf(a.da, a_step);
    if (req.alloc == kRevoke) req.alloc = kRevoke - 1;
  }
  return req;
}

std::array<bool, kNumActions> MaskActions(bool f_lock) {
  std::array<bool, kNumActions> m;
  for (int id = 0; id < kNumActions; ++id) {
    m[id] = !f_lock || ActionFromId(id).da == Delta::kNegInf;
  }
  return m;
}

std::array<double, 3> ScaleContention(const std::array<double, 3>& raw,
                                      const FeatureBounds& b) {
  std::array<double, 3> out{0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    double span = b.cont_hi[i] - b.cont_lo[i];
    if (span <= 0) continue;
    out[i] = 10.0 * std::clamp((raw[i] - b.cont_lo[i]) / span, 0.0, 1.0);
  }
  return out;
}

std::array<double, kFeatureDim> Preprocess(const AppState& st,
                                           const FeatureBounds& b) {
  std::array<double, kFeatureDim> f{};
  auto cs = ScaleContention(st.s_cont, b);
  double norm = std::sqrt(cs[0] * cs[0] + cs[1] * cs[1] + cs[2] * cs[2]);
  if (norm > 0) {
    f[0] = cs[0] / norm;
    f[1] = cs[1] / norm;
    f[2] = cs[2] / norm;
  }
  f[3] = std::clamp(st.s_fair, 0.0, 1.0);
  f[4] = st.f_lock ? 1.0 : 0.0;
  f[5] = std::clamp(st.p_id, 0.0, 99.0) / 99.0;
  double amax = std::max(1, b.num_cores - 1);
  f[6] = std::clamp(st.a_id, 0.0, amax) / amax;
  double pc = std::max(1.0, b.pcount_max);
  f[7] = 0.5 * (std::clamp(st.p_low, 0.0, pc) / pc +
                std::clamp(st.p_high, 0.0, pc) / pc);
  f[8] = std::clamp(st.a_other, 0.0, amax) / amax;
  return f;
}

double Reward(const RewardInputs& in, const AgentConfig& cfg) {
  bool invalid = false;
  if (in.action.da != Delta::kNegInf) {
    int a_used = in.a_id + in.a_other + StepOf(in.action.da, cfg.a_step);
    if (a_used > in.num_cores) invalid = true;
  }
  if (in.action.dp != Delta::kNegInf) {
    int p_used = in.p_id + StepOf(in.action.dp, cfg.p_step);
    if (p_used > 99 || p_used < 1) invalid = true;
  }
  if (invalid) return -cfg.reward_c;
  double r_fair = in.s_fair > cfg.tau ? in.s_fair : 0.0;
  double norm = std::sqrt(in.cont_scaled[0] * in.cont_scaled[0] +
                          in.cont_scaled[1] * in.cont_scaled[1] +
                          in.cont_scaled[2] * in.cont_scaled[2]);
  double r_cont = norm / (10.0 * std::sqrt(3.0));
  return cfg.reward_a * r_fair - cfg.reward_b * r_cont;
}

double ExplorationRatio(double t, double total, double hi, double lo) {
  if (total <= 0) return lo;
  double p = hi + (lo - hi) * (t / total);
  return std::clamp(p, std::min(lo, hi), std::max(lo, hi));
}

// ---------------------------------------------------------------------------

A2cAgent::A2cAgent(const AgentConfig& cfg, int feature_dim)
    : cfg_(cfg),
      actor_({feature_dim, cfg.hidden, cfg.hidden, kNumActions}, cfg.seed,
             0xac),
      critic_({feature_dim, cfg.hidden, cfg.hidden, 1}, cfg.seed, 0xc1),
      rng_(cfg.seed, 0x5e1) {
  if (cfg.alpha <= 0 || cfg.gamma < 0 || cfg.gamma > 1)
    throw std::invalid_argument("bad learning constants");
  if (cfg.epsilon < 0 || cfg.epsilon > 1)
    throw std::invalid_argument("epsilon must be in [0, 1]");
}

A2cAgent::A2cAgent(const AgentConfig& cfg, Mlp actor, Mlp critic)
    : cfg_(cfg),
      actor_(std::move(actor)),
      critic_(std::move(critic)),
      rng_(cfg.seed, 0x5e1) {
  if (actor_.out_dim() != kNumActions || critic_.out_dim() != 1 ||
      actor_.in_dim() != critic_.in_dim())
    throw std::invalid_argument("network shapes do not match the agent");
}

std::vector<double> A2cAgent::Policy(
    std::span<const double> s, const std::array<bool, kNumActions>& mask) const {
  auto logits = actor_.Forward(s);
  return MaskedSoftmax(logits, std::span<const bool>(mask.data(), mask.size()));
}

double A2cAgent::Value(std::span<const double> s) const {
  return critic_.Forward(s)[0];
}

int A2cAgent::SelectAction(std::span<const double> s,
                           const std::array<bool, kNumActions>& mask,
                           bool explore) {
  // Exploration is epsilon-greedy: uniform over the mask with probability
  // epsilon, the actor argmax otherwise.  Exploitation is the pure argmax.
  if (explore && rng_.NextUnit() <= cfg_.epsilon) {
    int nvalid = 0;
    for (bool m : mask) nvalid += m;
    uint64_t k = rng_.NextBelow(static_cast<uint64_t>(nvalid));
    for (int i = 0; i < kNumActions; ++i) {
      if (!mask[i]) continue;
      if (k == 0) return i;
      --k;
    }
  }
  auto pi = Policy(s, mask);
  int best = -1;
  for (int i = 0; i < kNumActions; ++i) {
    if (!mask[i]) continue;
    if (best < 0 || pi[i] > pi[best]) best = i;
  }
  return best;
}

bool A2cAgent::Update(std::span<const double> s, int action,
                      const std::array<bool, kNumActions>& mask, double r,
                      std::span<const double> s_next, double* td_out) {
  if (action < 0 || action >= kNumActions || !mask[action])
    throw std::invalid_argument("update with an invalid action");
  Mlp::Tape tc;
  double v = critic_.Forward(s, &tc)[0];
  double v_next = critic_.Forward(s_next)[0];
  double delta = TdError(r, cfg_.gamma, v_next, v);
  if (td_out) *td_out = delta;

  Mlp::Grad gc = critic_.ZeroGrad();
  std::array<double, 1> one{1.0};
  critic_.Backward(tc, one, &gc);

  Mlp::Tape ta;
  auto logits = actor_.Forward(s, &ta);
  auto pi = MaskedSoftmax(logits, std::span<const bool>(mask.data(), mask.size()));
  std::vector<double> dlog(pi.size());
  for (size_t i = 0; i < pi.size(); ++i) dlog[i] = -pi[i];
  dlog[action] += 1.0;
  Mlp::Grad ga = actor_.ZeroGrad();
  actor_.Backward(ta, dlog, &ga);

  double scale = cfg_.alpha * delta;
  if (!critic_.CanStep(gc, scale) || !actor_.CanStep(ga, scale)) {
    skipped_++;
    return false;
  }
  critic_.Step(gc, scale);
  actor_.Step(ga, scale);
  updates_++;
  return true;
}

// ---------------------------------------------------------------------------

FaaschedController::FaaschedController(const FaaschedConfig& cfg,
                                       A2cAgent agent)
    : cfg_(cfg),
      agent_(std::move(agent)),
      rng_(cfg.agent.seed, 0xf0) {
  if (cfg_.train && cfg_.total_duration <= 0)
    throw std::invalid_argument("training needs a positive total_duration");
}

void FaaschedController::OnWindow(const WindowSnapshot& snap,
                                  HostControl& host) {
  if (!scanned_) {
    for (int i = 0; i < host.app_count(); ++i)
      if (host.spec(i).category == LatencyClass::kSensitive)
        ls_apps_.push_back(i);
    scanned_ = true;
  }

  if (pending_.active) {
    AppState st = AssembleState(snap, pending_.app);
    auto s2 = Preprocess(st, cfg_.bounds);
    RewardInputs ri;
    ri.s_fair = snap.fairness;
    ri.cont_scaled = ScaleContention(st.s_cont, cfg_.bounds);
    ri.p_id = pending_.p;
    ri.a_id = pending_.a;
    ri.a_other = pending_.ao;
    ri.num_cores = pending_.cores;
    ri.action = ActionFromId(pending_.action);
    double r = Reward(ri, cfg_.agent);
    DecisionRecord& rec = decisions_[pending_.rec];
    rec.reward = r;
    if (cfg_.train && pending_.explore) {
      double td = 0;
      rec.updated = agent_.Update(pending_.s, pending_.action, pending_.mask,
                                  r, s2, &td);
      rec.td_error = td;
    }
    pending_.active = false;
  }

  if (ls_apps_.empty()) return;
  int app = ls_apps_[rotation_ % ls_apps_.size()];
  rotation_++;

  AppState st = AssembleState(snap, app);
  auto s = Preprocess(st, cfg_.bounds);
  auto mask = MaskActions(st.f_lock);
  bool explore = false;
  if (cfg_.train) {
    double p = ExplorationRatio(snap.t1, cfg_.total_duration, cfg_.explore_hi,
                                cfg_.explore_lo);
    explore = rng_.NextUnit() <= p;
  }
  int action = agent_.SelectAction(s, mask, explore);

  int p_before = host.priority_of(app);
  int a_before = host.alloc_of(app);
  int ao = host.dedicated_elsewhere(app);
  PolicyRequest req = ApplyAction(ActionFromId(action), p_before, a_before,
                                  cfg_.agent.p_step, cfg_.agent.a_step);
  EnforceResult er = host.ApplySchedPolicy(app, req.priority, req.alloc);

  DecisionRecord rec;
  rec.window = snap.index;
  rec.app = app;
  rec.action = action;
  rec.explore = explore;
  rec.applied = er.applied();
  rec.p_before = p_before;
  rec.a_before = a_before;
  rec.p_after = host.priority_of(app);
  rec.a_after = host.alloc_of(app);
  rec.value = agent_.Value(s);
  decisions_.push_back(rec);

  pending_.active = true;
  pending_.app = app;
  pending_.s = s;
  pending_.mask = mask;
  pending_.action = action;
  pending_.explore = explore;
  pending_.p = p_before;
  pending_.a = a_before;
  pending_.ao = ao;
  pending_.cores = host.num_cores();
  pending_.rec = decisions_.size() - 1;
}

// ---------------------------------------------------------------------------

void SaveCheckpoint(const std::string& path, const A2cAgent& agent,
                    const FeatureBounds& bounds) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  const AgentConfig& c = agent.config();
  os << "faasched-agent-v1\n";
  auto put = [&os](const char* key, double v) {
    os << key << ' ';
    WriteHex(os, v);
    os << '\n';
  };
  put("alpha", c.alpha);
  put("gamma", c.gamma);
  put("epsilon", c.epsilon);
  os << "p_step " << c.p_step << '\n';
  os << "a_step " << c.a_step << '\n';
  put("reward_a", c.reward_a);
  put("reward_b", c.reward_b);
  put("reward_c", c.reward_c);
  put("tau", c.tau);
  os << "hidden " << c.hidden << '\n';
  os << "seed " << c.seed << '\n';
  os << "bounds";
  for (double v : bounds.cont_lo) {
    os << ' ';
    WriteHex(os, v);
  }
  for (double v : bounds.cont_hi) {
    os << ' ';
    WriteHex(os, v);
  }
  os << ' ';
  WriteHex(os, bounds.pcount_max);
  os << ' ' << bounds.num_cores << '\n';
  os << "actor\n";
  agent.actor().Save(os);
  os << "critic\n";
  agent.critic().Save(os);
  if (!os) throw std::runtime_error("write failed: " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string tag;
  if (!(is >> tag) || tag != "faasched-agent-v1")
    throw std::runtime_error("not an agent checkpoint: " + path);
  AgentConfig c;
  c.alpha = ExpectHex(is, "alpha");
  c.gamma = ExpectHex(is, "gamma");
  c.epsilon = ExpectHex(is, "epsilon");
  c.p_step = static_cast<int>(ExpectInt(is, "p_step"));
  c.a_step = static_cast<int>(ExpectInt(is, "a_step"));
  c.reward_a = ExpectHex(is, "reward_a");
  c.reward_b = ExpectHex(is, "reward_b");
  c.reward_c = ExpectHex(is, "reward_c");
  c.tau = ExpectHex(is, "tau");
  c.hidden = static_cast<int>(ExpectInt(is, "hidden"));
  c.seed = static_cast<uint64_t>(ExpectInt(is, "seed"));
  FeatureBounds b;
  if (!(is >> tag) || tag != "bounds")
    throw std::runtime_error("checkpoint: expected bounds");
  std::string v;
  for (int i = 0; i < 3; ++i) {
    is >> v;
    b.cont_lo[i] = ParseHex(v);
  }
  for (int i = 0; i < 3; ++i) {
    is >> v;
    b.cont_hi[i] = ParseHex(v);
  }
  is >> v;
  b.pcount_max = ParseHex(v);
  if (!(is >> b.num_cores))
    throw std::runtime_error("checkpoint: bad bounds");
  if (!(is >> tag) || tag != "actor")
    throw std::runtime_error("checkpoint: expected actor");
  Mlp actor = Mlp::Load(is);
  if (!(is >> tag) || tag != "critic")
    throw std::runtime_error("checkpoint: expected critic");
  Mlp critic = Mlp::Load(is);
  return Checkpoint{c, b, A2cAgent(c, std::move(actor), std::move(critic))};
}

}  // namespace faasim
