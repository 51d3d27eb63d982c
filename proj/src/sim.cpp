// Copyright 2026 The HOI Anticipation Authors. All Rights Reserved.
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

#include "hoi/sim.h"

#include <algorithm>
#include <cmath>
#include <memory>

namespace hoi {

double Timeline::first_start(const std::vector<Interval>& agent, const std::string& label) const {
  for (const Interval& iv : agent) {
    if (iv.label == label) return iv.start;
  }
  return -1.0;
}

namespace {

// Union length of (possibly overlapping) intervals.
double union_length(std::vector<std::pair<double, double>> spans) {
  std::sort(spans.begin(), spans.end());
  double total = 0, cur_lo = 0, cur_hi = -1;
  bool open = false;
  for (const auto& [lo, hi] : spans) {
    if (hi <= lo) continue;
    if (!open || lo > cur_hi) {
      if (open) total += cur_hi - cur_lo;
      cur_lo = lo;
      cur_hi = hi;
      open = true;
    } else {
      cur_hi = std::max(cur_hi, hi);
    }
  }
  if (open) total += cur_hi - cur_lo;
  return total;
}

std::vector<std::pair<double, double>> spans_of(const std::vector<Interval>& ivs) {
  std::vector<std::pair<double, double>> s;
  for (const Interval& iv : ivs) s.emplace_back(iv.start, iv.end);
  return s;
}

// Overlap length of two interval unions.
double overlap_length(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  double total = 0;
  for (const Interval& x : a) {
    for (const Interval& y : b) {
      const double lo = std::max(x.start, y.start);
      const double hi = std::min(x.end, y.end);
      if (hi > lo) total += hi - lo;
    }
  }
  // Assumes intervals within one agent do not overlap each other, which the
  // recorders guarantee.
  return total;
}

}  // namespace

FluencyReport fluency(const Timeline& tl) {
  if (!(tl.total > 0)) throw ContractError("fluency: total duration must be positive");
  FluencyReport r;
  const double human_active = union_length(spans_of(tl.human));
  const double robot_active = union_length(spans_of(tl.robot));
  r.h_idle = 100.0 * (1.0 - human_active / tl.total);
  r.r_idle = 100.0 * (1.0 - robot_active / tl.total);
  r.c_act = 100.0 * overlap_length(tl.human, tl.robot) / tl.total;

  // Handoff delay: consecutive actions by different agents, ordered by end
  // time; the gap runs from one action's end to the other's start.
  struct Tagged {
    int agent;
    double start, end;
  };
  std::vector<Tagged> all;
  for (const Interval& iv : tl.human) all.push_back({0, iv.start, iv.end});
  for (const Interval& iv : tl.robot) all.push_back({1, iv.start, iv.end});
  std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) {
    if (a.end != b.end) return a.end < b.end;
    return a.start < b.start;
  });
  double delay = 0;
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    if (all[i].agent != all[i + 1].agent) delay += all[i + 1].start - all[i].end;
  }
  r.f_del = 100.0 * delay / tl.total;

  const double pour_start = tl.first_start(tl.robot, "pour");
  const double hold_start = tl.first_start(tl.human, "hold_cup");
  r.waiting_time = (pour_start >= 0 && hold_start >= 0) ? pour_start - hold_start : -1.0;
  return r;
}

void Scenario::validate() const {
  if (grab_duration <= 0 || pour_duration <= 0 || return_duration <= 0 || idle_duration <= 0) {
    throw ContractError("scenario: action durations must be positive");
  }
  if (!(threshold > 0 && threshold < 1)) throw ContractError("scenario: threshold must be in (0,1)");
  if (tick <= 0 || timeout <= 0 || approach_duration <= 0 || d0 <= 0) {
    throw ContractError("scenario: tick, timeout, approach_duration, d0 must be positive");
  }
  if (tau_a < 0) throw ContractError("scenario: tau_a must be non-negative");
}

double Scenario::distance(double t) const {
  const double rate = 1.0 / approach_duration;
  const auto approach_dist = [&](double u) {
    if (u < approach_start) return 1.0;
    return std::max(0.0, 1.0 - (u - approach_start) * rate);
  };
  if (leave_time >= 0 && t >= leave_time) {
    return std::min(1.0, approach_dist(leave_time) + rate * (t - leave_time));
  }
  return approach_dist(t);
}

bool Scenario::hold_active(double t) const {
  if (leave_time >= 0 && leave_time <= hold_start_time()) return false;
  return t >= hold_start_time();
}

double Scenario::hold_start_time() const {
  return approach_start + approach_duration + hold_delay;
}

Predictor make_scripted_predictor(const Scenario& sc, std::uint64_t seed) {
  auto rng = std::make_shared<Prng>(seed);
  const Scenario s = sc;
  return [s, rng](double t, Blackboard& bb) {
    const double lead = t + static_cast<double>(s.tau_a);
    double next_to = 1.0 - s.distance(lead) / s.d0;
    double hold = s.hold_active(t) ? 1.0 : 0.0;
    if (s.noise > 0) {
      next_to += s.noise * rng->gaussian();
      hold += s.noise * rng->gaussian();
    }
    bb.post(1, 2, "next_to", s.tau_a, std::clamp(next_to, 0.0, 1.0));
    bb.post(1, 2, "hold", 0, std::clamp(hold, 0.0, 1.0));
  };
}

namespace {

class TimelineRecorder : public ActionObserver {
 public:
  explicit TimelineRecorder(Timeline* tl) : tl_(tl) {}

  void on_start(const std::string&, double) override {}

  void on_complete(const std::string& name, double start_t, double t) override {
    record(name, start_t, t);
  }

  void on_abort(const std::string& name, double start_t, double t) override {
    record(name, start_t, t);
  }

 private:
  void record(const std::string& name, double start_t, double t) {
    if (name == "idle" || name == "collect_messages" || t <= start_t) return;
    if (name == "set_grabbed" || name == "reset_grabbed" || name == "set_poured") return;
    tl_->robot.push_back(Interval{name, start_t, t});
  }

  Timeline* tl_;
};

}  // namespace

Timeline simulate(const Scenario& sc, std::uint64_t seed) {
  return simulate(sc, make_scripted_predictor(sc, seed));
}

Timeline simulate(const Scenario& sc, const Predictor& predictor) {
  sc.validate();
  Timeline tl;
  TimelineRecorder rec(&tl);
  BartenderParams params;
  params.threshold = sc.threshold;
  params.tau_a = sc.tau_a;
  params.grab_duration = sc.grab_duration;
  params.pour_duration = sc.pour_duration;
  params.return_duration = sc.return_duration;
  params.idle_duration = sc.idle_duration;
  BtNode::Ptr tree = build_bartender_tree(params);
  tree->set_observer(&rec);

  Blackboard bb;
  bb.staleness = sc.staleness;
  double t = 0;
  bool finished = false;
  const long steps = static_cast<long>(std::ceil(sc.timeout / sc.tick));
  for (long i = 0; i <= steps; ++i) {
    t = static_cast<double>(i) * sc.tick;
    bb.clock = t;
    predictor(t, bb);
    tree->tick(bb);
    if (bb.poured && tree->running_actions() == 0) {
      finished = true;
      break;
    }
  }
  tl.total = t;
  tl.timed_out = !finished;

  // Human script intervals.
  const double arrive = sc.approach_start + sc.approach_duration;
  const double approach_end = sc.leave_time >= 0 ? std::min(arrive, sc.leave_time) : arrive;
  tl.human.push_back(Interval{"approach", sc.approach_start, std::min(approach_end, tl.total)});
  if (sc.hold_active(tl.total) || sc.hold_active(tl.total - sc.tick)) {
    const double hold_start = sc.hold_start_time();
    double hold_end = tl.total;
    const double pour_start = tl.first_start(tl.robot, "pour");
    if (pour_start >= 0) hold_end = std::min(tl.total, pour_start + sc.pour_duration);
    if (hold_end > hold_start) tl.human.push_back(Interval{"hold_cup", hold_start, hold_end});
  }
  if (sc.leave_time >= 0 && sc.leave_time < tl.total) {
    const double leave_end = std::min(tl.total, sc.leave_time + sc.approach_duration);
    if (leave_end > sc.leave_time) tl.human.push_back(Interval{"leave", sc.leave_time, leave_end});
  }
  return tl;
}

}  // namespace hoi
