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
//
// Closed-loop pouring scenario: a scripted human approaches the counter and
// grabs the cup while the tree drives the robot from streamed interaction
// confidences; the episode yields per-agent activity timelines scored by the
// fluency metrics.

#ifndef HOI_SIM_H_
#define HOI_SIM_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hoi/bt.h"
#include "hoi/prng.h"

namespace hoi {

struct Interval {
  std::string label;
  double start = 0;
  double end = 0;
};

struct Timeline {
  std::vector<Interval> human;
  std::vector<Interval> robot;
  double total = 0;
  bool timed_out = false;

  // Start of the first interval with this label, or a negative value.
  double first_start(const std::vector<Interval>& agent, const std::string& label) const;
};

struct FluencyReport {
  double h_idle = 0;        // percent
  double r_idle = 0;        // percent
  double c_act = 0;         // percent
  double f_del = 0;         // percent, negative when actions overlap
  double waiting_time = 0;  // seconds; negative when the pour never happened
};

// Interval metrics over a finished episode. Throws on zero total duration.
FluencyReport fluency(const Timeline& timeline);

struct Scenario {
  // Human script: walk in over approach_duration, then take the cup after
  // hold_delay. With leave_time >= 0 the human turns around at that moment
  // and never takes the cup.
  double approach_start = 2.0;
  double approach_duration = 2.0;
  double hold_delay = 0.3;
  double leave_time = -1.0;
  // Robot action durations and loop settings.
  double grab_duration = 4.0;
  double pour_duration = 3.0;
  double return_duration = 4.0;
  double idle_duration = 0.2;
  double noise = 0.0;   // confidence noise sigma
  int tau_a = 3;        // anticipation horizon in seconds
  double threshold = 0.5;
  double d0 = 1.0;      // distance normalizer for the confidence model
  double tick = 0.1;
  double timeout = 60.0;
  double staleness = 1.0;

  void validate() const;
  double distance(double t) const;     // scripted human-to-counter distance
  bool hold_active(double t) const;    // cup held at time t
  double hold_start_time() const;
};

// Message source feeding the blackboard each step.
using Predictor = std::function<void(double t, Blackboard& bb)>;

// Anticipated `next_to` confidence is clamp(1 - distance(t + tau_a)/d0, 0, 1)
// plus seeded Gaussian noise; `hold` is detected (horizon 0) with the same
// noise model.
Predictor make_scripted_predictor(const Scenario& sc, std::uint64_t seed);

Timeline simulate(const Scenario& sc, std::uint64_t seed);
Timeline simulate(const Scenario& sc, const Predictor& predictor);

}  // namespace hoi

#endif  // HOI_SIM_H_
