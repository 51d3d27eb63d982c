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
// Behavior-tree engine and the bartender tree. Composites are reactive:
// every tick re-evaluates children left to right, so a failed guard
// preempts a running action lower in the tree. A timed action keeps its
// progress while it is ticked every traversal and is reset (aborted) as
// soon as a traversal skips it.

#ifndef HOI_BT_H_
#define HOI_BT_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "hoi/tensor.h"

namespace hoi {

enum class TickStatus { kSuccess, kFailure, kRunning };

// Shared state: the two task flags, the simulation clock, and the latest
// interaction message per (human, object, interaction, horizon) key.
// Messages older than `staleness` seconds read as confidence 0.
class Blackboard {
 public:
  bool grabbed = false;
  bool poured = false;
  double clock = 0.0;
  double staleness = 1.0;

  void post(std::int64_t human, std::int64_t object, const std::string& interaction,
            int horizon, double confidence) {
    messages_[Key{human, object, interaction, horizon}] = {confidence, clock};
  }

  double confidence(std::int64_t human, std::int64_t object, const std::string& interaction,
                    int horizon) const {
    auto it = messages_.find(Key{human, object, interaction, horizon});
    if (it == messages_.end()) return 0.0;
    if (clock - it->second.second > staleness) return 0.0;
    return it->second.first;
  }

 private:
  using Key = std::tuple<std::int64_t, std::int64_t, std::string, int>;
  std::map<Key, std::pair<double, double>> messages_;
};

// Receives action lifecycle events (used to build activity timelines).
class ActionObserver {
 public:
  virtual ~ActionObserver() = default;
  virtual void on_start(const std::string& name, double t) = 0;
  virtual void on_complete(const std::string& name, double start_t, double t) = 0;
  virtual void on_abort(const std::string& name, double start_t, double t) = 0;
};

class BtNode {
 public:
  enum class Kind { kSequence, kSelector, kCondition, kAction, kRepeat };
  using Ptr = std::unique_ptr<BtNode>;
  using Predicate = std::function<bool(const Blackboard&)>;
  using Effect = std::function<void(Blackboard&)>;

  static Ptr sequence(std::string name, std::vector<Ptr> children);
  static Ptr selector(std::string name, std::vector<Ptr> children);
  static Ptr condition(std::string name, Predicate pred);
  static Ptr action(std::string name, double duration, Effect on_complete = nullptr);
  static Ptr repeat(Ptr child);

  // Entry point: runs one traversal, then aborts any action a previous
  // traversal left running but this one skipped.
  TickStatus tick(Blackboard& bb);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  std::size_t running_actions() const;
  void set_observer(ActionObserver* obs);

 private:
  BtNode(Kind k, std::string name) : kind_(k), name_(std::move(name)) {}

  TickStatus tick_impl(Blackboard& bb, std::uint64_t id);
  void sweep(double clock, std::uint64_t id);

  Kind kind_;
  std::string name_;
  std::vector<Ptr> children_;
  Predicate pred_;
  Effect effect_;
  double duration_ = 0.0;
  ActionObserver* observer_ = nullptr;

  enum class ActionState { kIdle, kRunning, kDone };
  ActionState state_ = ActionState::kIdle;
  double started_ = 0.0;
  std::uint64_t last_tick_ = 0;
  std::uint64_t tick_counter_ = 0;  // used on the entry node only
};

// Parameters of the bartender task tree.
struct BartenderParams {
  double threshold = 0.5;
  int tau_a = 3;               // horizon the approach guard listens to
  std::int64_t human_id = 1;
  std::int64_t cup_id = 2;
  double grab_duration = 4.0;
  double pour_duration = 3.0;
  double return_duration = 4.0;
  double idle_duration = 0.2;
};

// Repeat-decorated root: collect messages, check the poured flag, then a
// selector over the pour, approach, and move-away branches with an idle
// fallback. The pour branch runs when the bottle is grabbed and `hold` is
// detected; it pours, returns home, resets the grabbed flag, and sets the
// poured flag. The approach branch grabs the bottle when `next_to` is
// anticipated above the threshold; the move-away branch releases it when
// the anticipated confidence falls below the threshold.
BtNode::Ptr build_bartender_tree(const BartenderParams& params);

}  // namespace hoi

#endif  // HOI_BT_H_
