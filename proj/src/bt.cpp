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

#include "hoi/bt.h"

namespace hoi {

BtNode::Ptr BtNode::sequence(std::string name, std::vector<Ptr> children) {
  if (children.empty()) throw ContractError("sequence '" + name + "' needs children");
  Ptr n(new BtNode(Kind::kSequence, std::move(name)));
  n->children_ = std::move(children);
  return n;
}

BtNode::Ptr BtNode::selector(std::string name, std::vector<Ptr> children) {
  if (children.empty()) throw ContractError("selector '" + name + "' needs children");
  Ptr n(new BtNode(Kind::kSelector, std::move(name)));
  n->children_ = std::move(children);
  return n;
}

BtNode::Ptr BtNode::condition(std::string name, Predicate pred) {
  if (!pred) throw ContractError("condition '" + name + "' needs a predicate");
  Ptr n(new BtNode(Kind::kCondition, std::move(name)));
  n->pred_ = std::move(pred);
  return n;
}

BtNode::Ptr BtNode::action(std::string name, double duration, Effect on_complete) {
  if (duration < 0) throw ContractError("action '" + name + "' has negative duration");
  Ptr n(new BtNode(Kind::kAction, std::move(name)));
  n->duration_ = duration;
  n->effect_ = std::move(on_complete);
  return n;
}

BtNode::Ptr BtNode::repeat(Ptr child) {
  if (!child) throw ContractError("repeat decorator needs a child");
  Ptr n(new BtNode(Kind::kRepeat, "repeat"));
  n->children_.push_back(std::move(child));
  return n;
}

void BtNode::set_observer(ActionObserver* obs) {
  observer_ = obs;
  for (auto& c : children_) c->set_observer(obs);
}

std::size_t BtNode::running_actions() const {
  std::size_t n = kind_ == Kind::kAction && state_ == ActionState::kRunning ? 1 : 0;
  for (const auto& c : children_) n += c->running_actions();
  return n;
}

TickStatus BtNode::tick(Blackboard& bb) {
  const std::uint64_t id = ++tick_counter_;
  TickStatus s = tick_impl(bb, id);
  sweep(bb.clock, id);
  return s;
}

TickStatus BtNode::tick_impl(Blackboard& bb, std::uint64_t id) {
  last_tick_ = id;
  switch (kind_) {
    case Kind::kSequence:
      for (auto& c : children_) {
        const TickStatus s = c->tick_impl(bb, id);
        if (s != TickStatus::kSuccess) return s;
      }
      return TickStatus::kSuccess;
    case Kind::kSelector:
      for (auto& c : children_) {
        const TickStatus s = c->tick_impl(bb, id);
        if (s != TickStatus::kFailure) return s;
      }
      return TickStatus::kFailure;
    case Kind::kCondition:
      return pred_(bb) ? TickStatus::kSuccess : TickStatus::kFailure;
    case Kind::kRepeat:
      children_[0]->tick_impl(bb, id);
      return TickStatus::kRunning;
    case Kind::kAction: {
      if (state_ == ActionState::kDone) return TickStatus::kSuccess;
      if (state_ == ActionState::kIdle) {
        started_ = bb.clock;
        state_ = ActionState::kRunning;
        if (observer_) observer_->on_start(name_, started_);
      }
      if (bb.clock - started_ >= duration_) {
        state_ = ActionState::kDone;
        if (observer_) observer_->on_complete(name_, started_, bb.clock);
        if (effect_) effect_(bb);
        return TickStatus::kSuccess;
      }
      return TickStatus::kRunning;
    }
  }
  return TickStatus::kFailure;
}

void BtNode::sweep(double clock, std::uint64_t id) {
  if (kind_ == Kind::kAction && last_tick_ != id && state_ != ActionState::kIdle) {
    if (state_ == ActionState::kRunning && observer_) observer_->on_abort(name_, started_, clock);
    state_ = ActionState::kIdle;
  }
  for (auto& c : children_) c->sweep(clock, id);
}

BtNode::Ptr build_bartender_tree(const BartenderParams& p) {
  if (!(p.threshold > 0 && p.threshold < 1)) {
    throw ContractError("bartender tree: threshold must be in (0,1)");
  }
  const auto h = p.human_id;
  const auto cup = p.cup_id;
  const double thr = p.threshold;
  const int tau = p.tau_a;

  std::vector<BtNode::Ptr> pour_children;
  pour_children.push_back(BtNode::condition("execute_check", [=](const Blackboard& bb) {
    return bb.grabbed && bb.confidence(h, cup, "hold", 0) > thr;
  }));
  pour_children.push_back(BtNode::action("pour", p.pour_duration));
  pour_children.push_back(BtNode::action("return_home", p.return_duration));
  pour_children.push_back(
      BtNode::action("reset_grabbed", 0.0, [](Blackboard& bb) { bb.grabbed = false; }));
  pour_children.push_back(
      BtNode::action("set_poured", 0.0, [](Blackboard& bb) { bb.poured = true; }));

  std::vector<BtNode::Ptr> approach_children;
  approach_children.push_back(BtNode::condition("approach_check", [=](const Blackboard& bb) {
    return !bb.grabbed && bb.confidence(h, cup, "next_to", tau) > thr;
  }));
  approach_children.push_back(BtNode::action("grab_bottle", p.grab_duration));
  approach_children.push_back(
      BtNode::action("set_grabbed", 0.0, [](Blackboard& bb) { bb.grabbed = true; }));

  std::vector<BtNode::Ptr> away_children;
  away_children.push_back(BtNode::condition("move_away_check", [=](const Blackboard& bb) {
    return bb.grabbed && bb.confidence(h, cup, "next_to", tau) < thr;
  }));
  away_children.push_back(BtNode::action("release_bottle", p.return_duration));
  away_children.push_back(
      BtNode::action("reset_grabbed", 0.0, [](Blackboard& bb) { bb.grabbed = false; }));

  std::vector<BtNode::Ptr> branches;
  branches.push_back(BtNode::sequence("pour_branch", std::move(pour_children)));
  branches.push_back(BtNode::sequence("approach_branch", std::move(approach_children)));
  branches.push_back(BtNode::sequence("move_away_branch", std::move(away_children)));
  branches.push_back(BtNode::action("idle", p.idle_duration));

  std::vector<BtNode::Ptr> root_children;
  root_children.push_back(BtNode::action("collect_messages", 0.0));
  root_children.push_back(
      BtNode::condition("not_poured", [](const Blackboard& bb) { return !bb.poured; }));
  root_children.push_back(BtNode::selector("main_selector", std::move(branches)));

  return BtNode::repeat(BtNode::sequence("root", std::move(root_children)));
}

}  // namespace hoi
