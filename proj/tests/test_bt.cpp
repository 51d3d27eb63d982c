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

#include <doctest.h>

#include <set>

#include "hoi/bt.h"
#include "hoi/prng.h"

using namespace hoi;

namespace {

BtNode::Ptr cond(const std::string& name, bool value) {
  return BtNode::condition(name, [value](const Blackboard&) { return value; });
}

// Observer that records which actions started during a tick.
class StartLog : public ActionObserver {
 public:
  void on_start(const std::string& name, double) override { started.push_back(name); }
  void on_complete(const std::string&, double, double) override {}
  void on_abort(const std::string&, double, double) override {}
  std::vector<std::string> started;
};

}  // namespace

TEST_CASE("selector takes the first non-failing branch") {
  Blackboard bb;
  std::vector<BtNode::Ptr> kids;
  kids.push_back(cond("no", false));
  kids.push_back(BtNode::action("act", 0.0));
  auto sel = BtNode::selector("sel", std::move(kids));
  CHECK(sel->tick(bb) == TickStatus::kSuccess);
}

TEST_CASE("sequence stops at the first running child") {
  Blackboard bb;
  bb.clock = 0.0;
  std::vector<BtNode::Ptr> kids;
  kids.push_back(cond("ok", true));
  kids.push_back(BtNode::action("slow", 5.0));
  auto seq = BtNode::sequence("seq", std::move(kids));
  CHECK(seq->tick(bb) == TickStatus::kRunning);
  bb.clock = 6.0;
  CHECK(seq->tick(bb) == TickStatus::kSuccess);
}

TEST_CASE("sequence fails fast and repeat never completes") {
  Blackboard bb;
  std::vector<BtNode::Ptr> kids;
  kids.push_back(cond("no", false));
  kids.push_back(BtNode::action("never", 0.0));
  auto seq = BtNode::sequence("seq", std::move(kids));
  CHECK(seq->tick(bb) == TickStatus::kFailure);

  auto rep = BtNode::repeat(cond("yes", true));
  CHECK(rep->tick(bb) == TickStatus::kRunning);
  CHECK(rep->tick(bb) == TickStatus::kRunning);
}

TEST_CASE("malformed trees are rejected at construction") {
  CHECK_THROWS_AS(BtNode::sequence("s", {}), ContractError);
  CHECK_THROWS_AS(BtNode::selector("s", {}), ContractError);
  CHECK_THROWS_AS(BtNode::condition("c", nullptr), ContractError);
  CHECK_THROWS_AS(BtNode::action("a", -1.0), ContractError);
  CHECK_THROWS_AS(BtNode::repeat(nullptr), ContractError);
  CHECK_THROWS_AS(build_bartender_tree(BartenderParams{1.5}), ContractError);
}

TEST_CASE("blackboard holds the latest message per key and expires stale ones") {
  Blackboard bb;
  bb.staleness = 1.0;
  bb.clock = 0.0;
  bb.post(1, 2, "next_to", 3, 0.8);
  CHECK(bb.confidence(1, 2, "next_to", 3) == 0.8);
  CHECK(bb.confidence(1, 2, "next_to", 0) == 0.0);  // different horizon
  bb.post(1, 2, "next_to", 3, 0.6);
  CHECK(bb.confidence(1, 2, "next_to", 3) == 0.6);
  bb.clock = 0.9;
  CHECK(bb.confidence(1, 2, "next_to", 3) == 0.6);
  bb.clock = 2.0;
  CHECK(bb.confidence(1, 2, "next_to", 3) == 0.0);
}

TEST_CASE("bartender selector truth table") {
  // The three guards: grabbed, hold detected, anticipated next_to above the
  // threshold. Expected branch per combination.
  struct Case {
    bool grabbed, hold, next_to;
    const char* branch;
  };
  const Case table[] = {
      {false, false, false, "idle"},
      {false, false, true, "grab_bottle"},
      {false, true, false, "idle"},
      {false, true, true, "grab_bottle"},
      {true, false, false, "release_bottle"},
      {true, false, true, "idle"},
      {true, true, false, "pour"},
      {true, true, true, "pour"},
  };
  for (const Case& c : table) {
    CAPTURE(c.grabbed);
    CAPTURE(c.hold);
    CAPTURE(c.next_to);
    BartenderParams params;
    params.threshold = 0.5;
    params.tau_a = 3;
    auto tree = build_bartender_tree(params);
    StartLog log;
    tree->set_observer(&log);
    Blackboard bb;
    bb.clock = 0.0;
    bb.grabbed = c.grabbed;
    bb.post(1, 2, "hold", 0, c.hold ? 0.9 : 0.1);
    bb.post(1, 2, "next_to", 3, c.next_to ? 0.9 : 0.1);
    tree->tick(bb);
    bool hit = false;
    for (const auto& name : log.started) hit = hit || name == c.branch;
    CHECK(hit);
    // The other effectful branches must not have started.
    const std::set<std::string> heavy = {"pour", "grab_bottle", "release_bottle", "idle"};
    for (const auto& name : log.started) {
      if (heavy.count(name)) CHECK(name == c.branch);
    }
  }
}

TEST_CASE("confidence exactly at the threshold selects neither moving branch") {
  BartenderParams params;
  params.threshold = 0.5;
  params.tau_a = 0;
  auto tree = build_bartender_tree(params);
  StartLog log;
  tree->set_observer(&log);
  Blackboard bb;
  bb.post(1, 2, "next_to", 0, 0.5);
  bb.post(1, 2, "hold", 0, 0.1);
  bb.grabbed = true;
  tree->tick(bb);
  for (const auto& name : log.started) {
    CHECK(name != "grab_bottle");
    CHECK(name != "release_bottle");
  }
}

TEST_CASE("poured flag halts the selector") {
  BartenderParams params;
  auto tree = build_bartender_tree(params);
  StartLog log;
  tree->set_observer(&log);
  Blackboard bb;
  bb.poured = true;
  bb.post(1, 2, "next_to", params.tau_a, 0.95);
  tree->tick(bb);
  for (const auto& name : log.started) CHECK(name == "collect_messages");
}

TEST_CASE("flag safety over fuzzed message streams") {
  // Random confidence streams; the pour action must never run without the
  // grabbed flag, and the poured flag is set at most once per episode.
  Prng prng(1551);
  for (int episode = 0; episode < 1000; ++episode) {
    BartenderParams params;
    params.threshold = 0.2 + 0.6 * prng.uniform();
    params.tau_a = static_cast<int>(prng.uniform_index(4));
    params.grab_duration = 0.2 + prng.uniform();
    params.pour_duration = 0.2 + prng.uniform();
    params.return_duration = 0.2 + prng.uniform();

    class SafetyObserver : public ActionObserver {
     public:
      explicit SafetyObserver(Blackboard* bb) : bb_(bb) {}
      void on_start(const std::string& name, double) override {
        if (name == "pour") {
          pours_started++;
          grabbed_at_pour = bb_->grabbed;
        }
      }
      void on_complete(const std::string& name, double, double) override {
        if (name == "set_poured") poured_sets++;
      }
      void on_abort(const std::string&, double, double) override {}
      Blackboard* bb_;
      int pours_started = 0;
      int poured_sets = 0;
      bool grabbed_at_pour = true;
    };

    auto tree = build_bartender_tree(params);
    Blackboard bb;
    SafetyObserver obs(&bb);
    tree->set_observer(&obs);
    for (int step = 0; step < 120; ++step) {
      bb.clock = 0.1 * step;
      bb.post(1, 2, "next_to", params.tau_a, prng.uniform());
      bb.post(1, 2, "hold", 0, prng.uniform());
      tree->tick(bb);
      if (obs.pours_started > 0) CHECK(obs.grabbed_at_pour);
    }
    CHECK(obs.poured_sets <= 1);
  }
}
