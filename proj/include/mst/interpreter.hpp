#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mst/syntax.hpp"

namespace mst {

struct StepEvent {
  // New, Swap, Call, Return, Switch, Seq, While, SelfCall, Init, ComBase, ComObj, Spawn
  std::string rule;
  std::vector<int> threads;  // thread ids; two for rendezvous (accepting/sending side first)
  std::vector<size_t> index; // positions in Configuration::threads before the step
  std::string field;         // Swap, Call, Init, ComBase, ComObj: field of the current object
  std::string field2;        // Init, ComBase, ComObj: field on the second thread
  std::string method;        // Call, SelfCall, Spawn
  std::string cls;           // New, Call (callee class), Spawn
  std::string obj;           // New: fresh id; Call: callee id; Spawn: fresh id; ComObj: sent root
  std::string chan;          // Init, ComBase, ComObj
  std::string access;        // Init
  Value value;               // Swap: value written; Call/SelfCall: argument; Return/ComBase: value; Switch: label
  Value old;                 // Swap: value read
  std::map<std::string, std::string> phi;  // ComObj
  int new_thread = -1;       // Spawn
  std::string note;          // human-readable detail for the log

  std::string detail() const { return note; }
  std::string line(int step) const;
};

struct Redex {
  enum class Kind { None, Local, Accept, Request, Send, Receive, Stuck };
  Kind kind = Kind::None;
  ExprPtr node;
  std::vector<int> where;  // child positions from the root expression
  std::string name;        // access point or channel
  char polarity = 0;
};

// The redex of a thread per the evaluation contexts; Kind::None for a value.
Redex find_redex(const Program& p, const Thread& t);

struct ThreadStatus {
  int thread = 0;
  // terminated, unmatched-accept, unmatched-request, deadlocked-on-channel, stuck
  std::string status;
  std::string channel;
};

struct Outcome {
  enum class Kind { AllTerminated, Blocked, StepLimit, Violation };
  Kind kind = Kind::AllTerminated;
  std::vector<Value> values;           // AllTerminated
  std::vector<ThreadStatus> threads;   // Blocked
  std::string render() const;
  int exit_code() const;
};

Configuration initial_config(const Program& p);

struct Enabled {
  size_t i = 0;
  std::optional<size_t> j;  // rendezvous partner
};

std::vector<Enabled> enabled_steps(const Program& p, const Configuration& c);
// Fires one enabled step. Throws Error("RuntimeFault") on ill-formed states.
std::pair<Configuration, StepEvent> apply_step(const Program& p, const Configuration& c, const Enabled& s);
// Deterministic scheduler: first local step, else least rendezvous pair.
std::optional<std::pair<Configuration, StepEvent>> step(const Program& p, const Configuration& c);

Outcome classify(const Program& p, const Configuration& c);

// Rendezvous soundness: dual polarities and no third thread mentioning the channel.
bool rendezvous_sound(const Configuration& before, const StepEvent& ev);
bool mentions_channel(const Thread& t, const std::string& chan);

struct RunOptions {
  int limit = 1000;
  std::optional<uint64_t> seed;
};

// Called after every step; returning false stops the run with Outcome::Violation.
using StepObserver = std::function<bool(const Configuration& before, const StepEvent& ev, const Configuration& after, int step)>;

struct RunResult {
  Outcome outcome;
  std::vector<std::string> log;
  Configuration final;
  int steps = 0;
  int rendezvous = 0;
  int rendezvous_failures = 0;
};

RunResult run(const Program& p, const RunOptions& opts, const StepObserver& observer = nullptr);
RunResult run_from(const Program& p, Configuration c, const RunOptions& opts, const StepObserver& observer = nullptr);

}  // namespace mst
