#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "mst/interpreter.hpp"
#include "mst/syntax.hpp"
#include "mst/typechecker.hpp"

namespace mst {

struct TraceItem {
  bool label = false;
  std::string name;
  bool operator==(const TraceItem&) const = default;
};
using CallTrace = std::vector<TraceItem>;
using CallTraceMap = std::map<std::string, CallTrace>;

// Words starting with an upper-case letter are labels, the rest method names.
CallTrace parse_trace(const std::string& text);
std::string render_trace(const CallTrace& t);

// One LTS transition; several successors when an overloaded name has distinct
// continuations. Throws Error("TypeErrorTransition").
std::vector<Session> lts_step(const Session& s, const TraceItem& a);

struct TraceCheck {
  bool valid = true;
  size_t position = 0;  // 1-based index of the first offending item
  std::string item;
};
TraceCheck replay(const Session& start, const CallTrace& trace);

// tr' from tr for one step. New maps the fresh object to the empty trace, Call
// appends m, Return of a label appends it. Spawn starts the fresh object at m and
// ComObj renames the transferred objects' entries.
CallTraceMap extend_traces(const CallTraceMap& tr, const StepEvent& ev);
TraceCheck traces_valid(const Program& p, const CallTraceMap& tr, const Configuration& c, std::string* object = nullptr);

struct Violation {
  std::string kind;  // TrackingFault, StateIllTyped, DualityViolation, TraceInvalid
  int step = 0;
  int thread = 0;
  std::string detail;
  std::string line() const;
};

struct PendingLink {
  std::string field;
  Session variant;
};

struct ThreadEnv {
  std::map<std::string, ValueType> gamma;
  std::vector<CallFrame> frames;
  std::optional<PendingLink> pending;
};

struct MonitorOptions {
  bool states = true;
  bool traces = true;
};

class Monitor {
 public:
  Monitor(const Program& p, MonitorOptions opts = {});

  void start(const Configuration& c);
  std::optional<Violation> observe(const Configuration& before, const StepEvent& ev, const Configuration& after,
                                   int step);
  // checks of one configuration against the tracked environments
  std::optional<Violation> check(const Configuration& c, int step);

  // Γ/Θ/H updates for one step; throws Error("TrackingFault")
  void track(const Configuration& before, const StepEvent& ev, const Configuration& after);
  // heap/environment agreement plus internal re-typing; throws Error("StateIllTyped")
  void check_state(const Thread& t) const;
  bool theta_dual(std::string* why = nullptr) const;

  const ThreadEnv& env(int thread) const { return envs_.at(thread); }
  const std::map<std::string, Channel>& theta() const { return theta_; }
  const CallTraceMap& traces() const { return traces_; }
  const std::map<std::string, FieldTyping>& hidden() const { return hidden_; }
  bool consistent(const std::string& cls, const FieldTyping& f, const Session& s) const;

 private:
  const Program& p_;
  MonitorOptions opts_;
  std::map<int, ThreadEnv> envs_;
  std::map<std::string, Channel> theta_;
  std::map<std::string, FieldTyping> hidden_;  // field typing of each object at rest
  CallTraceMap traces_;
  std::map<std::string, std::vector<Witness>> witnesses_;
  mutable std::map<std::tuple<std::string, std::string, std::string>, bool> cache_;

  FieldTyping open_fields(const std::string& cls, const std::string& o, const Session& view) const;
  ValueType value_type(const ThreadEnv& env, const Value& v) const;
  void agree_object(const Thread& t, const std::string& o, const ValueType& type, const std::string& where) const;
  void agree_record(const Thread& t, const ObjectRecord& rec, const Record& r, const std::string& where) const;
  void agree_value(const Thread& t, const ObjectRecord& rec, const Record& r, const std::string& f,
                   const std::string& where) const;
};

}  // namespace mst
