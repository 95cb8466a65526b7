#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mst/syntax.hpp"

namespace mst {

using ParamEnv = std::optional<std::pair<std::string, ValueType>>;

// Γ restricted to what one thread needs: roots (object ids, endpoint keys such as
// "c0+", or "this" for method bodies) plus the path of the executing object.
struct TypingState {
  std::map<std::string, ValueType> env;
  Path cur;
  ParamEnv param;
};

// An open call inside an internal expression: return(...) at nesting depth i
// belongs to frames[i].
struct CallFrame {
  std::string field;
  std::string cls;
  MethodEntry entry;
};

using ConsistencyOracle =
    std::function<bool(const std::string& cls, const FieldTyping& f, const Session& s)>;

struct InternalContext {
  std::vector<CallFrame> frames;
  // field of the current object the label in the hole is linked to (T-VarS)
  std::optional<std::string> linked_label;
  ConsistencyOracle consistent;
};

struct Typed {
  ValueType type;
  TypingState state;
};

// Algorithm B over a typing state. With an InternalContext the checker also
// accepts internal forms and uses subtyping where the static checker asks for
// equivalence of loop invariants.
Typed infer(const Program& p, const ExprPtr& e, const TypingState& st, const InternalContext* internal = nullptr);

struct BResult {
  ValueType type;
  FieldTyping fields;
  ParamEnv param;
};

// B⟨e, F, V⟩ for a method body of class cls
BResult infer_expr(const Program& p, const std::string& cls, const ExprPtr& e, const FieldTyping& f,
                   const ParamEnv& v);

MethodEntry resolve_signature(const Session& s, const std::string& m, const ValueType& arg);

FieldTyping fields_at(const TypingState& st, const Path& r);
std::string class_at(const TypingState& st, const Path& r);
void set_fields(TypingState& st, const Path& r, const FieldTyping& f);

struct Witness {
  FieldTyping fields;
  Session state;
};

struct ClassVerdict {
  std::string cls;
  bool ok = true;
  std::string code;
  std::string detail;
  std::vector<Witness> witnesses;  // every (F, S) pair visited by A
  int steps = 0;
};

struct CheckOptions {
  bool require_main = true;
  int step_cap = 10000;
};

struct CheckReport {
  std::vector<ClassVerdict> classes;
  std::vector<std::pair<std::string, std::string>> program_errors;
  bool ok() const;
  const ClassVerdict* verdict(const std::string& cls) const;
  std::string render() const;
};

CheckReport check_program(const Program& p, const CheckOptions& opts = {});
ClassVerdict check_class(const Program& p, const ClassDecl& c, const CheckOptions& opts = {});

// A⟨C, S, F, ∅⟩ from scratch; throws the failing clause's Error
void consistency(const Program& p, const std::string& cls, const FieldTyping& f, const Session& s,
                 std::vector<Witness>* visited = nullptr, int cap = 10000);
bool consistent(const Program& p, const std::string& cls, const FieldTyping& f, const Session& s, int cap = 10000);

struct MethodVerdict {
  std::string method;
  bool ok = true;
  std::string code;
  std::string detail;
};

// Each entry of branch state s checked on its own from f: the body, the result
// clause and consistency of the continuation.
std::vector<MethodVerdict> method_verdicts(const Program& p, const std::string& cls, const FieldTyping& f,
                                           const Session& s);

}  // namespace mst
