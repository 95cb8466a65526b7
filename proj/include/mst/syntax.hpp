#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mst {

// All checker, parser and runtime failures carry a stable code plus a free-form detail.
class Error : public std::runtime_error {
 public:
  Error(std::string code, std::string detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)), detail_(std::move(detail)) {}
  const std::string& code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string code_;
  std::string detail_;
};

using LabelSet = std::set<std::string>;

struct SessionType;
struct FieldTyping;
struct ChannelType;
using Session = std::shared_ptr<const SessionType>;
using Channel = std::shared_ptr<const ChannelType>;
using FieldPtr = std::shared_ptr<const FieldTyping>;

struct ValueType {
  enum class Kind { Null, Enum, Session, LinkThis, Link, Object };
  Kind kind = Kind::Null;
  LabelSet labels;      // Enum
  mst::Session sess;    // Session
  std::string name;     // Link: field, Object: class
  FieldPtr fields;      // Object

  static ValueType null();
  static ValueType enumeration(LabelSet labels);
  static ValueType session(mst::Session s);
  static ValueType linkthis();
  static ValueType link(std::string field);
  static ValueType object(std::string cls, FieldTyping f);

  bool is_null() const { return kind == Kind::Null; }
  bool is_enum() const { return kind == Kind::Enum; }
  bool is_session() const { return kind == Kind::Session; }
  bool is_linkthis() const { return kind == Kind::LinkThis; }
  bool is_link() const { return kind == Kind::Link; }
  bool is_object() const { return kind == Kind::Object; }
  // session-typed and internal object values are linear
  bool linear() const { return is_session() || is_object(); }
};

struct MethodEntry {
  std::string name;
  ValueType param;
  ValueType result;
  mst::Session cont;
};

struct SessionType {
  enum class Kind { Branch, Variant, Rec, Var };
  Kind kind = Kind::Branch;
  std::vector<MethodEntry> methods;            // Branch
  std::map<std::string, mst::Session> cases;   // Variant
  std::string var;                             // Rec binder / Var name
  mst::Session body;                           // Rec

  static mst::Session branch(std::vector<MethodEntry> methods);
  static mst::Session variant(std::map<std::string, mst::Session> cases);
  static mst::Session rec(std::string var, mst::Session body);
  static mst::Session variable(std::string name);
  static mst::Session end() { return branch({}); }

  bool is_branch() const { return kind == Kind::Branch; }
  bool is_variant() const { return kind == Kind::Variant; }
  bool is_rec() const { return kind == Kind::Rec; }
  bool is_var() const { return kind == Kind::Var; }
};

using Record = std::map<std::string, ValueType>;

struct FieldTyping {
  bool variant = false;
  Record rec;                              // record form
  std::map<std::string, Record> cases;     // variant form

  static FieldTyping record(Record r);
  static FieldTyping make_variant(std::map<std::string, Record> cases);
  LabelSet labels() const;
};

struct Payload {
  bool is_channel = false;
  ValueType type;      // value payload
  mst::Channel chan;   // delegated endpoint payload
};

struct ChannelType {
  enum class Kind { End, Recv, Send, Offer, Select, Rec, Var };
  Kind kind = Kind::End;
  Payload payload;                             // Recv / Send
  mst::Channel cont;                           // Recv / Send
  std::map<std::string, mst::Channel> cases;  // Offer / Select
  std::string var;                             // Rec / Var
  mst::Channel body;                           // Rec

  static mst::Channel end();
  static mst::Channel recv(Payload p, mst::Channel cont);
  static mst::Channel send(Payload p, mst::Channel cont);
  static mst::Channel offer(std::map<std::string, mst::Channel> cases);
  static mst::Channel select(std::map<std::string, mst::Channel> cases);
  static mst::Channel rec(std::string var, mst::Channel body);
  static mst::Channel variable(std::string name);
};

Payload value_payload(ValueType t);
Payload channel_payload(Channel c);

// ---------------------------------------------------------------- expressions

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind {
    Null, Label, Var, New, Swap, Call, SelfCall, Seq, Switch, While, Spawn,
    Return, ObjId, Endpoint, AccessName
  };
  Kind kind = Kind::Null;
  // label / variable / class (New, Spawn) / field (Swap, Call) / method (SelfCall) /
  // object id / channel / access name
  std::string name;
  std::string method;  // Call, Spawn
  ExprPtr a;           // argument, scrutinee, first of Seq, loop condition, returned expr
  ExprPtr b;           // second of Seq, loop body
  std::vector<std::pair<std::string, ExprPtr>> cases;  // Switch
  char polarity = 0;   // Endpoint: '+' or '-'
  int line = 0;

  bool is_value() const;
};

namespace ex {
ExprPtr null();
ExprPtr label(std::string l);
ExprPtr var(std::string x);
ExprPtr make_new(std::string cls);
ExprPtr swap(std::string f, ExprPtr e);
ExprPtr call(std::string f, std::string m, ExprPtr arg);
ExprPtr self_call(std::string m, ExprPtr arg);
ExprPtr seq(ExprPtr a, ExprPtr b);
ExprPtr sw(ExprPtr scrutinee, std::vector<std::pair<std::string, ExprPtr>> cases);
ExprPtr loop(ExprPtr cond, ExprPtr body);
ExprPtr spawn(std::string cls, std::string m, ExprPtr arg);
ExprPtr ret(ExprPtr e);
ExprPtr obj(std::string o);
ExprPtr endpoint(std::string c, char polarity);
ExprPtr access(std::string n);
ExprPtr with_line(ExprPtr e, int line);
}  // namespace ex

bool expr_equal(const ExprPtr& a, const ExprPtr& b);
// e{v/x}; bodies only ever bind their single parameter
ExprPtr substitute(const ExprPtr& e, const std::string& x, const ExprPtr& v);

// ---------------------------------------------------------------- programs

struct Annotation {
  FieldTyping req;
  FieldTyping ens;
  ValueType result;
  ValueType param;
};

struct MethodDecl {
  std::string name;
  std::string param;
  ExprPtr body;
  std::optional<Annotation> annot;
  int line = 0;
};

struct ClassDecl {
  std::string name;
  Session session;
  std::map<std::string, Session> states;  // where-clause names, folded
  std::vector<std::string> fields;
  std::vector<MethodDecl> methods;
  int line = 0;

  const MethodDecl* method(const std::string& m) const;
  FieldTyping null_fields() const;
};

struct TypeDecl {
  std::string name;
  Session type;
  std::map<std::string, Session> states;
};

struct AccessDecl {
  std::string name;
  Channel protocol;
  int line = 0;
};

struct Program {
  std::map<std::string, ClassDecl> classes;
  std::vector<std::string> class_order;
  std::vector<AccessDecl> access;
  std::map<std::string, Channel> channels;
  std::map<std::string, TypeDecl> types;
  std::optional<std::pair<std::string, std::string>> main;

  const ClassDecl* cls(const std::string& name) const;
  const ClassDecl& cls_or_throw(const std::string& name) const;
  const AccessDecl* access_point(const std::string& name) const;
};

// ---------------------------------------------------------------- runtime

struct Value {
  enum class Kind { Null, Label, Obj, Endpoint, Access };
  Kind kind = Kind::Null;
  std::string name;
  char polarity = 0;

  static Value null() { return {}; }
  static Value label(std::string l) { return {Kind::Label, std::move(l), 0}; }
  static Value obj(std::string o) { return {Kind::Obj, std::move(o), 0}; }
  static Value endpoint(std::string c, char p) { return {Kind::Endpoint, std::move(c), p}; }
  static Value access(std::string n) { return {Kind::Access, std::move(n), 0}; }
  bool operator==(const Value&) const = default;
  // key used for Γ/Θ entries of endpoints, e.g. "c0+"
  std::string endpoint_key() const { return name + polarity; }
};

ExprPtr value_expr(const Value& v);
Value expr_value(const ExprPtr& e);

struct ObjectRecord {
  std::string cls;
  std::map<std::string, Value> fields;
  bool operator==(const ObjectRecord&) const = default;
};

using Heap = std::map<std::string, ObjectRecord>;

struct Path {
  std::string root;
  std::vector<std::string> fields;

  Path child(const std::string& f) const;
  Path parent() const;
  std::string last() const { return fields.back(); }
  bool operator==(const Path&) const = default;
  std::string str() const;
};

const ObjectRecord& resolve(const Heap& h, const Path& r);
Heap write(const Heap& h, const Path& r, const std::string& f, const Value& v);
std::set<std::string> children(const Heap& h, const std::string& o);
std::set<std::string> roots(const Heap& h);
bool complete(const Heap& h);
std::set<std::string> descendants(const Heap& h, const std::string& o);
std::pair<Heap, Heap> split_heap(const Heap& h, const std::string& o);
Heap rename_heap(const Heap& h, const std::map<std::string, std::string>& phi);
Heap heap_union(const Heap& a, const Heap& b);

struct Thread {
  int id = 0;
  Heap heap;
  Path cur;
  ExprPtr expr;
};

struct Configuration {
  std::vector<Thread> threads;
  std::set<std::string> channels;
  int next_obj = 0;
  int next_chan = 0;
  int next_thread = 1;
};

// ---------------------------------------------------------------- type operations

Session subst(const Session& s, const std::string& x, const Session& r);
Session unfold(const Session& s);
Channel subst(const Channel& s, const std::string& x, const Channel& r);
Channel unfold(const Channel& s);

std::set<std::string> free_vars(const Session& s);
std::set<std::string> free_vars(const Channel& s);
bool contractive(const Session& s);
bool contractive(const Channel& s);

// α-normalised keys; branch entries sorted so permuted branches share a key
std::string key(const Session& s);
std::string key(const ValueType& t);
std::string key(const FieldTyping& f);
std::string key(const Channel& c);

bool struct_equal(const Session& a, const Session& b);
bool struct_equal(const Channel& a, const Channel& b);

// record / variant helpers
FieldTyping with_field(const FieldTyping& f, const std::string& field, const ValueType& t);

}  // namespace mst
