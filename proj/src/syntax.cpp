#include "mst/syntax.hpp"

#include <algorithm>
#include <unordered_map>
#include <deque>

namespace mst {

ValueType ValueType::null() { return {}; }

ValueType ValueType::enumeration(LabelSet labels) {
  ValueType t;
  t.kind = Kind::Enum;
  t.labels = std::move(labels);
  return t;
}

ValueType ValueType::session(mst::Session s) {
  ValueType t;
  t.kind = Kind::Session;
  t.sess = std::move(s);
  return t;
}

ValueType ValueType::linkthis() {
  ValueType t;
  t.kind = Kind::LinkThis;
  return t;
}

ValueType ValueType::link(std::string field) {
  ValueType t;
  t.kind = Kind::Link;
  t.name = std::move(field);
  return t;
}

ValueType ValueType::object(std::string cls, FieldTyping f) {
  ValueType t;
  t.kind = Kind::Object;
  t.name = std::move(cls);
  t.fields = std::make_shared<const FieldTyping>(std::move(f));
  return t;
}

Session SessionType::branch(std::vector<MethodEntry> methods) {
  auto s = std::make_shared<SessionType>();
  s->kind = Kind::Branch;
  s->methods = std::move(methods);
  return s;
}

Session SessionType::variant(std::map<std::string, mst::Session> cases) {
  auto s = std::make_shared<SessionType>();
  s->kind = Kind::Variant;
  s->cases = std::move(cases);
  return s;
}

Session SessionType::rec(std::string var, mst::Session body) {
  auto s = std::make_shared<SessionType>();
  s->kind = Kind::Rec;
  s->var = std::move(var);
  s->body = std::move(body);
  return s;
}

Session SessionType::variable(std::string name) {
  auto s = std::make_shared<SessionType>();
  s->kind = Kind::Var;
  s->var = std::move(name);
  return s;
}

FieldTyping FieldTyping::record(Record r) {
  FieldTyping f;
  f.rec = std::move(r);
  return f;
}

FieldTyping FieldTyping::make_variant(std::map<std::string, Record> cases) {
  FieldTyping f;
  f.variant = true;
  f.cases = std::move(cases);
  return f;
}

LabelSet FieldTyping::labels() const {
  LabelSet out;
  for (auto& [l, r] : cases) out.insert(l);
  return out;
}

Channel ChannelType::end() { return std::make_shared<ChannelType>(); }

Channel ChannelType::recv(Payload p, mst::Channel cont) {
  auto c = std::make_shared<ChannelType>();
  c->kind = Kind::Recv;
  c->payload = std::move(p);
  c->cont = std::move(cont);
  return c;
}

Channel ChannelType::send(Payload p, mst::Channel cont) {
  auto c = std::make_shared<ChannelType>();
  c->kind = Kind::Send;
  c->payload = std::move(p);
  c->cont = std::move(cont);
  return c;
}

Channel ChannelType::offer(std::map<std::string, mst::Channel> cases) {
  auto c = std::make_shared<ChannelType>();
  c->kind = Kind::Offer;
  c->cases = std::move(cases);
  return c;
}

Channel ChannelType::select(std::map<std::string, mst::Channel> cases) {
  auto c = std::make_shared<ChannelType>();
  c->kind = Kind::Select;
  c->cases = std::move(cases);
  return c;
}

Channel ChannelType::rec(std::string var, mst::Channel body) {
  auto c = std::make_shared<ChannelType>();
  c->kind = Kind::Rec;
  c->var = std::move(var);
  c->body = std::move(body);
  return c;
}

Channel ChannelType::variable(std::string name) {
  auto c = std::make_shared<ChannelType>();
  c->kind = Kind::Var;
  c->var = std::move(name);
  return c;
}

Payload value_payload(ValueType t) {
  Payload p;
  p.type = std::move(t);
  return p;
}

Payload channel_payload(Channel c) {
  Payload p;
  p.is_channel = true;
  p.chan = std::move(c);
  return p;
}

// ---------------------------------------------------------------- expressions

bool Expr::is_value() const {
  switch (kind) {
    case Kind::Null:
    case Kind::Label:
    case Kind::ObjId:
    case Kind::Endpoint:
    case Kind::AccessName:
      return true;
    default:
      return false;
  }
}

namespace ex {
namespace {
std::shared_ptr<Expr> mk(Expr::Kind k) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  return e;
}
}  // namespace

ExprPtr null() { return mk(Expr::Kind::Null); }

ExprPtr label(std::string l) {
  auto e = mk(Expr::Kind::Label);
  e->name = std::move(l);
  return e;
}

ExprPtr var(std::string x) {
  auto e = mk(Expr::Kind::Var);
  e->name = std::move(x);
  return e;
}

ExprPtr make_new(std::string cls) {
  auto e = mk(Expr::Kind::New);
  e->name = std::move(cls);
  return e;
}

ExprPtr swap(std::string f, ExprPtr a) {
  auto e = mk(Expr::Kind::Swap);
  e->name = std::move(f);
  e->a = std::move(a);
  return e;
}

ExprPtr call(std::string f, std::string m, ExprPtr arg) {
  auto e = mk(Expr::Kind::Call);
  e->name = std::move(f);
  e->method = std::move(m);
  e->a = std::move(arg);
  return e;
}

ExprPtr self_call(std::string m, ExprPtr arg) {
  auto e = mk(Expr::Kind::SelfCall);
  e->name = std::move(m);
  e->a = std::move(arg);
  return e;
}

ExprPtr seq(ExprPtr a, ExprPtr b) {
  auto e = mk(Expr::Kind::Seq);
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

ExprPtr sw(ExprPtr scrutinee, std::vector<std::pair<std::string, ExprPtr>> cases) {
  auto e = mk(Expr::Kind::Switch);
  e->a = std::move(scrutinee);
  e->cases = std::move(cases);
  return e;
}

ExprPtr loop(ExprPtr cond, ExprPtr body) {
  auto e = mk(Expr::Kind::While);
  e->a = std::move(cond);
  e->b = std::move(body);
  return e;
}

ExprPtr spawn(std::string cls, std::string m, ExprPtr arg) {
  auto e = mk(Expr::Kind::Spawn);
  e->name = std::move(cls);
  e->method = std::move(m);
  e->a = std::move(arg);
  return e;
}

ExprPtr ret(ExprPtr a) {
  auto e = mk(Expr::Kind::Return);
  e->a = std::move(a);
  return e;
}

ExprPtr obj(std::string o) {
  auto e = mk(Expr::Kind::ObjId);
  e->name = std::move(o);
  return e;
}

ExprPtr endpoint(std::string c, char polarity) {
  auto e = mk(Expr::Kind::Endpoint);
  e->name = std::move(c);
  e->polarity = polarity;
  return e;
}

ExprPtr access(std::string n) {
  auto e = mk(Expr::Kind::AccessName);
  e->name = std::move(n);
  return e;
}

ExprPtr with_line(ExprPtr e, int line) {
  auto copy = std::make_shared<Expr>(*e);
  copy->line = line;
  return copy;
}
}  // namespace ex

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind || a->name != b->name || a->method != b->method ||
      a->polarity != b->polarity || a->cases.size() != b->cases.size())
    return false;
  if (!expr_equal(a->a, b->a) || !expr_equal(a->b, b->b)) return false;
  for (size_t i = 0; i < a->cases.size(); ++i) {
    if (a->cases[i].first != b->cases[i].first) return false;
    if (!expr_equal(a->cases[i].second, b->cases[i].second)) return false;
  }
  return true;
}

ExprPtr substitute(const ExprPtr& e, const std::string& x, const ExprPtr& v) {
  if (!e) return e;
  if (e->kind == Expr::Kind::Var) return e->name == x ? v : e;
  if (!e->a && !e->b && e->cases.empty()) return e;
  auto copy = std::make_shared<Expr>(*e);
  copy->a = substitute(e->a, x, v);
  copy->b = substitute(e->b, x, v);
  for (auto& [l, c] : copy->cases) c = substitute(c, x, v);
  return copy;
}

// ---------------------------------------------------------------- programs

const MethodDecl* ClassDecl::method(const std::string& m) const {
  for (auto& d : methods)
    if (d.name == m) return &d;
  return nullptr;
}

FieldTyping ClassDecl::null_fields() const {
  Record r;
  for (auto& f : fields) r[f] = ValueType::null();
  return FieldTyping::record(std::move(r));
}

const ClassDecl* Program::cls(const std::string& name) const {
  auto it = classes.find(name);
  return it == classes.end() ? nullptr : &it->second;
}

const ClassDecl& Program::cls_or_throw(const std::string& name) const {
  auto c = cls(name);
  if (!c) throw Error("NoSuchClass", name);
  return *c;
}

const AccessDecl* Program::access_point(const std::string& name) const {
  for (auto& a : access)
    if (a.name == name) return &a;
  return nullptr;
}

// ---------------------------------------------------------------- runtime values

ExprPtr value_expr(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Null: return ex::null();
    case Value::Kind::Label: return ex::label(v.name);
    case Value::Kind::Obj: return ex::obj(v.name);
    case Value::Kind::Endpoint: return ex::endpoint(v.name, v.polarity);
    case Value::Kind::Access: return ex::access(v.name);
  }
  return ex::null();
}

Value expr_value(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::Null: return Value::null();
    case Expr::Kind::Label: return Value::label(e->name);
    case Expr::Kind::ObjId: return Value::obj(e->name);
    case Expr::Kind::Endpoint: return Value::endpoint(e->name, e->polarity);
    case Expr::Kind::AccessName: return Value::access(e->name);
    default: throw Error("NotAValue", "expression is not a value");
  }
}

Path Path::child(const std::string& f) const {
  Path p = *this;
  p.fields.push_back(f);
  return p;
}

Path Path::parent() const {
  Path p = *this;
  if (!p.fields.empty()) p.fields.pop_back();
  return p;
}

std::string Path::str() const {
  std::string s = root;
  for (auto& f : fields) s += "." + f;
  return s;
}

const ObjectRecord& resolve(const Heap& h, const Path& r) {
  auto it = h.find(r.root);
  if (it == h.end()) throw Error("PathUndefined", r.str() + ": no object " + r.root);
  const ObjectRecord* rec = &it->second;
  for (auto& f : r.fields) {
    auto fit = rec->fields.find(f);
    if (fit == rec->fields.end() || fit->second.kind != Value::Kind::Obj)
      throw Error("PathUndefined", r.str() + ": field " + f + " does not hold an object");
    auto nit = h.find(fit->second.name);
    if (nit == h.end()) throw Error("PathUndefined", r.str() + ": dangling " + fit->second.name);
    rec = &nit->second;
  }
  return *rec;
}

namespace {
std::string resolve_id(const Heap& h, const Path& r) {
  std::string id = r.root;
  resolve(h, r);  // validates
  for (auto& f : r.fields) id = h.at(id).fields.at(f).name;
  return id;
}
}  // namespace

Heap write(const Heap& h, const Path& r, const std::string& f, const Value& v) {
  std::string id = resolve_id(h, r);
  const auto& rec = h.at(id);
  if (!rec.fields.count(f)) throw Error("NoSuchField", r.str() + "." + f);
  Heap out = h;
  out[id].fields[f] = v;
  return out;
}

std::set<std::string> children(const Heap& h, const std::string& o) {
  std::set<std::string> out;
  auto it = h.find(o);
  if (it == h.end()) return out;
  for (auto& [f, v] : it->second.fields)
    if (v.kind == Value::Kind::Obj) out.insert(v.name);
  return out;
}

std::set<std::string> roots(const Heap& h) {
  std::set<std::string> referenced;
  for (auto& [o, rec] : h)
    for (auto& c : children(h, o)) referenced.insert(c);
  std::set<std::string> out;
  for (auto& [o, rec] : h)
    if (!referenced.count(o)) out.insert(o);
  return out;
}

bool complete(const Heap& h) {
  for (auto& [o, rec] : h)
    for (auto& c : children(h, o))
      if (!h.count(c)) return false;
  return true;
}

std::set<std::string> descendants(const Heap& h, const std::string& o) {
  std::set<std::string> seen{o};
  std::deque<std::string> work{o};
  while (!work.empty()) {
    auto cur = work.front();
    work.pop_front();
    for (auto& c : children(h, cur))
      if (seen.insert(c).second) work.push_back(c);
  }
  return seen;
}

std::pair<Heap, Heap> split_heap(const Heap& h, const std::string& o) {
  if (!complete(h)) throw Error("IncompleteHeap", "heap has dangling references");
  auto rs = roots(h);
  if (!rs.count(o)) throw Error("NotARoot", o);
  auto desc = descendants(h, o);
  Heap down, up;
  for (auto& [id, rec] : h) (desc.count(id) ? down : up)[id] = rec;
  return {down, up};
}

Heap rename_heap(const Heap& h, const std::map<std::string, std::string>& phi) {
  auto map_id = [&](const std::string& id) {
    auto it = phi.find(id);
    return it == phi.end() ? id : it->second;
  };
  std::set<std::string> images;
  for (auto& [id, rec] : h)
    if (!images.insert(map_id(id)).second) throw Error("NotInjective", "two objects map to " + map_id(id));
  Heap out;
  for (auto& [id, rec] : h) {
    ObjectRecord r = rec;
    for (auto& [f, v] : r.fields)
      if (v.kind == Value::Kind::Obj) v.name = map_id(v.name);
    out[map_id(id)] = std::move(r);
  }
  return out;
}

Heap heap_union(const Heap& a, const Heap& b) {
  Heap out = a;
  for (auto& [id, rec] : b)
    if (!out.emplace(id, rec).second) throw Error("HeapClash", id + " bound twice");
  return out;
}

// ---------------------------------------------------------------- type operations

Session subst(const Session& s, const std::string& x, const Session& r) {
  switch (s->kind) {
    case SessionType::Kind::Var:
      return s->var == x ? r : s;
    case SessionType::Kind::Rec:
      if (s->var == x) return s;
      return SessionType::rec(s->var, subst(s->body, x, r));
    case SessionType::Kind::Variant: {
      std::map<std::string, Session> cases;
      for (auto& [l, c] : s->cases) cases[l] = subst(c, x, r);
      return SessionType::variant(std::move(cases));
    }
    case SessionType::Kind::Branch: {
      auto sub_v = [&](const ValueType& t) {
        if (!t.is_session()) return t;
        return ValueType::session(subst(t.sess, x, r));
      };
      std::vector<MethodEntry> ms;
      for (auto& m : s->methods) ms.push_back({m.name, sub_v(m.param), sub_v(m.result), subst(m.cont, x, r)});
      return SessionType::branch(std::move(ms));
    }
  }
  return s;
}

Session unfold(const Session& s) {
  if (!s->is_rec()) return s;
  struct Entry {
    std::weak_ptr<const SessionType> node;
    Session result;
  };
  // Memoised so repeated unfoldings share nodes (and their memoised keys).
  thread_local std::unordered_map<const SessionType*, Entry> memo;
  auto it = memo.find(s.get());
  if (it != memo.end() && !it->second.node.expired() && it->second.node.lock() == s) return it->second.result;
  if (memo.size() > 200000) memo.clear();
  Session cur = s;
  int guard = 0;
  while (cur->is_rec()) {
    cur = subst(cur->body, cur->var, cur);
    if (++guard > 10000) throw Error("NonContractiveType", "unfold did not terminate");
  }
  memo[s.get()] = {s, cur};
  return cur;
}

namespace {
Payload subst_payload(const Payload& p, const std::string& x, const Channel& r) {
  if (!p.is_channel) return p;
  return channel_payload(subst(p.chan, x, r));
}
}  // namespace

Channel subst(const Channel& s, const std::string& x, const Channel& r) {
  switch (s->kind) {
    case ChannelType::Kind::End:
      return s;
    case ChannelType::Kind::Var:
      return s->var == x ? r : s;
    case ChannelType::Kind::Rec:
      if (s->var == x) return s;
      return ChannelType::rec(s->var, subst(s->body, x, r));
    case ChannelType::Kind::Recv:
      return ChannelType::recv(subst_payload(s->payload, x, r), subst(s->cont, x, r));
    case ChannelType::Kind::Send:
      return ChannelType::send(subst_payload(s->payload, x, r), subst(s->cont, x, r));
    case ChannelType::Kind::Offer:
    case ChannelType::Kind::Select: {
      std::map<std::string, Channel> cases;
      for (auto& [l, c] : s->cases) cases[l] = subst(c, x, r);
      return s->kind == ChannelType::Kind::Offer ? ChannelType::offer(std::move(cases))
                                                 : ChannelType::select(std::move(cases));
    }
  }
  return s;
}

Channel unfold(const Channel& s) {
  Channel cur = s;
  int guard = 0;
  while (cur->kind == ChannelType::Kind::Rec) {
    cur = subst(cur->body, cur->var, cur);
    if (++guard > 10000) throw Error("NonContractiveType", "unfold did not terminate");
  }
  return cur;
}

namespace {
void fv(const Session& s, std::set<std::string>& bound, std::set<std::string>& out);

void fv_value(const ValueType& t, std::set<std::string>& bound, std::set<std::string>& out) {
  if (t.is_session()) fv(t.sess, bound, out);
}

void fv(const Session& s, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (s->kind) {
    case SessionType::Kind::Var:
      if (!bound.count(s->var)) out.insert(s->var);
      break;
    case SessionType::Kind::Rec: {
      bool fresh = bound.insert(s->var).second;
      fv(s->body, bound, out);
      if (fresh) bound.erase(s->var);
      break;
    }
    case SessionType::Kind::Variant:
      for (auto& [l, c] : s->cases) fv(c, bound, out);
      break;
    case SessionType::Kind::Branch:
      for (auto& m : s->methods) {
        fv_value(m.param, bound, out);
        fv_value(m.result, bound, out);
        fv(m.cont, bound, out);
      }
      break;
  }
}

void fvc(const Channel& s, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (s->kind) {
    case ChannelType::Kind::End:
      break;
    case ChannelType::Kind::Var:
      if (!bound.count(s->var)) out.insert(s->var);
      break;
    case ChannelType::Kind::Rec: {
      bool fresh = bound.insert(s->var).second;
      fvc(s->body, bound, out);
      if (fresh) bound.erase(s->var);
      break;
    }
    case ChannelType::Kind::Recv:
    case ChannelType::Kind::Send:
      if (s->payload.is_channel) fvc(s->payload.chan, bound, out);
      fvc(s->cont, bound, out);
      break;
    case ChannelType::Kind::Offer:
    case ChannelType::Kind::Select:
      for (auto& [l, c] : s->cases) fvc(c, bound, out);
      break;
  }
}
}  // namespace

std::set<std::string> free_vars(const Session& s) {
  std::set<std::string> bound, out;
  fv(s, bound, out);
  return out;
}

std::set<std::string> free_vars(const Channel& s) {
  std::set<std::string> bound, out;
  fvc(s, bound, out);
  return out;
}

namespace {
// a Rec chain must not end in one of its own binders
bool contractive_s(const Session& s) {
  switch (s->kind) {
    case SessionType::Kind::Var:
      return true;
    case SessionType::Kind::Rec: {
      std::set<std::string> chain;
      Session cur = s;
      while (cur->is_rec()) {
        chain.insert(cur->var);
        cur = cur->body;
      }
      if (cur->is_var() && chain.count(cur->var)) return false;
      return contractive_s(cur);
    }
    case SessionType::Kind::Variant:
      for (auto& [l, c] : s->cases)
        if (!contractive_s(c)) return false;
      return true;
    case SessionType::Kind::Branch:
      for (auto& m : s->methods) {
        if (m.param.is_session() && !contractive_s(m.param.sess)) return false;
        if (m.result.is_session() && !contractive_s(m.result.sess)) return false;
        if (!contractive_s(m.cont)) return false;
      }
      return true;
  }
  return true;
}

bool contractive_c(const Channel& s) {
  switch (s->kind) {
    case ChannelType::Kind::End:
    case ChannelType::Kind::Var:
      return true;
    case ChannelType::Kind::Rec: {
      std::set<std::string> chain;
      Channel cur = s;
      while (cur->kind == ChannelType::Kind::Rec) {
        chain.insert(cur->var);
        cur = cur->body;
      }
      if (cur->kind == ChannelType::Kind::Var && chain.count(cur->var)) return false;
      return contractive_c(cur);
    }
    case ChannelType::Kind::Recv:
    case ChannelType::Kind::Send:
      if (s->payload.is_channel && !contractive_c(s->payload.chan)) return false;
      return contractive_c(s->cont);
    case ChannelType::Kind::Offer:
    case ChannelType::Kind::Select:
      for (auto& [l, c] : s->cases)
        if (!contractive_c(c)) return false;
      return true;
  }
  return true;
}
}  // namespace

bool contractive(const Session& s) { return contractive_s(s); }
bool contractive(const Channel& s) { return contractive_c(s); }

namespace {
std::string idx(const std::vector<std::string>& binders, const std::string& x) {
  for (size_t i = binders.size(); i-- > 0;)
    if (binders[i] == x) return "#" + std::to_string(binders.size() - 1 - i);
  return "$" + x;
}

std::string skey(const Session& s, std::vector<std::string>& b);

std::string vkey(const ValueType& t, std::vector<std::string>& b) {
  switch (t.kind) {
    case ValueType::Kind::Null: return "N";
    case ValueType::Kind::LinkThis: return "LT";
    case ValueType::Kind::Link: return "L:" + t.name;
    case ValueType::Kind::Enum: {
      std::string out = "E{";
      for (auto& l : t.labels) out += l + ",";
      return out + "}";
    }
    case ValueType::Kind::Session: return "S" + skey(t.sess, b);
    case ValueType::Kind::Object: return "O:" + t.name + "[" + key(*t.fields) + "]";
  }
  return "?";
}

std::string skey(const Session& s, std::vector<std::string>& b) {
  switch (s->kind) {
    case SessionType::Kind::Var: return idx(b, s->var);
    case SessionType::Kind::Rec: {
      b.push_back(s->var);
      std::string out = "mu." + skey(s->body, b);
      b.pop_back();
      return out;
    }
    case SessionType::Kind::Variant: {
      std::string out = "<";
      for (auto& [l, c] : s->cases) out += l + ":" + skey(c, b) + ";";
      return out + ">";
    }
    case SessionType::Kind::Branch: {
      std::vector<std::string> items;
      for (auto& m : s->methods)
        items.push_back(vkey(m.result, b) + " " + m.name + "(" + vkey(m.param, b) + "):" + skey(m.cont, b));
      std::sort(items.begin(), items.end());
      std::string out = "{";
      for (auto& i : items) out += i + ";";
      return out + "}";
    }
  }
  return "?";
}

std::string ckey(const Channel& s, std::vector<std::string>& b) {
  switch (s->kind) {
    case ChannelType::Kind::End: return "end";
    case ChannelType::Kind::Var: return idx(b, s->var);
    case ChannelType::Kind::Rec: {
      b.push_back(s->var);
      std::string out = "mu." + ckey(s->body, b);
      b.pop_back();
      return out;
    }
    case ChannelType::Kind::Recv:
    case ChannelType::Kind::Send: {
      std::string p;
      if (s->payload.is_channel) {
        p = "[" + ckey(s->payload.chan, b) + "]";
      } else {
        std::vector<std::string> nb;
        p = vkey(s->payload.type, nb);
      }
      return std::string(s->kind == ChannelType::Kind::Recv ? "?" : "!") + p + "." + ckey(s->cont, b);
    }
    case ChannelType::Kind::Offer:
    case ChannelType::Kind::Select: {
      std::string out = s->kind == ChannelType::Kind::Offer ? "&{" : "+{";
      for (auto& [l, c] : s->cases) out += l + ":" + ckey(c, b) + ";";
      return out + "}";
    }
  }
  return "?";
}

std::string rkey(const Record& r) {
  std::string out = "{";
  for (auto& [f, t] : r) {
    std::vector<std::string> b;
    out += f + ":" + vkey(t, b) + ";";
  }
  return out + "}";
}
}  // namespace

// Types are immutable and shared, so keys are memoised per node. The weak
// pointer guards against a freed node's address being reused.
std::string key(const Session& s) {
  struct Entry {
    std::weak_ptr<const SessionType> node;
    std::string key;
  };
  thread_local std::unordered_map<const SessionType*, Entry> memo;
  auto it = memo.find(s.get());
  if (it != memo.end() && !it->second.node.expired() && it->second.node.lock() == s) return it->second.key;
  if (memo.size() > 200000) memo.clear();
  std::vector<std::string> b;
  std::string k = skey(s, b);
  memo[s.get()] = {s, k};
  return k;
}

std::string key(const ValueType& t) {
  std::vector<std::string> b;
  return vkey(t, b);
}

std::string key(const FieldTyping& f) {
  if (!f.variant) return "R" + rkey(f.rec);
  std::string out = "V<";
  for (auto& [l, r] : f.cases) out += l + ":" + rkey(r) + ";";
  return out + ">";
}

std::string key(const Channel& c) {
  std::vector<std::string> b;
  return ckey(c, b);
}

bool struct_equal(const Session& a, const Session& b) { return key(a) == key(b); }
bool struct_equal(const Channel& a, const Channel& b) { return key(a) == key(b); }

FieldTyping with_field(const FieldTyping& f, const std::string& field, const ValueType& t) {
  FieldTyping out = f;
  out.rec[field] = t;
  return out;
}

}  // namespace mst
