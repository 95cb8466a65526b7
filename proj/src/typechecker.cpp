#include "mst/typechecker.hpp"

#include <algorithm>
#include <sstream>

#include "mst/channel.hpp"
#include "mst/render.hpp"
#include "mst/subtyping.hpp"

namespace mst {

namespace {

const LabelSet kBool = {"FALSE", "TRUE"};

[[noreturn]] void fail(const std::string& code, const std::string& detail) { throw Error(code, detail); }

bool is_variant_session(const ValueType& t) { return t.is_session() && unfold(t.sess)->is_variant(); }

const Record& record_of(const FieldTyping& f, const char* where) {
  if (f.variant) fail("VariantShapeMismatch", std::string("variant field typing where a record is needed (") + where + ")");
  return f.rec;
}

FieldTyping uniform_variant(const LabelSet& labels, const Record& r) {
  std::map<std::string, Record> cases;
  for (auto& l : labels) cases[l] = r;
  return FieldTyping::make_variant(std::move(cases));
}

ValueType update_path(const ValueType& t, const std::vector<std::string>& fs, size_t i, const FieldTyping& f) {
  if (!t.is_object()) fail("PathUndefined", "not an open object");
  if (i == fs.size()) return ValueType::object(t.name, f);
  const Record& r = record_of(*t.fields, "path");
  auto it = r.find(fs[i]);
  if (it == r.end()) fail("NoSuchField", fs[i]);
  return ValueType::object(t.name, with_field(*t.fields, fs[i], update_path(it->second, fs, i + 1, f)));
}

const ValueType& type_at(const TypingState& st, const Path& r) {
  auto it = st.env.find(r.root);
  if (it == st.env.end()) fail("PathUndefined", r.str());
  const ValueType* t = &it->second;
  for (auto& f : r.fields) {
    if (!t->is_object()) fail("PathUndefined", r.str());
    const Record& rec = record_of(*t->fields, "path");
    auto ft = rec.find(f);
    if (ft == rec.end()) fail("PathUndefined", r.str());
    t = &ft->second;
  }
  if (!t->is_object()) fail("PathUndefined", r.str() + " is not an open object");
  return *t;
}

bool same_param(const ParamEnv& a, const ParamEnv& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || (a->first == b->first && equivalent(a->second, b->second));
}

class Checker {
 public:
  Checker(const Program& p, const InternalContext* internal)
      : p_(p), internal_(internal), hint_(internal && internal->linked_label) {}

  Typed run(const ExprPtr& e, TypingState st) {
    switch (e->kind) {
      case Expr::Kind::Null:
        leaf(false);
        return {ValueType::null(), std::move(st)};
      case Expr::Kind::Label:
        return label(e, std::move(st));
      case Expr::Kind::Var: {
        leaf(false);
        if (!st.param || st.param->first != e->name) fail("UnboundVariable", e->name);
        ValueType t = st.param->second;
        if (t.linear()) st.param.reset();
        return {t, std::move(st)};
      }
      case Expr::Kind::New: {
        leaf(false);
        return {ValueType::session(p_.cls_or_throw(e->name).session), std::move(st)};
      }
      case Expr::Kind::AccessName: {
        leaf(false);
        auto* a = p_.access_point(e->name);
        if (!a) fail("UnknownAccessPoint", e->name);
        return {ValueType::session(translate_access(a->protocol)), std::move(st)};
      }
      case Expr::Kind::ObjId:
      case Expr::Kind::Endpoint: {
        leaf(false);
        if (!internal_) fail("InternalForm", render(e) + " outside a runtime expression");
        std::string k = e->kind == Expr::Kind::ObjId ? e->name : e->name + e->polarity;
        if (k == st.cur.root) fail("SelfReference", k);
        auto it = st.env.find(k);
        if (it == st.env.end()) fail("UntypedReference", k);
        ValueType t = it->second;
        st.env.erase(it);
        return {t, std::move(st)};
      }
      case Expr::Kind::Swap:
        return swap(e, std::move(st));
      case Expr::Kind::Call:
        return call(e, std::move(st));
      case Expr::Kind::SelfCall:
        return self_call(e, std::move(st));
      case Expr::Kind::Seq: {
        Typed a = run(e->a, std::move(st));
        if (a.type.is_link()) fail("DiscardedLink", "link " + a.type.name + " discarded by ;");
        if (a.type.is_linkthis()) set_fields(a.state, a.state.cur, collapse(fields_at(a.state, a.state.cur)));
        return run(e->b, std::move(a.state));
      }
      case Expr::Kind::Switch:
        return sw(e, std::move(st));
      case Expr::Kind::While:
        return loop(e, std::move(st));
      case Expr::Kind::Spawn:
        return spawn(e, std::move(st));
      case Expr::Kind::Return:
        return ret(e, std::move(st));
    }
    fail("SyntaxError", "unknown expression");
  }

 private:
  const Program& p_;
  const InternalContext* internal_;
  bool hint_;
  size_t depth_ = 0;

  // the first leaf reached is the value sitting in the hole
  bool leaf(bool is_label) {
    if (!hint_) return false;
    hint_ = false;
    if (!is_label) fail("LinkedLabelMissing", "hole does not hold the linked label");
    return true;
  }

  Typed label(const ExprPtr& e, TypingState st) {
    FieldTyping f = fields_at(st, st.cur);
    if (leaf(true)) {
      const std::string& g = *internal_->linked_label;
      const Record& r = record_of(f, "linked label");
      auto it = r.find(g);
      if (it == r.end() || !it->second.is_session()) fail("LinkedLabelMissing", "field " + g);
      Session s = unfold(it->second.sess);
      ValueType v = ValueType::session(SessionType::variant({{e->name, s}}));
      set_fields(st, st.cur, with_field(f, g, v));
      return {ValueType::link(g), std::move(st)};
    }
    Record r = record_of(f, "label");
    set_fields(st, st.cur, FieldTyping::make_variant({{e->name, r}}));
    return {ValueType::linkthis(), std::move(st)};
  }

  const ClassDecl& current_class(const TypingState& st) { return p_.cls_or_throw(class_at(st, st.cur)); }

  void require_field(const ClassDecl& c, const std::string& f) {
    if (std::find(c.fields.begin(), c.fields.end(), f) == c.fields.end()) fail("NoSuchField", c.name + "." + f);
  }

  Typed swap(const ExprPtr& e, TypingState st) {
    Typed a = run(e->a, std::move(st));
    const ClassDecl& c = current_class(a.state);
    require_field(c, e->name);
    FieldTyping f = fields_at(a.state, a.state.cur);
    ValueType out;
    FieldTyping next;
    if (a.type.is_linkthis()) {
      if (!f.variant) fail("VariantShapeMismatch", "linkthis without a variant field typing");
      FieldTyping g = collapse(f);
      out = g.rec.at(e->name);
      next = with_field(g, e->name, ValueType::enumeration(f.labels()));
    } else {
      const Record& r = record_of(f, "swap");
      out = r.at(e->name);
      next = with_field(f, e->name, a.type);
    }
    if (is_variant_session(out)) fail("SwapOnVariantField", c.name + "." + e->name + " holds " + render(out));
    set_fields(a.state, a.state.cur, next);
    return {out, std::move(a.state)};
  }

  Session target_session(const Record& r, const std::string& cls, const std::string& f) {
    auto it = r.find(f);
    if (it == r.end()) fail("NoSuchField", cls + "." + f);
    if (!it->second.is_session()) fail("NoSuchMethod", cls + "." + f + " holds " + render(it->second));
    return it->second.sess;
  }

  Typed call(const ExprPtr& e, TypingState st) {
    Typed a = run(e->a, std::move(st));
    const ClassDecl& c = current_class(a.state);
    require_field(c, e->name);
    FieldTyping f = fields_at(a.state, a.state.cur);
    FieldTyping base;
    ValueType arg = a.type;
    if (a.type.is_linkthis()) {
      if (!f.variant) fail("VariantShapeMismatch", "linkthis without a variant field typing");
      base = collapse(f);
      arg = ValueType::enumeration(f.labels());
    } else {
      base = FieldTyping::record(record_of(f, "call"));
    }
    Session s = target_session(base.rec, c.name, e->name);
    MethodEntry m;
    try {
      m = resolve_signature(s, e->method, arg);
    } catch (const Error& err) {
      fail(err.code(), c.name + "." + e->name + "." + e->method + ": " + err.detail());
    }
    if (a.type.is_linkthis() && !m.param.is_enum())
      fail("NoSuchMethod", e->method + " does not take an enumeration");
    set_fields(a.state, a.state.cur, with_field(base, e->name, ValueType::session(m.cont)));
    ValueType out = m.result.is_linkthis() ? ValueType::link(e->name) : m.result;
    return {out, std::move(a.state)};
  }

  Typed self_call(const ExprPtr& e, TypingState st) {
    const ClassDecl& c = current_class(st);
    const MethodDecl* d = c.method(e->name);
    if (!d || !d->annot) fail("MethodUndeclared", c.name + "." + e->name + " has no annotation");
    const Annotation& an = *d->annot;
    Typed a = run(e->a, std::move(st));
    FieldTyping f = fields_at(a.state, a.state.cur);
    if (a.type.is_linkthis()) {
      if (!f.variant) fail("VariantShapeMismatch", "linkthis without a variant field typing");
      if (!subtype_value(ValueType::enumeration(f.labels()), an.param))
        fail("AnnotationMismatch", c.name + "." + e->name + " parameter");
      f = collapse(f);
    } else {
      if (f.variant) fail("VariantShapeMismatch", "variant field typing at a self call");
      if (!subtype_value(a.type, an.param)) fail("AnnotationMismatch", c.name + "." + e->name + " parameter");
    }
    if (!subtype_field(f, an.req))
      fail("AnnotationMismatch", c.name + "." + e->name + " requires " + render(an.req) + ", have " + render(f));
    set_fields(a.state, a.state.cur, an.ens);
    return {an.result, std::move(a.state)};
  }

  struct Arm {
    std::string label;
    TypingState start;
  };

  // the branch starting points selected by a label-valued scrutinee
  std::vector<Arm> arms(const Typed& a, const LabelSet* allowed, LabelSet* seen, const char* what) {
    std::vector<Arm> out;
    const TypingState& st = a.state;
    FieldTyping f = fields_at(st, st.cur);
    auto admit = [&](const LabelSet& ls) {
      if (allowed && !std::includes(allowed->begin(), allowed->end(), ls.begin(), ls.end())) {
        std::string have;
        for (auto& l : ls) have += (have.empty() ? "" : ",") + l;
        fail(std::string(what) == "while" ? "WhileConditionNotBoolean" : "SwitchLabelCoverage",
             "labels {" + have + "} not covered");
      }
      if (seen) *seen = ls;
    };
    if (a.type.is_enum()) {
      if (f.variant) fail("VariantShapeMismatch", "variant field typing at a switch");
      admit(a.type.labels);
      for (auto& l : a.type.labels) out.push_back({l, st});
    } else if (a.type.is_linkthis()) {
      if (!f.variant) fail("VariantShapeMismatch", "linkthis without a variant field typing");
      admit(f.labels());
      TypingState s2 = st;
      set_fields(s2, s2.cur, collapse(f));
      for (auto& l : f.labels()) out.push_back({l, s2});
    } else if (a.type.is_link()) {
      const Record& r = record_of(f, what);
      auto it = r.find(a.type.name);
      if (it == r.end() || !is_variant_session(it->second))
        fail("VariantShapeMismatch", "link " + a.type.name + " does not hold a variant");
      Session v = unfold(it->second.sess);
      LabelSet ls;
      for (auto& [l, s] : v->cases) ls.insert(l);
      admit(ls);
      for (auto& [l, s] : v->cases) {
        TypingState s2 = st;
        set_fields(s2, s2.cur, with_field(f, a.type.name, ValueType::session(s)));
        out.push_back({l, s2});
      }
    } else {
      fail(std::string(what) == "while" ? "WhileConditionNotBoolean" : "SwitchOnNonLabel",
           "scrutinee has type " + render(a.type));
    }
    return out;
  }

  Typed sw(const ExprPtr& e, TypingState st) {
    Typed a = run(e->a, std::move(st));
    LabelSet cases;
    std::map<std::string, ExprPtr> body;
    for (auto& [l, b] : e->cases) {
      cases.insert(l);
      body[l] = b;
    }
    std::vector<Arm> as = arms(a, &cases, nullptr, "switch");
    std::optional<Typed> acc;
    for (auto& arm : as) {
      Typed t = run(body.at(arm.label), arm.start);
      if (!acc) {
        acc = std::move(t);
        continue;
      }
      if (!equivalent(acc->type, t.type)) acc->type = join_value(acc->type, t.type);
      FieldTyping fa = fields_at(acc->state, acc->state.cur), fb = fields_at(t.state, t.state.cur);
      if (!equivalent(fa, fb)) set_fields(acc->state, acc->state.cur, join_field(fa, fb));
      if (!same_param(acc->state.param, t.state.param)) {
        if (acc->state.param && t.state.param && acc->state.param->first == t.state.param->first)
          fail("BranchTypeMismatch", "parameter types differ across branches");
        acc->state.param.reset();
      }
      std::set<std::string> ka, kb;
      for (auto& [k, v] : acc->state.env) ka.insert(k);
      for (auto& [k, v] : t.state.env) kb.insert(k);
      if (ka != kb) fail("BranchTypeMismatch", "branches consume different references");
    }
    if (!acc) fail("SwitchLabelCoverage", "no reachable branch");
    return std::move(*acc);
  }

  Typed loop(const ExprPtr& e, TypingState st) {
    FieldTyping f0 = fields_at(st, st.cur);
    ParamEnv v0 = st.param;
    Typed c = run(e->a, std::move(st));
    LabelSet seen;
    std::vector<Arm> as = arms(c, &kBool, &seen, "while");
    std::optional<TypingState> exit;
    for (auto& arm : as) {
      if (arm.label == "FALSE") {
        exit = arm.start;
        continue;
      }
      Typed b = run(e->b, arm.start);
      if (!b.type.is_null()) fail("LoopInvariantMismatch", "loop body has type " + render(b.type));
      FieldTyping fb = fields_at(b.state, b.state.cur);
      bool ok = internal_ ? subtype_field(fb, f0) : equivalent(fb, f0);
      if (!ok) fail("LoopInvariantMismatch", "body leaves " + render(fb) + ", loop entry has " + render(f0));
      if (b.state.param.has_value() != v0.has_value() || (v0 && !subtype_value(b.state.param->second, v0->second)))
        fail("LoopInvariantMismatch", "loop body changes the parameter environment");
    }
    if (!exit) fail("LoopInvariantMismatch", "loop condition can never be FALSE");
    return {ValueType::null(), std::move(*exit)};
  }

  Typed spawn(const ExprPtr& e, TypingState st) {
    Typed a = run(e->a, std::move(st));
    const ClassDecl* c = p_.cls(e->name);
    if (!c) fail("NoSuchClass", e->name);
    if (!a.type.is_null()) fail("SpawnUnavailable", "spawn argument has type " + render(a.type));
    Session s = unfold(c->session);
    bool found = false;
    for (auto& m : s->methods)
      if (m.name == e->method && m.param.is_null() && m.result.is_null()) found = true;
    if (!found) fail("SpawnUnavailable", e->name + "." + e->method + " is not available as " + e->method + "(): Null");
    return {ValueType::null(), std::move(a.state)};
  }

  Typed ret(const ExprPtr& e, TypingState st) {
    if (!internal_ || depth_ >= internal_->frames.size()) fail("InternalForm", "return without an open call");
    const CallFrame& fr = internal_->frames[depth_];
    Path outer = st.cur;
    Path inner = outer.child(fr.field);
    if (class_at(st, inner) != fr.cls) fail("FrameMismatch", inner.str() + " is not of class " + fr.cls);
    st.cur = inner;
    ++depth_;
    Typed a = run(e->a, std::move(st));
    --depth_;
    FieldTyping fend = fields_at(a.state, inner);
    const MethodEntry& m = fr.entry;
    if (a.type.is_link()) fail("DiscardedLink", "link " + a.type.name + " returned from " + fr.cls + "." + m.name);
    FieldTyping settled;
    ValueType out;
    if (a.type.is_linkthis()) {
      if (!fend.variant) fail("VariantShapeMismatch", "linkthis without a variant field typing");
      if (m.result.is_linkthis()) {
        settled = fend;
        out = ValueType::link(fr.field);
      } else if (m.result.is_enum() && subtype_value(ValueType::enumeration(fend.labels()), m.result)) {
        settled = collapse(fend);
        out = m.result;
      } else {
        fail("ResultTypeMismatch", fr.cls + "." + m.name + " returns linkthis, declared " + render(m.result));
      }
    } else if (a.type.is_enum() && m.result.is_linkthis()) {
      settled = uniform_variant(a.type.labels, record_of(fend, "return"));
      out = ValueType::link(fr.field);
    } else if (subtype_value(a.type, m.result)) {
      settled = fend;
      out = m.result;
    } else {
      fail("ResultTypeMismatch", fr.cls + "." + m.name + " returns " + render(a.type) + ", declared " + render(m.result));
    }
    if (!internal_->consistent || !internal_->consistent(fr.cls, settled, m.cont))
      fail("ConsistencyFailure", fr.cls + " with " + render(settled) + " is not consistent with " + render(m.cont));
    a.state.cur = outer;
    FieldTyping fo = fields_at(a.state, outer);
    set_fields(a.state, outer, with_field(fo, fr.field, ValueType::session(m.cont)));
    return {out, std::move(a.state)};
  }
};

class Consistency {
 public:
  Consistency(const Program& p, const ClassDecl& c, int cap, std::vector<Witness>* visited)
      : p_(p), c_(c), cap_(cap), visited_(visited) {}

  int steps() const { return steps_; }

  void run(const Session& s, const FieldTyping& f) {
    if (++steps_ > cap_) fail("DepthLimitExceeded", c_.name + ": more than " + std::to_string(cap_) + " steps");
    auto k = std::make_pair(key(f), key(s));
    if (delta_.count(k)) return;
    if (seen_.insert(k).second && visited_) visited_->push_back({f, s});
    if (s->is_rec()) {
      delta_.insert(k);
      run(subst(s->body, s->var, s), f);
      return;
    }
    if (s->is_var()) fail("UnboundStateName", s->var);
    if (s->is_variant()) {
      if (!f.variant) fail("VariantShapeMismatch", c_.name + ": record " + render(f) + " at variant " + render(s));
      for (auto& [l, r] : f.cases) {
        auto it = s->cases.find(l);
        if (it == s->cases.end()) fail("VariantShapeMismatch", c_.name + ": label " + l + " not in " + render(s));
        run(it->second, FieldTyping::record(r));
      }
      return;
    }
    if (f.variant) fail("VariantShapeMismatch", c_.name + ": variant " + render(f) + " at branch " + render(s));
    for (auto& m : s->methods) {
      const MethodDecl* d = c_.method(m.name);
      if (!d) fail("MethodUndeclared", c_.name + "." + m.name);
      BResult b;
      try {
        b = infer_expr(p_, c_.name, d->body, f, ParamEnv{{d->param, m.param}});
      } catch (const Error& e) {
        if (e.code() == "DepthLimitExceeded") throw;
        fail(e.code(), c_.name + "." + m.name + " from " + render(f) + ": " + e.detail());
      }
      if (subtype_value(b.type, m.result)) {
        run(m.cont, b.fields);
      } else if (b.type.is_enum() && m.result.is_linkthis()) {
        run(m.cont, uniform_variant(b.type.labels, record_of(b.fields, "result")));
      } else if (b.type.is_linkthis() && m.result.is_enum() &&
                 subtype_value(ValueType::enumeration(b.fields.labels()), m.result)) {
        run(m.cont, collapse(b.fields));
      } else {
        fail("ResultTypeMismatch",
             c_.name + "." + m.name + " returns " + render(b.type) + ", declared " + render(m.result));
      }
    }
  }

 private:
  const Program& p_;
  const ClassDecl& c_;
  int cap_;
  std::vector<Witness>* visited_;
  int steps_ = 0;
  std::set<std::pair<std::string, std::string>> delta_;
  std::set<std::pair<std::string, std::string>> seen_;
};

}  // namespace

FieldTyping fields_at(const TypingState& st, const Path& r) { return *type_at(st, r).fields; }
std::string class_at(const TypingState& st, const Path& r) { return type_at(st, r).name; }

void set_fields(TypingState& st, const Path& r, const FieldTyping& f) {
  auto it = st.env.find(r.root);
  if (it == st.env.end()) fail("PathUndefined", r.str());
  it->second = update_path(it->second, r.fields, 0, f);
}

Typed infer(const Program& p, const ExprPtr& e, const TypingState& st, const InternalContext* internal) {
  return Checker(p, internal).run(e, st);
}

BResult infer_expr(const Program& p, const std::string& cls, const ExprPtr& e, const FieldTyping& f,
                   const ParamEnv& v) {
  TypingState st;
  st.env["this"] = ValueType::object(cls, f);
  st.cur = Path{"this", {}};
  st.param = v;
  Typed t = infer(p, e, st);
  return {t.type, fields_at(t.state, t.state.cur), t.state.param};
}

MethodEntry resolve_signature(const Session& s, const std::string& m, const ValueType& arg) {
  Session u = unfold(s);
  if (!u->is_branch()) fail("NoSuchMethod", m + " called on a variant state");
  std::vector<const MethodEntry*> cands;
  for (auto& e : u->methods)
    if (e.name == m && subtype_value(arg, e.param)) cands.push_back(&e);
  if (cands.empty()) fail("NoSuchMethod", m + "(" + render(arg) + ") not available in " + render(s));
  if (cands.size() == 1) return *cands[0];
  const MethodEntry* best = nullptr;
  for (auto* c : cands) {
    bool least = std::all_of(cands.begin(), cands.end(),
                             [&](const MethodEntry* d) { return c == d || subtype_value(c->param, d->param); });
    if (least) {
      if (best) fail("AmbiguousOverload", m + "(" + render(arg) + ")");
      best = c;
    }
  }
  if (!best) fail("AmbiguousOverload", m + "(" + render(arg) + ")");
  return *best;
}

void consistency(const Program& p, const std::string& cls, const FieldTyping& f, const Session& s,
                 std::vector<Witness>* visited, int cap) {
  Consistency a(p, p.cls_or_throw(cls), cap, visited);
  a.run(s, f);
}

bool consistent(const Program& p, const std::string& cls, const FieldTyping& f, const Session& s, int cap) {
  try {
    consistency(p, cls, f, s, nullptr, cap);
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::vector<MethodVerdict> method_verdicts(const Program& p, const std::string& cls, const FieldTyping& f,
                                           const Session& s) {
  std::vector<MethodVerdict> out;
  Session u = unfold(s);
  if (!u->is_branch()) fail("VariantShapeMismatch", "method verdicts need a branch state");
  for (auto& m : u->methods) {
    MethodVerdict v{m.name, true, "", ""};
    try {
      consistency(p, cls, f, SessionType::branch({m}));
    } catch (const Error& e) {
      v.ok = false;
      v.code = e.code();
      v.detail = e.detail();
    }
    out.push_back(std::move(v));
  }
  return out;
}

ClassVerdict check_class(const Program& p, const ClassDecl& c, const CheckOptions& opts) {
  ClassVerdict v;
  v.cls = c.name;
  try {
    Consistency a(p, c, opts.step_cap, &v.witnesses);
    try {
      a.run(c.session, c.null_fields());
    } catch (...) {
      v.steps = a.steps();
      throw;
    }
    v.steps = a.steps();
    for (auto& m : c.methods) {
      if (!m.annot) continue;
      const Annotation& an = *m.annot;
      if (an.ens.variant) fail("AnnotationMismatch", c.name + "." + m.name + " ensures a variant");
      BResult b;
      try {
        b = infer_expr(p, c.name, m.body, an.req, ParamEnv{{m.param, an.param}});
      } catch (const Error& e) {
        fail(e.code(), c.name + "." + m.name + " (annotated): " + e.detail());
      }
      FieldTyping fin = b.fields;
      ValueType res = b.type;
      if (res.is_linkthis() && an.result.is_enum()) {
        res = ValueType::enumeration(fin.labels());
        fin = collapse(fin);
      }
      if (!subtype_value(res, an.result) || !subtype_field(fin, an.ens))
        fail("AnnotationMismatch", c.name + "." + m.name + " ends with " + render(b.type) + ", " + render(b.fields) +
                                       "; declared " + render(an.result) + ", " + render(an.ens));
    }
  } catch (const Error& e) {
    v.ok = false;
    v.code = e.code();
    v.detail = e.detail();
  }
  return v;
}

CheckReport check_program(const Program& p, const CheckOptions& opts) {
  CheckReport r;
  for (auto& name : p.class_order) r.classes.push_back(check_class(p, p.classes.at(name), opts));
  std::set<std::string> names;
  for (auto& a : p.access)
    if (!names.insert(a.name).second) r.program_errors.push_back({"DuplicateAccessPoint", a.name});
  if (opts.require_main) {
    if (!p.main) {
      r.program_errors.push_back({"MainMissing", "no main declaration"});
    } else {
      auto& [cn, mn] = *p.main;
      const ClassDecl* c = p.cls(cn);
      bool ok = false;
      if (c && c->method(mn))
        for (auto& m : unfold(c->session)->methods)
          if (m.name == mn && m.param.is_null()) ok = true;
      if (!ok) r.program_errors.push_back({"MainUnavailable", cn + "." + mn + " is not available with a Null parameter"});
    }
  }
  return r;
}

bool CheckReport::ok() const {
  return program_errors.empty() && std::all_of(classes.begin(), classes.end(), [](auto& c) { return c.ok; });
}

const ClassVerdict* CheckReport::verdict(const std::string& cls) const {
  for (auto& c : classes)
    if (c.cls == cls) return &c;
  return nullptr;
}

std::string CheckReport::render() const {
  std::ostringstream os;
  for (auto& c : classes) {
    os << "CLASS " << c.cls;
    if (c.ok)
      os << " OK\n";
    else
      os << " ERR " << c.code << " " << c.detail << "\n";
  }
  for (auto& [code, detail] : program_errors) os << "PROGRAM ERR " << code << " " << detail << "\n";
  return os.str();
}

}  // namespace mst
