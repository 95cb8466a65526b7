#include "mst/monitor.hpp"

#include <cctype>
#include <sstream>

#include "mst/channel.hpp"
#include "mst/render.hpp"
#include "mst/subtyping.hpp"

namespace mst {

namespace {

[[noreturn]] void tracking(const std::string& d) { throw Error("TrackingFault", d); }
[[noreturn]] void ill(const std::string& d) { throw Error("StateIllTyped", d); }

bool is_endpoint_key(const std::string& k) { return !k.empty() && (k.back() == '+' || k.back() == '-'); }

std::string other_end(const std::string& k) {
  return k.substr(0, k.size() - 1) + (k.back() == '+' ? '-' : '+');
}

ValueType field_type(const TypingState& st, const Path& r, const std::string& f) {
  FieldTyping F = fields_at(st, r);
  if (F.variant) tracking("variant field typing at " + r.str());
  auto it = F.rec.find(f);
  if (it == F.rec.end()) tracking("no field " + f + " at " + r.str());
  return it->second;
}

void set_field_type(TypingState& st, const Path& r, const std::string& f, const ValueType& t) {
  set_fields(st, r, with_field(fields_at(st, r), f, t));
}

Channel advance(const Channel& c, const Value& v, bool sending) {
  Channel u = unfold(c);
  using K = ChannelType::Kind;
  if (sending && u->kind == K::Send) return u->cont;
  if (!sending && u->kind == K::Recv) return u->cont;
  if ((sending && u->kind == K::Select) || (!sending && u->kind == K::Offer)) {
    if (v.kind != Value::Kind::Label || !u->cases.count(v.name)) tracking("label " + render(v) + " not offered by " + render(c));
    return u->cases.at(v.name);
  }
  tracking(std::string(sending ? "send" : "receive") + " on " + render(c));
}

}  // namespace

CallTrace parse_trace(const std::string& text) {
  CallTrace out;
  std::istringstream is(text);
  std::string w;
  while (is >> w) out.push_back({static_cast<bool>(std::isupper(static_cast<unsigned char>(w[0]))), w});
  return out;
}

std::string render_trace(const CallTrace& t) {
  std::string s;
  for (auto& a : t) s += (s.empty() ? "" : " ") + a.name;
  return s;
}

std::vector<Session> lts_step(const Session& s, const TraceItem& a) {
  Session u = unfold(s);
  if (a.label) {
    if (!u->is_variant()) return {s};
    auto it = u->cases.find(a.name);
    if (it == u->cases.end()) throw Error("TypeErrorTransition", "label " + a.name + " not in " + render(s));
    return {it->second};
  }
  std::vector<Session> out;
  std::set<std::string> keys;
  if (u->is_branch())
    for (auto& m : u->methods)
      if (m.name == a.name && keys.insert(key(m.cont)).second) out.push_back(m.cont);
  if (out.empty()) throw Error("TypeErrorTransition", a.name + " not available in " + render(s));
  return out;
}

TraceCheck replay(const Session& start, const CallTrace& trace) {
  std::vector<Session> cur{start};
  for (size_t i = 0; i < trace.size(); ++i) {
    std::vector<Session> next;
    std::set<std::string> keys;
    for (auto& s : cur) {
      try {
        for (auto& n : lts_step(s, trace[i]))
          if (keys.insert(key(n)).second) next.push_back(n);
      } catch (const Error&) {
      }
    }
    if (next.empty()) return {false, i + 1, trace[i].name};
    cur = std::move(next);
  }
  return {};
}

CallTraceMap extend_traces(const CallTraceMap& tr, const StepEvent& ev) {
  CallTraceMap out = tr;
  if (ev.rule == "New") {
    out[ev.obj] = {};
  } else if (ev.rule == "Call") {
    out[ev.obj].push_back({false, ev.method});
  } else if (ev.rule == "Return") {
    if (ev.value.kind == Value::Kind::Label) out[ev.obj].push_back({true, ev.value.name});
  } else if (ev.rule == "Spawn") {
    out[ev.obj] = {{false, ev.method}};
  } else if (ev.rule == "ComObj") {
    CallTraceMap moved;
    for (auto& [from, to] : ev.phi) {
      auto it = out.find(from);
      if (it != out.end()) {
        moved[to] = it->second;
        out.erase(it);
      }
    }
    for (auto& [k, v] : moved) out[k] = v;
  }
  return out;
}

TraceCheck traces_valid(const Program& p, const CallTraceMap& tr, const Configuration& c, std::string* object) {
  for (auto& t : c.threads)
    for (auto& [o, rec] : t.heap) {
      auto it = tr.find(o);
      if (it == tr.end()) {
        if (object) *object = o;
        return {false, 0, "(no trace)"};
      }
      TraceCheck r = replay(p.cls_or_throw(rec.cls).session, it->second);
      if (!r.valid) {
        if (object) *object = o;
        return r;
      }
    }
  return {};
}

std::string Violation::line() const {
  return "VIOLATION " + kind + " step=" + std::to_string(step) + " thread=" + std::to_string(thread) + " " + detail;
}

Monitor::Monitor(const Program& p, MonitorOptions opts) : p_(p), opts_(opts) {
  for (auto& name : p.class_order) witnesses_[name] = check_class(p, p.classes.at(name)).witnesses;
}

bool Monitor::consistent(const std::string& cls, const FieldTyping& f, const Session& s) const {
  auto k = std::make_tuple(cls, key(f), key(s));
  auto it = cache_.find(k);
  if (it != cache_.end()) return it->second;
  bool ok = mst::consistent(p_, cls, f, s);
  cache_[k] = ok;
  return ok;
}

void Monitor::start(const Configuration& c) {
  envs_.clear();
  theta_.clear();
  hidden_.clear();
  traces_.clear();
  for (auto& t : c.threads) {
    ThreadEnv env;
    for (auto& [o, rec] : t.heap) {
      const ClassDecl& cd = p_.cls_or_throw(rec.cls);
      if (o == t.cur.root)
        env.gamma[o] = ValueType::object(rec.cls, cd.null_fields());
      else
        hidden_[o] = cd.null_fields();
      traces_[o] = {};
    }
    envs_[t.id] = std::move(env);
  }
  if (p_.main && !c.threads.empty()) traces_[c.threads[0].cur.root] = {{false, p_.main->second}};
}

FieldTyping Monitor::open_fields(const std::string& cls, const std::string& o, const Session& view) const {
  auto h = hidden_.find(o);
  if (h == hidden_.end()) tracking("no field typing recorded for " + o);
  const FieldTyping& H = h->second;
  std::string vk = key(unfold(view)), hk = key(H);
  auto it = witnesses_.find(cls);
  if (it != witnesses_.end()) {
    for (auto& w : it->second)
      if (key(w.fields) == hk && key(unfold(w.state)) == vk) return w.fields;
    for (auto& w : it->second)
      if (key(unfold(w.state)) == vk && subtype_field(H, w.fields)) return w.fields;
  }
  if (consistent(cls, H, view)) return H;
  tracking(o + " with " + render(H) + " cannot be opened at " + render(view));
}

ValueType Monitor::value_type(const ThreadEnv& env, const Value& v) const {
  switch (v.kind) {
    case Value::Kind::Null:
      return ValueType::null();
    case Value::Kind::Label:
      return ValueType::enumeration({v.name});
    case Value::Kind::Obj:
    case Value::Kind::Endpoint: {
      std::string k = v.kind == Value::Kind::Obj ? v.name : v.endpoint_key();
      auto it = env.gamma.find(k);
      if (it == env.gamma.end()) tracking(k + " is not in the environment");
      return it->second;
    }
    case Value::Kind::Access: {
      auto* a = p_.access_point(v.name);
      if (!a) tracking("unknown access point " + v.name);
      return ValueType::session(translate_access(a->protocol));
    }
  }
  return ValueType::null();
}

void Monitor::track(const Configuration& before, const StepEvent& ev, const Configuration& after) {
  traces_ = extend_traces(traces_, ev);
  const Thread& t0 = before.threads.at(ev.index[0]);
  ThreadEnv& env = envs_[t0.id];
  std::optional<PendingLink> pending = env.pending;
  env.pending.reset();
  TypingState st{env.gamma, t0.cur, std::nullopt};
  const Path& r = t0.cur;

  if (ev.rule == "New") {
    st.env[ev.obj] = ValueType::session(p_.cls_or_throw(ev.cls).session);
    hidden_[ev.obj] = p_.cls_or_throw(ev.cls).null_fields();
  } else if (ev.rule == "Swap") {
    ValueType old_t = field_type(st, r, ev.field);
    ValueType new_t;
    const Value& v = ev.value;
    if (v.kind == Value::Kind::Label && pending) {
      set_field_type(st, r, pending->field, ValueType::session(pending->variant));
      new_t = ValueType::link(pending->field);
    } else {
      new_t = value_type(env, v);
      if (v.kind == Value::Kind::Obj) st.env.erase(v.name);
      if (v.kind == Value::Kind::Endpoint) st.env.erase(v.endpoint_key());
    }
    set_field_type(st, r, ev.field, new_t);
    const Value& w = ev.old;
    if (w.kind == Value::Kind::Obj || w.kind == Value::Kind::Endpoint) {
      if (!old_t.is_session() || unfold(old_t.sess)->is_variant())
        tracking("swapping out " + render(w) + " typed " + render(old_t));
      st.env[w.kind == Value::Kind::Obj ? w.name : w.endpoint_key()] = old_t;
    } else if (w.kind == Value::Kind::Label && old_t.is_link()) {
      ValueType g = field_type(st, r, old_t.name);
      if (!g.is_session() || !unfold(g.sess)->is_variant()) tracking("link " + old_t.name + " without a variant");
      Session var = unfold(g.sess);
      auto it = var->cases.find(w.name);
      if (it == var->cases.end()) tracking("label " + w.name + " outside " + render(g));
      set_field_type(st, r, old_t.name, ValueType::session(it->second));
      env.pending = PendingLink{old_t.name, g.sess};
    }
  } else if (ev.rule == "Call") {
    ValueType view = field_type(st, r, ev.field);
    if (!view.is_session()) tracking("call on field " + ev.field + " typed " + render(view));
    ValueType arg = value_type(env, ev.value);
    MethodEntry m = resolve_signature(view.sess, ev.method, arg);
    if (ev.value.kind == Value::Kind::Obj) st.env[ev.value.name] = m.param;
    if (ev.value.kind == Value::Kind::Endpoint) st.env[ev.value.endpoint_key()] = m.param;
    FieldTyping F = open_fields(ev.cls, ev.obj, view.sess);
    set_field_type(st, r, ev.field, ValueType::object(ev.cls, F));
    env.frames.push_back({ev.field, ev.cls, m});
  } else if (ev.rule == "Return") {
    if (env.frames.empty()) tracking("return without a frame");
    CallFrame fr = env.frames.back();
    env.frames.pop_back();
    Path outer = r.parent();
    FieldTyping fend = fields_at(st, r);
    if (fend.variant) tracking("variant field typing at return");
    hidden_[ev.obj] = fend;
    if (fr.entry.result.is_linkthis()) {
      if (ev.value.kind != Value::Kind::Label) tracking("linkthis method returned " + render(ev.value));
      Session var = unfold(fr.entry.cont);
      if (!var->is_variant() || !var->cases.count(ev.value.name))
        tracking("label " + ev.value.name + " outside " + render(fr.entry.cont));
      set_field_type(st, outer, fr.field, ValueType::session(var->cases.at(ev.value.name)));
      env.pending = PendingLink{fr.field, fr.entry.cont};
    } else {
      set_field_type(st, outer, fr.field, ValueType::session(fr.entry.cont));
    }
  } else if (ev.rule == "Spawn") {
    ThreadEnv ne;
    ne.gamma[ev.obj] = ValueType::object(ev.cls, p_.cls_or_throw(ev.cls).null_fields());
    envs_[ev.new_thread] = std::move(ne);
  } else if (ev.rule == "Init" || ev.rule == "ComBase" || ev.rule == "ComObj") {
    const Thread& t1 = before.threads.at(ev.index[1]);
    ThreadEnv& env1 = envs_[t1.id];
    TypingState st1{env1.gamma, t1.cur, std::nullopt};
    ValueType fa = field_type(st, r, ev.field), fb = field_type(st1, t1.cur, ev.field2);
    if (!fa.is_session() || !fb.is_session()) tracking("communication through a non-session field");
    if (ev.rule == "Init") {
      auto* a = p_.access_point(ev.access);
      if (!a) tracking("unknown access point " + ev.access);
      theta_[ev.chan + "+"] = a->protocol;
      theta_[ev.chan + "-"] = dual(a->protocol);
      MethodEntry ma = resolve_signature(fa.sess, "accept", ValueType::null());
      MethodEntry mb = resolve_signature(fb.sess, "request", ValueType::null());
      set_field_type(st, r, ev.field, ValueType::session(ma.cont));
      set_field_type(st1, t1.cur, ev.field2, ValueType::session(mb.cont));
      st.env[ev.chan + "+"] = ValueType::session(translate_channel(theta_[ev.chan + "+"]));
      st1.env[ev.chan + "-"] = ValueType::session(translate_channel(theta_[ev.chan + "-"]));
    } else {
      Value ea = resolve(t0.heap, r).fields.at(ev.field);
      Value eb = resolve(t1.heap, t1.cur).fields.at(ev.field2);
      ValueType arg = value_type(env, ev.value);
      MethodEntry ms = resolve_signature(fa.sess, "send", arg);
      MethodEntry mr = resolve_signature(fb.sess, "receive", ValueType::null());
      theta_[ea.endpoint_key()] = advance(theta_.at(ea.endpoint_key()), ev.value, true);
      theta_[eb.endpoint_key()] = advance(theta_.at(eb.endpoint_key()), ev.value, false);
      set_field_type(st, r, ev.field, ValueType::session(ms.cont));
      if (mr.result.is_linkthis()) {
        Session var = unfold(mr.cont);
        if (!var->is_variant() || ev.value.kind != Value::Kind::Label || !var->cases.count(ev.value.name))
          tracking("received " + render(ev.value) + " against " + render(mr.cont));
        set_field_type(st1, t1.cur, ev.field2, ValueType::session(var->cases.at(ev.value.name)));
        env1.pending = PendingLink{ev.field2, mr.cont};
      } else {
        set_field_type(st1, t1.cur, ev.field2, ValueType::session(mr.cont));
      }
      if (ev.value.kind == Value::Kind::Endpoint) {
        st.env.erase(ev.value.endpoint_key());
        st1.env[ev.value.endpoint_key()] = mr.result;
      }
      if (ev.rule == "ComObj") {
        st.env.erase(ev.obj);
        st1.env[ev.phi.at(ev.obj)] = mr.result;
        std::map<std::string, FieldTyping> moved;
        for (auto& [from, to] : ev.phi) {
          auto it = hidden_.find(from);
          if (it != hidden_.end()) {
            moved[to] = it->second;
            hidden_.erase(it);
          }
        }
        for (auto& [k, v] : moved) hidden_[k] = v;
      }
    }
    env1.gamma = std::move(st1.env);
  }
  env.gamma = std::move(st.env);
  (void)after;
}

void Monitor::agree_value(const Thread& t, const ObjectRecord& rec, const Record& r, const std::string& f,
                          const std::string& where) const {
  const Value& v = rec.fields.at(f);
  const ValueType& T = r.at(f);
  std::string at = where + "." + f;
  switch (T.kind) {
    case ValueType::Kind::Null:
      if (v.kind != Value::Kind::Null) ill(at + " holds " + render(v) + " but is typed Null");
      return;
    case ValueType::Kind::Enum:
      if (v.kind != Value::Kind::Label || !T.labels.count(v.name)) ill(at + " holds " + render(v) + " but is typed " + render(T));
      return;
    case ValueType::Kind::LinkThis:
      ill(at + " typed linkthis at rest");
    case ValueType::Kind::Link: {
      auto g = r.find(T.name);
      if (v.kind != Value::Kind::Label || g == r.end() || !g->second.is_session() ||
          !unfold(g->second.sess)->is_variant() || !unfold(g->second.sess)->cases.count(v.name))
        ill(at + " holds " + render(v) + " outside the variant of " + T.name);
      return;
    }
    case ValueType::Kind::Object:
      if (v.kind != Value::Kind::Obj) ill(at + " holds " + render(v) + " but is an open object");
      agree_object(t, v.name, T, at);
      return;
    case ValueType::Kind::Session:
      break;
  }
  Session u = unfold(T.sess);
  if (v.kind == Value::Kind::Obj) {
    if (u->is_variant()) {
      std::string sel;
      for (auto& [g, gt] : r)
        if (gt.is_link() && gt.name == f) {
          const Value& lv = rec.fields.at(g);
          if (lv.kind == Value::Kind::Label) sel = lv.name;
        }
      if (sel.empty() || !u->cases.count(sel)) ill(at + " is a variant without a linked label");
      agree_object(t, v.name, ValueType::session(u->cases.at(sel)), at);
    } else {
      agree_object(t, v.name, T, at);
    }
  } else if (v.kind == Value::Kind::Endpoint) {
    auto it = theta_.find(v.endpoint_key());
    if (it == theta_.end()) ill(at + " holds untracked endpoint " + v.endpoint_key());
    if (!subtype_session(translate_channel(it->second), T.sess))
      ill(at + " endpoint " + v.endpoint_key() + " at " + render(it->second) + " is not a " + render(T));
  } else if (v.kind == Value::Kind::Access) {
    auto* a = p_.access_point(v.name);
    if (!a || !subtype_session(translate_access(a->protocol), T.sess)) ill(at + " access point " + v.name);
  } else {
    ill(at + " holds " + render(v) + " but is typed " + render(T));
  }
}

void Monitor::agree_record(const Thread& t, const ObjectRecord& rec, const Record& r, const std::string& where) const {
  if (rec.fields.size() != r.size()) ill(where + " field set differs from its typing");
  for (auto& [f, v] : rec.fields) {
    if (!r.count(f)) ill(where + " has untyped field " + f);
    agree_value(t, rec, r, f, where);
  }
}

void Monitor::agree_object(const Thread& t, const std::string& o, const ValueType& type, const std::string& where) const {
  auto it = t.heap.find(o);
  if (it == t.heap.end()) ill(where + ": " + o + " is not in the heap");
  const ObjectRecord& rec = it->second;
  if (type.is_object()) {
    if (type.name != rec.cls) ill(where + ": " + o + " is a " + rec.cls + ", typed " + type.name);
    if (type.fields->variant) ill(where + ": variant field typing at rest");
    agree_record(t, rec, type.fields->rec, where);
  } else if (type.is_session()) {
    auto h = hidden_.find(o);
    if (h == hidden_.end()) ill(where + ": " + o + " has no recorded field typing");
    if (!consistent(rec.cls, h->second, type.sess))
      ill(where + ": " + o + " with " + render(h->second) + " is not consistent with " + render(type));
    agree_record(t, rec, h->second.rec, where);
  } else {
    ill(where + ": " + o + " typed " + render(type));
  }
}

void Monitor::check_state(const Thread& t) const {
  auto eit = envs_.find(t.id);
  if (eit == envs_.end()) ill("thread " + std::to_string(t.id) + " has no environment");
  const ThreadEnv& env = eit->second;
  std::set<std::string> objs;
  for (auto& [k, ty] : env.gamma) {
    if (is_endpoint_key(k)) {
      auto th = theta_.find(k);
      if (th == theta_.end()) ill("endpoint " + k + " missing from the channel environment");
      if (!ty.is_session() || !subtype_session(translate_channel(th->second), ty.sess))
        ill("endpoint " + k + " at " + render(th->second) + " is not a " + render(ty));
      continue;
    }
    objs.insert(k);
  }
  if (objs != roots(t.heap)) ill("environment objects differ from the heap roots");
  for (auto& o : objs) agree_object(t, o, env.gamma.at(o), o);
  if (env.frames.size() != t.cur.fields.size()) ill("call frames do not match the current path " + t.cur.str());
  for (size_t i = 0; i < env.frames.size(); ++i)
    if (env.frames[i].field != t.cur.fields[i]) ill("call frames do not match the current path " + t.cur.str());
  TypingState st{env.gamma, Path{t.cur.root, {}}, std::nullopt};
  InternalContext ctx;
  ctx.frames = env.frames;
  if (env.pending) ctx.linked_label = env.pending->field;
  ctx.consistent = [this](const std::string& c, const FieldTyping& f, const Session& s) { return consistent(c, f, s); };
  try {
    infer(p_, t.expr, st, &ctx);
  } catch (const Error& e) {
    ill(e.code() + " " + e.detail() + " in " + render(t.expr));
  }
}

bool Monitor::theta_dual(std::string* why) const {
  for (auto& [k, c] : theta_) {
    if (k.back() != '+') continue;
    auto it = theta_.find(other_end(k));
    if (it == theta_.end()) continue;
    if (!equivalent(translate_channel(c), translate_channel(dual(it->second)))) {
      if (why) *why = k + " at " + render(c) + " vs " + render(it->second);
      return false;
    }
  }
  return true;
}

std::optional<Violation> Monitor::check(const Configuration& c, int step) {
  if (opts_.states) {
    for (auto& t : c.threads) {
      try {
        check_state(t);
      } catch (const Error& e) {
        return Violation{e.code(), step, t.id, e.detail()};
      }
    }
    std::string why;
    if (!theta_dual(&why)) return Violation{"DualityViolation", step, 0, why};
  }
  if (opts_.traces) {
    std::string o;
    TraceCheck tc = traces_valid(p_, traces_, c, &o);
    if (!tc.valid) {
      int tid = 0;
      for (auto& t : c.threads)
        if (t.heap.count(o)) tid = t.id;
      return Violation{"TraceInvalid", step, tid,
                       o + " at " + std::to_string(tc.position) + " (" + tc.item + ")"};
    }
  }
  return std::nullopt;
}

std::optional<Violation> Monitor::observe(const Configuration& before, const StepEvent& ev, const Configuration& after,
                                          int step) {
  if (!opts_.states) {
    // traces alone need no environments
    traces_ = extend_traces(traces_, ev);
    return check(after, step);
  }
  try {
    track(before, ev, after);
  } catch (const Error& e) {
    return Violation{"TrackingFault", step, ev.threads.empty() ? 0 : ev.threads[0], e.code() + " " + e.detail()};
  }
  return check(after, step);
}

}  // namespace mst
