#include "mst/interpreter.hpp"

#include <random>
#include <sstream>

#include "mst/render.hpp"

namespace mst {

namespace {

[[noreturn]] void fault(const std::string& detail) { throw Error("RuntimeFault", detail); }

bool has_context_child(Expr::Kind k) {
  switch (k) {
    case Expr::Kind::Swap:
    case Expr::Kind::Call:
    case Expr::Kind::SelfCall:
    case Expr::Kind::Seq:
    case Expr::Kind::Switch:
    case Expr::Kind::Return:
    case Expr::Kind::Spawn:
      return true;
    default:
      return false;
  }
}

ExprPtr plug(const ExprPtr& e, const std::vector<int>& where, size_t i, const ExprPtr& repl) {
  if (i == where.size()) return repl;
  auto copy = std::make_shared<Expr>(*e);
  copy->a = plug(e->a, where, i + 1, repl);
  return copy;
}

std::string obj_id(int n) { return "o" + std::to_string(n); }

const MethodDecl& method_of(const Program& p, const std::string& cls, const std::string& m) {
  const MethodDecl* d = p.cls_or_throw(cls).method(m);
  if (!d) fault(cls + " has no method " + m);
  return *d;
}

ExprPtr instantiate(const MethodDecl& d, const Value& v) { return substitute(d.body, d.param, value_expr(v)); }

ObjectRecord fresh_record(const ClassDecl& c) {
  ObjectRecord r{c.name, {}};
  for (auto& f : c.fields) r.fields[f] = Value::null();
  return r;
}

Value field_value(const Thread& t, const std::string& f) {
  const ObjectRecord& rec = resolve(t.heap, t.cur);
  auto it = rec.fields.find(f);
  if (it == rec.fields.end()) fault(t.cur.str() + " has no field " + f);
  return it->second;
}

bool expr_mentions(const ExprPtr& e, const std::string& chan) {
  if (!e) return false;
  if (e->kind == Expr::Kind::Endpoint && e->name == chan) return true;
  if (expr_mentions(e->a, chan) || expr_mentions(e->b, chan)) return true;
  for (auto& [l, c] : e->cases)
    if (expr_mentions(c, chan)) return true;
  return false;
}

std::map<std::string, std::string> first_visit(const Heap& h, const std::string& root, int& next_obj) {
  std::map<std::string, std::string> phi;
  std::vector<std::string> stack{root};
  while (!stack.empty()) {
    std::string o = stack.back();
    stack.pop_back();
    if (phi.count(o)) continue;
    phi[o] = obj_id(next_obj++);
    const auto& fields = h.at(o).fields;
    for (auto it = fields.rbegin(); it != fields.rend(); ++it)
      if (it->second.kind == Value::Kind::Obj && !phi.count(it->second.name)) stack.push_back(it->second.name);
  }
  return phi;
}

std::string phi_text(const std::map<std::string, std::string>& phi) {
  std::string s = "{";
  bool first = true;
  for (auto& [a, b] : phi) {
    s += (first ? "" : ",") + a + "->" + b;
    first = false;
  }
  return s + "}";
}

}  // namespace

std::string StepEvent::line(int step) const {
  std::ostringstream os;
  os << "#" << step << " " << rule << " ";
  for (size_t i = 0; i < threads.size(); ++i) os << (i ? "," : "") << "t" << threads[i];
  if (!note.empty()) os << " " << note;
  return os.str();
}

Redex find_redex(const Program& p, const Thread& t) {
  (void)p;
  Redex r;
  ExprPtr e = t.expr;
  if (e->is_value()) return r;
  while (has_context_child(e->kind) && !e->a->is_value()) {
    r.where.push_back(0);
    e = e->a;
  }
  r.node = e;
  r.kind = Redex::Kind::Local;
  if (e->kind == Expr::Kind::Var) {
    r.kind = Redex::Kind::Stuck;
  } else if (e->kind == Expr::Kind::Call) {
    Value v = field_value(t, e->name);
    switch (v.kind) {
      case Value::Kind::Obj:
        break;
      case Value::Kind::Access:
        r.name = v.name;
        if (e->method == "accept")
          r.kind = Redex::Kind::Accept;
        else if (e->method == "request")
          r.kind = Redex::Kind::Request;
        else
          r.kind = Redex::Kind::Stuck;
        break;
      case Value::Kind::Endpoint:
        r.name = v.name;
        r.polarity = v.polarity;
        if (e->method == "send")
          r.kind = Redex::Kind::Send;
        else if (e->method == "receive")
          r.kind = Redex::Kind::Receive;
        else
          r.kind = Redex::Kind::Stuck;
        break;
      default:
        r.kind = Redex::Kind::Stuck;
    }
  }
  return r;
}

Configuration initial_config(const Program& p) {
  if (!p.main) throw Error("MainMissing", "no main declaration");
  auto& [cn, mn] = *p.main;
  const ClassDecl& c = p.cls_or_throw(cn);
  const MethodDecl* d = c.method(mn);
  if (!d) throw Error("MainMissing", cn + "." + mn + " is not declared");
  Configuration conf;
  Thread t;
  t.id = 0;
  t.heap["top"] = fresh_record(c);
  t.cur = Path{"top", {}};
  t.expr = instantiate(*d, Value::null());
  conf.threads.push_back(std::move(t));
  return conf;
}

std::vector<Enabled> enabled_steps(const Program& p, const Configuration& c) {
  std::vector<Enabled> out;
  std::vector<Redex> rs;
  for (auto& t : c.threads) rs.push_back(find_redex(p, t));
  for (size_t i = 0; i < rs.size(); ++i)
    if (rs[i].kind == Redex::Kind::Local) out.push_back({i, std::nullopt});
  for (size_t i = 0; i < rs.size(); ++i)
    for (size_t j = i + 1; j < rs.size(); ++j) {
      auto a = rs[i].kind, b = rs[j].kind;
      if (rs[i].name != rs[j].name) continue;
      bool init = (a == Redex::Kind::Accept && b == Redex::Kind::Request) ||
                  (a == Redex::Kind::Request && b == Redex::Kind::Accept);
      bool com = ((a == Redex::Kind::Send && b == Redex::Kind::Receive) ||
                  (a == Redex::Kind::Receive && b == Redex::Kind::Send)) &&
                 rs[i].polarity != rs[j].polarity;
      if (init || com) out.push_back({i, j});
    }
  return out;
}

namespace {

std::pair<Configuration, StepEvent> local_step(const Program& p, Configuration c, size_t i) {
  Thread& t = c.threads[i];
  Redex r = find_redex(p, t);
  const ExprPtr& e = r.node;
  StepEvent ev;
  ev.threads = {t.id};
  ev.index = {i};
  ExprPtr repl;
  switch (e->kind) {
    case Expr::Kind::New: {
      const ClassDecl& cd = p.cls_or_throw(e->name);
      std::string o = obj_id(c.next_obj++);
      t.heap[o] = fresh_record(cd);
      ev.rule = "New";
      ev.obj = o;
      ev.cls = cd.name;
      ev.note = o + " " + cd.name;
      repl = ex::obj(o);
      break;
    }
    case Expr::Kind::Swap: {
      Value v = expr_value(e->a);
      Value old = field_value(t, e->name);
      t.heap = write(t.heap, t.cur, e->name, v);
      ev.rule = "Swap";
      ev.field = e->name;
      ev.value = v;
      ev.old = old;
      ev.note = t.cur.str() + "." + e->name + " := " + render(v) + " (was " + render(old) + ")";
      repl = value_expr(old);
      break;
    }
    case Expr::Kind::Call: {
      Value target = field_value(t, e->name);
      const ObjectRecord& callee = t.heap.at(target.name);
      Value arg = expr_value(e->a);
      const MethodDecl& d = method_of(p, callee.cls, e->method);
      ev.rule = "Call";
      ev.field = e->name;
      ev.method = e->method;
      ev.cls = callee.cls;
      ev.obj = target.name;
      ev.value = arg;
      ev.note = t.cur.str() + "." + e->name + "." + e->method + "(" + render(arg) + ") on " + target.name;
      repl = ex::ret(instantiate(d, arg));
      t.cur = t.cur.child(e->name);
      break;
    }
    case Expr::Kind::SelfCall: {
      Value arg = expr_value(e->a);
      const MethodDecl& d = method_of(p, resolve(t.heap, t.cur).cls, e->name);
      ev.rule = "SelfCall";
      ev.method = e->name;
      ev.value = arg;
      ev.note = e->name + "(" + render(arg) + ")";
      repl = instantiate(d, arg);
      break;
    }
    case Expr::Kind::Seq:
      ev.rule = "Seq";
      repl = e->b;
      break;
    case Expr::Kind::Switch: {
      Value v = expr_value(e->a);
      if (v.kind != Value::Kind::Label) fault("switch on " + render(v));
      for (auto& [l, b] : e->cases)
        if (l == v.name) repl = b;
      if (!repl) fault("switch has no case " + v.name);
      ev.rule = "Switch";
      ev.value = v;
      ev.note = v.name;
      break;
    }
    case Expr::Kind::While:
      ev.rule = "While";
      repl = ex::sw(e->a, {{"TRUE", ex::seq(e->b, e)}, {"FALSE", ex::null()}});
      break;
    case Expr::Kind::Return: {
      if (t.cur.fields.empty()) fault("return at the thread root");
      Value v = expr_value(e->a);
      ev.rule = "Return";
      ev.value = v;
      ev.field = t.cur.last();
      ev.obj = resolve(t.heap, t.cur.parent()).fields.at(t.cur.last()).name;
      ev.cls = t.heap.at(ev.obj).cls;
      ev.note = render(v);
      repl = e->a;
      t.cur = t.cur.parent();
      break;
    }
    case Expr::Kind::Spawn: {
      const ClassDecl& cd = p.cls_or_throw(e->name);
      const MethodDecl& d = method_of(p, cd.name, e->method);
      Thread nt;
      nt.id = c.next_thread++;
      std::string o = obj_id(c.next_obj++);
      nt.heap[o] = fresh_record(cd);
      nt.cur = Path{o, {}};
      nt.expr = instantiate(d, Value::null());
      ev.rule = "Spawn";
      ev.cls = cd.name;
      ev.method = e->method;
      ev.obj = o;
      ev.new_thread = nt.id;
      ev.note = cd.name + "." + e->method + " " + o + " t" + std::to_string(nt.id);
      repl = ex::null();
      t.expr = plug(t.expr, r.where, 0, repl);
      c.threads.push_back(std::move(nt));
      return {std::move(c), std::move(ev)};
    }
    default:
      fault("no local step for " + render(e));
  }
  t.expr = plug(t.expr, r.where, 0, repl);
  return {std::move(c), std::move(ev)};
}

std::pair<Configuration, StepEvent> rendezvous(const Program& p, Configuration c, size_t i, size_t j) {
  Redex ri = find_redex(p, c.threads[i]), rj = find_redex(p, c.threads[j]);
  // order: accepting / sending side first
  if (ri.kind == Redex::Kind::Request || ri.kind == Redex::Kind::Receive) {
    std::swap(i, j);
    std::swap(ri, rj);
  }
  Thread& a = c.threads[i];
  Thread& b = c.threads[j];
  StepEvent ev;
  ev.threads = {a.id, b.id};
  ev.index = {i, j};
  ev.field = ri.node->name;
  ev.field2 = rj.node->name;
  if (ri.kind == Redex::Kind::Accept) {
    std::string ch = "c" + std::to_string(c.next_chan++);
    c.channels.insert(ch);
    ev.rule = "Init";
    ev.chan = ch;
    ev.access = ri.name;
    ev.note = ri.name + " " + ch;
    a.expr = plug(a.expr, ri.where, 0, ex::endpoint(ch, '+'));
    b.expr = plug(b.expr, rj.where, 0, ex::endpoint(ch, '-'));
    return {std::move(c), std::move(ev)};
  }
  Value v = expr_value(ri.node->a);
  ev.chan = ri.name;
  ev.value = v;
  if (v.kind == Value::Kind::Obj) {
    auto [down, up] = split_heap(a.heap, v.name);
    auto phi = first_visit(down, v.name, c.next_obj);
    a.heap = up;
    b.heap = heap_union(b.heap, rename_heap(down, phi));
    ev.rule = "ComObj";
    ev.obj = v.name;
    ev.phi = phi;
    ev.note = ri.name + " " + v.name + " " + phi_text(phi);
    a.expr = plug(a.expr, ri.where, 0, ex::null());
    b.expr = plug(b.expr, rj.where, 0, ex::obj(phi.at(v.name)));
  } else {
    ev.rule = "ComBase";
    ev.note = ri.name + " " + render(v);
    a.expr = plug(a.expr, ri.where, 0, ex::null());
    b.expr = plug(b.expr, rj.where, 0, value_expr(v));
  }
  return {std::move(c), std::move(ev)};
}

}  // namespace

std::pair<Configuration, StepEvent> apply_step(const Program& p, const Configuration& c, const Enabled& s) {
  if (s.j) return rendezvous(p, c, s.i, *s.j);
  return local_step(p, c, s.i);
}

std::optional<std::pair<Configuration, StepEvent>> step(const Program& p, const Configuration& c) {
  auto en = enabled_steps(p, c);
  if (en.empty()) return std::nullopt;
  return apply_step(p, c, en.front());
}

bool mentions_channel(const Thread& t, const std::string& chan) {
  for (auto& [o, rec] : t.heap)
    for (auto& [f, v] : rec.fields)
      if (v.kind == Value::Kind::Endpoint && v.name == chan) return true;
  return expr_mentions(t.expr, chan);
}

bool rendezvous_sound(const Configuration& before, const StepEvent& ev) {
  if (ev.rule == "Init") return !before.channels.count(ev.chan);
  if (ev.rule != "ComBase" && ev.rule != "ComObj") return true;
  const Thread& a = before.threads[ev.index[0]];
  const Thread& b = before.threads[ev.index[1]];
  Value va = field_value(a, ev.field), vb = field_value(b, ev.field2);
  if (va.kind != Value::Kind::Endpoint || vb.kind != Value::Kind::Endpoint) return false;
  if (va.name != ev.chan || vb.name != ev.chan || va.polarity == vb.polarity) return false;
  for (size_t k = 0; k < before.threads.size(); ++k)
    if (k != ev.index[0] && k != ev.index[1] && mentions_channel(before.threads[k], ev.chan)) return false;
  return true;
}

Outcome classify(const Program& p, const Configuration& c) {
  Outcome o;
  bool all_done = true;
  for (auto& t : c.threads) {
    Redex r = find_redex(p, t);
    ThreadStatus s{t.id, "terminated", ""};
    switch (r.kind) {
      case Redex::Kind::None:
        break;
      case Redex::Kind::Accept:
        s.status = "unmatched-accept";
        s.channel = r.name;
        break;
      case Redex::Kind::Request:
        s.status = "unmatched-request";
        s.channel = r.name;
        break;
      case Redex::Kind::Send:
      case Redex::Kind::Receive:
        s.status = "deadlocked-on-channel";
        s.channel = r.name;
        break;
      default:
        s.status = "stuck";
    }
    if (s.status != "terminated") all_done = false;
    o.threads.push_back(s);
  }
  if (all_done) {
    o.kind = Outcome::Kind::AllTerminated;
    for (auto& t : c.threads) o.values.push_back(expr_value(t.expr));
    o.threads.clear();
  } else {
    o.kind = Outcome::Kind::Blocked;
  }
  return o;
}

std::string Outcome::render() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::AllTerminated:
      os << "TERMINATED";
      for (auto& v : values) os << " " << mst::render(v);
      break;
    case Kind::Blocked:
      os << "BLOCKED";
      for (auto& t : threads) {
        os << " t" << t.thread << ":" << t.status;
        if (!t.channel.empty()) os << "(" << t.channel << ")";
      }
      break;
    case Kind::StepLimit:
      os << "STEP-LIMIT";
      break;
    case Kind::Violation:
      os << "VIOLATION";
      break;
  }
  return os.str();
}

int Outcome::exit_code() const {
  switch (kind) {
    case Kind::AllTerminated: return 0;
    case Kind::Blocked: return 2;
    case Kind::StepLimit: return 3;
    case Kind::Violation: return 4;
  }
  return 1;
}

RunResult run_from(const Program& p, Configuration c, const RunOptions& opts, const StepObserver& observer) {
  RunResult res;
  std::optional<std::mt19937_64> rng;
  if (opts.seed) rng.emplace(*opts.seed);
  while (true) {
    auto en = enabled_steps(p, c);
    if (en.empty()) {
      res.outcome = classify(p, c);
      break;
    }
    if (res.steps >= opts.limit) {
      res.outcome.kind = Outcome::Kind::StepLimit;
      break;
    }
    size_t pick = 0;
    if (rng) pick = std::uniform_int_distribution<size_t>(0, en.size() - 1)(*rng);
    auto [next, ev] = apply_step(p, c, en[pick]);
    ++res.steps;
    if (ev.rule == "ComBase" || ev.rule == "ComObj" || ev.rule == "Init") {
      ++res.rendezvous;
      if (!rendezvous_sound(c, ev)) ++res.rendezvous_failures;
    }
    res.log.push_back(ev.line(res.steps));
    bool keep = !observer || observer(c, ev, next, res.steps);
    c = std::move(next);
    if (!keep) {
      res.outcome.kind = Outcome::Kind::Violation;
      break;
    }
  }
  res.final = std::move(c);
  return res;
}

RunResult run(const Program& p, const RunOptions& opts, const StepObserver& observer) {
  return run_from(p, initial_config(p), opts, observer);
}

}  // namespace mst
