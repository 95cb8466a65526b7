#include "mst/subtyping.hpp"

#include <algorithm>

namespace mst {

namespace {

class Subtyper {
 public:
  bool sess(const Session& a, const Session& b) {
    auto k = std::make_pair(key(a), key(b));
    if (assumed_.count(k)) return true;
    assumed_.insert(k);
    Session ua = unfold(a), ub = unfold(b);
    if (ua->is_branch() && ub->is_branch()) {
      for (auto& sup : ub->methods) {
        const MethodEntry* sub = match(*ua, sup);
        if (!sub || !signature(*sub, sup)) return false;
      }
      return true;
    }
    if (ua->is_variant() && ub->is_variant()) {
      for (auto& [l, s] : ua->cases) {
        auto it = ub->cases.find(l);
        if (it == ub->cases.end() || !sess(s, it->second)) return false;
      }
      return true;
    }
    return false;
  }

  bool value(const ValueType& a, const ValueType& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case ValueType::Kind::Null:
      case ValueType::Kind::LinkThis:
        return true;
      case ValueType::Kind::Link:
        return a.name == b.name;
      case ValueType::Kind::Enum:
        return std::includes(b.labels.begin(), b.labels.end(), a.labels.begin(), a.labels.end());
      case ValueType::Kind::Session:
        return sess(a.sess, b.sess);
      case ValueType::Kind::Object:
        return a.name == b.name && field(*a.fields, *b.fields);
    }
    return false;
  }

  bool record(const Record& a, const Record& b) {
    if (a.size() != b.size()) return false;
    for (auto& [f, t] : a) {
      auto it = b.find(f);
      if (it == b.end() || !value(t, it->second)) return false;
    }
    return true;
  }

  bool field(const FieldTyping& a, const FieldTyping& b) {
    if (a.variant != b.variant) return false;
    if (!a.variant) return record(a.rec, b.rec);
    for (auto& [l, r] : a.cases) {
      auto it = b.cases.find(l);
      if (it == b.cases.end() || !record(r, it->second)) return false;
    }
    return true;
  }

 private:
  std::set<std::pair<std::string, std::string>> assumed_;

  // speculative check: assumptions made by a failed attempt are discarded
  template <typename F>
  bool attempt(F&& f) {
    auto saved = assumed_;
    bool ok = f();
    if (!ok) assumed_ = std::move(saved);
    return ok;
  }

  // the subtype entry answering a supertype entry: same name, contravariant
  // parameter, most specific parameter when several qualify
  const MethodEntry* match(const SessionType& sub, const MethodEntry& sup) {
    std::vector<const MethodEntry*> cands;
    for (auto& e : sub.methods)
      if (e.name == sup.name && attempt([&] { return value(sup.param, e.param); })) cands.push_back(&e);
    if (cands.empty()) return nullptr;
    if (cands.size() == 1) return cands[0];
    const MethodEntry* best = nullptr;
    for (auto* c : cands) {
      bool least = true;
      for (auto* d : cands)
        if (c != d && !attempt([&] { return value(c->param, d->param); })) least = false;
      if (least) {
        if (best) return nullptr;
        best = c;
      }
    }
    return best;
  }

  bool signature(const MethodEntry& sub, const MethodEntry& sup) {
    if (attempt([&] { return value(sub.result, sup.result) && sess(sub.cont, sup.cont); })) return true;
    if (sub.result.is_enum() && sup.result.is_linkthis()) {
      std::map<std::string, Session> cases;
      for (auto& l : sub.result.labels) cases[l] = sub.cont;
      return attempt([&] { return sess(SessionType::variant(std::move(cases)), sup.cont); });
    }
    return false;
  }
};

[[noreturn]] void undefined(const std::string& what) { throw Error("JoinUndefined", what); }

class Joiner {
 public:
  Session sess(const Session& a, const Session& b) {
    auto k = std::make_pair(key(a), key(b));
    auto it = active_.find(k);
    if (it != active_.end()) {
      it->second.second = true;
      return SessionType::variable(it->second.first);
    }
    if (equivalent(a, b)) return a;
    std::string var = "J" + std::to_string(counter_++);
    active_[k] = {var, false};
    Session ua = unfold(a), ub = unfold(b);
    Session out;
    try {
      out = structural(ua, ub);
    } catch (...) {
      active_.erase(k);
      throw;
    }
    bool used = active_[k].second;
    active_.erase(k);
    return used ? SessionType::rec(var, out) : out;
  }

  ValueType value(const ValueType& a, const ValueType& b) {
    if (a.is_enum() && b.is_enum()) {
      LabelSet u = a.labels;
      u.insert(b.labels.begin(), b.labels.end());
      return ValueType::enumeration(std::move(u));
    }
    if (a.is_session() && b.is_session()) return ValueType::session(sess(a.sess, b.sess));
    if (a.is_object() && b.is_object() && a.name == b.name)
      return ValueType::object(a.name, field(*a.fields, *b.fields));
    if (a.kind == b.kind && (a.is_null() || a.is_linkthis() || (a.is_link() && a.name == b.name))) return a;
    undefined(key(a) + " with " + key(b));
  }

  Record record(const Record& a, const Record& b) {
    if (a.size() != b.size()) undefined("records over different fields");
    Record out;
    for (auto& [f, t] : a) {
      auto it = b.find(f);
      if (it == b.end()) undefined("records over different fields");
      out[f] = value(t, it->second);
    }
    return out;
  }

  FieldTyping field(const FieldTyping& a, const FieldTyping& b) {
    if (a.variant != b.variant) undefined("record with variant field typing");
    if (!a.variant) return FieldTyping::record(record(a.rec, b.rec));
    std::map<std::string, Record> cases = a.cases;
    for (auto& [l, r] : b.cases) {
      auto it = cases.find(l);
      if (it == cases.end())
        cases[l] = r;
      else
        it->second = record(it->second, r);
    }
    return FieldTyping::make_variant(std::move(cases));
  }

 private:
  std::map<std::pair<std::string, std::string>, std::pair<std::string, bool>> active_;
  int counter_ = 0;

  Session structural(const Session& a, const Session& b) {
    if (a->is_branch() && b->is_branch()) {
      std::vector<MethodEntry> out;
      std::set<std::string> seen;
      for (auto& e : a->methods)
        for (auto& e2 : b->methods) {
          if (e.name != e2.name) continue;
          auto p = meet_param(e.param, e2.param);
          if (!p) continue;
          try {
            ValueType r = value(e.result, e2.result);
            Session c = sess(e.cont, e2.cont);
            if (seen.insert(e.name + "(" + key(*p) + ")").second) out.push_back({e.name, *p, r, c});
          } catch (const Error& err) {
            if (err.code() != "JoinUndefined") throw;
            // incompatible signatures: the method is left out of the upper bound
          }
        }
      return SessionType::branch(std::move(out));
    }
    if (a->is_variant() && b->is_variant()) {
      std::map<std::string, Session> cases = a->cases;
      for (auto& [l, s] : b->cases) {
        auto it = cases.find(l);
        if (it == cases.end())
          cases[l] = s;
        else
          it->second = sess(it->second, s);
      }
      return SessionType::variant(std::move(cases));
    }
    undefined("branch with variant");
  }
};

}  // namespace

bool subtype_session(const Session& a, const Session& b) { return Subtyper().sess(a, b); }
bool subtype_value(const ValueType& a, const ValueType& b) { return Subtyper().value(a, b); }
bool subtype_field(const FieldTyping& a, const FieldTyping& b) { return Subtyper().field(a, b); }

bool equivalent(const Session& a, const Session& b) { return subtype_session(a, b) && subtype_session(b, a); }
bool equivalent(const ValueType& a, const ValueType& b) { return subtype_value(a, b) && subtype_value(b, a); }
bool equivalent(const FieldTyping& a, const FieldTyping& b) { return subtype_field(a, b) && subtype_field(b, a); }

Session join_session(const Session& a, const Session& b) { return Joiner().sess(a, b); }
ValueType join_value(const ValueType& a, const ValueType& b) { return Joiner().value(a, b); }
FieldTyping join_field(const FieldTyping& a, const FieldTyping& b) { return Joiner().field(a, b); }

FieldTyping collapse(const FieldTyping& f) {
  if (!f.variant) return f;
  if (f.cases.empty()) throw Error("JoinUndefined", "empty variant");
  Joiner j;
  Record acc = f.cases.begin()->second;
  for (auto it = std::next(f.cases.begin()); it != f.cases.end(); ++it) acc = j.record(acc, it->second);
  return FieldTyping::record(std::move(acc));
}

std::optional<ValueType> meet_param(const ValueType& a, const ValueType& b) {
  if (a.is_enum() && b.is_enum()) {
    LabelSet i;
    std::set_intersection(a.labels.begin(), a.labels.end(), b.labels.begin(), b.labels.end(),
                          std::inserter(i, i.begin()));
    if (i.empty()) return std::nullopt;
    return ValueType::enumeration(std::move(i));
  }
  if (equivalent(a, b)) return a;
  return std::nullopt;
}

}  // namespace mst
