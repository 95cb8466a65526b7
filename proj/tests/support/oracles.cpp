#include "oracles.hpp"

#include <deque>
#include <map>
#include <set>

#include "mst/subtyping.hpp"

namespace mst::testing {

// ---------------------------------------------------------------- channel subtyping

namespace {

struct ChanSub {
  std::set<std::pair<std::string, std::string>> assumed;

  static bool value(const ValueType& a, const ValueType& b) {
    if (a.is_null() || b.is_null()) return a.is_null() && b.is_null();
    if (a.is_enum() && b.is_enum())
      return std::includes(b.labels.begin(), b.labels.end(), a.labels.begin(), a.labels.end());
    if (a.is_session() && b.is_session()) return key(a) == key(b);
    return false;
  }

  bool payload(const Payload& a, const Payload& b) {
    if (a.is_channel != b.is_channel) return false;
    if (a.is_channel) return sub(a.chan, b.chan);
    return value(a.type, b.type);
  }

  bool sub(const Channel& a0, const Channel& b0) {
    if (!assumed.insert({key(a0), key(b0)}).second) return true;
    Channel a = unfold(a0), b = unfold(b0);
    using K = ChannelType::Kind;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
      case K::End:
        return true;
      case K::Recv:
        return payload(a->payload, b->payload) && sub(a->cont, b->cont);
      case K::Send:
        return payload(b->payload, a->payload) && sub(a->cont, b->cont);
      case K::Offer:
        for (auto& [l, s] : a->cases) {
          auto it = b->cases.find(l);
          if (it == b->cases.end() || !sub(s, it->second)) return false;
        }
        return true;
      case K::Select:
        for (auto& [l, s] : b->cases) {
          auto it = a->cases.find(l);
          if (it == a->cases.end() || !sub(it->second, s)) return false;
        }
        return true;
      default:
        return false;
    }
  }
};

}  // namespace

bool oracle_channel_subtype(const Channel& a, const Channel& b) {
  ChanSub s;
  return s.sub(a, b);
}

// ---------------------------------------------------------------- LTS

Lts build_lts(const Session& s) {
  Lts g;
  std::map<std::string, size_t> index;
  auto add = [&](const Session& t) {
    Session u = unfold(t);
    std::string k = key(u);
    auto it = index.find(k);
    if (it != index.end()) return it->second;
    size_t i = g.states.size();
    index[k] = i;
    g.states.push_back(u);
    g.edges.emplace_back();
    g.variant.push_back(u->is_variant());
    return i;
  };
  add(s);
  for (size_t i = 0; i < g.states.size(); ++i) {
    Session u = g.states[i];
    if (u->is_branch()) {
      for (auto& e : u->methods) {
        size_t j = add(e.cont);
        g.edges[i].push_back({"m:" + e.name, j});
      }
    } else if (u->is_variant()) {
      for (auto& [l, c] : u->cases) {
        size_t j = add(c);
        g.edges[i].push_back({"l:" + l, j});
      }
    }
  }
  return g;
}

std::optional<size_t> oracle_trace_error(const Session& s, const std::vector<std::pair<bool, std::string>>& trace) {
  Lts g = build_lts(s);
  std::set<size_t> cur = {0};
  for (size_t i = 0; i < trace.size(); ++i) {
    auto& [is_label, name] = trace[i];
    std::string item = (is_label ? "l:" : "m:") + name;
    std::set<size_t> next;
    for (size_t st : cur) {
      if (is_label && !g.variant[st]) next.insert(st);
      for (auto& [a, j] : g.edges[st])
        if (a == item) next.insert(j);
    }
    if (next.empty()) return i + 1;
    cur = std::move(next);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- declarative typing

namespace {

using Param = std::optional<std::pair<std::string, ValueType>>;

struct Typer {
  const Program& p;
  const ClassDecl& c;

  std::vector<Derivation> derive(const ExprPtr& e, const FieldTyping& f, const Param& v) {
    std::vector<Derivation> out;
    using K = Expr::Kind;
    bool rec = !f.variant;
    switch (e->kind) {
      case K::Null:
        out.push_back({ValueType::null(), f, v});
        break;
      case K::Label:
        if (!rec) break;
        out.push_back({ValueType::enumeration({e->name}), f, v});
        out.push_back({ValueType::linkthis(), FieldTyping::make_variant({{e->name, f.rec}}), v});
        break;
      case K::Var:
        if (v && v->first == e->name) {
          Param rest = v;
          if (v->second.linear()) rest.reset();
          out.push_back({v->second, f, rest});
        }
        break;
      case K::New:
        if (auto* k = p.cls(e->name)) out.push_back({ValueType::session(k->session), f, v});
        break;
      case K::Swap:
        for (auto& d : derive(e->a, f, v)) {
          if (d.fields.variant || d.type.is_linkthis()) continue;
          auto it = d.fields.rec.find(e->name);
          if (it == d.fields.rec.end()) continue;
          ValueType old = it->second;
          if (old.is_session() && unfold(old.sess)->is_variant()) continue;
          out.push_back({old, with_field(d.fields, e->name, d.type), d.param});
        }
        break;
      case K::Call:
        for (auto& d : derive(e->a, f, v)) {
          if (d.fields.variant || d.type.is_linkthis() || d.type.is_link()) continue;
          auto it = d.fields.rec.find(e->name);
          if (it == d.fields.rec.end() || !it->second.is_session()) continue;
          Session u = unfold(it->second.sess);
          if (!u->is_branch()) continue;
          for (auto& m : u->methods) {
            if (m.name != e->method || !subtype_value(d.type, m.param)) continue;
            ValueType r = m.result.is_linkthis() ? ValueType::link(e->name) : m.result;
            out.push_back({r, with_field(d.fields, e->name, ValueType::session(m.cont)), d.param});
          }
        }
        break;
      case K::SelfCall: {
        const MethodDecl* md = c.method(e->name);
        if (!md || !md->annot) break;
        for (auto& d : derive(e->a, f, v)) {
          if (d.type.is_linkthis() || d.type.is_link()) continue;
          if (!subtype_value(d.type, md->annot->param) || !subtype_field(d.fields, md->annot->req)) continue;
          out.push_back({md->annot->result, md->annot->ens, d.param});
        }
        break;
      }
      case K::Seq:
        for (auto& d : derive(e->a, f, v)) {
          if (d.type.is_link() || d.fields.variant) continue;
          for (auto& d2 : derive(e->b, d.fields, d.param)) out.push_back(d2);
        }
        break;
      case K::Switch:
        for (auto& d : derive(e->a, f, v)) switch_cases(e, d, out);
        break;
      default:
        break;
    }
    return out;
  }

  void switch_cases(const ExprPtr& e, const Derivation& d, std::vector<Derivation>& out) {
    std::map<std::string, FieldTyping> start;
    if (d.type.is_enum() && !d.fields.variant) {
      for (auto& l : d.type.labels) start[l] = d.fields;
    } else if (d.type.is_link() && !d.fields.variant) {
      auto it = d.fields.rec.find(d.type.name);
      if (it == d.fields.rec.end() || !it->second.is_session()) return;
      Session u = unfold(it->second.sess);
      if (!u->is_variant()) return;
      for (auto& [l, s] : u->cases) start[l] = with_field(d.fields, d.type.name, ValueType::session(s));
    } else if (d.type.is_linkthis() && d.fields.variant) {
      for (auto& [l, r] : d.fields.cases) start[l] = FieldTyping::record(r);
    } else {
      return;
    }
    std::vector<std::vector<Derivation>> arms;
    for (auto& [l, fl] : start) {
      const ExprPtr* body = nullptr;
      for (auto& [cl, ce] : e->cases)
        if (cl == l) body = &ce;
      if (!body) return;
      arms.push_back(derive(*body, fl, d.param));
      if (arms.back().empty()) return;
    }
    // every choice of one derivation per arm, joined
    std::vector<size_t> pick(arms.size(), 0);
    for (int guard = 0; guard < 4096; ++guard) {
      try {
        ValueType t = arms[0][pick[0]].type;
        FieldTyping fj = arms[0][pick[0]].fields;
        bool same_param = true;
        for (size_t i = 1; i < arms.size(); ++i) {
          const Derivation& a = arms[i][pick[i]];
          t = join_value(t, a.type);
          fj = join_field(fj, a.fields);
          same_param = same_param && a.param.has_value() == arms[0][pick[0]].param.has_value();
        }
        if (same_param) out.push_back({t, fj, arms[0][pick[0]].param});
      } catch (const Error&) {
      }
      size_t i = 0;
      while (i < arms.size() && ++pick[i] == arms[i].size()) pick[i++] = 0;
      if (i == arms.size()) break;
    }
  }
};

}  // namespace

std::vector<Derivation> oracle_derive(const Program& p, const std::string& cls, const ExprPtr& e, const FieldTyping& f,
                                      const std::optional<std::pair<std::string, ValueType>>& param) {
  Typer t{p, p.cls_or_throw(cls)};
  return t.derive(e, f, param);
}

// ---------------------------------------------------------------- consistency

namespace {

// A pair is consistent when every obligation has an alternative whose target
// pair is covered by some retained candidate.
struct Obligations {
  bool shape_ok = true;
  std::vector<std::vector<std::pair<FieldTyping, Session>>> any_of;
};

struct Search {
  const Program& p;
  const ClassDecl& c;
  std::vector<std::pair<FieldTyping, Session>> pairs;
  std::map<std::string, size_t> index;
  std::vector<Obligations> obls;

  size_t add(const FieldTyping& f, const Session& s) {
    Session u = unfold(s);
    std::string k = key(f) + "|" + key(u);
    auto it = index.find(k);
    if (it != index.end()) return it->second;
    index[k] = pairs.size();
    pairs.push_back({f, u});
    return pairs.size() - 1;
  }

  Obligations obligations(const FieldTyping& f, const Session& s) {
    Obligations o;
    if (s->is_variant()) {
      if (!f.variant) {
        o.shape_ok = false;
        return o;
      }
      for (auto& [l, r] : f.cases) {
        auto it = s->cases.find(l);
        if (it == s->cases.end()) {
          o.shape_ok = false;
          return o;
        }
        o.any_of.push_back({{FieldTyping::record(r), it->second}});
      }
      return o;
    }
    if (f.variant) {
      o.shape_ok = false;
      return o;
    }
    Typer t{p, c};
    for (auto& m : s->methods) {
      std::vector<std::pair<FieldTyping, Session>> alts;
      const MethodDecl* md = c.method(m.name);
      if (md) {
        Session cont = unfold(m.cont);
        for (auto& d : t.derive(md->body, f, std::make_pair(md->param, m.param))) {
          if (m.result.is_linkthis()) {
            if (!cont->is_variant()) continue;
            LabelSet vl;
            for (auto& [l, x] : cont->cases) vl.insert(l);
            if (d.type.is_enum() && !d.fields.variant &&
                std::includes(vl.begin(), vl.end(), d.type.labels.begin(), d.type.labels.end())) {
              std::map<std::string, Record> cs;
              for (auto& l : d.type.labels) cs[l] = d.fields.rec;
              alts.push_back({FieldTyping::make_variant(cs), cont});
            } else if (d.type.is_linkthis() && d.fields.variant) {
              LabelSet fl = d.fields.labels();
              if (std::includes(vl.begin(), vl.end(), fl.begin(), fl.end())) alts.push_back({d.fields, cont});
            }
          } else if (d.type.is_linkthis() && d.fields.variant) {
            LabelSet fl = d.fields.labels();
            if (m.result.is_enum() && std::includes(m.result.labels.begin(), m.result.labels.end(), fl.begin(), fl.end())) {
              try {
                alts.push_back({collapse(d.fields), cont});
              } catch (const Error&) {
              }
            }
          } else if (!d.type.is_link() && !d.type.is_linkthis() && !d.fields.variant && subtype_value(d.type, m.result)) {
            alts.push_back({d.fields, cont});
          }
        }
      }
      o.any_of.push_back(std::move(alts));
    }
    return o;
  }

  bool explore(size_t cap) {
    for (size_t i = 0; i < pairs.size(); ++i) {
      if (pairs.size() > cap) return false;
      Obligations o = obligations(pairs[i].first, pairs[i].second);
      for (auto& alts : o.any_of)
        for (auto& [f, s] : alts) add(f, s);
      obls.push_back(std::move(o));
    }
    return true;
  }

  // candidates j covering the required pair (f, s): same state, f <: F_j
  std::vector<std::vector<std::vector<std::vector<size_t>>>> cover;

  void build_cover() {
    cover.resize(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
      for (auto& alts : obls[i].any_of) {
        std::vector<std::vector<size_t>> per_alt;
        for (auto& [f, s] : alts) {
          std::string sk = key(unfold(s));
          std::vector<size_t> js;
          for (size_t j = 0; j < pairs.size(); ++j)
            if (key(pairs[j].second) == sk && subtype_field(f, pairs[j].first)) js.push_back(j);
          per_alt.push_back(std::move(js));
        }
        cover[i].push_back(std::move(per_alt));
      }
    }
  }

  bool satisfied(size_t i, const std::vector<bool>& r) const {
    if (!obls[i].shape_ok) return false;
    for (auto& per_alt : cover[i]) {
      bool any = false;
      for (auto& js : per_alt) {
        for (size_t j : js)
          if (r[j]) {
            any = true;
            break;
          }
        if (any) break;
      }
      if (!any) return false;
    }
    return true;
  }
};

}  // namespace

std::optional<bool> ConsistencySearch::holds(const FieldTyping& f, const Session& s) const {
  std::string k = key(f) + "|" + key(unfold(s));
  for (size_t i = 0; i < candidates.size(); ++i)
    if (key(candidates[i].first) + "|" + key(candidates[i].second) == k) return in_gfp[i];
  return std::nullopt;
}

ConsistencySearch oracle_consistency(const Program& p, const std::string& cls, size_t cap) {
  const ClassDecl& c = p.cls_or_throw(cls);
  Search s{p, c, {}, {}, {}, {}};
  s.add(c.null_fields(), c.session);
  ConsistencySearch out;
  out.exhausted = !s.explore(cap);
  if (out.exhausted) return out;
  s.build_cover();
  std::vector<bool> r(s.pairs.size(), true);
  for (bool changed = true; changed;) {
    changed = false;
    for (size_t i = 0; i < r.size(); ++i)
      if (r[i] && !s.satisfied(i, r)) {
        r[i] = false;
        changed = true;
      }
  }
  out.candidates = s.pairs;
  out.in_gfp = r;
  return out;
}

std::vector<bool> oracle_consistency_subsets(const Program& p, const std::string& cls, const ConsistencySearch& base) {
  const ClassDecl& c = p.cls_or_throw(cls);
  Search s{p, c, {}, {}, {}, {}};
  for (auto& [f, st] : base.candidates) s.add(f, st);
  s.explore(base.candidates.size());
  s.build_cover();
  size_t n = s.pairs.size();
  if (n > 20) throw std::runtime_error("candidate set too large for subset enumeration");
  std::vector<bool> uni(n, false);
  for (uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<bool> r(n);
    for (size_t i = 0; i < n; ++i) r[i] = (mask >> i) & 1u;
    bool ok = true;
    for (size_t i = 0; i < n && ok; ++i)
      if (r[i] && !s.satisfied(i, r)) ok = false;
    if (!ok) continue;
    for (size_t i = 0; i < n; ++i)
      if (r[i]) uni[i] = true;
  }
  return uni;
}

}  // namespace mst::testing
