#include "generators.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace mst::testing {

namespace {

const std::vector<std::string> kPayloadLabels = {"A", "B", "C"};
const std::vector<std::string> kChoiceLabels = {"L1", "L2", "L3"};
const std::vector<std::string> kMethods = {"m", "n", "p"};

int pick(Rng& rng, int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

LabelSet random_labels(Rng& rng, const std::vector<std::string>& pool) {
  LabelSet s;
  for (auto& l : pool)
    if (coin(rng)) s.insert(l);
  if (s.empty()) s.insert(pool[pick(rng, static_cast<int>(pool.size()))]);
  return s;
}

// Variables bound since the last prefix are unguarded; only guarded ones may be used.
struct Scope {
  std::vector<std::string> guarded;
  std::vector<std::string> unguarded;
  int next = 0;

  Scope after_prefix() const {
    Scope s = *this;
    s.guarded.insert(s.guarded.end(), s.unguarded.begin(), s.unguarded.end());
    s.unguarded.clear();
    return s;
  }
};

Channel gen_channel(Rng& rng, int depth, Scope sc);

Payload gen_payload(Rng& rng, int depth) {
  int k = pick(rng, 6);
  if (k == 0) return value_payload(ValueType::null());
  if (k == 1 && depth > 1) return channel_payload(gen_channel(rng, std::min(depth - 1, 2), Scope{}));
  return value_payload(ValueType::enumeration(random_labels(rng, kPayloadLabels)));
}

Channel gen_channel(Rng& rng, int depth, Scope sc) {
  if (depth <= 1) {
    if (!sc.guarded.empty() && coin(rng)) return ChannelType::variable(sc.guarded[pick(rng, static_cast<int>(sc.guarded.size()))]);
    return ChannelType::end();
  }
  int k = pick(rng, 7);
  switch (k) {
    case 0:
      return ChannelType::end();
    case 1:
      if (!sc.guarded.empty()) return ChannelType::variable(sc.guarded[pick(rng, static_cast<int>(sc.guarded.size()))]);
      [[fallthrough]];
    case 2: {
      std::string x = "X" + std::to_string(sc.next++);
      Scope in = sc;
      in.unguarded.push_back(x);
      return ChannelType::rec(x, gen_channel(rng, depth - 1, in));
    }
    case 3:
      return ChannelType::recv(gen_payload(rng, depth), gen_channel(rng, depth - 1, sc.after_prefix()));
    case 4:
      return ChannelType::send(gen_payload(rng, depth), gen_channel(rng, depth - 1, sc.after_prefix()));
    default: {
      std::map<std::string, Channel> cases;
      for (auto& l : random_labels(rng, kChoiceLabels)) cases[l] = gen_channel(rng, depth - 1, sc.after_prefix());
      return k == 5 ? ChannelType::offer(cases) : ChannelType::select(cases);
    }
  }
}

Session gen_branch(Rng& rng, int depth, Scope sc);

Session gen_session(Rng& rng, int depth, Scope sc) {
  if (depth > 1 && coin(rng, 0.25)) {
    std::string x = "X" + std::to_string(sc.next++);
    Scope in = sc;
    in.unguarded.push_back(x);
    return SessionType::rec(x, gen_branch(rng, depth - 1, in));
  }
  if (!sc.guarded.empty() && coin(rng, depth <= 1 ? 0.6 : 0.2))
    return SessionType::variable(sc.guarded[pick(rng, static_cast<int>(sc.guarded.size()))]);
  return gen_branch(rng, depth, sc);
}

ValueType gen_param(Rng& rng) {
  if (coin(rng, 0.4)) return ValueType::null();
  return ValueType::enumeration(random_labels(rng, kPayloadLabels));
}

Session gen_branch(Rng& rng, int depth, Scope sc) {
  std::vector<MethodEntry> entries;
  if (depth <= 1) return SessionType::end();
  Scope in = sc.after_prefix();
  for (auto& m : kMethods) {
    if (!coin(rng, 0.45)) continue;
    MethodEntry e;
    e.name = m;
    e.param = gen_param(rng);
    int r = pick(rng, 4);
    if (r == 0) {
      e.result = ValueType::linkthis();
      std::map<std::string, Session> cases;
      for (auto& l : random_labels(rng, kChoiceLabels)) cases[l] = gen_branch(rng, depth - 1, in);
      e.cont = SessionType::variant(cases);
    } else {
      e.result = r == 1 ? ValueType::null() : ValueType::enumeration(random_labels(rng, kPayloadLabels));
      e.cont = gen_session(rng, depth - 1, in);
    }
    entries.push_back(e);
  }
  return SessionType::branch(entries);
}

// ---------------------------------------------------------------- widening

std::string fresh_label(const LabelSet& used, const std::vector<std::string>& pool) {
  for (auto& l : pool)
    if (!used.count(l)) return l;
  for (int i = 0;; ++i) {
    std::string l = "W" + std::to_string(i);
    if (!used.count(l)) return l;
  }
}

// number of places in s where widen may act
int sites(const Session& s) {
  switch (s->kind) {
    case SessionType::Kind::Var:
      return 0;
    case SessionType::Kind::Rec:
      return sites(s->body);
    case SessionType::Kind::Variant: {
      int n = 1;
      for (auto& [l, c] : s->cases) n += sites(c);
      return n;
    }
    case SessionType::Kind::Branch: {
      int n = 0;
      for (auto& e : s->methods) {
        n += 1;                            // delete e
        if (e.result.is_enum()) n += 1;    // grow its result
        n += sites(e.cont);
      }
      return n;
    }
  }
  return 0;
}

Session widen_at(const Session& s, int& k) {
  switch (s->kind) {
    case SessionType::Kind::Var:
      return s;
    case SessionType::Kind::Rec:
      return SessionType::rec(s->var, widen_at(s->body, k));
    case SessionType::Kind::Variant: {
      if (k-- == 0) {
        auto cases = s->cases;
        LabelSet used;
        for (auto& [l, c] : cases) used.insert(l);
        cases[fresh_label(used, kChoiceLabels)] = SessionType::end();
        return SessionType::variant(cases);
      }
      std::map<std::string, Session> cases;
      for (auto& [l, c] : s->cases) cases[l] = widen_at(c, k);
      return SessionType::variant(cases);
    }
    case SessionType::Kind::Branch: {
      std::vector<MethodEntry> out;
      for (auto& e : s->methods) {
        if (k-- == 0) continue;
        MethodEntry ne = e;
        if (e.result.is_enum() && k-- == 0) {
          LabelSet ls = e.result.labels;
          ls.insert(fresh_label(ls, kPayloadLabels));
          ne.result = ValueType::enumeration(ls);
        }
        ne.cont = widen_at(e.cont, k);
        out.push_back(ne);
      }
      return SessionType::branch(out);
    }
  }
  return s;
}

}  // namespace

Channel random_channel(Rng& rng, int depth) { return gen_channel(rng, depth, Scope{}); }

Session random_session(Rng& rng, int depth) { return gen_session(rng, depth, Scope{}); }

ValueType random_value_type(Rng& rng, int depth) {
  int k = pick(rng, 3);
  if (k == 0) return ValueType::null();
  if (k == 1) return ValueType::enumeration(random_labels(rng, kPayloadLabels));
  return ValueType::session(random_session(rng, depth));
}

Session widen(Rng& rng, const Session& s) {
  int n = sites(s);
  if (n == 0) return s;
  int k = pick(rng, n);
  return widen_at(s, k);
}

std::vector<Session> widening_chain(Rng& rng, const Session& s, int n) {
  std::vector<Session> out = {s};
  for (int i = 0; i < n; ++i) out.push_back(widen(rng, out.back()));
  return out;
}

namespace {

Channel mutate_at(Rng& rng, const Channel& c, int& k) {
  using K = ChannelType::Kind;
  switch (c->kind) {
    case K::End:
    case K::Var:
      return c;
    case K::Rec:
      return ChannelType::rec(c->var, mutate_at(rng, c->body, k));
    case K::Recv:
    case K::Send: {
      Payload pl = c->payload;
      if (k-- == 0 && !pl.is_channel && pl.type.is_enum()) {
        LabelSet ls = pl.type.labels;
        if (coin(rng) && ls.size() > 1) {
          ls.erase(std::next(ls.begin(), pick(rng, static_cast<int>(ls.size()))));
        } else {
          ls.insert(fresh_label(ls, kPayloadLabels));
        }
        pl = value_payload(ValueType::enumeration(ls));
      }
      Channel cont = mutate_at(rng, c->cont, k);
      return c->kind == K::Recv ? ChannelType::recv(pl, cont) : ChannelType::send(pl, cont);
    }
    case K::Offer:
    case K::Select: {
      std::map<std::string, Channel> cases = c->cases;
      if (k-- == 0) {
        if (coin(rng) && cases.size() > 1) {
          cases.erase(std::next(cases.begin(), pick(rng, static_cast<int>(cases.size()))));
        } else {
          LabelSet used;
          for (auto& [l, s] : cases) used.insert(l);
          cases[fresh_label(used, kChoiceLabels)] = ChannelType::end();
        }
      } else {
        for (auto& [l, s] : cases) s = mutate_at(rng, s, k);
      }
      return c->kind == K::Offer ? ChannelType::offer(cases) : ChannelType::select(cases);
    }
  }
  return c;
}

int channel_sites(const Channel& c) {
  using K = ChannelType::Kind;
  switch (c->kind) {
    case K::End:
    case K::Var:
      return 0;
    case K::Rec:
      return channel_sites(c->body);
    case K::Recv:
    case K::Send:
      return 1 + channel_sites(c->cont);
    case K::Offer:
    case K::Select: {
      int n = 1;
      for (auto& [l, s] : c->cases) n += channel_sites(s);
      return n;
    }
  }
  return 0;
}

}  // namespace

Channel mutate_channel(Rng& rng, const Channel& c) {
  int n = channel_sites(c);
  if (n == 0) return c;
  int k = pick(rng, n);
  return mutate_at(rng, c, k);
}

}  // namespace mst::testing
