#include "mst/channel.hpp"

#include <unordered_map>

namespace mst {

namespace {
Channel dual_node(const Channel& c) {
  switch (c->kind) {
    case ChannelType::Kind::End:
    case ChannelType::Kind::Var:
      return c;
    case ChannelType::Kind::Rec:
      return ChannelType::rec(c->var, dual(c->body));
    case ChannelType::Kind::Recv:
      return ChannelType::send(c->payload, dual(c->cont));
    case ChannelType::Kind::Send:
      return ChannelType::recv(c->payload, dual(c->cont));
    case ChannelType::Kind::Offer:
    case ChannelType::Kind::Select: {
      std::map<std::string, Channel> cases;
      for (auto& [l, k] : c->cases) cases[l] = dual(k);
      return c->kind == ChannelType::Kind::Offer ? ChannelType::select(std::move(cases))
                                                 : ChannelType::offer(std::move(cases));
    }
  }
  return c;
}
}  // namespace

namespace {

// Per-node memo for pure functions of immutable channel types, so that repeated
// translations share nodes and the memoised keys on them.
template <class R, class F>
R memoised(const Channel& c, F&& compute) {
  struct Entry {
    std::weak_ptr<const ChannelType> node;
    R result;
  };
  thread_local std::unordered_map<const ChannelType*, Entry> memo;
  auto it = memo.find(c.get());
  if (it != memo.end() && !it->second.node.expired() && it->second.node.lock() == c) return it->second.result;
  R r = compute();
  if (memo.size() > 100000) memo.clear();
  memo[c.get()] = {c, r};
  return r;
}

Session translate_node(const Channel& c);

ValueType payload_type(const Payload& p) {
  if (p.is_channel) return ValueType::session(translate_channel(p.chan));
  return p.type;
}
Session translate_node(const Channel& c) {
  switch (c->kind) {
    case ChannelType::Kind::End:
      return SessionType::end();
    case ChannelType::Kind::Var:
      return SessionType::variable(c->var);
    case ChannelType::Kind::Rec:
      return SessionType::rec(c->var, translate_channel(c->body));
    case ChannelType::Kind::Recv:
      return SessionType::branch({{"receive", ValueType::null(), payload_type(c->payload), translate_channel(c->cont)}});
    case ChannelType::Kind::Send:
      return SessionType::branch({{"send", payload_type(c->payload), ValueType::null(), translate_channel(c->cont)}});
    case ChannelType::Kind::Offer: {
      std::map<std::string, Session> cases;
      for (auto& [l, k] : c->cases) cases[l] = translate_channel(k);
      return SessionType::branch(
          {{"receive", ValueType::null(), ValueType::linkthis(), SessionType::variant(std::move(cases))}});
    }
    case ChannelType::Kind::Select: {
      std::vector<MethodEntry> ms;
      for (auto& [l, k] : c->cases)
        ms.push_back({"send", ValueType::enumeration({l}), ValueType::null(), translate_channel(k)});
      return SessionType::branch(std::move(ms));
    }
  }
  return SessionType::end();
}

}  // namespace

Channel dual(const Channel& c) {
  return memoised<Channel>(c, [&] { return dual_node(c); });
}

Session translate_channel(const Channel& c) {
  return memoised<Session>(c, [&] { return translate_node(c); });
}

Session translate_access(const Channel& c) {
  return memoised<Session>(c, [&] {
    auto x = SessionType::variable("X");
    auto body = SessionType::branch({
        {"request", ValueType::null(), ValueType::session(translate_channel(dual(c))), x},
        {"accept", ValueType::null(), ValueType::session(translate_channel(c)), x},
    });
    return SessionType::rec("X", body);
  });
}

}  // namespace mst
