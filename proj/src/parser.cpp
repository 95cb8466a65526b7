#include "mst/parser.hpp"

#include <cctype>
#include <functional>

#include "mst/channel.hpp"

namespace mst {

namespace {

// ---------------------------------------------------------------- lexer

struct Token {
  enum class Kind { Ident, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 0;
  int col = 0;
};

std::vector<Token> lex(const std::string& src, const std::string& file) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto adv = [&](size_t n) {
    for (size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      adv(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') adv(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      adv(2);
      while (i < src.size() && !(src[i] == '*' && i + 1 < src.size() && src[i + 1] == '/')) adv(1);
      adv(2);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Token::Kind::Ident;
      t.text = src.substr(i, j - i);
      adv(j - i);
      out.push_back(t);
      continue;
    }
    if (src.compare(i, 3, "<->") == 0) {
      t.kind = Token::Kind::Punct;
      t.text = "<->";
      adv(3);
      out.push_back(t);
      continue;
    }
    static const std::string singles = "{}()<>:,;.=&+?![]@";
    if (singles.find(c) != std::string::npos) {
      t.kind = Token::Kind::Punct;
      t.text = std::string(1, c);
      adv(1);
      out.push_back(t);
      continue;
    }
    throw Error("SyntaxError", file + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                   ": unexpected character '" + std::string(1, c) + "'");
  }
  Token end;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

bool upper_ident(const std::string& s) { return !s.empty() && std::isupper(static_cast<unsigned char>(s[0])); }

// ---------------------------------------------------------------- raw declarations

// Embedded channel types inside session types ([Σ] and <Σ>) are parked in a side
// table and referenced through reserved variable names until resolution.
const char kEmbedChan = '\x01';
const char kEmbedAccess = '\x02';

struct RawAnnotation {
  bool variant = false;
  std::vector<std::pair<ValueType, std::string>> rec;
  std::vector<std::pair<std::string, std::vector<std::pair<ValueType, std::string>>>> cases;
};

struct RawMethod {
  std::string name;
  std::string param;
  ExprPtr body;
  bool annotated = false;
  RawAnnotation req, ens;
  ValueType result, param_type;
  int line = 0;
};

struct RawClass {
  std::string name;
  Session session;
  std::map<std::string, Session> where;
  std::vector<std::string> fields;
  std::vector<RawMethod> methods;
  int line = 0;
};

struct RawType {
  Session main;
  std::map<std::string, Session> where;
};

struct RawChannel {
  Channel main;
  std::map<std::string, Channel> where;
};

struct RawProgram {
  std::vector<RawClass> classes;
  std::map<std::string, RawType> types;
  std::map<std::string, RawChannel> channels;
  std::vector<std::pair<Channel, int>> access_raw;
  std::vector<std::string> access_names;
  std::optional<std::pair<std::string, std::string>> main;
  std::vector<std::pair<bool, Channel>> embedded;  // (is_access, raw channel)
};

// ---------------------------------------------------------------- parser

class Parser {
 public:
  Parser(std::vector<Token> toks, std::string file, RawProgram& raw)
      : toks_(std::move(toks)), file_(std::move(file)), raw_(raw) {}

  void program() {
    while (!at_end()) {
      const Token& t = peek();
      if (is_ident("class")) {
        class_decl();
      } else if (is_ident("access")) {
        next();
        expect("<");
        Channel c = chan();
        expect(">");
        std::string n = ident();
        expect(";");
        raw_.access_raw.push_back({c, t.line});
        raw_.access_names.push_back(n);
      } else if (is_ident("channel")) {
        next();
        std::string n = ident();
        expect("=");
        RawChannel rc;
        rc.main = chan();
        if (accept_ident("where")) rc.where = chan_defs();
        expect(";");
        if (raw_.channels.count(n)) fail("channel " + n + " declared twice");
        raw_.channels[n] = std::move(rc);
      } else if (is_ident("type")) {
        next();
        std::string n = ident();
        expect("=");
        RawType rt;
        rt.main = stype();
        if (accept_ident("where")) rt.where = stype_defs();
        expect(";");
        if (raw_.types.count(n)) fail("type " + n + " declared twice");
        raw_.types[n] = std::move(rt);
      } else if (is_ident("main")) {
        next();
        std::string c = ident();
        expect(".");
        std::string m = ident();
        expect(";");
        if (raw_.main) fail("main designated twice");
        raw_.main = {c, m};
      } else {
        fail("expected a declaration, found '" + t.text + "'");
      }
    }
  }

  Session stype_only() {
    Session s = stype();
    expect_end();
    return s;
  }
  ValueType vtype_only() {
    ValueType t = vtype();
    expect_end();
    return t;
  }
  Channel chan_only() {
    Channel c = chan();
    expect_end();
    return c;
  }
  RawAnnotation ftyping_only() {
    RawAnnotation a = ftyping();
    expect_end();
    return a;
  }
  ExprPtr expr_only() {
    ExprPtr e = seq();
    expect_end();
    return e;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  std::string file_;
  RawProgram& raw_;

  const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Token::Kind::End; }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool is(const std::string& p, size_t k = 0) const {
    return peek(k).kind == Token::Kind::Punct && peek(k).text == p;
  }
  bool is_ident(const std::string& s, size_t k = 0) const {
    return peek(k).kind == Token::Kind::Ident && peek(k).text == s;
  }
  bool is_any_ident(size_t k = 0) const { return peek(k).kind == Token::Kind::Ident; }
  bool accept(const std::string& p) {
    if (!is(p)) return false;
    next();
    return true;
  }
  bool accept_ident(const std::string& s) {
    if (!is_ident(s)) return false;
    next();
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw Error("SyntaxError", file_ + ":" + std::to_string(t.line) + ":" + std::to_string(t.col) + ": " + msg);
  }
  void expect(const std::string& p) {
    if (!accept(p)) fail("expected '" + p + "', found '" + (at_end() ? std::string("end of input") : peek().text) + "'");
  }
  void expect_end() {
    if (!at_end()) fail("unexpected '" + peek().text + "'");
  }
  std::string ident() {
    if (!is_any_ident()) fail("expected identifier, found '" + peek().text + "'");
    return next().text;
  }

  // ------------------------------------------------------------ types

  std::map<std::string, Session> stype_defs() {
    std::map<std::string, Session> defs;
    do {
      std::string n = ident();
      expect("=");
      if (defs.count(n)) fail("state " + n + " defined twice");
      defs[n] = stype();
      accept(",");
    } while (is_any_ident() && is("=", 1));
    return defs;
  }

  std::map<std::string, Channel> chan_defs() {
    std::map<std::string, Channel> defs;
    do {
      std::string n = ident();
      expect("=");
      if (defs.count(n)) fail("state " + n + " defined twice");
      defs[n] = chan();
      accept(",");
    } while (is_any_ident() && is("=", 1));
    return defs;
  }

  std::string qualified_name() {
    std::string n = ident();
    if (is(".") && is_any_ident(1) && !is_ident("rec", 1)) {
      next();
      n += "." + ident();
    }
    return n;
  }

  Session stype() {
    if (is("{")) {
      next();
      std::vector<MethodEntry> ms;
      if (accept("}")) return SessionType::branch({});
      do {
        ms.push_back(sig());
      } while (accept(","));
      expect("}");
      return SessionType::branch(std::move(ms));
    }
    if (is("<")) {
      next();
      std::map<std::string, Session> cases;
      do {
        std::string l = ident();
        if (!upper_ident(l)) fail("label expected, found " + l);
        expect(":");
        if (cases.count(l)) fail("label " + l + " repeated");
        cases[l] = stype();
      } while (accept(","));
      expect(">");
      return SessionType::variant(std::move(cases));
    }
    if (is("(")) {
      next();
      Session s = stype();
      expect(")");
      return s;
    }
    if (accept_ident("rec")) {
      std::string x = ident();
      expect(".");
      return SessionType::rec(x, stype());
    }
    if (is_any_ident()) return SessionType::variable(qualified_name());
    fail("session type expected");
  }

  MethodEntry sig() {
    MethodEntry m;
    m.result = vtype();
    m.name = ident();
    expect("(");
    m.param = ValueType::null();
    if (!is(")")) {
      m.param = vtype();
      if (is_any_ident()) next();  // optional parameter name
    }
    expect(")");
    expect(":");
    m.cont = stype();
    return m;
  }

  bool enum_ahead() const {
    return is("{") && is_any_ident(1) && (is(",", 2) || is("}", 2)) && upper_ident(peek(1).text);
  }

  ValueType vtype() {
    if (accept_ident("Null")) return ValueType::null();
    if (accept_ident("linkthis")) return ValueType::linkthis();
    if (is_ident("link") && is_any_ident(1) && !is("(", 2)) {
      next();
      return ValueType::link(ident());
    }
    if (enum_ahead()) {
      next();
      LabelSet ls;
      do {
        std::string l = ident();
        if (!upper_ident(l)) fail("label expected, found " + l);
        ls.insert(l);
      } while (accept(","));
      expect("}");
      return ValueType::enumeration(std::move(ls));
    }
    if (is("[")) {
      next();
      Channel c = chan();
      expect("]");
      raw_.embedded.push_back({false, c});
      return ValueType::session(
          SessionType::variable(std::string(1, kEmbedChan) + std::to_string(raw_.embedded.size() - 1)));
    }
    if (is("<") && !(is_any_ident(1) && is(":", 2))) {
      next();
      Channel c = chan();
      expect(">");
      raw_.embedded.push_back({true, c});
      return ValueType::session(
          SessionType::variable(std::string(1, kEmbedAccess) + std::to_string(raw_.embedded.size() - 1)));
    }
    return ValueType::session(stype());
  }

  Payload payload() {
    if (is("[")) {
      next();
      Channel c = chan();
      expect("]");
      return channel_payload(c);
    }
    if (is_any_ident() && !is_ident("Null") && !is_ident("linkthis")) {
      // bare names in payload position are never qualified: '.' continues the channel type
      return value_payload(ValueType::session(SessionType::variable(ident())));
    }
    return value_payload(vtype());
  }

  Channel chan() {
    if (accept_ident("End") || accept_ident("end")) return ChannelType::end();
    if (accept("?")) {
      Payload p = payload();
      expect(".");
      return ChannelType::recv(std::move(p), chan());
    }
    if (accept("!")) {
      Payload p = payload();
      expect(".");
      return ChannelType::send(std::move(p), chan());
    }
    if (is("&") || is("+")) {
      bool offer = next().text == "&";
      expect("{");
      std::map<std::string, Channel> cases;
      do {
        std::string l = ident();
        if (!upper_ident(l)) fail("label expected, found " + l);
        expect(":");
        if (cases.count(l)) fail("label " + l + " repeated");
        cases[l] = chan();
      } while (accept(","));
      expect("}");
      return offer ? ChannelType::offer(std::move(cases)) : ChannelType::select(std::move(cases));
    }
    if (accept("(")) {
      Channel c = chan();
      expect(")");
      return c;
    }
    if (accept_ident("rec")) {
      std::string x = ident();
      expect(".");
      return ChannelType::rec(x, chan());
    }
    if (is_any_ident()) return ChannelType::variable(ident());
    fail("channel type expected");
  }

  std::vector<std::pair<ValueType, std::string>> ft_items(bool stop_at_paren) {
    std::vector<std::pair<ValueType, std::string>> items;
    if (stop_at_paren && is(")")) return items;
    while (true) {
      ValueType t = vtype();
      std::string f = ident();
      items.push_back({t, f});
      if (!accept(",")) break;
    }
    return items;
  }

  RawAnnotation ftyping() {
    RawAnnotation a;
    if (is("<") && is_any_ident(1) && is(":", 2) && is("(", 3)) {
      next();
      a.variant = true;
      do {
        std::string l = ident();
        expect(":");
        expect("(");
        auto items = ft_items(true);
        expect(")");
        a.cases.push_back({l, items});
      } while (accept(","));
      expect(">");
      return a;
    }
    if (accept("(")) {
      a.rec = ft_items(true);
      expect(")");
      return a;
    }
    if (is_ident("ens")) return a;
    a.rec = ft_items(false);
    return a;
  }

  // ------------------------------------------------------------ classes

  void class_decl() {
    RawClass c;
    c.line = peek().line;
    next();
    c.name = ident();
    expect("{");
    if (!accept_ident("session")) fail("class " + c.name + ": session type expected");
    c.session = stype();
    if (accept_ident("where")) c.where = stype_defs();
    accept(";");
    while (!accept("}")) {
      if (at_end()) fail("unterminated class " + c.name);
      if (is_ident("req")) {
        c.methods.push_back(annotated_method());
      } else if (is_any_ident() && is("(", 1)) {
        c.methods.push_back(plain_method());
      } else if (is_any_ident() && (is(";", 1) || is(",", 1))) {
        do {
          c.fields.push_back(ident());
        } while (accept(","));
        expect(";");
      } else {
        fail("field or method expected in class " + c.name);
      }
    }
    raw_.classes.push_back(std::move(c));
  }

  RawMethod plain_method() {
    RawMethod m;
    m.line = peek().line;
    m.name = ident();
    expect("(");
    if (is_any_ident() && is(")", 1)) {
      m.param = ident();
    } else if (!is(")")) {
      vtype();
      m.param = ident();
    }
    expect(")");
    m.body = block();
    return m;
  }

  RawMethod annotated_method() {
    RawMethod m;
    m.line = peek().line;
    m.annotated = true;
    next();  // req
    m.req = ftyping();
    if (!accept_ident("ens")) fail("'ens' expected");
    m.ens = ftyping();
    m.result = vtype();
    m.name = ident();
    expect("(");
    m.param_type = ValueType::null();
    if (!is(")")) {
      m.param_type = vtype();
      m.param = ident();
    }
    expect(")");
    m.body = block();
    return m;
  }

  ExprPtr block() {
    expect("{");
    ExprPtr e = is("}") ? ex::null() : seq();
    expect("}");
    return e;
  }

  // ------------------------------------------------------------ expressions

  bool case_start() const {
    if (is_ident("case")) return true;
    return is_any_ident() && upper_ident(peek().text) && is(":", 1);
  }

  bool seq_stop() const { return is("}") || is(")") || at_end() || case_start(); }

  ExprPtr seq() {
    int line = peek().line;
    ExprPtr first = unit();
    if (accept(";")) {
      if (seq_stop()) return first;
      return ex::with_line(ex::seq(first, seq()), line);
    }
    return first;
  }

  ExprPtr args() {
    expect("(");
    if (accept(")")) return ex::null();
    ExprPtr e = seq();
    expect(")");
    return e;
  }

  ExprPtr unit() {
    int line = peek().line;
    auto L = [line](ExprPtr e) { return ex::with_line(std::move(e), line); };
    if (accept_ident("null")) return L(ex::null());
    if (accept_ident("new")) {
      std::string c = ident();
      if (accept("(")) expect(")");
      return L(ex::make_new(c));
    }
    if (accept_ident("switch")) {
      expect("(");
      ExprPtr s = seq();
      expect(")");
      expect("{");
      std::vector<std::pair<std::string, ExprPtr>> cases;
      while (!accept("}")) {
        accept_ident("case");
        std::string l = ident();
        if (!upper_ident(l)) fail("case label expected, found " + l);
        expect(":");
        ExprPtr body = seq_stop() ? ex::null() : seq();
        for (auto& [k, v] : cases)
          if (k == l) fail("case " + l + " repeated");
        cases.push_back({l, body});
      }
      return L(ex::sw(s, std::move(cases)));
    }
    if (accept_ident("while")) {
      expect("(");
      ExprPtr c = seq();
      expect(")");
      ExprPtr body = is("{") ? block() : unit();
      return L(ex::loop(c, body));
    }
    if (accept_ident("spawn")) {
      std::string c = ident();
      expect(".");
      std::string m = ident();
      return L(ex::spawn(c, m, args()));
    }
    if (is_ident("return") && is("(", 1)) {
      next();
      return L(ex::ret(args()));
    }
    if (accept("(")) {
      ExprPtr e = seq();
      expect(")");
      return e;
    }
    if (is("{")) return block();
    if (accept("@")) return L(ex::obj(ident()));
    if (!is_any_ident()) fail("expression expected, found '" + peek().text + "'");
    std::string n = ident();
    if (upper_ident(n)) return L(ex::label(n));
    if (accept("<->")) return L(ex::swap(n, unit()));
    if (is("=")) {
      next();
      return L(ex::seq(ex::with_line(ex::swap(n, unit()), line), ex::null()));
    }
    if (is(".") && is_any_ident(1) && is("(", 2)) {
      next();
      std::string m = ident();
      return L(ex::call(n, m, args()));
    }
    if (is("(")) return L(ex::self_call(n, args()));
    return L(ex::var(n));
  }
};

// ---------------------------------------------------------------- resolution

struct Scope {
  const std::map<std::string, Session>* defs = nullptr;
  std::string owner;
};

struct ChanScope {
  const std::map<std::string, Channel>* defs = nullptr;
  std::string owner;
};

class Resolver {
 public:
  explicit Resolver(const RawProgram* raw) : raw_(raw) {}

  Session session(const Session& s, const Scope& sc) {
    std::vector<std::pair<std::string, std::string>> bound;
    std::vector<SFrame> stack;
    return res(s, sc, bound, stack);
  }

  Channel channel(const Channel& c, const ChanScope& sc) {
    std::vector<std::pair<std::string, std::string>> bound;
    std::vector<CFrame> stack;
    return resc(c, sc, bound, stack);
  }

  ValueType value(const ValueType& t, const Scope& sc) {
    if (!t.is_session()) return t;
    return ValueType::session(session(t.sess, sc));
  }

  Scope global() const { return {}; }
  Scope class_scope(const RawClass& c) const { return {&c.where, "class:" + c.name}; }

 private:
  struct SFrame {
    std::string key;
    std::string var;
    bool used = false;
  };
  struct CFrame {
    std::string key;
    std::string var;
    bool used = false;
  };

  const RawProgram* raw_;

  static std::string fresh(const std::string& base, const std::function<bool(const std::string&)>& taken) {
    if (!taken(base)) return base;
    for (int i = 1;; ++i) {
      std::string cand = base + "_" + std::to_string(i);
      if (!taken(cand)) return cand;
    }
  }

  template <typename Frame>
  static bool name_taken(const std::string& n, const std::vector<std::pair<std::string, std::string>>& bound,
                         const std::vector<Frame>& stack) {
    for (auto& [u, a] : bound)
      if (a == n) return true;
    for (auto& f : stack)
      if (f.var == n) return true;
    return false;
  }

  struct SDef {
    Session raw;
    Scope scope;
    std::string key;
    std::string display;
  };

  std::optional<SDef> lookup_raw(const std::string& name, const Scope& sc) {
    auto dot = name.find('.');
    if (dot != std::string::npos) {
      std::string a = name.substr(0, dot), b = name.substr(dot + 1);
      for (auto& c : raw_->classes)
        if (c.name == a) {
          auto it = c.where.find(b);
          if (it != c.where.end()) return SDef{it->second, {&c.where, "class:" + a}, "class:" + a + "." + b, b};
        }
      auto t = raw_->types.find(a);
      if (t != raw_->types.end()) {
        auto it = t->second.where.find(b);
        if (it != t->second.where.end())
          return SDef{it->second, {&t->second.where, "type:" + a}, "type:" + a + "." + b, b};
      }
      return std::nullopt;
    }
    if (sc.defs) {
      auto it = sc.defs->find(name);
      if (it != sc.defs->end()) return SDef{it->second, sc, sc.owner + "." + name, name};
    }
    auto t = raw_->types.find(name);
    if (t != raw_->types.end())
      return SDef{t->second.main, {&t->second.where, "type:" + name}, "type:" + name + "#", name};
    return std::nullopt;
  }

  Session res(const Session& s, const Scope& sc, std::vector<std::pair<std::string, std::string>>& bound,
              std::vector<SFrame>& stack) {
    switch (s->kind) {
      case SessionType::Kind::Var: {
        const std::string& n = s->var;
        if (!n.empty() && (n[0] == kEmbedChan || n[0] == kEmbedAccess)) {
          auto& [is_access, ch] = raw_->embedded.at(std::stoul(n.substr(1)));
          Channel c = channel(ch, {});
          return is_access ? translate_access(c) : translate_channel(c);
        }
        for (size_t i = bound.size(); i-- > 0;)
          if (bound[i].first == n) return SessionType::variable(bound[i].second);
        auto def = lookup_raw(n, sc);
        if (!def) throw Error("UnboundStateName", n);
        for (auto& f : stack)
          if (f.key == def->key) {
            f.used = true;
            return SessionType::variable(f.var);
          }
        if (stack.size() > 500) throw Error("NonContractiveType", "state expansion too deep at " + n);
        std::string var = fresh(def->display, [&](const std::string& c) { return name_taken(c, bound, stack); });
        stack.push_back({def->key, var, false});
        std::vector<std::pair<std::string, std::string>> inner;
        for (auto& f : stack) inner.push_back({"\x03", f.var});  // reserve names against capture
        Session body = res(def->raw, def->scope, inner, stack);
        bool used = stack.back().used;
        stack.pop_back();
        return used ? SessionType::rec(var, body) : body;
      }
      case SessionType::Kind::Rec: {
        std::string actual =
            fresh(s->var, [&](const std::string& c) { return name_taken(c, bound, stack); });
        bound.push_back({s->var, actual});
        Session body = res(s->body, sc, bound, stack);
        bound.pop_back();
        return SessionType::rec(actual, body);
      }
      case SessionType::Kind::Variant: {
        std::map<std::string, Session> cases;
        for (auto& [l, c] : s->cases) cases[l] = res(c, sc, bound, stack);
        return SessionType::variant(std::move(cases));
      }
      case SessionType::Kind::Branch: {
        auto rv = [&](const ValueType& t) {
          if (!t.is_session()) return t;
          return ValueType::session(res(t.sess, sc, bound, stack));
        };
        std::vector<MethodEntry> ms;
        for (auto& m : s->methods) ms.push_back({m.name, rv(m.param), rv(m.result), res(m.cont, sc, bound, stack)});
        return SessionType::branch(std::move(ms));
      }
    }
    return s;
  }

  struct CDef {
    Channel raw;
    ChanScope scope;
    std::string key;
    std::string display;
  };

  std::optional<CDef> lookup_chan(const std::string& name, const ChanScope& sc) {
    if (sc.defs) {
      auto it = sc.defs->find(name);
      if (it != sc.defs->end()) return CDef{it->second, sc, sc.owner + "." + name, name};
    }
    auto c = raw_->channels.find(name);
    if (c != raw_->channels.end())
      return CDef{c->second.main, {&c->second.where, "chan:" + name}, "chan:" + name + "#", name};
    return std::nullopt;
  }

  Payload res_payload(const Payload& p, const ChanScope& sc, std::vector<std::pair<std::string, std::string>>& bound,
                      std::vector<CFrame>& stack) {
    if (p.is_channel) return channel_payload(resc(p.chan, sc, bound, stack));
    if (p.type.is_session() && p.type.sess->is_var()) {
      // a bare name in payload position may denote a channel (delegation) or a session type
      const std::string& n = p.type.sess->var;
      bool is_chan = false;
      for (auto& [u, a] : bound)
        if (u == n) is_chan = true;
      if (!is_chan && lookup_chan(n, sc)) is_chan = true;
      if (is_chan) return channel_payload(resc(ChannelType::variable(n), sc, bound, stack));
    }
    return value_payload(value(p.type, global()));
  }

  Channel resc(const Channel& c, const ChanScope& sc, std::vector<std::pair<std::string, std::string>>& bound,
               std::vector<CFrame>& stack) {
    switch (c->kind) {
      case ChannelType::Kind::End:
        return c;
      case ChannelType::Kind::Var: {
        const std::string& n = c->var;
        for (size_t i = bound.size(); i-- > 0;)
          if (bound[i].first == n) return ChannelType::variable(bound[i].second);
        auto def = lookup_chan(n, sc);
        if (!def) throw Error("UnboundStateName", n);
        for (auto& f : stack)
          if (f.key == def->key) {
            f.used = true;
            return ChannelType::variable(f.var);
          }
        if (stack.size() > 500) throw Error("NonContractiveType", "channel expansion too deep at " + n);
        std::string var = fresh(def->display, [&](const std::string& k) { return name_taken(k, bound, stack); });
        stack.push_back({def->key, var, false});
        std::vector<std::pair<std::string, std::string>> inner;
        for (auto& f : stack) inner.push_back({"\x03", f.var});
        Channel body = resc(def->raw, def->scope, inner, stack);
        bool used = stack.back().used;
        stack.pop_back();
        return used ? ChannelType::rec(var, body) : body;
      }
      case ChannelType::Kind::Rec: {
        std::string actual = fresh(c->var, [&](const std::string& k) { return name_taken(k, bound, stack); });
        bound.push_back({c->var, actual});
        Channel body = resc(c->body, sc, bound, stack);
        bound.pop_back();
        return ChannelType::rec(actual, body);
      }
      case ChannelType::Kind::Recv:
        return ChannelType::recv(res_payload(c->payload, sc, bound, stack), resc(c->cont, sc, bound, stack));
      case ChannelType::Kind::Send:
        return ChannelType::send(res_payload(c->payload, sc, bound, stack), resc(c->cont, sc, bound, stack));
      case ChannelType::Kind::Offer:
      case ChannelType::Kind::Select: {
        std::map<std::string, Channel> cases;
        for (auto& [l, k] : c->cases) cases[l] = resc(k, sc, bound, stack);
        return c->kind == ChannelType::Kind::Offer ? ChannelType::offer(std::move(cases))
                                                   : ChannelType::select(std::move(cases));
      }
    }
    return c;
  }
};

// ---------------------------------------------------------------- checks on folded types

void check_session(const Session& s, const std::string& where) {
  if (!free_vars(s).empty()) throw Error("UnboundStateName", where + ": " + *free_vars(s).begin());
  if (!contractive(s)) throw Error("NonContractiveType", where);
}

void check_channel(const Channel& c, const std::string& where) {
  if (!free_vars(c).empty()) throw Error("UnboundStateName", where + ": " + *free_vars(c).begin());
  if (!contractive(c)) throw Error("NonContractiveType", where);
}

ValueType finish_value(const ValueType& t, const std::string& where) {
  if (!t.is_session()) return t;
  Session s = desugar_linkthis(t.sess);
  check_session(s, where);
  return ValueType::session(s);
}

Session finish(const Session& s, const std::string& where) {
  Session d = desugar_linkthis(s);
  check_session(d, where);
  return d;
}

FieldTyping annotation_typing(Resolver& r, const Scope& sc, const RawAnnotation& a, const std::vector<std::string>& fields,
                              const std::string& where) {
  auto build = [&](const std::vector<std::pair<ValueType, std::string>>& items) {
    Record rec;
    for (auto& f : fields) rec[f] = ValueType::null();
    for (auto& [t, f] : items) {
      if (!rec.count(f)) throw Error("NoSuchField", where + ": annotation mentions " + f);
      rec[f] = finish_value(r.value(t, sc), where);
    }
    return rec;
  };
  if (!a.variant) return FieldTyping::record(build(a.rec));
  std::map<std::string, Record> cases;
  for (auto& [l, items] : a.cases) cases[l] = build(items);
  return FieldTyping::make_variant(std::move(cases));
}

ExprPtr bind_names(const ExprPtr& e, const RawClass& c, const std::string& param,
                   const std::set<std::string>& access, const std::string& where) {
  if (!e) return e;
  if (e->kind == Expr::Kind::Var) {
    if (e->name == param) return e;
    for (auto& f : c.fields)
      if (f == e->name) return ex::with_line(ex::swap(f, ex::null()), e->line);
    if (access.count(e->name)) return ex::with_line(ex::access(e->name), e->line);
    throw Error("SyntaxError", where + ":" + std::to_string(e->line) + ": unknown name " + e->name);
  }
  if (!e->a && !e->b && e->cases.empty()) return e;
  auto copy = std::make_shared<Expr>(*e);
  copy->a = bind_names(e->a, c, param, access, where);
  copy->b = bind_names(e->b, c, param, access, where);
  for (auto& [l, k] : copy->cases) k = bind_names(k, c, param, access, where);
  return copy;
}

Program build(const RawProgram& raw) {
  Program p;
  Resolver r(&raw);
  for (auto& [n, rc] : raw.channels) {
    Channel c = r.channel(ChannelType::variable(n), {});
    check_channel(c, "channel " + n);
    p.channels[n] = c;
  }
  for (auto& [n, rt] : raw.types) {
    TypeDecl td;
    td.name = n;
    td.type = finish(r.session(SessionType::variable(n), {}), "type " + n);
    for (auto& [s, body] : rt.where)
      td.states[s] = finish(r.session(SessionType::variable(n + "." + s), {}), "type " + n + "." + s);
    p.types[n] = td;
  }
  std::set<std::string> access(raw.access_names.begin(), raw.access_names.end());
  for (size_t i = 0; i < raw.access_raw.size(); ++i) {
    Channel c = r.channel(raw.access_raw[i].first, {});
    check_channel(c, "access " + raw.access_names[i]);
    p.access.push_back({raw.access_names[i], c, raw.access_raw[i].second});
  }
  for (auto& rc : raw.classes) {
    if (p.classes.count(rc.name)) throw Error("DuplicateClass", rc.name);
    ClassDecl cd;
    cd.name = rc.name;
    cd.line = rc.line;
    cd.fields = rc.fields;
    Scope sc = r.class_scope(rc);
    cd.session = finish(r.session(rc.session, sc), "class " + rc.name);
    if (!unfold(cd.session)->is_branch())
      throw Error("SyntaxError", "class " + rc.name + ": session type must be a branch");
    for (auto& [s, body] : rc.where)
      cd.states[s] = finish(r.session(SessionType::variable(s), sc), "class " + rc.name + "." + s);
    std::set<std::string> seen;
    for (auto& rm : rc.methods) {
      if (!seen.insert(rm.name).second)
        throw Error("SyntaxError", "class " + rc.name + ": method " + rm.name + " declared twice");
      MethodDecl md;
      md.name = rm.name;
      md.param = rm.param.empty() ? "_" : rm.param;
      md.line = rm.line;
      std::string where = rc.name + "." + rm.name;
      md.body = bind_names(rm.body, rc, md.param, access, where);
      if (rm.annotated) {
        Annotation a;
        a.req = annotation_typing(r, sc, rm.req, rc.fields, where);
        a.ens = annotation_typing(r, sc, rm.ens, rc.fields, where);
        a.result = finish_value(r.value(rm.result, sc), where);
        a.param = finish_value(r.value(rm.param_type, sc), where);
        md.annot = a;
      }
      cd.methods.push_back(std::move(md));
    }
    p.class_order.push_back(rc.name);
    p.classes[rc.name] = std::move(cd);
  }
  p.main = raw.main;
  return p;
}

// ---------------------------------------------------------------- linkthis sugar

bool cont_is_variant(const Session& s, const std::map<std::string, Session>& env, int depth) {
  if (depth > 64) return false;
  switch (s->kind) {
    case SessionType::Kind::Variant: return true;
    case SessionType::Kind::Branch: return false;
    case SessionType::Kind::Rec: {
      auto inner = env;
      inner[s->var] = s->body;
      return cont_is_variant(s->body, inner, depth + 1);
    }
    case SessionType::Kind::Var: {
      auto it = env.find(s->var);
      return it != env.end() && cont_is_variant(it->second, env, depth + 1);
    }
  }
  return false;
}

Session desugar(const Session& s, std::map<std::string, Session>& env) {
  switch (s->kind) {
    case SessionType::Kind::Var:
      return s;
    case SessionType::Kind::Rec: {
      auto saved = env;
      env[s->var] = s->body;
      Session body = desugar(s->body, env);
      env = saved;
      return SessionType::rec(s->var, body);
    }
    case SessionType::Kind::Variant: {
      std::map<std::string, Session> cases;
      for (auto& [l, c] : s->cases) cases[l] = desugar(c, env);
      return SessionType::variant(std::move(cases));
    }
    case SessionType::Kind::Branch: {
      auto dv = [&](const ValueType& t) {
        if (!t.is_session()) return t;
        std::map<std::string, Session> fresh_env;
        return ValueType::session(desugar(t.sess, fresh_env));
      };
      std::vector<MethodEntry> ms;
      for (auto& m : s->methods) {
        ValueType result = dv(m.result);
        if (m.result.is_enum() && cont_is_variant(m.cont, env, 0)) result = ValueType::linkthis();
        ms.push_back({m.name, dv(m.param), result, desugar(m.cont, env)});
      }
      return SessionType::branch(std::move(ms));
    }
  }
  return s;
}

}  // namespace

Session desugar_linkthis(const Session& s) {
  std::map<std::string, Session> env;
  return desugar(s, env);
}

Program parse_files(const std::vector<SourceFile>& files) {
  RawProgram raw;
  for (auto& f : files) {
    Parser p(lex(f.text, f.filename), f.filename, raw);
    p.program();
  }
  return build(raw);
}

Program parse_program(const std::string& text, const std::string& filename) {
  return parse_files({{filename, text}});
}

namespace {
// closed declarations of an already built program, visible to standalone parses
RawProgram raw_from(const Program* p) {
  RawProgram raw;
  if (!p) return raw;
  for (auto& [n, c] : p->channels) raw.channels[n] = {c, {}};
  for (auto& [n, t] : p->types) raw.types[n] = {t.type, t.states};
  for (auto& n : p->class_order) {
    const ClassDecl& c = p->classes.at(n);
    RawClass rc;
    rc.name = n;
    rc.session = c.session;
    rc.where = c.states;
    raw.classes.push_back(rc);
  }
  return raw;
}
}  // namespace

Session parse_session_type(const std::string& text, const Program* p) {
  RawProgram raw = raw_from(p);
  Parser ps(lex(text, "<type>"), "<type>", raw);
  Session s = ps.stype_only();
  Resolver r(&raw);
  return finish(r.session(s, {}), "<type>");
}

ValueType parse_value_type(const std::string& text, const Program* p) {
  RawProgram raw = raw_from(p);
  Parser ps(lex(text, "<type>"), "<type>", raw);
  ValueType t = ps.vtype_only();
  Resolver r(&raw);
  return finish_value(r.value(t, {}), "<type>");
}

FieldTyping parse_field_typing(const std::string& text, const Program* p) {
  RawProgram raw = raw_from(p);
  Parser ps(lex(text, "<fields>"), "<fields>", raw);
  RawAnnotation a = ps.ftyping_only();
  Resolver r(&raw);
  auto build_rec = [&](const std::vector<std::pair<ValueType, std::string>>& items) {
    Record rec;
    for (auto& [t, f] : items) rec[f] = finish_value(r.value(t, {}), "<fields>");
    return rec;
  };
  if (!a.variant) return FieldTyping::record(build_rec(a.rec));
  std::map<std::string, Record> cases;
  for (auto& [l, items] : a.cases) cases[l] = build_rec(items);
  return FieldTyping::make_variant(std::move(cases));
}

Channel parse_channel_type(const std::string& text, const Program* p) {
  RawProgram raw = raw_from(p);
  Parser ps(lex(text, "<channel>"), "<channel>", raw);
  Channel c = ps.chan_only();
  Resolver r(&raw);
  Channel out = r.channel(c, {});
  check_channel(out, "<channel>");
  return out;
}

ExprPtr parse_expr(const std::string& text) {
  RawProgram raw;
  Parser ps(lex(text, "<expr>"), "<expr>", raw);
  return ps.expr_only();
}

}  // namespace mst
