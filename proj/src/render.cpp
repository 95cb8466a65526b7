#include "mst/render.hpp"

namespace mst {

namespace {
std::string labels(const LabelSet& ls) {
  std::string out = "{";
  bool first = true;
  for (auto& l : ls) {
    out += (first ? "" : ", ") + l;
    first = false;
  }
  return out + "}";
}

std::string record(const Record& r) {
  std::string out = "(";
  bool first = true;
  for (auto& [f, t] : r) {
    out += (first ? "" : ", ") + render(t) + " " + f;
    first = false;
  }
  return out + ")";
}

std::string payload(const Payload& p) {
  return p.is_channel ? "[" + render(p.chan) + "]" : render(p.type);
}

std::string unit(const ExprPtr& e) {
  if (e->kind == Expr::Kind::Seq) return "(" + render(e) + ")";
  return render(e);
}

std::string arg(const ExprPtr& e) { return e->kind == Expr::Kind::Null ? "" : render(e); }
}  // namespace

std::string render(const Session& s) {
  switch (s->kind) {
    case SessionType::Kind::Var:
      return s->var;
    case SessionType::Kind::Rec:
      return "rec " + s->var + ". " + render(s->body);
    case SessionType::Kind::Variant: {
      std::string out = "<";
      bool first = true;
      for (auto& [l, c] : s->cases) {
        out += (first ? "" : ", ") + l + ": " + render(c);
        first = false;
      }
      return out + ">";
    }
    case SessionType::Kind::Branch: {
      std::string out = "{";
      bool first = true;
      for (auto& m : s->methods) {
        out += first ? "" : ", ";
        first = false;
        out += render(m.result) + " " + m.name + "(" + (m.param.is_null() ? "" : render(m.param)) +
               "): " + render(m.cont);
      }
      return out + "}";
    }
  }
  return "?";
}

std::string render(const ValueType& t) {
  switch (t.kind) {
    case ValueType::Kind::Null: return "Null";
    case ValueType::Kind::Enum: return labels(t.labels);
    case ValueType::Kind::Session: return render(t.sess);
    case ValueType::Kind::LinkThis: return "linkthis";
    case ValueType::Kind::Link: return "link " + t.name;
    case ValueType::Kind::Object: return t.name + "[" + render(*t.fields) + "]";
  }
  return "?";
}

std::string render(const FieldTyping& f) {
  if (!f.variant) return record(f.rec);
  std::string out = "<";
  bool first = true;
  for (auto& [l, r] : f.cases) {
    out += (first ? "" : ", ") + l + ": " + record(r);
    first = false;
  }
  return out + ">";
}

std::string render(const Channel& c) {
  switch (c->kind) {
    case ChannelType::Kind::End: return "End";
    case ChannelType::Kind::Var: return c->var;
    case ChannelType::Kind::Rec: return "rec " + c->var + ". " + render(c->body);
    case ChannelType::Kind::Recv: return "?" + payload(c->payload) + "." + render(c->cont);
    case ChannelType::Kind::Send: return "!" + payload(c->payload) + "." + render(c->cont);
    case ChannelType::Kind::Offer:
    case ChannelType::Kind::Select: {
      std::string out = c->kind == ChannelType::Kind::Offer ? "&{" : "+{";
      bool first = true;
      for (auto& [l, k] : c->cases) {
        out += (first ? "" : ", ") + l + ": " + render(k);
        first = false;
      }
      return out + "}";
    }
  }
  return "?";
}

std::string render(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::Null: return "null";
    case Expr::Kind::Label: return e->name;
    case Expr::Kind::Var: return e->name;
    case Expr::Kind::New: return "new " + e->name + "()";
    case Expr::Kind::Swap: return e->name + " <-> " + unit(e->a);
    case Expr::Kind::Call: return e->name + "." + e->method + "(" + arg(e->a) + ")";
    case Expr::Kind::SelfCall: return e->name + "(" + arg(e->a) + ")";
    case Expr::Kind::Seq: return unit(e->a) + "; " + render(e->b);
    case Expr::Kind::Switch: {
      std::string out = "switch (" + render(e->a) + ") {";
      bool first = true;
      for (auto& [l, c] : e->cases) {
        out += (first ? " " : "; ") + l + ": " + unit(c);
        first = false;
      }
      return out + " }";
    }
    case Expr::Kind::While: return "while (" + render(e->a) + ") { " + render(e->b) + " }";
    case Expr::Kind::Spawn: return "spawn " + e->name + "." + e->method + "(" + arg(e->a) + ")";
    case Expr::Kind::Return: return "return(" + render(e->a) + ")";
    case Expr::Kind::ObjId: return "@" + e->name;
    case Expr::Kind::Endpoint: return e->name + std::string(1, e->polarity);
    case Expr::Kind::AccessName: return e->name;
  }
  return "?";
}

std::string render(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Null: return "null";
    case Value::Kind::Label: return v.name;
    case Value::Kind::Obj: return "@" + v.name;
    case Value::Kind::Endpoint: return v.name + std::string(1, v.polarity);
    case Value::Kind::Access: return v.name;
  }
  return "?";
}

std::string render(const Heap& h) {
  std::string out = "{";
  bool first = true;
  for (auto& [o, rec] : h) {
    out += (first ? "" : ", ") + o + " = " + rec.cls + "(";
    first = false;
    bool ff = true;
    for (auto& [f, v] : rec.fields) {
      out += (ff ? "" : ", ") + f + " = " + render(v);
      ff = false;
    }
    out += ")";
  }
  return out + "}";
}

}  // namespace mst
