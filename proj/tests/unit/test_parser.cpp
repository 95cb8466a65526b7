#include <gtest/gtest.h>

#include "corpus.hpp"
#include "expect_error.hpp"
#include "generators.hpp"
#include "mst/parser.hpp"
#include "mst/render.hpp"
#include "mst/subtyping.hpp"

using namespace mst;
using namespace mst::testing;

namespace {

const MethodDecl& method_of(const Program& p, const std::string& cls, const std::string& m) {
  const MethodDecl* d = p.cls_or_throw(cls).method(m);
  if (!d) throw std::runtime_error("no method " + m);
  return *d;
}

// access point names only resolve inside a program; standalone expressions keep them as variables
ExprPtr bind_access(const ExprPtr& e, const Program& p) {
  if (!e) return e;
  if (e->kind == Expr::Kind::Var && p.access_point(e->name)) return ex::with_line(ex::access(e->name), e->line);
  auto copy = std::make_shared<Expr>(*e);
  copy->a = bind_access(e->a, p);
  copy->b = bind_access(e->b, p);
  for (auto& [l, k] : copy->cases) k = bind_access(k, p);
  return copy;
}

}  // namespace

TEST(Parser, MinimalClass) {
  Program p = parse_program("class C { session {} f; }");
  ASSERT_EQ(p.classes.size(), 1u);
  const ClassDecl& c = p.cls_or_throw("C");
  ASSERT_TRUE(c.session->is_branch());
  EXPECT_TRUE(c.session->methods.empty());
  EXPECT_EQ(c.fields, std::vector<std::string>{"f"});
}

TEST(Parser, WhereClausesFoldToRecursiveTypes) {
  Program p = load_corpus("file.mst");
  const TypeDecl& t = p.types.at("FileReadToEnd");
  EXPECT_EQ(t.states.size(), 4u);
  Session init = unfold(t.type);
  ASSERT_TRUE(init->is_branch());
  ASSERT_EQ(init->methods.size(), 1u);
  EXPECT_EQ(init->methods[0].name, "open");
  EXPECT_TRUE(free_vars(t.type).empty());
  EXPECT_TRUE(contractive(t.type));
  // Open -> Read -> Open closes the loop
  Session open = unfold(init->methods[0].cont)->cases.at("OK");
  Session read = unfold(unfold(open)->methods[0].cont)->cases.at("TRUE");
  EXPECT_TRUE(equivalent(unfold(read)->methods[0].cont, open));
}

TEST(Parser, AssignmentSugar) {
  Program p = parse_program("class D { session {} } class C { session { Null m(Null): {} } f; m(x) { f = new D() } }");
  ExprPtr expected = ex::seq(ex::swap("f", ex::make_new("D")), ex::null());
  EXPECT_TRUE(expr_equal(method_of(p, "C", "m").body, expected)) << render(method_of(p, "C", "m").body);
}

TEST(Parser, BareFieldAndCallSugar) {
  Program p = parse_program("class C { session { Null m(Null): {} } f; m(x) { f.go(); f } }");
  ExprPtr expected = ex::seq(ex::call("f", "go", ex::null()), ex::swap("f", ex::null()));
  EXPECT_TRUE(expr_equal(method_of(p, "C", "m").body, expected)) << render(method_of(p, "C", "m").body);
}

TEST(Parser, ParameterStaysVariable) {
  Program p = parse_program("class C { session { Null m(Null): {} } f; m(x) { f = x } }");
  ExprPtr expected = ex::seq(ex::swap("f", ex::var("x")), ex::null());
  EXPECT_TRUE(expr_equal(method_of(p, "C", "m").body, expected));
}

TEST(Parser, ChannelEnd) {
  Channel c = parse_channel_type("End");
  EXPECT_EQ(c->kind, ChannelType::Kind::End);
  EXPECT_EQ(render(c), "End");
}

TEST(Parser, RecursiveOffer) {
  Channel c = parse_channel_type("rec X. &{CLOSE: X}");
  ASSERT_EQ(c->kind, ChannelType::Kind::Rec);
  ASSERT_EQ(c->body->kind, ChannelType::Kind::Offer);
  ASSERT_EQ(c->body->cases.size(), 1u);
  EXPECT_EQ(c->body->cases.at("CLOSE")->kind, ChannelType::Kind::Var);
}

TEST(Parser, FileReadChannel) {
  Program p = load_corpus("remote_v1.mst");
  Channel c = p.channels.at("FileReadCh");
  EXPECT_TRUE(free_vars(c).empty());
  Channel top = unfold(c);
  ASSERT_EQ(top->kind, ChannelType::Kind::Offer);
  EXPECT_EQ(top->cases.size(), 2u);
  Channel after_open = unfold(top->cases.at("OPEN"));
  ASSERT_EQ(after_open->kind, ChannelType::Kind::Recv);
  Channel reply = unfold(after_open->cont);
  ASSERT_EQ(reply->kind, ChannelType::Kind::Select);
  Channel open = unfold(reply->cases.at("OK"));
  ASSERT_EQ(open->kind, ChannelType::Kind::Offer);
  Channel hasnext = unfold(open->cases.at("HASNEXT"));
  ASSERT_EQ(hasnext->kind, ChannelType::Kind::Select);
  Channel can_read = unfold(hasnext->cases.at("TRUE"));
  ASSERT_EQ(can_read->kind, ChannelType::Kind::Offer);
  EXPECT_EQ(can_read->cases.size(), 2u);
  Channel must_close = unfold(hasnext->cases.at("FALSE"));
  ASSERT_EQ(must_close->kind, ChannelType::Kind::Offer);
  EXPECT_EQ(must_close->cases.size(), 1u);
}

TEST(Parser, Errors) {
  EXPECT_MST_ERROR(parse_program("class C { session { Null m(Null): } }"), "SyntaxError");
  EXPECT_MST_ERROR(parse_program("class C { session Nowhere }"), "UnboundStateName");
  EXPECT_MST_ERROR(parse_session_type("rec X. X"), "NonContractiveType");
  EXPECT_MST_ERROR(parse_channel_type("rec X. X"), "NonContractiveType");
  EXPECT_MST_ERROR(parse_program("class C { session {} } class C { session {} }"), "DuplicateClass");
}

TEST(Render, EndAndEmptyBranch) {
  EXPECT_EQ(render(ChannelType::end()), "End");
  EXPECT_EQ(render(SessionType::end()), "{}");
}

TEST(Render, RoundTripFileInit) {
  Program p = load_corpus("file.mst");
  Session s = p.cls_or_throw("File").session;
  Session again = parse_session_type(render(s));
  EXPECT_TRUE(struct_equal(again, s)) << render(s);
  EXPECT_EQ(render(again), render(s));
}

TEST(Render, RoundTripRandomTypes) {
  Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    Session s = random_session(rng, 5);
    EXPECT_TRUE(struct_equal(parse_session_type(render(s)), s)) << render(s);
    Channel c = random_channel(rng, 5);
    EXPECT_TRUE(struct_equal(parse_channel_type(render(c)), c)) << render(c);
    ValueType v = random_value_type(rng, 3);
    EXPECT_EQ(key(parse_value_type(render(v))), key(v)) << render(v);
  }
}

TEST(Render, RoundTripCorpusBodies) {
  for (auto& rel : monitored_corpus()) {
    Program p = load_corpus(rel);
    for (auto& name : p.class_order)
      for (auto& m : p.classes.at(name).methods) {
        ExprPtr again = bind_access(parse_expr(render(m.body)), p);
        EXPECT_TRUE(expr_equal(again, m.body)) << rel << " " << name << "." << m.name << ": " << render(m.body);
      }
  }
}

TEST(Render, SwapNullReparses) {
  ExprPtr e = ex::seq(ex::swap("f", ex::null()), ex::null());
  EXPECT_TRUE(expr_equal(parse_expr(render(e)), e)) << render(e);
}

TEST(Parser, FieldTypingForms) {
  Program p = load_corpus("file.mst");
  FieldTyping r = parse_field_typing("(Null f, {A} g)", &p);
  EXPECT_FALSE(r.variant);
  EXPECT_TRUE(r.rec.at("g").is_enum());
  FieldTyping v = parse_field_typing("<OK: (Null f), ERROR: (Null f)>", &p);
  EXPECT_TRUE(v.variant);
  EXPECT_EQ(v.labels(), (LabelSet{"OK", "ERROR"}));
}

TEST(Parser, MultipleFilesShareNamespace) {
  Program p = parse_files({{"a.mst", "channel Ch = !{A}.End;"}, {"b.mst", "access <Ch> n;"}});
  ASSERT_NE(p.access_point("n"), nullptr);
  EXPECT_TRUE(struct_equal(p.access_point("n")->protocol, p.channels.at("Ch")));
}
