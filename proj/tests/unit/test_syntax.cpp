#include <gtest/gtest.h>

#include "expect_error.hpp"
#include "generators.hpp"
#include "mst/parser.hpp"
#include "mst/render.hpp"

using namespace mst;
using namespace mst::testing;

namespace {

ObjectRecord rec(std::string cls, std::map<std::string, Value> fields = {}) { return {std::move(cls), std::move(fields)}; }

Session m_to(Session cont) { return SessionType::branch({{"m", ValueType::null(), ValueType::null(), cont}}); }

}  // namespace

TEST(Unfold, NonRecIsFixedPoint) {
  Session s = m_to(SessionType::end());
  EXPECT_EQ(unfold(s), s);
}

TEST(Unfold, OneSubstitution) {
  Session r = SessionType::rec("X", m_to(SessionType::variable("X")));
  Session u = unfold(r);
  ASSERT_TRUE(u->is_branch());
  EXPECT_TRUE(struct_equal(u, m_to(r)));
}

TEST(Unfold, IteratesNestedBinders) {
  Session inner = SessionType::rec("Y", m_to(SessionType::variable("Y")));
  Session r = SessionType::rec("X", inner);
  Session u = unfold(r);
  ASSERT_TRUE(u->is_branch());
  EXPECT_TRUE(struct_equal(u, m_to(inner)));
}

TEST(Unfold, ChannelTypes) {
  Channel r = ChannelType::rec("X", ChannelType::send(value_payload(ValueType::null()), ChannelType::variable("X")));
  Channel u = unfold(r);
  ASSERT_EQ(u->kind, ChannelType::Kind::Send);
  EXPECT_TRUE(struct_equal(u->cont, r));
}

TEST(Unfold, IdempotentOnRandomTypes) {
  Rng rng(7);
  for (int i = 0; i < 300; ++i) {
    Session s = random_session(rng, 5);
    EXPECT_TRUE(struct_equal(unfold(unfold(s)), unfold(s))) << render(s);
    EXPECT_FALSE(unfold(s)->is_rec());
    Channel c = random_channel(rng, 5);
    EXPECT_TRUE(struct_equal(unfold(unfold(c)), unfold(c))) << render(c);
  }
}

TEST(Key, AlphaEquivalentTypesShareKey) {
  Session a = SessionType::rec("X", m_to(SessionType::variable("X")));
  Session b = SessionType::rec("Z", m_to(SessionType::variable("Z")));
  EXPECT_EQ(key(a), key(b));
  EXPECT_NE(key(a), key(m_to(SessionType::end())));
}

TEST(Key, BranchOrderIgnored) {
  auto e = SessionType::end();
  Session a = SessionType::branch({{"m", ValueType::null(), ValueType::null(), e}, {"n", ValueType::null(), ValueType::null(), e}});
  Session b = SessionType::branch({{"n", ValueType::null(), ValueType::null(), e}, {"m", ValueType::null(), ValueType::null(), e}});
  EXPECT_EQ(key(a), key(b));
}

TEST(Contractive, GuardedAndUnguarded) {
  EXPECT_TRUE(contractive(SessionType::rec("X", m_to(SessionType::variable("X")))));
  EXPECT_FALSE(contractive(SessionType::rec("X", SessionType::variable("X"))));
  EXPECT_EQ(free_vars(m_to(SessionType::variable("Y"))), std::set<std::string>{"Y"});
}

TEST(Heap, ResolveDirect) {
  Heap h = {{"o", rec("C", {{"f", Value::null()}})}};
  EXPECT_EQ(resolve(h, Path{"o", {}}).cls, "C");
}

TEST(Heap, ResolveOneIndirection) {
  Heap h = {{"o", rec("C", {{"f", Value::obj("p")}})}, {"p", rec("D")}};
  EXPECT_EQ(resolve(h, Path{"o", {"f"}}).cls, "D");
}

TEST(Heap, ResolveThroughNullIsUndefined) {
  Heap h = {{"o", rec("C", {{"f", Value::null()}})}};
  EXPECT_MST_ERROR(resolve(h, Path{"o", {"f"}}), "PathUndefined");
  EXPECT_MST_ERROR(resolve(h, Path{"q", {}}), "PathUndefined");
}

TEST(Heap, WriteTopLevel) {
  Heap h = {{"o", rec("C", {{"f", Value::null()}})}};
  Heap w = write(h, Path{"o", {}}, "f", Value::label("L"));
  EXPECT_EQ(w.at("o").fields.at("f"), Value::label("L"));
}

TEST(Heap, WriteNested) {
  Heap h = {{"o", rec("C", {{"g", Value::obj("p")}})}, {"p", rec("D", {{"f", Value::null()}})}};
  Heap w = write(h, Path{"o", {"g"}}, "f", Value::label("L"));
  EXPECT_EQ(w.at("p").fields.at("f"), Value::label("L"));
  EXPECT_EQ(w.at("o"), h.at("o"));
}

TEST(Heap, WriteMissingField) {
  Heap h = {{"o", rec("C", {{"f", Value::null()}})}};
  EXPECT_MST_ERROR(write(h, Path{"o", {}}, "g", Value::label("L")), "NoSuchField");
}

TEST(Heap, ReadAfterWrite) {
  Heap h = {{"o", rec("C", {{"f", Value::obj("p")}, {"g", Value::null()}})},
            {"p", rec("D", {{"x", Value::null()}})}};
  Heap w = write(h, Path{"o", {"f"}}, "x", Value::label("Z"));
  EXPECT_EQ(resolve(w, Path{"o", {"f"}}).fields.at("x"), Value::label("Z"));
  EXPECT_EQ(resolve(w, Path{"o", {}}), resolve(h, Path{"o", {}}));
}

TEST(Heap, SplitRootWithChild) {
  Heap h = {{"o", rec("C", {{"f", Value::obj("o2")}})}, {"o2", rec("D")}, {"p", rec("E")}};
  auto [down, up] = split_heap(h, "o");
  EXPECT_EQ(down.size(), 2u);
  EXPECT_TRUE(down.count("o") && down.count("o2"));
  EXPECT_EQ(up.size(), 1u);
  EXPECT_TRUE(up.count("p"));
  EXPECT_EQ(heap_union(down, up), h);
  EXPECT_EQ(roots(down), std::set<std::string>{"o"});
}

TEST(Heap, SplitNonRoot) {
  Heap h = {{"o", rec("C", {{"f", Value::obj("o2")}})}, {"o2", rec("D")}};
  EXPECT_MST_ERROR(split_heap(h, "o2"), "NotARoot");
}

TEST(Heap, SplitSingleton) {
  Heap h = {{"o", rec("C")}};
  auto [down, up] = split_heap(h, "o");
  EXPECT_EQ(down, h);
  EXPECT_TRUE(up.empty());
}

TEST(Heap, SplitIncomplete) {
  Heap h = {{"o", rec("C", {{"f", Value::obj("gone")}})}};
  EXPECT_MST_ERROR(split_heap(h, "o"), "IncompleteHeap");
  EXPECT_FALSE(complete(h));
}

TEST(Heap, RenameIdentityAndRoundTrip) {
  Heap h = {{"o", rec("C", {{"f", Value::obj("o2")}})}, {"o2", rec("D")}};
  EXPECT_EQ(rename_heap(h, {{"o", "o"}, {"o2", "o2"}}), h);
  Heap r = rename_heap(h, {{"o", "a"}, {"o2", "b"}});
  Heap expected = {{"a", rec("C", {{"f", Value::obj("b")}})}, {"b", rec("D")}};
  EXPECT_EQ(r, expected);
  EXPECT_EQ(rename_heap(r, {{"a", "o"}, {"b", "o2"}}), h);
}

TEST(Heap, RenameNotInjective) {
  Heap h = {{"o", rec("C")}, {"o2", rec("D")}};
  EXPECT_MST_ERROR(rename_heap(h, {{"o", "a"}, {"o2", "a"}}), "NotInjective");
}

TEST(Heap, SplitUnionReconstructsRandomForests) {
  Rng rng(11);
  for (int n = 0; n < 100; ++n) {
    Heap h;
    int size = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < size; ++i) {
      ObjectRecord r{"C", {{"f", Value::null()}, {"g", Value::null()}}};
      // each object may own up to two earlier, still unowned objects
      for (const char* f : {"f", "g"}) {
        auto rs = roots(h);
        if (rs.empty() || rng() % 2) continue;
        auto it = rs.begin();
        std::advance(it, rng() % rs.size());
        r.fields[f] = Value::obj(*it);
      }
      h["o" + std::to_string(i)] = r;
    }
    ASSERT_TRUE(complete(h));
    for (auto& root : roots(h)) {
      auto [down, up] = split_heap(h, root);
      EXPECT_EQ(heap_union(down, up), h);
      EXPECT_EQ(down.size(), descendants(h, root).size());
    }
  }
}

TEST(Expr, SubstituteReplacesParameter) {
  ExprPtr e = ex::seq(ex::swap("f", ex::var("x")), ex::var("x"));
  ExprPtr r = substitute(e, "x", ex::null());
  EXPECT_TRUE(expr_equal(r, ex::seq(ex::swap("f", ex::null()), ex::null())));
}
