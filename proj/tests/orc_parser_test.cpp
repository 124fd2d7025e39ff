#include "support.hpp"

#include <orcline/orc/ast.hpp>
#include <orcline/orc/parser.hpp>

#include <gtest/gtest.h>

using namespace orcline;
using namespace orcline::orc;

namespace {

Expr parsed(const std::string& src)
{
    auto r = parse_expr(src);
    EXPECT_TRUE(r.ok()) << src << "\n" << r.error_text();
    return r.ok() ? *r : stop();
}

Expr F(std::int64_t n) { return site("F", {lit(n)}); }

}  // namespace

TEST(OrcParser, SequentialBindsTighterThanParallel)
{
    const Expr want = par(seq(F(1), "x", site("G", {var("x")})), site("H", {lit(std::int64_t{2})}));
    EXPECT_EQ(parsed("F(1) >x> G(x) | H(2)"), want);
}

TEST(OrcParser, OtherwiseHasLowestPrecedence)
{
    const Expr want = otherwise(par(F(1), site("G", {lit(std::int64_t{2})})), site("H", {lit(std::int64_t{3})}));
    EXPECT_EQ(parsed("F(1) | G(2) ; H(3)"), want);
}

TEST(OrcParser, ParenthesesOverridePrecedence)
{
    EXPECT_EQ(parsed("(A() ; B()) <x< C()"), asym(otherwise(site("A"), site("B")), "x", site("C")));
}

TEST(OrcParser, AsymmetricSitsBetweenParallelAndOtherwise)
{
    EXPECT_EQ(parsed("A() | B() <x< C() | D()"), asym(par(site("A"), site("B")), "x", par(site("C"), site("D"))));
    EXPECT_EQ(parsed("A() <x< B() ; C()"), otherwise(asym(site("A"), "x", site("B")), site("C")));
}

TEST(OrcParser, Associativity)
{
    EXPECT_EQ(parsed("A() >x> B() >y> C()"), seq(site("A"), "x", seq(site("B"), "y", site("C"))));
    EXPECT_EQ(parsed("A() | B() | C()"), par(par(site("A"), site("B")), site("C")));
    EXPECT_EQ(parsed("A() ; B() ; C()"), otherwise(otherwise(site("A"), site("B")), site("C")));
    // Pruning groups to the left, so an outer binder scopes over the whole
    // left-hand chain.
    EXPECT_EQ(parsed("let(x, y) <x< A() <y< B()"),
              asym(asym(site("let", {var("x"), var("y")}), "x", site("A")), "y", site("B")));
}

TEST(OrcParser, AnonymousBindersAndBareNames)
{
    EXPECT_EQ(parsed("real_time >> sell"), seq(site("real_time"), site("sell")));
    EXPECT_EQ(parsed("A << B"), asym(site("A"), site("B")));
    EXPECT_EQ(parsed("0"), site("0"));
    EXPECT_EQ(parsed("0()"), site("0"));
    EXPECT_EQ(parsed("Load_shift"), site("Load_shift"));
}

TEST(OrcParser, Literals)
{
    EXPECT_EQ(parsed("let(-3, true, \"a b\", signal, (1, \"x\"), (2,))"),
              site("let", {lit(std::int64_t{-3}), lit(true), lit("a b"), lit(Value::signal()),
                           lit(Value::tuple({Value::integer(1), Value::string("x")})),
                           lit(Value::tuple({Value::integer(2)}))}));
}

TEST(OrcParser, CommentsAreIgnored)
{
    EXPECT_EQ(parsed("-- leading\nA() -- trailing\n| B()"), par(site("A"), site("B")));
}

TEST(OrcParser, ProgramDeclarations)
{
    auto r = parse_program(
        "site A returns 1, \"two\" after 3\n"
        "site Quiet silent\n"
        "def Twice(x) = A(x) | A(x)\n"
        "Twice(5) ; Quiet()\n");
    ASSERT_TRUE(r.ok()) << r.error_text();
    EXPECT_EQ(r->sites.at("A").responses, (std::vector<Value>{Value::integer(1), Value::string("two")}));
    EXPECT_EQ(r->sites.at("A").delay, 3);
    EXPECT_FALSE(r->sites.at("Quiet").responsive);
    EXPECT_EQ(r->definitions.at("Twice").params, std::vector<std::string>{"x"});
    EXPECT_EQ(r->goal, otherwise(def_call("Twice", {lit(std::int64_t{5})}), site("Quiet")));
}

TEST(OrcParser, UnboundVariableIsOnlyAWarning)
{
    auto r = parse_expr("F(x) | G(1) >y> H(y)");
    ASSERT_TRUE(r.ok());
    ASSERT_EQ(r.diagnostics.size(), 1u);
    EXPECT_EQ(r.diagnostics[0].severity, Severity::Warning);
    EXPECT_NE(r.diagnostics[0].message.find("'x'"), std::string::npos);
    EXPECT_EQ(r.diagnostics[0].span.line, 1u);
    EXPECT_EQ(r.diagnostics[0].span.column, 3u);
}

TEST(OrcParser, DefinitionArityMismatchIsAnError)
{
    auto r = parse_program("def D(a, b) = let(a, b)\nD(1)");
    EXPECT_FALSE(r.ok());
    EXPECT_TRUE(r.has_errors());
    EXPECT_NE(r.error_text().find("expects 2"), std::string::npos);
}

TEST(OrcParser, MalformedInputReportsSpans)
{
    for (const char* src : {"A() | | B()", "A() >x B()", "(A()", "A(", "A() B()", "?3", "site if returns 1\nA()",
                            "def D() = A()\ndef D() = B()\nD()", "", "let(\"open)"}) {
        auto r = parse_program(src);
        EXPECT_FALSE(r.ok()) << src;
        ASSERT_FALSE(r.diagnostics.empty()) << src;
        bool any_error = false;
        for (const auto& d : r.diagnostics) {
            any_error = any_error || d.severity == Severity::Error;
        }
        EXPECT_TRUE(any_error) << src;
    }
    auto r = parse_program("A() |\n  | B()");
    ASSERT_TRUE(r.has_errors());
    EXPECT_EQ(r.diagnostics.front().span.line, 2u);
    EXPECT_EQ(r.diagnostics.front().span.column, 3u);
}

TEST(OrcRender, MinimalParentheses)
{
    EXPECT_EQ(render(par(site("let", {lit(std::int64_t{1})}), site("let", {lit(std::int64_t{2})}))),
              "let(1) | let(2)");
    EXPECT_EQ(render(seq(site("A"), "x", seq(site("B"), "y", site("C")))), "A() >x> B() >y> C()");
    EXPECT_EQ(render(otherwise(otherwise(site("A"), site("B")), site("C"))), "A() ; B() ; C()");
    EXPECT_EQ(render(otherwise(site("A"), otherwise(site("B"), site("C")))), "A() ; (B() ; C())");
    EXPECT_EQ(render(seq(seq(site("A"), site("B")), site("C"))), "(A() >> B()) >> C()");
    EXPECT_EQ(render(seq(par(site("A"), site("B")), site("C"))), "(A() | B()) >> C()");
    EXPECT_EQ(render(asym(site("A"), "x", asym(site("B"), "y", site("C")))), "A() <x< (B() <y< C())");
}

TEST(OrcRender, ReparseMatchesOnFixedShapes)
{
    const std::vector<Expr> shapes = {
        seq(site("A"), "x", seq(site("B"), "y", site("C"))),
        otherwise(otherwise(site("A"), site("B")), site("C")),
        asym(asym(site("let", {var("x"), var("y")}), "x", par(site("A"), site("B"))), "y", site("C")),
        par(site("A"), par(site("B"), site("C"))),
        seq(otherwise(site("A"), site("B")), asym(site("C"), site("D"))),
    };
    for (const auto& e : shapes) {
        EXPECT_EQ(parsed(render(e)), e) << render(e);
    }
}

TEST(OrcRender, RandomRoundTrips)
{
    support::Rng rng(20240611);
    for (int i = 0; i < 500; ++i) {
        const Expr e = support::random_expr(rng, 5);
        const std::string minimal = render(e);
        const std::string full = render_fully_parenthesized(e);
        auto a = parse_expr(minimal);
        auto b = parse_expr(full);
        ASSERT_TRUE(a.ok()) << minimal << "\n" << a.error_text();
        ASSERT_TRUE(b.ok()) << full << "\n" << b.error_text();
        EXPECT_EQ(*a, e) << minimal;
        EXPECT_EQ(*a, *b) << minimal << "\n" << full;
    }
}

TEST(OrcRender, ProgramRoundTrip)
{
    const std::string src =
        "site A returns 1, (2, \"x\") after 2\n"
        "site B silent\n"
        "def Loop(n) = let(n) | Rtimer(1) >> Loop(n)\n"
        "def Pair(a, b) = let(a, b)\n"
        "Pair(1, 2) <x< A() ; B()\n";
    auto p = parse_program(src);
    ASSERT_TRUE(p.ok()) << p.error_text();
    auto again = parse_program(render(*p));
    ASSERT_TRUE(again.ok()) << render(*p) << again.error_text();
    EXPECT_EQ(*again, *p);
    EXPECT_EQ(render(*again), render(*p));
}

TEST(OrcAst, FreeVariablesMatchScopeOracle)
{
    EXPECT_EQ(free_vars(parsed("F(x) >x> G(x, y)")), (std::set<std::string>{"x", "y"}));
    EXPECT_EQ(free_vars(parsed("G(x) <x< F(x)")), (std::set<std::string>{"x"}));
    EXPECT_EQ(free_vars(parsed("G(x) <x< F(1)")), std::set<std::string>{});
    EXPECT_EQ(free_vars(parsed("F(z) >> G(z)")), (std::set<std::string>{"z"}));

    support::Rng rng(7);
    for (int i = 0; i < 300; ++i) {
        const Expr e = support::random_expr(rng, 5);
        std::set<std::string> want;
        support::mark_free(e, {}, want);
        EXPECT_EQ(free_vars(e), want) << render(e);
    }
}

TEST(OrcAst, SubstitutionRespectsShadowing)
{
    const Value nine = Value::integer(9);
    EXPECT_EQ(render(substitute(parsed("F(x) | G(x) >x> H(x)"), "x", nine)), "F(9) | G(9) >x> H(x)");
    // The outer pruning binder scopes over its whole left side.
    EXPECT_EQ(render(substitute(parsed("F(x) | G(x) >x> H(x) | K(x) <x< L(x)"), "x", nine)),
              "F(x) | G(x) >x> H(x) | K(x) <x< L(9)");
    EXPECT_EQ(render(substitute(parsed("F(x) >> G(x)"), "x", nine)), "F(9) >> G(9)");
}

TEST(OrcAst, SubstitutionProperties)
{
    support::Rng rng(99);
    const std::vector<Value> values{Value::integer(3), Value::string("v"), Value::boolean(false), Value::signal()};
    for (int i = 0; i < 300; ++i) {
        const Expr e = support::random_expr(rng, 5);
        for (const std::string x : {"x", "y", "free"}) {
            const Value& v = values[support::pick(rng, values.size())];
            const Expr once = substitute(e, x, v);
            EXPECT_EQ(free_vars(once).count(x), 0u) << render(e);
            EXPECT_EQ(substitute(once, x, v), once) << render(e);
            EXPECT_EQ(substitute(once, x, Value::integer(-1)), once) << render(e);
            if (!free_vars(e).count(x)) {
                EXPECT_TRUE(once.same_node(e)) << render(e);
            }
        }
    }
}
