#include "support.hpp"

#include <orcline/orc/explore.hpp>
#include <orcline/orc/parser.hpp>

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace orcline;
using namespace orcline::orc;

namespace {

Program program(const std::string& src)
{
    auto r = parse_program(src);
    EXPECT_TRUE(r.ok()) << src << "\n" << r.error_text();
    return r.ok() ? *r : Program{};
}

Program fixture(const std::string& name)
{
    std::ifstream in(std::string(ORCLINE_FIXTURES) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return program(ss.str());
}

ValueBag bag(std::initializer_list<Value> vs)
{
    ValueBag b(vs);
    std::sort(b.begin(), b.end());
    return b;
}

Value str(const char* s) { return Value::string(s); }

}  // namespace

TEST(OrcExplore, ParallelLetsPublishBothInEitherOrder)
{
    const auto lts = explore(program("let(1) | let(2)"));
    EXPECT_FALSE(lts.truncated);
    EXPECT_EQ(lts.outcomes.complete, (std::set<ValueBag>{bag({Value::integer(1), Value::integer(2)})}));
    EXPECT_TRUE(lts.outcomes.truncated.empty());

    std::set<std::vector<Value>> orders;
    for_each_maximal_path(lts, [&](const std::vector<std::size_t>& path) {
        orders.insert(support::publications(support::path_events(lts, path)));
        return true;
    });
    EXPECT_EQ(orders, (std::set<std::vector<Value>>{{Value::integer(1), Value::integer(2)},
                                                     {Value::integer(2), Value::integer(1)}}));
}

TEST(OrcExplore, ZeroHasOneEmptyOutcome)
{
    const auto lts = explore(program("0()"));
    EXPECT_EQ(lts.outcomes.complete, std::set<ValueBag>{ValueBag{}});
    EXPECT_EQ(for_each_maximal_path(lts, [](const auto&) { return true; }), 1u);
}

TEST(OrcExplore, StatesAreCanonicalAndDistinct)
{
    const auto lts = explore(program("F() | G() | H()"));
    std::set<std::string> keys;
    for (const auto& s : lts.states) {
        EXPECT_EQ(state_key(canonicalize(s)), state_key(s));
        EXPECT_TRUE(keys.insert(state_key(s)).second);
    }
    // The interleavings of three calls meet in shared states: after all three
    // calls there is only one state, whatever the order.
    std::size_t all_called = 0;
    for (const auto& s : lts.states) {
        all_called += s.pending.size() == 3 ? 1 : 0;
    }
    EXPECT_EQ(all_called, 1u);
}

TEST(OrcExplore, CanonicalizationIgnoresHandleNumbers)
{
    ExecState a;
    a.expr = par(pending(7), pending(3));
    a.pending[7] = PendingCall{"F", {}, 0, Value::signal()};
    a.pending[3] = PendingCall{"G", {}, 0, Value::signal()};
    a.next_handle = 8;
    ExecState b;
    b.expr = par(pending(0), pending(1));
    b.pending[0] = PendingCall{"F", {}, 0, Value::signal()};
    b.pending[1] = PendingCall{"G", {}, 0, Value::signal()};
    b.next_handle = 2;
    EXPECT_EQ(state_key(canonicalize(a)), state_key(canonicalize(b)));
    EXPECT_EQ(canonicalize(a).next_handle, 2u);

    ExecState c = b;
    c.pending[1].site = "H";
    EXPECT_NE(state_key(canonicalize(c)), state_key(canonicalize(b)));
}

TEST(OrcExplore, TransitionLabelsUseSourceHandles)
{
    const auto lts = explore(program("F() | G()"));
    for (const auto& t : lts.transitions) {
        if (const auto* r = std::get_if<event::Return>(&t.event)) {
            EXPECT_EQ(lts.states[t.source].pending.count(r->handle), 1u);
        }
        if (const auto* c = std::get_if<event::Call>(&t.event)) {
            EXPECT_EQ(lts.states[t.source].pending.count(c->handle), 0u);
        }
    }
}

TEST(OrcExplore, StateBoundTruncates)
{
    Bounds b;
    b.max_states = 5;
    const auto lts = explore(program("F() | G() | H()"), b);
    EXPECT_TRUE(lts.truncated);
    EXPECT_LE(lts.states.size(), 5u);
    bool unexpanded = false;
    for (auto s : lts.status) {
        unexpanded = unexpanded || s == StateStatus::Unexpanded;
    }
    EXPECT_TRUE(unexpanded);
    EXPECT_TRUE(lts.outcomes.complete.empty());
    EXPECT_FALSE(lts.outcomes.truncated.empty());
    EXPECT_THROW(publications(program("F() | G() | H()"), b), BoundExceeded);
}

TEST(OrcExplore, DepthBoundTruncates)
{
    Bounds b;
    b.max_depth = 3;
    const auto lts = explore(fixture("loop.orc"), b);
    EXPECT_TRUE(lts.truncated);
    EXPECT_TRUE(lts.outcomes.complete.empty());
    std::set<ValueBag> want{bag({Value::integer(1), Value::integer(1), Value::integer(1)})};
    EXPECT_EQ(lts.outcomes.truncated, want);
}

TEST(OrcExplore, ToLtsMirrorsGraph)
{
    const auto lts = explore(program("let(1) | let(2)"));
    const auto flat = lts.to_lts("p");
    EXPECT_EQ(flat.states().size(), lts.states.size());
    EXPECT_EQ(flat.initial(), 0u);
    EXPECT_EQ(flat.transitions().size(), lts.transitions.size());
    EXPECT_TRUE(flat.actions().count("!1"));
    EXPECT_TRUE(flat.actions().count("tau") == 0);
}

TEST(OrcExplore, RunPublicationsAreAmongExploredOutcomes)
{
    support::Rng rng(2718);
    for (int i = 0; i < 80; ++i) {
        const Program p = program_of(support::random_expr(rng, 3));
        Bounds b;
        b.max_states = 20000;
        const auto lts = explore(p, b);
        if (lts.truncated) {
            continue;
        }
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const Trace t = run(p, SchedulerPolicy::seeded(seed));
            ASSERT_EQ(t.status, RunStatus::Halted);
            ValueBag got(t.publications.begin(), t.publications.end());
            std::sort(got.begin(), got.end());
            EXPECT_TRUE(lts.outcomes.complete.count(got)) << render(p.goal) << " seed " << seed;
        }
    }
}

TEST(OrcExplore, OtherwiseNeverRunsRightAfterLeftPublishes)
{
    const auto lts = explore(program("Signal() ; X()"));
    for (const auto& t : lts.transitions) {
        if (const auto* c = std::get_if<event::Call>(&t.event)) {
            EXPECT_NE(c->site, "X");
        }
    }
    EXPECT_EQ(lts.outcomes.complete, std::set<ValueBag>{bag({Value::signal()})});

    const auto fallback = explore(program("if(false) ; Signal()"));
    EXPECT_EQ(fallback.outcomes.complete, std::set<ValueBag>{bag({Value::signal()})});
}

TEST(OrcExplore, TimersPublishInDueOrder)
{
    const auto lts = explore(fixture("timers.orc"));
    EXPECT_EQ(lts.outcomes.complete, std::set<ValueBag>{bag({Value::integer(1), Value::integer(2)})});
    for_each_maximal_path(lts, [&](const std::vector<std::size_t>& path) {
        EXPECT_EQ(support::publications(support::path_events(lts, path)),
                  (std::vector<Value>{Value::integer(2), Value::integer(1)}));
        return true;
    });
}

TEST(OrcExplore, DemandResponseReleasesOneTupleAfterBothPairs)
{
    const auto lts = explore(fixture("dr.orc"));
    ASSERT_FALSE(lts.truncated);
    std::set<ValueBag> want;
    for (const char* ls : {"real_time", "day_ahead"}) {
        for (const char* ag : {"sell", "buy"}) {
            want.insert(bag({Value::tuple({str(ls), str(ag)})}));
        }
    }
    EXPECT_EQ(lts.outcomes.complete, want);

    const std::set<std::string> pair_a{"real_time", "day_ahead"};
    const std::set<std::string> pair_b{"sell", "buy"};
    const std::size_t paths = for_each_maximal_path(lts, [&](const std::vector<std::size_t>& path) {
        const auto events = support::path_events(lts, path);
        bool returned_a = false;
        bool returned_b = false;
        int tuples = 0;
        for (const auto& e : events) {
            if (std::holds_alternative<event::Return>(e.event)) {
                returned_a = returned_a || pair_a.count(e.site);
                returned_b = returned_b || pair_b.count(e.site);
            }
            if (const auto* p = std::get_if<event::Publish>(&e.event)) {
                EXPECT_TRUE(p->value.is_tuple());
                EXPECT_EQ(p->value.as_tuple().size(), 2u);
                EXPECT_TRUE(returned_a && returned_b);
                ++tuples;
            }
        }
        EXPECT_EQ(tuples, 1);
        return !::testing::Test::HasFailure();
    });
    EXPECT_GT(paths, 0u);
}

TEST(OrcExplore, DemandResponseWithoutMarketPublishesNothing)
{
    Program p = fixture("dr.orc");
    p.sites["sell"].responsive = false;
    p.sites["buy"].responsive = false;
    const auto lts = explore(p);
    EXPECT_EQ(lts.outcomes.complete, std::set<ValueBag>{ValueBag{}});
}

TEST(OrcExplore, AlternativeChoosesExactlyOne)
{
    const auto lts = explore(fixture("dr_alt.orc"));
    EXPECT_EQ(lts.outcomes.complete,
              (std::set<ValueBag>{bag({str("Agreement")}), bag({str("Load_shift")})}));
    const auto chosen = support::counts_over_paths(lts, [](const auto& t, const auto&) {
        return support::calls_site(t, "Load_shift") || support::calls_site(t, "Agreement");
    });
    EXPECT_EQ(chosen, std::set<std::size_t>{1});

    const auto mutex = explore(fixture("mutex.orc"));
    EXPECT_EQ(mutex.outcomes.complete, (std::set<ValueBag>{bag({str("M")}), bag({str("N")})}));
}
