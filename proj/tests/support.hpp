#pragma once

// Generators and independent oracles shared by the test binaries.

#include <orcline/fm/model.hpp>
#include <orcline/mts/model.hpp>
#include <orcline/orc/ast.hpp>
#include <orcline/orc/explore.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace support {

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------
// Orc expressions

/// Random source-level expression over a few sites, literals and binders.
/// Variables in argument position are drawn from the binders in scope,
/// plus an occasional free one.
inline orcline::orc::Expr random_expr(Rng& rng, int depth, std::vector<std::string> scope = {})
{
    using namespace orcline;
    using namespace orcline::orc;
    static const char* kSites[] = {"F", "G", "H", "let", "Signal", "0"};
    static const char* kBinders[] = {"x", "y", "z"};

    if (depth == 0 || pick(rng, 4) == 0) {
        const std::string s = kSites[pick(rng, std::size(kSites))];
        std::vector<Arg> args;
        if (s != "Signal" && s != "0") {
            const std::size_t n = pick(rng, 3);
            for (std::size_t i = 0; i < n; ++i) {
                switch (pick(rng, 5)) {
                    case 0: args.push_back(lit(static_cast<std::int64_t>(pick(rng, 7)) - 3)); break;
                    case 1: args.push_back(lit(pick(rng, 2) == 0)); break;
                    case 2: args.push_back(lit(Value::string("s" + std::to_string(pick(rng, 3))))); break;
                    case 3:
                        args.push_back(scope.empty() ? lit(Value::signal()) : var(scope[pick(rng, scope.size())]));
                        break;
                    default: args.push_back(var("free")); break;
                }
            }
        }
        return site(s, std::move(args));
    }
    const std::string x = pick(rng, 4) == 0 ? kAnonymousBinder : kBinders[pick(rng, std::size(kBinders))];
    auto bind = [&](std::vector<std::string> s) {
        if (!x.empty()) {
            s.push_back(x);
        }
        return s;
    };
    switch (pick(rng, 4)) {
        case 0: return par(random_expr(rng, depth - 1, scope), random_expr(rng, depth - 1, scope));
        case 1: return seq(random_expr(rng, depth - 1, scope), x, random_expr(rng, depth - 1, bind(scope)));
        case 2: return asym(random_expr(rng, depth - 1, bind(scope)), x, random_expr(rng, depth - 1, scope));
        default: return otherwise(random_expr(rng, depth - 1, scope), random_expr(rng, depth - 1, scope));
    }
}

/// Free variables computed by explicit scope tracking, independent of the
/// library's traversal.
inline void mark_free(const orcline::orc::Expr& e, std::vector<std::string> scope, std::set<std::string>& out)
{
    using namespace orcline::orc;
    auto args = [&](const std::vector<Arg>& as) {
        for (const auto& a : as) {
            if (const auto* v = std::get_if<Variable>(&a)) {
                bool bound = false;
                for (const auto& s : scope) {
                    bound = bound || s == v->name;
                }
                if (!bound) {
                    out.insert(v->name);
                }
            }
        }
    };
    if (const auto* c = e.as<SiteCall>()) {
        args(c->args);
    } else if (const auto* c = e.as<DefCall>()) {
        args(c->args);
    } else if (const auto* c = e.as<Parallel>()) {
        mark_free(c->left, scope, out);
        mark_free(c->right, scope, out);
    } else if (const auto* c = e.as<Otherwise>()) {
        mark_free(c->left, scope, out);
        mark_free(c->right, scope, out);
    } else if (const auto* c = e.as<Sequential>()) {
        mark_free(c->left, scope, out);
        auto inner = scope;
        if (!c->binder.empty()) {
            inner.push_back(c->binder);
        }
        mark_free(c->right, inner, out);
    } else if (const auto* c = e.as<Asymmetric>()) {
        auto inner = scope;
        if (!c->binder.empty()) {
            inner.push_back(c->binder);
        }
        mark_free(c->left, inner, out);
        mark_free(c->right, scope, out);
    }
}

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------
// Paths through an explored state space

struct PathEvent {
    orcline::orc::Event event;
    std::string site;  // site called or returning, empty for other events
};

/// The events along a maximal path, with the site name attached to each
/// return (looked up in the source state's pending calls).
inline std::vector<PathEvent> path_events(const orcline::orc::ExploredLts& lts, const std::vector<std::size_t>& path)
{
    using namespace orcline::orc;
    std::vector<PathEvent> out;
    for (std::size_t t : path) {
        const auto& tr = lts.transitions[t];
        PathEvent pe{tr.event, ""};
        if (const auto* c = std::get_if<event::Call>(&tr.event)) {
            pe.site = c->site;
        } else if (const auto* r = std::get_if<event::Return>(&tr.event)) {
            pe.site = lts.states[tr.source].pending.at(r->handle).site;
        }
        out.push_back(std::move(pe));
    }
    return out;
}

inline std::multiset<std::string> sites_called(const std::vector<PathEvent>& events)
{
    std::multiset<std::string> out;
    for (const auto& e : events) {
        if (std::holds_alternative<orcline::orc::event::Call>(e.event)) {
            out.insert(e.site);
        }
    }
    return out;
}

inline std::vector<orcline::Value> publications(const std::vector<PathEvent>& events)
{
    std::vector<orcline::Value> out;
    for (const auto& e : events) {
        if (const auto* p = std::get_if<orcline::orc::event::Publish>(&e.event)) {
            out.push_back(p->value);
        }
    }
    return out;
}

/// For every maximal path, how many transitions satisfy `counted`. Memoized
/// over the (acyclic) state graph, so it copes with many interleavings.
inline std::set<std::size_t> counts_over_paths(
    const orcline::orc::ExploredLts& lts,
    const std::function<bool(const orcline::orc::ExploredTransition&, const orcline::orc::ExecState&)>& counted)
{
    std::map<std::size_t, std::set<std::size_t>> memo;
    std::function<const std::set<std::size_t>&(std::size_t)> from = [&](std::size_t s) -> const std::set<std::size_t>& {
        if (auto it = memo.find(s); it != memo.end()) {
            return it->second;
        }
        std::set<std::size_t> out;
        if (lts.outgoing[s].empty()) {
            out.insert(0);
        }
        for (std::size_t t : lts.outgoing[s]) {
            const auto& tr = lts.transitions[t];
            const std::size_t add = counted(tr, lts.states[s]) ? 1 : 0;
            for (std::size_t n : from(tr.target)) {
                out.insert(n + add);
            }
        }
        return memo[s] = std::move(out);
    };
    return from(0);
}

/// Whether some maximal path fires `b` before any `a` has fired.
inline bool some_path_b_before_a(
    const orcline::orc::ExploredLts& lts,
    const std::function<bool(const orcline::orc::ExploredTransition&, const orcline::orc::ExecState&)>& a,
    const std::function<bool(const orcline::orc::ExploredTransition&, const orcline::orc::ExecState&)>& b)
{
    // Search the states reachable without firing `a`.
    std::set<std::size_t> seen{0};
    std::vector<std::size_t> work{0};
    while (!work.empty()) {
        const std::size_t s = work.back();
        work.pop_back();
        for (std::size_t t : lts.outgoing[s]) {
            const auto& tr = lts.transitions[t];
            if (a(tr, lts.states[s])) {
                continue;
            }
            if (b(tr, lts.states[s])) {
                return true;
            }
            if (seen.insert(tr.target).second) {
                work.push_back(tr.target);
            }
        }
    }
    return false;
}

inline bool calls_site(const orcline::orc::ExploredTransition& t, const std::string& site)
{
    const auto* c = std::get_if<orcline::orc::event::Call>(&t.event);
    return c && c->site == site;
}

inline bool returns_from(const orcline::orc::ExploredTransition& t, const orcline::orc::ExecState& source,
                         const std::string& site)
{
    const auto* r = std::get_if<orcline::orc::event::Return>(&t.event);
    return r && source.pending.at(r->handle).site == site;
}

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------
// Feature models

/// Random tree with up to `max_features` features and up to
/// `max_constraints` cross-tree constraints.
inline orcline::fm::FeatureModel random_feature_model(Rng& rng, std::size_t max_features, std::size_t max_constraints)
{
    using namespace orcline::fm;
    FeatureModel fm("R");
    std::vector<FeatureName> names{"R"};
    const std::size_t target = 1 + pick(rng, max_features);
    std::size_t next = 0;
    while (names.size() < target) {
        const FeatureName parent = names[pick(rng, names.size())];
        const std::size_t room = target - names.size();
        const std::size_t roll = pick(rng, 5);
        if (roll == 0 && room >= 2) {
            const std::size_t k = 2 + pick(rng, std::min<std::size_t>(room - 1, 2));
            std::vector<FeatureName> members;
            for (std::size_t i = 0; i < k; ++i) {
                members.push_back("f" + std::to_string(next++));
            }
            fm.add_alternative(parent, members);
            names.insert(names.end(), members.begin(), members.end());
        } else {
            const FeatureName f = "f" + std::to_string(next++);
            fm.add_child(parent, f, roll <= 2 ? NodeKind::Optional : NodeKind::Mandatory);
            names.push_back(f);
        }
    }
    if (names.size() >= 2) {
        const std::size_t nc = pick(rng, max_constraints + 1);
        for (std::size_t i = 0; i < nc; ++i) {
            const std::size_t a = pick(rng, names.size());
            std::size_t b = pick(rng, names.size() - 1);
            b = b >= a ? b + 1 : b;
            fm.add_constraint(pick(rng, 2) == 0 ? Constraint::Requires : Constraint::Excludes, names[a], names[b]);
        }
    }
    return fm;
}

/// Validity straight from the rules, without the library's validator.
inline bool oracle_valid(const orcline::fm::FeatureModel& fm, const orcline::fm::Configuration& c)
{
    using namespace orcline::fm;
    auto in = [&](const FeatureName& f) { return c.count(f) != 0; };
    if (!in(fm.root())) {
        return false;
    }
    for (const auto& [name, node] : fm.nodes()) {
        if (!node.parent) {
            continue;
        }
        if (in(name) && !in(*node.parent)) {
            return false;
        }
        if (node.kind == NodeKind::Mandatory && in(*node.parent) && !in(name)) {
            return false;
        }
    }
    std::map<std::string, int> group_count;
    std::map<std::string, FeatureName> group_parent;
    for (const auto& [name, node] : fm.nodes()) {
        if (node.kind == NodeKind::AltMember) {
            group_count[node.group] += in(name) ? 1 : 0;
            group_parent[node.group] = *node.parent;
        }
    }
    for (const auto& [g, n] : group_count) {
        if (n != (in(group_parent[g]) ? 1 : 0)) {
            return false;
        }
    }
    for (const auto& k : fm.constraints()) {
        if (k.kind == Constraint::Requires && in(k.a) && !in(k.b)) {
            return false;
        }
        if (k.kind == Constraint::Excludes && in(k.a) && in(k.b)) {
            return false;
        }
    }
    return true;
}

/// Filters all 2^n subsets.
inline std::set<orcline::fm::Configuration> brute_force_products(const orcline::fm::FeatureModel& fm)
{
    std::vector<std::string> names;
    for (const auto& [name, node] : fm.nodes()) {
        names.push_back(name);
    }
    std::set<orcline::fm::Configuration> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << names.size()); ++mask) {
        orcline::fm::Configuration c;
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (mask & (std::uint64_t{1} << i)) {
                c.insert(names[i]);
            }
        }
        if (oracle_valid(fm, c)) {
            out.insert(std::move(c));
        }
    }
    return out;
}

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------
// Modal transition systems

inline orcline::mts::Mts random_mts(Rng& rng, std::size_t max_states, std::size_t max_may_only,
                                    const std::vector<std::string>& actions = {"a", "b", "c"})
{
    orcline::mts::Mts m("random");
    const std::size_t n = 1 + pick(rng, max_states);
    for (std::size_t i = 0; i < n; ++i) {
        m.add_state("q" + std::to_string(i));
    }
    m.set_initial(0);
    for (const auto& a : actions) {
        m.add_action(a);
    }
    const std::size_t musts = pick(rng, 2 * n);
    for (std::size_t i = 0; i < musts; ++i) {
        m.add_must(pick(rng, n), actions[pick(rng, actions.size())], pick(rng, n));
    }
    const std::size_t mays = pick(rng, max_may_only + 1);
    for (std::size_t i = 0; i < mays && m.may_only().size() < max_may_only; ++i) {
        m.add_may(pick(rng, n), actions[pick(rng, actions.size())], pick(rng, n));
    }
    return m;
}

/// Greatest relation satisfying both product clauses, computed by
/// repeated in-place sweeps over an explicit pair set.
inline bool oracle_is_product(const orcline::mts::Lts& p, const orcline::mts::Mts& f)
{
    using orcline::mts::StateId;
    std::set<std::pair<StateId, StateId>> rel;
    for (StateId i = 0; i < p.state_count(); ++i) {
        for (StateId j = 0; j < f.state_count(); ++j) {
            rel.insert({i, j});
        }
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = rel.begin(); it != rel.end();) {
            const auto [qp, qf] = *it;
            bool ok = true;
            for (const auto& t : f.must()) {
                if (t.source != qf) {
                    continue;
                }
                bool matched = false;
                for (const auto& u : p.transitions()) {
                    matched = matched || (u.source == qp && u.action == t.action && rel.count({u.target, t.target}));
                }
                ok = ok && matched;
            }
            for (const auto& u : p.transitions()) {
                if (u.source != qp) {
                    continue;
                }
                bool matched = false;
                for (const auto& t : f.may()) {
                    matched = matched || (t.source == qf && t.action == u.action && rel.count({u.target, t.target}));
                }
                ok = ok && matched;
            }
            if (!ok) {
                it = rel.erase(it);
                changed = true;
            } else {
                ++it;
            }
        }
    }
    return rel.count({p.initial(), f.initial()}) != 0;
}

}  // namespace support
