#pragma once

#include <orcline/diagnostics.hpp>
#include <orcline/mts/model.hpp>
#include <orcline/orc/ast.hpp>
#include <orcline/orc/parser.hpp>
#include <orcline/orc/semantics.hpp>

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace orcline::orc {

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------
// Canonical states. Handles are renumbered by first occurrence in a
// left-to-right walk of the expression so that states differing only in
// handle names coincide.

namespace detail {

inline void handle_order(const Expr& e, std::vector<Handle>& order)
{
    if (const auto* n = e.as<Pending>()) {
        order.push_back(n->handle);
    } else if (const auto* n = e.as<Parallel>()) {
        handle_order(n->left, order);
        handle_order(n->right, order);
    } else if (const auto* n = e.as<Sequential>()) {
        handle_order(n->left, order);
        handle_order(n->right, order);
    } else if (const auto* n = e.as<Asymmetric>()) {
        handle_order(n->left, order);
        handle_order(n->right, order);
    } else if (const auto* n = e.as<Otherwise>()) {
        handle_order(n->left, order);
        handle_order(n->right, order);
    }
}

inline Expr rename_handles(const Expr& e, const std::map<Handle, Handle>& to)
{
    if (const auto* n = e.as<Pending>()) {
        return pending(to.at(n->handle));
    }
    if (const auto* n = e.as<Parallel>()) {
        return par(rename_handles(n->left, to), rename_handles(n->right, to));
    }
    if (const auto* n = e.as<Sequential>()) {
        return seq(rename_handles(n->left, to), n->binder, n->right);
    }
    if (const auto* n = e.as<Asymmetric>()) {
        return asym(rename_handles(n->left, to), n->binder, rename_handles(n->right, to));
    }
    if (const auto* n = e.as<Otherwise>()) {
        return otherwise(rename_handles(n->left, to), n->right);
    }
    return e;
}

}  // namespace detail

inline ExecState canonicalize(const ExecState& s)
{
    std::vector<Handle> order;
    detail::handle_order(s.expr, order);
    std::map<Handle, Handle> to;
    for (Handle h : order) {
        to.emplace(h, static_cast<Handle>(to.size()));
    }
    for (const auto& [h, call] : s.pending) {
        to.emplace(h, static_cast<Handle>(to.size()));
    }
    ExecState out;
    out.expr = detail::rename_handles(s.expr, to);
    for (const auto& [h, call] : s.pending) {
        out.pending.emplace(to.at(h), call);
    }
    out.clock = s.clock;
    out.def_depth = s.def_depth;
    out.response_cursor = s.response_cursor;
    out.next_handle = static_cast<Handle>(to.size());
    return out;
}

/// Text that identifies a canonical state. Two canonical states are equal
/// exactly when their keys are.
inline std::string state_key(const ExecState& s)
{
    std::string key = render(s.expr);
    key += " @";
    key += std::to_string(s.clock);
    for (const auto& [h, call] : s.pending) {
        key += " ?" + std::to_string(h) + "=" + call.site + "(";
        for (const auto& a : call.args) {
            key += a.to_string() + ",";
        }
        key += ")";
        key += call.due ? "@" + std::to_string(*call.due) : "@never";
        key += "->" + call.response.to_string();
    }
    for (const auto& [name, depth] : s.def_depth) {
        key += " d:" + name + "=" + std::to_string(depth);
    }
    for (const auto& [name, cursor] : s.response_cursor) {
        key += " r:" + name + "=" + std::to_string(cursor);
    }
    return key;
}

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------

enum class StateStatus {
    Expanded,        // has outgoing transitions
    Halted,          // quiescent
    DepthTruncated,  // quiescent because a definition hit the depth bound
    Unexpanded       // never expanded: the state bound was reached first
};

struct ExploredTransition {
    std::size_t source = 0;
    Event event;
    std::size_t target = 0;
    int rule = 0;
    Position position;
    std::optional<int> hidden_by;
};

/// Publication multisets (each sorted) over all maximal paths.
struct Outcomes {
    std::set<ValueBag> complete;   // paths ending in a halted state
    std::set<ValueBag> truncated;  // paths cut off by a bound
};

struct ExploredLts {
    std::vector<ExecState> states;  // canonical; index 0 is the initial state
    std::vector<StateStatus> status;
    std::vector<ExploredTransition> transitions;
    std::vector<std::vector<std::size_t>> outgoing;  // transition indices per state
    bool truncated = false;
    Outcomes outcomes;

    bool is_terminal(std::size_t s) const { return outgoing[s].empty(); }

    /// The explored graph as an LTS over event labels, states named s0, s1, ...
    mts::Lts to_lts(const std::string& name = "explored") const
    {
        mts::Lts lts(name);
        for (std::size_t i = 0; i < states.size(); ++i) {
            lts.add_state("s" + std::to_string(i));
        }
        if (!states.empty()) {
            lts.set_initial(0);
        }
        for (const auto& t : transitions) {
            lts.add_transition(t.source, event_label(t.event), t.target);
        }
        return lts;
    }
};

namespace detail {

inline ValueBag bag_with(ValueBag bag, const Value& v)
{
    bag.insert(std::upper_bound(bag.begin(), bag.end(), v), v);
    return bag;
}

inline void compute_outcomes(ExploredLts& lts)
{
    const std::size_t n = lts.states.size();
    std::vector<Outcomes> memo(n);
    std::vector<char> mark(n, 0);  // 0 new, 1 on stack, 2 done

    // Iterative post-order walk; the explored graph is acyclic because every
    // non-tick step consumes a redex and ticks advance the clock.
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    mark[0] = 1;
    while (!stack.empty()) {
        auto& [s, next] = stack.back();
        if (next < lts.outgoing[s].size()) {
            const std::size_t t = lts.outgoing[s][next++];
            const std::size_t dst = lts.transitions[t].target;
            if (mark[dst] == 1) {
                throw Error("explored state graph contains a cycle");
            }
            if (mark[dst] == 0) {
                mark[dst] = 1;
                stack.emplace_back(dst, 0);
            }
            continue;
        }
        Outcomes& out = memo[s];
        if (lts.outgoing[s].empty()) {
            if (lts.status[s] == StateStatus::Halted) {
                out.complete.insert(ValueBag{});
            } else {
                out.truncated.insert(ValueBag{});
            }
        }
        for (std::size_t t : lts.outgoing[s]) {
            const auto& tr = lts.transitions[t];
            const Outcomes& sub = memo[tr.target];
            const auto* pub = std::get_if<event::Publish>(&tr.event);
            for (const auto& bag : sub.complete) {
                out.complete.insert(pub ? bag_with(bag, pub->value) : bag);
            }
            for (const auto& bag : sub.truncated) {
                out.truncated.insert(pub ? bag_with(bag, pub->value) : bag);
            }
        }
        mark[s] = 2;
        stack.pop_back();
    }
    lts.outcomes = std::move(memo[0]);
}

}  // namespace detail

/// Breadth-first closure of `step` from the goal. States are deduplicated by
/// canonical form; transition labels use the handle numbering of their source
/// state. When `max_states` is reached the remaining frontier stays
/// unexpanded and the result is flagged truncated.
inline ExploredLts explore(const Program& program, const Bounds& bounds = {})
{
    ExploredLts lts;
    std::unordered_map<std::string, std::size_t> index;

    auto intern = [&](ExecState s) -> std::pair<std::size_t, bool> {
        ExecState c = canonicalize(s);
        std::string key = state_key(c);
        auto [it, inserted] = index.emplace(std::move(key), lts.states.size());
        if (inserted) {
            lts.states.push_back(std::move(c));
            lts.status.push_back(StateStatus::Unexpanded);
            lts.outgoing.emplace_back();
        }
        return {it->second, inserted};
    };

    intern(initial_state(program));
    for (std::size_t s = 0; s < lts.states.size(); ++s) {
        StepResult enabled = step(program, lts.states[s], bounds.max_depth);
        if (enabled.quiescent()) {
            lts.status[s] = enabled.depth_blocked ? StateStatus::DepthTruncated : StateStatus::Halted;
            if (enabled.depth_blocked) {
                lts.truncated = true;
            }
            continue;
        }
        // Only expand when every successor fits under the bound.
        std::size_t fresh = 0;
        std::vector<ExecState> targets;
        targets.reserve(enabled.transitions.size());
        for (auto& t : enabled.transitions) {
            targets.push_back(canonicalize(t.target));
            if (!index.count(state_key(targets.back()))) {
                ++fresh;
            }
        }
        if (lts.states.size() + fresh > bounds.max_states) {
            lts.truncated = true;
            break;
        }
        lts.status[s] = StateStatus::Expanded;
        for (std::size_t i = 0; i < enabled.transitions.size(); ++i) {
            auto& t = enabled.transitions[i];
            const std::size_t dst = intern(std::move(targets[i])).first;
            lts.outgoing[s].push_back(lts.transitions.size());
            lts.transitions.push_back({s, std::move(t.event), dst, t.rule, std::move(t.position), t.hidden_by});
        }
    }
    detail::compute_outcomes(lts);
    return lts;
}

/// The publication multisets of every complete maximal execution.
inline std::set<ValueBag> publications(const Program& program, const Bounds& bounds = {})
{
    ExploredLts lts = explore(program, bounds);
    if (lts.truncated) {
        throw BoundExceeded("exploration truncated by a bound");
    }
    return lts.outcomes.complete;
}

/// Calls `visit(path)` with the transition indices of every maximal path
/// from the initial state, stopping early once `visit` returns false or
/// `limit` paths have been reported. Returns the number of paths visited.
inline std::size_t for_each_maximal_path(const ExploredLts& lts,
                                         const std::function<bool(const std::vector<std::size_t>&)>& visit,
                                         std::size_t limit = static_cast<std::size_t>(-1))
{
    std::size_t count = 0;
    std::vector<std::size_t> path;
    bool stopped = false;
    std::function<void(std::size_t)> dfs = [&](std::size_t s) {
        if (stopped) {
            return;
        }
        if (lts.outgoing[s].empty()) {
            ++count;
            if (!visit(path) || count >= limit) {
                stopped = true;
            }
            return;
        }
        for (std::size_t t : lts.outgoing[s]) {
            path.push_back(t);
            dfs(lts.transitions[t].target);
            path.pop_back();
            if (stopped) {
                return;
            }
        }
    };
    if (!lts.states.empty()) {
        dfs(0);
    }
    return count;
}

}  // namespace orcline::orc
