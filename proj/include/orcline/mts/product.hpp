#pragma once

#include <orcline/diagnostics.hpp>
#include <orcline/mts/model.hpp>

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace orcline::mts {

/// The two closure clauses a product/family state pair has to satisfy.
enum class Clause {
    MustPreserved,  // (i): every must step of the family is matched by the product
    MayRespected    // (ii): every product step is allowed by a may step of the family
};

inline const char* clause_name(Clause c)
{
    return c == Clause::MustPreserved ? "(i) must transitions preserved" : "(ii) product steps allowed by may";
}

struct ClauseViolation {
    Clause clause = Clause::MustPreserved;
    StateId product_state = 0;
    StateId family_state = 0;
    std::string action;
    std::size_t round = 0;
};

struct ProductWitness {
    /// (product state, family state) pairs reachable from the initial pair.
    std::vector<std::pair<StateId, StateId>> pairs;
};

struct ProductCheck {
    bool holds = false;
    ProductWitness witness;
    /// Why the initial pair was removed, when it was.
    std::optional<ClauseViolation> failure;
    /// Pairs removed in the first refinement round: the local defects.
    std::vector<ClauseViolation> first_round;
    /// The local defects on pairs reachable from the initial pair by steps
    /// both models can take. When the check fails these explain why.
    std::vector<ClauseViolation> reachable_defects;
    /// Relation size before the first round and after each round.
    std::vector<std::size_t> relation_sizes;
    std::size_t rounds = 0;
};

namespace detail {

using Adjacency = std::vector<std::vector<std::pair<std::string, StateId>>>;

inline Adjacency adjacency(std::size_t states, const TransitionSet& ts)
{
    Adjacency adj(states);
    for (const Transition& t : ts) {
        adj[t.source].emplace_back(t.action, t.target);
    }
    return adj;
}

}  // namespace detail

/// Decides whether `p` is a product of the family `f`: computes the greatest
/// relation closed under both clauses by deleting violating pairs until a
/// fixpoint, then checks the initial pair.
inline ProductCheck is_product(const Lts& p, const Mts& f)
{
    for (const Transition& t : p.transitions()) {
        if (!f.actions().count(t.action)) {
            throw ActionMismatch("action '" + t.action + "' of the product does not occur in the family");
        }
    }

    const std::size_t np = p.state_count();
    const std::size_t nf = f.state_count();
    const auto p_adj = detail::adjacency(np, p.transitions());
    const auto must_adj = detail::adjacency(nf, f.must());
    const auto may_adj = detail::adjacency(nf, f.may());

    std::vector<char> rel(np * nf, 1);
    auto in = [&](StateId qp, StateId qf) { return rel[qp * nf + qf] != 0; };

    auto violation = [&](StateId qp, StateId qf) -> std::optional<ClauseViolation> {
        for (const auto& [a, qf2] : must_adj[qf]) {
            bool matched = false;
            for (const auto& [b, qp2] : p_adj[qp]) {
                if (a == b && in(qp2, qf2)) {
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                return ClauseViolation{Clause::MustPreserved, qp, qf, a, 0};
            }
        }
        for (const auto& [a, qp2] : p_adj[qp]) {
            bool matched = false;
            for (const auto& [b, qf2] : may_adj[qf]) {
                if (a == b && in(qp2, qf2)) {
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                return ClauseViolation{Clause::MayRespected, qp, qf, a, 0};
            }
        }
        return std::nullopt;
    };

    ProductCheck result;
    std::size_t size = np * nf;
    result.relation_sizes.push_back(size);
    const StateId ip = p.initial();
    const StateId ifam = f.initial();

    while (true) {
        std::vector<ClauseViolation> removed;
        for (StateId qp = 0; qp < np; ++qp) {
            for (StateId qf = 0; qf < nf; ++qf) {
                if (in(qp, qf)) {
                    if (auto v = violation(qp, qf)) {
                        v->round = result.rounds + 1;
                        removed.push_back(*v);
                    }
                }
            }
        }
        if (removed.empty()) {
            break;
        }
        ++result.rounds;
        for (const auto& v : removed) {
            rel[v.product_state * nf + v.family_state] = 0;
            if (v.product_state == ip && v.family_state == ifam) {
                result.failure = v;
            }
        }
        if (result.rounds == 1) {
            result.first_round = removed;
        }
        size -= removed.size();
        result.relation_sizes.push_back(size);
    }

    result.holds = np > 0 && nf > 0 && in(ip, ifam);
    if (!result.holds) {
        if (np == 0 || nf == 0) {
            return result;
        }
        std::map<std::pair<StateId, StateId>, const ClauseViolation*> local;
        for (const auto& v : result.first_round) {
            local[{v.product_state, v.family_state}] = &v;
        }
        std::set<std::pair<StateId, StateId>> seen{{ip, ifam}};
        std::deque<std::pair<StateId, StateId>> queue{{ip, ifam}};
        while (!queue.empty()) {
            auto [qp, qf] = queue.front();
            queue.pop_front();
            if (auto it = local.find({qp, qf}); it != local.end()) {
                result.reachable_defects.push_back(*it->second);
            }
            for (const auto& [a, qp2] : p_adj[qp]) {
                for (const auto& [b, qf2] : may_adj[qf]) {
                    if (a == b && seen.insert({qp2, qf2}).second) {
                        queue.emplace_back(qp2, qf2);
                    }
                }
            }
        }
        return result;
    }

    std::set<std::pair<StateId, StateId>> seen{{ip, ifam}};
    std::deque<std::pair<StateId, StateId>> queue{{ip, ifam}};
    while (!queue.empty()) {
        auto [qp, qf] = queue.front();
        queue.pop_front();
        result.witness.pairs.emplace_back(qp, qf);
        for (const auto& [a, qp2] : p_adj[qp]) {
            for (const auto& [b, qf2] : may_adj[qf]) {
                if (a == b && in(qp2, qf2) && seen.insert({qp2, qf2}).second) {
                    queue.emplace_back(qp2, qf2);
                }
            }
        }
    }
    return result;
}

/// The transitions of `ts` reachable from `init`, with states renumbered in
/// breadth-first order (successors visited by action, then target name).
inline Lts reachable_canonical(const StateTable& states, StateId init, const TransitionSet& ts,
                               const std::string& name, const std::set<std::string>& alphabet)
{
    auto adj = detail::adjacency(states.size(), ts);
    for (auto& succ : adj) {
        std::sort(succ.begin(), succ.end(), [&](const auto& x, const auto& y) {
            return x.first != y.first ? x.first < y.first : states.name(x.second) < states.name(y.second);
        });
    }
    Lts out(name);
    for (const auto& a : alphabet) {
        out.add_action(a);
    }
    std::map<StateId, StateId> renamed;
    std::deque<StateId> queue{init};
    renamed[init] = out.add_state(states.name(init));
    out.set_initial(renamed[init]);
    while (!queue.empty()) {
        StateId q = queue.front();
        queue.pop_front();
        for (const auto& [a, q2] : adj[q]) {
            auto [it, inserted] = renamed.emplace(q2, 0);
            if (inserted) {
                it->second = out.add_state(states.name(q2));
                queue.push_back(q2);
            }
            out.add_transition(renamed[q], a, it->second);
        }
    }
    return out;
}

/// Every product obtained from `f` by keeping all must transitions plus a
/// subset of the may-only ones, restricted to the part reachable from the
/// initial state and deduplicated by canonical form.
inline std::vector<Lts> derive_products(const Mts& f, std::size_t max_may_only = 20)
{
    const std::vector<Transition> optional = f.may_only();
    if (optional.size() > max_may_only) {
        throw BoundExceeded("family has " + std::to_string(optional.size()) +
                            " may-only transitions; bound is " + std::to_string(max_may_only));
    }
    std::vector<Lts> products;
    std::set<std::pair<std::vector<std::string>, TransitionSet>> seen;
    const std::uint64_t subsets = std::uint64_t{1} << optional.size();
    for (std::uint64_t mask = 0; mask < subsets; ++mask) {
        TransitionSet ts = f.must();
        for (std::size_t i = 0; i < optional.size(); ++i) {
            if (mask & (std::uint64_t{1} << i)) {
                ts.insert(optional[i]);
            }
        }
        Lts candidate = reachable_canonical(f.states(), f.initial(), ts, f.name(), f.actions());
        if (seen.emplace(candidate.states().names(), candidate.transitions()).second) {
            candidate.set_name(f.name() + "_p" + std::to_string(products.size()));
            products.push_back(std::move(candidate));
        }
    }
    return products;
}

}  // namespace orcline::mts
