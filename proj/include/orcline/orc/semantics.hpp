#pragma once

#include <orcline/diagnostics.hpp>
#include <orcline/orc/ast.hpp>
#include <orcline/orc/parser.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace orcline::orc {

struct Bounds {
    std::size_t max_steps = 10000;
    std::size_t max_states = 100000;
    unsigned max_depth = 16;
};

/// A site call awaiting its response. `due` is the clock value at which the
/// response becomes available; empty means the site never responds.
struct PendingCall {
    std::string site;
    std::vector<Value> args;
    std::optional<std::int64_t> due;
    Value response;

    bool responsive() const { return due.has_value(); }
};

struct ExecState {
    Expr expr;
    std::map<Handle, PendingCall> pending;
    std::int64_t clock = 0;
    std::map<std::string, unsigned> def_depth;
    // Position in the response cycle of external sites declared with more
    // than one response.
    std::map<std::string, std::size_t> response_cursor;
    Handle next_handle = 0;
};

inline ExecState initial_state(const Program& p)
{
    ExecState s;
    s.expr = p.goal;
    return s;
}

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------
// Events.

namespace event {

/// `!v`
struct Publish {
    Value value;
    bool operator==(const Publish&) const = default;
};

/// `τ`
struct Internal {
    bool operator==(const Internal&) const = default;
};

/// `M_k(v)`
struct Call {
    std::string site;
    Handle handle = 0;
    std::vector<Value> args;
    bool operator==(const Call&) const = default;
};

/// `k?v`
struct Return {
    Handle handle = 0;
    Value value;
    bool operator==(const Return&) const = default;
};

/// Virtual time advancing to `clock`.
struct Tick {
    std::int64_t clock = 0;
    bool operator==(const Tick&) const = default;
};

}  // namespace event

using Event = std::variant<event::Publish, event::Internal, event::Call, event::Return, event::Tick>;

inline const char* event_kind(const Event& e)
{
    static constexpr const char* kNames[] = {"publish", "internal", "call", "return", "tick"};
    return kNames[e.index()];
}

/// Compact label: `!v`, `tau`, `M_k(v, ...)`, `k?v`, `tick@t`.
inline std::string event_label(const Event& e)
{
    if (const auto* p = std::get_if<event::Publish>(&e)) {
        return "!" + p->value.to_string();
    }
    if (std::holds_alternative<event::Internal>(e)) {
        return "tau";
    }
    if (const auto* c = std::get_if<event::Call>(&e)) {
        std::string out = c->site + "_" + std::to_string(c->handle) + "(";
        for (std::size_t i = 0; i < c->args.size(); ++i) {
            out += (i ? ", " : "") + c->args[i].to_string();
        }
        return out + ")";
    }
    if (const auto* r = std::get_if<event::Return>(&e)) {
        return std::to_string(r->handle) + "?" + r->value.to_string();
    }
    return "tick@" + std::to_string(std::get<event::Tick>(e).clock);
}

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------
// Transition rules by number:
//   1 site call, 2 site response and its publication, 3 parallel,
//   4 sequential, 5 asymmetric, 6 otherwise, 7 definition expansion, 8 tick.

/// Child indices from the root (0 = left, 1 = right).
using Position = std::vector<std::uint8_t>;

struct Transition {
    Event event;
    ExecState target;
    int rule = 0;       // rule of the originating leaf (1, 2, 6, 7 or 8)
    Position position;  // where the originating leaf sits in the source state
    // Set when a publication was turned into τ on its way up: 4 (sequential
    // left side) or 5 (asymmetric right side).
    std::optional<int> hidden_by;
};

struct StepResult {
    std::vector<Transition> transitions;
    // A definition call could not expand because the depth bound was reached.
    bool depth_blocked = false;

    bool quiescent() const { return transitions.empty(); }
};

inline const Expr& subterm_at(const Expr& e, std::span<const std::uint8_t> pos)
{
    if (pos.empty()) {
        return e;
    }
    const Expr* child = nullptr;
    if (const auto* n = e.as<Parallel>()) {
        child = pos[0] ? &n->right : &n->left;
    } else if (const auto* n = e.as<Sequential>()) {
        child = pos[0] ? &n->right : &n->left;
    } else if (const auto* n = e.as<Asymmetric>()) {
        child = pos[0] ? &n->right : &n->left;
    } else if (const auto* n = e.as<Otherwise>()) {
        child = pos[0] ? &n->right : &n->left;
    } else {
        throw Error("position does not address a subterm");
    }
    return subterm_at(*child, pos.subspan(1));
}

namespace detail {

using LiveSet = std::set<std::string>;

inline LiveSet with_liveness(const LiveSet& live, const std::string& x, bool is_live)
{
    LiveSet out = live;
    if (x.empty()) {
        return out;
    }
    if (is_live) {
        out.insert(x);
    } else {
        out.erase(x);
    }
    return out;
}

inline bool blocked_forever(const std::vector<Arg>& args, const LiveSet& live)
{
    for (const Arg& a : args) {
        if (const auto* v = std::get_if<Variable>(&a); v && live.count(v->name)) {
            return false;
        }
    }
    return true;
}

// A term is halted when it can never act again: no transition is enabled in
// it, every pending call inside it is non-responsive, and every call blocked
// on a variable waits for a binder whose source is itself halted. `live`
// holds the variables whose binders may still receive a value.
inline bool halted(const Expr& e, const ExecState& st, const LiveSet& live)
{
    if (const auto* n = e.as<SiteCall>()) {
        return !args_ground(n->args) && blocked_forever(n->args, live);
    }
    if (const auto* n = e.as<DefCall>()) {
        return !args_ground(n->args) && blocked_forever(n->args, live);
    }
    if (const auto* n = e.as<Pending>()) {
        auto it = st.pending.find(n->handle);
        return it == st.pending.end() || !it->second.responsive();
    }
    if (e.is<Ready>()) {
        return false;
    }
    if (e.is<Stop>()) {
        return true;
    }
    if (const auto* n = e.as<Parallel>()) {
        return halted(n->left, st, live) && halted(n->right, st, live);
    }
    if (const auto* n = e.as<Sequential>()) {
        return halted(n->left, st, live);
    }
    if (const auto* n = e.as<Asymmetric>()) {
        return halted(n->right, st, live) && halted(n->left, st, with_liveness(live, n->binder, false));
    }
    // An otherwise node either waits on its left side or can fire rule 6.
    return false;
}

struct Redex {
    int rule;
    Position pos;
};

class Stepper
{
   public:
    Stepper(const Program& program, const ExecState& state, unsigned max_depth)
        : program_(program)
        , state_(state)
        , max_depth_(max_depth)
    {
    }

    StepResult run()
    {
        Position pos;
        collect(state_.expr, pos, LiveSet{});
        std::stable_sort(redexes_.begin(), redexes_.end(), [](const Redex& a, const Redex& b) {
            return a.rule != b.rule ? a.rule < b.rule : a.pos < b.pos;
        });

        StepResult result;
        result.depth_blocked = depth_blocked_;
        for (const Redex& r : redexes_) {
            result.transitions.push_back(fire(r));
        }
        if (result.transitions.empty()) {
            if (auto next = next_due()) {
                Transition t;
                t.event = event::Tick{*next};
                t.target = state_;
                t.target.clock = *next;
                t.rule = 8;
                result.transitions.push_back(std::move(t));
            }
        }
        return result;
    }

   private:
    std::optional<std::int64_t> next_due() const
    {
        std::optional<std::int64_t> best;
        for (const auto& [h, call] : state_.pending) {
            if (call.due && *call.due > state_.clock && (!best || *call.due < *best)) {
                best = call.due;
            }
        }
        return best;
    }

    void collect(const Expr& e, Position& pos, const LiveSet& live)
    {
        auto child = [&](const Expr& c, std::uint8_t idx, const LiveSet& l) {
            pos.push_back(idx);
            collect(c, pos, l);
            pos.pop_back();
        };

        if (const auto* n = e.as<SiteCall>()) {
            if (args_ground(n->args)) {
                redexes_.push_back({1, pos});
            }
        } else if (const auto* n = e.as<DefCall>()) {
            if (args_ground(n->args)) {
                auto it = state_.def_depth.find(n->name);
                const unsigned depth = it == state_.def_depth.end() ? 0 : it->second;
                if (depth < max_depth_) {
                    redexes_.push_back({7, pos});
                } else {
                    depth_blocked_ = true;
                }
            }
        } else if (const auto* n = e.as<Pending>()) {
            const PendingCall& call = state_.pending.at(n->handle);
            if (call.due && *call.due <= state_.clock) {
                redexes_.push_back({2, pos});
            }
        } else if (e.is<Ready>()) {
            redexes_.push_back({2, pos});
        } else if (const auto* n = e.as<Parallel>()) {
            child(n->left, 0, live);
            child(n->right, 1, live);
        } else if (const auto* n = e.as<Sequential>()) {
            child(n->left, 0, live);
        } else if (const auto* n = e.as<Asymmetric>()) {
            const bool source_halted = halted(n->right, state_, live);
            child(n->left, 0, with_liveness(live, n->binder, !source_halted));
            child(n->right, 1, live);
        } else if (const auto* n = e.as<Otherwise>()) {
            child(n->left, 0, live);
            if (halted(n->left, state_, live)) {
                redexes_.push_back({6, pos});
            }
        }
    }

    Transition fire(const Redex& r) const
    {
        Transition t;
        t.target = state_;
        t.rule = r.rule;
        t.position = r.pos;
        t.target.expr = rewrite(state_.expr, r.pos, t.target, t.event, t.hidden_by);
        return t;
    }

    PendingCall make_call(const std::string& name, std::vector<Value> args, ExecState& st) const
    {
        PendingCall call;
        call.site = name;
        call.args = std::move(args);
        const auto& a = call.args;
        const SiteSpec spec = program_.site_spec(name);
        if (const auto* b = std::get_if<BuiltinSite>(&spec.behaviour)) {
            switch (*b) {
                case BuiltinSite::If:
                    if (a.size() == 1 && a[0].is_bool() && a[0].as_bool()) {
                        call.due = st.clock;
                    }
                    break;
                case BuiltinSite::Rtimer:
                    if (a.size() == 1 && a[0].is_int() && a[0].as_int() >= 0) {
                        call.due = st.clock + a[0].as_int();
                    }
                    break;
                case BuiltinSite::Signal:
                    call.due = st.clock;
                    break;
                case BuiltinSite::Zero:
                    break;
                case BuiltinSite::Let:
                    call.due = st.clock;
                    if (a.size() == 1) {
                        call.response = a[0];
                    } else if (a.size() > 1) {
                        call.response = Value::tuple(a);
                    }
                    break;
            }
            return call;
        }
        const auto& ext = std::get<ExternalSite>(spec.behaviour);
        if (ext.responsive) {
            call.due = st.clock + ext.delay;
        }
        if (ext.responses.size() == 1) {
            call.response = ext.responses.front();
        } else if (ext.responses.size() > 1) {
            std::size_t& cursor = st.response_cursor[name];
            call.response = ext.responses[cursor];
            cursor = (cursor + 1) % ext.responses.size();
        }
        return call;
    }

    static void kill(const Expr& e, ExecState& st)
    {
        if (const auto* n = e.as<Pending>()) {
            st.pending.erase(n->handle);
        } else if (const auto* n = e.as<Parallel>()) {
            kill(n->left, st);
            kill(n->right, st);
        } else if (const auto* n = e.as<Sequential>()) {
            kill(n->left, st);
        } else if (const auto* n = e.as<Asymmetric>()) {
            kill(n->left, st);
            kill(n->right, st);
        } else if (const auto* n = e.as<Otherwise>()) {
            kill(n->left, st);
        }
    }

    static Expr make_par(Expr l, Expr r)
    {
        if (l.is<Stop>()) {
            return r;
        }
        if (r.is<Stop>()) {
            return l;
        }
        return par(std::move(l), std::move(r));
    }

    static Expr make_seq(Expr l, const std::string& x, Expr r)
    {
        if (l.is<Stop>()) {
            return stop();
        }
        return seq(std::move(l), x, std::move(r));
    }

    Expr rewrite(const Expr& e, std::span<const std::uint8_t> pos, ExecState& st, Event& ev,
                 std::optional<int>& hidden) const
    {
        if (pos.empty()) {
            return rewrite_leaf(e, st, ev);
        }
        const auto rest = pos.subspan(1);
        const bool right = pos[0] != 0;

        if (const auto* n = e.as<Parallel>()) {
            return right ? make_par(n->left, rewrite(n->right, rest, st, ev, hidden))
                         : make_par(rewrite(n->left, rest, st, ev, hidden), n->right);
        }
        if (const auto* n = e.as<Sequential>()) {
            Expr left = rewrite(n->left, rest, st, ev, hidden);
            if (const auto* pub = std::get_if<event::Publish>(&ev)) {
                Expr instance = substitute(n->right, n->binder, pub->value);
                ev = event::Internal{};
                hidden = 4;
                return make_par(make_seq(std::move(left), n->binder, n->right), std::move(instance));
            }
            return make_seq(std::move(left), n->binder, n->right);
        }
        if (const auto* n = e.as<Asymmetric>()) {
            if (!right) {
                return asym(rewrite(n->left, rest, st, ev, hidden), n->binder, n->right);
            }
            Expr source = rewrite(n->right, rest, st, ev, hidden);
            if (const auto* pub = std::get_if<event::Publish>(&ev)) {
                Value v = pub->value;
                kill(source, st);
                ev = event::Internal{};
                hidden = 5;
                return substitute(n->left, n->binder, v);
            }
            return asym(n->left, n->binder, std::move(source));
        }
        if (const auto* n = e.as<Otherwise>()) {
            Expr left = rewrite(n->left, rest, st, ev, hidden);
            if (std::holds_alternative<event::Publish>(ev)) {
                return left;
            }
            return otherwise(std::move(left), n->right);
        }
        throw Error("transition position does not address a subterm");
    }

    Expr rewrite_leaf(const Expr& e, ExecState& st, Event& ev) const
    {
        if (const auto* n = e.as<SiteCall>()) {
            const Handle h = st.next_handle++;
            PendingCall call = make_call(n->site, ground_args(n->args), st);
            ev = event::Call{n->site, h, call.args};
            st.pending.emplace(h, std::move(call));
            return pending(h);
        }
        if (const auto* n = e.as<Pending>()) {
            auto it = st.pending.find(n->handle);
            Value v = it->second.response;
            st.pending.erase(it);
            ev = event::Return{n->handle, v};
            return ready(std::move(v));
        }
        if (const auto* n = e.as<Ready>()) {
            ev = event::Publish{n->value};
            return stop();
        }
        if (const auto* n = e.as<Otherwise>()) {
            kill(n->left, st);
            ev = event::Internal{};
            return n->right;
        }
        if (const auto* n = e.as<DefCall>()) {
            auto it = program_.definitions.find(n->name);
            if (it == program_.definitions.end()) {
                throw Error("call to unknown definition '" + n->name + "'");
            }
            const Definition& def = it->second;
            if (def.params.size() != n->args.size()) {
                throw Error("definition '" + n->name + "' called with wrong arity");
            }
            Expr body = def.body;
            for (std::size_t i = 0; i < def.params.size(); ++i) {
                body = substitute(body, def.params[i], std::get<Value>(n->args[i]));
            }
            ++st.def_depth[n->name];
            ev = event::Internal{};
            return body;
        }
        throw Error("no transition at this position");
    }

    const Program& program_;
    const ExecState& state_;
    unsigned max_depth_;
    std::vector<Redex> redexes_;
    bool depth_blocked_ = false;
};

}  // namespace detail

/// All enabled transitions of `s`, ordered by rule number and then by
/// leftmost position. A Tick is offered only when nothing else is enabled.
inline StepResult step(const Program& program, const ExecState& s, unsigned max_depth = Bounds{}.max_depth)
{
    return detail::Stepper{program, s, max_depth}.run();
}

/// Whether the subterm at `pos` can never again transition or publish.
inline bool is_halted(const ExecState& s, const Position& pos = {})
{
    detail::LiveSet live;
    const Expr* e = &s.expr;
    for (std::uint8_t idx : pos) {
        if (const auto* n = e->as<Asymmetric>()) {
            if (idx == 0) {
                live = detail::with_liveness(live, n->binder, !detail::halted(n->right, s, live));
                e = &n->left;
            } else {
                e = &n->right;
            }
        } else {
            e = &subterm_at(*e, std::span<const std::uint8_t>(&idx, 1));
        }
    }
    return detail::halted(*e, s, live);
}

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------
// Single executions.

class SchedulerPolicy
{
   public:
    static SchedulerPolicy deterministic() { return SchedulerPolicy{}; }
    static SchedulerPolicy seeded(std::uint64_t seed)
    {
        SchedulerPolicy p;
        p.seed_ = seed;
        return p;
    }

    bool is_random() const { return seed_.has_value(); }
    std::uint64_t seed() const { return seed_.value_or(0); }

   private:
    std::optional<std::uint64_t> seed_;
};

enum class RunStatus {
    Halted,            // quiescent, nothing left that could respond
    DepthTruncated,    // quiescent only because a definition hit the depth bound
    StepBoundExceeded  // stopped after max_steps transitions
};

struct TraceEntry {
    std::int64_t clock = 0;
    Event event;
};

struct Trace {
    std::vector<TraceEntry> events;
    std::vector<Value> publications;
    bool halted = false;
    RunStatus status = RunStatus::Halted;
    ExecState final_state;
};

/// Drives one execution, picking one enabled transition per step: the first
/// in rule/position order, or a uniformly random one under a seeded policy.
inline Trace run(const Program& program, const SchedulerPolicy& policy = SchedulerPolicy::deterministic(),
                 const Bounds& bounds = {})
{
    Trace trace;
    ExecState state = initial_state(program);
    std::mt19937_64 rng(policy.seed());

    for (std::size_t steps = 0;; ++steps) {
        StepResult enabled = step(program, state, bounds.max_depth);
        if (enabled.quiescent()) {
            trace.status = enabled.depth_blocked ? RunStatus::DepthTruncated : RunStatus::Halted;
            break;
        }
        if (steps >= bounds.max_steps) {
            trace.status = RunStatus::StepBoundExceeded;
            break;
        }
        std::size_t pick = 0;
        if (policy.is_random()) {
            pick = std::uniform_int_distribution<std::size_t>(0, enabled.transitions.size() - 1)(rng);
        }
        Transition& t = enabled.transitions[pick];
        if (const auto* p = std::get_if<event::Publish>(&t.event)) {
            trace.publications.push_back(p->value);
        }
        trace.events.push_back({t.target.clock, t.event});
        state = std::move(t.target);
    }
    trace.halted = trace.status == RunStatus::Halted;
    trace.final_state = std::move(state);
    return trace;
}

}  // namespace orcline::orc
