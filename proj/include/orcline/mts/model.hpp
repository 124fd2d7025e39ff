#pragma once

#include <orcline/diagnostics.hpp>

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace orcline::mts {

using StateId = std::size_t;

struct Transition {
    StateId source = 0;
    std::string action;
    StateId target = 0;

    auto operator<=>(const Transition&) const = default;
};

using TransitionSet = std::set<Transition>;

/// Named states with dense ids, shared by Lts and Mts.
class StateTable
{
   public:
    /// Adds a state, or returns the id of an existing one with that name.
    StateId intern(const std::string& name)
    {
        auto [it, inserted] = index_.emplace(name, names_.size());
        if (inserted) {
            names_.push_back(name);
        }
        return it->second;
    }

    std::optional<StateId> find(const std::string& name) const
    {
        auto it = index_.find(name);
        if (it == index_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    StateId id(const std::string& name) const
    {
        auto found = find(name);
        if (!found) {
            throw Error("unknown state '" + name + "'");
        }
        return *found;
    }

    const std::string& name(StateId id) const { return names_.at(id); }
    const std::vector<std::string>& names() const { return names_; }
    std::size_t size() const { return names_.size(); }

    bool operator==(const StateTable& other) const { return names_ == other.names_; }

   private:
    std::vector<std::string> names_;
    std::map<std::string, StateId> index_;
};

/// A labelled transition system (Q, A, init, δ).
class Lts
{
   public:
    Lts() = default;
    explicit Lts(std::string name)
        : name_(std::move(name))
    {
    }

    const std::string& name() const { return name_; }
    void set_name(std::string name) { name_ = std::move(name); }

    StateId add_state(const std::string& name) { return states_.intern(name); }
    const StateTable& states() const { return states_; }
    std::size_t state_count() const { return states_.size(); }

    void set_initial(StateId q)
    {
        check_state(q);
        initial_ = q;
    }
    StateId initial() const { return initial_; }

    void add_action(const std::string& a) { actions_.insert(a); }
    const std::set<std::string>& actions() const { return actions_; }

    void add_transition(StateId from, const std::string& action, StateId to)
    {
        check_state(from);
        check_state(to);
        actions_.insert(action);
        transitions_.insert({from, action, to});
    }

    const TransitionSet& transitions() const { return transitions_; }

    bool operator==(const Lts& other) const
    {
        return name_ == other.name_ && states_ == other.states_ && initial_ == other.initial_ &&
               actions_ == other.actions_ && transitions_ == other.transitions_;
    }

   private:
    void check_state(StateId q) const
    {
        if (q >= states_.size()) {
            throw Error("transition references an unknown state");
        }
    }

    std::string name_;
    StateTable states_;
    StateId initial_ = 0;
    std::set<std::string> actions_;
    TransitionSet transitions_;
};

/// A modal transition system (Q, A, init, must, may). Every must transition
/// is also recorded as a may transition, so must ⊆ may holds by construction.
class Mts
{
   public:
    Mts() = default;
    explicit Mts(std::string name)
        : name_(std::move(name))
    {
    }

    const std::string& name() const { return name_; }
    void set_name(std::string name) { name_ = std::move(name); }

    StateId add_state(const std::string& name) { return states_.intern(name); }
    const StateTable& states() const { return states_; }
    std::size_t state_count() const { return states_.size(); }

    void set_initial(StateId q)
    {
        check_state(q);
        initial_ = q;
    }
    StateId initial() const { return initial_; }

    void add_action(const std::string& a) { actions_.insert(a); }
    const std::set<std::string>& actions() const { return actions_; }

    void add_must(StateId from, const std::string& action, StateId to)
    {
        add_may(from, action, to);
        must_.insert({from, action, to});
    }

    void add_may(StateId from, const std::string& action, StateId to)
    {
        check_state(from);
        check_state(to);
        actions_.insert(action);
        may_.insert({from, action, to});
    }

    const TransitionSet& must() const { return must_; }
    const TransitionSet& may() const { return may_; }

    /// may \ must, in transition order.
    std::vector<Transition> may_only() const
    {
        std::vector<Transition> out;
        for (const Transition& t : may_) {
            if (!must_.count(t)) {
                out.push_back(t);
            }
        }
        return out;
    }

    bool operator==(const Mts& other) const
    {
        return name_ == other.name_ && states_ == other.states_ && initial_ == other.initial_ &&
               actions_ == other.actions_ && must_ == other.must_ && may_ == other.may_;
    }

    /// The LTS viewed as an MTS whose must and may relations coincide.
    static Mts from_lts(const Lts& lts)
    {
        Mts m(lts.name());
        for (const auto& name : lts.states().names()) {
            m.add_state(name);
        }
        for (const auto& a : lts.actions()) {
            m.add_action(a);
        }
        m.set_initial(lts.initial());
        for (const Transition& t : lts.transitions()) {
            m.add_must(t.source, t.action, t.target);
        }
        return m;
    }

   private:
    void check_state(StateId q) const
    {
        if (q >= states_.size()) {
            throw Error("transition references an unknown state");
        }
    }

    std::string name_;
    StateTable states_;
    StateId initial_ = 0;
    std::set<std::string> actions_;
    TransitionSet must_;
    TransitionSet may_;
};

/// (Q, A, init, must ∪ may), which equals (Q, A, init, may).
inline Lts underlying_lts(const Mts& m)
{
    Lts out(m.name());
    for (const auto& name : m.states().names()) {
        out.add_state(name);
    }
    for (const auto& a : m.actions()) {
        out.add_action(a);
    }
    out.set_initial(m.initial());
    for (const Transition& t : m.must()) {
        out.add_transition(t.source, t.action, t.target);
    }
    for (const Transition& t : m.may()) {
        out.add_transition(t.source, t.action, t.target);
    }
    return out;
}

/// Three-valued reading of a transition triple.
enum class Modality {
    True,     // must
    Unknown,  // may but not must
    False     // neither
};

inline Modality classify(const Mts& m, StateId from, const std::string& action, StateId to)
{
    const Transition t{from, action, to};
    if (m.must().count(t)) {
        return Modality::True;
    }
    if (m.may().count(t)) {
        return Modality::Unknown;
    }
    return Modality::False;
}

}  // namespace orcline::mts
