#pragma once

#include <orcline/diagnostics.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace orcline::fm {

using FeatureName = std::string;

enum class NodeKind { Mandatory, Optional, AltMember };

inline const char* kind_name(NodeKind k)
{
    switch (k) {
        case NodeKind::Mandatory: return "mandatory";
        case NodeKind::Optional: return "optional";
        case NodeKind::AltMember: return "alternative";
    }
    return "?";
}

struct Node {
    NodeKind kind = NodeKind::Mandatory;
    std::optional<FeatureName> parent;  // empty for the root
    std::string group;                  // alternative group id, AltMember only
    std::vector<FeatureName> children;  // declaration order

    bool operator==(const Node&) const = default;
};

struct Constraint {
    enum Kind { Requires, Excludes } kind = Requires;
    FeatureName a;
    FeatureName b;

    bool operator==(const Constraint&) const = default;
};

inline const char* constraint_name(Constraint::Kind k)
{
    return k == Constraint::Requires ? "requires" : "excludes";
}

struct AltGroup {
    std::string id;  // members joined by ","
    FeatureName parent;
    std::vector<FeatureName> members;
};

inline std::string group_id(const std::vector<FeatureName>& members)
{
    std::string id;
    for (const auto& m : members) {
        id += (id.empty() ? "" : ",") + m;
    }
    return id;
}

/// A feature tree plus cross-tree constraints. The root is always present in
/// a product; every other node is attached to a parent with a kind.
class FeatureModel
{
   public:
    FeatureModel() = default;
    explicit FeatureModel(FeatureName root)
        : root_(std::move(root))
    {
        nodes_[root_] = Node{};
    }

    const FeatureName& root() const { return root_; }
    const std::map<FeatureName, Node>& nodes() const { return nodes_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }

    /// Features in pre-order, siblings in declaration order.
    std::vector<FeatureName> features() const
    {
        std::vector<FeatureName> out;
        std::function<void(const FeatureName&)> walk = [&](const FeatureName& f) {
            out.push_back(f);
            for (const auto& c : nodes_.at(f).children) {
                walk(c);
            }
        };
        if (!root_.empty()) {
            walk(root_);
        }
        return out;
    }

    std::size_t size() const { return nodes_.size(); }
    bool contains(const FeatureName& f) const { return nodes_.count(f) != 0; }
    const Node& node(const FeatureName& f) const
    {
        auto it = nodes_.find(f);
        if (it == nodes_.end()) {
            throw UnknownFeature("unknown feature '" + f + "'");
        }
        return it->second;
    }

    void add_child(const FeatureName& parent, const FeatureName& name, NodeKind kind)
    {
        if (kind == NodeKind::AltMember) {
            throw Error("use add_alternative for group members");
        }
        attach(parent, name, kind, "");
    }

    /// Adds a group of at least two mutually exclusive children; returns its id.
    std::string add_alternative(const FeatureName& parent, const std::vector<FeatureName>& members)
    {
        if (members.size() < 2) {
            throw Error("alternative group needs at least 2 members");
        }
        const std::string id = group_id(members);
        for (const auto& m : members) {
            attach(parent, m, NodeKind::AltMember, id);
        }
        return id;
    }

    void add_constraint(Constraint::Kind kind, const FeatureName& a, const FeatureName& b)
    {
        node(a);
        node(b);
        if (a == b) {
            throw Error(std::string(constraint_name(kind)) + " constraint needs two distinct features");
        }
        constraints_.push_back({kind, a, b});
    }

    /// Alternative groups in pre-order of their first member.
    std::vector<AltGroup> groups() const
    {
        std::vector<AltGroup> out;
        std::set<std::string> seen;
        for (const auto& f : features()) {
            const Node& n = nodes_.at(f);
            if (n.kind == NodeKind::AltMember && seen.insert(n.group).second) {
                AltGroup g{n.group, *n.parent, {}};
                for (const auto& c : nodes_.at(*n.parent).children) {
                    if (nodes_.at(c).kind == NodeKind::AltMember && nodes_.at(c).group == n.group) {
                        g.members.push_back(c);
                    }
                }
                out.push_back(std::move(g));
            }
        }
        return out;
    }

    bool operator==(const FeatureModel&) const = default;

   private:
    void attach(const FeatureName& parent, const FeatureName& name, NodeKind kind, const std::string& group)
    {
        auto it = nodes_.find(parent);
        if (it == nodes_.end()) {
            throw UnknownFeature("unknown parent feature '" + parent + "'");
        }
        if (nodes_.count(name)) {
            throw Error("duplicate feature '" + name + "'");
        }
        it->second.children.push_back(name);
        nodes_[name] = Node{kind, parent, group, {}};
    }

    FeatureName root_;
    std::map<FeatureName, Node> nodes_;
    std::vector<Constraint> constraints_;
};

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------

using Configuration = std::set<FeatureName>;

enum class Rule {
    RootPresent,
    MandatoryWithParent,  // present iff parent present
    ParentPresent,        // optional or alternative child needs its parent
    OneAndOnlyOne,        // alternative group under a present parent
    Requires,
    Excludes
};

inline const char* rule_name(Rule r)
{
    switch (r) {
        case Rule::RootPresent: return "root must be present";
        case Rule::MandatoryWithParent: return "mandatory feature present iff its parent is";
        case Rule::ParentPresent: return "feature present without its parent";
        case Rule::OneAndOnlyOne: return "one and only one alternative must be present";
        case Rule::Requires: return "requires";
        case Rule::Excludes: return "excludes";
    }
    return "?";
}

struct Violation {
    Rule rule;
    std::vector<FeatureName> features;

    std::string message() const
    {
        std::string out = rule_name(rule);
        out += ":";
        for (const auto& f : features) {
            out += " " + f;
        }
        return out;
    }
};

/// All rule violations of `c`; empty means the configuration is a product.
inline std::vector<Violation> validate(const FeatureModel& fm, const Configuration& c)
{
    for (const auto& f : c) {
        if (!fm.contains(f)) {
            throw UnknownFeature("unknown feature '" + f + "'");
        }
    }
    std::vector<Violation> out;
    auto in = [&](const FeatureName& f) { return c.count(f) != 0; };

    if (!in(fm.root())) {
        out.push_back({Rule::RootPresent, {fm.root()}});
    }
    for (const auto& f : fm.features()) {
        const Node& n = fm.node(f);
        if (!n.parent) {
            continue;
        }
        const bool parent_in = in(*n.parent);
        if (n.kind == NodeKind::Mandatory && in(f) != parent_in) {
            out.push_back({Rule::MandatoryWithParent, {f, *n.parent}});
        } else if (n.kind != NodeKind::Mandatory && in(f) && !parent_in) {
            out.push_back({Rule::ParentPresent, {f, *n.parent}});
        }
    }
    for (const auto& g : fm.groups()) {
        std::vector<FeatureName> present;
        for (const auto& m : g.members) {
            if (in(m)) {
                present.push_back(m);
            }
        }
        if (in(g.parent) && present.size() != 1) {
            out.push_back({Rule::OneAndOnlyOne, present.empty() ? g.members : present});
        }
    }
    for (const auto& k : fm.constraints()) {
        if (k.kind == Constraint::Requires && in(k.a) && !in(k.b)) {
            out.push_back({Rule::Requires, {k.a, k.b}});
        }
        if (k.kind == Constraint::Excludes && in(k.a) && in(k.b)) {
            out.push_back({Rule::Excludes, {k.a, k.b}});
        }
    }
    return out;
}

inline bool is_valid(const FeatureModel& fm, const Configuration& c) { return validate(fm, c).empty(); }

namespace detail {

// Depth-first selection in pre-order. Each node's presence is forced by its
// parent except for optional nodes and alternative groups, which branch.
// Constraints are checked as soon as both endpoints are decided.
class Enumerator
{
   public:
    Enumerator(const FeatureModel& fm, std::function<void(const Enumerator&)> emit)
        : fm_(fm), order_(fm.features()), emit_(std::move(emit))
    {
        for (std::size_t i = 0; i < order_.size(); ++i) {
            index_[order_[i]] = i;
        }
        // A constraint becomes checkable at the later of its endpoints.
        checks_.resize(order_.size());
        for (const auto& k : fm.constraints()) {
            checks_[std::max(index_.at(k.a), index_.at(k.b))].push_back(k);
        }
        state_.assign(order_.size(), 0);
    }

    void run() { visit(0); }

    Configuration current() const
    {
        Configuration c;
        for (std::size_t j = 0; j < order_.size(); ++j) {
            if (state_[j]) {
                c.insert(order_[j]);
            }
        }
        return c;
    }

   private:
    void visit(std::size_t i)
    {
        if (i == order_.size()) {
            emit_(*this);
            return;
        }
        const Node& n = fm_.node(order_[i]);
        const bool parent_in = !n.parent || state_[index_.at(*n.parent)];
        switch (n.kind) {
            case NodeKind::Mandatory:
                decide(i, parent_in);
                break;
            case NodeKind::Optional:
                if (parent_in) {
                    decide(i, true);
                }
                decide(i, false);
                break;
            case NodeKind::AltMember: {
                // Exactly one member when the parent is present: this member
                // may be chosen only if no earlier member was, and must be if
                // it is the last one and none was.
                bool earlier = false;
                bool later = false;
                for (const auto& m : fm_.node(*n.parent).children) {
                    const Node& mn = fm_.node(m);
                    if (mn.kind != NodeKind::AltMember || mn.group != n.group || m == order_[i]) {
                        continue;
                    }
                    if (index_.at(m) < i) {
                        earlier = earlier || state_[index_.at(m)];
                    } else {
                        later = true;
                    }
                }
                if (parent_in && !earlier) {
                    decide(i, true);
                }
                if (!parent_in || earlier || later) {
                    decide(i, false);
                }
                break;
            }
        }
    }

    void decide(std::size_t i, bool present)
    {
        state_[i] = present ? 1 : 0;
        for (const auto& k : checks_[i]) {
            const bool a = state_[index_.at(k.a)];
            const bool b = state_[index_.at(k.b)];
            if ((k.kind == Constraint::Requires && a && !b) || (k.kind == Constraint::Excludes && a && b)) {
                state_[i] = 0;
                return;
            }
        }
        visit(i + 1);
        state_[i] = 0;
    }

    const FeatureModel& fm_;
    std::vector<FeatureName> order_;
    std::map<FeatureName, std::size_t> index_;
    std::vector<std::vector<Constraint>> checks_;
    std::vector<char> state_;
    std::function<void(const Enumerator&)> emit_;
};

inline void check_bound(const FeatureModel& fm, std::size_t max_features)
{
    if (fm.size() > max_features) {
        throw BoundExceeded("model has " + std::to_string(fm.size()) + " features; bound is " +
                            std::to_string(max_features));
    }
}

}  // namespace detail

inline constexpr std::size_t kDefaultFeatureBound = 24;

/// Every valid configuration of `fm`.
inline std::set<Configuration> enumerate_products(const FeatureModel& fm,
                                                  std::size_t max_features = kDefaultFeatureBound)
{
    detail::check_bound(fm, max_features);
    std::set<Configuration> out;
    detail::Enumerator(fm, [&](const detail::Enumerator& e) { out.insert(e.current()); }).run();
    return out;
}

inline std::uint64_t product_count(const FeatureModel& fm, std::size_t max_features = kDefaultFeatureBound)
{
    detail::check_bound(fm, max_features);
    std::uint64_t n = 0;
    detail::Enumerator(fm, [&](const detail::Enumerator&) { ++n; }).run();
    return n;
}

}  // namespace orcline::fm
