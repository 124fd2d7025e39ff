#pragma once

#include <orcline/value.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace orcline::orc {

using Handle = std::uint32_t;

struct Variable {
    std::string name;

    bool operator==(const Variable&) const = default;
};

/// An actual parameter: a literal value or a variable awaiting a binding.
using Arg = std::variant<Value, Variable>;

/// Binder name used by the abbreviated forms `A >> B` and `A << B`. It can
/// never be spelled as an identifier, so no variable occurrence matches it.
inline const std::string kAnonymousBinder;

struct ExprNode;

/// Immutable, structurally shared orchestration expression.
class Expr
{
   public:
    Expr() = default;
    explicit Expr(std::shared_ptr<const ExprNode> node)
        : node_(std::move(node))
    {
    }

    const ExprNode& node() const { return *node_; }

    template <typename T>
    const T* as() const;

    template <typename T>
    bool is() const
    {
        return as<T>() != nullptr;
    }

    bool same_node(const Expr& other) const { return node_ == other.node_; }

   private:
    std::shared_ptr<const ExprNode> node_;
};

struct SiteCall {
    std::string site;
    std::vector<Arg> args;
};

struct DefCall {
    std::string name;
    std::vector<Arg> args;
};

/// `left | right`
struct Parallel {
    Expr left;
    Expr right;
};

/// `left >binder> right`; the binder scopes `right`.
struct Sequential {
    Expr left;
    std::string binder;
    Expr right;
};

/// `left <binder< right`; the binder scopes `left`.
struct Asymmetric {
    Expr left;
    std::string binder;
    Expr right;
};

/// `left ; right`
struct Otherwise {
    Expr left;
    Expr right;
};

/// `?k`: a site call that has not yet returned.
struct Pending {
    Handle handle = 0;
};

// The two forms below exist only at run time: a site response waiting to be
// published, and a term that can never act again.
struct Ready {
    Value value;
};

struct Stop {
};

struct ExprNode : std::variant<SiteCall, DefCall, Parallel, Sequential, Asymmetric, Otherwise, Pending, Ready,
                               Stop> {
    using variant::variant;
};

template <typename T>
inline const T* Expr::as() const
{
    return std::get_if<T>(static_cast<const ExprNode::variant*>(node_.get()));
}

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------
// Construction helpers.

inline Expr make(ExprNode node)
{
    return Expr{std::make_shared<const ExprNode>(std::move(node))};
}

inline Expr site(std::string name, std::vector<Arg> args = {})
{
    return make(SiteCall{std::move(name), std::move(args)});
}

inline Expr def_call(std::string name, std::vector<Arg> args = {})
{
    return make(DefCall{std::move(name), std::move(args)});
}

inline Expr par(Expr a, Expr b)
{
    return make(Parallel{std::move(a), std::move(b)});
}

inline Expr seq(Expr a, std::string x, Expr b)
{
    return make(Sequential{std::move(a), std::move(x), std::move(b)});
}

inline Expr seq(Expr a, Expr b)
{
    return seq(std::move(a), kAnonymousBinder, std::move(b));
}

inline Expr asym(Expr a, std::string x, Expr b)
{
    return make(Asymmetric{std::move(a), std::move(x), std::move(b)});
}

inline Expr asym(Expr a, Expr b)
{
    return asym(std::move(a), kAnonymousBinder, std::move(b));
}

inline Expr otherwise(Expr a, Expr b)
{
    return make(Otherwise{std::move(a), std::move(b)});
}

inline Expr pending(Handle h)
{
    return make(Pending{h});
}

inline Expr ready(Value v)
{
    return make(Ready{std::move(v)});
}

inline Expr stop()
{
    return make(Stop{});
}

inline Arg var(std::string name)
{
    return Variable{std::move(name)};
}

inline Arg lit(Value v)
{
    return v;
}

inline Arg lit(std::int64_t n)
{
    return Value::integer(n);
}

inline Arg lit(bool b)
{
    return Value::boolean(b);
}

inline Arg lit(const char* s)
{
    return Value::string(s);
}

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------
// Structural equality.

inline bool operator==(const Expr& a, const Expr& b);

namespace detail {

struct ExprEqual {
    const ExprNode& rhs;

    bool operator()(const SiteCall& l) const
    {
        const auto& r = std::get<SiteCall>(rhs);
        return l.site == r.site && l.args == r.args;
    }
    bool operator()(const DefCall& l) const
    {
        const auto& r = std::get<DefCall>(rhs);
        return l.name == r.name && l.args == r.args;
    }
    bool operator()(const Parallel& l) const
    {
        const auto& r = std::get<Parallel>(rhs);
        return l.left == r.left && l.right == r.right;
    }
    bool operator()(const Sequential& l) const
    {
        const auto& r = std::get<Sequential>(rhs);
        return l.binder == r.binder && l.left == r.left && l.right == r.right;
    }
    bool operator()(const Asymmetric& l) const
    {
        const auto& r = std::get<Asymmetric>(rhs);
        return l.binder == r.binder && l.left == r.left && l.right == r.right;
    }
    bool operator()(const Otherwise& l) const
    {
        const auto& r = std::get<Otherwise>(rhs);
        return l.left == r.left && l.right == r.right;
    }
    bool operator()(const Pending& l) const { return l.handle == std::get<Pending>(rhs).handle; }
    bool operator()(const Ready& l) const { return l.value == std::get<Ready>(rhs).value; }
    bool operator()(const Stop&) const { return true; }
};

}  // namespace detail

inline bool operator==(const Expr& a, const Expr& b)
{
    if (a.same_node(b)) {
        return true;
    }
    if (a.node().index() != b.node().index()) {
        return false;
    }
    return std::visit(detail::ExprEqual{b.node()}, static_cast<const ExprNode::variant&>(a.node()));
}

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------
// Free variables and substitution.

namespace detail {

inline void collect_free(const Expr& e, std::multiset<std::string>& bound, std::set<std::string>& out)
{
    auto visit_args = [&](const std::vector<Arg>& args) {
        for (const Arg& a : args) {
            if (const auto* v = std::get_if<Variable>(&a); v && bound.count(v->name) == 0) {
                out.insert(v->name);
            }
        }
    };
    auto with_binder = [&](const std::string& x, const Expr& scope) {
        auto it = bound.insert(x);
        collect_free(scope, bound, out);
        bound.erase(it);
    };

    if (const auto* n = e.as<SiteCall>()) {
        visit_args(n->args);
    } else if (const auto* n = e.as<DefCall>()) {
        visit_args(n->args);
    } else if (const auto* n = e.as<Parallel>()) {
        collect_free(n->left, bound, out);
        collect_free(n->right, bound, out);
    } else if (const auto* n = e.as<Sequential>()) {
        collect_free(n->left, bound, out);
        with_binder(n->binder, n->right);
    } else if (const auto* n = e.as<Asymmetric>()) {
        with_binder(n->binder, n->left);
        collect_free(n->right, bound, out);
    } else if (const auto* n = e.as<Otherwise>()) {
        collect_free(n->left, bound, out);
        collect_free(n->right, bound, out);
    }
}

inline std::vector<Arg> substitute_args(const std::vector<Arg>& args, const std::string& x, const Value& v,
                                        bool& changed)
{
    std::vector<Arg> out = args;
    for (Arg& a : out) {
        if (const auto* var = std::get_if<Variable>(&a); var && var->name == x) {
            a = v;
            changed = true;
        }
    }
    return out;
}

}  // namespace detail

/// Variables with at least one free occurrence in `e`.
inline std::set<std::string> free_vars(const Expr& e)
{
    std::multiset<std::string> bound;
    std::set<std::string> out;
    detail::collect_free(e, bound, out);
    return out;
}

/// `[v/x].e`: replaces the free occurrences of `x`. Unchanged subtrees are
/// shared with the input.
inline Expr substitute(const Expr& e, const std::string& x, const Value& v)
{
    if (x.empty()) {
        return e;
    }
    if (const auto* n = e.as<SiteCall>()) {
        bool changed = false;
        auto args = detail::substitute_args(n->args, x, v, changed);
        return changed ? site(n->site, std::move(args)) : e;
    }
    if (const auto* n = e.as<DefCall>()) {
        bool changed = false;
        auto args = detail::substitute_args(n->args, x, v, changed);
        return changed ? def_call(n->name, std::move(args)) : e;
    }
    auto rebuild2 = [&](const Expr& l, const Expr& r, auto&& mk) {
        Expr nl = substitute(l, x, v);
        Expr nr = substitute(r, x, v);
        return (nl.same_node(l) && nr.same_node(r)) ? e : mk(std::move(nl), std::move(nr));
    };
    if (const auto* n = e.as<Parallel>()) {
        return rebuild2(n->left, n->right, [](Expr a, Expr b) { return par(std::move(a), std::move(b)); });
    }
    if (const auto* n = e.as<Otherwise>()) {
        return rebuild2(n->left, n->right, [](Expr a, Expr b) { return otherwise(std::move(a), std::move(b)); });
    }
    if (const auto* n = e.as<Sequential>()) {
        Expr nl = substitute(n->left, x, v);
        Expr nr = n->binder == x ? n->right : substitute(n->right, x, v);
        if (nl.same_node(n->left) && nr.same_node(n->right)) {
            return e;
        }
        return seq(std::move(nl), n->binder, std::move(nr));
    }
    if (const auto* n = e.as<Asymmetric>()) {
        Expr nl = n->binder == x ? n->left : substitute(n->left, x, v);
        Expr nr = substitute(n->right, x, v);
        if (nl.same_node(n->left) && nr.same_node(n->right)) {
            return e;
        }
        return asym(std::move(nl), n->binder, std::move(nr));
    }
    return e;
}

/// True when every argument is a value.
inline bool args_ground(const std::vector<Arg>& args)
{
    for (const Arg& a : args) {
        if (!std::holds_alternative<Value>(a)) {
            return false;
        }
    }
    return true;
}

inline std::vector<Value> ground_args(const std::vector<Arg>& args)
{
    std::vector<Value> out;
    out.reserve(args.size());
    for (const Arg& a : args) {
        out.push_back(std::get<Value>(a));
    }
    return out;
}

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------
// Programs and site environments.

enum class BuiltinSite { If, Rtimer, Signal, Zero, Let };

struct ExternalSite {
    std::vector<Value> responses{Value::signal()};  // cycled per call
    bool responsive = true;
    std::int64_t delay = 0;  // logical ticks between call and response

    bool operator==(const ExternalSite&) const = default;
};

struct SiteSpec {
    std::variant<BuiltinSite, ExternalSite> behaviour;

    bool operator==(const SiteSpec&) const = default;
};

inline std::optional<BuiltinSite> builtin_site(const std::string& name)
{
    if (name == "if") {
        return BuiltinSite::If;
    }
    if (name == "Rtimer") {
        return BuiltinSite::Rtimer;
    }
    if (name == "Signal") {
        return BuiltinSite::Signal;
    }
    if (name == "0") {
        return BuiltinSite::Zero;
    }
    if (name == "let") {
        return BuiltinSite::Let;
    }
    return std::nullopt;
}

struct Definition {
    std::vector<std::string> params;
    Expr body;

    bool operator==(const Definition& other) const { return params == other.params && body == other.body; }
};

struct Program {
    std::map<std::string, Definition> definitions;
    Expr goal;
    std::map<std::string, ExternalSite> sites;  // declared external sites

    bool operator==(const Program& other) const
    {
        return definitions == other.definitions && goal == other.goal && sites == other.sites;
    }

    /// Behaviour of a site name: builtin, declared, or the default external
    /// stub (responds once with a signal, immediately).
    SiteSpec site_spec(const std::string& name) const
    {
        if (auto b = builtin_site(name)) {
            return SiteSpec{*b};
        }
        if (auto it = sites.find(name); it != sites.end()) {
            return SiteSpec{it->second};
        }
        return SiteSpec{ExternalSite{}};
    }
};

inline Program program_of(Expr goal)
{
    Program p;
    p.goal = std::move(goal);
    return p;
}

}  // namespace orcline::orc
