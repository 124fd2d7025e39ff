#pragma once

#include <orcline/diagnostics.hpp>
#include <orcline/fm/model.hpp>
#include <orcline/lexer.hpp>

#include <json.hpp>

#include <set>
#include <string>
#include <string_view>
#include <vector>

// .fm format
//
//   family NAME { ITEM* CONSTRAINT* }
//   ITEM       := (mandatory | optional) NAME ("{" ITEM* "}")?
//               | alternative "{" NAME ("," NAME)+ "}"
//   CONSTRAINT := requires NAME NAME | excludes NAME NAME
//
// Constraints may reference any features of the family, declared before or
// after the constraint.

namespace orcline::fm {

namespace detail {

class FmParser
{
   public:
    FmParser(std::string_view src, std::vector<ParseDiagnostic>& diags)
        : ts_(tokenize(src, diags), diags)
    {
    }

    std::optional<FeatureModel> parse()
    {
        if (!ts_.accept_ident("family")) {
            ts_.error(ts_.peek(), "expected 'family NAME {'");
            return std::nullopt;
        }
        std::string name;
        if (!ts_.expect_ident(name, "family name")) {
            return std::nullopt;
        }
        FeatureModel fm(name);
        names_.insert(name);
        if (!ts_.expect_punct('{')) {
            return std::nullopt;
        }
        if (!items(fm, name, true)) {
            return std::nullopt;
        }
        if (!ts_.at_end()) {
            ts_.error(ts_.peek(), "unexpected " + TokenStream::describe(ts_.peek()) + " after the family");
            return std::nullopt;
        }
        for (const auto& [kind, a, b, tok] : pending_) {
            bool ok = true;
            for (const auto* f : {&a, &b}) {
                if (!fm.contains(*f)) {
                    ts_.error(tok, std::string(constraint_name(kind)) + " references unknown feature '" + *f + "'");
                    ok = false;
                }
            }
            if (ok && a == b) {
                ts_.error(tok, std::string(constraint_name(kind)) + " needs two distinct features");
                ok = false;
            }
            if (ok) {
                fm.add_constraint(kind, a, b);
            }
        }
        return fm;
    }

   private:
    struct PendingConstraint {
        Constraint::Kind kind;
        FeatureName a;
        FeatureName b;
        Token at;
    };

    bool declare(const Token& tok)
    {
        if (!names_.insert(tok.text).second) {
            ts_.error(tok, "duplicate feature '" + tok.text + "'");
            return false;
        }
        return true;
    }

    // Parses ITEMs up to and including the closing brace.
    bool items(FeatureModel& fm, const FeatureName& parent, bool top)
    {
        while (true) {
            if (ts_.accept_punct('}')) {
                return true;
            }
            const Token kw = ts_.peek();
            if (kw.kind == TokenKind::End) {
                ts_.error(kw, "missing '}'");
                return false;
            }
            if (kw.is_ident("mandatory") || kw.is_ident("optional")) {
                ts_.next();
                const Token name = ts_.peek();
                std::string child;
                if (!ts_.expect_ident(child, "feature name")) {
                    return false;
                }
                const bool fresh = declare(name);
                if (fresh) {
                    fm.add_child(parent, child, kw.is_ident("mandatory") ? NodeKind::Mandatory : NodeKind::Optional);
                }
                if (ts_.accept_punct('{')) {
                    if (!items(fm, fresh ? child : parent, false)) {
                        return false;
                    }
                }
            } else if (kw.is_ident("alternative")) {
                ts_.next();
                if (!ts_.expect_punct('{')) {
                    return false;
                }
                std::vector<FeatureName> members;
                bool fresh = true;
                do {
                    const Token name = ts_.peek();
                    std::string member;
                    if (!ts_.expect_ident(member, "alternative member")) {
                        return false;
                    }
                    fresh = declare(name) && fresh;
                    members.push_back(member);
                } while (ts_.accept_punct(','));
                if (!ts_.expect_punct('}')) {
                    return false;
                }
                if (members.size() < 2) {
                    ts_.error(kw, "alternative group needs at least 2 members");
                } else if (fresh) {
                    fm.add_alternative(parent, members);
                }
            } else if (top && (kw.is_ident("requires") || kw.is_ident("excludes"))) {
                ts_.next();
                PendingConstraint c{kw.is_ident("requires") ? Constraint::Requires : Constraint::Excludes, "", "", kw};
                if (!ts_.expect_ident(c.a, "feature name") || !ts_.expect_ident(c.b, "feature name")) {
                    return false;
                }
                pending_.push_back(std::move(c));
            } else {
                ts_.error(kw, "unexpected " + TokenStream::describe(kw) + " in feature tree");
                return false;
            }
        }
    }

    TokenStream ts_;
    std::set<FeatureName> names_;
    std::vector<PendingConstraint> pending_;
};

}  // namespace detail

inline ParseResult<FeatureModel> parse_feature_model(std::string_view src)
{
    ParseResult<FeatureModel> result;
    auto fm = detail::FmParser(src, result.diagnostics).parse();
    if (fm && !result.has_errors()) {
        result.value = std::move(fm);
    }
    return result;
}

namespace detail {

inline void render_children(const FeatureModel& fm, const FeatureName& f, int indent, std::string& out)
{
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    std::set<std::string> groups_done;
    for (const auto& c : fm.node(f).children) {
        const Node& n = fm.node(c);
        if (n.kind == NodeKind::AltMember) {
            if (groups_done.insert(n.group).second) {
                out += pad + "alternative { ";
                bool first = true;
                for (const auto& m : fm.node(f).children) {
                    if (fm.node(m).kind == NodeKind::AltMember && fm.node(m).group == n.group) {
                        out += (first ? "" : ", ") + m;
                        first = false;
                    }
                }
                out += " }\n";
            }
            continue;
        }
        out += pad + kind_name(n.kind) + " " + c;
        if (n.children.empty()) {
            out += "\n";
        } else {
            out += " {\n";
            render_children(fm, c, indent + 1, out);
            out += pad + "}\n";
        }
    }
}

}  // namespace detail

inline std::string render(const FeatureModel& fm)
{
    std::string out = "family " + fm.root() + " {\n";
    detail::render_children(fm, fm.root(), 1, out);
    for (const auto& k : fm.constraints()) {
        out += std::string("  ") + constraint_name(k.kind) + " " + k.a + " " + k.b + "\n";
    }
    return out + "}\n";
}

/// Configurations as sorted arrays of feature names, in set order.
inline nlohmann::json configurations_json(const std::set<Configuration>& cs)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : cs) {
        out.push_back(nlohmann::json(std::vector<FeatureName>(c.begin(), c.end())));
    }
    return out;
}

}  // namespace orcline::fm
