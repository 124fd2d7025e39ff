#pragma once

#include <orcline/diagnostics.hpp>
#include <orcline/lexer.hpp>
#include <orcline/mts/model.hpp>
#include <orcline/mts/product.hpp>

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

// Line-oriented model formats.
//
//   .mts                         .lts
//   mts NAME                     lts NAME
//   states s0 s1 ...             states s0 s1 ...
//   [actions a b ...]            [actions a b ...]
//   init s0                      init s0
//   must SRC ACTION DST          trans SRC ACTION DST
//   may  SRC ACTION DST
//
// ACTION is an identifier or a double-quoted string. `actions` declares
// alphabet members that label no transition.

namespace orcline::mts {

namespace detail {

inline bool is_identifier(const std::string& s)
{
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) {
        return false;
    }
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
            return false;
        }
    }
    return true;
}

inline std::string render_action(const std::string& a)
{
    if (is_identifier(a)) {
        return a;
    }
    std::string out = "\"";
    for (char c : a) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    return out + "\"";
}

struct RawModel {
    std::string name;
    std::vector<std::string> states;
    std::vector<std::string> actions;
    std::optional<std::string> init;
    struct Edge {
        std::string kind;
        std::string source;
        std::string action;
        std::string target;
        SourceSpan span;
    };
    std::vector<Edge> edges;
};

// Reads either format; `edge_keywords` lists the transition directives
// accepted.
inline std::optional<RawModel> read_model(std::string_view src, std::string_view header,
                                          const std::vector<std::string>& edge_keywords,
                                          std::vector<ParseDiagnostic>& diags)
{
    auto tokens = tokenize(src, diags);
    TokenStream ts(std::move(tokens), diags);
    RawModel raw;

    if (!ts.peek().is_ident(header)) {
        ts.error(ts.peek(), "expected '" + std::string(header) + " NAME' header");
        return std::nullopt;
    }
    ts.next();
    if (!ts.expect_ident(raw.name, "model name")) {
        return std::nullopt;
    }

    auto name_token = [&](const Token& t) {
        return t.kind == TokenKind::Ident || t.kind == TokenKind::Int;
    };

    std::set<std::string> declared;
    while (!ts.at_end()) {
        const Token kw = ts.next();
        if (kw.is_ident("states")) {
            while (!ts.at_end() && ts.peek().span.line == kw.span.line) {
                const Token s = ts.next();
                if (!name_token(s)) {
                    ts.error(s, "expected a state name, found " + TokenStream::describe(s));
                    return std::nullopt;
                }
                if (!declared.insert(s.text).second) {
                    ts.error(s, "duplicate state declaration '" + s.text + "'");
                    continue;
                }
                raw.states.push_back(s.text);
            }
        } else if (kw.is_ident("actions")) {
            while (!ts.at_end() && ts.peek().span.line == kw.span.line) {
                const Token a = ts.next();
                if (a.kind != TokenKind::Ident && a.kind != TokenKind::String) {
                    ts.error(a, "expected an action, found " + TokenStream::describe(a));
                    return std::nullopt;
                }
                raw.actions.push_back(a.text);
            }
        } else if (kw.is_ident("init")) {
            const Token s = ts.next();
            if (!name_token(s)) {
                ts.error(s, "expected the initial state name");
                return std::nullopt;
            }
            if (raw.init) {
                ts.error(kw, "initial state declared twice");
            }
            raw.init = s.text;
        } else if (kw.kind == TokenKind::Ident &&
                   std::find(edge_keywords.begin(), edge_keywords.end(), kw.text) != edge_keywords.end()) {
            const Token s = ts.next();
            const Token a = ts.next();
            const Token d = ts.next();
            if (!name_token(s) || !name_token(d) ||
                (a.kind != TokenKind::Ident && a.kind != TokenKind::String)) {
                ts.error(kw, "expected '" + kw.text + " SRC ACTION DST'");
                return std::nullopt;
            }
            raw.edges.push_back({kw.text, s.text, a.text, d.text, kw.span});
        } else {
            ts.error(kw, "unknown directive " + TokenStream::describe(kw));
            return std::nullopt;
        }
    }

    if (!raw.init) {
        diags.push_back({SourceSpan{}, "missing 'init' declaration", Severity::Error});
    } else if (!declared.count(*raw.init)) {
        diags.push_back({SourceSpan{}, "initial state '" + *raw.init + "' is not declared", Severity::Error});
    }
    for (const auto& e : raw.edges) {
        for (const auto* s : {&e.source, &e.target}) {
            if (!declared.count(*s)) {
                diags.push_back({e.span, "transition references undeclared state '" + *s + "'", Severity::Error});
            }
        }
    }
    return raw;
}

inline bool has_error(const std::vector<ParseDiagnostic>& diags)
{
    for (const auto& d : diags) {
        if (d.severity == Severity::Error) {
            return true;
        }
    }
    return false;
}

}  // namespace detail

/// Loads an MTS. Every `must` triple is also entered as a `may` triple.
inline ParseResult<Mts> parse_mts(std::string_view src)
{
    ParseResult<Mts> result;
    auto raw = detail::read_model(src, "mts", {"must", "may"}, result.diagnostics);
    if (!raw || detail::has_error(result.diagnostics)) {
        return result;
    }
    Mts m(raw->name);
    for (const auto& s : raw->states) {
        m.add_state(s);
    }
    for (const auto& a : raw->actions) {
        m.add_action(a);
    }
    m.set_initial(m.states().id(*raw->init));
    for (const auto& e : raw->edges) {
        const StateId from = m.states().id(e.source);
        const StateId to = m.states().id(e.target);
        if (e.kind == "must") {
            m.add_must(from, e.action, to);
        } else {
            m.add_may(from, e.action, to);
        }
    }
    result.value = std::move(m);
    return result;
}

inline ParseResult<Lts> parse_lts(std::string_view src)
{
    ParseResult<Lts> result;
    auto raw = detail::read_model(src, "lts", {"trans"}, result.diagnostics);
    if (!raw || detail::has_error(result.diagnostics)) {
        return result;
    }
    Lts l(raw->name);
    for (const auto& s : raw->states) {
        l.add_state(s);
    }
    for (const auto& a : raw->actions) {
        l.add_action(a);
    }
    l.set_initial(l.states().id(*raw->init));
    for (const auto& e : raw->edges) {
        l.add_transition(l.states().id(e.source), e.action, l.states().id(e.target));
    }
    result.value = std::move(l);
    return result;
}

namespace detail {

inline std::string render_header(const char* kind, const std::string& name, const StateTable& states,
                                 StateId init, const std::set<std::string>& actions,
                                 const std::set<std::string>& used)
{
    std::string out = std::string(kind) + " " + (name.empty() ? "unnamed" : name) + "\nstates";
    for (const auto& s : states.names()) {
        out += " " + s;
    }
    out += "\n";
    std::string unused;
    for (const auto& a : actions) {
        if (!used.count(a)) {
            unused += " " + render_action(a);
        }
    }
    if (!unused.empty()) {
        out += "actions" + unused + "\n";
    }
    if (states.size() > 0) {
        out += "init " + states.name(init) + "\n";
    }
    return out;
}

}  // namespace detail

inline std::string render_mts(const Mts& m)
{
    std::set<std::string> used;
    for (const auto& t : m.may()) {
        used.insert(t.action);
    }
    std::string out = detail::render_header("mts", m.name(), m.states(), m.initial(), m.actions(), used);
    for (const auto& t : m.must()) {
        out += "must " + m.states().name(t.source) + " " + detail::render_action(t.action) + " " +
               m.states().name(t.target) + "\n";
    }
    for (const auto& t : m.may_only()) {
        out += "may " + m.states().name(t.source) + " " + detail::render_action(t.action) + " " +
               m.states().name(t.target) + "\n";
    }
    return out;
}

inline std::string render_lts(const Lts& l)
{
    std::set<std::string> used;
    for (const auto& t : l.transitions()) {
        used.insert(t.action);
    }
    std::string out = detail::render_header("lts", l.name(), l.states(), l.initial(), l.actions(), used);
    for (const auto& t : l.transitions()) {
        out += "trans " + l.states().name(t.source) + " " + detail::render_action(t.action) + " " +
               l.states().name(t.target) + "\n";
    }
    return out;
}

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------
// DOT export: must edges solid, may-only edges dashed, initial state marked by
// an incoming arrow from an invisible point node.

namespace detail {

inline std::string dot_id(const std::string& s)
{
    return is_identifier(s) ? s : render_action(s);
}

inline std::string dot_label(const std::string& s)
{
    return render_action(s).front() == '"' ? render_action(s) : "\"" + s + "\"";
}

inline std::string dot_prelude(const std::string& name, const StateTable& states, StateId init)
{
    std::string out = "digraph " + dot_id(name.empty() ? "model" : name) + " {\n";
    out += "  __init [shape=point];\n";
    for (StateId q = 0; q < states.size(); ++q) {
        out += "  " + dot_id(states.name(q)) + (q == init ? " [shape=doublecircle];\n" : " [shape=circle];\n");
    }
    if (states.size() > 0) {
        out += "  __init -> " + dot_id(states.name(init)) + ";\n";
    }
    return out;
}

}  // namespace detail

inline std::string export_dot(const Mts& m)
{
    std::string out = detail::dot_prelude(m.name(), m.states(), m.initial());
    for (const auto& t : m.must()) {
        out += "  " + detail::dot_id(m.states().name(t.source)) + " -> " + detail::dot_id(m.states().name(t.target)) +
               " [label=" + detail::dot_label(t.action) + "];\n";
    }
    for (const auto& t : m.may_only()) {
        out += "  " + detail::dot_id(m.states().name(t.source)) + " -> " + detail::dot_id(m.states().name(t.target)) +
               " [label=" + detail::dot_label(t.action) + ", style=dashed];\n";
    }
    return out + "}\n";
}

inline std::string export_dot(const Lts& l)
{
    return export_dot(Mts::from_lts(l));
}

}  // namespace orcline::mts
