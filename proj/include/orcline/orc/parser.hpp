#pragma once

#include <orcline/diagnostics.hpp>
#include <orcline/lexer.hpp>
#include <orcline/orc/ast.hpp>

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Concrete syntax of orchestration programs (.orc).
//
//   program   := (site_decl | def)* expr
//   site_decl := "site" NAME ("silent" | "returns" value ("," value)*)? ("after" INT)?
//   def       := "def" NAME "(" [VAR ("," VAR)*] ")" "=" expr
//   expr      := asym (";" asym)*                   -- left associative
//   asym      := par ("<" [VAR] "<" par)*           -- left associative
//   par       := seq ("|" seq)*                     -- left associative
//   seq       := prim (">" [VAR] ">" seq)?          -- right associative
//   prim      := NAME ["(" args ")"] | "0" ["(" ")"] | "(" expr ")"
//   arg       := value | VAR
//   value     := INT | STRING | "true" | "false" | "signal" | "(" [value ("," value)* [","]] ")"
//
// `>>` and `<<` are the binder-less abbreviations.

namespace orcline::orc {

namespace detail {

struct FreeOccurrence {
    std::string name;
    SourceSpan span;
};

struct Parsed {
    Expr expr;
    std::vector<FreeOccurrence> free;
};

struct CallSite {
    std::string name;
    std::size_t arity;
    SourceSpan span;
};

inline bool is_value_keyword(const Token& t)
{
    return t.is_ident("true") || t.is_ident("false") || t.is_ident("signal");
}

inline bool starts_value(const Token& t)
{
    return t.kind == TokenKind::Int || t.kind == TokenKind::String || is_value_keyword(t) || t.is_punct('(');
}

inline std::optional<Value> parse_value(TokenStream& ts)
{
    const Token& t = ts.peek();
    if (t.kind == TokenKind::Int) {
        ts.next();
        try {
            return Value::integer(std::stoll(t.text));
        } catch (const std::exception&) {
            ts.error(t, "integer literal out of range: " + t.text);
            return std::nullopt;
        }
    }
    if (t.kind == TokenKind::String) {
        ts.next();
        return Value::string(t.text);
    }
    if (t.is_ident("true") || t.is_ident("false")) {
        ts.next();
        return Value::boolean(t.text == "true");
    }
    if (t.is_ident("signal")) {
        ts.next();
        return Value::signal();
    }
    if (t.is_punct('(')) {
        ts.next();
        Value::Tuple items;
        bool trailing_comma = false;
        while (!ts.peek().is_punct(')')) {
            auto v = parse_value(ts);
            if (!v) {
                return std::nullopt;
            }
            items.push_back(std::move(*v));
            trailing_comma = false;
            if (!ts.accept_punct(',')) {
                break;
            }
            trailing_comma = true;
        }
        if (!ts.expect_punct(')')) {
            return std::nullopt;
        }
        if (items.size() == 1 && !trailing_comma) {
            ts.error(t, "one-element tuple literal must be written with a trailing comma");
            return std::nullopt;
        }
        return Value::tuple(std::move(items));
    }
    ts.error(t, "expected a value, found " + TokenStream::describe(t));
    return std::nullopt;
}

class OrcParser
{
   public:
    OrcParser(std::string_view src, std::vector<ParseDiagnostic>& diags)
        : ts_(tokenize(src, diags), diags)
        , diags_(diags)
    {
    }

    std::optional<Program> parse_program()
    {
        Program program;
        std::set<std::string> def_names;
        std::vector<std::pair<std::string, std::vector<FreeOccurrence>>> def_free;

        while (true) {
            if (ts_.peek().is_ident("site") && ts_.peek(1).kind == TokenKind::Ident) {
                if (!parse_site_decl(program)) {
                    return std::nullopt;
                }
                continue;
            }
            if (ts_.peek().is_ident("def") && ts_.peek(1).kind == TokenKind::Ident) {
                const Token def_tok = ts_.next();
                std::string name;
                ts_.expect_ident(name, "definition name");
                if (builtin_site(name)) {
                    ts_.error(def_tok, "definition '" + name + "' shadows a fundamental site");
                }
                if (!def_names.insert(name).second) {
                    ts_.error(def_tok, "duplicate definition '" + name + "'");
                }
                Definition def;
                if (!ts_.expect_punct('(')) {
                    return std::nullopt;
                }
                while (!ts_.peek().is_punct(')')) {
                    std::string param;
                    if (!ts_.expect_ident(param, "parameter name")) {
                        return std::nullopt;
                    }
                    def.params.push_back(param);
                    if (!ts_.accept_punct(',')) {
                        break;
                    }
                }
                if (!ts_.expect_punct(')') || !ts_.expect_punct('=')) {
                    return std::nullopt;
                }
                auto body = parse_expr();
                if (!body) {
                    return std::nullopt;
                }
                def.body = body->expr;
                std::vector<FreeOccurrence> unbound;
                for (auto& occ : body->free) {
                    if (std::find(def.params.begin(), def.params.end(), occ.name) == def.params.end()) {
                        unbound.push_back(occ);
                    }
                }
                def_free.emplace_back(name, std::move(unbound));
                program.definitions[name] = std::move(def);
                continue;
            }
            break;
        }

        if (ts_.at_end()) {
            ts_.error(ts_.peek(), "program has no goal expression");
            return std::nullopt;
        }
        auto goal = parse_expr();
        if (!goal) {
            return std::nullopt;
        }
        if (!ts_.at_end()) {
            ts_.error(ts_.peek(), "unexpected " + TokenStream::describe(ts_.peek()) + " after goal expression");
            return std::nullopt;
        }
        program.goal = goal->expr;

        for (const auto& [name, occs] : def_free) {
            for (const auto& occ : occs) {
                diags_.push_back({occ.span, "variable '" + occ.name + "' is not bound in definition '" + name + "'",
                                  Severity::Warning});
            }
        }
        for (const auto& occ : goal->free) {
            diags_.push_back({occ.span, "variable '" + occ.name + "' is not bound", Severity::Warning});
        }

        for (const auto& call : calls_) {
            auto it = program.definitions.find(call.name);
            if (it != program.definitions.end() && it->second.params.size() != call.arity) {
                diags_.push_back({call.span,
                                  "definition '" + call.name + "' expects " +
                                      std::to_string(it->second.params.size()) + " argument(s), given " +
                                      std::to_string(call.arity),
                                  Severity::Error});
            }
        }
        for (const auto& [name, spec] : program.sites) {
            if (program.definitions.count(name)) {
                diags_.push_back({SourceSpan{}, "'" + name + "' is declared both as a site and a definition",
                                  Severity::Error});
            }
        }

        program.goal = resolve(program.goal, def_names);
        for (auto& [name, def] : program.definitions) {
            def.body = resolve(def.body, def_names);
        }
        return program;
    }

    std::optional<Parsed> parse_expr()
    {
        auto lhs = parse_asym();
        while (lhs && ts_.accept_punct(';')) {
            auto rhs = parse_asym();
            if (!rhs) {
                return std::nullopt;
            }
            lhs = Parsed{otherwise(lhs->expr, rhs->expr), concat(std::move(lhs->free), std::move(rhs->free))};
        }
        return lhs;
    }

   private:
    static std::vector<FreeOccurrence> concat(std::vector<FreeOccurrence> a, std::vector<FreeOccurrence> b)
    {
        a.insert(a.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end()));
        return a;
    }

    static std::vector<FreeOccurrence> without(std::vector<FreeOccurrence> occs, const std::string& x)
    {
        std::erase_if(occs, [&](const FreeOccurrence& o) { return o.name == x; });
        return occs;
    }

    // Reads the binder of `>x>` / `<x<` after the opening bracket token.
    std::optional<std::string> parse_binder(char bracket)
    {
        if (ts_.accept_punct(bracket)) {
            return kAnonymousBinder;
        }
        std::string name;
        if (!ts_.expect_ident(name, "binder variable")) {
            return std::nullopt;
        }
        if (!ts_.expect_punct(bracket)) {
            return std::nullopt;
        }
        return name;
    }

    std::optional<Parsed> parse_asym()
    {
        auto lhs = parse_par();
        while (lhs && ts_.accept_punct('<')) {
            auto binder = parse_binder('<');
            if (!binder) {
                return std::nullopt;
            }
            auto rhs = parse_par();
            if (!rhs) {
                return std::nullopt;
            }
            lhs = Parsed{asym(lhs->expr, *binder, rhs->expr),
                         concat(without(std::move(lhs->free), *binder), std::move(rhs->free))};
        }
        return lhs;
    }

    std::optional<Parsed> parse_par()
    {
        auto lhs = parse_seq();
        while (lhs && ts_.accept_punct('|')) {
            auto rhs = parse_seq();
            if (!rhs) {
                return std::nullopt;
            }
            lhs = Parsed{par(lhs->expr, rhs->expr), concat(std::move(lhs->free), std::move(rhs->free))};
        }
        return lhs;
    }

    std::optional<Parsed> parse_seq()
    {
        auto lhs = parse_prim();
        if (!lhs || !ts_.accept_punct('>')) {
            return lhs;
        }
        auto binder = parse_binder('>');
        if (!binder) {
            return std::nullopt;
        }
        auto rhs = parse_seq();
        if (!rhs) {
            return std::nullopt;
        }
        return Parsed{seq(lhs->expr, *binder, rhs->expr),
                      concat(std::move(lhs->free), without(std::move(rhs->free), *binder))};
    }

    std::optional<Parsed> parse_prim()
    {
        const Token t = ts_.peek();
        if (t.is_punct('(')) {
            ts_.next();
            auto inner = parse_expr();
            if (!inner || !ts_.expect_punct(')')) {
                return std::nullopt;
            }
            return inner;
        }
        if (t.is_punct('?')) {
            ts_.error(t, "pending-call handles cannot appear in source text");
            return std::nullopt;
        }
        std::string name;
        if (t.kind == TokenKind::Int && t.text == "0") {
            name = "0";
        } else if (t.kind == TokenKind::Ident && !is_value_keyword(t)) {
            name = t.text;
        } else {
            ts_.error(t, "expected an expression, found " + TokenStream::describe(t));
            return std::nullopt;
        }
        ts_.next();

        Parsed out;
        std::vector<Arg> args;
        if (ts_.accept_punct('(')) {
            while (!ts_.peek().is_punct(')')) {
                const Token& a = ts_.peek();
                if (a.kind == TokenKind::Ident && !is_value_keyword(a)) {
                    out.free.push_back({a.text, a.span});
                    args.push_back(Variable{a.text});
                    ts_.next();
                } else if (starts_value(a)) {
                    auto v = parse_value(ts_);
                    if (!v) {
                        return std::nullopt;
                    }
                    args.push_back(std::move(*v));
                } else {
                    ts_.error(a, "expected an argument, found " + TokenStream::describe(a));
                    return std::nullopt;
                }
                if (!ts_.accept_punct(',')) {
                    break;
                }
            }
            if (!ts_.expect_punct(')')) {
                return std::nullopt;
            }
        }
        calls_.push_back({name, args.size(), t.span});
        out.expr = site(std::move(name), std::move(args));
        return out;
    }

    bool parse_site_decl(Program& program)
    {
        const Token kw = ts_.next();
        std::string name;
        ts_.expect_ident(name, "site name");
        if (builtin_site(name)) {
            ts_.error(kw, "cannot redeclare fundamental site '" + name + "'");
        }
        if (program.sites.count(name)) {
            ts_.error(kw, "duplicate site declaration '" + name + "'");
        }
        ExternalSite spec;
        if (ts_.accept_ident("silent")) {
            spec.responsive = false;
        } else if (ts_.accept_ident("returns")) {
            spec.responses.clear();
            do {
                auto v = parse_value(ts_);
                if (!v) {
                    return false;
                }
                spec.responses.push_back(std::move(*v));
            } while (ts_.accept_punct(','));
        }
        if (ts_.peek().is_ident("after")) {
            const Token after = ts_.next();
            const Token& n = ts_.peek();
            if (n.kind != TokenKind::Int || n.text.front() == '-') {
                ts_.error(after, "'after' expects a non-negative tick count");
                return false;
            }
            spec.delay = std::stoll(n.text);
            ts_.next();
        }
        program.sites[name] = std::move(spec);
        return true;
    }

    static Expr resolve(const Expr& e, const std::set<std::string>& defs)
    {
        if (const auto* n = e.as<SiteCall>()) {
            return defs.count(n->site) ? def_call(n->site, n->args) : e;
        }
        if (const auto* n = e.as<Parallel>()) {
            return par(resolve(n->left, defs), resolve(n->right, defs));
        }
        if (const auto* n = e.as<Sequential>()) {
            return seq(resolve(n->left, defs), n->binder, resolve(n->right, defs));
        }
        if (const auto* n = e.as<Asymmetric>()) {
            return asym(resolve(n->left, defs), n->binder, resolve(n->right, defs));
        }
        if (const auto* n = e.as<Otherwise>()) {
            return otherwise(resolve(n->left, defs), resolve(n->right, defs));
        }
        return e;
    }

    TokenStream ts_;
    std::vector<ParseDiagnostic>& diags_;
    std::vector<CallSite> calls_;
};

}  // namespace detail

/// Parses a complete program. Unbound variables are warnings; malformed
/// syntax and arity mismatches on definition calls are errors.
inline ParseResult<Program> parse_program(std::string_view src)
{
    ParseResult<Program> result;
    detail::OrcParser parser(src, result.diagnostics);
    auto program = parser.parse_program();
    if (program && !result.has_errors()) {
        result.value = std::move(program);
    } else if (!result.has_errors()) {
        result.diagnostics.push_back({SourceSpan{}, "parse failed", Severity::Error});
    }
    return result;
}

/// Parses a bare expression (no declarations).
inline ParseResult<Expr> parse_expr(std::string_view src)
{
    auto program = parse_program(src);
    ParseResult<Expr> result;
    result.diagnostics = std::move(program.diagnostics);
    if (program.ok()) {
        if (!program->definitions.empty() || !program->sites.empty()) {
            result.diagnostics.push_back({SourceSpan{}, "expected a bare expression", Severity::Error});
        } else {
            result.value = program->goal;
        }
    }
    return result;
}

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------
// Rendering with minimal parentheses.

namespace detail {

enum Level : int { kOtherwise = 0, kAsym = 1, kPar = 2, kSeq = 3, kAtom = 4 };

inline int level_of(const Expr& e)
{
    if (e.is<Otherwise>()) {
        return kOtherwise;
    }
    if (e.is<Asymmetric>()) {
        return kAsym;
    }
    if (e.is<Parallel>()) {
        return kPar;
    }
    if (e.is<Sequential>()) {
        return kSeq;
    }
    return kAtom;
}

inline std::string render_args(const std::vector<Arg>& args)
{
    std::string out = "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) {
            out += ", ";
        }
        if (const auto* v = std::get_if<Variable>(&args[i])) {
            out += v->name;
        } else {
            out += std::get<Value>(args[i]).to_string();
        }
    }
    return out + ")";
}

inline void render_expr(const Expr& e, int min_level, std::string& out)
{
    const int level = level_of(e);
    const bool parens = level < min_level;
    if (parens) {
        out += '(';
    }
    if (const auto* n = e.as<SiteCall>()) {
        out += n->site + render_args(n->args);
    } else if (const auto* n = e.as<DefCall>()) {
        out += n->name + render_args(n->args);
    } else if (const auto* n = e.as<Otherwise>()) {
        render_expr(n->left, kOtherwise, out);
        out += " ; ";
        render_expr(n->right, kAsym, out);
    } else if (const auto* n = e.as<Asymmetric>()) {
        render_expr(n->left, kAsym, out);
        out += " <" + n->binder + "< ";
        render_expr(n->right, kPar, out);
    } else if (const auto* n = e.as<Parallel>()) {
        render_expr(n->left, kPar, out);
        out += " | ";
        render_expr(n->right, kSeq, out);
    } else if (const auto* n = e.as<Sequential>()) {
        render_expr(n->left, kAtom, out);
        out += " >" + n->binder + "> ";
        render_expr(n->right, kSeq, out);
    } else if (const auto* n = e.as<Pending>()) {
        out += "?" + std::to_string(n->handle);
    } else if (const auto* n = e.as<Ready>()) {
        out += "!" + n->value.to_string();
    } else {
        out += "#stop";
    }
    if (parens) {
        out += ')';
    }
}

}  // namespace detail

/// Minimally parenthesized text; parse_expr(render(e)) == e for source-level
/// expressions. Run-time forms print as `?k`, `!v` and `#stop`.
inline std::string render(const Expr& e)
{
    std::string out;
    detail::render_expr(e, detail::kOtherwise, out);
    return out;
}

/// Fully parenthesized text, used to check that precedence only removes
/// redundant brackets.
inline std::string render_fully_parenthesized(const Expr& e)
{
    auto wrap = [](const std::string& s) { return "(" + s + ")"; };
    if (const auto* n = e.as<Otherwise>()) {
        return wrap(render_fully_parenthesized(n->left) + " ; " + render_fully_parenthesized(n->right));
    }
    if (const auto* n = e.as<Asymmetric>()) {
        return wrap(render_fully_parenthesized(n->left) + " <" + n->binder + "< " +
                    render_fully_parenthesized(n->right));
    }
    if (const auto* n = e.as<Parallel>()) {
        return wrap(render_fully_parenthesized(n->left) + " | " + render_fully_parenthesized(n->right));
    }
    if (const auto* n = e.as<Sequential>()) {
        return wrap(render_fully_parenthesized(n->left) + " >" + n->binder + "> " +
                    render_fully_parenthesized(n->right));
    }
    return render(e);
}

inline std::string render_site_decl(const std::string& name, const ExternalSite& spec)
{
    std::string out = "site " + name;
    if (!spec.responsive) {
        out += " silent";
    } else {
        out += " returns ";
        for (std::size_t i = 0; i < spec.responses.size(); ++i) {
            out += (i ? ", " : "") + spec.responses[i].to_string();
        }
    }
    if (spec.delay != 0) {
        out += " after " + std::to_string(spec.delay);
    }
    return out;
}

inline std::string render(const Program& p)
{
    std::string out;
    for (const auto& [name, spec] : p.sites) {
        out += render_site_decl(name, spec) + "\n";
    }
    for (const auto& [name, def] : p.definitions) {
        out += "def " + name + "(";
        for (std::size_t i = 0; i < def.params.size(); ++i) {
            out += (i ? ", " : "") + def.params[i];
        }
        out += ") = " + render(def.body) + "\n";
    }
    return out + render(p.goal) + "\n";
}

}  // namespace orcline::orc
