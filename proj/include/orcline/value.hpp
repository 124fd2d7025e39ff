#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace orcline {

struct SignalValue {
    bool operator==(const SignalValue&) const = default;
};

/// A value flowing through an orchestration: the unit signal, a boolean, an
/// integer, a string, or a tuple of values.
class Value
{
   public:
    using Tuple = std::vector<Value>;

    Value() = default;

    static Value signal() { return Value{}; }
    static Value boolean(bool b) { return Value{Rep{std::in_place_type<bool>, b}}; }
    static Value integer(std::int64_t n) { return Value{Rep{std::in_place_type<std::int64_t>, n}}; }
    static Value string(std::string s) { return Value{Rep{std::in_place_type<std::string>, std::move(s)}}; }
    static Value tuple(Tuple items) { return Value{Rep{std::in_place_type<Tuple>, std::move(items)}}; }

    bool is_signal() const { return std::holds_alternative<SignalValue>(rep_); }
    bool is_bool() const { return std::holds_alternative<bool>(rep_); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(rep_); }
    bool is_string() const { return std::holds_alternative<std::string>(rep_); }
    bool is_tuple() const { return std::holds_alternative<Tuple>(rep_); }

    bool as_bool() const { return std::get<bool>(rep_); }
    std::int64_t as_int() const { return std::get<std::int64_t>(rep_); }
    const std::string& as_string() const { return std::get<std::string>(rep_); }
    const Tuple& as_tuple() const { return std::get<Tuple>(rep_); }

    /// Short type tag used by the JSON trace format.
    const char* type_name() const
    {
        switch (rep_.index()) {
            case 0:
                return "signal";
            case 1:
                return "bool";
            case 2:
                return "int";
            case 3:
                return "str";
            default:
                return "tuple";
        }
    }

    friend bool operator==(const Value& a, const Value& b) { return a.rep_ == b.rep_; }

    friend std::strong_ordering operator<=>(const Value& a, const Value& b)
    {
        if (a.rep_.index() != b.rep_.index()) {
            return a.rep_.index() <=> b.rep_.index();
        }
        switch (a.rep_.index()) {
            case 0:
                return std::strong_ordering::equal;
            case 1:
                return a.as_bool() <=> b.as_bool();
            case 2:
                return a.as_int() <=> b.as_int();
            case 3:
                return a.as_string().compare(b.as_string()) <=> 0;
            default:
                return std::lexicographical_compare_three_way(a.as_tuple().begin(), a.as_tuple().end(),
                                                              b.as_tuple().begin(), b.as_tuple().end());
        }
    }

    /// Literal syntax shared by all text formats: `signal`, `true`, `42`,
    /// `"text"`, `(1, "a")`. A one-element tuple prints as `(x,)`.
    std::string to_string() const
    {
        switch (rep_.index()) {
            case 0:
                return "signal";
            case 1:
                return as_bool() ? "true" : "false";
            case 2:
                return std::to_string(as_int());
            case 3:
                return quote(as_string());
            default: {
                std::string out = "(";
                const Tuple& items = as_tuple();
                for (std::size_t i = 0; i < items.size(); ++i) {
                    if (i) {
                        out += ", ";
                    }
                    out += items[i].to_string();
                }
                return out + (items.size() == 1 ? ",)" : ")");
            }
        }
    }

    static std::string quote(const std::string& s)
    {
        std::string out = "\"";
        for (char c : s) {
            switch (c) {
                case '"':
                    out += "\\\"";
                    break;
                case '\\':
                    out += "\\\\";
                    break;
                case '\n':
                    out += "\\n";
                    break;
                case '\t':
                    out += "\\t";
                    break;
                default:
                    out += c;
            }
        }
        return out + "\"";
    }

   private:
    using Rep = std::variant<SignalValue, bool, std::int64_t, std::string, Tuple>;

    explicit Value(Rep rep)
        : rep_(std::move(rep))
    {
    }

    Rep rep_;
};

inline std::ostream& operator<<(std::ostream& out, const Value& v)
{
    return out << v.to_string();
}

/// A multiset of values, kept sorted.
using ValueBag = std::vector<Value>;

}  // namespace orcline
