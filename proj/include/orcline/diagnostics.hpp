#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace orcline {

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------
// Errors raised by library operations. Parse failures never throw; they come
// back as diagnostics inside a ParseResult.

class Error : public std::runtime_error
{
   public:
    using std::runtime_error::runtime_error;
};

class BoundExceeded : public Error
{
   public:
    using Error::Error;
};

class UnknownFeature : public Error
{
   public:
    using Error::Error;
};

class ActionMismatch : public Error
{
   public:
    using Error::Error;
};

//=#=#==#==#===============+=+=+=+=++=++++++++++++++-++-+--+-+----+---------------

struct SourceSpan {
    std::size_t line = 1;
    std::size_t column = 1;
    std::size_t length = 0;

    bool operator==(const SourceSpan&) const = default;
};

enum class Severity { Error, Warning };

struct ParseDiagnostic {
    SourceSpan span;
    std::string message;
    Severity severity = Severity::Error;
};

inline std::ostream& operator<<(std::ostream& out, const ParseDiagnostic& d)
{
    return out << d.span.line << ":" << d.span.column << ": "
               << (d.severity == Severity::Error ? "error" : "warning") << ": " << d.message;
}

/// Outcome of parsing one of the text formats: a value when no Error
/// diagnostic was produced, plus every diagnostic (warnings included).
template <typename T>
struct ParseResult {
    std::optional<T> value;
    std::vector<ParseDiagnostic> diagnostics;

    bool ok() const { return value.has_value(); }
    explicit operator bool() const { return ok(); }

    const T& operator*() const { return *value; }
    T& operator*() { return *value; }
    const T* operator->() const { return &*value; }
    T* operator->() { return &*value; }

    bool has_errors() const
    {
        for (const auto& d : diagnostics) {
            if (d.severity == Severity::Error) {
                return true;
            }
        }
        return false;
    }

    std::string error_text() const
    {
        std::string out;
        for (const auto& d : diagnostics) {
            out += std::to_string(d.span.line) + ":" + std::to_string(d.span.column) + ": " +
                   (d.severity == Severity::Error ? "error: " : "warning: ") + d.message + "\n";
        }
        return out;
    }
};

}  // namespace orcline
