#ifndef REALIZER_FIELD_FILE_HPP
#define REALIZER_FIELD_FILE_HPP

#include <array>
#include <optional>
#include <string>

#include "realizer/expr.hpp"
#include "realizer/field.hpp"

namespace realizer {

/// A field given as three component expressions, optionally with its curl.
struct FieldSpec {
    Expr jx, jy, jz;
    std::optional<std::array<Expr, 3>> curl_exprs;
    Periodicity periodicity;
};

/// Parse "jx, jy, jz" (outer parentheses allowed, commas split at depth 0).
FieldSpec parse_field_triple(const std::string& src);

/// Field file: UTF-8 JSON with keys {"jx","jy","jz"}, optional "curl":[..3..]
/// and optional "periodic":{"x":bool,"y":bool,"z":bool}.
FieldSpec load_field_spec(const std::string& path);
std::string field_spec_to_json(const FieldSpec& spec);

/// Turn a FieldSpec into an evaluatable VectorField. Domain errors surface
/// lazily, at evaluation time. When curl expressions are absent the field
/// falls back to finite differences.
VectorField compile_field(const FieldSpec& spec);

} // namespace realizer

#endif
