#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "itv/error.hpp"
#include "itv/graph.hpp"
#include "itv/scm.hpp"

namespace itv {

/// Malformed model file. Line and column are 1-based and point at the
/// offending JSON value (or the syntax error).
class ParseError : public InputError {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column, std::string pointer = {});

    const std::string& detail() const { return detail_; }
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }
    const std::string& pointer() const { return pointer_; }

private:
    std::string detail_;
    std::size_t line_;
    std::size_t column_;
    std::string pointer_;
};

struct ModelDocument {
    StructuralModel model;
    std::optional<GroupSpec> groups;
};

/// Parses a model file. Nodes keep file order as NodeId order; CPT rows are
/// keyed by parent values listed in the node's `parents` order.
ModelDocument parse_model(const std::string& text);

/// Reads only the graph skeleton (ids, roles, parents), so graph-only files
/// without domains or specs are accepted.
SLGraph parse_graph(const std::string& text);

/// Canonical JSON: sorted keys, two-space indent, shortest round-trip
/// numbers. Mechanisms built from CPTs are written back as CPTs.
std::string emit_model(const StructuralModel& model, const std::optional<GroupSpec>& groups);

/// 1-based line and column of byte `offset` in `text`.
std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset);

/// Byte offset of the value at JSON pointer `pointer` in syntactically valid
/// JSON `text`, or nullopt when the pointer does not resolve.
std::optional<std::size_t> locate_pointer(const std::string& text, const std::string& pointer);

}  // namespace itv
