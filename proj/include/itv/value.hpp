#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace itv {

/// A single outcome of a finite variable: an integer label, a real score, or
/// a categorical string.
using Value = std::variant<std::int64_t, double, std::string>;

bool is_numeric(const Value& v);

/// Numeric view of a value. Throws PreconditionError for strings.
double as_double(const Value& v);

/// Integers and doubles compare by numeric value; strings by content.
bool same_value(const Value& a, const Value& b);

/// Human-readable rendering (shortest round-trip form for doubles).
std::string to_string(const Value& v);

/// Ordered, duplicate-free list of values.
class FiniteDomain {
public:
    FiniteDomain() = default;
    explicit FiniteDomain(std::vector<Value> values);
    FiniteDomain(std::initializer_list<Value> values);

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    const Value& operator[](std::size_t i) const { return values_[i]; }
    const std::vector<Value>& values() const { return values_; }

    std::optional<std::size_t> index_of(const Value& v) const;
    bool contains(const Value& v) const { return index_of(v).has_value(); }
    bool all_numeric() const;

    /// Appends `v` unless an equal value is present; returns its index.
    std::size_t insert(const Value& v);

    /// Index of the smallest element (numeric order, strings after numbers).
    std::size_t smallest_index() const;

private:
    std::vector<Value> values_;
};

}  // namespace itv
