#include "itv/value.hpp"

#include <charconv>
#include <cmath>

#include "itv/error.hpp"

namespace itv {

bool is_numeric(const Value& v) { return !std::holds_alternative<std::string>(v); }

double as_double(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    throw PreconditionError("value '" + std::get<std::string>(v) + "' is not numeric");
}

bool same_value(const Value& a, const Value& b) {
    if (is_numeric(a) && is_numeric(b)) return as_double(a) == as_double(b);
    if (!is_numeric(a) && !is_numeric(b)) return std::get<std::string>(a) == std::get<std::string>(b);
    return false;
}

std::string to_string(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&v)) {
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof buf, *d);
        return std::string(buf, res.ptr);
    }
    return std::get<std::string>(v);
}

FiniteDomain::FiniteDomain(std::vector<Value> values) {
    for (auto& v : values) {
        if (index_of(v)) throw PreconditionError("duplicate domain value '" + to_string(v) + "'");
        values_.push_back(std::move(v));
    }
}

FiniteDomain::FiniteDomain(std::initializer_list<Value> values)
    : FiniteDomain(std::vector<Value>(values)) {}

std::optional<std::size_t> FiniteDomain::index_of(const Value& v) const {
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (same_value(values_[i], v)) return i;
    return std::nullopt;
}

bool FiniteDomain::all_numeric() const {
    for (const auto& v : values_)
        if (!is_numeric(v)) return false;
    return true;
}

std::size_t FiniteDomain::insert(const Value& v) {
    if (auto i = index_of(v)) return *i;
    values_.push_back(v);
    return values_.size() - 1;
}

std::size_t FiniteDomain::smallest_index() const {
    if (values_.empty()) throw PreconditionError("empty domain has no smallest element");
    std::size_t best = 0;
    auto less = [](const Value& a, const Value& b) {
        if (is_numeric(a) && is_numeric(b)) return as_double(a) < as_double(b);
        if (is_numeric(a) != is_numeric(b)) return is_numeric(a);
        return std::get<std::string>(a) < std::get<std::string>(b);
    };
    for (std::size_t i = 1; i < values_.size(); ++i)
        if (less(values_[i], values_[best])) best = i;
    return best;
}

}  // namespace itv
