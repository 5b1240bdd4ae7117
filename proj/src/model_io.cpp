#include "itv/model_io.hpp"

#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

namespace itv {

using json = nlohmann::json;

namespace {

constexpr double kRowTolerance = 1e-9;
constexpr double kNoiseTolerance = 1e-12;

// ------------------------------------------------------- pointer scanner

struct Scanner {
    const std::string& s;
    std::size_t i = 0;

    void ws() {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\n' || s[i] == '\r' || s[i] == '\t')) ++i;
    }

    std::string string_token() {
        std::string out;
        ++i;  // opening quote
        while (i < s.size() && s[i] != '"') {
            if (s[i] == '\\' && i + 1 < s.size()) {
                const char c = s[++i];
                switch (c) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    case 'b': out += '\b'; break;
                    case 'f': out += '\f'; break;
                    case 'u':
                        out += "\\u";
                        break;
                    default: out += c;
                }
                ++i;
            } else {
                out += s[i++];
            }
        }
        ++i;  // closing quote
        return out;
    }

    void skip_value() {
        ws();
        if (i >= s.size()) return;
        const char c = s[i];
        if (c == '"') {
            string_token();
        } else if (c == '{' || c == '[') {
            const char close = c == '{' ? '}' : ']';
            ++i;
            ws();
            if (i < s.size() && s[i] == close) {
                ++i;
                return;
            }
            while (i < s.size()) {
                if (c == '{') {
                    ws();
                    string_token();
                    ws();
                    ++i;  // ':'
                }
                skip_value();
                ws();
                if (i < s.size() && s[i] == ',') {
                    ++i;
                    continue;
                }
                ++i;  // close
                return;
            }
        } else {
            while (i < s.size() && s[i] != ',' && s[i] != '}' && s[i] != ']' && s[i] != ' ' && s[i] != '\n' &&
                   s[i] != '\r' && s[i] != '\t')
                ++i;
        }
    }

    std::optional<std::size_t> find(const std::vector<std::string>& tokens, std::size_t depth) {
        ws();
        if (depth == tokens.size()) return i;
        if (i >= s.size()) return std::nullopt;
        const std::string& want = tokens[depth];
        if (s[i] == '{') {
            ++i;
            ws();
            if (s[i] == '}') return std::nullopt;
            while (i < s.size()) {
                ws();
                const std::string key = string_token();
                ws();
                ++i;  // ':'
                if (key == want) return find(tokens, depth + 1);
                skip_value();
                ws();
                if (s[i] != ',') return std::nullopt;
                ++i;
            }
        } else if (s[i] == '[') {
            std::size_t target = 0;
            try {
                target = std::stoul(want);
            } catch (...) {
                return std::nullopt;
            }
            ++i;
            ws();
            if (s[i] == ']') return std::nullopt;
            for (std::size_t k = 0; i < s.size(); ++k) {
                if (k == target) return find(tokens, depth + 1);
                skip_value();
                ws();
                if (s[i] != ',') return std::nullopt;
                ++i;
            }
        }
        return std::nullopt;
    }
};

std::vector<std::string> pointer_tokens(const std::string& pointer) {
    std::vector<std::string> tokens;
    if (pointer.empty()) return tokens;
    std::size_t pos = 1;
    while (true) {
        const std::size_t next = pointer.find('/', pos);
        std::string t = pointer.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        std::string unescaped;
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (t[k] == '~' && k + 1 < t.size()) {
                unescaped += t[k + 1] == '1' ? '/' : '~';
                ++k;
            } else {
                unescaped += t[k];
            }
        }
        tokens.push_back(unescaped);
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return tokens;
}

// ------------------------------------------------------------- parsing

class Reader {
public:
    explicit Reader(const std::string& text) : text_(text) {
        try {
            doc_ = json::parse(text);
        } catch (const json::parse_error& e) {
            const std::size_t offset = e.byte == 0 ? 0 : e.byte - 1;
            const auto [line, col] = line_column(text, offset);
            std::string what = e.what();
            // Drop the library's "[json.exception.parse_error.101] " prefix.
            if (auto p = what.find("] "); p != std::string::npos) what = what.substr(p + 2);
            throw ParseError("invalid JSON: " + what, line, col);
        }
    }

    [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
        std::size_t line = 1, col = 1;
        std::string at = pointer;
        // Anchor on the nearest enclosing value that exists in the text.
        while (true) {
            if (auto off = locate_pointer(text_, at)) {
                std::tie(line, col) = line_column(text_, *off);
                break;
            }
            if (at.empty()) break;
            at = at.substr(0, at.rfind('/'));
        }
        throw ParseError(message, line, col, pointer);
    }

    const json& doc() const { return doc_; }

    const json& member(const json& obj, const std::string& where, const std::string& key) const {
        if (!obj.is_object()) fail(where, "expected an object");
        auto it = obj.find(key);
        if (it == obj.end()) fail(where, "missing key '" + key + "'");
        return *it;
    }

    std::string string_at(const json& v, const std::string& where) const {
        if (!v.is_string()) fail(where, "expected a string");
        return v.get<std::string>();
    }

    double number_at(const json& v, const std::string& where) const {
        if (!v.is_number()) fail(where, "expected a number");
        return v.get<double>();
    }

    Value value_at(const json& v, const std::string& where) const {
        if (v.is_number_unsigned()) {
            const auto u = v.get<std::uint64_t>();
            if (u > static_cast<std::uint64_t>(INT64_MAX)) fail(where, "integer out of range");
            return Value{static_cast<std::int64_t>(u)};
        }
        if (v.is_number_integer()) return Value{v.get<std::int64_t>()};
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (!std::isfinite(d)) fail(where, "non-finite number");
            return Value{d};
        }
        if (v.is_string()) return Value{v.get<std::string>()};
        fail(where, "expected a number or string value");
    }

    FiniteDomain domain_at(const json& v, const std::string& where, bool allow_empty) const {
        if (!v.is_array()) fail(where, "expected an array of values");
        if (v.empty() && !allow_empty) fail(where, "domain must not be empty");
        FiniteDomain d;
        for (std::size_t k = 0; k < v.size(); ++k) {
            const std::string at = where + "/" + std::to_string(k);
            const Value val = value_at(v[k], at);
            if (d.contains(val)) fail(at, "duplicate domain value " + to_string(val));
            d.insert(val);
        }
        return d;
    }

    const json& array_at(const json& v, const std::string& where) const {
        if (!v.is_array()) fail(where, "expected an array");
        return v;
    }

private:
    const std::string& text_;
    json doc_;
};

struct Skeleton {
    SLGraph graph;
    // For each node, its parents in the order written in the file.
    std::vector<std::vector<NodeId>> file_parents;
};

Skeleton read_skeleton(const Reader& r) {
    const json& doc = r.doc();
    if (!doc.is_object()) r.fail("", "model file must be a JSON object");
    if (auto it = doc.find("format_version"); it != doc.end()) {
        if (!it->is_string() || it->get<std::string>() != "1")
            r.fail("/format_version", "unsupported format_version (expected \"1\")");
    } else {
        r.fail("", "missing key 'format_version'");
    }
    const json& nodes = r.array_at(r.member(doc, "", "nodes"), "/nodes");
    if (nodes.empty()) r.fail("/nodes", "model has no nodes");

    std::vector<SLGraph::NodeSpec> specs;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string at = "/nodes/" + std::to_string(i);
        const std::string id = r.string_at(r.member(nodes[i], at, "id"), at + "/id");
        if (id.empty()) r.fail(at + "/id", "node id must not be empty");
        if (index.count(id)) r.fail(at + "/id", "duplicate node id '" + id + "'");
        const std::string role_text = r.string_at(r.member(nodes[i], at, "role"), at + "/role");
        const auto role = parse_role(role_text);
        if (!role) r.fail(at + "/role", "unknown role '" + role_text + "'");
        index[id] = i;
        specs.push_back({id, *role});
    }

    std::vector<std::pair<std::string, std::string>> edges;
    std::vector<std::vector<NodeId>> file_parents(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string at = "/nodes/" + std::to_string(i) + "/parents";
        auto it = nodes[i].find("parents");
        if (it == nodes[i].end()) continue;
        r.array_at(*it, at);
        std::set<std::string> seen;
        for (std::size_t k = 0; k < it->size(); ++k) {
            const std::string pat = at + "/" + std::to_string(k);
            const std::string p = r.string_at((*it)[k], pat);
            if (!index.count(p)) r.fail(pat, "unknown parent '" + p + "'");
            if (!seen.insert(p).second) r.fail(pat, "duplicate parent '" + p + "'");
            edges.emplace_back(p, specs[i].label);
            file_parents[i].push_back(NodeId{index[p]});
        }
    }
    SLGraph g(specs, edges);
    const auto report = validate_sl_graph(g);
    if (!report.ok()) {
        std::string msg = "invalid SL graph: ";
        for (std::size_t k = 0; k < report.violations.size(); ++k)
            msg += (k ? "; " : "") + report.violations[k];
        r.fail("/nodes", msg);
    }
    return {std::move(g), std::move(file_parents)};
}

// Row index (parents in NodeId order, last fastest) for a "given" array in
// file parent order.
std::size_t row_for_given(const Reader& r, const json& given, const std::string& at, const SLGraph& g, NodeId n,
                          const std::vector<NodeId>& file_order, const std::vector<FiniteDomain>& domains) {
    r.array_at(given, at);
    if (given.size() != file_order.size())
        r.fail(at, "expected " + std::to_string(file_order.size()) + " parent values, found " +
                       std::to_string(given.size()));
    std::map<NodeId, std::size_t> idx;
    for (std::size_t k = 0; k < file_order.size(); ++k) {
        const std::string vat = at + "/" + std::to_string(k);
        const Value v = r.value_at(given[k], vat);
        const auto pos = domains[file_order[k].index].index_of(v);
        if (!pos)
            r.fail(vat, "value " + to_string(v) + " is outside the domain of '" + g.label(file_order[k]) + "'");
        idx[file_order[k]] = *pos;
    }
    std::size_t row = 0;
    for (NodeId p : g.parents(n)) row = row * domains[p.index].size() + idx[p];
    return row;
}

std::size_t row_space(const SLGraph& g, NodeId n, const std::vector<FiniteDomain>& domains) {
    std::size_t rows = 1;
    for (NodeId p : g.parents(n)) rows *= domains[p.index].size();
    return rows;
}

Mechanism read_cpt(const Reader& r, const json& rows_json, const std::string& at, const SLGraph& g, NodeId n,
                   const std::vector<NodeId>& file_order, const std::vector<FiniteDomain>& domains) {
    r.array_at(rows_json, at);
    const std::size_t rows = row_space(g, n, domains);
    const std::size_t k = domains[n.index].size();
    Cpt cpt;
    cpt.rows.assign(rows, {});
    std::vector<bool> seen(rows, false);
    for (std::size_t i = 0; i < rows_json.size(); ++i) {
        const std::string rat = at + "/" + std::to_string(i);
        const std::size_t row =
            row_for_given(r, r.member(rows_json[i], rat, "given"), rat + "/given", g, n, file_order, domains);
        if (seen[row]) r.fail(rat + "/given", "duplicate row for these parent values");
        seen[row] = true;
        const json& probs = r.array_at(r.member(rows_json[i], rat, "probs"), rat + "/probs");
        if (probs.size() != k)
            r.fail(rat + "/probs", "expected " + std::to_string(k) + " probabilities, found " +
                                       std::to_string(probs.size()));
        double sum = 0.0;
        for (std::size_t v = 0; v < k; ++v) {
            const std::string pat = rat + "/probs/" + std::to_string(v);
            const double p = r.number_at(probs[v], pat);
            if (!(p >= 0.0) || !std::isfinite(p)) r.fail(pat, "probabilities must be finite and non-negative");
            cpt.rows[row].push_back(p);
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowTolerance)
            r.fail(rat + "/probs", "probabilities sum to " + std::to_string(sum) + ", expected 1");
    }
    for (std::size_t row = 0; row < rows; ++row)
        if (!seen[row]) r.fail(at, "CPT does not cover every parent assignment (" + std::to_string(rows) +
                                       " rows expected, " + std::to_string(rows_json.size()) + " given)");
    return cpt_mechanism(cpt, k);
}

Mechanism read_structural(const Reader& r, const json& spec, const std::string& at, const SLGraph& g, NodeId n,
                          const std::vector<NodeId>& file_order, const std::vector<FiniteDomain>& domains) {
    const json& exo = r.member(spec, at, "exogenous");
    Mechanism m;
    m.exogenous.domain = r.domain_at(r.member(exo, at + "/exogenous", "domain"), at + "/exogenous/domain", false);
    const json& probs = r.array_at(r.member(exo, at + "/exogenous", "probs"), at + "/exogenous/probs");
    if (probs.size() != m.exogenous.domain.size())
        r.fail(at + "/exogenous/probs", "expected one probability per exogenous value");
    double sum = 0.0;
    for (std::size_t e = 0; e < probs.size(); ++e) {
        const std::string pat = at + "/exogenous/probs/" + std::to_string(e);
        const double p = r.number_at(probs[e], pat);
        if (!(p >= 0.0) || !std::isfinite(p)) r.fail(pat, "probabilities must be finite and non-negative");
        m.exogenous.probs.push_back(p);
        sum += p;
    }
    if (std::abs(sum - 1.0) > kNoiseTolerance)
        r.fail(at + "/exogenous/probs", "exogenous probabilities sum to " + std::to_string(sum) + ", expected 1");

    const json& table = r.array_at(r.member(spec, at, "table"), at + "/table");
    const std::size_t rows = row_space(g, n, domains);
    const std::size_t noise = m.exogenous.domain.size();
    m.table.assign(rows * noise, 0);
    std::vector<bool> seen(rows, false);
    for (std::size_t i = 0; i < table.size(); ++i) {
        const std::string rat = at + "/table/" + std::to_string(i);
        const std::size_t row =
            row_for_given(r, r.member(table[i], rat, "given"), rat + "/given", g, n, file_order, domains);
        if (seen[row]) r.fail(rat + "/given", "duplicate row for these parent values");
        seen[row] = true;
        const json& values = r.array_at(r.member(table[i], rat, "values"), rat + "/values");
        if (values.size() != noise)
            r.fail(rat + "/values", "expected one output per exogenous value (" + std::to_string(noise) + ")");
        for (std::size_t e = 0; e < noise; ++e) {
            const std::string vat = rat + "/values/" + std::to_string(e);
            const Value v = r.value_at(values[e], vat);
            const auto pos = domains[n.index].index_of(v);
            if (!pos) r.fail(vat, "value " + to_string(v) + " is outside the node's domain");
            m.table[row * noise + e] = *pos;
        }
    }
    for (std::size_t row = 0; row < rows; ++row)
        if (!seen[row]) r.fail(at + "/table", "structural table does not cover every parent assignment");
    return m;
}

LossSpec read_loss(const Reader& r, const json& doc) {
    const json& loss = r.member(doc, "", "loss");
    const std::string kind = r.string_at(r.member(loss, "/loss", "kind"), "/loss/kind");
    if (kind == "zero_one") return LossSpec::zero_one();
    if (kind == "mse") return LossSpec::mean_squared_error();
    if (kind != "table") r.fail("/loss/kind", "unknown loss kind '" + kind + "' (expected zero_one, mse or table)");
    const json& table = r.array_at(r.member(loss, "/loss", "table"), "/loss/table");
    std::vector<LossSpec::Entry> entries;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const std::string at = "/loss/table/" + std::to_string(i);
        entries.push_back({r.value_at(r.member(table[i], at, "target"), at + "/target"),
                           r.value_at(r.member(table[i], at, "prediction"), at + "/prediction"),
                           r.number_at(r.member(table[i], at, "utility"), at + "/utility")});
    }
    return LossSpec::custom(std::move(entries));
}

// ------------------------------------------------------------ emission

json value_json(const Value& v) {
    if (auto i = std::get_if<std::int64_t>(&v)) return *i;
    if (auto d = std::get_if<double>(&v)) return *d;
    return std::get<std::string>(v);
}

json values_json(const std::vector<Value>& vs) {
    json out = json::array();
    for (const auto& v : vs) out.push_back(value_json(v));
    return out;
}

json given_json(const StructuralModel& model, NodeId n, std::size_t row) {
    const auto idx = model.decode_row(n, row);
    const auto& parents = model.graph().parents(n);
    json out = json::array();
    for (std::size_t k = 0; k < parents.size(); ++k) out.push_back(value_json(model.domain(parents[k])[idx[k]]));
    return out;
}

}  // namespace

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column, std::string pointer)
    : InputError(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      detail_(message),
      line_(line),
      column_(column),
      pointer_(std::move(pointer)) {}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

std::optional<std::size_t> locate_pointer(const std::string& text, const std::string& pointer) {
    Scanner sc{text};
    return sc.find(pointer_tokens(pointer), 0);
}

SLGraph parse_graph(const std::string& text) {
    Reader r(text);
    return read_skeleton(r).graph;
}

ModelDocument parse_model(const std::string& text) {
    Reader r(text);
    Skeleton sk = read_skeleton(r);
    const SLGraph& g = sk.graph;
    const json& nodes = r.doc()["nodes"];

    std::vector<FiniteDomain> domains(g.size());
    for (NodeId n : g.nodes()) {
        const std::string at = "/nodes/" + std::to_string(n.index);
        const NodeRole role = g.role(n);
        auto it = nodes[n.index].find("domain");
        if (role == NodeRole::Utility) {
            if (it != nodes[n.index].end()) r.fail(at + "/domain", "the utility node takes no domain");
            continue;
        }
        if (it == nodes[n.index].end()) {
            if (role == NodeRole::Prediction) continue;
            r.fail(at, "missing key 'domain'");
        }
        domains[n.index] = r.domain_at(*it, at + "/domain", role == NodeRole::Prediction);
    }

    std::vector<std::optional<Mechanism>> mechs(g.size());
    for (NodeId n : g.nodes()) {
        const std::string at = "/nodes/" + std::to_string(n.index);
        const NodeRole role = g.role(n);
        auto it = nodes[n.index].find("spec");
        if (role == NodeRole::Utility || role == NodeRole::Prediction) {
            if (it != nodes[n.index].end())
                r.fail(at + "/spec", std::string("the ") + role_name(role) + " node takes no spec");
            continue;
        }
        if (it == nodes[n.index].end()) r.fail(at, "missing key 'spec'");
        const json& spec = *it;
        if (!spec.is_object() || spec.size() != 1 || !(spec.contains("cpt") || spec.contains("structural")))
            r.fail(at + "/spec", "spec must hold exactly one of 'cpt' or 'structural'");
        if (spec.contains("cpt"))
            mechs[n.index] = read_cpt(r, spec["cpt"], at + "/spec/cpt", g, n, sk.file_parents[n.index], domains);
        else
            mechs[n.index] = read_structural(r, spec["structural"], at + "/spec/structural", g, n,
                                             sk.file_parents[n.index], domains);
    }

    const LossSpec loss = read_loss(r, r.doc());

    std::optional<GroupSpec> groups;
    const auto sensitive = g.with_role(NodeRole::Sensitive);
    if (auto it = r.doc().find("groups"); it != r.doc().end()) {
        if (!sensitive) r.fail("/groups", "groups given but the graph has no sensitive node");
        const GroupSpec gs{r.value_at(r.member(*it, "/groups", "a0"), "/groups/a0"),
                           r.value_at(r.member(*it, "/groups", "a1"), "/groups/a1")};
        if (!domains[sensitive->index].contains(gs.a0)) r.fail("/groups/a0", "a0 is outside the sensitive domain");
        if (!domains[sensitive->index].contains(gs.a1)) r.fail("/groups/a1", "a1 is outside the sensitive domain");
        if (same_value(gs.a0, gs.a1)) r.fail("/groups", "a0 and a1 must differ");
        groups = gs;
    } else if (sensitive) {
        r.fail("", "missing key 'groups' (required when a sensitive node is present)");
    }

    try {
        return {StructuralModel(g, std::move(domains), std::move(mechs), loss), groups};
    } catch (const PreconditionError& e) {
        r.fail("", e.what());
    }
}

std::string emit_model(const StructuralModel& model, const std::optional<GroupSpec>& groups) {
    const SLGraph& g = model.graph();
    json doc;
    doc["format_version"] = "1";
    if (groups) doc["groups"] = {{"a0", value_json(groups->a0)}, {"a1", value_json(groups->a1)}};
    json loss = {{"kind", loss_name(model.loss().kind)}};
    if (model.loss().kind == LossKind::CustomTable) {
        json table = json::array();
        for (const auto& e : model.loss().table)
            table.push_back({{"target", value_json(e.target)},
                             {"prediction", value_json(e.prediction)},
                             {"utility", e.utility}});
        loss["table"] = table;
    }
    doc["loss"] = loss;

    json nodes = json::array();
    for (NodeId n : g.nodes()) {
        json node = {{"id", g.label(n)}, {"role", role_name(g.role(n))}};
        json parents = json::array();
        for (NodeId p : g.parents(n)) parents.push_back(g.label(p));
        node["parents"] = parents;
        const NodeRole role = g.role(n);
        if (role != NodeRole::Utility) node["domain"] = values_json(model.domain(n).values());
        if (role != NodeRole::Utility && role != NodeRole::Prediction) {
            const Mechanism& m = *model.mechanism(n);
            const std::size_t rows = model.row_count(n);
            if (m.source_cpt) {
                json cpt = json::array();
                for (std::size_t r = 0; r < rows; ++r)
                    cpt.push_back({{"given", given_json(model, n, r)}, {"probs", m.source_cpt->rows[r]}});
                node["spec"] = {{"cpt", cpt}};
            } else {
                const std::size_t noise = m.exogenous.domain.size();
                json table = json::array();
                for (std::size_t r = 0; r < rows; ++r) {
                    json outs = json::array();
                    for (std::size_t e = 0; e < noise; ++e)
                        outs.push_back(value_json(model.domain(n)[m.table[r * noise + e]]));
                    table.push_back({{"given", given_json(model, n, r)}, {"values", outs}});
                }
                node["spec"] = {{"structural",
                                 {{"exogenous",
                                   {{"domain", values_json(m.exogenous.domain.values())},
                                    {"probs", m.exogenous.probs}}},
                                  {"table", table}}}};
            }
        }
        nodes.push_back(node);
    }
    doc["nodes"] = nodes;
    return doc.dump(2) + "\n";
}

}  // namespace itv
