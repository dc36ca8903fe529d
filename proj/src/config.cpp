// SPDX-License-Identifier: Apache-2.0
#include "divbar/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "divbar/errors.hpp"

namespace divbar {

namespace {

using nlohmann::json;

[[noreturn]] void fail(std::string const& where, std::string const& what)
{
    throw ConfigError("config " + (where.empty() ? std::string("/") : where) + ": " + what);
}

void reject_unknown(json const& obj, std::set<std::string> const& allowed, std::string const& where)
{
    for (auto const& [key, _] : obj.items()) {
        if (!allowed.contains(key)) fail(where + "/" + key, "unknown key '" + key + "'");
    }
}

json const& require(json const& obj, char const* key, std::string const& where)
{
    auto it = obj.find(key);
    if (it == obj.end()) fail(where + "/" + key, "missing required key");
    return *it;
}

double as_number(json const& v, std::string const& where)
{
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
}

std::vector<double> as_vector(json const& v, std::string const& where)
{
    if (!v.is_array()) fail(where, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], where + "/" + std::to_string(i)));
    return out;
}

std::vector<double> as_sized_vector(json const& v, int n, std::string const& where)
{
    auto out = as_vector(v, where);
    if (static_cast<int>(out.size()) != n) {
        fail(where, "expected " + std::to_string(n) + " entries, got " + std::to_string(out.size()));
    }
    return out;
}

std::vector<std::vector<double>> parse_table(json const& table, int n, std::string const& where)
{
    if (!table.is_object()) fail(where, "expected an object keyed by state bitstrings");
    std::size_t const count = std::size_t{1} << n;
    double const nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<double>> rows(count, std::vector<double>(static_cast<std::size_t>(n), nan));
    std::vector<bool> seen(count, false);
    for (auto const& [key, row] : table.items()) {
        std::string const loc = where + "/" + key;
        if (static_cast<int>(key.size()) != n || key.find_first_not_of("01") != std::string::npos) {
            fail(loc, "state key must be a bitstring of length " + std::to_string(n));
        }
        auto const z = DefaultState::from_bits(key);
        if (!row.is_array() || static_cast<int>(row.size()) != n) {
            fail(loc, "expected an array of " + std::to_string(n) + " intensities");
        }
        for (int i = 0; i < n; ++i) {
            auto const& v = row[static_cast<std::size_t>(i)];
            std::string const eloc = loc + "/" + std::to_string(i);
            if (z.defaulted(i)) {
                if (!v.is_null() && !v.is_number()) fail(eloc, "expected a number or null");
                continue;
            }
            rows[z.mask()][static_cast<std::size_t>(i)] = as_number(v, eloc);
        }
        seen[z.mask()] = true;
    }
    for (std::uint32_t mask = 0; mask < count; ++mask) {
        DefaultState z(n, mask);
        if (!seen[mask] && z.defaulted_count() < n) {
            fail(where, "missing intensity row for state " + z.bits());
        }
    }
    return rows;
}

}  // namespace

ModelParams parse_config(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (json::parse_error const& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) fail("", "top level must be an object");
    reject_unknown(doc, {"n", "drift", "vol", "corr", "discount", "weights", "intensity"}, "");

    ModelParams p;
    auto const& nval = require(doc, "n", "");
    if (!nval.is_number_integer()) fail("/n", "expected an integer");
    p.n = nval.get<int>();
    if (p.n < 1 || p.n > kMaxSubsidiaries) fail("/n", "n must be in [1, 16]");

    p.drift = as_sized_vector(require(doc, "drift", ""), p.n, "/drift");
    p.vol = as_sized_vector(require(doc, "vol", ""), p.n, "/vol");
    p.weights = as_sized_vector(require(doc, "weights", ""), p.n, "/weights");
    p.discount = as_number(require(doc, "discount", ""), "/discount");

    if (auto it = doc.find("corr"); it != doc.end()) {
        if (!it->is_array() || static_cast<int>(it->size()) != p.n) fail("/corr", "expected an n x n array");
        for (int i = 0; i < p.n; ++i) {
            p.corr.push_back(as_sized_vector((*it)[static_cast<std::size_t>(i)], p.n,
                                             "/corr/" + std::to_string(i)));
        }
    } else {
        auto const un = static_cast<std::size_t>(p.n);
        p.corr.assign(un, std::vector<double>(un, 0.0));
        for (std::size_t i = 0; i < un; ++i) p.corr[i][i] = 1.0;
    }

    auto const& inten = require(doc, "intensity", "");
    if (!inten.is_object()) fail("/intensity", "expected an object");
    reject_unknown(inten, {"table", "rule"}, "/intensity");
    bool const has_table = inten.contains("table");
    bool const has_rule = inten.contains("rule");
    if (has_table == has_rule) fail("/intensity", "exactly one of 'table' or 'rule' is required");
    if (has_table) {
        p.intensity = parse_table(inten.at("table"), p.n, "/intensity/table");
    } else {
        auto const& rule = inten.at("rule");
        if (!rule.is_object()) fail("/intensity/rule", "expected an object");
        reject_unknown(rule, {"base", "factor"}, "/intensity/rule");
        auto const base = as_sized_vector(require(rule, "base", "/intensity/rule"), p.n, "/intensity/rule/base");
        double const factor = as_number(require(rule, "factor", "/intensity/rule"), "/intensity/rule/factor");
        p.intensity = expand_intensity_rule(base, factor);
    }
    return p;
}

ModelParams load_config(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string params_to_json(ModelParams const& p, int indent)
{
    json doc;
    doc["n"] = p.n;
    doc["drift"] = p.drift;
    doc["vol"] = p.vol;
    doc["corr"] = p.corr;
    doc["discount"] = p.discount;
    doc["weights"] = p.weights;
    json table = json::object();
    for (std::uint32_t mask = 0; mask < p.state_count(); ++mask) {
        DefaultState z(p.n, mask);
        if (z.defaulted_count() == p.n) continue;
        json row = json::array();
        for (int i = 0; i < p.n; ++i) {
            if (z.defaulted(i)) {
                row.push_back(nullptr);
            } else {
                row.push_back(p.lambda(i, z));
            }
        }
        table[z.bits()] = row;
    }
    doc["intensity"] = {{"table", table}};
    return doc.dump(indent);
}

}  // namespace divbar
