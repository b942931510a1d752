#pragma once

// Experiment reports and tabular output: flat JSON objects, RFC 4180 CSV, and
// a stable configuration hash so every artifact can be traced to its inputs.

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace lacuna {

inline constexpr std::string_view version = "0.1.0";

/// 64-bit FNV-1a, rendered as 16 hex digits.
inline std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << h;
    return out.str();
}

/// Hash of a configuration object; nlohmann::json keeps keys sorted, so the
/// dump is canonical.
inline std::string config_hash(const nlohmann::json& config) { return fnv1a_hex(config.dump()); }

struct ExperimentReport {
    std::string name;
    std::uint64_t seed = 0;
    std::string plan_hash;
    std::size_t samples = 0;
    double mean = 0;
    double variance = 0;
    double ks = 0;
    std::string reference_cdf;
    double prediction = 0;
    double statistic = 0;  // the quantity compared with the prediction
    double tolerance = 0;
    bool pass = false;
    nlohmann::json extra = nlohmann::json::object();  // flat key/value pairs
};

inline nlohmann::json to_json(const ExperimentReport& r) {
    nlohmann::json j{{"experiment", r.name},
                     {"seed", r.seed},
                     {"plan_hash", r.plan_hash},
                     {"samples", r.samples},
                     {"mean", r.mean},
                     {"variance", r.variance},
                     {"ks", r.ks},
                     {"reference_cdf", r.reference_cdf},
                     {"prediction", r.prediction},
                     {"statistic", r.statistic},
                     {"tolerance", r.tolerance},
                     {"pass", r.pass},
                     {"version", std::string(version)}};
    for (const auto& [k, v] : r.extra.items()) j[k] = v;
    return j;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline void write_csv(std::ostream& out, const Table& t) {
    auto line = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
        out << "\r\n";
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
}

/// Rows as an array of objects with string values.
inline nlohmann::json to_json(const Table& t) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : t.rows) {
        nlohmann::json o = nlohmann::json::object();
        for (std::size_t i = 0; i < t.header.size() && i < r.size(); ++i) o[t.header[i]] = r[i];
        arr.push_back(std::move(o));
    }
    return arr;
}

/// Shortest round-trip decimal for a double.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace lacuna
