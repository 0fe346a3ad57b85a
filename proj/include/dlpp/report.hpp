#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlpp/core.hpp"
#include "dlpp/passage.hpp"
#include "dlpp/stats.hpp"

namespace dlpp {

using json = nlohmann::json;

inline constexpr const char* kBuildId = "dlpp-0.1.0";
inline constexpr int kSchemaVersion = 1;

namespace detail {

/// %.12g rendering keeps reports diffable across runs.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "\"nan\"";
    if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline void stable_dump_rec(const json& j, std::string& out, int indent, int depth) {
    auto pad = [&](int d) { out.append(static_cast<std::size_t>(d) * indent, ' '); };
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            std::size_t i = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++i) {
                pad(depth + 1);
                out += json(it.key()).dump();
                out += ": ";
                stable_dump_rec(it.value(), out, indent, depth + 1);
                if (i + 1 < j.size()) out += ",";
                out += "\n";
            }
            pad(depth);
            out += "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            bool scalars = true;
            for (const auto& e : j) scalars = scalars && !e.is_structured();
            out += "[";
            if (!scalars) out += "\n";
            std::size_t i = 0;
            for (const auto& e : j) {
                if (!scalars) pad(depth + 1);
                stable_dump_rec(e, out, indent, depth + 1);
                if (i + 1 < j.size()) out += scalars ? ", " : ",";
                if (!scalars) out += "\n";
                ++i;
            }
            if (!scalars) pad(depth);
            out += "]";
            return;
        }
        case json::value_t::number_float: out += format_double(j.get<double>()); return;
        default: out += j.dump(); return;
    }
}

}  // namespace detail

/// Bit-stable serialization: keys sorted (nlohmann objects are ordered maps),
/// floats at 12 significant digits, non-finite values as "inf"/"-inf"/"nan".
inline std::string stable_dump(const json& j, int indent = 2) {
    std::string out;
    detail::stable_dump_rec(j, out, indent, 0);
    out += "\n";
    return out;
}

struct Verdict {
    std::string name;
    bool pass = false;
    std::string rule;    // the acceptance rule applied
    std::string detail;  // measured values
};

struct ReportRecord {
    std::string scenario;
    json config_echo;
    json metrics;
    std::vector<Verdict> verdicts;
    json csv_rows = json::array();  // flat records for the CSV emitter

    bool all_pass() const {
        for (const auto& v : verdicts)
            if (!v.pass) return false;
        return true;
    }

    json to_json() const {
        json v = json::array();
        for (const auto& x : verdicts)
            v.push_back({{"name", x.name},
                         {"pass", x.pass},
                         {"rule", x.rule},
                         {"detail", x.detail}});
        return json{{"schema_version", kSchemaVersion},
                    {"build", kBuildId},
                    {"scenario", scenario},
                    {"config", config_echo},
                    {"metrics", metrics},
                    {"verdicts", v}};
    }
};

inline std::string emit_json(const ReportRecord& r) { return stable_dump(r.to_json()); }

/// One row per metric record; header is the sorted union of row keys.
inline std::string emit_csv(const ReportRecord& r) {
    std::vector<std::string> cols;
    for (const auto& row : r.csv_rows)
        for (auto it = row.begin(); it != row.end(); ++it)
            if (std::find(cols.begin(), cols.end(), it.key()) == cols.end())
                cols.push_back(it.key());
    std::sort(cols.begin(), cols.end());
    std::string out;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out += cols[i];
        out += i + 1 < cols.size() ? "," : "\n";
    }
    for (const auto& row : r.csv_rows) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (row.contains(cols[i])) {
                const json& cell = row[cols[i]];
                if (cell.is_number_float()) {
                    std::string s = detail::format_double(cell.get<double>());
                    if (!s.empty() && s.front() == '"') s = s.substr(1, s.size() - 2);
                    out += s;
                } else if (cell.is_string()) {
                    out += cell.get<std::string>();
                } else {
                    out += cell.dump();
                }
            }
            out += i + 1 < cols.size() ? "," : "\n";
        }
    }
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + path.string());
    f << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot read " + path.string());
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

// json helpers shared by the scenarios

inline json to_json(const Point& p) {
    json a = json::array();
    for (Coord c : p.c) a.push_back(c);
    return a;
}

inline json to_json(const CI& ci) { return json::array({ci.lo, ci.hi}); }

inline json to_json(const SampleStats& st) {
    return json{{"n", st.n},
                {"mean", st.mean},
                {"variance", st.variance},
                {"mean_ci", to_json(st.mean_ci)},
                {"var_ci", to_json(st.var_ci)},
                {"seed", st.master_seed},
                {"experiment_id", st.experiment_id}};
}

/// Grid export: one row per vertex with coordinates, passage value and the
/// backpointer direction (255 = none, 254 = origin).
inline void export_grid_csv(const PassageGrid& grid, const std::filesystem::path& path) {
    std::string out;
    for (std::size_t i = 0; i < grid.box().dim(); ++i) out += "x" + std::to_string(i + 1) + ",";
    out += "value,backptr\n";
    grid.for_each([&](const Point& p, double v, std::uint8_t bp) {
        if (v == kNegInf) return;
        for (std::size_t i = 0; i < p.dim(); ++i) out += std::to_string(p[i]) + ",";
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        out += buf;
        out += "," + std::to_string(static_cast<int>(bp)) + "\n";
    });
    write_file(path, out);
}

}  // namespace dlpp
