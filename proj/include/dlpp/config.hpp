#pragma once

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlpp/core.hpp"
#include "dlpp/distributions.hpp"
#include "dlpp/lattice.hpp"
#include "dlpp/report.hpp"

namespace dlpp {

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

inline json dist_to_json(const Distribution& d) {
    switch (d.kind()) {
        case DistKind::Gamma:
            return json{{"dist", "gamma"}, {"shape", d.shape()}, {"rate", d.rate()}};
        case DistKind::Geometric: return json{{"dist", "geometric"}, {"q", d.q()}};
        case DistKind::Bernoulli: return json{{"dist", "bernoulli"}, {"p", d.p()}};
        case DistKind::PointMass: return json{{"dist", "pointmass"}, {"c", d.value()}};
        default: return json{{"dist", d.name()}};
    }
}

inline Distribution dist_from_json(const json& j) {
    if (!j.is_object() || !j.contains("dist"))
        throw ConfigError("distribution: expected an object with a \"dist\" field");
    std::string name = j.at("dist").get<std::string>();
    auto need = [&](const char* field) -> double {
        if (!j.contains(field))
            throw ConfigError("distribution '" + name + "': missing field \"" + field + "\"");
        return j.at(field).get<double>();
    };
    auto allow_only = [&](std::set<std::string> fields) {
        fields.insert("dist");
        for (auto it = j.begin(); it != j.end(); ++it)
            if (!fields.count(it.key()))
                throw ConfigError("distribution '" + name + "': unknown field \"" + it.key() +
                                  "\"");
    };
    if (name == "gaussian") {
        allow_only({});
        return Distribution::gaussian();
    }
    if (name == "uniform01") {
        allow_only({});
        return Distribution::uniform01();
    }
    if (name == "gamma") {
        allow_only({"shape", "rate"});
        return Distribution::gamma(need("shape"), need("rate"));
    }
    if (name == "geometric") {
        allow_only({"q"});
        return Distribution::geometric(need("q"));
    }
    if (name == "bernoulli") {
        allow_only({"p"});
        return Distribution::bernoulli(need("p"));
    }
    if (name == "pointmass") {
        allow_only({"c"});
        return Distribution::point_mass(need("c"));
    }
    throw ConfigError("unknown distribution name '" + name +
                      "'; valid variants: gaussian, uniform01, gamma, geometric, bernoulli, "
                      "pointmass");
}

/// Experiment parameters. Execution parameters (output dir, shard, format,
/// threads) are CLI flags and never enter the config hash or the report echo.
struct Config {
    std::string scenario;
    Distribution dist = Distribution::gaussian();
    int d = 2;
    std::uint64_t n = 0;
    std::uint64_t n_pilot = 0;
    std::uint64_t n_exact = 0;
    std::uint64_t n_reflect = 0;
    std::uint64_t seed = 1;
    Coord N = 0;
    Coord max_norm = 10;
    std::vector<Coord> Ns;
    std::vector<Coord> x;
    std::vector<Coord> a;
    std::vector<double> direction, offset, ts, us, band;
    std::vector<int> m_pair;
    int m = 0;
    double u = 0;
    double threshold = 0;
    double sym_tol = 0.02;
    bool check_trend = false;
    Graph kind = Graph::Ordered;
    std::string family = "all";

    std::set<std::string> keys;  // fields that are active (set or defaulted)

    bool has(const std::string& k) const { return keys.count(k) != 0; }
    void mark(const std::string& k) { keys.insert(k); }

    json to_json() const {
        json j;
        j["scenario"] = scenario;
        j["seed"] = seed;
        if (has("dist")) j["dist"] = dist_to_json(dist);
        if (has("d")) j["d"] = d;
        if (has("n")) j["n"] = n;
        if (has("n_pilot")) j["n_pilot"] = n_pilot;
        if (has("n_exact")) j["n_exact"] = n_exact;
        if (has("n_reflect")) j["n_reflect"] = n_reflect;
        if (has("N")) j["N"] = N;
        if (has("max_norm")) j["max_norm"] = max_norm;
        if (has("Ns")) j["Ns"] = Ns;
        if (has("x")) j["x"] = x;
        if (has("a")) j["a"] = a;
        if (has("direction")) j["direction"] = direction;
        if (has("offset")) j["offset"] = offset;
        if (has("ts")) j["ts"] = ts;
        if (has("us")) j["us"] = us;
        if (has("band")) j["band"] = band;
        if (has("m")) j["m"] = m;
        if (has("m_pair")) j["m_pair"] = m_pair;
        if (has("u")) j["u"] = u;
        if (has("threshold")) j["threshold"] = threshold;
        if (has("sym_tol")) j["sym_tol"] = sym_tol;
        if (has("check_trend")) j["check_trend"] = check_trend;
        if (has("kind")) j["kind"] = kind == Graph::Ordered ? "ordered" : "spacetime";
        if (has("family")) j["family"] = family;
        return j;
    }
};

inline std::string config_hash(const Config& c) {
    std::string s = stable_dump(c.to_json(), 0);
    std::uint64_t h = 0x8badf00d8badf00dULL;
    for (char ch : s) h = absorb(h, static_cast<unsigned char>(ch));
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

template <class T>
T parse_num(const std::string& v, const std::string& field, int line) {
    try {
        std::size_t pos = 0;
        if constexpr (std::is_same_v<T, double>) {
            double r = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return r;
        } else {
            long long r = std::stoll(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            if constexpr (std::is_unsigned_v<T>) {
                if (r < 0) throw std::out_of_range(v);
            }
            if (r < static_cast<long long>(std::numeric_limits<T>::min()) ||
                (r > 0 && static_cast<unsigned long long>(r) >
                              static_cast<unsigned long long>(std::numeric_limits<T>::max())))
                throw std::out_of_range(v);
            return static_cast<T>(r);
        }
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": field '" + field +
                          "': invalid value '" + v + "'");
    }
}

template <class T>
std::vector<T> parse_list(const std::string& v, const std::string& field, int line) {
    std::vector<T> out;
    std::size_t start = 0;
    while (start <= v.size()) {
        std::size_t comma = v.find(',', start);
        std::string item = trim(comma == std::string::npos ? v.substr(start)
                                                           : v.substr(start, comma - start));
        if (!item.empty()) out.push_back(parse_num<T>(item, field, line));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty())
        throw ConfigError("line " + std::to_string(line) + ": field '" + field + "': empty list");
    return out;
}

}  // namespace detail

/// Flat `key = value` text, one entry per line, '#' comments. The distribution
/// is the single nested value: either a bare name or a JSON object such as
/// {"dist":"gamma","shape":2.0,"rate":1.0}.
inline Config parse_config(const std::string& text) {
    Config c;
    std::set<std::string> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string line = eol == std::string::npos ? text.substr(pos) : text.substr(pos, eol - pos);
        pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        if (!seen.insert(key).second)
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate field '" + key +
                              "'");

        int ln = line_no;
        if (key == "scenario") {
            c.scenario = val;
        } else if (key == "dist") {
            if (!val.empty() && val.front() == '{') {
                json j;
                try {
                    j = json::parse(val);
                } catch (const json::exception& e) {
                    throw ConfigError("line " + std::to_string(ln) + ": field 'dist': " +
                                      e.what());
                }
                c.dist = dist_from_json(j);
            } else {
                c.dist = dist_from_json(json{{"dist", val}});
            }
        } else if (key == "d") {
            c.d = detail::parse_num<int>(val, key, ln);
            if (c.d < 1)
                throw ConfigError("line " + std::to_string(ln) + ": field 'd': must be >= 1");
        } else if (key == "n") {
            c.n = detail::parse_num<std::uint64_t>(val, key, ln);
            if (c.n == 0)
                throw ConfigError("line " + std::to_string(ln) + ": field 'n': must be positive");
        } else if (key == "n_pilot") {
            c.n_pilot = detail::parse_num<std::uint64_t>(val, key, ln);
        } else if (key == "n_exact") {
            c.n_exact = detail::parse_num<std::uint64_t>(val, key, ln);
        } else if (key == "n_reflect") {
            c.n_reflect = detail::parse_num<std::uint64_t>(val, key, ln);
        } else if (key == "seed") {
            c.seed = detail::parse_num<std::uint64_t>(val, key, ln);
        } else if (key == "N") {
            c.N = detail::parse_num<Coord>(val, key, ln);
        } else if (key == "max_norm") {
            c.max_norm = detail::parse_num<Coord>(val, key, ln);
        } else if (key == "Ns") {
            c.Ns = detail::parse_list<Coord>(val, key, ln);
        } else if (key == "x") {
            c.x = detail::parse_list<Coord>(val, key, ln);
        } else if (key == "a") {
            c.a = detail::parse_list<Coord>(val, key, ln);
        } else if (key == "direction") {
            c.direction = detail::parse_list<double>(val, key, ln);
        } else if (key == "offset") {
            c.offset = detail::parse_list<double>(val, key, ln);
        } else if (key == "ts") {
            c.ts = detail::parse_list<double>(val, key, ln);
        } else if (key == "us") {
            c.us = detail::parse_list<double>(val, key, ln);
        } else if (key == "band") {
            c.band = detail::parse_list<double>(val, key, ln);
            if (c.band.size() != 2)
                throw ConfigError("line " + std::to_string(ln) +
                                  ": field 'band': expected two values");
        } else if (key == "m") {
            c.m = detail::parse_num<int>(val, key, ln);
            if (c.m < 0)
                throw ConfigError("line " + std::to_string(ln) + ": field 'm': must be >= 0");
        } else if (key == "m_pair") {
            c.m_pair = detail::parse_list<int>(val, key, ln);
            if (c.m_pair.size() != 2)
                throw ConfigError("line " + std::to_string(ln) +
                                  ": field 'm_pair': expected two values");
        } else if (key == "u") {
            c.u = detail::parse_num<double>(val, key, ln);
        } else if (key == "threshold") {
            c.threshold = detail::parse_num<double>(val, key, ln);
        } else if (key == "sym_tol") {
            c.sym_tol = detail::parse_num<double>(val, key, ln);
        } else if (key == "check_trend") {
            if (val == "true" || val == "1")
                c.check_trend = true;
            else if (val == "false" || val == "0")
                c.check_trend = false;
            else
                throw ConfigError("line " + std::to_string(ln) +
                                  ": field 'check_trend': expected true/false");
        } else if (key == "kind") {
            if (val == "ordered")
                c.kind = Graph::Ordered;
            else if (val == "spacetime")
                c.kind = Graph::SpaceTime;
            else
                throw ConfigError("line " + std::to_string(ln) +
                                  ": field 'kind': expected ordered or spacetime");
        } else if (key == "family") {
            if (val != "all" && val != "gaussian" && val != "uniform01" && val != "gamma")
                throw ConfigError("line " + std::to_string(ln) +
                                  ": field 'family': expected all, gaussian, uniform01 or gamma");
            c.family = val;
        } else {
            throw ConfigError("line " + std::to_string(ln) + ": unknown field '" + key + "'");
        }
        c.mark(key);
    }
    return c;
}

}  // namespace dlpp
