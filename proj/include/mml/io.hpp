#pragma once

// Serialization: CSV "index,value" tables printed with 17 significant digits
// (bit-exact double round-trip) and JSON objects
//   {"bit_width": n, "values": [...], "range": "[0,1]"|"[-1,1]", "complexity": w}.
// Deserialized distributions renormalize drift up to kDriftTol and reject
// anything worse.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mml/common.hpp"
#include "mml/domain.hpp"
#include "mml/functions.hpp"
#include "mml/kernel.hpp"

namespace mml {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// --------------------------------------------------------------------------
// CSV

inline std::string values_to_csv(const std::vector<double>& values) {
    std::string out = "index,value\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += format_double(values[i]);
        out += '\n';
    }
    return out;
}

inline std::vector<double> values_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != "index,value")
        throw parse_error("csv: missing 'index,value' header");
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw parse_error("csv: malformed row '" + line + "'");
        std::size_t idx = 0;
        try {
            idx = std::stoull(line.substr(0, comma));
        } catch (const std::exception&) {
            throw parse_error("csv: bad index in '" + line + "'");
        }
        if (idx != values.size()) throw parse_error("csv: non-contiguous index");
        char* end = nullptr;
        const std::string field = line.substr(comma + 1);
        double v = std::strtod(field.c_str(), &end);
        if (end == field.c_str()) throw parse_error("csv: bad value in '" + line + "'");
        values.push_back(v);
    }
    return values;
}

inline int bits_for_size(std::size_t n) {
    int b = 0;
    while ((std::size_t{1} << b) < n && b <= kMaxBits) ++b;
    if ((std::size_t{1} << b) != n) throw parse_error("table size is not a power of two");
    return b;
}

/// Accepts small normalization drift (renormalizes); rejects anything worse.
inline FiniteDistribution distribution_from_values(std::vector<double> values) {
    int bits = bits_for_size(values.size());
    double s = 0.0;
    for (double v : values) {
        if (v < -kMassSlack) throw parse_error("distribution: negative mass");
        s += v;
    }
    if (std::abs(s - 1.0) > kDriftTol)
        throw parse_error("distribution: mass drift " + format_double(s - 1.0) + " exceeds tolerance");
    if (s <= 0.0) throw zero_mass("distribution: zero total");
    for (double& v : values) v /= s;
    return FiniteDistribution(bits, std::move(values));
}

inline std::string to_csv(const FiniteDistribution& x) { return values_to_csv(x.mass()); }
inline std::string to_csv(const TestFunction& f) { return values_to_csv(f.values()); }

inline FiniteDistribution distribution_from_csv(const std::string& csv) {
    return distribution_from_values(values_from_csv(csv));
}

inline TestFunction function_from_csv(const std::string& csv, ValueRange range, double complexity = 1.0) {
    auto values = values_from_csv(csv);
    return TestFunction(bits_for_size(values.size()), range, std::move(values), complexity);
}

// --------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const FiniteDistribution& x) {
    return nlohmann::json{{"bit_width", x.bit_width()}, {"values", x.mass()}};
}

inline nlohmann::json to_json(const TestFunction& f) {
    return nlohmann::json{{"bit_width", f.bit_width()},
                          {"values", f.values()},
                          {"range", range_label(f.range())},
                          {"complexity", f.complexity()}};
}

inline nlohmann::json to_json(const JointDistribution& j) {
    return nlohmann::json{{"bit_width", j.x_bits()},
                          {"aux_bits", j.z_bits()},
                          {"values", j.flattened().mass()}};
}

inline FiniteDistribution distribution_from_json(const nlohmann::json& j) {
    if (!j.contains("values")) throw parse_error("distribution json: missing 'values'");
    std::vector<double> values = j.at("values").get<std::vector<double>>();
    auto d = distribution_from_values(std::move(values));
    if (j.contains("bit_width") && j.at("bit_width").get<int>() != d.bit_width())
        throw parse_error("distribution json: bit_width disagrees with table size");
    return d;
}

inline TestFunction function_from_json(const nlohmann::json& j) {
    if (!j.contains("values")) throw parse_error("function json: missing 'values'");
    std::vector<double> values = j.at("values").get<std::vector<double>>();
    ValueRange range = j.contains("range") ? range_from_label(j.at("range").get<std::string>())
                                           : ValueRange::unit;
    double complexity = j.contains("complexity") ? j.at("complexity").get<double>() : 1.0;
    int bits = bits_for_size(values.size());
    if (j.contains("bit_width") && j.at("bit_width").get<int>() != bits)
        throw parse_error("function json: bit_width disagrees with table size");
    return TestFunction(bits, range, std::move(values), complexity);
}

inline JointDistribution joint_from_json(const nlohmann::json& j) {
    if (!j.contains("values") || !j.contains("aux_bits"))
        throw parse_error("joint json: need 'values' and 'aux_bits'");
    std::vector<double> values = j.at("values").get<std::vector<double>>();
    int z_bits = j.at("aux_bits").get<int>();
    int total_bits = bits_for_size(values.size());
    if (z_bits < 0 || z_bits > total_bits) throw parse_error("joint json: bad aux_bits");
    double s = 0.0;
    for (double v : values) s += v;
    if (std::abs(s - 1.0) > kDriftTol) throw parse_error("joint json: mass drift exceeds tolerance");
    for (double& v : values) v /= s;
    return JointDistribution(total_bits - z_bits, z_bits, std::move(values));
}

inline nlohmann::json to_json(const SimulatorKernel& k) {
    nlohmann::json j;
    j["x_bits"] = k.x_bits;
    j["z_bits"] = k.z_bits;
    j["rows"] = k.rows;
    j["component_count"] = k.component_count;
    return j;
}

inline SimulatorKernel kernel_from_json(const nlohmann::json& j) {
    if (!j.contains("x_bits") || !j.contains("z_bits") || !j.contains("rows"))
        throw parse_error("kernel json: need 'x_bits', 'z_bits', 'rows'");
    return SimulatorKernel(j.at("x_bits").get<int>(), j.at("z_bits").get<int>(),
                           j.at("rows").get<std::vector<std::vector<double>>>(),
                           j.value("component_count", std::size_t{1}));
}

// --------------------------------------------------------------------------
// files

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot open for writing: " + path);
    out << content;
    if (!out) throw error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace mml
