// SPDX-License-Identifier: MIT
#pragma once

#include <bit>
#include <cmath>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wtm/errors.hpp"
#include "wtm/grid_function.hpp"
#include "wtm/moser.hpp"
#include "wtm/rearrange.hpp"
#include "wtm/reduction.hpp"
#include "wtm/weights.hpp"

namespace wtm::io {

using nlohmann::json;

/// Shortest representation that reads back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error(Errc::io_error, "malformed number '" + std::string(s) + "'");
    return v;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(Errc::io_error, "failed writing " + path.string());
}

inline json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Errc::io_error, what + ": " + e.what());
    }
}

// ---- weights --------------------------------------------------------------

/// {"d": 2, "active": [1], "exponents": [1.0]} with 1-based active axes.
inline json to_json(const WeightSpec& spec) {
    json active = json::array();
    for (int j : spec.cone().active()) active.push_back(j + 1);
    return {{"d", spec.dimension()}, {"active", active}, {"exponents", spec.exponents()}};
}

inline WeightSpec weight_spec_from_json(const json& j) {
    try {
        const int d = j.at("d").get<int>();
        std::vector<int> active;
        for (const auto& a : j.at("active")) active.push_back(a.get<int>() - 1);
        return WeightSpec(ConeSpec(d, active), j.at("exponents").get<std::vector<double>>());
    } catch (const json::exception& e) {
        throw Error(Errc::invalid_spec, std::string("malformed weight spec: ") + e.what());
    }
}

inline WeightSpec read_weight_spec(const std::filesystem::path& path) {
    return weight_spec_from_json(parse_json(read_text(path), path.string()));
}

inline json to_json(const GeometricConstants& c) {
    return {{"C_D", c.unit_ball_measure}, {"P_w", c.perimeter}, {"alpha", c.alpha}, {"D", c.D}, {"residual", c.residual}};
}

// ---- reports --------------------------------------------------------------

inline json to_json(const ReductionReport& r) {
    return {{"energy_nd", r.energy_nd},
            {"energy_1d", r.energy_1d},
            {"exp_nd", r.exp_nd},
            {"exp_1d", r.exp_1d},
            {"beta", r.beta},
            {"a", r.a},
            {"residuals", {{"energy", r.energy_residual}, {"exp", r.exp_residual}}},
            {"tail", r.tail},
            {"tail_bound", std::isfinite(r.tail_bound) ? json(r.tail_bound) : json(nullptr)}};
}

inline json to_json(const MoserReport& r) {
    json history = json::array();
    for (const auto& h : r.history) history.push_back({{"N", h.N}, {"value", h.value}});
    json j = {{"q", r.q},
              {"beta", r.beta},
              {"T", r.T},
              {"N", r.N},
              {"value", r.value},
              {"constraint", r.constraint},
              {"residual", r.residual},
              {"iterations", r.iterations},
              {"history", history},
              {"initial_value", r.initial_value},
              {"baseline", {{"value", r.baseline_value}, {"tau", r.baseline_tau}}},
              {"tail", r.tail},
              {"tail_bound", std::isfinite(r.tail_bound) ? json(r.tail_bound) : json(nullptr)},
              {"converged", r.converged},
              {"status", r.status}};
    if (r.value_doubled_T) j["value_doubled_T"] = *r.value_doubled_T;
    return j;
}

inline json to_json(const SupremumEstimate& s) {
    json values = json::array();
    for (const auto& v : s.values) values.push_back({{"N", v.N}, {"value", v.value}});
    return {{"A_estimate", s.A_estimate}, {"values", values}, {"monotone", s.monotone}};
}

inline json to_json(const EquimeasurabilityReport& r) {
    return {{"sup_relative", r.sup_relative},
            {"support_radius", r.support_radius},
            {"thresholds", r.thresholds},
            {"measure_original", r.measure_original},
            {"measure_rearranged", r.measure_rearranged}};
}

inline json to_json(const PolyaSzegoReport& r) {
    return {{"lhs", r.lhs}, {"rhs", r.rhs}, {"holds", r.holds}};
}

// ---- two-column CSV -------------------------------------------------------

inline std::string two_column_csv(const std::string& x_name, const std::string& y_name,
                                  std::span<const double> x, std::span<const double> y) {
    std::string out = x_name + "," + y_name + "\n";
    for (std::size_t i = 0; i < x.size(); ++i) out += format_double(x[i]) + "," + format_double(y[i]) + "\n";
    return out;
}

/// Reads "x,y" rows after a header line.
inline std::pair<std::vector<double>, std::vector<double>> read_two_column_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::string line;
    std::getline(in, line);
    std::vector<double> x, y;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw Error(Errc::io_error, "expected two columns in " + path.string());
        x.push_back(parse_double(std::string_view(line).substr(0, comma)));
        y.push_back(parse_double(std::string_view(line).substr(comma + 1)));
    }
    return {std::move(x), std::move(y)};
}

inline std::string profile_csv(const RadialProfile& U) { return two_column_csv("r", "U", U.radii(), U.values()); }

inline std::string profile_csv(const OneDProfile& phi) { return two_column_csv("t", "phi", phi.grid(), phi.values()); }

inline RadialProfile read_radial_profile(const std::filesystem::path& path) {
    auto [r, v] = read_two_column_csv(path);
    return RadialProfile(std::move(r), std::move(v));
}

inline OneDProfile read_phi_profile(const std::filesystem::path& path) {
    auto [t, v] = read_two_column_csv(path);
    return OneDProfile(std::move(t), std::move(v));
}

// ---- grid functions -------------------------------------------------------

enum class Encoding { csv, f64le };

/**
 * A JSON header plus a data file holding the samples in column-major order
 * (axis 0 fastest), either one value per line or raw little-endian doubles.
 *
 *   {"box": {"lower": [...], "upper": [...]}, "shape": [...], "spacing": [...],
 *    "layout": "column-major", "encoding": "csv", "data": "f.csv"}
 *
 * The data path is relative to the header's directory.
 */
inline void write_grid_function(const std::filesystem::path& header, const GridFunction& f,
                                Encoding enc = Encoding::csv) {
    std::filesystem::path data = header;
    data.replace_extension(enc == Encoding::csv ? ".csv" : ".f64");
    std::vector<double> spacing;
    for (std::size_t k = 0; k < f.dimension(); ++k) spacing.push_back(f.spacing(k));
    const json h = {{"box", {{"lower", f.box().lower}, {"upper", f.box().upper}}},
                    {"shape", f.shape()},
                    {"spacing", spacing},
                    {"layout", "column-major"},
                    {"encoding", enc == Encoding::csv ? "csv" : "f64le"},
                    {"data", data.filename().string()}};
    if (enc == Encoding::csv) {
        std::string out;
        for (double v : f.values()) out += format_double(v) + "\n";
        write_text(data, out);
    } else {
        std::string out(f.size() * sizeof(double), '\0');
        for (std::size_t i = 0; i < f.size(); ++i) {
            std::uint64_t bits = std::bit_cast<std::uint64_t>(f.values()[i]);
            for (int b = 0; b < 8; ++b) out[i * 8 + static_cast<std::size_t>(b)] = static_cast<char>(bits >> (8 * b) & 0xFFU);
        }
        write_text(data, out);
    }
    write_text(header, h.dump(2) + "\n");
}

inline GridFunction read_grid_function(const std::filesystem::path& header) {
    const json h = parse_json(read_text(header), header.string());
    Box box;
    std::vector<std::size_t> shape;
    std::string enc;
    std::string data_name;
    try {
        box.lower = h.at("box").at("lower").get<std::vector<double>>();
        box.upper = h.at("box").at("upper").get<std::vector<double>>();
        shape = h.at("shape").get<std::vector<std::size_t>>();
        enc = h.value("encoding", "csv");
        data_name = h.at("data").get<std::string>();
        if (h.value("layout", "column-major") != "column-major")
            throw Error(Errc::io_error, "only column-major layout is supported");
    } catch (const json::exception& e) {
        throw Error(Errc::io_error, "malformed grid header " + header.string() + ": " + e.what());
    }
    const std::filesystem::path data = header.parent_path() / data_name;
    std::vector<double> values;
    if (enc == "csv") {
        std::istringstream in(read_text(data));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line == "\r") continue;
            values.push_back(parse_double(line));
        }
    } else if (enc == "f64le") {
        const std::string raw = read_text(data);
        if (raw.size() % 8 != 0) throw Error(Errc::io_error, "raw data size is not a multiple of 8 bytes");
        values.resize(raw.size() / 8);
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b)
                bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(raw[i * 8 + static_cast<std::size_t>(b)]))
                        << (8 * b);
            values[i] = std::bit_cast<double>(bits);
        }
    } else {
        throw Error(Errc::io_error, "unknown encoding '" + enc + "'");
    }
    try {
        return GridFunction(std::move(box), std::move(shape), std::move(values));
    } catch (const Error& e) {
        throw Error(Errc::io_error, std::string("malformed grid file: ") + e.what());
    }
}

}  // namespace wtm::io
