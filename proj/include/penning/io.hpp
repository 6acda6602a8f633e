#pragma once

// File formats: strict JSON readers for the trap and noise descriptions,
// JSON writers for results, and the fixed CSV dialect used by every tool.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "penning/compensation.hpp"
#include "penning/coupling.hpp"
#include "penning/decoherence.hpp"
#include "penning/electrostatics.hpp"
#include "penning/errors.hpp"
#include "penning/physics_core.hpp"

namespace penning::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Strict field access

inline void require_object(const json& j, std::string_view context)
{
    if (!j.is_object())
        throw ConfigError(std::string(context) + ": expected a JSON object");
}

/// Rejects any key not in `allowed`.
inline void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view context)
{
    require_object(j, context);
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(std::string(context) + ": unknown key '" + key + "'");
    }
}

inline double number(const json& j, const char* key, std::string_view context)
{
    const auto it = j.find(key);
    if (it == j.end())
        throw ConfigError(std::string(context) + ": missing key '" + key + "'");
    if (!it->is_number())
        throw ConfigError(std::string(context) + ": key '" + key + "' must be a number");
    return it->get<double>();
}

inline std::optional<double> optional_number(const json& j, const char* key, std::string_view context)
{
    if (!j.contains(key))
        return std::nullopt;
    return number(j, key, context);
}

inline double number_or(const json& j, const char* key, double fallback, std::string_view context)
{
    return optional_number(j, key, context).value_or(fallback);
}

// ---------------------------------------------------------------------------
// Electrode stacks: {"rings":[{"inner_m":..,"outer_m":..,"volts":..}, ...]}

inline ElectrodeStack stack_from_json(const json& j)
{
    check_keys(j, {"rings"}, "electrode stack");
    const auto it = j.find("rings");
    if (it == j.end() || !it->is_array())
        throw ConfigError("electrode stack: 'rings' must be an array");
    std::vector<Electrode> rings;
    for (const auto& r : *it) {
        check_keys(r, {"inner_m", "outer_m", "volts"}, "electrode stack ring");
        rings.push_back({number(r, "inner_m", "ring"), number(r, "outer_m", "ring"), number(r, "volts", "ring")});
    }
    try {
        return ElectrodeStack(std::move(rings));
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
}

inline json to_json(const ElectrodeStack& stack)
{
    json rings = json::array();
    for (const auto& r : stack.rings())
        rings.push_back({{"inner_m", r.inner_radius}, {"outer_m", r.outer_radius}, {"volts", r.voltage}});
    return {{"rings", rings}};
}

inline json to_json(const TrapCharacterization& t)
{
    return {
        {"z0_m", t.z0},
        {"taylor_v_per_m_k", t.taylor},
        {"axial_rad_per_s", t.omega_z},
        {"axial_hz", to_hz(t.omega_z)},
        {"depth_ev", t.depth_ev},
    };
}

inline json to_json(const CompensationResult& r)
{
    const auto report = anharmonicity_report(r.characterization);
    return {
        {"knob_volts", r.knob_voltage},
        {"nulled_order", r.nulled_order},
        {"residual", r.residual},
        {"characterization", to_json(r.characterization)},
        {"normalized_anharmonicity_k3_to_k6", std::vector<double>(report.begin(), report.end())},
    };
}

inline json to_json(const ModeFrequencies& f)
{
    auto pair = [](double w) { return json{{"rad_per_s", w}, {"hz", to_hz(w)}}; };
    return {
        {"cyclotron", pair(f.cyclotron)},
        {"reduced_cyclotron", pair(f.reduced_cyclotron)},
        {"magnetron", pair(f.magnetron)},
        {"axial", pair(f.axial)},
        {"larmor", pair(f.larmor)},
        {"sum_identity_residual", (f.reduced_cyclotron + f.magnetron - f.cyclotron) / f.cyclotron},
        {"product_identity_residual",
         (f.reduced_cyclotron * f.magnetron - 0.5 * f.axial * f.axial) / (0.5 * f.axial * f.axial)},
    };
}

// ---------------------------------------------------------------------------
// Noise environment

inline Spectrum spectrum_from_json(const json& j, bool magnetic)
{
    const char* level_key = magnetic ? "level_t2_per_hz" : "level_v2_per_m2_per_hz";
    const std::string_view ctx = magnetic ? "magnetic_spectrum" : "electric_spectrum";
    check_keys(j, {"model", level_key, "circuit_ohm"}, ctx);
    if (!j.contains("model") || !j["model"].is_string())
        throw ConfigError(std::string(ctx) + ": 'model' must be a string");
    Spectrum s;
    s.model = spectrum_model_from_string(j["model"].get<std::string>());
    if (magnetic && (s.model == SpectrumModel::GoldElectrode || s.model == SpectrumModel::JohnsonCircuit))
        throw ConfigError("magnetic_spectrum: model '" + std::string(to_string(s.model)) + "' is electric-only");
    if (!magnetic && s.model == SpectrumModel::VacuumMagnetic)
        throw ConfigError("electric_spectrum: model 'vacuum' is magnetic-only");
    if (s.model == SpectrumModel::White || s.model == SpectrumModel::DetailedBalance)
        s.level = number(j, level_key, ctx);
    else if (j.contains(level_key))
        throw ConfigError(std::string(ctx) + ": '" + level_key + "' not used by model " + std::string(to_string(s.model)));
    if (s.model == SpectrumModel::JohnsonCircuit)
        s.circuit_resistance = number(j, "circuit_ohm", ctx);
    else if (j.contains("circuit_ohm"))
        throw ConfigError(std::string(ctx) + ": 'circuit_ohm' only applies to johnson-circuit");
    return s;
}

inline json to_json(const Spectrum& s, bool magnetic)
{
    json j{{"model", std::string(to_string(s.model))}};
    if (s.model == SpectrumModel::White || s.model == SpectrumModel::DetailedBalance)
        j[magnetic ? "level_t2_per_hz" : "level_v2_per_m2_per_hz"] = s.level;
    if (s.model == SpectrumModel::JohnsonCircuit)
        j["circuit_ohm"] = s.circuit_resistance;
    return j;
}

/// Relative fluctuations are given as amplitude spectral densities (1/sqrt(Hz))
/// and stored as power spectral densities.
inline NoiseEnvironment environment_from_json(const json& j)
{
    constexpr std::string_view ctx = "noise environment";
    check_keys(j,
               {"temperature_k", "dc_voltage_stability", "voltage_noise_rel_asd_per_rthz",
                "magnetic_noise_rel_asd_per_rthz", "magnetic_spectrum", "electric_spectrum"},
               ctx);
    NoiseEnvironment env;
    env.temperature = number(j, "temperature_k", ctx);
    env.dc_voltage_stability = number_or(j, "dc_voltage_stability", 0.0, ctx);
    const double asd_u = number_or(j, "voltage_noise_rel_asd_per_rthz", 0.0, ctx);
    const double asd_b = number_or(j, "magnetic_noise_rel_asd_per_rthz", 0.0, ctx);
    if (asd_u < 0.0 || asd_b < 0.0)
        throw ConfigError("noise environment: amplitude spectral densities must be non-negative");
    env.voltage_noise_rel_psd = asd_u * asd_u;
    env.magnetic_noise_rel_psd = asd_b * asd_b;
    if (j.contains("magnetic_spectrum"))
        env.magnetic = spectrum_from_json(j["magnetic_spectrum"], true);
    if (j.contains("electric_spectrum"))
        env.electric = spectrum_from_json(j["electric_spectrum"], false);
    try {
        env.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    return env;
}

inline json to_json(const NoiseEnvironment& env)
{
    return {
        {"temperature_k", env.temperature},
        {"dc_voltage_stability", env.dc_voltage_stability},
        {"voltage_noise_rel_asd_per_rthz", std::sqrt(env.voltage_noise_rel_psd)},
        {"magnetic_noise_rel_asd_per_rthz", std::sqrt(env.magnetic_noise_rel_psd)},
        {"magnetic_spectrum", to_json(env.magnetic, true)},
        {"electric_spectrum", to_json(env.electric, false)},
    };
}

/// Symmetric wire link. Height defaults to the compensated-trap ratio and the
/// capacitances to the layout rule.
inline WireLink wire_from_json(const json& j, double omega_z)
{
    constexpr std::string_view ctx = "wire";
    check_keys(j, {"r0_m", "length_m", "resistance_ohm", "height_m", "c0_f", "cw_f", "axial_hz"}, ctx);
    const double r0 = number(j, "r0_m", ctx);
    const double length = number(j, "length_m", ctx);
    if (!(r0 > 0.0) || !(length > 0.0))
        throw ConfigError("wire: r0_m and length_m must be positive");
    const double wz = j.contains("axial_hz") ? to_rad_per_s(number(j, "axial_hz", ctx)) : omega_z;
    auto link = WireLink::symmetric(r0, length, wz, number(j, "resistance_ohm", ctx));
    if (const auto h = optional_number(j, "height_m", ctx))
        link.h_1 = link.h_2 = *h;
    if (const auto c0 = optional_number(j, "c0_f", ctx))
        link.C0_1 = link.C0_2 = *c0;
    if (const auto cw = optional_number(j, "cw_f", ctx))
        link.C_w = *cw;
    try {
        link.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    return link;
}

inline json to_json(const WireLink& l)
{
    return {
        {"r0_m", l.R0_1}, {"height_m", l.h_1}, {"length_m", l.length}, {"c0_f", l.C0_1},
        {"cw_f", l.C_w}, {"resistance_ohm", l.R_w}, {"axial_hz", to_hz(l.omega_z)},
    };
}

inline json to_json(const DecoherenceBudget& b)
{
    json rates = json::object();
    for (const auto& [name, rate] : b.entries())
        rates[std::string(name)] = rate;
    if (!b.wire_johnson)
        rates["wire_johnson"] = nullptr;
    const auto [dom_name, dom_rate] = b.dominant();
    return {
        {"rates_per_s", rates},
        {"dominant", {{"name", std::string(dom_name)}, {"rate_per_s", dom_rate}}},
        {"total_per_s", b.total()},
    };
}

// ---------------------------------------------------------------------------
// CSV: comma separated, '.' decimal, %.8e (nine significant digits).

inline std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.8e", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), columns_(header.size())
    {
        write_fields(header);
    }

    void row(std::initializer_list<double> values) { row(std::vector<double>(values)); }

    void row(const std::vector<double>& values)
    {
        std::vector<std::string> fields;
        fields.reserve(values.size());
        for (double v : values)
            fields.push_back(format_number(v));
        text_row(fields);
    }

    /// Pre-formatted fields, for label and integer columns.
    void text_row(const std::vector<std::string>& fields)
    {
        if (fields.size() != columns_)
            throw Error("CsvWriter: row has " + std::to_string(fields.size()) + " fields, header has "
                        + std::to_string(columns_));
        write_fields(fields);
    }

private:
    void write_fields(const std::vector<std::string>& fields)
    {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i)
                out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
    }

    std::ostream& out_;
    std::size_t columns_;
};

} // namespace penning::io
