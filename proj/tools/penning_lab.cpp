// penning-lab: design, coupling, budget and simulation workflows for planar
// Penning-trap electron qubits.
//
// Exit codes: 0 success, 1 physics/domain failure (no trap, unstable radial
// motion, Fock truncation, no compensating root), 2 usage or configuration error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parallel.hpp"
#include "penning/io.hpp"
#include "penning/oscillator_pair.hpp"
#include "penning/penning.hpp"

namespace {

using namespace penning;
using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Input / output plumbing

json read_json(const std::string& path)
{
    std::string text;
    if (path == "-") {
        text.assign(std::istreambuf_iterator<char>(std::cin), {});
    } else {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open input '" + path + "'");
        text.assign(std::istreambuf_iterator<char>(in), {});
    }
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("input '" + path + "' is not valid JSON: " + e.what());
    }
}

/// Applies `a.b.2.c=value` overrides. Intermediate keys must already exist;
/// values parse as JSON and fall back to plain strings.
void apply_overrides(json& doc, const std::vector<std::string>& overrides)
{
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("--set expects key=value, got '" + item + "'");
        const std::string path = item.substr(0, eq);
        const std::string raw = item.substr(eq + 1);
        json value = json::parse(raw, nullptr, false);
        if (value.is_discarded())
            value = raw;

        json* node = &doc;
        std::stringstream ss(path);
        std::string key;
        std::vector<std::string> keys;
        while (std::getline(ss, key, '.'))
            keys.push_back(key);
        for (std::size_t i = 0; i < keys.size(); ++i) {
            const bool last = i + 1 == keys.size();
            const auto& k = keys[i];
            if (node->is_array()) {
                std::size_t idx = 0;
                try {
                    idx = std::stoul(k);
                } catch (const std::exception&) {
                    throw ConfigError("--set " + path + ": '" + k + "' is not an array index");
                }
                if (idx >= node->size())
                    throw ConfigError("--set " + path + ": index " + k + " out of range");
                node = &(*node)[idx];
            } else if (node->is_object()) {
                if (!last && !node->contains(k))
                    throw ConfigError("--set " + path + ": no key '" + k + "'");
                node = &(*node)[k];
            } else {
                throw ConfigError("--set " + path + ": cannot descend into a scalar");
            }
        }
        *node = value;
    }
}

class Output {
public:
    explicit Output(const std::string& path)
    {
        if (path != "-") {
            file_.open(path, std::ios::binary);
            if (!file_)
                throw ConfigError("cannot open output '" + path + "'");
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

enum class Format { Csv, Json };

const std::map<std::string, Format> kFormats{{"csv", Format::Csv}, {"json", Format::Json}};

std::string integer_field(long long v)
{
    return std::to_string(v);
}

struct Line {
    double slope;
    double intercept;
};

Line fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope, (sy - slope * sx) / n};
}

// ---------------------------------------------------------------------------
// potential

struct PotentialArgs {
    std::string input;
    std::string output = "-";
    Format format = Format::Csv;
    std::vector<std::string> overrides;
    std::optional<double> z_min, z_max;
    std::size_t points = 400;
};

void run_potential(const PotentialArgs& a)
{
    json doc = read_json(a.input);
    apply_overrides(doc, a.overrides);
    const auto stack = io::stack_from_json(doc);
    const double zlo = a.z_min.value_or(0.05 * stack.max_radius());
    const double zhi = a.z_max.value_or(3.0 * stack.max_radius());
    if (!(zlo > 0.0) || !(zhi > zlo) || a.points < 2)
        throw ConfigError("potential: need 0 < z-min < z-max and at least 2 points");

    struct Sample {
        double z, phi, field;
    };
    const auto samples = tools::parallel_map(a.points, [&](std::size_t i) {
        const double z = zlo + (zhi - zlo) * static_cast<double>(i) / static_cast<double>(a.points - 1);
        const auto d = potential_derivatives(stack, z, 1);
        return Sample{z, on_axis_potential(stack, z), -d[0]};
    });

    Output out(a.output);
    if (a.format == Format::Csv) {
        io::CsvWriter csv(out.stream(), {"z_m", "phi_v", "field_v_per_m"});
        for (const auto& s : samples)
            csv.row({s.z, s.phi, s.field});
        return;
    }
    json j{{"stack", io::to_json(stack)}};
    try {
        j["characterization"] = io::to_json(characterize(stack));
    } catch (const NoTrap&) {
        j["characterization"] = nullptr;
    }
    json z = json::array(), phi = json::array(), field = json::array();
    for (const auto& s : samples) {
        z.push_back(s.z);
        phi.push_back(s.phi);
        field.push_back(s.field);
    }
    j["curve"] = {{"z_m", z}, {"phi_v", phi}, {"field_v_per_m", field}};
    out.stream() << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// compensate

struct CompensateArgs {
    std::string input;
    std::string output = "-";
    Format format = Format::Json;
    std::vector<std::string> overrides;
    std::optional<std::size_t> knob;
    int order = kDefaultNulledOrder;
    double knob_min = -10.0;
    double knob_max = 10.0;
    std::vector<double> family;  // r0_min, r0_max, count
    bool curve = false;
    std::size_t points = 400;
};

struct CurvePoint {
    double z, before, after;
};

/// Potential of the input stack and of the tuned stack on a common grid.
std::vector<CurvePoint> compensation_curve(const ElectrodeStack& before, const ElectrodeStack& after,
                                           std::size_t points)
{
    if (points < 2)
        throw ConfigError("compensate: --points must be at least 2");
    const double zlo = 0.05 * before.max_radius();
    const double zhi = 3.0 * before.max_radius();
    return tools::parallel_map(points, [&](std::size_t i) {
        const double z = zlo + (zhi - zlo) * static_cast<double>(i) / static_cast<double>(points - 1);
        return CurvePoint{z, on_axis_potential(before, z), on_axis_potential(after, z)};
    });
}

void run_compensate(const CompensateArgs& a)
{
    json doc = read_json(a.input);
    apply_overrides(doc, a.overrides);
    const auto stack = io::stack_from_json(doc);
    const std::size_t knob = a.knob.value_or(stack.size() - 1);
    if (a.order != 3 && a.order != 4)
        throw ConfigError("compensate: --order must be 3 or 4");
    if (!(a.knob_max > a.knob_min))
        throw ConfigError("compensate: --knob-max must exceed --knob-min");
    KnobSearch search;
    search.lo = a.knob_min;
    search.hi = a.knob_max;

    if (a.family.empty()) {
        const auto r = optimize_compensation(stack, knob, a.order, search);
        const auto tuned = stack.with_voltage(knob, r.knob_voltage);
        std::vector<CurvePoint> curve;
        if (a.curve)
            curve = compensation_curve(stack, tuned, a.points);
        Output out(a.output);
        if (a.format == Format::Json) {
            auto j = io::to_json(r);
            j["knob_index"] = knob;
            j["stack"] = io::to_json(tuned);
            if (a.curve) {
                json z = json::array(), before = json::array(), after = json::array();
                for (const auto& c : curve) {
                    z.push_back(c.z);
                    before.push_back(c.before);
                    after.push_back(c.after);
                }
                j["curve"] = {{"z_m", z}, {"phi_uncompensated_v", before}, {"phi_compensated_v", after}};
            }
            out.stream() << j.dump(2) << '\n';
            return;
        }
        if (a.curve) {
            io::CsvWriter csv(out.stream(), {"z_m", "phi_uncompensated_v", "phi_compensated_v"});
            for (const auto& c : curve)
                csv.row({c.z, c.before, c.after});
            return;
        }
        const auto rep = anharmonicity_report(r.characterization);
        io::CsvWriter csv(out.stream(), {"knob_volts", "z0_m", "axial_rad_per_s", "axial_hz", "depth_ev", "residual",
                                         "c3_norm", "c4_norm", "c5_norm", "c6_norm"});
        const auto& t = r.characterization;
        csv.row({r.knob_voltage, t.z0, t.omega_z, to_hz(t.omega_z), t.depth_ev, r.residual, rep[0], rep[1], rep[2],
                 rep[3]});
        return;
    }

    if (a.curve)
        throw ConfigError("compensate: --curve applies to a single stack, not --family");
    if (a.family.size() != 3 || !(a.family[0] > 0.0) || !(a.family[1] > a.family[0]) || a.family[2] < 2
        || a.family[2] != std::floor(a.family[2]))
        throw ConfigError("compensate: --family expects R0_MIN R0_MAX COUNT with 0 < min < max, count >= 2");
    const auto count = static_cast<std::size_t>(a.family[2]);
    const double base_r0 = stack.rings().front().outer_radius;
    struct Member {
        double r0;
        CompensationResult result;
    };
    const auto members = tools::parallel_map(count, [&](std::size_t i) {
        const double r0 = a.family[0] + (a.family[1] - a.family[0]) * static_cast<double>(i) / static_cast<double>(count - 1);
        return Member{r0, optimize_compensation(stack.scaled(r0 / base_r0), knob, a.order, search)};
    });
    std::vector<double> xs, ys;
    for (const auto& m : members) {
        xs.push_back(m.r0);
        ys.push_back(m.result.characterization.z0);
    }
    const auto fit = fit_line(xs, ys);

    Output out(a.output);
    if (a.format == Format::Csv) {
        io::CsvWriter csv(out.stream(), {"r0_m", "z0_m", "height_ratio", "knob_volts", "axial_rad_per_s", "axial_hz"});
        for (const auto& m : members) {
            const auto& t = m.result.characterization;
            csv.row({m.r0, t.z0, t.z0 / m.r0, m.result.knob_voltage, t.omega_z, to_hz(t.omega_z)});
        }
        return;
    }
    json rows = json::array();
    for (const auto& m : members) {
        auto j = io::to_json(m.result);
        j["r0_m"] = m.r0;
        rows.push_back(j);
    }
    out.stream() << json{{"family", rows}, {"fit", {{"slope", fit.slope}, {"intercept_m", fit.intercept}}}}.dump(2)
                 << '\n';
}

// ---------------------------------------------------------------------------
// modes

struct ModesArgs {
    double B0 = 0.0;
    double fz = 0.0;
    std::optional<double> b2;
    std::string output = "-";
    Format format = Format::Json;
};

void run_modes(const ModesArgs& a)
{
    const auto f = mode_frequencies(a.B0, to_rad_per_s(a.fz));
    Output out(a.output);
    std::optional<BottleShift> shift;
    if (a.b2)
        shift = bottle_shift(*a.b2, f.axial);
    if (a.format == Format::Json) {
        auto j = io::to_json(f);
        j["b0_t"] = a.B0;
        if (shift)
            j["bottle"] = {{"b2_t_per_m2", *a.b2},
                           {"axial_shift_up_rad_per_s", shift->up},
                           {"axial_shift_up_hz", to_hz(shift->up)},
                           {"axial_shift_down_rad_per_s", shift->down},
                           {"axial_shift_down_hz", to_hz(shift->down)}};
        out.stream() << j.dump(2) << '\n';
        return;
    }
    std::vector<std::string> header{"b0_t"};
    std::vector<double> row{a.B0};
    const std::pair<const char*, double> modes[] = {{"cyclotron", f.cyclotron},
                                                    {"reduced_cyclotron", f.reduced_cyclotron},
                                                    {"magnetron", f.magnetron},
                                                    {"axial", f.axial},
                                                    {"larmor", f.larmor}};
    for (const auto& [name, w] : modes) {
        header.push_back(std::string(name) + "_rad_per_s");
        header.push_back(std::string(name) + "_hz");
        row.push_back(w);
        row.push_back(to_hz(w));
    }
    if (shift) {
        header.insert(header.end(), {"axial_shift_up_hz", "axial_shift_down_hz"});
        row.insert(row.end(), {to_hz(shift->up), to_hz(shift->down)});
    }
    io::CsvWriter csv(out.stream(), header);
    csv.row(row);
}

// ---------------------------------------------------------------------------
// couple

struct FileArgs {
    std::string input;
    std::string output = "-";
    std::optional<Format> format;
    std::vector<std::string> overrides;
};

struct JCell {
    double b, d, j;
};

struct WireCell {
    double r0, d;
    WireLink link;
    double omega12;
};

std::vector<JCell> j_grid(const std::vector<double>& bs, const std::vector<double>& ds, double omega_z)
{
    std::vector<JCell> out;
    for (double b : bs)
        for (double d : ds)
            out.push_back({b, d, spin_spin_J(b, omega_z, d)});
    return out;
}

WireCell wire_cell(double r0, double d, double omega_z)
{
    const auto link = WireLink::symmetric(r0, d, omega_z);
    return {r0, d, link, wire_coupling(link)};
}

void write_j_grid(std::ostream& os, const std::vector<JCell>& cells, double omega_z)
{
    io::CsvWriter csv(os, {"gradient_tesla_per_m", "distance_m", "axial_rad_per_s", "axial_hz", "j_hz"});
    for (const auto& c : cells)
        csv.row({c.b, c.d, omega_z, to_hz(omega_z), c.j});
}

void write_wire_grid(std::ostream& os, const std::vector<WireCell>& cells)
{
    io::CsvWriter csv(os, {"r0_m", "distance_m", "height_m", "c0_f", "cw_f", "omega12_rad_per_s", "omega12_hz"});
    for (const auto& c : cells)
        csv.row({c.r0, c.d, c.link.h_1, c.link.C0_1, c.link.C_w, c.omega12, to_hz(c.omega12)});
}

std::vector<double> positive_list(const json& j, const char* key, std::string_view ctx)
{
    if (!j.contains(key) || !j[key].is_array() || j[key].empty())
        throw ConfigError(std::string(ctx) + ": '" + key + "' must be a non-empty array");
    std::vector<double> out;
    for (const auto& v : j[key]) {
        if (!v.is_number() || !(v.get<double>() > 0.0))
            throw ConfigError(std::string(ctx) + ": '" + key + "' entries must be positive numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

ArrayLayout layout_from_json(const json& j, double omega_z)
{
    io::check_keys(j, {"gradient_tesla_per_m", "sites_m"}, "spin_array");
    ArrayLayout layout{{}, io::number(j, "gradient_tesla_per_m", "spin_array"), omega_z};
    if (!j.contains("sites_m") || !j["sites_m"].is_array())
        throw ConfigError("spin_array: 'sites_m' must be an array of [x, y] pairs");
    for (const auto& s : j["sites_m"]) {
        if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number())
            throw ConfigError("spin_array: each site must be [x_m, y_m]");
        layout.sites.push_back({s[0].get<double>(), s[1].get<double>()});
    }
    if (layout.gradient < 0.0)
        throw ConfigError("spin_array: gradient must be non-negative");
    return layout;
}

void run_couple(const FileArgs& a)
{
    json doc = read_json(a.input);
    apply_overrides(doc, a.overrides);
    io::check_keys(doc, {"axial_hz", "spin_array", "wire", "temperature_k", "j_grid", "wire_grid"}, "couple");
    const double omega_z = to_rad_per_s(io::number(doc, "axial_hz", "couple"));
    if (!(omega_z > 0.0))
        throw ConfigError("couple: axial_hz must be positive");
    const bool has_array = doc.contains("spin_array");
    const bool has_wire = doc.contains("wire");
    const bool has_jgrid = doc.contains("j_grid");
    const bool has_wgrid = doc.contains("wire_grid");
    const int sections = has_array + has_wire + has_jgrid + has_wgrid;
    if (sections == 0)
        throw ConfigError("couple: need at least one of 'spin_array', 'wire', 'j_grid', 'wire_grid'");
    const Format format = a.format.value_or(Format::Json);
    if (format == Format::Csv && sections != 1)
        throw ConfigError("couple: CSV output holds one section; give exactly one input section");

    Output out(a.output);
    json result = json::object();
    if (has_jgrid) {
        const auto& g = doc["j_grid"];
        io::check_keys(g, {"gradients_tesla_per_m", "distances_m"}, "j_grid");
        const auto cells = j_grid(positive_list(g, "gradients_tesla_per_m", "j_grid"),
                                  positive_list(g, "distances_m", "j_grid"), omega_z);
        if (format == Format::Csv)
            return write_j_grid(out.stream(), cells, omega_z);
        json rows = json::array();
        for (const auto& c : cells)
            rows.push_back({{"gradient_tesla_per_m", c.b}, {"distance_m", c.d}, {"j_hz", c.j}});
        result["j_grid"] = rows;
    }
    if (has_wgrid) {
        const auto& g = doc["wire_grid"];
        io::check_keys(g, {"r0_m", "length_m"}, "wire_grid");
        const auto r0s = positive_list(g, "r0_m", "wire_grid");
        const auto ds = positive_list(g, "length_m", "wire_grid");
        std::vector<WireCell> cells;
        for (double r0 : r0s)
            for (double d : ds)
                cells.push_back(wire_cell(r0, d, omega_z));
        if (format == Format::Csv)
            return write_wire_grid(out.stream(), cells);
        json rows = json::array();
        for (const auto& c : cells)
            rows.push_back({{"r0_m", c.r0}, {"length_m", c.d}, {"height_m", c.link.h_1},
                            {"omega12_rad_per_s", c.omega12}, {"omega12_hz", to_hz(c.omega12)}});
        result["wire_grid"] = rows;
    }
    if (has_array) {
        const auto layout = layout_from_json(doc["spin_array"], omega_z);
        const auto J = j_matrix(layout);
        if (format == Format::Csv) {
            io::CsvWriter csv(out.stream(), {"i", "j", "distance_m", "j_hz"});
            for (std::size_t i = 0; i < layout.sites.size(); ++i)
                for (std::size_t k = i + 1; k < layout.sites.size(); ++k) {
                    const auto& p = layout.sites[i];
                    const auto& q = layout.sites[k];
                    csv.text_row({integer_field(static_cast<long long>(i)), integer_field(static_cast<long long>(k)),
                                  io::format_number(std::hypot(p.x - q.x, p.y - q.y)),
                                  io::format_number(J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)))});
                }
            return;
        }
        json rows = json::array();
        for (Eigen::Index i = 0; i < J.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index k = 0; k < J.cols(); ++k)
                row.push_back(J(i, k));
            rows.push_back(row);
        }
        result["j_matrix_hz"] = rows;
    }
    if (has_wire) {
        const auto link = io::wire_from_json(doc["wire"], omega_z);
        const double T = io::number(doc, "temperature_k", "couple (required with 'wire')");
        if (!(T > 0.0))
            throw ConfigError("couple: temperature_k must be positive");
        const double omega12 = wire_coupling(link);
        const double n = n_max(T, link);
        const double gamma = wire_gate_decoherence(omega12, n);
        if (format == Format::Csv) {
            io::CsvWriter csv(out.stream(), {"omega12_rad_per_s", "omega12_hz", "swap_time_s", "n_max",
                                             "gate_decoherence_per_s"});
            csv.row({omega12, to_hz(omega12), swap_time(omega12), n, gamma});
            return;
        }
        result["wire"] = {{"link", io::to_json(link)},
                          {"temperature_k", T},
                          {"omega12_rad_per_s", omega12},
                          {"omega12_hz", to_hz(omega12)},
                          {"swap_time_s", swap_time(omega12)},
                          {"n_max", n},
                          {"gate_decoherence_per_s", gamma}};
    }
    out.stream() << result.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// budget

struct BudgetInputs {
    NoiseEnvironment env;
    ModeFrequencies freqs;
    std::optional<WireLink> link;
};

BudgetInputs budget_inputs_from_json(const json& doc)
{
    io::check_keys(doc, {"environment", "b0_t", "axial_hz", "wire"}, "budget");
    if (!doc.contains("environment"))
        throw ConfigError("budget: missing key 'environment'");
    BudgetInputs in;
    in.env = io::environment_from_json(doc["environment"]);
    const double wz = to_rad_per_s(io::number(doc, "axial_hz", "budget"));
    const double B0 = io::number(doc, "b0_t", "budget");
    if (!(wz > 0.0) || !(B0 > 0.0))
        throw ConfigError("budget: b0_t and axial_hz must be positive");
    in.freqs = mode_frequencies(B0, wz);
    if (doc.contains("wire"))
        in.link = io::wire_from_json(doc["wire"], wz);
    return in;
}

void write_budget(std::ostream& os, Format format, const BudgetInputs& in, const DecoherenceBudget& b)
{
    if (format == Format::Csv) {
        io::CsvWriter csv(os, {"source", "rate_per_s"});
        for (const auto& [name, rate] : b.entries())
            csv.text_row({std::string(name), io::format_number(rate)});
        if (!b.wire_johnson)
            csv.text_row({"wire_johnson", "absent"});
        return;
    }
    const double tau = dc_dephasing_time(in.env.dc_voltage_stability, in.freqs.axial);
    json j{{"budget", io::to_json(b)},
           {"modes", io::to_json(in.freqs)},
           {"environment", io::to_json(in.env)},
           {"dc_dephasing_time_s", std::isinf(tau) ? json(nullptr) : json(tau)}};
    if (in.link)
        j["wire"] = io::to_json(*in.link);
    os << j.dump(2) << '\n';
}

void run_budget(const FileArgs& a)
{
    json doc = read_json(a.input);
    apply_overrides(doc, a.overrides);
    const auto in = budget_inputs_from_json(doc);
    const auto b = build_budget(in.env, in.freqs, in.link);
    Output out(a.output);
    write_budget(out.stream(), a.format.value_or(Format::Json), in, b);
}

// ---------------------------------------------------------------------------
// simulate

Axis axis_from_string(const std::string& s)
{
    if (s == "x")
        return Axis::X;
    if (s == "y")
        return Axis::Y;
    if (s == "z")
        return Axis::Z;
    throw ConfigError("rotate: axis must be x, y or z, got '" + s + "'");
}

std::string string_field(const json& j, const char* key, std::string_view ctx)
{
    if (!j.contains(key) || !j[key].is_string())
        throw ConfigError(std::string(ctx) + ": '" + key + "' must be a string");
    return j[key].get<std::string>();
}

long long integer(const json& j, const char* key, std::string_view ctx)
{
    if (!j.contains(key) || !j[key].is_number_integer())
        throw ConfigError(std::string(ctx) + ": '" + key + "' must be an integer");
    return j[key].get<long long>();
}

void simulate_register(const json& doc, Format format, std::ostream& os)
{
    constexpr std::string_view ctx = "register program";
    io::check_keys(doc,
                   {"system", "qubits", "initial_basis_index", "couplings_hz", "layout", "steps", "target_amplitudes"},
                   ctx);
    const auto n = integer(doc, "qubits", ctx);
    const auto init = doc.contains("initial_basis_index") ? integer(doc, "initial_basis_index", ctx) : 0;
    if (n < 1 || n > kMaxQubits || init < 0)
        throw ConfigError("register program: qubits must be in [1, 12] and the basis index non-negative");
    auto state = RegisterState::basis(static_cast<int>(n), static_cast<std::uint64_t>(init));

    std::optional<Eigen::MatrixXd> J;
    if (doc.contains("couplings_hz") && doc.contains("layout"))
        throw ConfigError("register program: give 'couplings_hz' or 'layout', not both");
    if (doc.contains("couplings_hz")) {
        const auto& rows = doc["couplings_hz"];
        if (!rows.is_array() || static_cast<long long>(rows.size()) != n)
            throw ConfigError("register program: 'couplings_hz' must be an n x n array");
        J = Eigen::MatrixXd::Zero(n, n);
        for (long long i = 0; i < n; ++i) {
            if (!rows[i].is_array() || static_cast<long long>(rows[i].size()) != n)
                throw ConfigError("register program: 'couplings_hz' must be an n x n array");
            for (long long k = 0; k < n; ++k) {
                if (!rows[i][k].is_number())
                    throw ConfigError("register program: couplings must be numbers");
                (*J)(i, k) = rows[i][k].get<double>();
            }
        }
    } else if (doc.contains("layout")) {
        const auto& lj = doc["layout"];
        io::check_keys(lj, {"gradient_tesla_per_m", "sites_m", "axial_hz"}, "layout");
        json arr = lj;
        arr.erase("axial_hz");
        J = j_matrix(layout_from_json(arr, to_rad_per_s(io::number(lj, "axial_hz", "layout"))));
        if (J->rows() != n)
            throw ConfigError("register program: layout site count does not match 'qubits'");
    }

    std::optional<RegisterState> target;
    if (doc.contains("target_amplitudes")) {
        const auto& tj = doc["target_amplitudes"];
        if (!tj.is_array() || tj.size() != state.dimension())
            throw ConfigError("register program: 'target_amplitudes' needs 2^qubits [re, im] pairs");
        std::vector<cplx> amps;
        for (const auto& a : tj) {
            if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
                throw ConfigError("register program: each target amplitude must be [re, im]");
            amps.emplace_back(a[0].get<double>(), a[1].get<double>());
        }
        try {
            target = RegisterState::from_amplitudes(std::move(amps));
        } catch (const InvalidInput& e) {
            throw ConfigError(std::string("register program: ") + e.what());
        }
    }

    // One trajectory row per step, starting with the initial state.
    struct Row {
        std::string op;
        double t;
        std::vector<double> excited;
        double fidelity;
    };
    std::vector<Row> trajectory;
    double elapsed = 0.0;
    auto record = [&](std::string op) {
        Row r{std::move(op), elapsed, {}, target ? state.fidelity(*target) : std::nan("")};
        for (int q = 0; q < state.n_qubits(); ++q)
            r.excited.push_back(state.excited_population(q));
        trajectory.push_back(std::move(r));
    };
    record("init");

    if (doc.contains("steps")) {
        if (!doc["steps"].is_array())
            throw ConfigError("register program: 'steps' must be an array");
        for (const auto& step : doc["steps"]) {
            const auto op = string_field(step, "op", "step");
            if (op == "rotate") {
                io::check_keys(step, {"op", "qubit", "axis", "angle_rad"}, "rotate step");
                state = apply_rotation(state, static_cast<int>(integer(step, "qubit", "rotate step")),
                                       axis_from_string(string_field(step, "axis", "rotate step")),
                                       io::number(step, "angle_rad", "rotate step"));
            } else if (op == "ising") {
                io::check_keys(step, {"op", "time_s"}, "ising step");
                if (!J)
                    throw ConfigError("ising step needs 'couplings_hz' or 'layout'");
                const double t = io::number(step, "time_s", "ising step");
                if (t < 0.0)
                    throw ConfigError("ising step: time_s must be non-negative");
                state = evolve_ising(state, *J, t);
                elapsed += t;
            } else {
                throw ConfigError("register program: unknown op '" + op + "'");
            }
            record(op);
        }
    }

    if (format == Format::Csv) {
        std::vector<std::string> header{"step", "op", "t_s"};
        for (int q = 0; q < state.n_qubits(); ++q)
            header.push_back("p_up_q" + std::to_string(q));
        if (target)
            header.push_back("fidelity");
        io::CsvWriter csv(os, header);
        for (std::size_t k = 0; k < trajectory.size(); ++k) {
            const auto& r = trajectory[k];
            std::vector<std::string> fields{integer_field(static_cast<long long>(k)), r.op, io::format_number(r.t)};
            for (double p : r.excited)
                fields.push_back(io::format_number(p));
            if (target)
                fields.push_back(io::format_number(r.fidelity));
            csv.text_row(fields);
        }
        return;
    }
    json amps = json::array(), probs = json::array(), excited = json::array();
    for (std::size_t i = 0; i < state.dimension(); ++i) {
        amps.push_back({state.amplitude(i).real(), state.amplitude(i).imag()});
        probs.push_back(std::norm(state.amplitude(i)));
    }
    for (int q = 0; q < state.n_qubits(); ++q)
        excited.push_back(state.excited_population(q));
    json steps = json::array();
    for (const auto& r : trajectory) {
        json row{{"op", r.op}, {"t_s", r.t}, {"excited_population", r.excited}};
        if (target)
            row["fidelity"] = r.fidelity;
        steps.push_back(row);
    }
    json j{{"system", "register"},
           {"qubits", n},
           {"norm", state.norm()},
           {"amplitudes", amps},
           {"probabilities", probs},
           {"excited_population", excited},
           {"trajectory", steps}};
    if (target)
        j["fidelity"] = state.fidelity(*target);
    os << j.dump(2) << '\n';
}

std::vector<double> sample_times(double t_end, long long samples)
{
    std::vector<double> ts;
    for (long long k = 0; k < samples; ++k)
        ts.push_back(samples == 1 ? t_end : t_end * static_cast<double>(k) / static_cast<double>(samples - 1));
    return ts;
}

void simulate_spin(const json& doc, Format format, std::ostream& os)
{
    constexpr std::string_view ctx = "spin_master program";
    io::check_keys(doc,
                   {"system", "larmor_hz", "gamma_minus_per_s", "gamma_plus_per_s", "initial", "t_end_s", "samples",
                    "method"},
                   ctx);
    const SpinRelaxation p{to_rad_per_s(io::number(doc, "larmor_hz", ctx)), io::number(doc, "gamma_minus_per_s", ctx),
                           io::number(doc, "gamma_plus_per_s", ctx)};
    SpinDensity rho = SpinDensity::down();
    if (doc.contains("initial")) {
        const auto& ij = doc["initial"];
        io::check_keys(ij, {"down_down", "down_up_re", "down_up_im"}, "initial");
        rho = SpinDensity::from_elements(io::number(ij, "down_down", "initial"),
                                         {io::number_or(ij, "down_up_re", 0.0, "initial"),
                                          io::number_or(ij, "down_up_im", 0.0, "initial")});
    }
    const double t_end = io::number(doc, "t_end_s", ctx);
    const auto samples = doc.contains("samples") ? integer(doc, "samples", ctx) : 101;
    const std::string method = doc.contains("method") ? string_field(doc, "method", ctx) : "closed-form";
    if (method != "closed-form" && method != "ode")
        throw ConfigError("spin_master program: method must be 'closed-form' or 'ode'");
    if (t_end < 0.0 || samples < 1)
        throw ConfigError("spin_master program: need t_end_s >= 0 and samples >= 1");

    const auto ts = sample_times(t_end, samples);
    const auto states = tools::parallel_map(ts.size(), [&](std::size_t i) {
        return method == "ode" ? integrate_spin_master(rho, p, ts[i]) : evolve_spin_master(rho, p, ts[i]);
    });
    if (format == Format::Csv) {
        io::CsvWriter csv(os, {"t_s", "rho_down_down", "rho_up_up", "rho_down_up_re", "rho_down_up_im", "coherence_abs"});
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const auto& s = states[i];
            csv.row({ts[i], s.down_down(), s.up_up(), s.down_up().real(), s.down_up().imag(), std::abs(s.down_up())});
        }
        return;
    }
    json rows = json::array();
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const auto& s = states[i];
        rows.push_back({{"t_s", ts[i]},
                        {"rho_down_down", s.down_down()},
                        {"rho_up_up", s.up_up()},
                        {"rho_down_up", {s.down_up().real(), s.down_up().imag()}},
                        {"coherence_abs", std::abs(s.down_up())}});
    }
    const double sum = p.gamma_minus + p.gamma_plus;
    os << json{{"system", "spin_master"},
               {"method", method},
               {"steady_down_down", sum > 0.0 ? json(p.gamma_plus / sum) : json(nullptr)},
               {"samples", rows}}
              .dump(2)
       << '\n';
}

void simulate_swap(const json& doc, Format format, std::ostream& os)
{
    constexpr std::string_view ctx = "swap program";
    io::check_keys(doc,
                   {"system", "omega12_rad_per_s", "gamma_z_per_s", "temperature_k", "axial_hz", "n_cut",
                    "initial_fock", "t_end_s", "samples"},
                   ctx);
    const SwapParameters p{io::number(doc, "omega12_rad_per_s", ctx), io::number(doc, "gamma_z_per_s", ctx),
                           io::number_or(doc, "temperature_k", 0.0, ctx), to_rad_per_s(io::number(doc, "axial_hz", ctx))};
    const auto n_cut = doc.contains("n_cut") ? integer(doc, "n_cut", ctx) : kDefaultFockCutoff;
    int n1 = 1, n2 = 0;
    if (doc.contains("initial_fock")) {
        const auto& f = doc["initial_fock"];
        if (!f.is_array() || f.size() != 2 || !f[0].is_number_integer() || !f[1].is_number_integer())
            throw ConfigError("swap program: 'initial_fock' must be [n1, n2]");
        n1 = f[0].get<int>();
        n2 = f[1].get<int>();
    }
    if (!(p.omega12 > 0.0))
        throw ConfigError("swap program: omega12_rad_per_s must be positive");
    const double t_end = doc.contains("t_end_s") ? io::number(doc, "t_end_s", ctx) : swap_time(p.omega12);
    const auto samples = doc.contains("samples") ? integer(doc, "samples", ctx) : 41;
    if (t_end < 0.0 || samples < 1)
        throw ConfigError("swap program: need t_end_s >= 0 and samples >= 1");

    // The target of a SWAP is the mirrored Fock state; its population is the fidelity.
    auto state = OscillatorPairState::fock(static_cast<int>(n_cut), n1, n2);
    const auto ts = sample_times(t_end, samples);
    std::vector<OscillatorPairState> states;
    double t_prev = 0.0;
    for (double t : ts) {
        state = evolve_swap(state, p, t - t_prev);
        t_prev = t;
        states.push_back(state);
    }

    if (format == Format::Csv) {
        io::CsvWriter csv(os, {"t_s", "p_1_0", "p_0_1", "mean_n1", "mean_n2", "trace", "leakage", "swap_fidelity"});
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const auto& s = states[i];
            csv.row({ts[i], s.population(1, 0), s.population(0, 1), s.mean_number(0), s.mean_number(1), s.trace(),
                     s.leakage(), s.population(n2, n1)});
        }
        return;
    }
    json rows = json::array();
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const auto& s = states[i];
        rows.push_back({{"t_s", ts[i]},
                        {"p_1_0", s.population(1, 0)},
                        {"p_0_1", s.population(0, 1)},
                        {"mean_n1", s.mean_number(0)},
                        {"mean_n2", s.mean_number(1)},
                        {"trace", s.trace()},
                        {"leakage", s.leakage()},
                        {"swap_fidelity", s.population(n2, n1)}});
    }
    json j{{"system", "swap"}, {"swap_time_s", swap_time(p.omega12)}, {"samples", rows}};
    j["shots_to_failure_estimate"] = p.gamma_z > 0.0 ? json(swap_shots_to_failure(p.omega12, p.gamma_z)) : json(nullptr);
    os << j.dump(2) << '\n';
}

void run_simulate(const FileArgs& a)
{
    json doc = read_json(a.input);
    apply_overrides(doc, a.overrides);
    io::require_object(doc, "simulate program");
    const auto system = string_field(doc, "system", "simulate program");
    const Format format = a.format.value_or(Format::Csv);
    Output out(a.output);
    if (system == "register")
        simulate_register(doc, format, out.stream());
    else if (system == "spin_master")
        simulate_spin(doc, format, out.stream());
    else if (system == "swap")
        simulate_swap(doc, format, out.stream());
    else
        throw ConfigError("simulate program: unknown system '" + system + "' (register, spin_master, swap)");
}

// ---------------------------------------------------------------------------
// tables

BudgetInputs error_table_inputs()
{
    BudgetInputs in;
    in.env.temperature = 0.1;
    in.env.dc_voltage_stability = 6e-8;
    in.env.voltage_noise_rel_psd = 1e-11 * 1e-11;
    in.env.magnetic_noise_rel_psd = 1e-11 * 1e-11;
    in.env.magnetic.model = SpectrumModel::VacuumMagnetic;
    in.env.electric.model = SpectrumModel::GoldElectrode;
    const double wz = to_rad_per_s(100e6);
    in.freqs = mode_frequencies(3.5682, wz);
    in.link = WireLink::symmetric(100e-6, 150e-6, wz);
    return in;
}

void run_tables(const std::string& outdir)
{
    std::error_code ec;
    fs::create_directories(outdir, ec);
    if (ec)
        throw ConfigError("tables: cannot create '" + outdir + "': " + ec.message());
    const double wz = to_rad_per_s(100e6);

    {
        std::ofstream f(fs::path(outdir) / "spin_spin_grid.csv", std::ios::binary);
        write_j_grid(f, j_grid({50.0, 500.0}, {100e-6, 50e-6, 10e-6}, wz), wz);
    }
    {
        // Only the populated cells of the reference grid.
        const std::vector<std::pair<double, double>> cells{{1e-3, 100e-3}, {1e-3, 10e-3},  {1e-3, 1e-3},
                                                           {10e-6, 100e-3}, {10e-6, 10e-3}, {10e-6, 1e-3},
                                                           {10e-6, 100e-6}, {10e-6, 10e-6}};
        std::vector<WireCell> rows;
        for (const auto& [r0, d] : cells)
            rows.push_back(wire_cell(r0, d, wz));
        std::ofstream f(fs::path(outdir) / "wire_coupling_grid.csv", std::ios::binary);
        write_wire_grid(f, rows);
    }
    {
        const auto in = error_table_inputs();
        std::ofstream f(fs::path(outdir) / "error_budget.csv", std::ios::binary);
        write_budget(f, Format::Csv, in, build_budget(in.env, in.freqs, in.link));
    }
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv)
{
    CLI::App app{"Planar Penning-trap electron qubit toolkit"};
    app.name("penning-lab");
    app.require_subcommand(1);

    auto add_common = [](CLI::App* sub, std::string& output, std::vector<std::string>* overrides) {
        sub->add_option("-o,--output", output, "output file, '-' for stdout")->capture_default_str();
        if (overrides)
            sub->add_option("--set", *overrides, "override an input field, dotted.path=value")->take_all();
    };

    PotentialArgs pot;
    auto* s_pot = app.add_subcommand("potential", "on-axis potential curve of an electrode stack");
    s_pot->add_option("input", pot.input, "stack JSON, '-' for stdin")->required();
    s_pot->add_option("--z-min", pot.z_min, "lowest height in m (default 0.05 R_max)");
    s_pot->add_option("--z-max", pot.z_max, "highest height in m (default 3 R_max)");
    s_pot->add_option("--points", pot.points, "number of samples")->capture_default_str();
    s_pot->add_option("--format", pot.format, "csv or json")->transform(CLI::CheckedTransformer(kFormats));
    add_common(s_pot, pot.output, &pot.overrides);

    CompensateArgs comp;
    auto* s_comp = app.add_subcommand("compensate", "tune one electrode to null an anharmonic term");
    s_comp->add_option("input", comp.input, "stack JSON, '-' for stdin")->required();
    s_comp->add_option("--knob", comp.knob, "index of the tuned electrode (default: outermost)");
    s_comp->add_option("--order", comp.order, "Taylor order to null, 3 or 4")->capture_default_str();
    s_comp->add_option("--knob-min", comp.knob_min, "lower end of the voltage search, V")->capture_default_str();
    s_comp->add_option("--knob-max", comp.knob_max, "upper end of the voltage search, V")->capture_default_str();
    s_comp->add_option("--family", comp.family, "sweep the scaled stack: R0_MIN R0_MAX COUNT")->expected(3);
    s_comp->add_flag("--curve", comp.curve, "emit the potential before and after tuning instead of the summary");
    s_comp->add_option("--points", comp.points, "samples on the --curve grid")->capture_default_str();
    s_comp->add_option("--format", comp.format, "csv or json")->transform(CLI::CheckedTransformer(kFormats));
    add_common(s_comp, comp.output, &comp.overrides);

    ModesArgs modes;
    auto* s_modes = app.add_subcommand("modes", "eigenfrequencies of an ideal Penning trap");
    s_modes->add_option("--B0", modes.B0, "magnetic field, T")->required();
    s_modes->add_option("--fz", modes.fz, "axial frequency, Hz")->required();
    s_modes->add_option("--b2", modes.b2, "magnetic bottle strength, T/m^2");
    s_modes->add_option("--format", modes.format, "csv or json")->transform(CLI::CheckedTransformer(kFormats));
    add_common(s_modes, modes.output, nullptr);

    FileArgs couple, budget, sim;
    std::vector<std::pair<CLI::App*, FileArgs*>> file_cmds{
        {app.add_subcommand("couple", "spin-spin coupling matrix and wire link figures"), &couple},
        {app.add_subcommand("budget", "decoherence budget for a noise environment"), &budget},
        {app.add_subcommand("simulate", "run a register, spin master equation or SWAP program"), &sim},
    };
    for (auto& [sub, args] : file_cmds) {
        sub->add_option("input", args->input, "input JSON, '-' for stdin")->required();
        sub->add_option("--format", args->format, "csv or json")->transform(CLI::CheckedTransformer(kFormats));
        add_common(sub, args->output, &args->overrides);
    }

    std::string outdir = ".";
    auto* s_tables = app.add_subcommand("tables", "regenerate the coupling and error tables as CSV");
    s_tables->add_option("--outdir", outdir, "directory for the three CSV files")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*s_pot)
            run_potential(pot);
        else if (*s_comp)
            run_compensate(comp);
        else if (*s_modes)
            run_modes(modes);
        else if (app.got_subcommand("couple"))
            run_couple(couple);
        else if (app.got_subcommand("budget"))
            run_budget(budget);
        else if (app.got_subcommand("simulate"))
            run_simulate(sim);
        else if (*s_tables)
            run_tables(outdir);
    } catch (const ConfigError& e) {
        std::cerr << "penning-lab: configuration error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidInput& e) {
        std::cerr << "penning-lab: invalid input: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "penning-lab: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "penning-lab: internal error: " << e.what() << '\n';
        return 3;
    }
}
