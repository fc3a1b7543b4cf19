#pragma once

// Synthetic beverage datasets: per-class circuit templates with parameter
// jitter and measurement noise, and linear freshness drift over hours.
// All shipped parameters are hand-set stand-ins, not measurements.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bevsense/circuit.hpp"
#include "bevsense/dataset.hpp"
#include "bevsense/rng.hpp"

namespace bevsense {

struct ClassSpec {
    std::string label;
    CircuitModel circuit;
    double param_jitter = 0.0;    // relative stddev applied to every parameter
    double noise_relative = 0.0;  // stddev of multiplicative measurement noise
    std::string description;      // free text, e.g. beverage name

    friend bool operator==(const ClassSpec&, const ClassSpec&) = default;
};

/// Relative change per hour, keyed by parameter name (see CircuitModel::parameter_info).
struct DriftModel {
    std::map<std::string, double> rate_per_hour;

    friend bool operator==(const DriftModel&, const DriftModel&) = default;
};

namespace detail {

inline bool parameters_valid(const std::vector<ParameterInfo>& info, const std::vector<double>& p) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!std::isfinite(p[i])) return false;
        if (info[i].role == ParameterRole::cpe_alpha) {
            if (p[i] < 0.0 || p[i] > 1.0) return false;
        } else if (!(p[i] > 0.0)) {
            return false;
        }
    }
    return true;
}

inline CircuitModel jitter_circuit(const CircuitModel& c, double jitter, Rng& rng) {
    if (jitter == 0.0) return c;
    const auto info = c.parameter_info();
    const auto base = c.parameters();
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<double> p(base.size());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = base[i] * (1.0 + jitter * rng.normal());
        if (parameters_valid(info, p)) return c.with_parameters(p);
    }
    throw InvalidArgument("parameter jitter too large: could not draw valid parameters");
}

inline void check_spec(const ClassSpec& s) {
    if (!(s.param_jitter >= 0.0)) throw InvalidArgument("class '" + s.label + "': jitter must be >= 0");
    if (!(s.noise_relative >= 0.0)) throw InvalidArgument("class '" + s.label + "': noise must be >= 0");
}

inline std::string format_hours(double h) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, h);
    return std::string(buf, r.ptr);
}

}  // namespace detail

/// One simulated observation for a class; jitter and noise streams derive from `seed`.
inline Spectrum sample_class(const ClassSpec& spec, const FrequencyGrid& grid, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0));
    const CircuitModel c = detail::jitter_circuit(spec.circuit, spec.param_jitter, rng);
    SpectrumMeta meta;
    meta.label = spec.label;
    return simulate_sweep(c, grid, spec.noise_relative, derive_seed(seed, 1), meta);
}

inline Dataset generate_kind_dataset(const std::vector<ClassSpec>& specs, std::size_t samples_per_class,
                                     const FrequencyGrid& grid, std::uint64_t seed) {
    if (specs.size() < 2) throw InvalidArgument("at least two class specs are required");
    if (samples_per_class < 1) throw InvalidArgument("samples_per_class must be >= 1");
    std::set<std::string> seen;
    for (const auto& s : specs) {
        detail::check_spec(s);
        if (!seen.insert(s.label).second) throw InvalidArgument("duplicate class label '" + s.label + "'");
    }
    Dataset d;
    d.observations.reserve(specs.size() * samples_per_class);
    std::uint64_t next_id = 0;
    for (std::size_t c = 0; c < specs.size(); ++c)
        for (std::size_t k = 0; k < samples_per_class; ++k)
            d.observations.push_back(
                {specs[c].label, next_id++, sample_class(specs[c], grid, derive_seed(seed, c, k))});
    return d;
}

/// Template parameters scaled by (1 + rate * hours); throws if any leaves its valid range.
inline CircuitModel apply_drift(const CircuitModel& c, const DriftModel& drift, double hours) {
    const auto info = c.parameter_info();
    auto p = c.parameters();
    for (const auto& [name, rate] : drift.rate_per_hour) {
        auto it = std::find_if(info.begin(), info.end(), [&](const ParameterInfo& pi) { return pi.name == name; });
        if (it == info.end()) throw InvalidArgument("drift names unknown parameter '" + name + "'");
        p[static_cast<std::size_t>(it - info.begin())] *= 1.0 + rate * hours;
    }
    if (!detail::parameters_valid(info, p))
        throw InvalidArgument("drift produces invalid (non-positive) parameters at " + detail::format_hours(hours) +
                              " h");
    return c.with_parameters(p);
}

/// Class label is the hour value, e.g. "24".
inline Dataset generate_freshness_dataset(const ClassSpec& base, const DriftModel& drift,
                                          const std::vector<double>& hours, std::size_t samples_per_hour,
                                          const FrequencyGrid& grid, std::uint64_t seed) {
    if (hours.empty()) throw InvalidArgument("hours must not be empty");
    if (samples_per_hour < 1) throw InvalidArgument("samples_per_hour must be >= 1");
    detail::check_spec(base);
    std::set<double> distinct;
    for (double h : hours) {
        if (!(h >= 0.0) || !std::isfinite(h)) throw InvalidArgument("hours must be non-negative");
        if (!distinct.insert(h).second) throw InvalidArgument("hours must be distinct");
    }
    std::vector<ClassSpec> specs;
    for (double h : hours) {
        ClassSpec s = base;
        s.label = detail::format_hours(h);
        s.circuit = apply_drift(base.circuit, drift, h);
        specs.push_back(std::move(s));
    }
    Dataset d;
    std::uint64_t next_id = 0;
    for (std::size_t c = 0; c < specs.size(); ++c)
        for (std::size_t k = 0; k < samples_per_hour; ++k)
            d.observations.push_back(
                {specs[c].label, next_id++, sample_class(specs[c], grid, derive_seed(seed, c, k))});
    return d;
}

/// Rs + (Rct || CPE) topology used by every shipped template.
inline CircuitModel randles_cpe(double rs, double rct, double q, double alpha) {
    return CircuitModel::series({CircuitModel::resistor(rs, "Rs"),
                                 CircuitModel::parallel({CircuitModel::resistor(rct, "Rct"),
                                                         CircuitModel::cpe(q, alpha, "Qdl")})});
}

inline constexpr double kDefaultJitter = 0.01;
inline constexpr double kDefaultNoise = 0.01;
inline constexpr std::size_t kDefaultSamplesPerClass = 10;

inline const std::array<std::string, 20>& beverage_names() {
    static const std::array<std::string, 20> names = {
        "Mineral water",  "Cola Zero 1",    "Orange Zero",    "Cola Light",   "Cola Mix",
        "Cola Classic 1", "Cola Zero 2",    "Sprite",         "7 UP",         "Fanta",
        "Colar classic 2", "Cola Zero 3",   "Eistee Pfirsch", "Apfel Schorle", "Banana juice",
        "Pineapple juice", "Currants juice", "Orange juice",  "Carrots juice", "Mixed vegetable juice"};
    return names;
}

/// 20 synthetic templates, labels "0".."19" in registry order. Juices (14-19)
/// sit at low solution resistance, carbonated drinks and water above.
inline std::vector<ClassSpec> default_kind_specs() {
    struct Row {
        double rs, rct, q, alpha;
    };
    static constexpr std::array<Row, 20> rows = {{
        {1200, 8406, 2.270e-7, 0.834}, {290, 3070, 5.574e-7, 0.789}, {340, 4906, 4.442e-7, 0.871},
        {248, 2028, 8.113e-7, 0.767},  {212, 1272, 8.124e-7, 0.893}, {181, 2237, 1.264e-6, 0.812},
        {398, 3800, 1.875e-7, 0.848},  {466, 7456, 2.975e-7, 0.775}, {546, 6087, 4.020e-7, 0.878},
        {639, 4251, 2.760e-7, 0.826},  {155, 2124, 1.682e-6, 0.760}, {748, 6442, 9.526e-8, 0.856},
        {875, 10271, 3.312e-7, 0.797}, {1025, 7961, 1.132e-7, 0.900}, {132, 834, 1.183e-6, 0.819},
        {113, 1717, 1.248e-6, 0.885},  {96, 871, 2.238e-6, 0.782},   {82, 1067, 1.990e-6, 0.841},
        {70, 704, 1.851e-6, 0.804},    {60, 443, 3.192e-6, 0.863},
    }};
    std::vector<ClassSpec> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        out.push_back({std::to_string(i), randles_cpe(r.rs, r.rct, r.q, r.alpha), kDefaultJitter, kDefaultNoise,
                       beverage_names()[i]});
    }
    return out;
}

struct FreshnessSpec {
    ClassSpec base;
    DriftModel drift;

    friend bool operator==(const FreshnessSpec&, const FreshnessSpec&) = default;
};

inline const std::vector<double>& default_freshness_hours() {
    static const std::vector<double> hours = {0.0, 24.0, 48.0};
    return hours;
}

/// Two milks and two juices with linear aging drift.
inline std::vector<FreshnessSpec> default_freshness_specs() {
    auto make = [](std::string label, double rs, double rct, double q, double alpha,
                   std::map<std::string, double> rates) {
        FreshnessSpec f;
        f.base = {std::move(label), randles_cpe(rs, rct, q, alpha), kDefaultJitter, kDefaultNoise, {}};
        f.base.description = f.base.label;
        f.drift.rate_per_hour = std::move(rates);
        return f;
    };
    return {
        make("Milk 1", 95, 1150, 1.6e-6, 0.83,
             {{"Rs", -0.002}, {"Rct", -0.010}, {"Qdl.Q", 0.006}, {"Qdl.alpha", -0.002}}),
        make("Milk 2", 105, 1400, 1.3e-6, 0.81,
             {{"Rs", -0.003}, {"Rct", -0.010}, {"Qdl.Q", 0.007}, {"Qdl.alpha", -0.0022}}),
        make("Juice 1", 70, 720, 1.9e-6, 0.80,
             {{"Rs", -0.002}, {"Rct", -0.010}, {"Qdl.Q", 0.008}, {"Qdl.alpha", -0.002}}),
        make("Juice 2", 85, 980, 2.2e-6, 0.84,
             {{"Rs", -0.003}, {"Rct", -0.010}, {"Qdl.Q", 0.005}, {"Qdl.alpha", -0.002}}),
    };
}

}  // namespace bevsense
