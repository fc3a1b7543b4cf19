#pragma once

// Equivalent-circuit impedance: R, C and constant-phase elements composed in
// series/parallel, plus a seeded sweep simulator with multiplicative noise.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bevsense/error.hpp"
#include "bevsense/rng.hpp"
#include "bevsense/spectrum.hpp"

namespace bevsense {

struct Resistor {
    double resistance;  // ohms
};

struct Capacitor {
    double capacitance;  // farads
};

/// Z = 1 / (Q (j omega)^alpha), principal branch.
struct ConstantPhase {
    double q;      // S * s^alpha
    double alpha;  // [0, 1]
};

using Element = std::variant<Resistor, Capacitor, ConstantPhase>;

inline void validate_element(const Element& e) {
    std::visit(
        [](const auto& el) {
            using T = std::decay_t<decltype(el)>;
            if constexpr (std::is_same_v<T, Resistor>) {
                if (!(el.resistance > 0.0) || !std::isfinite(el.resistance))
                    throw InvalidArgument("resistor requires R > 0");
            } else if constexpr (std::is_same_v<T, Capacitor>) {
                if (!(el.capacitance > 0.0) || !std::isfinite(el.capacitance))
                    throw InvalidArgument("capacitor requires C > 0");
            } else {
                if (!(el.q > 0.0) || !std::isfinite(el.q)) throw InvalidArgument("constant phase element requires Q > 0");
                if (!(el.alpha >= 0.0 && el.alpha <= 1.0))
                    throw InvalidArgument("constant phase element requires 0 <= alpha <= 1");
            }
        },
        e);
}

inline ComplexImpedance element_impedance(const Element& e, double omega) {
    if (!(omega > 0.0)) throw InvalidArgument("angular frequency must be positive");
    return std::visit(
        [omega](const auto& el) -> ComplexImpedance {
            using T = std::decay_t<decltype(el)>;
            if constexpr (std::is_same_v<T, Resistor>) {
                return {el.resistance, 0.0};
            } else if constexpr (std::is_same_v<T, Capacitor>) {
                return {0.0, -1.0 / (omega * el.capacitance)};
            } else {
                const double mag = 1.0 / (el.q * std::pow(omega, el.alpha));
                const double angle = el.alpha * std::numbers::pi / 2.0;
                return {mag * std::cos(angle), -mag * std::sin(angle)};
            }
        },
        e);
}

enum class ParameterRole { resistance, capacitance, cpe_q, cpe_alpha };

struct ParameterInfo {
    std::string name;
    ParameterRole role;
};

/// Expression tree of circuit elements. Leaves may carry a name used to address
/// their parameters (drift rates, fit reports); unnamed leaves get R1, C1, CPE1, ...
class CircuitModel {
public:
    enum class Node { leaf, series, parallel };

    /// A single 1-ohm resistor.
    CircuitModel() = default;

    static CircuitModel leaf(Element e, std::string name = {}) {
        validate_element(e);
        CircuitModel m;
        m.node_ = Node::leaf;
        m.element_ = e;
        m.name_ = std::move(name);
        return m;
    }
    static CircuitModel resistor(double r, std::string name = {}) { return leaf(Resistor{r}, std::move(name)); }
    static CircuitModel capacitor(double c, std::string name = {}) { return leaf(Capacitor{c}, std::move(name)); }
    static CircuitModel cpe(double q, double alpha, std::string name = {}) {
        return leaf(ConstantPhase{q, alpha}, std::move(name));
    }

    static CircuitModel series(std::vector<CircuitModel> children) {
        return composite(Node::series, std::move(children));
    }
    static CircuitModel parallel(std::vector<CircuitModel> children) {
        return composite(Node::parallel, std::move(children));
    }

    Node node() const noexcept { return node_; }
    const Element& element() const { return element_; }
    const std::string& name() const noexcept { return name_; }
    const std::vector<CircuitModel>& children() const noexcept { return children_; }

    friend bool operator==(const CircuitModel& a, const CircuitModel& b) {
        if (a.node_ != b.node_ || a.name_ != b.name_) return false;
        if (a.node_ == Node::leaf) return element_equal(a.element_, b.element_);
        return a.children_ == b.children_;
    }

    /// Flattened parameter metadata in depth-first order. A CPE contributes Q then alpha.
    std::vector<ParameterInfo> parameter_info() const {
        std::vector<ParameterInfo> out;
        std::map<char, int> counters;
        collect_info(out, counters);
        return out;
    }

    std::vector<double> parameters() const {
        std::vector<double> out;
        collect_values(out);
        return out;
    }

    /// Copy of this circuit with parameters replaced (same order as parameters()).
    CircuitModel with_parameters(std::span<const double> values) const {
        std::size_t pos = 0;
        CircuitModel out = rebuild(values, pos);
        if (pos != values.size())
            throw InvalidArgument("circuit has " + std::to_string(pos) + " parameters, got " +
                                  std::to_string(values.size()));
        return out;
    }

    std::size_t parameter_count() const {
        if (node_ == Node::leaf) return std::holds_alternative<ConstantPhase>(element_) ? 2 : 1;
        std::size_t n = 0;
        for (const auto& c : children_) n += c.parameter_count();
        return n;
    }

private:
    static CircuitModel composite(Node node, std::vector<CircuitModel> children) {
        if (children.size() < 2) throw InvalidArgument("series/parallel composition needs at least two children");
        CircuitModel m;
        m.node_ = node;
        m.children_ = std::move(children);
        return m;
    }

    static bool element_equal(const Element& a, const Element& b) {
        if (a.index() != b.index()) return false;
        if (auto* r = std::get_if<Resistor>(&a)) return r->resistance == std::get<Resistor>(b).resistance;
        if (auto* c = std::get_if<Capacitor>(&a)) return c->capacitance == std::get<Capacitor>(b).capacitance;
        const auto& p = std::get<ConstantPhase>(a);
        const auto& q = std::get<ConstantPhase>(b);
        return p.q == q.q && p.alpha == q.alpha;
    }

    void collect_info(std::vector<ParameterInfo>& out, std::map<char, int>& counters) const {
        if (node_ != Node::leaf) {
            for (const auto& c : children_) c.collect_info(out, counters);
            return;
        }
        auto auto_name = [&](char tag, const char* prefix) {
            if (!name_.empty()) return name_;
            return std::string(prefix) + std::to_string(++counters[tag]);
        };
        if (std::holds_alternative<Resistor>(element_)) {
            out.push_back({auto_name('R', "R"), ParameterRole::resistance});
        } else if (std::holds_alternative<Capacitor>(element_)) {
            out.push_back({auto_name('C', "C"), ParameterRole::capacitance});
        } else {
            const std::string base = auto_name('Q', "CPE");
            out.push_back({base + ".Q", ParameterRole::cpe_q});
            out.push_back({base + ".alpha", ParameterRole::cpe_alpha});
        }
    }

    void collect_values(std::vector<double>& out) const {
        if (node_ != Node::leaf) {
            for (const auto& c : children_) c.collect_values(out);
            return;
        }
        std::visit(
            [&out](const auto& el) {
                using T = std::decay_t<decltype(el)>;
                if constexpr (std::is_same_v<T, Resistor>) out.push_back(el.resistance);
                else if constexpr (std::is_same_v<T, Capacitor>) out.push_back(el.capacitance);
                else {
                    out.push_back(el.q);
                    out.push_back(el.alpha);
                }
            },
            element_);
    }

    CircuitModel rebuild(std::span<const double> values, std::size_t& pos) const {
        auto take = [&]() {
            if (pos >= values.size()) throw InvalidArgument("too few circuit parameters");
            return values[pos++];
        };
        if (node_ == Node::leaf) {
            Element e = element_;
            if (std::holds_alternative<Resistor>(e)) e = Resistor{take()};
            else if (std::holds_alternative<Capacitor>(e)) e = Capacitor{take()};
            else {
                const double q = take();
                e = ConstantPhase{q, take()};
            }
            return leaf(e, name_);
        }
        std::vector<CircuitModel> kids;
        kids.reserve(children_.size());
        for (const auto& c : children_) kids.push_back(c.rebuild(values, pos));
        return composite(node_, std::move(kids));
    }

    Node node_ = Node::leaf;
    Element element_ = Resistor{1.0};
    std::string name_;
    std::vector<CircuitModel> children_;
};

namespace detail {
inline std::complex<double> circuit_z(const CircuitModel& c, double omega) {
    switch (c.node()) {
        case CircuitModel::Node::leaf: return element_impedance(c.element(), omega).as_complex();
        case CircuitModel::Node::series: {
            std::complex<double> z = 0.0;
            for (const auto& k : c.children()) z += circuit_z(k, omega);
            return z;
        }
        case CircuitModel::Node::parallel: {
            std::complex<double> y = 0.0;
            for (const auto& k : c.children()) y += 1.0 / circuit_z(k, omega);
            if (y == 0.0 || !std::isfinite(y.real()) || !std::isfinite(y.imag()))
                throw NumericalError("parallel combination has zero or non-finite total admittance");
            return 1.0 / y;
        }
    }
    return 0.0;
}
}  // namespace detail

inline ComplexImpedance circuit_impedance(const CircuitModel& c, double omega) {
    if (!(omega > 0.0)) throw InvalidArgument("angular frequency must be positive");
    ComplexImpedance z(detail::circuit_z(c, omega));
    if (!z.finite()) throw NumericalError("circuit impedance is not finite");
    return z;
}

/// Noise-free model values over a grid (frequencies in Hz).
inline std::vector<ComplexImpedance> circuit_response(const CircuitModel& c, const FrequencyGrid& grid) {
    std::vector<ComplexImpedance> out;
    out.reserve(grid.size());
    for (double f : grid.points()) out.push_back(circuit_impedance(c, 2.0 * std::numbers::pi * f));
    return out;
}

/// Real and imaginary parts are scaled independently by (1 + eps), eps ~ N(0, noise_relative).
inline Spectrum simulate_sweep(const CircuitModel& c, const FrequencyGrid& grid, double noise_relative,
                               std::uint64_t seed, SpectrumMeta meta = {}) {
    if (!(noise_relative >= 0.0)) throw InvalidArgument("noise_relative must be >= 0");
    auto values = circuit_response(c, grid);
    if (noise_relative > 0.0) {
        Rng rng(seed);
        for (auto& z : values) {
            const double e_re = rng.normal(0.0, noise_relative);
            const double e_im = rng.normal(0.0, noise_relative);
            z.real *= 1.0 + e_re;
            z.imag *= 1.0 + e_im;
        }
    }
    return Spectrum(grid, std::move(values), std::move(meta));
}

}  // namespace bevsense
