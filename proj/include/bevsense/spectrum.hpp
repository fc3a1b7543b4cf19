#pragma once

// Core impedance-spectrum types: frequency grids, complex impedance samples,
// sweeps, and the polar/Cartesian projections used as classifier features.

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bevsense/error.hpp"

namespace bevsense {

enum class GridSpacing { logarithmic, explicit_points };

/// Strictly increasing list of positive frequencies in Hz.
class FrequencyGrid {
public:
    FrequencyGrid() = default;

    /// Takes an arbitrary point list; throws InvalidArgument unless strictly increasing and positive.
    static FrequencyGrid from_points(std::vector<double> points, GridSpacing spacing = GridSpacing::explicit_points) {
        if (points.empty()) throw InvalidArgument("frequency grid must not be empty");
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (!std::isfinite(points[i]) || points[i] <= 0.0)
                throw InvalidArgument("frequency grid point " + std::to_string(i) + " is not a positive finite value");
            if (i > 0 && !(points[i] > points[i - 1]))
                throw InvalidArgument("frequency grid is not strictly increasing at index " + std::to_string(i));
        }
        FrequencyGrid g;
        g.points_ = std::move(points);
        g.spacing_ = spacing;
        return g;
    }

    const std::vector<double>& points() const noexcept { return points_; }
    GridSpacing spacing() const noexcept { return spacing_; }
    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    double operator[](std::size_t i) const { return points_[i]; }
    double front() const { return points_.front(); }
    double back() const { return points_.back(); }

    /// Index of the grid point closest to `f_hz` on a log scale; ties go to the lower index.
    std::size_t nearest_index(double f_hz) const {
        std::size_t best = 0;
        double best_d = std::abs(std::log(points_[0] / f_hz));
        for (std::size_t i = 1; i < points_.size(); ++i) {
            const double d = std::abs(std::log(points_[i] / f_hz));
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    }

    friend bool operator==(const FrequencyGrid& a, const FrequencyGrid& b) { return a.points_ == b.points_; }

private:
    std::vector<double> points_;
    GridSpacing spacing_ = GridSpacing::explicit_points;
};

/// `n` log-spaced points from `f_min` to `f_max` inclusive, endpoints exact.
inline FrequencyGrid make_log_grid(double f_min, double f_max, std::size_t n) {
    if (!(f_min > 0.0) || !std::isfinite(f_max) || !(f_max > f_min))
        throw InvalidArgument("make_log_grid requires 0 < f_min < f_max");
    if (n < 2) throw InvalidArgument("make_log_grid requires at least 2 points");
    std::vector<double> pts(n);
    const double ratio = f_max / f_min;
    const double last = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) pts[i] = f_min * std::pow(ratio, static_cast<double>(i) / last);
    pts.front() = f_min;
    pts.back() = f_max;
    return FrequencyGrid::from_points(std::move(pts), GridSpacing::logarithmic);
}

inline constexpr double kDefaultFMin = 100.0;
inline constexpr double kDefaultFMax = 100000.0;
inline constexpr std::size_t kDefaultPoints = 101;
inline constexpr double kDefaultStimulusMv = 50.0;

/// 101 log-spaced points from 100 Hz to 100 kHz.
inline FrequencyGrid default_grid() { return make_log_grid(kDefaultFMin, kDefaultFMax, kDefaultPoints); }

/// One complex impedance sample in ohms.
struct ComplexImpedance {
    double real = 0.0;
    double imag = 0.0;

    constexpr ComplexImpedance() = default;
    constexpr ComplexImpedance(double re, double im) : real(re), imag(im) {}
    explicit ComplexImpedance(std::complex<double> z) : real(z.real()), imag(z.imag()) {}

    std::complex<double> as_complex() const { return {real, imag}; }
    bool finite() const { return std::isfinite(real) && std::isfinite(imag); }

    friend bool operator==(const ComplexImpedance&, const ComplexImpedance&) = default;
};

struct Polar {
    double amplitude = 0.0;  // ohms
    double phase = 0.0;      // radians, (-pi, pi]
};

inline Polar to_polar(ComplexImpedance z) {
    if (!z.finite()) throw InvalidArgument("to_polar requires a finite impedance");
    return {std::hypot(z.real, z.imag), std::atan2(z.imag, z.real)};
}

inline ComplexImpedance from_polar(double amplitude, double phase) {
    if (!(amplitude >= 0.0)) throw InvalidArgument("from_polar requires a non-negative amplitude");
    if (amplitude == 0.0) return {0.0, 0.0};
    return {amplitude * std::cos(phase), amplitude * std::sin(phase)};
}

struct SpectrumMeta {
    double stimulus_amplitude_mv = kDefaultStimulusMv;
    std::optional<double> temperature_c;
    std::optional<std::string> label;

    friend bool operator==(const SpectrumMeta&, const SpectrumMeta&) = default;
};

/// A full frequency sweep. Construction rejects length mismatches and non-finite values.
class Spectrum {
public:
    Spectrum(FrequencyGrid grid, std::vector<ComplexImpedance> values, SpectrumMeta meta = {})
        : grid_(std::move(grid)), values_(std::move(values)), meta_(std::move(meta)) {
        if (values_.size() != grid_.size())
            throw InvalidArgument("spectrum has " + std::to_string(values_.size()) + " values for a " +
                                  std::to_string(grid_.size()) + "-point grid");
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!values_[i].finite())
                throw InvalidArgument("spectrum value at index " + std::to_string(i) + " is not finite");
    }

    const FrequencyGrid& grid() const noexcept { return grid_; }
    const std::vector<ComplexImpedance>& values() const noexcept { return values_; }
    const SpectrumMeta& meta() const noexcept { return meta_; }
    std::size_t size() const noexcept { return values_.size(); }

    friend bool operator==(const Spectrum&, const Spectrum&) = default;

private:
    FrequencyGrid grid_;
    std::vector<ComplexImpedance> values_;
    SpectrumMeta meta_;
};

enum class FeatureKind { Amplitude, Phase, Real, Imaginary };

inline constexpr std::array<FeatureKind, 4> kAllFeatureKinds = {FeatureKind::Amplitude, FeatureKind::Phase,
                                                                 FeatureKind::Real, FeatureKind::Imaginary};

constexpr std::string_view to_string(FeatureKind k) {
    switch (k) {
        case FeatureKind::Amplitude: return "amplitude";
        case FeatureKind::Phase: return "phase";
        case FeatureKind::Real: return "real";
        case FeatureKind::Imaginary: return "imaginary";
    }
    return "?";
}

inline FeatureKind parse_feature_kind(std::string_view s) {
    for (auto k : kAllFeatureKinds)
        if (to_string(k) == s) return k;
    throw InvalidArgument("unknown feature kind '" + std::string(s) + "'");
}

inline double feature_value(ComplexImpedance z, FeatureKind kind) {
    switch (kind) {
        case FeatureKind::Amplitude: return std::hypot(z.real, z.imag);
        case FeatureKind::Phase: return std::atan2(z.imag, z.real);
        case FeatureKind::Real: return z.real;
        case FeatureKind::Imaginary: return z.imag;
    }
    return 0.0;
}

inline std::vector<double> extract_series(const Spectrum& s, FeatureKind kind) {
    std::vector<double> out;
    out.reserve(s.size());
    for (const auto& z : s.values()) out.push_back(feature_value(z, kind));
    return out;
}

}  // namespace bevsense
