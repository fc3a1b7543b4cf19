#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "bevsense/rng.hpp"
#include "bevsense/spectrum.hpp"

using namespace bevsense;

TEST(LogGrid, EndpointsAreExact) {
    const auto g = make_log_grid(100, 100000, 101);
    ASSERT_EQ(g.size(), 101u);
    EXPECT_EQ(g[0], 100.0);
    EXPECT_EQ(g[100], 100000.0);
    EXPECT_EQ(g.spacing(), GridSpacing::logarithmic);
}

TEST(LogGrid, MidpointMatchesClosedForm) {
    // 10^(2 + 3 * 50 / 100)
    const auto g = make_log_grid(100, 100000, 101);
    EXPECT_NEAR(g[50], 3162.2776601683795, 1e-9);
}

TEST(LogGrid, RejectsBadBounds) {
    EXPECT_THROW(make_log_grid(10, 10, 5), InvalidArgument);
    EXPECT_THROW(make_log_grid(100, 10, 5), InvalidArgument);
    EXPECT_THROW(make_log_grid(0, 10, 5), InvalidArgument);
    EXPECT_THROW(make_log_grid(-1, 10, 5), InvalidArgument);
    EXPECT_THROW(make_log_grid(1, 10, 1), InvalidArgument);
}

TEST(LogGrid, ConstantRatioProperty) {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const double lo = std::pow(10.0, rng.uniform() * 3);
        const double hi = lo * std::pow(10.0, 0.1 + rng.uniform() * 4);
        const std::size_t n = 2 + rng.below(300);
        const auto g = make_log_grid(lo, hi, n);
        const double ratio = g[1] / g[0];
        for (std::size_t i = 0; i + 1 < n; ++i) {
            ASSERT_GT(g[i + 1], g[i]);
            EXPECT_NEAR(g[i + 1] / g[i] / ratio, 1.0, 1e-12);
        }
    }
}

TEST(FrequencyGrid, RejectsNonIncreasing) {
    EXPECT_THROW(FrequencyGrid::from_points({1, 2, 2}), InvalidArgument);
    EXPECT_THROW(FrequencyGrid::from_points({0, 1}), InvalidArgument);
    EXPECT_THROW(FrequencyGrid::from_points({}), InvalidArgument);
}

TEST(Polar, Examples) {
    auto p = to_polar({1, 0});
    EXPECT_DOUBLE_EQ(p.amplitude, 1.0);
    EXPECT_DOUBLE_EQ(p.phase, 0.0);

    p = to_polar({0, -1});
    EXPECT_DOUBLE_EQ(p.amplitude, 1.0);
    EXPECT_DOUBLE_EQ(p.phase, -std::numbers::pi / 2);

    p = to_polar({3, 4});
    EXPECT_DOUBLE_EQ(p.amplitude, 5.0);
    EXPECT_NEAR(p.phase, 0.9272952180016122, 1e-15);
}

TEST(Polar, InverseExamples) {
    auto z = from_polar(1, 0);
    EXPECT_DOUBLE_EQ(z.real, 1.0);
    EXPECT_DOUBLE_EQ(z.imag, 0.0);

    z = from_polar(5, 0.9272952180016122);
    EXPECT_NEAR(z.real, 3.0, 1e-9);
    EXPECT_NEAR(z.imag, 4.0, 1e-9);

    z = from_polar(0, 1.234);
    EXPECT_EQ(z.real, 0.0);
    EXPECT_EQ(z.imag, 0.0);

    EXPECT_THROW(from_polar(-1, 0), InvalidArgument);
    EXPECT_THROW(to_polar({NAN, 0}), InvalidArgument);
}

TEST(Polar, RoundTripProperty) {
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        const double scale = std::pow(10.0, rng.uniform() * 12 - 6);
        const ComplexImpedance z{scale * (2 * rng.uniform() - 1), scale * (2 * rng.uniform() - 1)};
        if (std::hypot(z.real, z.imag) == 0.0) continue;
        const auto p = to_polar(z);
        EXPECT_GT(p.phase, -std::numbers::pi);
        EXPECT_LE(p.phase, std::numbers::pi);
        const auto back = from_polar(p.amplitude, p.phase);
        const double mag = std::hypot(z.real, z.imag);
        EXPECT_LE(std::hypot(back.real - z.real, back.imag - z.imag), 1e-9 * mag);
    }
}

TEST(Spectrum, RejectsLengthMismatchAndNonFinite) {
    const auto g = make_log_grid(1, 10, 3);
    EXPECT_THROW(Spectrum(g, {{1, 0}, {1, 0}}), InvalidArgument);
    EXPECT_THROW(Spectrum(g, {{1, 0}, {NAN, 0}, {1, 0}}), InvalidArgument);
    EXPECT_THROW(Spectrum(g, {{1, 0}, {1, INFINITY}, {1, 0}}), InvalidArgument);
    const Spectrum s(g, {{1, 0}, {1, 0}, {1, 0}});
    EXPECT_EQ(s.meta().stimulus_amplitude_mv, 50.0);
}

TEST(Spectrum, DefaultGrid) {
    const auto g = default_grid();
    EXPECT_EQ(g.size(), 101u);
    EXPECT_EQ(g.front(), 100.0);
    EXPECT_EQ(g.back(), 100000.0);
}

TEST(ExtractSeries, Examples) {
    const auto g = make_log_grid(1, 10, 4);
    const Spectrum flat(g, std::vector<ComplexImpedance>(4, {100, 0}));
    for (double v : extract_series(flat, FeatureKind::Amplitude)) EXPECT_EQ(v, 100.0);
    for (double v : extract_series(flat, FeatureKind::Phase)) EXPECT_EQ(v, 0.0);

    const Spectrum two(make_log_grid(1, 2, 2), {{3, 4}, {0, -1}});
    EXPECT_EQ(extract_series(two, FeatureKind::Imaginary), (std::vector<double>{4, -1}));
    EXPECT_EQ(extract_series(two, FeatureKind::Real), (std::vector<double>{3, 0}));
}

TEST(ExtractSeries, PythagoreanProperty) {
    Rng rng(5);
    const auto g = make_log_grid(1, 1000, 64);
    std::vector<ComplexImpedance> v;
    for (std::size_t i = 0; i < g.size(); ++i) v.emplace_back(rng.normal() * 1e3, rng.normal() * 1e3);
    const Spectrum s(g, v);
    const auto a = extract_series(s, FeatureKind::Amplitude);
    const auto re = extract_series(s, FeatureKind::Real);
    const auto im = extract_series(s, FeatureKind::Imaginary);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i] * a[i] / (re[i] * re[i] + im[i] * im[i]), 1.0, 1e-9);
}

TEST(FeatureKind, NamesRoundTrip) {
    for (auto k : kAllFeatureKinds) EXPECT_EQ(parse_feature_kind(to_string(k)), k);
    EXPECT_THROW(parse_feature_kind("magnitude"), InvalidArgument);
}
