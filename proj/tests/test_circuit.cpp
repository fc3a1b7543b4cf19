#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "bevsense/circuit.hpp"
#include "bevsense/synthetic.hpp"

using namespace bevsense;

TEST(Element, Examples) {
    auto z = element_impedance(Resistor{100}, 10000);
    EXPECT_EQ(z.real, 100.0);
    EXPECT_EQ(z.imag, 0.0);

    z = element_impedance(Capacitor{1e-6}, 10000);
    EXPECT_EQ(z.real, 0.0);
    EXPECT_NEAR(z.imag, -100.0, 1e-12);

    z = element_impedance(ConstantPhase{1e-6, 1.0}, 10000);
    EXPECT_NEAR(z.real, 0.0, 1e-12);
    EXPECT_NEAR(z.imag, -100.0, 1e-12);

    EXPECT_THROW(element_impedance(Resistor{100}, 0), InvalidArgument);
    EXPECT_THROW(element_impedance(Resistor{100}, -1), InvalidArgument);
}

TEST(Element, ValidationRejectsBadParameters) {
    EXPECT_THROW(CircuitModel::resistor(0), InvalidArgument);
    EXPECT_THROW(CircuitModel::capacitor(-1e-6), InvalidArgument);
    EXPECT_THROW(CircuitModel::cpe(1e-6, 1.2), InvalidArgument);
    EXPECT_THROW(CircuitModel::cpe(0, 0.5), InvalidArgument);
    EXPECT_THROW(CircuitModel::series({CircuitModel::resistor(1)}), InvalidArgument);
}

TEST(Element, PhaseProperty) {
    Rng rng(2);
    for (int i = 0; i < 500; ++i) {
        const double w = std::pow(10.0, rng.uniform() * 8 - 2);
        const double alpha = rng.uniform();
        const auto r = to_polar(element_impedance(Resistor{1 + rng.uniform() * 1e4}, w));
        const auto c = to_polar(element_impedance(Capacitor{1e-9 + rng.uniform() * 1e-5}, w));
        const auto q = to_polar(element_impedance(ConstantPhase{1e-9 + rng.uniform() * 1e-5, alpha}, w));
        EXPECT_EQ(r.phase, 0.0);
        EXPECT_NEAR(c.phase, -std::numbers::pi / 2, 1e-12);
        EXPECT_NEAR(q.phase, -alpha * std::numbers::pi / 2, 1e-12);
        EXPECT_LE(q.phase, 0.0);
        EXPECT_GE(q.phase, -std::numbers::pi / 2 - 1e-15);
    }
}

TEST(Circuit, Examples) {
    const auto par = CircuitModel::parallel({CircuitModel::resistor(100), CircuitModel::resistor(100)});
    for (double w : {1e-3, 1.0, 1e6}) {
        const auto z = circuit_impedance(par, w);
        EXPECT_NEAR(z.real, 50.0, 1e-12);
        EXPECT_NEAR(z.imag, 0.0, 1e-12);
    }

    const auto rc = CircuitModel::series({CircuitModel::resistor(100), CircuitModel::capacitor(1e-6)});
    const auto z = circuit_impedance(rc, 10000);
    EXPECT_NEAR(z.real, 100.0, 1e-12);
    EXPECT_NEAR(z.imag, -100.0, 1e-12);
    const auto p = to_polar(z);
    EXPECT_NEAR(p.amplitude, 141.4213562373095, 1e-9);
    EXPECT_NEAR(p.phase, -std::numbers::pi / 4, 1e-12);

    const auto randles = CircuitModel::series(
        {CircuitModel::resistor(50),
         CircuitModel::parallel({CircuitModel::resistor(100), CircuitModel::capacitor(1e-6)})});
    const auto dc = circuit_impedance(randles, 1e-3);
    EXPECT_NEAR(dc.real, 150.0, 1e-3);
    EXPECT_NEAR(dc.imag, 0.0, 1e-3);
}

TEST(Circuit, SeriesIsSumProperty) {
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        const auto a = randles_cpe(10 + rng.uniform() * 1000, 100 + rng.uniform() * 1e4, 1e-8 + rng.uniform() * 1e-5,
                                   0.5 + 0.5 * rng.uniform());
        const auto b = CircuitModel::parallel(
            {CircuitModel::capacitor(1e-9 + rng.uniform() * 1e-6), CircuitModel::resistor(1 + rng.uniform() * 1e3)});
        const double w = std::pow(10.0, rng.uniform() * 7);
        const auto s = circuit_impedance(CircuitModel::series({a, b}), w).as_complex();
        const auto sum = circuit_impedance(a, w).as_complex() + circuit_impedance(b, w).as_complex();
        EXPECT_LE(std::abs(s - sum), 1e-12 * std::abs(sum));
    }
}

TEST(Circuit, SeriesRcAmplitudeMonotone) {
    const auto rc = CircuitModel::series({CircuitModel::resistor(100), CircuitModel::capacitor(1e-6)});
    const auto grid = default_grid();
    double prev = INFINITY;
    for (double f : grid.points()) {
        const double a = to_polar(circuit_impedance(rc, 2 * std::numbers::pi * f)).amplitude;
        EXPECT_LE(a, prev);
        prev = a;
    }
}

TEST(Circuit, ParameterFlatteningRoundTrip) {
    const auto c = randles_cpe(100, 1000, 1e-6, 0.8);
    const auto info = c.parameter_info();
    ASSERT_EQ(info.size(), 4u);
    EXPECT_EQ(info[0].name, "Rs");
    EXPECT_EQ(info[1].name, "Rct");
    EXPECT_EQ(info[2].name, "Qdl.Q");
    EXPECT_EQ(info[3].name, "Qdl.alpha");
    EXPECT_EQ(c.parameters(), (std::vector<double>{100, 1000, 1e-6, 0.8}));
    EXPECT_EQ(c.with_parameters(c.parameters()), c);
    EXPECT_THROW(c.with_parameters(std::vector<double>{1, 2}), InvalidArgument);

    const auto unnamed = CircuitModel::series({CircuitModel::resistor(1), CircuitModel::resistor(2),
                                               CircuitModel::capacitor(1e-6), CircuitModel::cpe(1e-6, 0.9)});
    const auto ui = unnamed.parameter_info();
    EXPECT_EQ(ui[0].name, "R1");
    EXPECT_EQ(ui[1].name, "R2");
    EXPECT_EQ(ui[2].name, "C1");
    EXPECT_EQ(ui[3].name, "CPE1.Q");
}

TEST(SimulateSweep, NoiselessValueAtSnappedFrequency) {
    const auto rc = CircuitModel::series({CircuitModel::resistor(100), CircuitModel::capacitor(1e-6)});
    const auto grid = default_grid();
    const auto s = simulate_sweep(rc, grid, 0.0, 1);
    const std::size_t i = grid.nearest_index(1591.55);
    EXPECT_NEAR(s.values()[i].real, 100.0, 2.0);
    EXPECT_NEAR(s.values()[i].imag, -100.0, 2.0);
}

TEST(SimulateSweep, SeededDeterminism) {
    const auto c = randles_cpe(100, 1000, 1e-6, 0.8);
    const auto grid = default_grid();
    EXPECT_EQ(simulate_sweep(c, grid, 0.0, 1), simulate_sweep(c, grid, 0.0, 2));
    EXPECT_EQ(simulate_sweep(c, grid, 0.01, 42), simulate_sweep(c, grid, 0.01, 42));
    EXPECT_NE(simulate_sweep(c, grid, 0.01, 42), simulate_sweep(c, grid, 0.01, 43));
    EXPECT_THROW(simulate_sweep(c, grid, -0.1, 1), InvalidArgument);
}

TEST(Generation, DefaultBundleShape) {
    const auto specs = default_kind_specs();
    ASSERT_EQ(specs.size(), 20u);
    const auto d = generate_kind_dataset(specs, 10, default_grid(), 0);
    EXPECT_EQ(d.size(), 200u);
    EXPECT_EQ(d.labels().size(), 20u);
    EXPECT_EQ(d.labels().front(), "0");
    EXPECT_EQ(specs[0].description, "Mineral water");
    EXPECT_EQ(specs[19].description, "Mixed vegetable juice");
}

TEST(Generation, NoJitterNoNoiseEqualsTemplate) {
    const auto grid = default_grid();
    std::vector<ClassSpec> specs = {{"a", randles_cpe(100, 1000, 1e-6, 0.8), 0.0, 0.0, {}},
                                    {"b", randles_cpe(200, 3000, 5e-7, 0.9), 0.0, 0.0, {}}};
    const auto d = generate_kind_dataset(specs, 1, grid, 9);
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d.observations[0].spectrum.values(), circuit_response(specs[0].circuit, grid));
    EXPECT_EQ(d.observations[1].spectrum.values(), circuit_response(specs[1].circuit, grid));
}

TEST(Generation, DeterministicPerSeed) {
    const auto grid = default_grid();
    const auto specs = default_kind_specs();
    EXPECT_EQ(generate_kind_dataset(specs, 3, grid, 5), generate_kind_dataset(specs, 3, grid, 5));
    EXPECT_NE(generate_kind_dataset(specs, 3, grid, 5), generate_kind_dataset(specs, 3, grid, 6));
}

TEST(Generation, Errors) {
    const auto grid = default_grid();
    auto specs = default_kind_specs();
    EXPECT_THROW(generate_kind_dataset({specs[0]}, 1, grid, 0), InvalidArgument);
    EXPECT_THROW(generate_kind_dataset(specs, 0, grid, 0), InvalidArgument);
    specs[1].label = specs[0].label;
    EXPECT_THROW(generate_kind_dataset(specs, 1, grid, 0), InvalidArgument);
}

TEST(Freshness, DefaultShape) {
    const auto f = default_freshness_specs().front();
    const auto d = generate_freshness_dataset(f.base, f.drift, default_freshness_hours(), 10, default_grid(), 0);
    EXPECT_EQ(d.size(), 30u);
    EXPECT_EQ(d.labels(), (std::vector<std::string>{"0", "24", "48"}));
}

TEST(Freshness, LinearDriftScalesTemplate) {
    const auto c = randles_cpe(100, 1000, 1e-6, 0.8);
    const auto drifted = apply_drift(c, DriftModel{{{"Rs", -0.005}}}, 48);
    EXPECT_DOUBLE_EQ(drifted.parameters()[0], 100 * (1 + (-0.005 * 48)));
    EXPECT_NEAR(drifted.parameters()[0], 76.0, 1e-12);
    EXPECT_EQ(drifted.parameters()[1], 1000.0);

    const ClassSpec base{"milk", c, 0.0, 0.0, {}};
    const auto d = generate_freshness_dataset(base, DriftModel{{{"Rs", -0.005}}}, {0, 48}, 1, default_grid(), 1);
    EXPECT_EQ(d.observations[1].spectrum.values(), circuit_response(drifted, default_grid()));
}

TEST(Freshness, ZeroDriftGivesIdenticalDistributions) {
    const auto c = randles_cpe(100, 1000, 1e-6, 0.8);
    const ClassSpec base{"milk", c, 0.0, 0.0, {}};
    const auto d = generate_freshness_dataset(base, DriftModel{}, {0, 24, 48}, 2, default_grid(), 3);
    for (const auto& o : d.observations) EXPECT_EQ(o.spectrum.values(), d.observations[0].spectrum.values());
}

TEST(Freshness, Errors) {
    const ClassSpec base{"milk", randles_cpe(100, 1000, 1e-6, 0.8), 0.0, 0.0, {}};
    const auto grid = default_grid();
    EXPECT_THROW(generate_freshness_dataset(base, {}, {}, 1, grid, 0), InvalidArgument);
    EXPECT_THROW(generate_freshness_dataset(base, {}, {0, 0}, 1, grid, 0), InvalidArgument);
    EXPECT_THROW(generate_freshness_dataset(base, {}, {-1}, 1, grid, 0), InvalidArgument);
    EXPECT_THROW(generate_freshness_dataset(base, DriftModel{{{"Rs", -0.05}}}, {0, 48}, 1, grid, 0), InvalidArgument);
    EXPECT_THROW(generate_freshness_dataset(base, DriftModel{{{"nope", 0.01}}}, {0}, 1, grid, 0), InvalidArgument);
}
