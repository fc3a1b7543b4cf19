#pragma once

// Observation x feature matrices, SVD frequency-importance profiles, reduced
// frequency bands and column standardization.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bevsense/dataset.hpp"
#include "bevsense/error.hpp"
#include "bevsense/spectrum.hpp"
#include "bevsense/svd.hpp"

namespace bevsense {

struct ColumnMeta {
    FeatureKind kind;
    double frequency_hz;

    friend bool operator==(const ColumnMeta&, const ColumnMeta&) = default;
};

struct FeatureMatrix {
    Eigen::MatrixXd data;             // rows = observations
    std::vector<ColumnMeta> columns;  // one per data column
    std::vector<int> labels;          // index into classes, one per row
    std::vector<std::string> classes;

    Eigen::Index rows() const { return data.rows(); }
    Eigen::Index cols() const { return data.cols(); }

    /// Distinct kinds in column order.
    std::vector<FeatureKind> kinds() const {
        std::vector<FeatureKind> out;
        for (const auto& c : columns)
            if (std::find(out.begin(), out.end(), c.kind) == out.end()) out.push_back(c.kind);
        return out;
    }

    /// Frequencies of the first kind's columns, ascending.
    std::vector<double> frequencies() const {
        std::vector<double> out;
        if (columns.empty()) return out;
        for (const auto& c : columns)
            if (c.kind == columns.front().kind) out.push_back(c.frequency_hz);
        return out;
    }
};

/// Named kind sets: A = real+imaginary, B = amplitude+phase, C = amplitude, D = phase.
inline std::vector<FeatureKind> dataset_variant(char name) {
    switch (name) {
        case 'A': return {FeatureKind::Real, FeatureKind::Imaginary};
        case 'B': return {FeatureKind::Amplitude, FeatureKind::Phase};
        case 'C': return {FeatureKind::Amplitude};
        case 'D': return {FeatureKind::Phase};
        default: throw InvalidArgument(std::string("unknown dataset variant '") + name + "'");
    }
}

inline FeatureMatrix build_feature_matrix(const Dataset& d, const std::vector<FeatureKind>& kinds) {
    if (d.empty()) throw InvalidArgument("dataset is empty");
    if (kinds.empty()) throw InvalidArgument("at least one feature kind is required");
    if (std::set<FeatureKind>(kinds.begin(), kinds.end()).size() != kinds.size())
        throw InvalidArgument("feature kinds must be distinct");
    const FrequencyGrid& grid = d.grid();  // throws on mixed grids

    FeatureMatrix fm;
    fm.classes = d.labels();
    const auto n = static_cast<Eigen::Index>(grid.size());
    fm.data.resize(static_cast<Eigen::Index>(d.size()), n * static_cast<Eigen::Index>(kinds.size()));
    for (auto k : kinds)
        for (double f : grid.points()) fm.columns.push_back({k, f});
    for (std::size_t r = 0; r < d.size(); ++r) {
        const auto& obs = d.observations[r];
        const auto row = static_cast<Eigen::Index>(r);
        for (std::size_t ki = 0; ki < kinds.size(); ++ki)
            for (Eigen::Index i = 0; i < n; ++i)
                fm.data(row, static_cast<Eigen::Index>(ki) * n + i) =
                    feature_value(obs.spectrum.values()[static_cast<std::size_t>(i)], kinds[ki]);
        const auto it = std::find(fm.classes.begin(), fm.classes.end(), obs.label);
        fm.labels.push_back(static_cast<int>(it - fm.classes.begin()));
    }
    return fm;
}

inline FeatureMatrix select_columns(const FeatureMatrix& fm, const std::vector<Eigen::Index>& cols) {
    FeatureMatrix out;
    out.classes = fm.classes;
    out.labels = fm.labels;
    out.data.resize(fm.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        out.data.col(static_cast<Eigen::Index>(j)) = fm.data.col(cols[j]);
        out.columns.push_back(fm.columns[static_cast<std::size_t>(cols[j])]);
    }
    return out;
}

inline FeatureMatrix select_rows(const FeatureMatrix& fm, const std::vector<std::size_t>& rows) {
    FeatureMatrix out;
    out.classes = fm.classes;
    out.columns = fm.columns;
    out.data.resize(static_cast<Eigen::Index>(rows.size()), fm.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.data.row(static_cast<Eigen::Index>(i)) = fm.data.row(static_cast<Eigen::Index>(rows[i]));
        out.labels.push_back(fm.labels[rows[i]]);
    }
    return out;
}

inline FeatureMatrix restrict_to_kind(const FeatureMatrix& fm, FeatureKind kind) {
    std::vector<Eigen::Index> cols;
    for (std::size_t j = 0; j < fm.columns.size(); ++j)
        if (fm.columns[j].kind == kind) cols.push_back(static_cast<Eigen::Index>(j));
    if (cols.empty()) throw InvalidArgument("feature matrix has no " + std::string(to_string(kind)) + " columns");
    return select_columns(fm, cols);
}

struct ImportanceProfile {
    FeatureKind kind;
    std::vector<double> frequencies;
    std::vector<double> weights;  // |first right singular vector|
    double peak_frequency = 0.0;
};

/// Frequency of the largest weight; exact ties resolve to the lowest frequency.
inline double peak_frequency(const std::vector<double>& frequencies, const std::vector<double>& weights) {
    if (frequencies.empty() || frequencies.size() != weights.size())
        throw InvalidArgument("weights and frequencies must be non-empty and aligned");
    std::size_t best = 0;
    for (std::size_t i = 1; i < weights.size(); ++i) {
        if (weights[i] > weights[best] || (weights[i] == weights[best] && frequencies[i] < frequencies[best]))
            best = i;
    }
    return frequencies[best];
}

inline ImportanceProfile importance_profile(const FeatureMatrix& fm, bool center = true) {
    const auto kinds = fm.kinds();
    if (kinds.size() != 1) throw InvalidArgument("importance profile needs a single-kind feature matrix");
    const Eigen::VectorXd v = first_right_singular_vector(fm.data, center);
    ImportanceProfile p;
    p.kind = kinds.front();
    for (std::size_t j = 0; j < fm.columns.size(); ++j) {
        p.frequencies.push_back(fm.columns[j].frequency_hz);
        p.weights.push_back(std::abs(v[static_cast<Eigen::Index>(j)]));
    }
    p.peak_frequency = peak_frequency(p.frequencies, p.weights);
    return p;
}

inline constexpr double kReducedBandLo = 100.0;
inline constexpr double kReducedBandHi = 1000.0;
inline constexpr std::size_t kReducedPoints = 20;

/// Snap `n` log-spaced targets in [f_lo, f_hi] to the nearest available frequency
/// (log distance, lower on ties); duplicates dropped, ascending order kept.
inline std::vector<double> select_band_frequencies(const std::vector<double>& available, double f_lo, double f_hi,
                                                   std::size_t n) {
    if (available.empty()) throw InvalidArgument("no frequencies to select from");
    if (n < 1) throw InvalidArgument("band size must be >= 1");
    if (!(f_lo > 0.0) || !(f_hi >= f_lo)) throw InvalidArgument("band requires 0 < f_lo <= f_hi");
    const double rel = 1e-9;
    if (f_lo < available.front() * (1.0 - rel) || f_hi > available.back() * (1.0 + rel))
        throw InvalidArgument("band lies outside the frequency grid");
    const FrequencyGrid grid = FrequencyGrid::from_points(available);
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double target =
            n == 1 ? std::sqrt(f_lo * f_hi)
                   : f_lo * std::pow(f_hi / f_lo, static_cast<double>(i) / static_cast<double>(n - 1));
        const double f = grid[grid.nearest_index(target)];
        if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
    }
    std::sort(out.begin(), out.end());
    if (out.empty()) throw InvalidArgument("band selection is empty");
    return out;
}

/// Keep only columns whose frequency is in `frequencies` (every kind).
inline FeatureMatrix restrict_to_frequencies(const FeatureMatrix& fm, const std::vector<double>& frequencies) {
    std::vector<Eigen::Index> cols;
    for (std::size_t j = 0; j < fm.columns.size(); ++j)
        if (std::find(frequencies.begin(), frequencies.end(), fm.columns[j].frequency_hz) != frequencies.end())
            cols.push_back(static_cast<Eigen::Index>(j));
    if (cols.empty()) throw InvalidArgument("frequency selection matches no columns");
    return select_columns(fm, cols);
}

inline FeatureMatrix reduce_to_band(const FeatureMatrix& fm, double f_lo = kReducedBandLo,
                                    double f_hi = kReducedBandHi, std::size_t n = kReducedPoints) {
    return restrict_to_frequencies(fm, select_band_frequencies(fm.frequencies(), f_lo, f_hi, n));
}

inline constexpr double kStddevFloor = 1e-12;

struct StandardizationStats {
    std::vector<double> mean;
    std::vector<double> stddev;  // population convention

    bool empty() const noexcept { return mean.empty(); }
};

inline StandardizationStats standardize_fit(const Eigen::MatrixXd& train) {
    if (train.rows() == 0) throw InvalidArgument("cannot standardize an empty training set");
    StandardizationStats s;
    const double n = static_cast<double>(train.rows());
    for (Eigen::Index j = 0; j < train.cols(); ++j) {
        const double mean = train.col(j).sum() / n;
        const double var = (train.col(j).array() - mean).square().sum() / n;
        s.mean.push_back(mean);
        s.stddev.push_back(std::sqrt(var));
    }
    return s;
}

inline StandardizationStats standardize_fit(const FeatureMatrix& train) { return standardize_fit(train.data); }

/// (x - mean) / stddev per column; columns whose stddev is under the floor map to 0.
inline Eigen::MatrixXd standardize_apply(const StandardizationStats& s, const Eigen::MatrixXd& x) {
    if (static_cast<std::size_t>(x.cols()) != s.mean.size())
        throw InvalidArgument("standardization expects " + std::to_string(s.mean.size()) + " columns, got " +
                              std::to_string(x.cols()));
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const auto js = static_cast<std::size_t>(j);
        if (s.stddev[js] < kStddevFloor) out.col(j).setZero();
        else out.col(j) = (x.col(j).array() - s.mean[js]) / s.stddev[js];
    }
    return out;
}

inline FeatureMatrix standardize_apply(const StandardizationStats& s, const FeatureMatrix& fm) {
    FeatureMatrix out = fm;
    out.data = standardize_apply(s, fm.data);
    return out;
}

}  // namespace bevsense
