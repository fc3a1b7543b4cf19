#pragma once

// Classification experiment grid: {RF: A,B,C,D} x {full, reduced} and
// {DNN: C,D} x {full, reduced}, all cells sharing one stratified split.

#include <string>
#include <vector>

#include "bevsense/classify.hpp"
#include "bevsense/dataset.hpp"
#include "bevsense/features.hpp"

namespace bevsense {

struct ExperimentConfig {
    double test_fraction = 0.3;
    std::uint64_t split_seed = 0;
    ForestHyper forest;
    MlpHyper mlp;
    double band_lo = kReducedBandLo;
    double band_hi = kReducedBandHi;
    std::size_t band_points = kReducedPoints;
};

struct ExperimentCell {
    std::string classifier;  // "RF" or "DNN"
    char variant;            // 'A'..'D'
    bool reduced;
    EvalReport report;
};

struct ExperimentResult {
    std::vector<ExperimentCell> cells;
    SplitIndices split;
    std::vector<double> reduced_frequencies;

    const ExperimentCell& cell(const std::string& classifier, char variant, bool reduced) const {
        for (const auto& c : cells)
            if (c.classifier == classifier && c.variant == variant && c.reduced == reduced) return c;
        throw InvalidArgument("no experiment cell " + classifier + "/" + variant + (reduced ? "/reduced" : "/full"));
    }
};

/// Features for one cell: dataset variant, optionally restricted to the reduced band.
inline FeatureMatrix cell_features(const Dataset& d, char variant, bool reduced, const ExperimentConfig& cfg) {
    FeatureMatrix fm = build_feature_matrix(d, dataset_variant(variant));
    if (reduced) fm = reduce_to_band(fm, cfg.band_lo, cfg.band_hi, cfg.band_points);
    return fm;
}

inline ExperimentCell run_cell(const Dataset& d, const std::string& classifier, char variant, bool reduced,
                               const ExperimentConfig& cfg, const SplitIndices& split) {
    const FeatureMatrix fm = cell_features(d, variant, reduced, cfg);
    const FeatureMatrix train = select_rows(fm, split.train);
    const FeatureMatrix test = select_rows(fm, split.test);
    const TrainedModel m = classifier == "RF" ? train_forest(train, cfg.forest) : train_mlp(train, cfg.mlp);
    return {classifier, variant, reduced, evaluate(m, test)};
}

inline ExperimentResult run_kind_experiment(const Dataset& d, const ExperimentConfig& cfg = {}) {
    ExperimentResult r;
    const FeatureMatrix probe = build_feature_matrix(d, {FeatureKind::Amplitude});
    r.split = stratified_split_indices(probe.labels, static_cast<int>(probe.classes.size()), cfg.test_fraction,
                                       cfg.split_seed);
    r.reduced_frequencies = select_band_frequencies(probe.frequencies(), cfg.band_lo, cfg.band_hi, cfg.band_points);
    for (bool reduced : {false, true}) {
        for (char v : {'A', 'B', 'C', 'D'}) r.cells.push_back(run_cell(d, "RF", v, reduced, cfg, r.split));
        for (char v : {'C', 'D'}) r.cells.push_back(run_cell(d, "DNN", v, reduced, cfg, r.split));
    }
    return r;
}

}  // namespace bevsense
