#pragma once

// Classifier front end over feature matrices: stratified splits, trained
// models carrying their preprocessing, prediction and evaluation reports.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "bevsense/error.hpp"
#include "bevsense/features.hpp"
#include "bevsense/forest.hpp"
#include "bevsense/mlp.hpp"
#include "bevsense/rng.hpp"

namespace bevsense {

struct SplitIndices {
    std::vector<std::size_t> train;  // ascending row indices
    std::vector<std::size_t> test;
};

/// Per class: shuffle rows, then take round(n * test_fraction) clamped to [1, n - 1] as test.
inline SplitIndices stratified_split_indices(const std::vector<int>& labels, int n_classes, double test_fraction,
                                             std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidArgument("test_fraction must be in (0, 1)");
    SplitIndices out;
    for (int c = 0; c < n_classes; ++c) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == c) rows.push_back(i);
        if (rows.empty()) continue;
        if (rows.size() < 2) throw InvalidArgument("class " + std::to_string(c) + " has fewer than 2 rows");
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
        rng.shuffle(std::span<std::size_t>(rows));
        const auto n = static_cast<double>(rows.size());
        const auto n_test = static_cast<std::size_t>(
            std::clamp(std::llround(n * test_fraction), 1LL, static_cast<long long>(rows.size()) - 1));
        out.test.insert(out.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
        out.train.insert(out.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

struct TrainTestSplit {
    FeatureMatrix train;
    FeatureMatrix test;
    SplitIndices indices;
};

inline TrainTestSplit stratified_split(const FeatureMatrix& fm, double test_fraction, std::uint64_t seed) {
    auto idx = stratified_split_indices(fm.labels, static_cast<int>(fm.classes.size()), test_fraction, seed);
    return {select_rows(fm, idx.train), select_rows(fm, idx.test), std::move(idx)};
}

struct ForestModel {
    Forest forest;
};

struct MlpModel {
    MlpHyper hyper;
    MlpNetwork network;
};

struct TrainedModel {
    std::variant<ForestModel, MlpModel> model;
    std::vector<std::string> classes;
    std::vector<ColumnMeta> columns;  // expected input layout
    StandardizationStats stats;       // empty = raw inputs

    bool is_forest() const { return std::holds_alternative<ForestModel>(model); }
    std::size_t input_size() const { return columns.size(); }
};

inline TrainedModel train_forest(const FeatureMatrix& train, const ForestHyper& h, bool standardize = false) {
    if (train.rows() == 0) throw InvalidArgument("training set is empty");
    TrainedModel m;
    m.classes = train.classes;
    m.columns = train.columns;
    Eigen::MatrixXd x = train.data;
    if (standardize) {
        m.stats = standardize_fit(train.data);
        x = standardize_apply(m.stats, train.data);
    }
    m.model = ForestModel{train_forest(x, train.labels, static_cast<int>(train.classes.size()), h)};
    return m;
}

/// Inputs are always standardized with statistics from `train`.
inline TrainedModel train_mlp(const FeatureMatrix& train, const MlpHyper& h, MlpTrainLog* log = nullptr) {
    if (train.rows() == 0) throw InvalidArgument("training set is empty");
    TrainedModel m;
    m.classes = train.classes;
    m.columns = train.columns;
    m.stats = standardize_fit(train.data);
    const Eigen::MatrixXd x = standardize_apply(m.stats, train.data);
    m.model = MlpModel{h, train_mlp_network(x, train.labels, static_cast<int>(train.classes.size()), h, log)};
    return m;
}

struct Prediction {
    int class_index = -1;
    std::string label;
    std::vector<double> probabilities;
};

/// Probabilities for a batch of raw rows (one row of output per input row).
inline Eigen::MatrixXd predict_proba(const TrainedModel& m, const Eigen::MatrixXd& x) {
    if (static_cast<std::size_t>(x.cols()) != m.input_size())
        throw InvalidArgument("input has " + std::to_string(x.cols()) + " features, model expects " +
                              std::to_string(m.input_size()));
    const Eigen::MatrixXd z = m.stats.empty() ? x : standardize_apply(m.stats, x);
    if (const auto* f = std::get_if<ForestModel>(&m.model)) {
        Eigen::MatrixXd p(z.rows(), static_cast<Eigen::Index>(m.classes.size()));
        for (Eigen::Index i = 0; i < z.rows(); ++i) {
            const auto v = f->forest.vote(z.row(i).transpose());
            for (std::size_t c = 0; c < v.size(); ++c) p(i, static_cast<Eigen::Index>(c)) = v[c];
        }
        return p;
    }
    return mlp_forward(std::get<MlpModel>(m.model).network, z);
}

inline Prediction predict(const TrainedModel& m, const Eigen::VectorXd& row) {
    const Eigen::MatrixXd p = predict_proba(m, row.transpose());
    Prediction out;
    out.probabilities.assign(p.data(), p.data() + p.cols());
    // max_element returns the first maximum: ties go to the earliest class.
    out.class_index = static_cast<int>(std::max_element(out.probabilities.begin(), out.probabilities.end()) -
                                       out.probabilities.begin());
    out.label = m.classes[static_cast<std::size_t>(out.class_index)];
    return out;
}

struct EvalReport {
    std::vector<std::string> classes;
    double accuracy = 0.0;
    std::vector<std::vector<int>> confusion;  // [true][predicted]
    std::vector<double> precision;
    std::vector<double> recall;
    std::size_t total = 0;
};

inline EvalReport evaluate_predictions(const std::vector<std::string>& classes, const std::vector<int>& truth,
                                       const std::vector<int>& predicted) {
    if (truth.empty()) throw InvalidArgument("test set is empty");
    const std::size_t k = classes.size();
    EvalReport r;
    r.classes = classes;
    r.total = truth.size();
    r.confusion.assign(k, std::vector<int>(k, 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++r.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
        if (truth[i] == predicted[i]) ++correct;
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
    for (std::size_t c = 0; c < k; ++c) {
        int row = 0, col = 0;
        for (std::size_t j = 0; j < k; ++j) {
            row += r.confusion[c][j];
            col += r.confusion[j][c];
        }
        r.recall.push_back(row ? static_cast<double>(r.confusion[c][c]) / row : 0.0);
        r.precision.push_back(col ? static_cast<double>(r.confusion[c][c]) / col : 0.0);
    }
    return r;
}

inline EvalReport evaluate(const TrainedModel& m, const FeatureMatrix& test) {
    if (test.rows() == 0) throw InvalidArgument("test set is empty");
    if (!(test.columns == m.columns)) throw InvalidArgument("test features do not match the model's input layout");
    const Eigen::MatrixXd p = predict_proba(m, test.data);
    std::vector<int> truth, pred;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        const auto& name = test.classes[static_cast<std::size_t>(test.labels[static_cast<std::size_t>(i)])];
        const auto it = std::find(m.classes.begin(), m.classes.end(), name);
        if (it == m.classes.end()) throw InvalidArgument("test label '" + name + "' is unknown to the model");
        truth.push_back(static_cast<int>(it - m.classes.begin()));
        Eigen::Index arg;
        p.row(i).maxCoeff(&arg);
        pred.push_back(static_cast<int>(arg));
    }
    return evaluate_predictions(m.classes, truth, pred);
}

}  // namespace bevsense
