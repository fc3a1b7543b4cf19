#include <numeric>

#include <gtest/gtest.h>

#include "bevsense/classify.hpp"
#include "bevsense/experiment.hpp"
#include "bevsense/synthetic.hpp"

using namespace bevsense;

namespace {

std::vector<int> balanced_labels(int classes, int per_class) {
    std::vector<int> y;
    for (int c = 0; c < classes; ++c)
        for (int i = 0; i < per_class; ++i) y.push_back(c);
    return y;
}

}  // namespace

TEST(StratifiedSplit, TwentyByTen) {
    const auto y = balanced_labels(20, 10);
    const auto s = stratified_split_indices(y, 20, 0.3, 0);
    EXPECT_EQ(s.test.size(), 60u);
    EXPECT_EQ(s.train.size(), 140u);
    std::vector<int> per(20, 0);
    for (auto i : s.test) ++per[static_cast<std::size_t>(y[i])];
    for (int n : per) EXPECT_EQ(n, 3);
}

TEST(StratifiedSplit, HalfOfTwoByTwo) {
    const auto s = stratified_split_indices({0, 0, 1, 1}, 2, 0.5, 3);
    EXPECT_EQ(s.train.size(), 2u);
    EXPECT_EQ(s.test.size(), 2u);
}

TEST(StratifiedSplit, PartitionProperty) {
    Rng rng(6);
    for (int t = 0; t < 50; ++t) {
        const int k = 2 + static_cast<int>(rng.below(6));
        std::vector<int> y;
        for (int c = 0; c < k; ++c)
            for (std::size_t i = 0, n = 2 + rng.below(12); i < n; ++i) y.push_back(c);
        rng.shuffle(std::span<int>(y));
        const double frac = 0.05 + 0.9 * rng.uniform();
        const auto seed = rng.next();
        const auto a = stratified_split_indices(y, k, frac, seed);
        const auto b = stratified_split_indices(y, k, frac, seed);
        EXPECT_EQ(a.train, b.train);
        EXPECT_EQ(a.test, b.test);
        std::vector<std::size_t> all = a.train;
        all.insert(all.end(), a.test.begin(), a.test.end());
        std::sort(all.begin(), all.end());
        std::vector<std::size_t> want(y.size());
        std::iota(want.begin(), want.end(), std::size_t{0});
        EXPECT_EQ(all, want);
        for (int c = 0; c < k; ++c) {
            const auto in_test = std::count_if(a.test.begin(), a.test.end(), [&](auto i) { return y[i] == c; });
            const auto in_train = std::count_if(a.train.begin(), a.train.end(), [&](auto i) { return y[i] == c; });
            EXPECT_GE(in_test, 1);
            EXPECT_GE(in_train, 1);
        }
    }
}

TEST(StratifiedSplit, Errors) {
    EXPECT_THROW(stratified_split_indices({0, 0, 1}, 2, 0.3, 0), InvalidArgument);
    EXPECT_THROW(stratified_split_indices({0, 0, 1, 1}, 2, 0.0, 0), InvalidArgument);
    EXPECT_THROW(stratified_split_indices({0, 0, 1, 1}, 2, 1.0, 0), InvalidArgument);
}

TEST(Evaluate, Examples) {
    const std::vector<std::string> cls = {"a", "b", "c", "d"};
    const auto perfect = evaluate_predictions(cls, {0, 1, 2, 3}, {0, 1, 2, 3});
    EXPECT_EQ(perfect.accuracy, 1.0);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(perfect.confusion[i][j], i == j ? 1 : 0);

    const auto zeros = evaluate_predictions(cls, {0, 1, 2, 3, 0, 1, 2, 3}, std::vector<int>(8, 0));
    EXPECT_EQ(zeros.accuracy, 0.25);
    EXPECT_EQ(zeros.recall[0], 1.0);
    EXPECT_EQ(zeros.precision[0], 0.25);
    EXPECT_THROW(evaluate_predictions(cls, {}, {}), InvalidArgument);
}

TEST(Evaluate, AccuracyIsTraceOverTotal) {
    Rng rng(13);
    for (int t = 0; t < 30; ++t) {
        const std::size_t k = 2 + rng.below(5);
        std::vector<std::string> cls;
        for (std::size_t c = 0; c < k; ++c) cls.push_back(std::to_string(c));
        std::vector<int> truth, pred;
        for (std::size_t i = 0, n = 1 + rng.below(60); i < n; ++i) {
            truth.push_back(static_cast<int>(rng.below(k)));
            pred.push_back(static_cast<int>(rng.below(k)));
        }
        const auto r = evaluate_predictions(cls, truth, pred);
        int trace = 0, total = 0;
        for (std::size_t c = 0; c < k; ++c) {
            trace += r.confusion[c][c];
            const int row = std::accumulate(r.confusion[c].begin(), r.confusion[c].end(), 0);
            EXPECT_EQ(row, std::count(truth.begin(), truth.end(), static_cast<int>(c)));
            total += row;
        }
        EXPECT_NEAR(r.accuracy, static_cast<double>(trace) / total, 1e-12);
    }
}

TEST(TrainedModels, ProbabilitiesAndColumnChecks) {
    const auto d = generate_kind_dataset(default_kind_specs(), 4, default_grid(), 1);
    const auto fm = reduce_to_band(build_feature_matrix(d, dataset_variant('C')));
    const auto split = stratified_split(fm, 0.25, 0);
    ForestHyper fh;
    fh.n_trees = 20;
    MlpHyper mh;
    mh.epochs = 20;
    for (const auto& m : {train_forest(split.train, fh), train_forest(split.train, fh, true), train_mlp(split.train, mh)}) {
        const auto p = predict_proba(m, split.test.data);
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
            EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-9);
            EXPECT_GE(p.row(i).minCoeff(), 0.0);
        }
        const auto pr = predict(m, split.test.data.row(0).transpose());
        EXPECT_NE(std::find(m.classes.begin(), m.classes.end(), pr.label), m.classes.end());
        auto wrong = split.test;
        wrong.columns.back().frequency_hz += 1.0;
        EXPECT_THROW(evaluate(m, wrong), InvalidArgument);
    }
}

TEST(Experiment, KindGridMeetsTargets) {
    const auto d = generate_kind_dataset(default_kind_specs(), kDefaultSamplesPerClass, default_grid(), 0);
    const auto r = run_kind_experiment(d);
    ASSERT_EQ(r.cells.size(), 12u);
    EXPECT_GE(r.cell("RF", 'A', false).report.accuracy, 0.98);
    for (char v : {'A', 'B', 'C', 'D'}) EXPECT_GE(r.cell("RF", v, true).report.accuracy, 0.6) << v;
    EXPECT_GE(r.cell("DNN", 'C', false).report.accuracy, 0.95);
    EXPECT_EQ(r.reduced_frequencies.size(), 20u);
    EXPECT_EQ(r.split.test.size(), 60u);
    EXPECT_THROW(r.cell("RF", 'Z', false), InvalidArgument);
}
