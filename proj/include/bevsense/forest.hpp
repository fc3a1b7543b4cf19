#pragma once

// Random forest of axis-aligned Gini decision trees.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "bevsense/error.hpp"
#include "bevsense/rng.hpp"

namespace bevsense {

struct ForestHyper {
    int n_trees = 100;
    int max_depth = 0;           // 0 = unlimited
    int min_samples_split = 2;
    int features_per_split = 0;  // 0 = ceil(sqrt(d))
    bool bootstrap = true;
    std::uint64_t seed = 0;
    int n_threads = 1;  // 0 = hardware concurrency; results do not depend on it

    int resolved_features(Eigen::Index d) const {
        if (features_per_split > 0) return features_per_split;
        return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
    }
};

/// A node is a leaf when feature < 0. Samples with x[feature] <= threshold go left.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_class = -1;
    std::vector<int> counts;  // training class counts reaching this node
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    const TreeNode& leaf_for(const Eigen::Ref<const Eigen::VectorXd>& x) const {
        const TreeNode* n = &nodes.front();
        while (n->feature >= 0)
            n = &nodes[static_cast<std::size_t>(x[n->feature] <= n->threshold ? n->left : n->right)];
        return *n;
    }

    int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const { return leaf_for(x).leaf_class; }

    int depth() const { return depth_from(0); }

private:
    int depth_from(int i) const {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        if (n.feature < 0) return 0;
        return 1 + std::max(depth_from(n.left), depth_from(n.right));
    }
};

inline double gini(const std::vector<int>& counts, int total) {
    if (total == 0) return 0.0;
    double s = 0.0;
    for (int c : counts) {
        const double p = static_cast<double>(c) / total;
        s += p * p;
    }
    return 1.0 - s;
}

/// Lowest class index with the maximum count.
inline int majority_class(const std::vector<int>& counts) {
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;  // weighted child Gini
};

namespace detail {

inline constexpr double kImpurityTieTol = 1e-12;

class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes, const ForestHyper& h, Rng& rng)
        : x_(x), y_(y), n_classes_(n_classes), h_(h), rng_(rng), mtry_(h.resolved_features(x.cols())) {}

    DecisionTree build(std::vector<std::size_t> samples) {
        grow(std::move(samples), 0);
        return std::move(tree_);
    }

    /// Best split over `features` (ascending), ties to lowest feature then lowest threshold.
    SplitChoice best_split(const std::vector<std::size_t>& samples, const std::vector<int>& features) const {
        SplitChoice best;
        best.impurity = std::numeric_limits<double>::infinity();
        const int n = static_cast<int>(samples.size());
        std::vector<std::pair<double, int>> col(samples.size());
        std::vector<int> left(static_cast<std::size_t>(n_classes_)), right(static_cast<std::size_t>(n_classes_));
        for (int f : features) {
            for (std::size_t i = 0; i < samples.size(); ++i)
                col[i] = {x_(static_cast<Eigen::Index>(samples[i]), f), y_[samples[i]]};
            std::sort(col.begin(), col.end());
            std::fill(left.begin(), left.end(), 0);
            std::fill(right.begin(), right.end(), 0);
            for (const auto& [v, c] : col) ++right[static_cast<std::size_t>(c)];
            for (int i = 0; i + 1 < n; ++i) {
                const auto c = static_cast<std::size_t>(col[static_cast<std::size_t>(i)].second);
                ++left[c];
                --right[c];
                const double lo = col[static_cast<std::size_t>(i)].first;
                const double hi = col[static_cast<std::size_t>(i) + 1].first;
                if (!(lo < hi)) continue;
                const int nl = i + 1, nr = n - nl;
                const double imp = (nl * gini(left, nl) + nr * gini(right, nr)) / n;
                if (imp < best.impurity - kImpurityTieTol) {
                    double thr = std::midpoint(lo, hi);
                    if (!(thr < hi)) thr = lo;
                    best = {f, thr, imp};
                }
            }
        }
        return best;
    }

private:
    int grow(std::vector<std::size_t> samples, int depth) {
        const int index = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        std::vector<int> counts(static_cast<std::size_t>(n_classes_), 0);
        for (auto s : samples) ++counts[static_cast<std::size_t>(y_[s])];
        const int n = static_cast<int>(samples.size());

        auto make_leaf = [&]() {
            auto& node = tree_.nodes[static_cast<std::size_t>(index)];
            node.leaf_class = majority_class(counts);
            node.counts = counts;
            return index;
        };
        const bool pure = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }) <= 1;
        if (pure || n < h_.min_samples_split || (h_.max_depth > 0 && depth >= h_.max_depth)) return make_leaf();

        const SplitChoice split = best_split(samples, sample_features());
        if (split.feature < 0) return make_leaf();

        std::vector<std::size_t> l, r;
        for (auto s : samples)
            (x_(static_cast<Eigen::Index>(s), split.feature) <= split.threshold ? l : r).push_back(s);
        samples.clear();
        samples.shrink_to_fit();

        const int li = grow(std::move(l), depth + 1);
        const int ri = grow(std::move(r), depth + 1);
        auto& node = tree_.nodes[static_cast<std::size_t>(index)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = li;
        node.right = ri;
        node.counts = counts;
        node.leaf_class = majority_class(counts);
        return index;
    }

    std::vector<int> sample_features() {
        const int d = static_cast<int>(x_.cols());
        std::vector<int> all(static_cast<std::size_t>(d));
        std::iota(all.begin(), all.end(), 0);
        const int k = std::min(mtry_, d);
        for (int i = 0; i < k; ++i) {
            const auto j = static_cast<std::size_t>(i) + rng_.below(static_cast<std::size_t>(d - i));
            std::swap(all[static_cast<std::size_t>(i)], all[j]);
        }
        all.resize(static_cast<std::size_t>(k));
        std::sort(all.begin(), all.end());
        return all;
    }

    const Eigen::MatrixXd& x_;
    const std::vector<int>& y_;
    int n_classes_;
    const ForestHyper& h_;
    Rng& rng_;
    int mtry_;
    DecisionTree tree_;
};

}  // namespace detail

struct Forest {
    ForestHyper hyper;
    int n_classes = 0;
    int n_features = 0;
    std::vector<DecisionTree> trees;

    /// Vote fractions per class.
    std::vector<double> vote(const Eigen::Ref<const Eigen::VectorXd>& x) const {
        std::vector<double> p(static_cast<std::size_t>(n_classes), 0.0);
        for (const auto& t : trees) p[static_cast<std::size_t>(t.predict(x))] += 1.0;
        for (auto& v : p) v /= static_cast<double>(trees.size());
        return p;
    }
};

inline DecisionTree train_tree(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes,
                               const ForestHyper& h, std::uint64_t tree_seed) {
    Rng rng(tree_seed);
    const auto n = static_cast<std::size_t>(x.rows());
    std::vector<std::size_t> samples(n);
    if (h.bootstrap) {
        for (auto& s : samples) s = rng.below(n);
    } else {
        std::iota(samples.begin(), samples.end(), std::size_t{0});
    }
    detail::TreeBuilder b(x, y, n_classes, h, rng);
    return b.build(std::move(samples));
}

inline Forest train_forest(const Eigen::MatrixXd& x, const std::vector<int>& y, int n_classes, const ForestHyper& h) {
    if (x.rows() == 0) throw InvalidArgument("training set is empty");
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw InvalidArgument("labels do not match rows");
    if (n_classes < 2) throw InvalidArgument("random forest needs at least two classes");
    if (h.n_trees < 1) throw InvalidArgument("n_trees must be >= 1");
    if (h.min_samples_split < 2) throw InvalidArgument("min_samples_split must be >= 2");
    if (h.features_per_split < 0 || h.features_per_split > x.cols())
        throw InvalidArgument("features_per_split must be in [1, d]");
    for (int c : y)
        if (c < 0 || c >= n_classes) throw InvalidArgument("label out of range");

    Forest f;
    f.hyper = h;
    f.n_classes = n_classes;
    f.n_features = static_cast<int>(x.cols());
    f.trees.resize(static_cast<std::size_t>(h.n_trees));

    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t t = begin; t < f.trees.size(); t += stride)
            f.trees[t] = train_tree(x, y, n_classes, h, derive_seed(h.seed, t));
    };
    std::size_t threads = h.n_threads > 0 ? static_cast<std::size_t>(h.n_threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, f.trees.size());
    if (threads <= 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(work, i, threads);
    }
    return f;
}

}  // namespace bevsense
