// Simulate the 20-beverage set, train a forest on the low band and report accuracy.
#include <iostream>

#include "bevsense/bevsense.hpp"

int main() {
    using namespace bevsense;
    const Dataset d = generate_kind_dataset(default_kind_specs(), 10, default_grid(), 42);

    const ImportanceProfile amp = importance_profile(build_feature_matrix(d, {FeatureKind::Amplitude}));
    std::cout << "amplitude importance peaks at " << amp.peak_frequency << " Hz\n";

    const FeatureMatrix fm = reduce_to_band(build_feature_matrix(d, dataset_variant('A')));
    const TrainTestSplit split = stratified_split(fm, 0.3, 0);
    ForestHyper h;
    h.seed = 1;
    const TrainedModel model = train_forest(split.train, h);
    const EvalReport r = evaluate(model, split.test);
    std::cout << fm.cols() << " reduced features, test accuracy " << r.accuracy << '\n';
}
