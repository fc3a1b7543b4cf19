// Recover Randles parameters from one noisy simulated sweep.
#include <iostream>

#include "bevsense/bevsense.hpp"

int main() {
    using namespace bevsense;
    const CircuitModel truth = randles_cpe(120, 900, 2e-6, 0.85);
    const Spectrum s = simulate_sweep(truth, default_grid(), 0.005, 7);

    const FitProblem prob = make_fit_problem(truth, s);
    const FitResult res = fit_circuit(prob, std::vector<double>{60, 2000, 1e-6});

    const auto info = truth.parameter_info();
    for (std::size_t k = 0; k < prob.free.size(); ++k)
        std::cout << info[prob.free[k]].name << " = " << res.params[k] << " (true "
                  << truth.parameters()[prob.free[k]] << ")\n";
    std::cout << "cost " << res.cost << " after " << res.iterations << " iterations\n";
}
