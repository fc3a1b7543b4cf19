#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "bevsense/spectrum.hpp"

namespace bevsense {

struct Observation {
    std::string label;
    std::uint64_t sample_id = 0;
    Spectrum spectrum;

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// Labeled collection of spectra, in insertion order.
struct Dataset {
    std::vector<Observation> observations;
    double stimulus_amplitude_mv = kDefaultStimulusMv;

    std::size_t size() const noexcept { return observations.size(); }
    bool empty() const noexcept { return observations.empty(); }

    /// Distinct labels in order of first appearance.
    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        for (const auto& o : observations)
            if (std::find(out.begin(), out.end(), o.label) == out.end()) out.push_back(o.label);
        return out;
    }

    /// Grid shared by every observation; throws if they disagree.
    const FrequencyGrid& grid() const {
        if (observations.empty()) throw InvalidArgument("dataset is empty");
        const auto& g = observations.front().spectrum.grid();
        for (std::size_t i = 1; i < observations.size(); ++i)
            if (!(observations[i].spectrum.grid() == g))
                throw InvalidArgument("observation " + std::to_string(i) + " uses a different frequency grid");
        return g;
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace bevsense
