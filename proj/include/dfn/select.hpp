#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dfn/image.hpp"
#include "dfn/net.hpp"
#include "dfn/rng.hpp"

namespace dfn {

/// Normalized mutual information (H(A)+H(B)) / H(A,B) from a bins x bins
/// joint histogram; each image is min-max scaled to [0,1] before binning.
/// Lies in [1,2]; 2 means identical-up-to-binning. Degenerate case: if both
/// images are constant the value is defined as 2 (the 0/0 limit of identical
/// inputs); one constant image yields 1 from the formula itself.
double nmi(const Image& a, const Image& b, int bins = 64);

/// Squared Frobenius distance between equal-shape feature maps.
template <class T>
double deep_distance(const FeatureMapT<T>& a, const FeatureMapT<T>& b) {
    if (!a.tensor.same_shape(b.tensor))
        throw std::invalid_argument("deep_distance: feature maps must have equal dims");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.tensor.size(); ++i) {
        const double d = static_cast<double>(a.tensor.data[i]) - b.tensor.data[i];
        acc += d * d;
    }
    return acc;
}

enum class SelectStrategy { TopDeepFeature, TopNmi, RandomNmi };

SelectStrategy parse_select_strategy(const std::string& name);
std::string select_strategy_name(SelectStrategy s);

/// Ranked atlases: ascending deep-feature distance or descending NMI,
/// ties broken by ascending atlas index.
struct SimilarityRanking {
    SelectStrategy strategy;
    bool ascending;  // true for distances, false for NMI
    std::vector<std::pair<int, double>> entries;  // (atlas index, score)
};

/// Rank atlases against the target and keep the best k. TopDeepFeature needs
/// the trained feature net; TopNmi ignores it (params may be null).
SimilarityRanking rank(const Image& target, const AtlasSet& atlases,
                       const FeatureNetParams* params, SelectStrategy strategy, int k);

/// Pick the training atlases for one batch. RandomNmi draws count distinct
/// atlases without replacement, each draw proportional to NMI(target, atlas);
/// the Top* strategies are deterministic and ignore the rng.
std::vector<int> sample_training_atlases(const Image& target, const AtlasSet& atlases, int count,
                                         Rng& rng, SelectStrategy strategy,
                                         const FeatureNetParams* params = nullptr,
                                         int nmi_bins = 64);

}  // namespace dfn
