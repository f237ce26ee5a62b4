#include "dfn/select.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dfn {

namespace {

std::vector<int> bin_indices(const Image& img, int bins) {
    float lo = img.pixels[0], hi = img.pixels[0];
    for (float v : img.pixels) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const float range = hi - lo;
    std::vector<int> idx(img.pixels.size(), 0);
    if (range <= 0.0f) return idx;  // constant image: single bin
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        int b = static_cast<int>((img.pixels[i] - lo) / range * static_cast<float>(bins));
        idx[i] = std::min(b, bins - 1);
    }
    return idx;
}

double entropy(const std::vector<double>& counts, double total) {
    double h = 0.0;
    for (double c : counts) {
        if (c > 0.0) {
            const double p = c / total;
            h -= p * std::log(p);
        }
    }
    return h;
}

}  // namespace

double nmi(const Image& a, const Image& b, int bins) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw std::invalid_argument("nmi: images must have equal dims");
    if (bins < 2) throw std::invalid_argument("nmi: bins must be >= 2");

    const std::vector<int> ia = bin_indices(a, bins);
    const std::vector<int> ib = bin_indices(b, bins);

    std::vector<double> joint(static_cast<std::size_t>(bins) * bins, 0.0);
    std::vector<double> ma(bins, 0.0), mb(bins, 0.0);
    for (std::size_t i = 0; i < ia.size(); ++i) {
        joint[static_cast<std::size_t>(ia[i]) * bins + ib[i]] += 1.0;
        ma[ia[i]] += 1.0;
        mb[ib[i]] += 1.0;
    }
    const double total = static_cast<double>(ia.size());
    const double hab = entropy(joint, total);
    if (hab <= 0.0) return 2.0;  // both constant
    return (entropy(ma, total) + entropy(mb, total)) / hab;
}

SelectStrategy parse_select_strategy(const std::string& name) {
    if (name == "top_df") return SelectStrategy::TopDeepFeature;
    if (name == "top_nmi") return SelectStrategy::TopNmi;
    if (name == "random_nmi") return SelectStrategy::RandomNmi;
    throw std::invalid_argument("unknown selection strategy: " + name +
                                " (expected top_df, top_nmi or random_nmi)");
}

std::string select_strategy_name(SelectStrategy s) {
    switch (s) {
        case SelectStrategy::TopDeepFeature: return "top_df";
        case SelectStrategy::TopNmi: return "top_nmi";
        case SelectStrategy::RandomNmi: return "random_nmi";
    }
    return "top_df";
}

SimilarityRanking rank(const Image& target, const AtlasSet& atlases,
                       const FeatureNetParams* params, SelectStrategy strategy, int k) {
    if (atlases.empty()) throw std::invalid_argument("rank: empty atlas set");
    if (k < 1 || k > static_cast<int>(atlases.size()))
        throw std::invalid_argument("rank: k must be in [1, atlas count]");
    if (strategy == SelectStrategy::RandomNmi)
        throw std::invalid_argument("rank: random_nmi is a training sampler, not a ranking");

    SimilarityRanking out;
    out.strategy = strategy;
    out.ascending = strategy == SelectStrategy::TopDeepFeature;

    std::vector<std::pair<int, double>> scored;
    scored.reserve(atlases.size());
    if (strategy == SelectStrategy::TopDeepFeature) {
        if (!params)
            throw std::invalid_argument("rank: top_df requires feature-net parameters");
        const FeatureMap ft = extract(*params, target);
        for (std::size_t i = 0; i < atlases.size(); ++i)
            scored.emplace_back(static_cast<int>(i),
                                deep_distance(ft, extract(*params, atlases[i].image)));
    } else {
        for (std::size_t i = 0; i < atlases.size(); ++i)
            scored.emplace_back(static_cast<int>(i), nmi(target, atlases[i].image));
    }

    const bool asc = out.ascending;
    std::stable_sort(scored.begin(), scored.end(), [asc](const auto& x, const auto& y) {
        if (x.second != y.second) return asc ? x.second < y.second : x.second > y.second;
        return x.first < y.first;
    });
    scored.resize(static_cast<std::size_t>(k));
    out.entries = std::move(scored);
    return out;
}

std::vector<int> sample_training_atlases(const Image& target, const AtlasSet& atlases, int count,
                                         Rng& rng, SelectStrategy strategy,
                                         const FeatureNetParams* params, int nmi_bins) {
    if (atlases.empty()) throw std::invalid_argument("sample_training_atlases: empty atlas set");
    if (count < 1 || count > static_cast<int>(atlases.size()))
        throw std::invalid_argument("sample_training_atlases: count " + std::to_string(count) +
                                    " out of range for " + std::to_string(atlases.size()) +
                                    " atlases");

    if (strategy != SelectStrategy::RandomNmi) {
        SimilarityRanking r = rank(target, atlases, params, strategy, count);
        std::vector<int> idx;
        idx.reserve(r.entries.size());
        for (const auto& e : r.entries) idx.push_back(e.first);
        return idx;
    }

    // Draw without replacement, probability proportional to NMI, weights
    // renormalised after each draw.
    std::vector<double> weight(atlases.size());
    for (std::size_t i = 0; i < atlases.size(); ++i)
        weight[i] = nmi(target, atlases[i].image, nmi_bins);

    std::vector<int> remaining(atlases.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = static_cast<int>(i);

    std::vector<int> picked;
    picked.reserve(static_cast<std::size_t>(count));
    for (int n = 0; n < count; ++n) {
        double total = 0.0;
        for (int i : remaining) total += weight[static_cast<std::size_t>(i)];
        double u = rng.uniform() * total;
        std::size_t slot = remaining.size() - 1;
        for (std::size_t j = 0; j < remaining.size(); ++j) {
            u -= weight[static_cast<std::size_t>(remaining[j])];
            if (u < 0.0) {
                slot = j;
                break;
            }
        }
        picked.push_back(remaining[slot]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(slot));
    }
    return picked;
}

}  // namespace dfn
