#include "btlab/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace btlab {

Grid make_uniform_grid(int k) {
    if (k < 2) throw InvalidParameterError("grid needs at least 2 points per axis");
    auto pts = std::make_shared<std::vector<PricePair>>();
    pts->reserve(static_cast<std::size_t>(k) * static_cast<std::size_t>(k));
    const double denom = static_cast<double>(k - 1);
    for (int i = 0; i < k; ++i) {
        const double p = static_cast<double>(i) / denom;
        for (int j = 0; j < k; ++j) {
            pts->push_back(PricePair{p, static_cast<double>(j) / denom});
        }
    }
    return Grid(k, std::move(pts));
}

namespace {

int ceil_log2(std::int64_t t) {
    int e = 0;
    std::int64_t v = 1;
    while (v < t) {
        v *= 2;
        ++e;
    }
    return e;
}

}  // namespace

AmGrid make_am_grid(int k, std::int64_t horizon) {
    if (k < 2) throw InvalidParameterError("am grid needs base resolution >= 2");
    if (horizon < 2) throw InvalidParameterError("am grid needs horizon >= 2");
    const int emax = ceil_log2(horizon);
    const double denom = static_cast<double>(k - 1);

    std::vector<PricePair> raw;
    raw.reserve(static_cast<std::size_t>(2 * k * (emax + 1)));
    for (int j = 0; j < k; ++j) {
        const double anchor = static_cast<double>(j) / denom;
        for (int e = 0; e <= emax; ++e) {
            const double w = std::ldexp(1.0, -e);
            if (anchor - w >= 0.0) raw.push_back(PricePair{anchor - w, anchor});
            if (anchor + w <= 1.0) raw.push_back(PricePair{anchor, anchor + w});
        }
    }
    std::sort(raw.begin(), raw.end());
    raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
    if (raw.empty()) throw InvalidParameterError("am grid is empty");
    return AmGrid(k, horizon, emax, std::make_shared<std::vector<PricePair>>(std::move(raw)));
}

GridDistribution::GridDistribution(SharedPairs pairs, std::vector<double> weights)
    : pairs_(std::move(pairs)), weights_(std::move(weights)) {
    if (!pairs_ || pairs_->size() != weights_.size()) {
        throw InvalidParameterError("weight vector does not match grid size");
    }
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0)) throw InvalidParameterError("negative weight in grid distribution");
        total += w;
    }
    if (std::fabs(total - 1.0) > 1e-12) {
        throw InvalidParameterError("grid distribution weights must sum to 1");
    }
}

GridDistribution GridDistribution::point_mass(SharedPairs pairs, std::size_t index) {
    std::vector<double> w(pairs->size(), 0.0);
    w.at(index) = 1.0;
    return GridDistribution(std::move(pairs), std::move(w));
}

GridDistribution GridDistribution::uniform(SharedPairs pairs) {
    std::vector<double> w(pairs->size(), 1.0 / static_cast<double>(pairs->size()));
    return GridDistribution(std::move(pairs), std::move(w));
}

bool GridDistribution::same_grid(const GridDistribution& other) const {
    if (pairs_ == other.pairs_) return true;
    return *pairs_ == *other.pairs_;
}

GridDistribution mix(const GridDistribution& d1, const GridDistribution& d2, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw InvalidParameterError("mixing coefficient must lie in [0, 1]");
    }
    if (!d1.same_grid(d2)) throw IncompatibleGridError("cannot mix distributions over different grids");
    std::vector<double> w(d1.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = (1.0 - alpha) * d1.weight(i) + alpha * d2.weight(i);
    }
    return GridDistribution(d1.shared_pairs(), std::move(w));
}

}  // namespace btlab
