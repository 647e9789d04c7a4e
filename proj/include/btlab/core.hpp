#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "btlab/errors.hpp"

namespace btlab {

// Prices posted to the two sides of a trade: p to the seller, q to the buyer.
struct PricePair {
    double p = 0.0;
    double q = 0.0;

    friend bool operator==(const PricePair& a, const PricePair& b) {
        return a.p == b.p && a.q == b.q;
    }
    friend bool operator<(const PricePair& a, const PricePair& b) {
        return a.p != b.p ? a.p < b.p : a.q < b.q;
    }
};

using SharedPairs = std::shared_ptr<const std::vector<PricePair>>;

// Uniform K x K price grid with coordinates i/(K-1), row-major over (i, j).
class Grid {
public:
    int per_axis() const { return k_; }
    std::size_t size() const { return pairs_->size(); }
    const std::vector<PricePair>& pairs() const { return *pairs_; }
    const SharedPairs& shared_pairs() const { return pairs_; }

    double coordinate(int i) const { return static_cast<double>(i) / static_cast<double>(k_ - 1); }
    std::size_t index_of(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(k_) +
               static_cast<std::size_t>(j);
    }
    const PricePair& at(std::size_t index) const { return (*pairs_)[index]; }
    const PricePair& at(int i, int j) const { return (*pairs_)[index_of(i, j)]; }

private:
    friend Grid make_uniform_grid(int k);
    Grid(int k, SharedPairs pairs) : k_(k), pairs_(std::move(pairs)) {}

    int k_;
    SharedPairs pairs_;
};

Grid make_uniform_grid(int k);

// Additive-multiplicative grid: near-diagonal pairs (q - 2^-i, q) and
// (p, p + 2^-i) anchored at diagonal points of the uniform grid, with
// exponents i in {0, ..., ceil(log2 T)}, kept only inside the unit square.
class AmGrid {
public:
    std::size_t size() const { return pairs_->size(); }
    const std::vector<PricePair>& pairs() const { return *pairs_; }
    const SharedPairs& shared_pairs() const { return pairs_; }
    int base_k() const { return k_; }
    std::int64_t horizon() const { return horizon_; }
    int max_exponent() const { return max_exponent_; }

private:
    friend AmGrid make_am_grid(int k, std::int64_t horizon);
    AmGrid(int k, std::int64_t horizon, int max_exponent, SharedPairs pairs)
        : k_(k), horizon_(horizon), max_exponent_(max_exponent), pairs_(std::move(pairs)) {}

    int k_;
    std::int64_t horizon_;
    int max_exponent_;
    SharedPairs pairs_;
};

AmGrid make_am_grid(int k, std::int64_t horizon);

// Probability vector over the pairs of one grid. Immutable once built.
class GridDistribution {
public:
    GridDistribution(SharedPairs pairs, std::vector<double> weights);

    static GridDistribution point_mass(SharedPairs pairs, std::size_t index);
    static GridDistribution uniform(SharedPairs pairs);

    std::size_t size() const { return weights_.size(); }
    std::span<const double> weights() const { return weights_; }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<PricePair>& pairs() const { return *pairs_; }
    const SharedPairs& shared_pairs() const { return pairs_; }

    bool same_grid(const GridDistribution& other) const;

private:
    SharedPairs pairs_;
    std::vector<double> weights_;
};

// Convex combination (1 - alpha) * d1 + alpha * d2 over a shared grid.
GridDistribution mix(const GridDistribution& d1, const GridDistribution& d2, double alpha);

}  // namespace btlab
