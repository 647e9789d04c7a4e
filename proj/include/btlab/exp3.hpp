#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "btlab/errors.hpp"
#include "btlab/random.hpp"

namespace btlab {

// Exponential weights with implicit exploration (the high-probability IX
// variant). Losses must lie in [0, 1]; the estimated loss of the played arm
// is loss / (prob + ix_gamma).
class Exp3Ix {
public:
    Exp3Ix(std::size_t arms, double learning_rate, double ix_gamma)
        : eta_(learning_rate), gamma_(ix_gamma), weights_(arms, 1.0),
          weight_sum_(static_cast<double>(arms)) {
        if (arms == 0) throw InvalidParameterError("bandit needs at least one arm");
        if (!(eta_ > 0.0) || !(gamma_ > 0.0)) {
            throw InvalidParameterError("bandit rates must be positive");
        }
    }

    std::size_t arms() const { return weights_.size(); }

    std::size_t sample(RandomStream& rng) {
        last_arm_ = rng.categorical(weights_, weight_sum_);
        last_prob_ = weights_[last_arm_] / weight_sum_;
        return last_arm_;
    }

    // Applies the importance-weighted loss of the most recently sampled arm.
    void update(double loss01) {
        loss01 = std::clamp(loss01, 0.0, 1.0);
        const double estimated = loss01 / (last_prob_ + gamma_);
        const double w_old = weights_[last_arm_];
        const double w_new = w_old * std::exp(-eta_ * estimated);
        weights_[last_arm_] = w_new;
        weight_sum_ += w_new - w_old;
        if (weight_sum_ < 1e-250) rescale();
    }

    std::vector<double> probabilities() const {
        std::vector<double> p(weights_.size());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = weights_[i] / weight_sum_;
        return p;
    }

private:
    void rescale() {
        double max_w = 0.0;
        for (double w : weights_) max_w = std::max(max_w, w);
        weight_sum_ = 0.0;
        for (double& w : weights_) {
            w /= max_w;
            weight_sum_ += w;
        }
    }

    double eta_;
    double gamma_;
    std::vector<double> weights_;
    double weight_sum_;
    std::size_t last_arm_ = 0;
    double last_prob_ = 1.0;
};

}  // namespace btlab
