#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "btlab/core.hpp"
#include "btlab/random.hpp"

namespace btlab {

enum class ModelKind { cell_density, point_mass_mixture, product_uniform };

struct Atom {
    double s = 0.0;
    double b = 0.0;
    double mass = 0.0;
};

// Joint distribution of (seller, buyer) valuations on the unit square with
// exact closed-form expectations. Piecewise-constant densities and finite
// atom mixtures cover every instance family used by the experiments; both
// keep all integrals polynomial.
class JointValuationModel {
public:
    // M x M matrix of nonnegative densities, cells[a][b] constant on
    // [a/M,(a+1)/M) x [b/M,(b+1)/M). Must integrate to 1. The certified
    // density bound defaults to the matrix maximum.
    static JointValuationModel cell_density(std::vector<std::vector<double>> cells,
                                            double declared_sigma = -1.0);
    static JointValuationModel point_masses(std::vector<Atom> atoms);
    static JointValuationModel product_uniform();

    ModelKind kind() const { return kind_; }
    // Certified density bound sigma; infinity for atom mixtures.
    double density_bound() const { return sigma_; }

    int cells_per_axis() const { return m_; }
    double cell(int a, int b) const { return cells_[static_cast<std::size_t>(a) * m_ + b]; }
    const std::vector<double>& cells_flat() const { return cells_; }
    const std::vector<Atom>& atoms() const { return atoms_; }

    std::pair<double, double> sample(RandomStream& rng) const;

    // Exact expectations over the trade event {s <= p, b >= q}.
    double exact_gft(PricePair pair) const;   // E[(b - s) I(trade)]
    double exact_pro(PricePair pair) const;   // E[(q - p) I(trade)]
    double exact_l(PricePair pair) const;     // E[(p - s) I(trade)]
    double exact_r(PricePair pair) const;     // E[(b - q) I(trade)]
    double trade_probability(PricePair pair) const;

private:
    JointValuationModel() = default;

    ModelKind kind_ = ModelKind::product_uniform;
    double sigma_ = 1.0;
    int m_ = 1;                     // cells per axis (density kinds)
    std::vector<double> cells_;     // flattened M x M densities
    std::vector<double> cell_cdf_;  // cumulative cell masses for sampling
    std::vector<Atom> atoms_;
    std::vector<double> atom_cdf_;
};

// Trade indicator under the literal tie rule: s <= p and b >= q both accept.
inline bool one_bit_feedback(double s, double b, PricePair pair) {
    return s <= pair.p && b >= pair.q;
}

// Four-atom family with unbounded density. A width-eps sliver of price pairs
// realizes both positive-gain trades while keeping the lower zero-gain
// diagonal atom out of the market; coarse grids and finite samples cannot
// locate it once the family is shifted by u.
JointValuationModel make_needle_instance(double eps, double u);

// Price-pair classification for the needle family, oriented so that the
// stated payoffs hold under the trade rule s <= p, b >= q. The no-trade
// region is carved exactly: the upper diagonal atom still trades in a sliver
// of the nominal no-trade box.
enum class NeedleRegion {
    sliver,             // both gains trade and the cheap-loss sliver is hit
    no_trade,           // nothing trades
    gains_with_losses,  // both gains trade along with costly zero-gain atoms
    elsewhere           // at most one gain trades
};
NeedleRegion classify_needle_region(double eps, double u, PricePair pair);

// Instance files: JSON, round-trippable on canonical form.
JointValuationModel parse_instance(std::string_view text);
JointValuationModel load_instance(const std::filesystem::path& path);
std::string serialize_instance(const JointValuationModel& model);

}  // namespace btlab
