#include "btlab/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace btlab {

namespace {

constexpr double kMassTolerance = 1e-12;

std::vector<double> prefix_sums(const std::vector<double>& w) {
    std::vector<double> cdf(w.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        cdf[i] = acc;
    }
    return cdf;
}

std::size_t draw_from_cdf(const std::vector<double>& cdf, RandomStream& rng) {
    const double total = cdf.back();
    const double x = rng.uniform01() * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
    if (it == cdf.end()) --it;
    return static_cast<std::size_t>(it - cdf.begin());
}

}  // namespace

JointValuationModel JointValuationModel::cell_density(std::vector<std::vector<double>> cells,
                                                      double declared_sigma) {
    const int m = static_cast<int>(cells.size());
    if (m < 1) throw InvalidParameterError("cell density matrix is empty");
    JointValuationModel model;
    model.kind_ = ModelKind::cell_density;
    model.m_ = m;
    model.cells_.reserve(static_cast<std::size_t>(m) * m);
    double max_density = 0.0;
    double mass = 0.0;
    const double cell_area = 1.0 / (static_cast<double>(m) * static_cast<double>(m));
    for (const auto& row : cells) {
        if (static_cast<int>(row.size()) != m) {
            throw InvalidParameterError("cell density matrix must be square");
        }
        for (double d : row) {
            if (!(d >= 0.0) || !std::isfinite(d)) {
                throw InvalidParameterError("cell densities must be finite and nonnegative");
            }
            max_density = std::max(max_density, d);
            mass += d * cell_area;
            model.cells_.push_back(d);
        }
    }
    if (std::fabs(mass - 1.0) > kMassTolerance) {
        throw InvalidParameterError("cell densities must integrate to 1");
    }
    if (declared_sigma >= 0.0) {
        if (declared_sigma + 1e-9 < max_density) {
            throw InvalidParameterError("declared density bound below matrix maximum");
        }
        model.sigma_ = declared_sigma;
    } else {
        model.sigma_ = max_density;
    }
    std::vector<double> cell_masses(model.cells_.size());
    for (std::size_t i = 0; i < cell_masses.size(); ++i) cell_masses[i] = model.cells_[i] * cell_area;
    model.cell_cdf_ = prefix_sums(cell_masses);
    return model;
}

JointValuationModel JointValuationModel::point_masses(std::vector<Atom> atoms) {
    if (atoms.empty()) throw InvalidParameterError("point-mass mixture needs at least one atom");
    double mass = 0.0;
    for (const Atom& a : atoms) {
        if (!(a.s >= 0.0 && a.s <= 1.0 && a.b >= 0.0 && a.b <= 1.0)) {
            throw InvalidParameterError("atoms must lie in the unit square");
        }
        if (!(a.mass >= 0.0)) throw InvalidParameterError("atom masses must be nonnegative");
        mass += a.mass;
    }
    if (std::fabs(mass - 1.0) > kMassTolerance) {
        throw InvalidParameterError("atom masses must sum to 1");
    }
    JointValuationModel model;
    model.kind_ = ModelKind::point_mass_mixture;
    model.sigma_ = std::numeric_limits<double>::infinity();
    model.atoms_ = std::move(atoms);
    std::vector<double> masses(model.atoms_.size());
    for (std::size_t i = 0; i < masses.size(); ++i) masses[i] = model.atoms_[i].mass;
    model.atom_cdf_ = prefix_sums(masses);
    return model;
}

JointValuationModel JointValuationModel::product_uniform() {
    JointValuationModel model;
    model.kind_ = ModelKind::product_uniform;
    model.sigma_ = 1.0;
    model.m_ = 1;
    model.cells_ = {1.0};
    model.cell_cdf_ = {1.0};
    return model;
}

std::pair<double, double> JointValuationModel::sample(RandomStream& rng) const {
    if (kind_ == ModelKind::point_mass_mixture) {
        const Atom& a = atoms_[draw_from_cdf(atom_cdf_, rng)];
        return {a.s, a.b};
    }
    const std::size_t cell = draw_from_cdf(cell_cdf_, rng);
    const double scale = 1.0 / static_cast<double>(m_);
    const int a = static_cast<int>(cell) / m_;
    const int b = static_cast<int>(cell) % m_;
    const double s = (a + rng.uniform01()) * scale;
    const double bv = (b + rng.uniform01()) * scale;
    return {s, bv};
}

namespace {

// Closed-form per-cell pieces over the trade rectangle [0,p] x [q,1].
struct CellSlice {
    double s0, s1;  // seller interval
    double b0, b1;  // buyer interval
    bool empty;
};

inline CellSlice slice_cell(int a, int b, int m, PricePair pair) {
    const double scale = 1.0 / static_cast<double>(m);
    CellSlice out{};
    out.s0 = a * scale;
    out.s1 = std::min((a + 1) * scale, pair.p);
    out.b0 = std::max(b * scale, pair.q);
    out.b1 = (b + 1) * scale;
    out.empty = !(out.s1 > out.s0 && out.b1 > out.b0);
    return out;
}

}  // namespace

double JointValuationModel::trade_probability(PricePair pair) const {
    if (kind_ == ModelKind::point_mass_mixture) {
        double total = 0.0;
        for (const Atom& a : atoms_) {
            if (one_bit_feedback(a.s, a.b, pair)) total += a.mass;
        }
        return total;
    }
    double total = 0.0;
    for (int a = 0; a < m_; ++a) {
        for (int b = 0; b < m_; ++b) {
            const double d = cell(a, b);
            if (d == 0.0) continue;
            const CellSlice c = slice_cell(a, b, m_, pair);
            if (c.empty) continue;
            total += d * (c.s1 - c.s0) * (c.b1 - c.b0);
        }
    }
    return total;
}

double JointValuationModel::exact_gft(PricePair pair) const {
    if (kind_ == ModelKind::point_mass_mixture) {
        double total = 0.0;
        for (const Atom& a : atoms_) {
            if (one_bit_feedback(a.s, a.b, pair)) total += a.mass * (a.b - a.s);
        }
        return total;
    }
    double total = 0.0;
    for (int a = 0; a < m_; ++a) {
        for (int b = 0; b < m_; ++b) {
            const double d = cell(a, b);
            if (d == 0.0) continue;
            const CellSlice c = slice_cell(a, b, m_, pair);
            if (c.empty) continue;
            const double ds = c.s1 - c.s0;
            const double db = c.b1 - c.b0;
            total += d * (ds * 0.5 * (c.b1 * c.b1 - c.b0 * c.b0) -
                          db * 0.5 * (c.s1 * c.s1 - c.s0 * c.s0));
        }
    }
    return total;
}

double JointValuationModel::exact_pro(PricePair pair) const {
    return (pair.q - pair.p) * trade_probability(pair);
}

double JointValuationModel::exact_l(PricePair pair) const {
    if (kind_ == ModelKind::point_mass_mixture) {
        double total = 0.0;
        for (const Atom& a : atoms_) {
            if (one_bit_feedback(a.s, a.b, pair)) total += a.mass * (pair.p - a.s);
        }
        return total;
    }
    double total = 0.0;
    for (int a = 0; a < m_; ++a) {
        for (int b = 0; b < m_; ++b) {
            const double d = cell(a, b);
            if (d == 0.0) continue;
            const CellSlice c = slice_cell(a, b, m_, pair);
            if (c.empty) continue;
            const double ds = c.s1 - c.s0;
            const double db = c.b1 - c.b0;
            total += d * db * (pair.p * ds - 0.5 * (c.s1 * c.s1 - c.s0 * c.s0));
        }
    }
    return total;
}

double JointValuationModel::exact_r(PricePair pair) const {
    if (kind_ == ModelKind::point_mass_mixture) {
        double total = 0.0;
        for (const Atom& a : atoms_) {
            if (one_bit_feedback(a.s, a.b, pair)) total += a.mass * (a.b - pair.q);
        }
        return total;
    }
    double total = 0.0;
    for (int a = 0; a < m_; ++a) {
        for (int b = 0; b < m_; ++b) {
            const double d = cell(a, b);
            if (d == 0.0) continue;
            const CellSlice c = slice_cell(a, b, m_, pair);
            if (c.empty) continue;
            const double ds = c.s1 - c.s0;
            const double db = c.b1 - c.b0;
            total += d * ds * (0.5 * (c.b1 * c.b1 - c.b0 * c.b0) - pair.q * db);
        }
    }
    return total;
}

JointValuationModel make_needle_instance(double eps, double u) {
    if (!(eps > 0.0 && eps < 1.0 / 16.0)) {
        throw InvalidParameterError("needle eps must lie in (0, 1/16)");
    }
    if (!(u >= -1.0 / 16.0 && u <= 1.0 / 16.0)) {
        throw InvalidParameterError("needle shift must lie in [-1/16, 1/16]");
    }
    std::vector<Atom> atoms = {
        {1.0 / 8.0, 3.0 / 8.0 + u, 0.25},
        {5.0 / 8.0 + u, 7.0 / 8.0, 0.25},
        {3.0 / 8.0 + u - eps, 3.0 / 8.0 + u - eps, 0.25},
        {5.0 / 8.0 + u - eps, 5.0 / 8.0 + u - eps, 0.25},
    };
    return JointValuationModel::point_masses(std::move(atoms));
}

NeedleRegion classify_needle_region(double eps, double u, PricePair pair) {
    if (!(eps > 0.0 && eps < 1.0 / 16.0) || !(u >= -1.0 / 16.0 && u <= 1.0 / 16.0)) {
        throw InvalidParameterError("needle region parameters out of range");
    }
    const double lo = 3.0 / 8.0 + u;  // buyer-side gain threshold
    const double hi = 5.0 / 8.0 + u;  // seller-side gain threshold
    const double p = pair.p;
    const double q = pair.q;
    if (p >= hi && q <= lo) {
        if (p < hi + eps && q > lo - eps) return NeedleRegion::sliver;
        return NeedleRegion::gains_with_losses;
    }
    if (p < hi && q > lo) {
        // Nominal no-trade box, minus the sliver where the upper diagonal
        // atom still trades.
        const bool diag_atom_trades = p >= hi - eps && q <= hi - eps;
        if (!diag_atom_trades) return NeedleRegion::no_trade;
    }
    return NeedleRegion::elsewhere;
}

namespace {

using nlohmann::ordered_json;

void position_of(std::string_view text, std::size_t byte, int& line, int& column) {
    line = 1;
    column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
}

}  // namespace

JointValuationModel parse_instance(std::string_view text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        int line = 1, column = 1;
        position_of(text, e.byte > 0 ? e.byte - 1 : 0, line, column);
        throw InstanceParseError(std::string("invalid instance file: ") + e.what(), line, column);
    }
    try {
        const std::string kind = doc.at("kind").get<std::string>();
        if (kind == "product-uniform") {
            return JointValuationModel::product_uniform();
        }
        if (kind == "cell-density") {
            auto cells = doc.at("density").get<std::vector<std::vector<double>>>();
            double sigma = -1.0;
            if (doc.contains("sigma")) sigma = doc.at("sigma").get<double>();
            return JointValuationModel::cell_density(std::move(cells), sigma);
        }
        if (kind == "point-mass-mixture") {
            std::vector<Atom> atoms;
            for (const auto& row : doc.at("atoms")) {
                if (!row.is_array() || row.size() != 3) {
                    throw InvalidParameterError("atom rows must be [s, b, mass]");
                }
                atoms.push_back(Atom{row[0].get<double>(), row[1].get<double>(),
                                     row[2].get<double>()});
            }
            return JointValuationModel::point_masses(std::move(atoms));
        }
        throw InvalidParameterError("unknown instance kind: " + kind);
    } catch (const nlohmann::json::exception& e) {
        throw InstanceParseError(std::string("invalid instance file: ") + e.what(), 1, 1);
    } catch (const InvalidParameterError& e) {
        throw InstanceParseError(std::string("invalid instance file: ") + e.what(), 1, 1);
    }
}

JointValuationModel load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InstanceParseError("cannot open instance file: " + path.string(), 0, 0);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_instance(buf.str());
}

std::string serialize_instance(const JointValuationModel& model) {
    ordered_json doc;
    switch (model.kind()) {
        case ModelKind::product_uniform:
            doc["kind"] = "product-uniform";
            break;
        case ModelKind::cell_density: {
            doc["kind"] = "cell-density";
            doc["sigma"] = model.density_bound();
            std::vector<std::vector<double>> rows;
            const int m = model.cells_per_axis();
            rows.resize(m);
            for (int a = 0; a < m; ++a) {
                rows[a].resize(m);
                for (int b = 0; b < m; ++b) rows[a][b] = model.cell(a, b);
            }
            doc["density"] = rows;
            break;
        }
        case ModelKind::point_mass_mixture: {
            doc["kind"] = "point-mass-mixture";
            ordered_json atoms = ordered_json::array();
            for (const Atom& a : model.atoms()) {
                atoms.push_back(ordered_json::array({a.s, a.b, a.mass}));
            }
            doc["atoms"] = atoms;
            break;
        }
    }
    return doc.dump(2) + "\n";
}

}  // namespace btlab
