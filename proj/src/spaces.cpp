#include "cno/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cno::spaces {

namespace {

constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

void check_sampled(const SchauderSpace& space, const Sampled& s) {
    if (space.kind() != Kind::FourierL2) {
        throw InvalidArgument("sampled elements are only defined for FourierL2 spaces");
    }
    if (s.values.size() < 3 || s.values.size() % 2 == 0) {
        throw InvalidArgument("sampled element needs an odd number (>= 3) of grid values");
    }
    if (!all_finite(s.values)) {
        throw InvalidArgument("sampled element has non-finite values");
    }
}

void check_coefficients(const SchauderSpace& space, const Coefficients& c) {
    if (!all_finite(c.coords) || !std::isfinite(c.tail_norm) || c.tail_norm < 0.0) {
        throw InvalidArgument("coefficient element has non-finite coordinates or tail");
    }
    if (space.kind() == Kind::Euclidean && c.coords.size() > space.dim()) {
        throw InvalidArgument("coordinate vector longer than the Euclidean dimension");
    }
    if (space.kind() == Kind::ChaosL2 && c.coords.size() > space.max_level()) {
        throw InvalidArgument("coordinate vector longer than the retained chaos modes");
    }
    if (!space.is_banach() && c.tail_norm != 0.0) {
        throw InvalidArgument("tail norms are only meaningful in Banach instances");
    }
    if (space.kind() == Kind::Euclidean && c.tail_norm != 0.0) {
        throw InvalidArgument("Euclidean elements have no tail");
    }
}

std::vector<double> samples_of(const SchauderSpace& space, const Coefficients& c,
                               std::size_t n_values) {
    if (c.tail_norm != 0.0) {
        throw InvalidArgument("cannot evaluate an element with an unresolved tail pointwise");
    }
    const int intervals = static_cast<int>(n_values) - 1;
    const auto grid = sample_grid(space.horizon(), intervals);
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t h = 0; h < c.coords.size(); ++h) {
        if (c.coords[h] == 0.0) continue;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            out[i] += c.coords[h] * space.basis_value(h + 1, grid[i]);
        }
    }
    return out;
}

// Difference x - y in a common representation.
Element difference(const SchauderSpace& space, const Element& x, const Element& y) {
    const auto* cx = std::get_if<Coefficients>(&x);
    const auto* cy = std::get_if<Coefficients>(&y);
    if (cx && cy) {
        check_coefficients(space, *cx);
        check_coefficients(space, *cy);
        Coefficients d;
        d.coords.assign(std::max(cx->coords.size(), cy->coords.size()), 0.0);
        for (std::size_t i = 0; i < d.coords.size(); ++i) {
            const double a = i < cx->coords.size() ? cx->coords[i] : 0.0;
            const double b = i < cy->coords.size() ? cy->coords[i] : 0.0;
            d.coords[i] = a - b;
        }
        // Tails are orthogonal to the listed coordinates but otherwise unknown;
        // the difference is resolved only when one side has no tail.
        if (cx->tail_norm != 0.0 && cy->tail_norm != 0.0) {
            throw InvalidArgument("difference of two elements with unresolved tails");
        }
        d.tail_norm = cx->tail_norm + cy->tail_norm;
        return d;
    }
    std::size_t n_values = 0;
    if (const auto* sx = std::get_if<Sampled>(&x)) {
        check_sampled(space, *sx);
        n_values = sx->values.size();
    }
    if (const auto* sy = std::get_if<Sampled>(&y)) {
        check_sampled(space, *sy);
        if (n_values != 0 && n_values != sy->values.size()) {
            throw InvalidArgument("sampled elements live on different grids");
        }
        n_values = sy->values.size();
    }
    const auto vx = cx ? samples_of(space, *cx, n_values) : std::get<Sampled>(x).values;
    const auto vy = cy ? samples_of(space, *cy, n_values) : std::get<Sampled>(y).values;
    Sampled d;
    d.values.resize(n_values);
    for (std::size_t i = 0; i < n_values; ++i) d.values[i] = vx[i] - vy[i];
    return d;
}

// Prefix maxima m_k = max_{j<=k} w_j |x_j| for k = 1..k_max.
std::vector<double> prefix_seminorms(const SchauderSpace& space, const std::vector<double>& x,
                                     std::size_t first = 0) {
    const auto k_max = static_cast<std::size_t>(space.k_max());
    std::vector<double> p(k_max, 0.0);
    double running = 0.0;
    for (std::size_t k = 0; k < k_max; ++k) {
        if (k >= first && k < x.size()) {
            running = std::max(running, space.weight(k + 1) * std::abs(x[k]));
        }
        p[k] = running;
    }
    return p;
}

double weighted_series(const std::vector<double>& p, std::size_t first_k) {
    // Summed from the smallest terms up.
    double sum = 0.0;
    for (std::size_t k = p.size(); k > first_k; --k) {
        sum += std::ldexp(1.0, -static_cast<int>(k)) * phi(p[k - 1]);
    }
    return sum;
}

}  // namespace

std::string to_string(Kind kind) {
    switch (kind) {
        case Kind::Euclidean: return "euclidean";
        case Kind::WeightedSequence: return "weighted_sequence";
        case Kind::FourierL2: return "fourier_l2";
        case Kind::ChaosL2: return "chaos_l2";
    }
    return "unknown";
}

Kind kind_from_string(const std::string& name) {
    if (name == "euclidean") return Kind::Euclidean;
    if (name == "weighted_sequence") return Kind::WeightedSequence;
    if (name == "fourier_l2") return Kind::FourierL2;
    if (name == "chaos_l2") return Kind::ChaosL2;
    throw InvalidArgument("unknown space kind '" + name + "'");
}

SchauderSpace SchauderSpace::euclidean(std::size_t dim) {
    if (dim == 0) throw InvalidArgument("Euclidean dimension must be positive");
    SchauderSpace s;
    s.kind_ = Kind::Euclidean;
    s.dim_ = dim;
    return s;
}

SchauderSpace SchauderSpace::weighted_sequence(std::vector<double> weights, int k_max) {
    if (k_max < 1 || k_max > 1000) throw InvalidArgument("k_max must lie in [1, 1000]");
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("sequence weights must be positive");
    }
    SchauderSpace s;
    s.kind_ = Kind::WeightedSequence;
    s.k_max_ = k_max;
    s.weights_ = std::move(weights);
    return s;
}

SchauderSpace SchauderSpace::fourier_l2(double horizon, int quadrature_intervals) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("horizon must be positive");
    if (quadrature_intervals < 2 || quadrature_intervals % 2 != 0) {
        throw InvalidArgument("Simpson quadrature needs an even number of intervals");
    }
    SchauderSpace s;
    s.kind_ = Kind::FourierL2;
    s.horizon_ = horizon;
    s.quadrature_intervals_ = quadrature_intervals;
    return s;
}

SchauderSpace SchauderSpace::chaos_l2(std::size_t mode_count, double horizon) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("horizon must be positive");
    SchauderSpace s;
    s.kind_ = Kind::ChaosL2;
    s.dim_ = mode_count + 1;
    s.horizon_ = horizon;
    return s;
}

std::string SchauderSpace::tag() const {
    std::ostringstream os;
    os.precision(17);
    os << to_string(kind_) << '(';
    switch (kind_) {
        case Kind::Euclidean: os << "dim=" << dim_; break;
        case Kind::WeightedSequence:
            os << "k_max=" << k_max_ << ",w=[";
            for (std::size_t i = 0; i < weights_.size(); ++i) os << (i ? "," : "") << weights_[i];
            os << ']';
            break;
        case Kind::FourierL2: os << "t=" << horizon_ << ",q=" << quadrature_intervals_; break;
        case Kind::ChaosL2: os << "modes=" << dim_ - 1 << ",t=" << horizon_; break;
    }
    os << ')';
    return os.str();
}

std::size_t SchauderSpace::max_level() const noexcept {
    switch (kind_) {
        case Kind::Euclidean:
        case Kind::ChaosL2: return dim_;
        case Kind::FourierL2:
        case Kind::WeightedSequence: return kUnbounded;
    }
    return kUnbounded;
}

double SchauderSpace::weight(std::size_t j) const noexcept {
    return j >= 1 && j <= weights_.size() ? weights_[j - 1] : 1.0;
}

double SchauderSpace::basis_value(std::size_t h, double s) const {
    if (kind_ != Kind::FourierL2) throw InvalidArgument("pointwise basis values need a FourierL2 space");
    if (h == 0) throw InvalidArgument("basis indices are 1-based");
    return std::sqrt(2.0 / horizon_) *
           std::sin(static_cast<double>(h) * std::numbers::pi * s / horizon_);
}

double SchauderSpace::seminorm(std::size_t k, const Element& x) const {
    if (k == 0) throw InvalidArgument("seminorm indices are 1-based");
    if (const auto* c = std::get_if<Coefficients>(&x)) {
        check_coefficients(*this, *c);
        if (is_banach()) {
            double sq = c->tail_norm * c->tail_norm;
            for (double a : c->coords) sq += a * a;
            return std::sqrt(sq);
        }
        double m = 0.0;
        for (std::size_t j = 0; j < std::min(k, c->coords.size()); ++j) {
            m = std::max(m, weight(j + 1) * std::abs(c->coords[j]));
        }
        return m;
    }
    const auto& s = std::get<Sampled>(x);
    check_sampled(*this, s);
    std::vector<double> sq(s.values.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = s.values[i] * s.values[i];
    return std::sqrt(std::max(0.0, simpson(sq, horizon_)));
}

double simpson(const std::vector<double>& values, double horizon) {
    const std::size_t n = values.size();
    if (n < 3 || n % 2 == 0) throw InvalidArgument("Simpson rule needs an odd number (>= 3) of samples");
    const double h = horizon / static_cast<double>(n - 1);
    double odd = 0.0;
    double even = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) (i % 2 ? odd : even) += values[i];
    return h / 3.0 * (values.front() + values.back() + 4.0 * odd + 2.0 * even);
}

std::vector<double> sample_grid(double horizon, int intervals) {
    if (intervals < 1) throw InvalidArgument("grid needs at least one interval");
    std::vector<double> g(static_cast<std::size_t>(intervals) + 1);
    for (int i = 0; i <= intervals; ++i) g[i] = horizon * i / intervals;
    return g;
}

CoordVector project(const SchauderSpace& space, const Element& x, std::size_t n) {
    if (n == 0) throw InvalidArgument("truncation level must be positive");
    if (n > space.max_level()) throw InvalidArgument("truncation level exceeds the space dimension");
    CoordVector out{std::vector<double>(n, 0.0), space.tag()};
    if (const auto* c = std::get_if<Coefficients>(&x)) {
        check_coefficients(space, *c);
        std::copy_n(c->coords.begin(), std::min(n, c->coords.size()), out.coords.begin());
        return out;
    }
    const auto& s = std::get<Sampled>(x);
    check_sampled(space, s);
    if (n > (s.values.size() - 1) / 2) {
        throw InvalidArgument("truncation level exceeds the quadrature resolution");
    }
    const auto grid = sample_grid(space.horizon(), static_cast<int>(s.values.size()) - 1);
    std::vector<double> integrand(grid.size());
    for (std::size_t h = 1; h <= n; ++h) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            integrand[i] = s.values[i] * space.basis_value(h, grid[i]);
        }
        out.coords[h - 1] = simpson(integrand, space.horizon());
    }
    return out;
}

Element reconstruct(const SchauderSpace& space, const CoordVector& v) {
    if (v.space_tag != space.tag()) {
        throw InvalidArgument("coordinate vector belongs to " + v.space_tag + ", not " + space.tag());
    }
    if (v.coords.size() > space.max_level()) throw InvalidArgument("too many coordinates for the space");
    if (!all_finite(v.coords)) throw InvalidArgument("non-finite coordinates");
    return Coefficients{v.coords, 0.0};
}

Sampled evaluate(const SchauderSpace& space, const std::vector<double>& coords) {
    if (space.kind() != Kind::FourierL2) throw InvalidArgument("pointwise evaluation needs a FourierL2 space");
    return Sampled{samples_of(space, Coefficients{coords, 0.0},
                              static_cast<std::size_t>(space.quadrature_intervals()) + 1)};
}

Element truncate(const SchauderSpace& space, const Element& x, std::size_t n) {
    return reconstruct(space, project(space, x, n));
}

MetricValue metric(const SchauderSpace& space, const Element& x, const Element& y) {
    const Element d = difference(space, x, y);
    if (space.is_banach()) return {0.5 * phi(space.seminorm(1, d)), 0.0};
    const auto& c = std::get<Coefficients>(d);
    const auto p = prefix_seminorms(space, c.coords);
    return {weighted_series(p, 0), std::ldexp(1.0, -space.k_max())};
}

double norm_distance(const SchauderSpace& space, const Element& x, const Element& y) {
    if (!space.is_banach()) throw InvalidArgument("norm distance needs a Banach instance");
    return space.seminorm(1, difference(space, x, y));
}

double coordinate_metric(const SchauderSpace& space, const std::vector<double>& a,
                         const std::vector<double>& b) {
    if (a.size() != b.size()) throw InvalidArgument("coordinate vectors differ in length");
    return metric(space, Coefficients{a, 0.0}, Coefficients{b, 0.0}).value;
}

std::vector<double> truncation_error_profile(const SchauderSpace& space,
                                             const std::vector<Element>& samples,
                                             std::size_t n_max) {
    if (samples.empty()) throw InvalidArgument("truncation profile needs at least one sample");
    if (n_max == 0) throw InvalidArgument("n_max must be positive");
    if (n_max > space.max_level()) throw InvalidArgument("n_max exceeds the space dimension");
    std::vector<double> profile(n_max, 0.0);

    for (const auto& x : samples) {
        std::vector<double> err(n_max, 0.0);
        if (const auto* c = std::get_if<Coefficients>(&x)) {
            check_coefficients(space, *c);
            if (space.is_banach()) {
                // Squared tails accumulated from the far end: nonincreasing in n.
                std::vector<double> tail_sq(std::max(c->coords.size(), n_max) + 1, 0.0);
                tail_sq.back() = c->tail_norm * c->tail_norm;
                for (std::size_t h = tail_sq.size() - 1; h > 0; --h) {
                    const double a = h - 1 < c->coords.size() ? c->coords[h - 1] : 0.0;
                    tail_sq[h - 1] = tail_sq[h] + a * a;
                }
                for (std::size_t n = 1; n <= n_max; ++n) err[n - 1] = 0.5 * phi(std::sqrt(tail_sq[n]));
            } else {
                for (std::size_t n = 1; n <= n_max; ++n) {
                    const auto p = prefix_seminorms(space, c->coords, n);
                    err[n - 1] = weighted_series(p, n);
                }
            }
        } else {
            // Bessel: ||x - A_n x||^2 = ||x||^2 - sum_{h<=n} c_h^2 for the
            // orthonormal sine family.
            const auto& s = std::get<Sampled>(x);
            const double norm = space.seminorm(1, s);
            const auto coords = project(space, s, n_max).coords;
            double rem = norm * norm;
            for (std::size_t n = 1; n <= n_max; ++n) {
                rem = std::max(0.0, rem - coords[n - 1] * coords[n - 1]);
                err[n - 1] = 0.5 * phi(std::sqrt(rem));
            }
        }
        for (std::size_t n = 0; n < n_max; ++n) profile[n] = std::max(profile[n], err[n]);
    }
    return profile;
}

DimSelection select_dims(const std::vector<double>& profile_in,
                         const std::vector<double>& profile_out, double eps_d, double lambda,
                         const Regularity& regularity,
                         const std::function<double(double)>& omega_dagger) {
    if (!(eps_d > 0.0)) throw InvalidArgument("eps_D must be positive");
    if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
    for (const auto* prof : {&profile_in, &profile_out}) {
        if (prof->empty()) throw InvalidArgument("empty truncation profile");
        for (std::size_t i = 1; i < prof->size(); ++i) {
            if ((*prof)[i] > (*prof)[i - 1]) throw InvalidArgument("truncation profile is not nonincreasing");
        }
    }
    DimSelection sel;
    double base = omega_dagger(eps_d / 2.0) / lambda;
    if (const auto* h = std::get_if<Holder>(&regularity)) {
        if (!(h->alpha > 0.0 && h->alpha <= 1.0)) throw InvalidArgument("Holder exponent must lie in (0, 1]");
        base = std::pow(base, 1.0 / h->alpha);
    }
    sel.input_threshold = base;
    sel.output_threshold = eps_d / 2.0;

    auto first_below = [](const std::vector<double>& prof, double thr, const char* side) {
        for (std::size_t n = 0; n < prof.size(); ++n) {
            if (prof[n] <= thr) return n + 1;
        }
        throw BudgetInfeasible(std::string(side) + " truncation threshold not reached within the profile",
                               prof.back());
    };
    sel.n_in = first_below(profile_in, sel.input_threshold, "input");
    sel.n_out = first_below(profile_out, sel.output_threshold, "output");
    return sel;
}

}  // namespace cno::spaces
