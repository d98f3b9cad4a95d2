#include "cno/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cno::filter {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Largest value we hand out as an integer budget.
const double kLogIntMax = std::log(9.0e18);

double g_of_u(double u) { return u * u * u * u * std::log(u + 2.0) / std::log(3.0); }

// Ceiling/floor that ignore representation noise from the log-space route:
// values within a relative 1e-9 of an integer snap to it.
double snap(double v) {
    const double r = std::round(v);
    return std::abs(v - r) <= 1e-9 * std::max(1.0, std::abs(v)) ? r : v;
}
double ceil_snap(double v) { return std::ceil(snap(v)); }
double floor_snap(double v) { return std::floor(snap(v)); }

std::uint64_t to_count(double v, const char* what) {
    if (!std::isfinite(v) || v > 9.0e18) {
        throw BudgetOverflow(std::string(what) + " exceeds the integer range", std::isfinite(v) ? std::log(v) : kInf);
    }
    return static_cast<std::uint64_t>(std::max(1.0, std::ceil(snap(v))));
}

void check_input(const BudgetInput& b) {
    if (!(b.eps_D > 0.0) || !(b.eps_A > 0.0)) throw InvalidArgument("budget tolerances must be positive");
    if (!(b.lambda > 0.0)) throw InvalidArgument("lambda must be positive");
    if (b.n_in == 0 || b.n_out == 0) throw InvalidArgument("encoding dimensions must be positive");
    if (!b.omega_phi_dagger) throw InvalidArgument("missing omega_phi dagger");
}

double omega_at(const BudgetInput& b) {
    const double w = b.omega_phi_dagger(b.eps_A);
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("omega_phi dagger must be positive and finite at eps_A");
    return w;
}

}  // namespace

NeuralFilter make_filter(SchauderSpace in, SchauderSpace out, net::Network core) {
    net::check(core);
    const std::size_t n_in = core.spec.in_dim();
    const std::size_t n_out = core.spec.out_dim();
    if (n_in > in.max_level() || n_out > out.max_level()) {
        throw InvalidArgument("core dimensions exceed the encoding spaces");
    }
    return {std::move(in), std::move(out), n_in, n_out, std::move(core)};
}

std::vector<double> filter_coords(const NeuralFilter& f, const Element& x) {
    return net::forward(f.core, spaces::project(f.in_space, x, f.n_in).coords);
}

Element filter_forward(const NeuralFilter& f, const Element& x) {
    return spaces::reconstruct(f.out_space, {filter_coords(f, x), f.out_space.tag()});
}

// ---------------------------------------------------------------------------

double special_V(double y) {
    if (!(y >= 0.0)) throw InvalidArgument("V is defined on [0, inf)");
    if (y == 0.0) return 0.0;
    if (!std::isfinite(y)) return kInf;
    double lo = 0.0;
    double hi = std::max(1.0, std::sqrt(std::sqrt(y)));
    while (g_of_u(hi) < y) hi *= 2.0;
    // Bisect down to adjacent doubles.
    for (int it = 0; it < 2000; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        (g_of_u(mid) < y ? lo : hi) = mid;
    }
    return std::abs(g_of_u(lo) - y) < std::abs(g_of_u(hi) - y) ? lo : hi;
}

double special_V_log(double log_y) {
    if (log_y < 600.0) {
        const double v = special_V(std::exp(log_y));
        return v > 0.0 ? std::log(v) : -kInf;
    }
    // h(l) = log g(e^l) = 4 l + log log(e^l + 2) - log log 3, increasing in l.
    auto h = [](double l) {
        return 4.0 * l + std::log(l + std::log1p(2.0 * std::exp(-l))) - std::log(std::log(3.0));
    };
    double lo = 0.0;
    double hi = log_y / 4.0 + 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) < log_y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

void validate(const MonotoneTable& t) {
    if (t.xs.empty() || t.xs.size() != t.ys.size()) throw InvalidArgument("monotone table needs matching nonempty grids");
    for (std::size_t i = 0; i < t.xs.size(); ++i) {
        if (std::isnan(t.xs[i]) || std::isnan(t.ys[i])) throw InvalidArgument("NaN in monotone table");
        if (i > 0 && !(t.xs[i] > t.xs[i - 1])) throw InvalidArgument("table grid is not strictly increasing");
        if (i > 0 && t.ys[i] < t.ys[i - 1]) throw InvalidArgument("table values are not nondecreasing");
    }
}

MonotoneTable tabulate(const std::function<double(double)>& f, const std::vector<double>& xs, bool extends_below) {
    MonotoneTable t{xs, {}, extends_below};
    t.ys.reserve(xs.size());
    for (double x : xs) t.ys.push_back(f(x));
    validate(t);
    return t;
}

double generalized_inverse(const MonotoneTable& t, double y) {
    validate(t);
    const auto it = std::lower_bound(t.ys.begin(), t.ys.end(), y);
    if (it == t.ys.end()) return kInf;
    if (it == t.ys.begin() && t.extends_below) return -kInf;
    return t.xs[static_cast<std::size_t>(it - t.ys.begin())];
}

MonotoneTable fit_modulus(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.empty()) throw InvalidArgument("modulus fit needs at least one pair");
    auto sorted = pairs;
    std::sort(sorted.begin(), sorted.end());
    MonotoneTable t;
    for (const auto& [din, dout] : sorted) {
        if (!(din >= 0.0) || !(dout >= 0.0)) throw InvalidArgument("distances must be nonnegative");
        const double running = t.ys.empty() ? dout : std::max(t.ys.back(), dout);
        if (!t.xs.empty() && t.xs.back() == din) {
            t.ys.back() = running;
        } else {
            t.xs.push_back(din);
            t.ys.push_back(running);
        }
    }
    return t;
}

std::function<double(double)> modulus_dagger(MonotoneTable modulus) {
    validate(modulus);
    return [m = std::move(modulus)](double y) {
        const double v = generalized_inverse(m, y);
        if (v == kInf) return m.xs.back();
        if (v == -kInf) return m.xs.front();
        return v;
    };
}

std::function<double(double)> identity_dagger() {
    return [](double y) { return y; };
}

// ---------------------------------------------------------------------------

Budget budget_smooth(const BudgetInput& b) {
    check_input(b);
    const auto* s = std::get_if<spaces::Smooth>(&b.regularity);
    if (!s) throw InvalidArgument("budget_smooth needs a smooth regularity");
    if (s->k < 1) throw InvalidArgument("smoothness order must be positive");
    if (!(b.C_f > 0.0)) throw InvalidArgument("C_f must be positive");
    const double n = static_cast<double>(b.n_in);
    const double k = static_cast<double>(s->k);
    const double w = omega_at(b);

    const double logC1 = std::log(17.0) + (n + 1.0) * std::log(k) + n * std::log(3.0) + std::log(n);
    const double logC3 = std::log(85.0) + n * std::log(k + 1.0) + k * std::log(8.0);
    Budget out;
    out.C1 = 17.0 * std::pow(k, n + 1.0) * std::pow(3.0, n) * n;
    out.C2 = 18.0 * k * k;
    out.C3 = 85.0 * std::pow(k + 1.0, n) * std::pow(8.0, k);

    out.log_inner = n / (4.0 * k) * (logC3 + std::log(b.C_f)) + n / (8.0 * k) * std::log(n) -
                    2.0 * k / n * std::log(w);
    if (out.log_inner > kLogIntMax) throw BudgetOverflow("smooth budget inner term overflows", out.log_inner);
    out.inner = std::exp(out.log_inner);
    const double X = ceil_snap(out.inner);

    const double log_width_tail = logC1 + std::log(X + 2.0) + std::log(std::log2(8.0 * X));
    if (log_width_tail > kLogIntMax) throw BudgetOverflow("smooth budget width overflows", log_width_tail);
    const double width = static_cast<double>(b.n_in * (b.n_out - 1)) + std::exp(log_width_tail);
    const double depth =
        static_cast<double>(b.n_out) * (1.0 + out.C2 * (X + 2.0) * std::log2(X) + 2.0 * n);
    out.width = to_count(width, "smooth budget width");
    out.depth = to_count(depth, "smooth budget depth");
    return out;
}

Budget budget_holder(const BudgetInput& b) {
    check_input(b);
    const auto* h = std::get_if<spaces::Holder>(&b.regularity);
    if (!h) throw InvalidArgument("budget_holder needs a Holder regularity");
    if (!(h->alpha > 0.0 && h->alpha <= 1.0)) throw InvalidArgument("Holder exponent must lie in (0, 1]");
    const double n = static_cast<double>(b.n_in);
    const double e = n / h->alpha;
    const double w = omega_at(b);

    Budget out;
    const double logC1 = (n + 3.0) * std::log(3.0);
    out.C1 = std::pow(3.0, n + 3.0);
    out.C2 = 18.0 + 2.0 * n;

    const double log_arg = e * (std::log(131.0 * b.lambda) + std::log(n * static_cast<double>(b.n_out)));
    out.log_inner = -e * std::log(w) + special_V_log(log_arg);
    if (out.log_inner > kLogIntMax) throw BudgetOverflow("Holder budget inner term overflows", out.log_inner);
    out.inner = std::exp(out.log_inner);

    const double Yc = ceil_snap(out.inner);
    const double Yroot = floor_snap(std::exp(out.log_inner / n));
    const double branch = std::max(n * Yroot, Yc + 2.0);
    const double log_tail = logC1 + std::log(branch);
    if (log_tail > kLogIntMax) throw BudgetOverflow("Holder budget width overflows", log_tail);
    const double width = static_cast<double>(b.n_in * (b.n_out - 1)) + std::exp(log_tail);
    const double depth = n * (1.0 + 11.0 * Yc + out.C2);
    out.width = to_count(width, "Holder budget width");
    out.depth = to_count(depth, "Holder budget depth");
    return out;
}

Budget budget(const BudgetInput& b) {
    return std::holds_alternative<spaces::Smooth>(b.regularity) ? budget_smooth(b) : budget_holder(b);
}

// ---------------------------------------------------------------------------

double distance(const SchauderSpace& space, const Element& a, const Element& b, Measure m) {
    return m == Measure::Metric ? spaces::metric(space, a, b).value : spaces::norm_distance(space, a, b);
}

ErrorSplit error_decomposition(const Operator& target, const NeuralFilter& f, const std::vector<Element>& samples,
                               Measure m) {
    if (samples.empty()) throw InvalidArgument("error split needs samples");
    const auto& B = f.out_space;
    ErrorSplit s;
    for (const auto& x : samples) {
        const Element y = target(x);
        const Element y_trunc_in = target(spaces::truncate(f.in_space, x, f.n_in));
        const Element fhat = filter_forward(f, x);
        const Element by_trunc_in = spaces::truncate(B, y_trunc_in, f.n_out);
        const Element by = spaces::truncate(B, y, f.n_out);
        s.approx = std::max(s.approx, distance(B, fhat, by_trunc_in, m));
        s.enc_in = std::max(s.enc_in, distance(B, by_trunc_in, by, m));
        s.enc_out = std::max(s.enc_out, distance(B, by, y, m));
        s.end_to_end = std::max(s.end_to_end, distance(B, fhat, y, m));
    }
    return s;
}

}  // namespace cno::filter
