#include "cno/weave.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include "cno/binio.hpp"

namespace cno::weave {

namespace {

constexpr const char* kWeaveMagic = "CNO-WEAV";
constexpr std::uint32_t kWeaveVersion = 1;

double dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

Vec sample_ball(std::mt19937_64& rng, std::size_t Q, double R) {
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec v(Q);
    double n = 0.0;
    do {
        n = 0.0;
        for (auto& a : v) {
            a = gauss(rng);
            n += a * a;
        }
    } while (n == 0.0);
    const double r = R * std::pow(unif(rng), 1.0 / static_cast<double>(Q)) / std::sqrt(n);
    for (auto& a : v) a *= r;
    return v;
}

std::size_t hidden_width(const net::NetSpec& s) {
    std::size_t w = 0;
    for (std::size_t j = 1; j + 1 < s.dims.size(); ++j) w = std::max(w, s.dims[j]);
    return w;
}

}  // namespace

double packing_volume_bound(std::size_t Q, double R, double delta) {
    return std::pow((R + delta / 2.0) / (delta / 2.0), static_cast<double>(Q));
}

Packing pack_ball(std::size_t Q, double R, double delta, std::size_t count, std::uint64_t seed, int restarts) {
    if (Q == 0) throw InvalidArgument("packing dimension must be positive");
    if (!(R > 0.0) || !(delta > 0.0) || !(delta < R)) throw InvalidArgument("packing needs 0 < delta < R");
    if (count == 0) throw InvalidArgument("requested packing size must be positive");
    if (static_cast<double>(count) > packing_volume_bound(Q, R, delta)) {
        throw PackingInfeasible("requested packing exceeds the volume bound", 0);
    }
    Packing best{Q, R, delta, {}};
    const std::size_t n_cand = std::min<std::size_t>(200000, std::max<std::size_t>(4096, 64 * count));
    for (int r = 0; r < std::max(1, restarts); ++r) {
        std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(r));
        std::vector<Vec> cand(n_cand);
        for (auto& c : cand) c = sample_ball(rng, Q, R);
        std::vector<double> mind(n_cand, std::numeric_limits<double>::infinity());
        std::vector<Vec> pts;
        std::size_t next = std::uniform_int_distribution<std::size_t>(0, n_cand - 1)(rng);
        while (true) {
            pts.push_back(cand[next]);
            if (pts.size() == count) break;
            double far = -1.0;
            for (std::size_t i = 0; i < n_cand; ++i) {
                mind[i] = std::min(mind[i], dist(cand[i], pts.back()));
                if (mind[i] > far) {
                    far = mind[i];
                    next = i;
                }
            }
            if (!(far > delta)) break;
        }
        if (pts.size() > best.points.size()) best.points = std::move(pts);
        if (best.points.size() == count) break;
    }
    if (best.points.size() < count) {
        throw PackingInfeasible("greedy packing reached " + std::to_string(best.points.size()) + " of " +
                                    std::to_string(count) + " points",
                                best.points.size());
    }
    return best;
}

double min_separation(const std::vector<Vec>& points) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) m = std::min(m, dist(points[i], points[j]));
    }
    return m;
}

double aspect_ratio(const std::vector<Vec>& points) {
    if (points.size() < 2) throw InvalidArgument("aspect ratio needs at least two points");
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].size() != points.front().size()) throw InvalidArgument("points differ in dimension");
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const double d = dist(points[i], points[j]);
            if (d == 0.0) throw InvalidArgument("duplicate points have no aspect ratio");
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
    }
    return hi / lo;
}

Memorizer memorize(const std::vector<Vec>& xs, const std::vector<Vec>& ys, std::uint64_t seed) {
    if (xs.empty() || xs.size() != ys.size()) throw InvalidArgument("memorization needs matching nonempty pairs");
    const std::size_t K = xs.size();
    const std::size_t D = xs.front().size();
    const std::size_t Dout = ys.front().size();
    if (D == 0 || Dout == 0) throw InvalidArgument("memorized vectors must be nonempty");
    for (std::size_t i = 0; i < K; ++i) {
        if (xs[i].size() != D || ys[i].size() != Dout) throw InvalidArgument("memorized pairs differ in shape");
        for (double v : xs[i]) {
            if (!std::isfinite(v)) throw InvalidArgument("non-finite memorization input");
        }
        for (double v : ys[i]) {
            if (!std::isfinite(v)) throw InvalidArgument("non-finite memorization target");
        }
    }
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = i + 1; j < K; ++j) {
            if (xs[i] == xs[j]) throw InvalidArgument("memorization inputs must be pairwise distinct");
        }
    }

    Memorizer m;
    m.width_bound = D * K + 12;
    if (K == 1) {
        m.net = net::zeros({{D, Dout}, net::Activation::ReLU});
        std::copy(ys[0].begin(), ys[0].end(), m.net.theta.end() - static_cast<std::ptrdiff_t>(Dout));
        m.max_residual = 0.0;
        return m;
    }

    // Shift so that the first ReLU is the identity on the anchors.
    Vec shift(D);
    for (std::size_t k = 0; k < D; ++k) {
        double lo = xs[0][k];
        for (const auto& x : xs) lo = std::min(lo, x[k]);
        shift[k] = 1.0 - lo;
    }
    auto project = [&](const Vec& w, const Vec& x) {
        double acc = 0.0;
        for (std::size_t k = 0; k < D; ++k) acc += w[k] * std::max(x[k] + shift[k], 0.0 * (x[k] + shift[k]));
        return acc;
    };

    std::mt19937_64 rng(seed ^ 0x5eedULL);
    std::normal_distribution<double> gauss;
    Vec best_w;
    std::vector<double> best_p;
    double best_gap = -1.0;
    for (int attempt = 0; attempt < 64; ++attempt) {
        Vec w(D);
        double n = 0.0;
        for (auto& a : w) {
            a = gauss(rng);
            n += a * a;
        }
        n = std::sqrt(n);
        for (auto& a : w) a /= n;
        std::vector<double> p(K);
        for (std::size_t i = 0; i < K; ++i) p[i] = project(w, xs[i]);
        auto sorted = p;
        std::sort(sorted.begin(), sorted.end());
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < K; ++i) gap = std::min(gap, sorted[i] - sorted[i - 1]);
        if (gap > best_gap) {
            best_gap = gap;
            best_w = w;
            best_p = p;
        }
    }
    if (!(best_gap > 0.0)) throw InvalidArgument("no projection separates the memorization inputs");

    std::vector<std::size_t> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return best_p[a] < best_p[b]; });
    const double h = best_gap / 4.0;
    m.plateau = h;

    const std::size_t H = 2 * (K - 1);
    net::NetSpec spec{{D, H, Dout}, net::Activation::ReLU};
    net::Unpacked u;
    net::Layer L0;
    L0.rows = H;
    L0.cols = D;
    L0.A.resize(H * D);
    for (std::size_t r = 0; r < H; ++r) std::copy(best_w.begin(), best_w.end(), L0.A.begin() + static_cast<std::ptrdiff_t>(r * D));
    L0.b = shift;
    L0.alpha = 0.0;
    net::Layer L1;
    L1.rows = Dout;
    L1.cols = H;
    L1.A.assign(Dout * H, 0.0);
    L1.b.resize(H);
    L1.alpha = 0.0;
    for (std::size_t i = 0; i + 1 < K; ++i) {
        const double a = best_p[order[i]] + h;
        const double b = best_p[order[i + 1]] - h;
        L1.b[2 * i] = -a;
        L1.b[2 * i + 1] = -b;
        for (std::size_t o = 0; o < Dout; ++o) {
            const double slope = (ys[order[i + 1]][o] - ys[order[i]][o]) / (b - a);
            L1.at(o, 2 * i) = slope;
            L1.at(o, 2 * i + 1) = -slope;
        }
    }
    u.layers = {std::move(L0), std::move(L1)};
    u.c = ys[order[0]];
    m.net = {spec, net::pack(spec, u)};
    m.width = H;
    for (std::size_t i = 0; i < K; ++i) {
        const auto y = net::forward(m.net, xs[i]);
        for (std::size_t o = 0; o < Dout; ++o) m.max_residual = std::max(m.max_residual, std::abs(y[o] - ys[i][o]));
    }
    return m;
}

double scale_constant(const std::vector<Vec>& thetas) {
    double m = 0.0;
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        for (std::size_t j = i + 1; j < thetas.size(); ++j) m = std::max(m, dist(thetas[i], thetas[j]));
    }
    return std::max(1.0, m);
}

std::uint64_t horizon_limit(std::size_t Q, double delta) {
    if (Q == 0) throw InvalidArgument("latent dimension must be positive");
    if (!(delta > 0.0 && delta <= 1.0)) throw InvalidArgument("delta must lie in (0, 1]");
    const double logI = -static_cast<double>(Q) * std::log(delta);
    if (logI > std::log(9.0e18)) throw BudgetOverflow("floor(delta^-Q) exceeds the integer range", logI);
    const double v = std::exp(logI);
    const double r = std::round(v);
    return static_cast<std::uint64_t>(std::abs(v - r) <= 1e-9 * std::max(1.0, v) ? r : std::floor(v));
}

WeaveModel build_weave(const std::vector<Vec>& thetas, std::size_t Q, double delta, std::uint64_t seed, double R) {
    if (thetas.empty()) throw InvalidArgument("weaving needs at least one parameter vector");
    const std::size_t P = thetas.front().size();
    if (P == 0) throw InvalidArgument("parameter vectors must be nonempty");
    for (const auto& t : thetas) {
        if (t.size() != P) throw InvalidArgument("parameter vectors differ in length");
    }
    const std::size_t T = thetas.size();
    if (T > horizon_limit(Q, delta)) {
        throw InvalidArgument("horizon " + std::to_string(T) + " exceeds floor(delta^-Q) = " +
                              std::to_string(horizon_limit(Q, delta)));
    }
    if (!(delta < R)) throw InvalidArgument("delta must be smaller than R");

    WeaveModel w;
    w.P = P;
    w.Q = Q;
    w.T = T;
    w.delta = delta;
    w.R = R;
    w.seed = seed;
    w.M_T = scale_constant(thetas);
    w.packing = pack_ball(Q, R, delta, T, seed).points;
    for (std::size_t t = 0; t < T; ++t) {
        Vec z(P + Q);
        for (std::size_t i = 0; i < P; ++i) z[i] = thetas[t][i] / w.M_T;
        std::copy(w.packing[t].begin(), w.packing[t].end(), z.begin() + static_cast<std::ptrdiff_t>(P));
        w.codes.push_back(std::move(z));
    }
    w.z0 = w.codes.front();
    if (T == 1) {
        w.hyper = net::zeros({{P + Q, P + Q}, net::Activation::ReLU});
        std::copy(w.z0.begin(), w.z0.end(), w.hyper.theta.end() - static_cast<std::ptrdiff_t>(P + Q));
    } else {
        std::vector<Vec> xs(w.codes.begin(), w.codes.end() - 1);
        std::vector<Vec> ys(w.codes.begin() + 1, w.codes.end());
        w.hyper = memorize(xs, ys, seed).net;
    }
    return w;
}

Vec readout(const WeaveModel& w, const Vec& z) {
    if (z.size() != w.P + w.Q) throw InvalidArgument("latent code has the wrong length");
    Vec theta(w.P);
    for (std::size_t i = 0; i < w.P; ++i) theta[i] = w.M_T * z[i];
    return theta;
}

std::vector<Vec> rollout(const WeaveModel& w, std::size_t steps) {
    if (steps > w.T) throw InvalidArgument("rollout beyond the woven horizon");
    std::vector<Vec> out;
    Vec z = w.z0;
    for (std::size_t s = 0; s < steps; ++s) {
        out.push_back(readout(w, z));
        if (s + 1 < steps) z = net::forward(w.hyper, z);
    }
    return out;
}

double relative_error(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw InvalidArgument("relative error of vectors with different lengths");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    if (num == 0.0) return 0.0;
    return den == 0.0 ? std::numeric_limits<double>::infinity() : num / den;
}

double rollout_drift(const WeaveModel& w) {
    const auto r = rollout(w, w.T);
    double m = 0.0;
    for (std::size_t t = 0; t < w.T; ++t) m = std::max(m, relative_error(r[t], readout(w, w.codes[t])));
    return m;
}

Table2 table2_report(std::size_t P, std::size_t Q, double delta, std::size_t T) {
    if (P == 0) throw InvalidArgument("P must be positive");
    Table2 t;
    t.I = horizon_limit(Q, delta);
    if (T > t.I) throw InvalidArgument("horizon exceeds floor(delta^-Q)");
    t.width_bound = static_cast<std::uint64_t>(P + Q) * t.I + 12;
    const double I = static_cast<double>(t.I);
    const double PQ = static_cast<double>(P + Q);
    // log I vanishes at I = 1; the bracketed terms are dropped there.
    double core = 0.0;
    if (t.I > 1) {
        const double lI = std::log(I);
        const double Cd = static_cast<double>(t.width_bound);
        const double bracket =
            std::max(0.0, Cd + (std::log(I * I * std::sqrt(2.0)) - std::log(delta)) / std::log(2.0));
        core = std::sqrt(I * lI) * (1.0 + std::log(2.0) / lI * bracket);
    }
    t.depth_expr = I * (1.0 + core);
    t.params_expr = I * I * I * PQ * PQ * (1.0 + PQ * core);
    return t;
}

Table2 table2_report(const WeaveModel& w) {
    Table2 t = table2_report(w.P, w.Q, w.delta, w.T);
    t.width = hidden_width(w.hyper.spec);
    t.depth = w.hyper.spec.depth();
    t.params = w.hyper.theta.size();
    return t;
}

void write_weave(std::ostream& os, const WeaveModel& w) {
    binio::put_magic(os, kWeaveMagic);
    binio::put<std::uint32_t>(os, kWeaveVersion);
    binio::put<std::uint64_t>(os, w.P);
    binio::put<std::uint64_t>(os, w.Q);
    binio::put<std::uint64_t>(os, w.T);
    binio::put<double>(os, w.delta);
    binio::put<double>(os, w.R);
    binio::put<double>(os, w.M_T);
    binio::put<std::uint64_t>(os, w.seed);
    for (const auto& p : w.packing) {
        for (double v : p) binio::put<double>(os, v);
    }
    for (const auto& z : w.codes) {
        for (double v : z) binio::put<double>(os, v);
    }
    for (double v : w.z0) binio::put<double>(os, v);
    net::write_model(os, w.hyper);
    if (!os) throw IntegrityError("failed writing weave stream");
}

WeaveModel read_weave(std::istream& is) {
    binio::expect_magic(is, kWeaveMagic);
    const auto version = binio::get<std::uint32_t>(is);
    if (version != kWeaveVersion) throw IntegrityError("unsupported weave version " + std::to_string(version));
    WeaveModel w;
    w.P = binio::get<std::uint64_t>(is);
    w.Q = binio::get<std::uint64_t>(is);
    w.T = binio::get<std::uint64_t>(is);
    if (w.P == 0 || w.Q == 0 || w.T == 0 || w.P > (1u << 26) || w.Q > 4096 || w.T > (1u << 20)) {
        throw IntegrityError("implausible weave header");
    }
    w.delta = binio::get<double>(is);
    w.R = binio::get<double>(is);
    w.M_T = binio::get<double>(is);
    w.seed = binio::get<std::uint64_t>(is);
    w.packing.assign(w.T, Vec(w.Q));
    for (auto& p : w.packing) {
        for (auto& v : p) v = binio::get<double>(is);
    }
    w.codes.assign(w.T, Vec(w.P + w.Q));
    for (auto& z : w.codes) {
        for (auto& v : z) v = binio::get<double>(is);
    }
    w.z0.resize(w.P + w.Q);
    for (auto& v : w.z0) v = binio::get<double>(is);
    w.hyper = net::read_model(is);
    if (w.hyper.spec.in_dim() != w.P + w.Q || w.hyper.spec.out_dim() != w.P + w.Q) {
        throw IntegrityError("embedded hypernetwork does not act on the latent codes");
    }
    return w;
}

}  // namespace cno::weave
