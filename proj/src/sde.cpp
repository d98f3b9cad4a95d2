#include "cno/sde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace cno::sde {

SdeCoeffs zero_coeffs() {
    return {[](double, double) { return 0.0; }, [](double, double) { return 0.0; }, 1.0, "zero"};
}

SdeCoeffs constant_drift(double a) {
    return {[a](double, double) { return a; }, [](double, double) { return 0.0; }, std::max(1.0, std::abs(a)),
            "constant_drift"};
}

SdeCoeffs ornstein_uhlenbeck(double theta, double sigma) {
    return {[theta](double, double x) { return -theta * x; }, [sigma](double, double) { return sigma; },
            std::max(std::abs(theta), std::abs(sigma)), "ornstein_uhlenbeck"};
}

Vec ChaosCoords::flat() const {
    Vec v{mean};
    v.insert(v.end(), coeffs.begin(), coeffs.end());
    return v;
}

ChaosCoords ChaosCoords::from_flat(const Vec& v, double horizon) {
    if (v.empty()) throw InvalidArgument("chaos coordinates need at least the mean");
    return {v.front(), Vec(v.begin() + 1, v.end()), horizon};
}

std::size_t BrownianRecord::steps_to(double t) const {
    const double n = t / dt;
    const double r = std::round(n);
    if (!(t >= 0.0) || std::abs(n - r) > 1e-9 * std::max(1.0, n)) {
        throw InvalidArgument("time " + std::to_string(t) + " is not on the Brownian record grid");
    }
    if (static_cast<std::size_t>(r) > n_steps) throw InvalidArgument("time beyond the Brownian record");
    return static_cast<std::size_t>(r);
}

BrownianRecord record_brownian(const McOracle& o, double horizon) {
    if (o.n_paths < 2) throw InvalidArgument("Monte Carlo needs at least two paths");
    if (!(o.dt > 0.0) || !(horizon > 0.0)) throw InvalidArgument("dt and horizon must be positive");
    BrownianRecord r;
    r.dt = o.dt;
    r.n_paths = o.n_paths;
    r.n_steps = static_cast<std::size_t>(std::llround(horizon / o.dt));
    if (std::abs(static_cast<double>(r.n_steps) * o.dt - horizon) > 1e-9 * horizon) {
        throw InvalidArgument("horizon must be a multiple of dt");
    }
    r.dB.resize(r.n_paths * r.n_steps);
    // Fixed-size blocks with their own streams keep the record independent of
    // how it is later partitioned.
    constexpr std::size_t kBlock = 1024;
    const double sd = std::sqrt(o.dt);
    for (std::size_t b0 = 0; b0 < r.n_paths; b0 += kBlock) {
        std::mt19937_64 rng(o.seed * 0x100000001b3ULL + b0 / kBlock);
        std::normal_distribution<double> gauss(0.0, sd);
        const std::size_t b1 = std::min(r.n_paths, b0 + kBlock);
        for (std::size_t i = b0 * r.n_steps; i < b1 * r.n_steps; ++i) r.dB[i] = gauss(rng);
    }
    return r;
}

ChaosBasis chaos_basis(const BrownianRecord& rec, double t, std::size_t n_modes) {
    const std::size_t n = rec.steps_to(t);
    if (n == 0) throw InvalidArgument("chaos basis needs a positive horizon");
    if (n_modes >= n) {
        throw InvalidArgument("mode count " + std::to_string(n_modes) + " exceeds the increment resolution on [0, " +
                              std::to_string(t) + "]");
    }
    ChaosBasis b;
    b.horizon = t;
    b.I.assign(n_modes, Vec(rec.n_paths, 0.0));
    const double scale = std::sqrt(2.0 / t);
    for (std::size_t k = 1; k <= n_modes; ++k) {
        Vec f(n);
        for (std::size_t j = 0; j < n; ++j) {
            f[j] = scale * std::sin(static_cast<double>(k) * std::numbers::pi * static_cast<double>(j) /
                                    static_cast<double>(n));
        }
        auto& I = b.I[k - 1];
        for (std::size_t p = 0; p < rec.n_paths; ++p) {
            const double* dB = rec.dB.data() + p * rec.n_steps;
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += f[j] * dB[j];
            I[p] = acc;
        }
    }
    return b;
}

Vec synthesize(const ChaosCoords& eta, const ChaosBasis& basis) {
    if (eta.coeffs.size() > basis.I.size()) throw InvalidArgument("more chaos coefficients than basis modes");
    if (!eta.coeffs.empty() && std::abs(eta.horizon - basis.horizon) > 1e-12) {
        throw InvalidArgument("chaos coordinates and basis use different horizons");
    }
    const std::size_t S = basis.I.empty() ? 0 : basis.I.front().size();
    if (S == 0) throw InvalidArgument("empty chaos basis");
    Vec v(S, eta.mean);
    for (std::size_t k = 0; k < eta.coeffs.size(); ++k) {
        const double c = eta.coeffs[k];
        const auto& I = basis.I[k];
        for (std::size_t p = 0; p < S; ++p) v[p] += c * I[p];
    }
    return v;
}

Vec sde_solve_mc(const SdeCoeffs& c, const Vec& eta_samples, double t0, double t1, const BrownianRecord& rec,
                 bool tamed) {
    if (!(t1 > t0)) throw InvalidArgument("SDE solve needs t0 < t1");
    if (eta_samples.size() != rec.n_paths) throw InvalidArgument("initial samples do not match the record");
    const std::size_t j0 = rec.steps_to(t0);
    const std::size_t j1 = rec.steps_to(t1);
    Vec x = eta_samples;
    const double dt = rec.dt;
    for (std::size_t j = j0; j < j1; ++j) {
        const double t = static_cast<double>(j) * dt;
        bool finite = true;
        for (std::size_t p = 0; p < rec.n_paths; ++p) {
            const double a = c.drift(t, x[p]);
            const double b = c.diffusion(t, x[p]);
            const double inc = tamed ? a * dt / (1.0 + dt * std::abs(a)) : a * dt;
            x[p] += inc + b * rec.dB[p * rec.n_steps + j];
            finite = finite && std::isfinite(x[p]);
        }
        if (!finite) throw OracleDiverged("Euler scheme produced a non-finite value", j - j0);
    }
    return x;
}

Vec sde_solve_mc(const SdeCoeffs& c, const ChaosCoords& eta, double t0, double t1, const BrownianRecord& rec,
                 bool tamed) {
    const auto basis = chaos_basis(rec, eta.horizon, eta.coeffs.size());
    return sde_solve_mc(c, synthesize(eta, basis), t0, t1, rec, tamed);
}

Projection project_chaos(const Vec& samples, const ChaosBasis& basis, std::size_t n_modes) {
    if (n_modes > basis.I.size()) throw InvalidArgument("mode count exceeds the chaos basis");
    const std::size_t S = samples.size();
    if (S < 2 || (!basis.I.empty() && basis.I.front().size() != S)) {
        throw InvalidArgument("samples do not match the Brownian record");
    }
    const double Sd = static_cast<double>(S);
    Projection pr;
    pr.coords.horizon = basis.horizon;
    double mean = 0.0;
    for (double y : samples) mean += y;
    mean /= Sd;
    pr.coords.mean = mean;
    Vec resid(S);
    for (std::size_t p = 0; p < S; ++p) resid[p] = samples[p] - mean;
    double var = 0.0;
    for (double r : resid) var += r * r;
    pr.mean_se = std::sqrt(var / (Sd - 1.0) / Sd);

    for (std::size_t k = 0; k < n_modes; ++k) {
        const auto& I = basis.I[k];
        double num = 0.0;
        double den = 0.0;
        for (std::size_t p = 0; p < S; ++p) {
            num += (samples[p] - mean) * I[p];
            den += I[p] * I[p];
        }
        const double ck = num / den;
        double m2 = 0.0;
        const double mprod = num / Sd;
        for (std::size_t p = 0; p < S; ++p) {
            const double v = (samples[p] - mean) * I[p] - mprod;
            m2 += v * v;
        }
        pr.coords.coeffs.push_back(ck);
        pr.coeff_se.push_back(std::sqrt(m2 / (Sd - 1.0) / Sd) / (den / Sd));
        for (std::size_t p = 0; p < S; ++p) resid[p] -= ck * I[p];
    }
    double rr = 0.0;
    for (double r : resid) rr += r * r;
    pr.residual = std::sqrt(rr / Sd);
    return pr;
}

Projection project_chaos(const Vec& samples, const BrownianRecord& rec, double t, std::size_t n_modes) {
    return project_chaos(samples, chaos_basis(rec, t, n_modes), n_modes);
}

MomentCheck ito_isometry_check(const ChaosCoords& eta, const ChaosBasis& basis) {
    const Vec v = synthesize(eta, basis);
    const double S = static_cast<double>(v.size());
    double m = 0.0;
    for (double a : v) m += a * a;
    m /= S;
    double var = 0.0;
    for (double a : v) var += (a * a - m) * (a * a - m);
    MomentCheck out;
    out.mc = m;
    out.se = std::sqrt(var / (S - 1.0) / S);
    out.exact = eta.mean * eta.mean;
    for (double c : eta.coeffs) out.exact += c * c;
    out.within = std::abs(out.mc - out.exact) <= 3.0 * out.se;
    return out;
}

double l2_norm(const Vec& samples) {
    double s = 0.0;
    for (double a : samples) s += a * a;
    return std::sqrt(s / static_cast<double>(samples.size()));
}

double l2_distance(const Vec& a, const Vec& b) {
    if (a.size() != b.size() || a.empty()) throw InvalidArgument("L2 distance of mismatched sample sets");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(a.size()));
}

double lipschitz_bound(double M_g, double delta_plus) {
    return std::sqrt(3.0) * std::exp(1.5 * M_g * M_g * (delta_plus + 1.0) * delta_plus);
}

LipschitzResult lipschitz_check(const SdeCoeffs& c, const std::vector<std::pair<ChaosCoords, ChaosCoords>>& pairs,
                                double t0, double t1, const BrownianRecord& rec, bool tamed) {
    LipschitzResult out;
    out.bound = lipschitz_bound(c.M_g, t1 - t0);
    for (const auto& [a, b] : pairs) {
        const std::size_t modes = std::max(a.coeffs.size(), b.coeffs.size());
        if (std::abs(a.horizon - b.horizon) > 1e-12) throw InvalidArgument("pair lives on different horizons");
        const auto basis = chaos_basis(rec, a.horizon, modes);
        const Vec ea = synthesize(a, basis);
        const Vec eb = synthesize(b, basis);
        const double din = l2_distance(ea, eb);
        if (din == 0.0) continue;
        const Vec xa = sde_solve_mc(c, ea, t0, t1, rec, tamed);
        const Vec xb = sde_solve_mc(c, eb, t0, t1, rec, tamed);
        out.max_ratio = std::max(out.max_ratio, l2_distance(xa, xb) / din);
        ++out.pairs_used;
    }
    out.within = out.max_ratio <= out.bound;
    return out;
}

SdeDataset build_sde_dataset(const SdeCoeffs& c, const causal::TimeGrid& grid, const BrownianRecord& rec, bool tamed,
                             const SdeDatasetOptions& opts) {
    causal::validate(grid);
    const std::size_t I = grid.steps() - 1;
    if (I == 0) throw InvalidArgument("SDE dataset needs a grid with at least two steps");
    if (opts.n_orbits == 0) throw InvalidArgument("SDE dataset needs orbits");
    const auto& t = grid.times;

    std::vector<ChaosBasis> bases(t.size());
    for (std::size_t i = 1; i < t.size(); ++i) bases[i] = chaos_basis(rec, t[i], opts.n_modes);

    SdeDataset out;
    out.sde_times = t;
    auto& ds = out.ds;
    for (std::size_t i = 1; i < t.size(); ++i) ds.grid.times.push_back(t[i] - t[1]);
    ds.M = 1;
    ds.in_dim = opts.n_modes + 1;
    ds.n_out = opts.n_modes + 1;
    ds.out_space = spaces::SchauderSpace::chaos_l2(opts.n_modes, t.back());

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> umean(opts.init.mean_lo, opts.init.mean_hi);
    std::uniform_real_distribution<double> ucoef(-opts.init.coeff_abs, opts.init.coeff_abs);
    for (std::size_t o = 0; o < opts.n_orbits; ++o) {
        ChaosCoords eta{umean(rng), Vec(opts.n_modes), t[1]};
        for (auto& v : eta.coeffs) v = ucoef(rng);
        causal::PathSample path;
        for (std::size_t i = 1; i <= I; ++i) {
            path.x.push_back(eta.flat());
            const Vec x = sde_solve_mc(c, synthesize(eta, bases[i]), t[i], t[i + 1], rec, tamed);
            const auto pr = project_chaos(x, bases[i + 1], opts.n_modes);
            path.y.push_back(pr.coords.flat());
            path.residual.push_back(pr.residual);
            eta = pr.coords;
        }
        ds.paths.push_back(std::move(path));
    }
    causal::validate(ds);
    return out;
}

causal::ConstructOptions sde_construct_defaults() {
    causal::ConstructOptions o;
    o.hidden = {32};
    o.train.epochs = 400;
    return o;
}

SdeBenchResult run_sde_bench(const SdeCoeffs& c, const SdeBenchOptions& opts) {
    if (opts.windows == 0 || !(opts.dt > 0.0)) throw InvalidArgument("SDE bench needs windows >= 1 and dt > 0");
    const auto grid = causal::uniform_grid(opts.windows + 1, opts.dt);
    const double horizon = grid.times.back();
    const auto rec = record_brownian(opts.oracle, horizon);

    SdeBenchResult out;
    out.sde_times = grid.times;
    out.train_data = build_sde_dataset(c, grid, rec, opts.oracle.tamed, opts.train);
    auto test_opts = opts.train;
    test_opts.n_orbits = opts.n_test_orbits;
    test_opts.seed = opts.test_seed;
    out.test_data = build_sde_dataset(c, grid, rec, opts.oracle.tamed, test_opts);
    const auto& train = out.train_data;
    const auto& test = out.test_data;

    out.built = causal::construct_cno(train.ds, opts.construct);
    const auto& m = out.built.model;
    const auto filters = causal::rollout_filters(m, m.horizon());
    out.windows.resize(m.horizon());
    for (std::size_t k = 0; k < m.horizon(); ++k) {
        auto& w = out.windows[k];
        w.index = k + 1;
        w.train_error = out.built.windows[k].train_error;
        w.gate = out.built.windows[k].gate;
    }
    for (const auto& p : test.ds.paths) {
        const auto y = causal::predict_with(m, filters, p.x, m.horizon());
        for (std::size_t k = 0; k < y.size(); ++k) {
            auto& w = out.windows[k];
            w.test_error = std::max(w.test_error, causal::target_distance(m.out_space, y[k], p.y[k], p.residual[k],
                                                                          filter::Measure::Norm));
            w.max_residual = std::max(w.max_residual, p.residual[k]);
        }
    }
    out.all_within = true;
    for (auto& w : out.windows) {
        w.within = w.test_error <= w.gate;
        out.all_within = out.all_within && w.within;
    }

    const double t1 = grid.times[1];
    std::mt19937_64 rng(opts.test_seed ^ 0x5deece66dULL);
    std::uniform_real_distribution<double> umean(opts.train.init.mean_lo, opts.train.init.mean_hi);
    std::uniform_real_distribution<double> ucoef(-opts.train.init.coeff_abs, opts.train.init.coeff_abs);
    auto draw = [&]() {
        ChaosCoords e{umean(rng), Vec(opts.train.n_modes), t1};
        for (auto& v : e.coeffs) v = ucoef(rng);
        return e;
    };
    out.ito = ito_isometry_check(draw(), chaos_basis(rec, t1, opts.train.n_modes));
    std::vector<std::pair<ChaosCoords, ChaosCoords>> pairs;
    for (std::size_t i = 0; i < opts.lipschitz_pairs; ++i) {
        auto a = draw();
        auto b = draw();
        pairs.emplace_back(std::move(a), std::move(b));
    }
    out.lipschitz = lipschitz_check(c, pairs, t1, grid.times[2], rec, opts.oracle.tamed);
    return out;
}

}  // namespace cno::sde
