// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

#include "cno/bench.hpp"
#include "cno/filter.hpp"
#include "cno/sde.hpp"
#include "cno/weave.hpp"
#include "helpers.hpp"

using namespace cno;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// --- 1 ---------------------------------------------------------------------

Outcome param_counts() {
    std::mt19937_64 rng(101);
    bool ok = net::param_count({{2, 3, 1}}) == 17 && net::Network{{{2, 3, 1}}, std::vector<double>(17)}.theta.size() == 17;
    for (int i = 0; i < 50; ++i) {
        const auto spec = testing::random_spec(rng, 6, 9, i % 2 ? net::Activation::PReLU : net::Activation::ReLU);
        // closed form against the length of the assembled vector
        std::size_t closed = spec.depth() + spec.dims.back();
        for (std::size_t j = 0; j < spec.depth(); ++j) closed += spec.dims[j] * (spec.dims[j + 1] + 1);
        const auto z = net::unpack(spec, std::vector<double>(closed, 0.0));
        const auto flat = net::pack(spec, z);
        ok = ok && net::param_count(spec) == closed && flat.size() == closed;
    }
    return {ok, "50 specs + (2,3,1)->17"};
}

// --- 2 ---------------------------------------------------------------------

Outcome padding() {
    std::mt19937_64 rng(102);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const auto act = i % 2 ? net::Activation::PReLU : net::Activation::ReLU;
        const auto a = testing::random_net(rng, testing::random_spec(rng, 4, 6, act));
        auto sb = testing::random_spec(rng, 6, 8, net::Activation::PReLU);
        sb.dims.front() = a.spec.in_dim();
        sb.dims.back() = a.spec.out_dim();
        const auto p = net::pad_to(a, net::dominating_dims({a.spec, sb}));
        for (int k = 0; k < 1000; ++k) {
            const auto x = testing::uniform(rng, a.spec.in_dim(), -3, 3);
            worst = std::max(worst, testing::max_abs_diff(net::forward(p, x), net::forward(a, x)));
        }
    }
    return {worst <= 1e-12, fmt("max discrepancy %.3g", worst)};
}

// --- 3 ---------------------------------------------------------------------

Outcome weaving() {
    std::mt19937_64 rng(103);
    double worst_rel = 0.0, worst_aspect = 0.0;
    bool sep_ok = true;
    for (std::size_t T : {4u, 16u, 64u}) {
        for (std::size_t P : {17u, 50u}) {
            for (std::size_t Q : {4u, 8u}) {
                const double delta = 0.95 * std::pow(static_cast<double>(T), -1.0 / static_cast<double>(Q));
                if (weave::horizon_limit(Q, delta) < T) return {false, "delta choice violates the horizon limit"};
                std::vector<weave::Vec> thetas;
                for (std::size_t t = 0; t < T; ++t) thetas.push_back(testing::uniform(rng, P, -2, 2));
                const auto w = weave::build_weave(thetas, Q, delta, T * 100 + P + Q, 1.0);
                const auto r = weave::rollout(w, T);
                for (std::size_t t = 0; t < T; ++t) worst_rel = std::max(worst_rel, weave::relative_error(r[t], thetas[t]));
                if (T > 1) {
                    const std::vector<weave::Vec> pk(w.packing.begin(), w.packing.end());
                    sep_ok = sep_ok && weave::min_separation(pk) > delta;
                    worst_aspect = std::max(worst_aspect, std::max(weave::aspect_ratio(pk), weave::aspect_ratio(w.codes)) * delta);
                }
            }
        }
    }
    const bool ok = worst_rel <= 1e-6 && sep_ok && worst_aspect <= std::sqrt(5.0);
    return {ok, fmt("max rel %.3g, max aspect*delta %.4f (<= %.4f)", worst_rel, worst_aspect, std::sqrt(5.0)) +
                    (sep_ok ? ", separated" : ", separation violated")};
}

// --- 4 ---------------------------------------------------------------------

Outcome memorization() {
    std::mt19937_64 rng(104);
    std::vector<weave::Vec> xs, ys;
    for (int i = 0; i < 32; ++i) {
        xs.push_back(testing::uniform(rng, 8));
        ys.push_back(testing::uniform(rng, 8, -3, 3));
    }
    const auto m = weave::memorize(xs, ys, 5);
    double worst = 0.0;
    for (int i = 0; i < 32; ++i) worst = std::max(worst, testing::max_abs_diff(net::forward(m.net, xs[i]), ys[i]));
    return {worst <= 1e-9, fmt("residual %.3g", worst)};
}

// --- 5 and 6 -----------------------------------------------------------------

double rel(const causal::Vec& a, const causal::Vec& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return num / std::max(den, 1e-300);
}

Outcome end_to_end(causal::Construction& out) {
    const bench::RecursiveTarget rt{8, bench::GKind::Mean};
    const auto ds = bench::recursive_dataset(rt, 256, 8, 105);
    causal::ConstructOptions o;
    o.hidden = {16};
    o.seed = 105;
    out = causal::construct_cno(ds, o);
    const auto& m = out.model;
    if (m.horizon() != 8) return {false, "horizon != 8"};

    const auto held = bench::recursive_dataset(rt, 100, 8, 106);
    double worst = 0.0;
    for (const auto& p : held.paths) {
        const auto y = causal::predict(m, p.x, 8);
        const auto s = causal::predict_with(m, out.stored, p.x, 8);
        for (std::size_t i = 0; i < 8; ++i) worst = std::max(worst, rel(y[i], s[i]));
    }
    std::mt19937_64 rng(107);
    std::size_t audits = 0;
    for (int k = 0; k < 100; ++k) {
        const auto& base = held.paths[k].x;
        const std::size_t i = 1 + k % 8;
        auto other = base;
        for (std::size_t t = i; t < other.size(); ++t) other[t] = testing::uniform(rng, 1, 0.0, 1.0);
        audits += causal::causality_audit(m, base, other, i) ? 1 : 0;
    }
    const bool ok = worst <= 1e-6 && audits == 100;
    return {ok, fmt("predict vs stored %.3g rel, audits %.0f/100", worst, static_cast<double>(audits)) +
                    (out.any_shortfall ? ", note: a window missed its gate" : "")};
}

Outcome split_soundness(const causal::Construction& c) {
    if (c.trained.empty()) return {false, "no trained filters (criterion 5 did not run)"};
    const auto& m = c.model;
    const bench::RecursiveTarget rt{8, bench::GKind::Mean};
    const auto samples_ds = bench::recursive_dataset(rt, 64, 8, 108);
    const auto in_space = spaces::SchauderSpace::euclidean(m.M * m.in_dim);
    std::size_t checks = 0, good = 0;
    double worst_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i <= c.trained.size(); ++i) {
        const auto f = filter::make_filter(in_space, m.out_space, c.trained[i - 1]);
        // window i sees the last M inputs with zeros before t_1; the mean cell keeps 0 at 0
        const filter::Operator target = [&](const filter::Element& x) {
            return filter::Element{spaces::Coefficients{{bench::eval_recursive({m.M, rt.G},
                                                                               std::get<spaces::Coefficients>(x).coords)},
                                                        0.0}};
        };
        std::vector<filter::Element> xs;
        for (const auto& p : samples_ds.paths) xs.push_back(spaces::Coefficients{causal::window_input(p.x, i, m.M, m.in_dim), 0.0});
        for (auto meas : {filter::Measure::Metric, filter::Measure::Norm}) {
            const auto s = filter::error_decomposition(target, f, xs, meas);
            ++checks;
            good += s.end_to_end <= s.sum() ? 1 : 0;
            worst_gap = std::max(worst_gap, s.end_to_end - s.sum());
        }
    }
    return {good == checks, fmt("%.0f/%.0f splits hold, max(e2e - sum) %.3g", static_cast<double>(good),
                                static_cast<double>(checks), worst_gap)};
}

// --- 7 ---------------------------------------------------------------------

double g_fn(double u) { return std::pow(u, 4) * std::log(u + 2.0) / std::log(3.0); }

Outcome special_laws() {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    double worst = std::abs(filter::special_V(1.0) - 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double y = 100.0 * i / 999.0;
        worst = std::max(worst, std::abs(g_fn(filter::special_V(y)) - y));
        worst = std::max(worst, std::abs(filter::special_V(g_fn(y)) - y));
    }
    worst = std::max(worst, std::abs(g_fn(filter::special_V(1.0)) - 1.0));

    std::mt19937_64 rng(109);
    std::vector<double> grid;
    for (int i = 0; i <= 2000; ++i) grid.push_back(i * 1e-3);
    std::size_t bad = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto jumps = testing::uniform(rng, 6, 0.0, 2.0);
        std::sort(jumps.begin(), jumps.end());
        const auto heights = testing::uniform(rng, 6, 0.0, 1.0);
        const auto t = filter::tabulate(
            [&](double x) {
                double v = 0.0;
                for (std::size_t k = 0; k < jumps.size(); ++k) v += x >= jumps[k] ? heights[k] : 0.0;
                return v;
            },
            grid, trial % 2 == 1);
        const auto brute = [&](double y) {
            for (std::size_t i = 0; i < t.xs.size(); ++i)
                if (t.ys[i] >= y) return (i == 0 && t.extends_below) ? -kInf : t.xs[i];
            return kInf;
        };
        double prev = -kInf;
        for (int i = 0; i <= 400; ++i) {
            const double y = -0.5 + 5.0 * i / 400.0;
            const double v = filter::generalized_inverse(t, y);
            if (v != brute(y) || v < prev) ++bad;  // oracle match and monotonicity
            prev = v;
        }
        for (std::size_t i = 0; i < grid.size(); i += 7)
            if (filter::generalized_inverse(t, t.ys[i]) > grid[i]) ++bad;  // T^-1(T(x)) <= x
    }
    return {worst <= 1e-8 && bad == 0, fmt("V residual %.3g, %.0f law violations", worst, static_cast<double>(bad))};
}

// --- 8 ---------------------------------------------------------------------

Outcome gradients() {
    std::mt19937_64 rng(110);
    int checked = 0;
    double worst = 0.0;
    while (checked < 200) {
        const auto act = checked % 2 ? net::Activation::PReLU : net::Activation::ReLU;
        const auto spec = testing::random_spec(rng, 4, 6, act);
        const auto n = testing::random_net(rng, spec);
        const auto x = testing::uniform(rng, spec.in_dim());
        if (net::min_abs_preactivation(n, x) < 1e-3) continue;
        const auto up = testing::uniform(rng, spec.out_dim());
        const auto g = net::grad(n, x, up);
        const double h = 1e-6;
        std::vector<double> fd(n.theta.size());
        for (std::size_t i = 0; i < fd.size(); ++i) {
            auto p = n, q = n;
            p.theta[i] += h;
            q.theta[i] -= h;
            const auto fp = net::forward(p, x), fq = net::forward(q, x);
            double s = 0.0;
            for (std::size_t k = 0; k < up.size(); ++k) s += up[k] * (fp[k] - fq[k]);
            fd[i] = s / (2 * h);
        }
        double scale = 0.0;
        for (double v : fd) scale = std::max(scale, std::abs(v));
        if (scale > 0.0) worst = std::max(worst, testing::max_abs_diff(g.theta, fd) / scale);
        ++checked;
    }
    return {worst <= 1e-5, fmt("max relative deviation %.3g over 200 cases", worst)};
}

// --- 9 ---------------------------------------------------------------------

Outcome sde_pipeline() {
    sde::SdeBenchOptions o;
    o.windows = 4;
    o.dt = 0.25;
    o.oracle.n_paths = 20000;
    o.train.n_modes = 8;
    const auto r = sde::run_sde_bench(sde::ornstein_uhlenbeck(1.0, 0.5), o);
    std::ostringstream d;
    d << "ito " << (r.ito.within ? "ok" : "out") << ", lipschitz " << (r.lipschitz.within ? "ok" : "out") << ", windows";
    for (const auto& w : r.windows) d << " " << fmt("%.4f/%.4f", w.test_error, w.gate);
    return {r.ito.within && r.lipschitz.within && r.all_within, d.str()};
}

// --- 10 --------------------------------------------------------------------

Outcome budgets() {
    bool ok = true;
    struct H {
        double alpha;
        std::size_t n_in, n_out;
        double lambda, eps_A;
        std::uint64_t width, depth;
    };
    for (const auto& c : {H{1.0, 2, 2, 1.0, 0.1, 433757, 39272}, H{0.5, 1, 1, 0.01, 0.5, 567, 76},
                          H{1.0, 1, 1, 1.0 / 131.0, 1.0, 243, 32}, H{0.75, 3, 2, 0.02, 0.3, 1133598, 51324}}) {
        filter::BudgetInput b;
        b.regularity = spaces::Holder{c.alpha};
        b.n_in = c.n_in;
        b.n_out = c.n_out;
        b.lambda = c.lambda;
        b.eps_A = c.eps_A;
        const auto r = filter::budget(b);
        ok = ok && r.width == c.width && r.depth == c.depth;
    }
    struct S {
        int k;
        std::size_t n_in, n_out;
        double C_f, eps_A;
        std::uint64_t width, depth;
    };
    for (const auto& c : {S{1, 1, 1, 1.0, 0.1, 381034, 101546}, S{2, 2, 3, 2.0, 0.2, 14147490, 934043},
                          S{1, 3, 1, 0.5, 0.05, 86774717, 907950}}) {
        filter::BudgetInput b;
        b.regularity = spaces::Smooth{c.k};
        b.n_in = c.n_in;
        b.n_out = c.n_out;
        b.C_f = c.C_f;
        b.eps_A = c.eps_A;
        const auto r = filter::budget(b);
        ok = ok && r.width == c.width && r.depth == c.depth;
    }
    struct W {
        std::size_t P, Q;
        double delta;
        std::uint64_t I, width;
    };
    for (const auto& c : {W{17, 4, 0.5, 16, 348}, W{50, 8, 0.7, 17, 998}, W{103, 4, 0.5, 16, 1724},
                          W{10, 2, 0.3, 11, 144}, W{1, 1, 0.9, 1, 14}}) {
        const auto t = weave::table2_report(c.P, c.Q, c.delta, 1);
        ok = ok && t.I == c.I && t.width_bound == c.width;
    }
    return {ok, "4 Holder, 3 smooth, 5 weaving tuples"};
}

// --- 11 --------------------------------------------------------------------

Outcome tradeoff() {
    const std::vector<bench::ModelConfig> ladder{{bench::ModelKind::FFNN, {8, 8}, ""},
                                                 {bench::ModelKind::FFNN, {16, 16}, ""},
                                                 {bench::ModelKind::FFNN, {32, 32}, ""},
                                                 {bench::ModelKind::FFNN, {64, 64}, ""},
                                                 {bench::ModelKind::CNO, {4}, ""},
                                                 {bench::ModelKind::CNO, {8}, ""}};
    const auto r = bench::compare({6, bench::GKind::Mean}, ladder, bench::CompareOptions{});
    const auto v = bench::direction_verdict(r);
    std::ostringstream d;
    d << "[directional] best cno " << v.best_cno << " (" << v.best_cno_params << " params, median " << v.best_cno_err
      << ") vs " << (v.ffnn.empty() ? "no ffnn with >= params" : v.ffnn) << " (" << v.ffnn_params << " params, median "
      << v.ffnn_err << ")";
    if (!v.pass) {
        d << "\n";
        bench::write_csv(d, r);
    }
    return {v.pass, d.str()};
}

}  // namespace

int main() {
    causal::Construction built;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 parameter counts", param_counts},
        {"2 padding neutrality", padding},
        {"3 weaving exactness", weaving},
        {"4 memorization", memorization},
        {"5 CNO end-to-end", [&] { return end_to_end(built); }},
        {"6 error split soundness", [&] { return split_soundness(built); }},
        {"7 V and generalized inverse", special_laws},
        {"8 gradient correctness", gradients},
        {"9 SDE pipeline", sde_pipeline},
        {"10 budget calculators", budgets},
        {"11 trade-off direction", tradeoff},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << fmt("%.2f s", secs) << "): " << o.detail << std::endl;
    }
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << std::endl;
    return failed ? 1 : 0;
}
