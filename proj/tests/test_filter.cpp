#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "cno/filter.hpp"
#include "helpers.hpp"

using namespace cno::filter;
using cno::spaces::Coefficients;
using cno::spaces::Holder;
using cno::spaces::Smooth;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double g(double u) { return std::pow(u, 4) * std::log(u + 2.0) / std::log(3.0); }

Element coeffs(std::vector<double> v) { return Coefficients{std::move(v), 0.0}; }
std::vector<double> coords_of(const Element& e) { return std::get<Coefficients>(e).coords; }

cno::net::Network identity_core(std::size_t n) {
    cno::net::Network net = cno::net::zeros({{n, n}, cno::net::Activation::PReLU});
    auto u = cno::net::unpack(net.spec, net.theta);
    for (std::size_t i = 0; i < n; ++i) u.layers[0].at(i, i) = 1.0;
    u.layers[0].alpha = 1.0;
    net.theta = cno::net::pack(net.spec, u);
    return net;
}

// Linear scan for the first grid point with T(x) >= y.
double brute_inverse(const MonotoneTable& t, double y) {
    for (std::size_t i = 0; i < t.xs.size(); ++i) {
        if (t.ys[i] >= y) return (i == 0 && t.extends_below) ? -kInf : t.xs[i];
    }
    return kInf;
}

BudgetInput holder_in(double alpha, std::size_t n_in, std::size_t n_out, double lambda, double eps_A) {
    BudgetInput b;
    b.regularity = Holder{alpha};
    b.n_in = n_in;
    b.n_out = n_out;
    b.lambda = lambda;
    b.eps_A = eps_A;
    return b;
}

BudgetInput smooth_in(int k, std::size_t n_in, std::size_t n_out, double C_f, double eps_A) {
    BudgetInput b;
    b.regularity = Smooth{k};
    b.n_in = n_in;
    b.n_out = n_out;
    b.C_f = C_f;
    b.eps_A = eps_A;
    return b;
}

}  // namespace

TEST_CASE("filter_forward: identity and zero cores") {
    const auto e3 = SchauderSpace::euclidean(3);
    const auto id = make_filter(e3, e3, identity_core(3));
    CHECK(coords_of(filter_forward(id, coeffs({1.5, -2, 0.25}))) == std::vector<double>{1.5, -2, 0.25});

    const auto ws = SchauderSpace::weighted_sequence();
    const auto z = make_filter(e3, ws, cno::net::zeros({{3, 4, 2}}));
    CHECK(coords_of(filter_forward(z, coeffs({1, 2, 3}))) == std::vector<double>{0, 0});

    CHECK_THROWS_AS(make_filter(e3, e3, cno::net::zeros({{4, 3}})), cno::InvalidArgument);
}

TEST_CASE("property: Euclidean filters are their cores") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 30; ++i) {
        auto spec = testing::random_spec(rng, 3, 5);
        const auto net = testing::random_net(rng, spec);
        const auto f = make_filter(SchauderSpace::euclidean(spec.in_dim()), SchauderSpace::euclidean(spec.out_dim()), net);
        const auto x = testing::uniform(rng, spec.in_dim());
        CHECK(coords_of(filter_forward(f, coeffs(x))) == cno::net::forward(net, x));
    }
}

TEST_CASE("special_V examples") {
    CHECK(special_V(0.0) == 0.0);
    CHECK(special_V(1.0) == 1.0);
    // 30-digit bisection oracle
    CHECK(special_V(100.0) == doctest::Approx(2.88486576638789381675718).epsilon(1e-14));
    CHECK(std::abs(g(special_V(100.0)) - 100.0) <= 1e-10);
    CHECK_THROWS_AS(special_V(-1.0), cno::InvalidArgument);
}

TEST_CASE("property: special_V is a two-sided inverse on [0, 100]") {
    for (int i = 0; i <= 1000; ++i) {
        const double y = 100.0 * i / 1000.0;
        CHECK(std::abs(g(special_V(y)) - y) <= 1e-8);
        CHECK(std::abs(special_V(g(y)) - y) <= 1e-8);
    }
}

TEST_CASE("special_V_log agrees with special_V and extends it") {
    for (double y : {0.5, 1.0, 7.0, 1e6, 1e200}) {
        CHECK(special_V_log(std::log(y)) == doctest::Approx(std::log(special_V(y))).epsilon(1e-12));
    }
    const double l = special_V_log(5000.0);
    CHECK(4 * l + std::log(l) - std::log(std::log(3.0)) == doctest::Approx(5000.0).epsilon(1e-12));
}

TEST_CASE("generalized_inverse examples") {
    std::vector<double> xs;
    for (int i = 0; i <= 4000; ++i) xs.push_back(-2.0 + i * 1e-3);
    const auto id = tabulate([](double x) { return x; }, xs);
    for (double y : {-1.5, 0.0, 0.731}) {
        const double v = generalized_inverse(id, y);
        CHECK(v >= y);
        CHECK(v - y <= 1e-3 + 1e-12);
    }

    const auto fl = tabulate([](double x) { return std::floor(x); }, xs);
    CHECK(generalized_inverse(fl, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(generalized_inverse(fl, 5.0) == kInf);
    const auto below = tabulate([](double x) { return std::floor(x); }, xs, true);
    CHECK(generalized_inverse(below, -10.0) == -kInf);

    CHECK_THROWS_AS(generalized_inverse({{0, 1, 2}, {0, 2, 1}}, 1.0), cno::InvalidArgument);
    CHECK_THROWS_AS(generalized_inverse({{0, 0, 2}, {0, 1, 2}}, 1.0), cno::InvalidArgument);
}

TEST_CASE("property: generalized inverse laws on random step functions") {
    std::mt19937_64 rng(32);
    std::vector<double> xs;
    for (int i = 0; i <= 2000; ++i) xs.push_back(i * 1e-3);
    for (int trial = 0; trial < 100; ++trial) {
        auto jumps = testing::uniform(rng, 6, 0.0, 2.0);
        std::sort(jumps.begin(), jumps.end());
        const auto heights = testing::uniform(rng, 6, 0.0, 1.0);
        const auto T = [&](double x) {
            double v = 0.0;
            for (std::size_t k = 0; k < jumps.size(); ++k) v += x >= jumps[k] ? heights[k] : 0.0;
            return v;
        };
        const auto t = tabulate(T, xs, trial % 2 == 1);
        double prev = -kInf;
        for (int i = 0; i <= 400; ++i) {
            const double y = -0.5 + 5.0 * i / 400.0;
            const double v = generalized_inverse(t, y);
            CHECK(v == brute_inverse(t, y));
            CHECK(v >= prev);
            prev = v;
        }
        for (std::size_t i = 0; i < xs.size(); i += 37) CHECK(generalized_inverse(t, t.ys[i]) <= xs[i]);
    }
}

TEST_CASE("fit_modulus and its dagger") {
    const auto m = fit_modulus({{0.3, 0.1}, {0.1, 0.2}, {0.3, 0.05}, {0.5, 0.15}});
    CHECK(m.xs == std::vector<double>{0.1, 0.3, 0.5});
    CHECK(m.ys == std::vector<double>{0.2, 0.2, 0.2});
    const auto d = modulus_dagger(m);
    CHECK(d(0.1) == 0.1);
    CHECK(d(0.9) == 0.5);
    CHECK_THROWS_AS(fit_modulus({}), cno::InvalidArgument);
}

TEST_CASE("Holder budgets: hand-evaluated tuples") {
    struct Case {
        double alpha;
        std::size_t n_in, n_out;
        double lambda, eps_A;
        std::uint64_t width, depth;
    };
    // Frozen from a 60-digit evaluation of the closed forms.
    const Case cases[] = {{1.0, 2, 2, 1.0, 0.1, 433757, 39272},
                          {0.5, 1, 1, 0.01, 0.5, 567, 76},
                          {1.0, 1, 1, 1.0 / 131.0, 1.0, 243, 32},
                          {0.75, 3, 2, 0.02, 0.3, 1133598, 51324}};
    for (const auto& c : cases) {
        const auto b = budget_holder(holder_in(c.alpha, c.n_in, c.n_out, c.lambda, c.eps_A));
        CHECK(b.width == c.width);
        CHECK(b.depth == c.depth);
    }
    const auto one = budget_holder(holder_in(1.0, 1, 1, 1.0 / 131.0, 1.0));
    CHECK(one.inner == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(one.depth == 1 * (1 + 11 + 20));
    CHECK(one.C1 == 81.0);
    CHECK(one.C2 == 20.0);
}

TEST_CASE("smooth budgets: hand-evaluated tuples") {
    struct Case {
        int k;
        std::size_t n_in, n_out;
        double C_f, eps_A;
        std::uint64_t width, depth;
    };
    const Case cases[] = {{1, 1, 1, 1.0, 0.1, 381034, 101546},
                          {2, 2, 3, 2.0, 0.2, 14147490, 934043},
                          {1, 3, 1, 0.5, 0.05, 86774717, 907950}};
    for (const auto& c : cases) {
        const auto b = budget_smooth(smooth_in(c.k, c.n_in, c.n_out, c.C_f, c.eps_A));
        CHECK(b.width == c.width);
        CHECK(b.depth == c.depth);
    }
    // C3 C_f = 1 and a unit modulus give an inner term of 1: width 3 log2(8) C1.
    const auto unit = budget_smooth(smooth_in(1, 1, 1, 1.0 / 1360.0, 1.0));
    CHECK(unit.C3 == 1360.0);
    CHECK(unit.inner == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(unit.width == static_cast<std::uint64_t>(9 * unit.C1));

    const auto k1 = budget_smooth(smooth_in(1, 2, 1, 1.0, 0.5));
    const auto k2 = budget_smooth(smooth_in(2, 2, 1, 1.0, 0.5));
    CHECK(k2.C2 == 4 * k1.C2);
}

TEST_CASE("budgets reject bad input and overflow in log space") {
    CHECK_THROWS_AS(budget_holder(holder_in(1.5, 1, 1, 1, 0.1)), cno::InvalidArgument);
    CHECK_THROWS_AS(budget_holder(smooth_in(1, 1, 1, 1, 0.1)), cno::InvalidArgument);
    CHECK_THROWS_AS(budget(holder_in(1, 1, 1, 1, 0.0)), cno::InvalidArgument);
    try {
        budget(holder_in(0.1, 40, 40, 1, 1e-3));
        FAIL("expected overflow");
    } catch (const cno::BudgetOverflow& e) {
        CHECK(e.log_value() > std::log(9e18));
    }
}

TEST_CASE("property: budgets are monotone") {
    for (const auto& base : {holder_in(0.8, 2, 2, 0.5, 0.5), smooth_in(2, 2, 2, 1.0, 0.5)}) {
        auto prev = budget(base);
        for (double eps : {0.4, 0.3, 0.2, 0.1, 0.05}) {
            auto b = base;
            b.eps_A = eps;
            const auto cur = budget(b);
            CHECK(cur.width >= prev.width);
            CHECK(cur.depth >= prev.depth);
            prev = cur;
        }
        for (double eps_D : {0.5, 0.1, 0.01}) {
            auto b = base;
            b.eps_D = eps_D;
            CHECK(budget(b).width == budget(base).width);
        }
        for (std::size_t n = 1; n <= 3; ++n) {
            auto lo = base, hi = base;
            lo.n_in = n;
            hi.n_in = n + 1;
            CHECK(budget(hi).width >= budget(lo).width);
            CHECK(budget(hi).depth >= budget(lo).depth);
            lo = base;
            hi = base;
            lo.n_out = n;
            hi.n_out = n + 1;
            CHECK(budget(hi).width >= budget(lo).width);
            CHECK(budget(hi).depth >= budget(lo).depth);
        }
    }
}

TEST_CASE("error_decomposition examples") {
    const auto e3 = SchauderSpace::euclidean(3);
    const auto id = make_filter(e3, e3, identity_core(3));
    std::mt19937_64 rng(33);
    std::vector<Element> xs;
    for (int i = 0; i < 20; ++i) xs.push_back(coeffs(testing::uniform(rng, 3)));
    const auto s = error_decomposition([](const Element& x) { return x; }, id, xs);
    CHECK(s.enc_out == 0.0);
    CHECK(s.enc_in == 0.0);
    CHECK(s.approx == 0.0);
    CHECK(s.end_to_end == 0.0);

    // Constant target in the weighted sequence space, one retained coordinate.
    const auto ws = SchauderSpace::weighted_sequence();
    auto core = cno::net::zeros({{3, 2, 1}});
    core.theta.back() = 1.0;
    const auto f = make_filter(e3, ws, core);
    const Element c = coeffs({1.0, 0.5, 0.25});
    const auto k = error_decomposition([&](const Element&) { return c; }, f, xs);
    CHECK(k.enc_out == cno::spaces::metric(ws, cno::spaces::truncate(ws, c, 1), c).value);
    CHECK(k.enc_in == 0.0);
    CHECK(k.approx == 0.0);
}

TEST_CASE("property: the three-term split bounds the end-to-end error") {
    std::mt19937_64 rng(34);
    const std::vector<std::pair<SchauderSpace, SchauderSpace>> pairs = {
        {SchauderSpace::euclidean(4), SchauderSpace::euclidean(3)},
        {SchauderSpace::weighted_sequence(), SchauderSpace::weighted_sequence()},
        {SchauderSpace::fourier_l2(1.0), SchauderSpace::fourier_l2(2.0)},
        {SchauderSpace::chaos_l2(6, 1.0), SchauderSpace::chaos_l2(5, 1.0)}};
    for (const auto& [in, out] : pairs) {
        for (int trial = 0; trial < 10; ++trial) {
            auto spec = testing::random_spec(rng, 3, 5);
            spec.dims.front() = 2 + trial % 2;
            spec.dims.back() = 1 + trial % 3;
            const auto f = make_filter(in, out, testing::random_net(rng, spec));
            const std::size_t d_out = std::min<std::size_t>(out.max_level(), 6);
            const Operator target = [&](const Element& x) {
                const auto v = coords_of(x);
                std::vector<double> y(d_out);
                for (std::size_t k = 0; k < d_out; ++k) {
                    for (std::size_t j = 0; j < v.size(); ++j) y[k] += std::sin((k + 1.0) * v[j]) / (j + k + 1.0);
                }
                return coeffs(y);
            };
            std::vector<Element> xs;
            for (int i = 0; i < 20; ++i) xs.push_back(coeffs(testing::uniform(rng, std::min<std::size_t>(in.max_level(), 5))));
            for (auto m : {Measure::Metric, Measure::Norm}) {
                if (m == Measure::Norm && !out.is_banach()) continue;
                const auto s = error_decomposition(target, f, xs, m);
                CHECK(s.end_to_end <= s.sum());
            }
        }
    }
}

TEST_CASE("trained filter: coordinatewise sine over two Fourier modes") {
    const auto L2 = SchauderSpace::fourier_l2(1.0);
    const Operator target = [](const Element& x) {
        auto v = coords_of(x);
        for (auto& a : v) a = std::sin(a);
        return coeffs(v);
    };
    std::mt19937_64 rng(35);
    cno::net::Dataset train, test;
    for (int i = 0; i < 400; ++i) {
        const auto x = testing::uniform(rng, 2);
        train.x.push_back(x);
        train.y.push_back({std::sin(x[0]), std::sin(x[1])});
    }
    cno::net::TrainOptions o;
    o.epochs = 400;
    o.seed = 5;
    const auto r = cno::net::train({{2, 24, 24, 2}}, train, o);
    const double tol = 0.05;
    const auto f = make_filter(L2, L2, r.net);
    std::vector<Element> held_out;
    for (int i = 0; i < 200; ++i) held_out.push_back(coeffs(testing::uniform(rng, 2)));
    const auto s = error_decomposition(target, f, held_out, Measure::Norm);
    CHECK(s.enc_out == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.end_to_end <= tol);
    CHECK(s.end_to_end <= s.sum());
}
