#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "cno/net.hpp"

namespace testing {

inline std::vector<double> uniform(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> U(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = U(rng);
    return v;
}

inline cno::net::NetSpec random_spec(std::mt19937_64& rng, std::size_t max_depth = 4, std::size_t max_width = 6,
                                     cno::net::Activation act = cno::net::Activation::ReLU) {
    std::uniform_int_distribution<std::size_t> J(1, max_depth), W(1, max_width);
    cno::net::NetSpec s;
    const std::size_t depth = J(rng);
    for (std::size_t j = 0; j <= depth; ++j) s.dims.push_back(W(rng));
    s.activation = act;
    return s;
}

inline cno::net::Network random_net(std::mt19937_64& rng, const cno::net::NetSpec& spec) {
    cno::net::Network n{spec, uniform(rng, cno::net::param_count(spec))};
    if (spec.activation == cno::net::Activation::ReLU) {
        for (const auto& o : cno::net::block_offsets(spec)) n.theta[o.alpha] = 0.0;
    }
    return n;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return a.size() == b.size() ? m : INFINITY;
}

}  // namespace testing
