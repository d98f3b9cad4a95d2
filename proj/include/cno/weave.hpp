#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cno/net.hpp"

namespace cno::weave {

using Vec = std::vector<double>;

struct Packing {
    std::size_t Q = 0;
    double R = 1.0;
    double delta = 0.5;
    std::vector<Vec> points;
};

/// ((R + delta/2) / (delta/2))^Q: no delta-packing of the R-ball is larger.
double packing_volume_bound(std::size_t Q, double R, double delta);

/// Greedy farthest-point packing of the closed R-ball in R^Q with pairwise
/// distances strictly above delta. Returns exactly `count` points or throws
/// PackingInfeasible with the best count reached over the restarts.
Packing pack_ball(std::size_t Q, double R, double delta, std::size_t count, std::uint64_t seed,
                  int restarts = 8);

double min_separation(const std::vector<Vec>& points);

/// max pairwise distance / min pairwise distance.
double aspect_ratio(const std::vector<Vec>& points);

struct Memorizer {
    net::Network net;
    std::size_t width = 0;        // widest hidden layer
    std::size_t width_bound = 0;  // D K + 12 for K pairs in R^D
    double max_residual = 0.0;    // max |NN(x_i) - y_i| at the anchors
    double plateau = 0.0;         // half-width of the flat region around anchors
};

/// ReLU network with NN(x_i) = y_i. The inputs are projected on a direction
/// separating them, and a piecewise-linear interpolant with a flat plateau
/// around every anchor is realized with two ReLU units per gap.
Memorizer memorize(const std::vector<Vec>& xs, const std::vector<Vec>& ys, std::uint64_t seed = 0);

struct WeaveModel {
    std::size_t P = 0;
    std::size_t Q = 0;
    std::size_t T = 0;
    double delta = 0.5;
    double R = 1.0;
    double M_T = 1.0;
    std::uint64_t seed = 0;
    std::vector<Vec> packing;  // z~_t
    std::vector<Vec> codes;    // z_t = (theta_t / M_T, z~_t)
    Vec z0;
    net::Network hyper;

    bool operator==(const WeaveModel&) const = default;
};

/// M_T = max{1, max_{s,t} ||theta_t - theta_s||_2}.
double scale_constant(const std::vector<Vec>& thetas);

/// floor(delta^-Q).
std::uint64_t horizon_limit(std::size_t Q, double delta);

WeaveModel build_weave(const std::vector<Vec>& thetas, std::size_t Q, double delta, std::uint64_t seed,
                       double R = 1.0);

/// L(z) = M_T z[0:P].
Vec readout(const WeaveModel& w, const Vec& z);

/// theta_hat_t for t < steps, iterating the hypernetwork from z0.
std::vector<Vec> rollout(const WeaveModel& w, std::size_t steps);

/// max_t relative error of the rolled-out parameters against L(z_t).
double rollout_drift(const WeaveModel& w);

/// max_i |a_i - b_i| / max_i |b_i|; 0 when a == b, +inf when b = 0 != a.
double relative_error(const Vec& a, const Vec& b);

struct Table2 {
    std::uint64_t I = 0;            // floor(delta^-Q)
    std::uint64_t width_bound = 0;  // (P + Q) I + 12
    double depth_expr = 0.0;        // O-expressions with constant 1
    double params_expr = 0.0;
    // Measured on a constructed model (zero when none is given).
    std::size_t width = 0;
    std::size_t depth = 0;
    std::size_t params = 0;
};

Table2 table2_report(std::size_t P, std::size_t Q, double delta, std::size_t T);
Table2 table2_report(const WeaveModel& w);

void write_weave(std::ostream& os, const WeaveModel& w);
WeaveModel read_weave(std::istream& is);

}  // namespace cno::weave
