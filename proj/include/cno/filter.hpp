#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cno/net.hpp"
#include "cno/spaces.hpp"

namespace cno::filter {

using spaces::Element;
using spaces::SchauderSpace;

/// Encode with P_{E:n_in}, run the core, decode with I_{B:n_out}.
struct NeuralFilter {
    SchauderSpace in_space;
    SchauderSpace out_space;
    std::size_t n_in = 0;
    std::size_t n_out = 0;
    net::Network core;
};

NeuralFilter make_filter(SchauderSpace in, SchauderSpace out, net::Network core);

/// Core output coordinates for x (the filter before decoding).
std::vector<double> filter_coords(const NeuralFilter& f, const Element& x);
Element filter_forward(const NeuralFilter& f, const Element& x);

// ---------------------------------------------------------------------------
// Special function V and generalized inverses

/// V(y): the u >= 0 with u^4 log_3(u + 2) = y.
double special_V(double y);

/// log V(exp(log_y)), usable far beyond the double range of y.
double special_V_log(double log_y);

/// Nondecreasing map sampled on a strictly increasing grid. When
/// `extends_below` is set the map is understood to stay at ys.front() for
/// every x < xs.front().
struct MonotoneTable {
    std::vector<double> xs;
    std::vector<double> ys;
    bool extends_below = false;
};

/// Checks the grid is strictly increasing and the values nondecreasing.
void validate(const MonotoneTable& t);

MonotoneTable tabulate(const std::function<double(double)>& f, const std::vector<double>& xs,
                       bool extends_below = false);

/// T^-(y) = inf{x : T(x) >= y} over the grid: the smallest grid point with
/// T(x) >= y, +inf when there is none, -inf when the table extends below and
/// y <= T(xs.front()).
double generalized_inverse(const MonotoneTable& t, double y);

/// Empirical modulus of continuity from (input distance, output distance)
/// pairs: omega(s) = max{out : in <= s}, tabulated at the observed inputs.
MonotoneTable fit_modulus(const std::vector<std::pair<double, double>>& pairs);

/// Generalized inverse of a fitted modulus as a callable; grid-limited
/// results (+-inf) are clamped to the grid range.
std::function<double(double)> modulus_dagger(MonotoneTable modulus);

/// Identity map, the modulus of 1-Lipschitz truncations in Banach spaces.
std::function<double(double)> identity_dagger();

// ---------------------------------------------------------------------------
// Complexity budgets

struct BudgetInput {
    double eps_D = 0.1;
    double eps_A = 0.1;
    double lambda = 1.0;
    spaces::Regularity regularity = spaces::Holder{1.0};
    std::size_t n_in = 1;
    std::size_t n_out = 1;
    std::function<double(double)> omega_phi_dagger = identity_dagger();
    double C_f = 1.0;  // smooth case only
};

struct Budget {
    std::uint64_t width = 0;
    std::uint64_t depth = 0;
    double C1 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;     // smooth case only
    double inner = 0.0;  // the bracketed quantity before rounding
    double log_inner = 0.0;
};

Budget budget_smooth(const BudgetInput& b);
Budget budget_holder(const BudgetInput& b);
Budget budget(const BudgetInput& b);

// ---------------------------------------------------------------------------
// Error split

enum class Measure { Metric, Norm };

double distance(const SchauderSpace& space, const Element& a, const Element& b, Measure m);

struct ErrorSplit {
    double enc_out = 0.0;  // max d(A_B y, y), y = f(x)
    double enc_in = 0.0;   // max d(I_B P_B f(A_E x), I_B P_B f(x))
    double approx = 0.0;   // max d(fhat(x), I_B P_B f(A_E x))
    double end_to_end = 0.0;

    double sum() const { return enc_out + enc_in + approx; }
};

using Operator = std::function<Element(const Element&)>;

ErrorSplit error_decomposition(const Operator& target, const NeuralFilter& f,
                               const std::vector<Element>& samples, Measure m = Measure::Metric);

}  // namespace cno::filter
