#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "cno/errors.hpp"

namespace cno::spaces {

enum class Kind { Euclidean, WeightedSequence, FourierL2, ChaosL2 };

std::string to_string(Kind kind);
Kind kind_from_string(const std::string& name);

/// Element given by its Schauder coordinates. Coordinates past the end of
/// `coords` are zero. For the L2 kinds `tail_norm` carries the norm of the
/// component orthogonal to every basis element listed in `coords`.
struct Coefficients {
    std::vector<double> coords;
    double tail_norm = 0.0;
};

/// Point evaluations of an L2([0, t]) function on the uniform grid
/// s_i = i t / (N - 1), i = 0..N-1, endpoints included. N must be odd.
struct Sampled {
    std::vector<double> values;
};

using Element = std::variant<Coefficients, Sampled>;

/// First n coordinates of an element of a specific space.
struct CoordVector {
    std::vector<double> coords;
    std::string space_tag;

    std::size_t truncation_level() const noexcept { return coords.size(); }
};

struct MetricValue {
    double value = 0.0;
    double tail_bound = 0.0;  // |d_F - value| <= tail_bound
};

/// Separable Frechet space with an ordered Schauder basis, its coordinate
/// functionals, the seminorm family p_k and the compatible metric
///
///     d_F(x, y) = sum_k 2^-k Phi(p_k(x - y)),   Phi(t) = t / (1 + t).
///
/// Banach instances (Euclidean, FourierL2, ChaosL2) use the single seminorm
/// p_1 = ||.||. WeightedSequence is R^N with p_k(x) = max_{j<=k} w_j |x_j|,
/// evaluated up to k_max with tail bound 2^-k_max.
///
/// FourierL2 uses the orthonormal sine family sqrt(2/t) sin(h pi s / t).
/// ChaosL2 is the first Wiener chaos plus constants: e_1 = 1 and
/// e_{h+1} = int_0^t f_h dB for the same sine family f_h.
class SchauderSpace {
public:
    static SchauderSpace euclidean(std::size_t dim);
    static SchauderSpace weighted_sequence(std::vector<double> weights = {}, int k_max = 64);
    static SchauderSpace fourier_l2(double horizon, int quadrature_intervals = 1024);
    static SchauderSpace chaos_l2(std::size_t mode_count, double horizon);

    Kind kind() const noexcept { return kind_; }
    bool is_banach() const noexcept { return kind_ != Kind::WeightedSequence; }

    /// Stable identifier; two spaces with equal tags are the same space.
    std::string tag() const;

    /// Largest admissible truncation level (dim for finite-dimensional kinds).
    std::size_t max_level() const noexcept;

    std::size_t dim() const noexcept { return dim_; }
    double horizon() const noexcept { return horizon_; }
    int k_max() const noexcept { return k_max_; }
    int quadrature_intervals() const noexcept { return quadrature_intervals_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    /// Weight w_j (1-based) of the WeightedSequence seminorms.
    double weight(std::size_t j) const noexcept;

    /// Value of the h-th (1-based) FourierL2 basis function at s.
    double basis_value(std::size_t h, double s) const;

    /// Seminorm p_k(x), 1-based k. Banach kinds ignore k.
    double seminorm(std::size_t k, const Element& x) const;

    bool operator==(const SchauderSpace& other) const { return tag() == other.tag(); }

private:
    SchauderSpace() = default;

    Kind kind_ = Kind::Euclidean;
    std::size_t dim_ = 0;
    double horizon_ = 0.0;
    int k_max_ = 64;
    int quadrature_intervals_ = 1024;
    std::vector<double> weights_;
};

inline double phi(double t) { return t / (1.0 + t); }

/// Composite Simpson rule over [0, horizon] on an odd number of samples.
double simpson(const std::vector<double>& values, double horizon);

/// Uniform sample grid on [0, horizon] with `intervals + 1` points.
std::vector<double> sample_grid(double horizon, int intervals);

CoordVector project(const SchauderSpace& space, const Element& x, std::size_t n);
Element reconstruct(const SchauderSpace& space, const CoordVector& v);

/// Pointwise evaluation of sum_h v_h e_h on the space's quadrature grid
/// (FourierL2 only).
Sampled evaluate(const SchauderSpace& space, const std::vector<double>& coords);

/// A_{F:n} := I_{F:n} o P_{F:n}.
Element truncate(const SchauderSpace& space, const Element& x, std::size_t n);

MetricValue metric(const SchauderSpace& space, const Element& x, const Element& y);

/// ||x - y|| for Banach instances.
double norm_distance(const SchauderSpace& space, const Element& x, const Element& y);

/// d_{F:n}(a, b) := d_F(sum a_k f_k, sum b_k f_k) on R^n.
double coordinate_metric(const SchauderSpace& space, const std::vector<double>& a,
                         const std::vector<double>& b);

/// profile[n-1] = max over samples of d_F(A_{F:n}(x), x), n = 1..n_max.
std::vector<double> truncation_error_profile(const SchauderSpace& space,
                                             const std::vector<Element>& samples,
                                             std::size_t n_max);

struct Holder {
    double alpha = 1.0;
};
struct Smooth {
    int k = 1;
};
using Regularity = std::variant<Holder, Smooth>;

struct DimSelection {
    std::size_t n_in = 0;
    std::size_t n_out = 0;
    double input_threshold = 0.0;
    double output_threshold = 0.0;
};

/// Smallest encoder/decoder dimensions meeting the encoding budget eps_d.
/// `omega_dagger` is the generalized inverse of the output-side modulus.
DimSelection select_dims(const std::vector<double>& profile_in,
                         const std::vector<double>& profile_out, double eps_d, double lambda,
                         const Regularity& regularity,
                         const std::function<double(double)>& omega_dagger);

}  // namespace cno::spaces
