#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cno/filter.hpp"
#include "cno/net.hpp"
#include "cno/spaces.hpp"
#include "cno/weave.hpp"

namespace cno::causal {

using Vec = std::vector<double>;

/// Strictly increasing times starting at 0.
struct TimeGrid {
    std::vector<double> times;

    std::size_t steps() const noexcept { return times.empty() ? 0 : times.size() - 1; }
};

void validate(const TimeGrid& g);
TimeGrid uniform_grid(std::size_t steps, double dt);

/// One sampled path: input coordinates x_{t_i} and target coordinates
/// y_{t_i} for i = 1..I (index 0 of each vector is t_1). `residual[i]` is the
/// norm of the target's component outside the retained output coordinates.
struct PathSample {
    std::vector<Vec> x;
    std::vector<Vec> y;
    Vec residual;
};

struct CausalDataset {
    TimeGrid grid;
    std::size_t M = 1;             // memory: window (t_{i-M}, t_i]
    std::size_t in_dim = 1;        // coordinates per input time
    spaces::SchauderSpace out_space = spaces::SchauderSpace::euclidean(1);
    std::size_t n_out = 1;         // retained output coordinates
    std::vector<PathSample> paths;

    std::size_t horizon() const noexcept { return grid.steps(); }
};

void validate(const CausalDataset& ds);

/// Concatenated coordinates of x_{t_{i-M+1}}, ..., x_{t_i} (1-based i);
/// times before t_1 contribute zeros.
Vec window_input(const std::vector<Vec>& x, std::size_t i, std::size_t M, std::size_t in_dim);

/// Training pairs for window i.
net::Dataset window_data(const CausalDataset& ds, std::size_t i);

/// Output-space distance between predicted coordinates and a target given by
/// coordinates plus orthogonal residual norm.
double target_distance(const spaces::SchauderSpace& out, const Vec& pred, const Vec& target, double residual,
                       filter::Measure m);

/// M = max(1, ceil(c_mem eps_A^-r)).
std::size_t memory_for(double eps_A, double r, double c_mem);

struct ConstructOptions {
    double eps_A = 0.05;
    std::optional<double> eps_D;  // default: measured max target residual
    std::size_t Q = 4;
    double delta = 0.5;
    double R = 1.0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden{16};
    net::Activation activation = net::Activation::ReLU;
    net::TrainOptions train;
    filter::Measure measure = filter::Measure::Norm;
    std::size_t threads = 0;  // 0: hardware concurrency
};

struct WindowReport {
    std::size_t index = 0;  // 1-based window
    std::uint64_t seed = 0;
    net::NetSpec spec;
    double train_error = 0.0;  // max over the training paths
    double gate = 0.0;         // eps_A + eps_D
    bool shortfall = false;
    double final_mse = 0.0;
    double seconds = 0.0;
};

struct CnoModel {
    weave::WeaveModel weave;
    net::NetSpec synced_spec;
    TimeGrid grid;
    std::size_t M = 1;
    std::size_t in_dim = 1;
    spaces::SchauderSpace out_space = spaces::SchauderSpace::euclidean(1);
    std::size_t n_out = 1;

    std::size_t horizon() const noexcept { return weave.T; }
};

struct Construction {
    CnoModel model;
    std::vector<WindowReport> windows;
    std::vector<net::Network> trained;  // per window, as trained
    std::vector<net::Network> stored;   // per window, padded to [d*]
    double eps_D = 0.0;
    double weave_drift = 0.0;
    bool any_shortfall = false;
};

std::uint64_t window_seed(std::uint64_t master, std::size_t i);

Construction construct_cno(const CausalDataset& ds, const ConstructOptions& opts);

/// Per-window networks read out along the hypernetwork rollout.
std::vector<net::Network> rollout_filters(const CnoModel& model, std::size_t horizon);

/// Output coordinates at t_1..t_horizon for an input path.
std::vector<Vec> predict(const CnoModel& model, const std::vector<Vec>& x_path, std::size_t horizon);
std::vector<Vec> predict_with(const CnoModel& model, const std::vector<net::Network>& filters,
                              const std::vector<Vec>& x_path, std::size_t horizon);

/// Same outputs expressed as elements of the output space.
std::vector<spaces::Element> predict_elements(const CnoModel& model, const std::vector<Vec>& x_path,
                                              std::size_t horizon);

/// True iff outputs at t_1..t_i are bit-identical for two paths that agree up
/// to t_i. Paths that differ before t_i are rejected.
bool causality_audit(const CnoModel& model, const std::vector<Vec>& path_a, const std::vector<Vec>& path_b,
                     std::size_t i);

}  // namespace cno::causal
