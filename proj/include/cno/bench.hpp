#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cno/causal.hpp"

namespace cno::bench {

using Vec = std::vector<double>;

enum class GKind { Mean, AbsDiff, ClippedAffine };

std::string to_string(GKind g);
GKind g_from_string(const std::string& s);

/// z^(t) = G(z_t, z^(t-1)), z^(0) = 0, f(z_1..z_T) = z^(T).
struct RecursiveTarget {
    std::size_t T = 6;
    GKind G = GKind::Mean;
};

/// The cell maps [0,1]^2 into [0,1] and is 1-Lipschitz for the l1 norm.
double apply_G(GKind g, double a, double b);

double eval_recursive(const RecursiveTarget& target, const Vec& z);

/// All intermediate states z^(1), ..., z^(T).
Vec recursive_states(const RecursiveTarget& target, const Vec& z);

/// Causal dataset of the target with memory M: x_{t_i} = z_i, y_{t_i} = z^(i).
causal::CausalDataset recursive_dataset(const RecursiveTarget& target, std::size_t n_paths, std::size_t M,
                                        std::uint64_t seed);

enum class ModelKind { FFNN, CNO };

struct ModelConfig {
    ModelKind kind = ModelKind::FFNN;
    std::vector<std::size_t> hidden{16};
    std::string label;
};

struct CompareOptions {
    std::size_t n_train = 1000;
    std::size_t n_test = 500;
    double eps_A = 0.05;
    std::size_t Q = 4;
    double delta = 0.5;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    net::TrainOptions train;
};

struct Row {
    std::string model;
    ModelKind kind = ModelKind::FFNN;
    std::size_t params = 0;  // recomputed from the realized specs
    double max_err = 0.0;
    double seconds = 0.0;
    std::uint64_t seed = 0;
    bool diverged = false;
};

struct Summary {
    std::string model;
    ModelKind kind = ModelKind::FFNN;
    std::size_t params = 0;
    double median_err = 0.0;
};

struct TradeoffReport {
    std::vector<Row> rows;
    std::vector<Summary> summary;
};

/// FFNN rows see the whole input z in [0,1]^T. CNO rows use the recurrent
/// presentation: window i receives (y_{i-1}, z_i), trained with the true
/// y_{i-1} and evaluated with its own previous output fed back.
TradeoffReport compare(const RecursiveTarget& target, const std::vector<ModelConfig>& configs,
                       const CompareOptions& opts);

/// Parameter count of a constructed CNO: hypernetwork, z0 and M_T.
std::size_t cno_param_count(const causal::CnoModel& m);

/// Recurrent evaluation y_i = f_{theta_i}(y_{i-1}, z_i) for a model whose
/// windows take (previous output, current input).
Vec predict_recurrent(const causal::CnoModel& model, const std::vector<net::Network>& filters, const Vec& z);

/// Network on (y, x) computing net(x): zero columns for the state y.
net::Network precompose_projection(const net::Network& net, std::size_t state_dim);

/// Checks that the recursion y_i = g_{theta_i}(y_{i-1}, x_i), with g the
/// filter precomposed with (y, x) -> x, reproduces predict bit for bit.
bool rnn_reduction_check(const causal::CnoModel& model, const std::vector<std::vector<Vec>>& paths);

struct Verdict {
    bool pass = false;
    std::string best_cno;
    double best_cno_err = 0.0;
    std::size_t best_cno_params = 0;
    std::string ffnn;       // best FFNN with params >= the CNO's
    double ffnn_err = 0.0;
    std::size_t ffnn_params = 0;
};

/// Best CNO by median error against the best FFNN with at least as many
/// parameters.
Verdict direction_verdict(const TradeoffReport& r);

/// CSV with columns model,params,max_err,seconds,seed,schema_version.
void write_csv(std::ostream& os, const TradeoffReport& r);

}  // namespace cno::bench
