#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cno/errors.hpp"

namespace cno::net {

enum class Activation : std::uint32_t { ReLU = 0, PReLU = 1 };

std::string to_string(Activation a);

/// Multi-index [d] = (d_0, ..., d_J) and activation family.
struct NetSpec {
    std::vector<std::size_t> dims;
    Activation activation = Activation::ReLU;

    std::size_t depth() const noexcept { return dims.empty() ? 0 : dims.size() - 1; }
    std::size_t in_dim() const { return dims.front(); }
    std::size_t out_dim() const { return dims.back(); }

    bool operator==(const NetSpec&) const = default;
};

/// Throws InvalidArgument unless J >= 1 and every width is positive.
void validate(const NetSpec& spec);

/// P([d]) = J + sum_j d_j (d_{j+1} + 1) + d_J.
std::size_t param_count(const NetSpec& spec);

/// One block (A, b, alpha) of the flat layout. A is row-major d_{j+1} x d_j.
struct Layer {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> A;
    std::vector<double> b;
    double alpha = 0.0;

    double& at(std::size_t r, std::size_t c) { return A[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return A[r * cols + c]; }
};

struct Unpacked {
    std::vector<Layer> layers;
    std::vector<double> c;
};

/// Flat layout: for j = 0..J-1 the blocks A^(j), b^(j), alpha^(j); then c.
Unpacked unpack(const NetSpec& spec, const std::vector<double>& theta);
std::vector<double> pack(const NetSpec& spec, const Unpacked& u);

/// Offsets of each block inside theta.
struct BlockOffsets {
    std::size_t A = 0;
    std::size_t b = 0;
    std::size_t alpha = 0;
};
std::vector<BlockOffsets> block_offsets(const NetSpec& spec);

/// A network value: spec plus flattened parameters of length P([d]).
///
/// Realization: x^0 = x, x^{j+1} = A^(j) sigma_{alpha^(j)}(x^j + b^(j)),
/// output x^J + c, with sigma_a(u) = max(u, a u) componentwise.
struct Network {
    NetSpec spec;
    std::vector<double> theta;

    bool operator==(const Network&) const = default;
};

/// Spec/length consistency, finite values, and alpha = 0 for ReLU specs.
void check(const Network& net);

Network zeros(const NetSpec& spec);

std::vector<double> forward(const Network& net, const std::vector<double>& x);

struct Gradient {
    std::vector<double> theta;  // d<upstream, f(x)>/d theta
    std::vector<double> input;  // d<upstream, f(x)>/d x
};

/// Reverse-mode gradient of <upstream, forward(net, x)>. At sigma kinks the
/// slope is alpha (so the ReLU subgradient at 0 is 0).
Gradient grad(const Network& net, const std::vector<double>& x,
              const std::vector<double>& upstream);

/// Smallest |pre-activation| seen while evaluating x (kink proximity).
double min_abs_preactivation(const Network& net, const std::vector<double>& x);

/// Zero-pads widths and appends identity layers (alpha = 1) so that the
/// result has dims `target` and the same realization. Appending layers turns
/// the network into a PReLU network.
Network pad_to(const Network& src, const std::vector<std::size_t>& target);

/// Elementwise max of the given multi-indices after extending shorter ones by
/// repeating their output width (the common [d*] for pad_to).
std::vector<std::size_t> dominating_dims(const std::vector<NetSpec>& specs);

struct Parallelized {
    Network net;
    double bound = 0.0;       // (11/16 c^2 l^2 n^2 - 1) sum P, c = 2
    bool within_bound = false;
};

/// x -> (f_1(x), ..., f_n(x)). Members are synchronized in depth with
/// identity layers and rewritten with interleaved (u, -u) ReLU pairs behind a
/// duplicating first layer with alpha = 1; block-diagonal otherwise.
Parallelized parallelize(const std::vector<Network>& nets);

// ---------------------------------------------------------------------------
// Training

class TrainingDiverged : public Error {
public:
    TrainingDiverged(const std::string& what, Network last_finite, std::size_t epoch)
        : Error(what), last_finite_(std::move(last_finite)), epoch_(epoch) {}
    const Network& last_finite() const noexcept { return last_finite_; }
    std::size_t epoch() const noexcept { return epoch_; }

private:
    Network last_finite_;
    std::size_t epoch_;
};

enum class Optimizer { Adam, SGD };

struct TrainOptions {
    double lr = 1e-2;
    std::size_t epochs = 200;
    std::uint64_t seed = 0;
    std::size_t batch = 32;
    Optimizer optimizer = Optimizer::Adam;
    bool cosine_decay = true;    // lr decays to lr * final_lr_ratio
    double final_lr_ratio = 1e-2;
    double target_mse = 0.0;     // stop once the epoch loss falls below
    bool keep_best = true;       // return the parameters of the best epoch
};

struct Dataset {
    std::vector<std::vector<double>> x;
    std::vector<std::vector<double>> y;

    std::size_t size() const noexcept { return x.size(); }
};

struct TrainResult {
    Network net;
    std::vector<double> loss;          // mean squared error per epoch
    std::vector<double> loss_running_min;
    double final_mse = 0.0;            // full-data MSE of `net`
};

/// Seeded initialization: He-uniform weights, first bias shifting the data
/// into the positive orthant, c = mean target, PReLU slopes 0.25.
Network initialize(const NetSpec& spec, const Dataset& data, std::uint64_t seed);

double mse(const Network& net, const Dataset& data);
double max_abs_error(const Network& net, const Dataset& data);

TrainResult train(const NetSpec& spec, const Dataset& data, const TrainOptions& opts);
TrainResult train_from(Network init, const Dataset& data, const TrainOptions& opts);

// ---------------------------------------------------------------------------
// Model files: "CNO-NET\0", u32 layout version, u32 activation, u32 J,
// u64 dims[J+1], u64 count, f64 theta[count]; little-endian.

void write_model(std::ostream& os, const Network& net);
Network read_model(std::istream& is);
void save_model(const std::string& path, const Network& net);
Network load_model(const std::string& path);

}  // namespace cno::net
