#include "cno/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include "cno/binio.hpp"

namespace cno::net {

namespace {

constexpr std::uint32_t kModelVersion = 1;
constexpr const char* kModelMagic = "CNO-NET";

inline double act(double u, double a) { return std::max(u, a * u); }

void check_input(const Network& net, const std::vector<double>& x) {
    if (x.size() != net.spec.in_dim()) {
        throw InvalidArgument("input has length " + std::to_string(x.size()) + ", network expects " +
                              std::to_string(net.spec.in_dim()));
    }
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::ReLU ? "relu" : "prelu"; }

void validate(const NetSpec& spec) {
    if (spec.dims.size() < 2) throw InvalidArgument("a network needs depth J >= 1");
    for (auto d : spec.dims) {
        if (d == 0) throw InvalidArgument("network widths must be positive");
    }
}

std::size_t param_count(const NetSpec& spec) {
    validate(spec);
    const std::size_t J = spec.depth();
    std::size_t p = J + spec.dims[J];
    for (std::size_t j = 0; j < J; ++j) p += spec.dims[j] * (spec.dims[j + 1] + 1);
    return p;
}

std::vector<BlockOffsets> block_offsets(const NetSpec& spec) {
    validate(spec);
    std::vector<BlockOffsets> out(spec.depth());
    std::size_t pos = 0;
    for (std::size_t j = 0; j < spec.depth(); ++j) {
        out[j].A = pos;
        pos += spec.dims[j + 1] * spec.dims[j];
        out[j].b = pos;
        pos += spec.dims[j];
        out[j].alpha = pos;
        pos += 1;
    }
    return out;
}

Unpacked unpack(const NetSpec& spec, const std::vector<double>& theta) {
    if (theta.size() != param_count(spec)) {
        throw InvalidArgument("parameter vector length does not match P([d])");
    }
    Unpacked u;
    auto it = theta.begin();
    for (std::size_t j = 0; j < spec.depth(); ++j) {
        Layer L;
        L.rows = spec.dims[j + 1];
        L.cols = spec.dims[j];
        L.A.assign(it, it + L.rows * L.cols);
        it += L.rows * L.cols;
        L.b.assign(it, it + L.cols);
        it += L.cols;
        L.alpha = *it++;
        u.layers.push_back(std::move(L));
    }
    u.c.assign(it, theta.end());
    return u;
}

std::vector<double> pack(const NetSpec& spec, const Unpacked& u) {
    validate(spec);
    if (u.layers.size() != spec.depth() || u.c.size() != spec.out_dim()) {
        throw InvalidArgument("unpacked blocks do not match the spec");
    }
    std::vector<double> theta;
    theta.reserve(param_count(spec));
    for (std::size_t j = 0; j < spec.depth(); ++j) {
        const auto& L = u.layers[j];
        if (L.rows != spec.dims[j + 1] || L.cols != spec.dims[j] || L.A.size() != L.rows * L.cols ||
            L.b.size() != L.cols) {
            throw InvalidArgument("layer " + std::to_string(j) + " block shapes do not match the spec");
        }
        theta.insert(theta.end(), L.A.begin(), L.A.end());
        theta.insert(theta.end(), L.b.begin(), L.b.end());
        theta.push_back(L.alpha);
    }
    theta.insert(theta.end(), u.c.begin(), u.c.end());
    return theta;
}

void check(const Network& net) {
    if (net.theta.size() != param_count(net.spec)) {
        throw InvalidArgument("parameter vector length does not match P([d])");
    }
    for (double v : net.theta) {
        if (!std::isfinite(v)) throw InvalidArgument("non-finite network parameter");
    }
    if (net.spec.activation == Activation::ReLU) {
        for (const auto& o : block_offsets(net.spec)) {
            if (net.theta[o.alpha] != 0.0) throw InvalidArgument("ReLU network with nonzero slope");
        }
    }
}

Network zeros(const NetSpec& spec) { return {spec, std::vector<double>(param_count(spec), 0.0)}; }

std::vector<double> forward(const Network& net, const std::vector<double>& x) {
    check_input(net, x);
    const auto& d = net.spec.dims;
    const double* th = net.theta.data();
    std::vector<double> cur = x;
    std::vector<double> s;
    std::vector<double> next;
    for (std::size_t j = 0; j < net.spec.depth(); ++j) {
        const std::size_t rows = d[j + 1];
        const std::size_t cols = d[j];
        const double* A = th;
        const double* b = A + rows * cols;
        const double alpha = b[cols];
        th = b + cols + 1;
        s.resize(cols);
        for (std::size_t k = 0; k < cols; ++k) s[k] = act(cur[k] + b[k], alpha);
        next.assign(rows, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* row = A + r * cols;
            double acc = 0.0;
            for (std::size_t k = 0; k < cols; ++k) acc += row[k] * s[k];
            next[r] = acc;
        }
        cur.swap(next);
    }
    for (std::size_t r = 0; r < cur.size(); ++r) cur[r] += th[r];
    return cur;
}

Gradient grad(const Network& net, const std::vector<double>& x, const std::vector<double>& upstream) {
    check_input(net, x);
    const auto& d = net.spec.dims;
    const std::size_t J = net.spec.depth();
    if (upstream.size() != d[J]) throw InvalidArgument("upstream gradient has the wrong length");
    const auto off = block_offsets(net.spec);
    const double* th = net.theta.data();

    // Forward pass keeping pre-activations u_j = x^j + b^j.
    std::vector<std::vector<double>> u(J);
    std::vector<double> cur = x;
    for (std::size_t j = 0; j < J; ++j) {
        const std::size_t rows = d[j + 1];
        const std::size_t cols = d[j];
        const double* A = th + off[j].A;
        const double* b = th + off[j].b;
        const double alpha = th[off[j].alpha];
        u[j].resize(cols);
        for (std::size_t k = 0; k < cols; ++k) u[j][k] = cur[k] + b[k];
        std::vector<double> next(rows, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            double acc = 0.0;
            for (std::size_t k = 0; k < cols; ++k) acc += A[r * cols + k] * act(u[j][k], alpha);
            next[r] = acc;
        }
        cur.swap(next);
    }

    Gradient g;
    g.theta.assign(net.theta.size(), 0.0);
    const std::size_t c_off = net.theta.size() - d[J];
    std::copy(upstream.begin(), upstream.end(), g.theta.begin() + static_cast<std::ptrdiff_t>(c_off));
    std::vector<double> gy = upstream;
    for (std::size_t j = J; j-- > 0;) {
        const std::size_t rows = d[j + 1];
        const std::size_t cols = d[j];
        const double* A = th + off[j].A;
        const double alpha = th[off[j].alpha];
        double* gA = g.theta.data() + off[j].A;
        double* gb = g.theta.data() + off[j].b;
        double& galpha = g.theta[off[j].alpha];
        std::vector<double> gs(cols, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            const double gr = gy[r];
            if (gr == 0.0) continue;
            for (std::size_t k = 0; k < cols; ++k) {
                gA[r * cols + k] = gr * act(u[j][k], alpha);
                gs[k] += A[r * cols + k] * gr;
            }
        }
        std::vector<double> gu(cols);
        for (std::size_t k = 0; k < cols; ++k) {
            const double uk = u[j][k];
            if (uk > alpha * uk) {
                gu[k] = gs[k];
            } else {
                gu[k] = alpha * gs[k];
                galpha += gs[k] * uk;
            }
            gb[k] = gu[k];
        }
        gy.swap(gu);
    }
    g.input = std::move(gy);
    return g;
}

double min_abs_preactivation(const Network& net, const std::vector<double>& x) {
    check_input(net, x);
    const auto& d = net.spec.dims;
    const auto off = block_offsets(net.spec);
    const double* th = net.theta.data();
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> cur = x;
    for (std::size_t j = 0; j < net.spec.depth(); ++j) {
        const std::size_t rows = d[j + 1];
        const std::size_t cols = d[j];
        const double alpha = th[off[j].alpha];
        std::vector<double> s(cols);
        for (std::size_t k = 0; k < cols; ++k) {
            const double uk = cur[k] + th[off[j].b + k];
            best = std::min(best, std::abs(uk));
            s[k] = act(uk, alpha);
        }
        std::vector<double> next(rows, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t k = 0; k < cols; ++k) next[r] += th[off[j].A + r * cols + k] * s[k];
        }
        cur.swap(next);
    }
    return best;
}

Network pad_to(const Network& src, const std::vector<std::size_t>& target) {
    check(src);
    const auto& d = src.spec.dims;
    const std::size_t J = src.spec.depth();
    NetSpec tspec{target, src.spec.activation};
    validate(tspec);
    const std::size_t K = tspec.depth();
    if (K < J) throw InvalidArgument("padding target is shallower than the source network");
    if (target.front() != d.front() || target.back() != d.back()) {
        throw InvalidArgument("padding target must keep the input and output dimensions");
    }
    for (std::size_t j = 1; j < J; ++j) {
        if (target[j] < d[j]) throw InvalidArgument("padding target is narrower than the source at layer " + std::to_string(j));
    }
    for (std::size_t j = J; j < K; ++j) {
        if (target[j] < d[J]) throw InvalidArgument("appended layers must be at least as wide as the output");
    }
    if (K == J && target == d) return src;
    if (K > J) tspec.activation = Activation::PReLU;

    const Unpacked su = unpack(src.spec, src.theta);
    Unpacked tu;
    for (std::size_t j = 0; j < K; ++j) {
        Layer L;
        L.rows = target[j + 1];
        L.cols = target[j];
        L.A.assign(L.rows * L.cols, 0.0);
        L.b.assign(L.cols, 0.0);
        if (j < J) {
            const auto& S = su.layers[j];
            for (std::size_t r = 0; r < S.rows; ++r) {
                for (std::size_t c = 0; c < S.cols; ++c) L.at(r, c) = S.at(r, c);
            }
            std::copy(S.b.begin(), S.b.end(), L.b.begin());
            L.alpha = S.alpha;
        } else {
            for (std::size_t r = 0; r < d[J]; ++r) L.at(r, r) = 1.0;
            L.alpha = 1.0;
        }
        tu.layers.push_back(std::move(L));
    }
    tu.c = su.c;
    return {tspec, pack(tspec, tu)};
}

std::vector<std::size_t> dominating_dims(const std::vector<NetSpec>& specs) {
    if (specs.empty()) throw InvalidArgument("no networks to synchronize");
    std::size_t K = 0;
    for (const auto& s : specs) {
        validate(s);
        K = std::max(K, s.depth());
    }
    std::vector<std::size_t> out(K + 1, 0);
    for (const auto& s : specs) {
        if (s.in_dim() != specs.front().in_dim() || s.out_dim() != specs.front().out_dim()) {
            throw InvalidArgument("networks to synchronize must share input and output dimensions");
        }
        for (std::size_t j = 0; j <= K; ++j) {
            const std::size_t w = j < s.depth() ? s.dims[j] : s.out_dim();
            out[j] = std::max(out[j], w);
        }
    }
    return out;
}

Parallelized parallelize(const std::vector<Network>& nets) {
    if (nets.empty()) throw InvalidArgument("nothing to parallelize");
    const std::size_t din = nets.front().spec.in_dim();
    std::size_t K = 0;
    std::size_t l = 0;
    double sum_p = 0.0;
    for (const auto& n : nets) {
        check(n);
        if (n.spec.in_dim() != din) throw InvalidArgument("parallelized networks must share the input dimension");
        K = std::max(K, n.spec.depth());
        l = std::max({l, n.spec.in_dim(), n.spec.out_dim()});
        sum_p += static_cast<double>(n.theta.size());
    }
    const double cnt = static_cast<double>(nets.size());
    Parallelized out;
    out.bound = (11.0 / 16.0 * 4.0 * static_cast<double>(l * l) * cnt * cnt - 1.0) * sum_p;
    if (nets.size() == 1) {
        out.net = nets.front();
        out.within_bound = static_cast<double>(out.net.theta.size()) <= out.bound;
        return out;
    }

    // Synchronize depths with identity layers of each member's output width.
    std::vector<Unpacked> parts;
    std::vector<NetSpec> specs;
    for (const auto& n : nets) {
        auto dims = n.spec.dims;
        while (dims.size() < K + 1) dims.insert(dims.end() - 1, n.spec.out_dim());
        const Network p = pad_to(n, dims);
        parts.push_back(unpack(p.spec, p.theta));
        specs.push_back(p.spec);
    }

    // Combined dims: din, then 2 * sum d_j for j = 0..K-1, then sum d_K.
    std::vector<std::size_t> dims{din};
    for (std::size_t j = 0; j < K; ++j) {
        std::size_t w = 0;
        for (const auto& s : specs) w += 2 * s.dims[j];
        dims.push_back(w);
    }
    std::size_t dout = 0;
    for (const auto& s : specs) dout += s.out_dim();
    dims.push_back(dout);
    NetSpec spec{dims, Activation::PReLU};

    Unpacked u;
    // Duplicating layer: x -> per member interleaved (x_k, -x_k).
    {
        Layer L;
        L.rows = dims[1];
        L.cols = din;
        L.A.assign(L.rows * L.cols, 0.0);
        L.b.assign(din, 0.0);
        L.alpha = 1.0;
        std::size_t r = 0;
        for (std::size_t m = 0; m < nets.size(); ++m) {
            for (std::size_t k = 0; k < din; ++k) {
                L.at(r++, k) = 1.0;
                L.at(r++, k) = -1.0;
            }
        }
        u.layers.push_back(std::move(L));
    }
    // ReLU pairs: sigma_a(v) = max(1,a) relu(v) - min(1,a) relu(-v).
    for (std::size_t j = 0; j < K; ++j) {
        Layer L;
        L.rows = dims[j + 2];
        L.cols = dims[j + 1];
        L.A.assign(L.rows * L.cols, 0.0);
        L.b.assign(L.cols, 0.0);
        L.alpha = 0.0;
        const bool last = j + 1 == K;
        std::size_t r0 = 0;
        std::size_t c0 = 0;
        for (const auto& part : parts) {
            const Layer& S = part.layers[j];
            const double hi = std::max(1.0, S.alpha);
            const double lo = std::min(1.0, S.alpha);
            for (std::size_t k = 0; k < S.cols; ++k) {
                L.b[c0 + 2 * k] = S.b[k];
                L.b[c0 + 2 * k + 1] = -S.b[k];
            }
            for (std::size_t r = 0; r < S.rows; ++r) {
                for (std::size_t k = 0; k < S.cols; ++k) {
                    const double a_pos = S.at(r, k) * hi;
                    const double a_neg = -S.at(r, k) * lo;
                    if (last) {
                        L.at(r0 + r, c0 + 2 * k) = a_pos;
                        L.at(r0 + r, c0 + 2 * k + 1) = a_neg;
                    } else {
                        L.at(r0 + 2 * r, c0 + 2 * k) = a_pos;
                        L.at(r0 + 2 * r, c0 + 2 * k + 1) = a_neg;
                        L.at(r0 + 2 * r + 1, c0 + 2 * k) = -a_pos;
                        L.at(r0 + 2 * r + 1, c0 + 2 * k + 1) = -a_neg;
                    }
                }
            }
            r0 += last ? S.rows : 2 * S.rows;
            c0 += 2 * S.cols;
        }
        u.layers.push_back(std::move(L));
    }
    for (const auto& part : parts) u.c.insert(u.c.end(), part.c.begin(), part.c.end());
    out.net = {spec, pack(spec, u)};
    out.within_bound = static_cast<double>(out.net.theta.size()) <= out.bound;
    return out;
}

// ---------------------------------------------------------------------------

Network initialize(const NetSpec& spec, const Dataset& data, std::uint64_t seed) {
    validate(spec);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Unpacked u;
    for (std::size_t j = 0; j < spec.depth(); ++j) {
        Layer L;
        L.rows = spec.dims[j + 1];
        L.cols = spec.dims[j];
        const double lim = std::sqrt(6.0 / static_cast<double>(L.cols));
        L.A.resize(L.rows * L.cols);
        for (auto& a : L.A) a = lim * unit(rng);
        L.b.assign(L.cols, 0.0);
        if (j > 0) {
            for (auto& b : L.b) b = 0.1 * unit(rng);
        }
        L.alpha = spec.activation == Activation::PReLU ? 0.25 : 0.0;
        u.layers.push_back(std::move(L));
    }
    u.c.assign(spec.out_dim(), 0.0);
    if (data.size() > 0) {
        auto& b0 = u.layers.front().b;
        for (std::size_t k = 0; k < spec.in_dim(); ++k) {
            double lo = std::numeric_limits<double>::infinity();
            for (const auto& x : data.x) lo = std::min(lo, x[k]);
            b0[k] = -lo;
        }
        for (const auto& y : data.y) {
            for (std::size_t k = 0; k < u.c.size(); ++k) u.c[k] += y[k];
        }
        for (auto& c : u.c) c /= static_cast<double>(data.size());
    }
    return {spec, pack(spec, u)};
}

namespace {

void check_data(const NetSpec& spec, const Dataset& data) {
    if (data.x.size() != data.y.size()) throw InvalidArgument("dataset inputs and targets differ in count");
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.x[i].size() != spec.in_dim() || data.y[i].size() != spec.out_dim()) {
            throw InvalidArgument("dataset sample " + std::to_string(i) + " does not match the network shape");
        }
    }
}

}  // namespace

double mse(const Network& net, const Dataset& data) {
    check_data(net.spec, data);
    if (data.size() == 0) throw InvalidArgument("empty dataset");
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto y = forward(net, data.x[i]);
        for (std::size_t k = 0; k < y.size(); ++k) s += (y[k] - data.y[i][k]) * (y[k] - data.y[i][k]);
    }
    return s / static_cast<double>(data.size() * net.spec.out_dim());
}

double max_abs_error(const Network& net, const Dataset& data) {
    check_data(net.spec, data);
    double m = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto y = forward(net, data.x[i]);
        for (std::size_t k = 0; k < y.size(); ++k) m = std::max(m, std::abs(y[k] - data.y[i][k]));
    }
    return m;
}

TrainResult train(const NetSpec& spec, const Dataset& data, const TrainOptions& opts) {
    check_data(spec, data);
    if (data.size() == 0) throw InvalidArgument("training needs a nonempty dataset");
    return train_from(initialize(spec, data, opts.seed), data, opts);
}

TrainResult train_from(Network net, const Dataset& data, const TrainOptions& opts) {
    check(net);
    check_data(net.spec, data);
    if (data.size() == 0) throw InvalidArgument("training needs a nonempty dataset");
    if (opts.batch == 0) throw InvalidArgument("batch size must be positive");
    if (!(opts.lr > 0.0)) throw InvalidArgument("learning rate must be positive");

    const std::size_t n = data.size();
    const std::size_t P = net.theta.size();
    const std::size_t dout = net.spec.out_dim();
    const bool relu = net.spec.activation == Activation::ReLU;
    const auto off = block_offsets(net.spec);

    std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> m(P, 0.0), v(P, 0.0), gsum(P);
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    std::uint64_t step = 0;

    TrainResult res;
    Network best = net;
    double best_loss = std::numeric_limits<double>::infinity();

    for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double lr = opts.lr;
        if (opts.cosine_decay && opts.epochs > 1) {
            const double f = static_cast<double>(epoch) / static_cast<double>(opts.epochs - 1);
            lr = opts.lr * (opts.final_lr_ratio + (1.0 - opts.final_lr_ratio) * 0.5 * (1.0 + std::cos(std::numbers::pi * f)));
        }
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += opts.batch) {
            const std::size_t end = std::min(n, start + opts.batch);
            const double scale = 1.0 / static_cast<double>((end - start) * dout);
            std::fill(gsum.begin(), gsum.end(), 0.0);
            for (std::size_t i = start; i < end; ++i) {
                const auto& x = data.x[order[i]];
                const auto& y = data.y[order[i]];
                const auto yhat = forward(net, x);
                std::vector<double> up(dout);
                for (std::size_t k = 0; k < dout; ++k) {
                    const double r = yhat[k] - y[k];
                    epoch_loss += r * r;
                    up[k] = 2.0 * r * scale;
                }
                const auto g = grad(net, x, up);
                for (std::size_t p = 0; p < P; ++p) gsum[p] += g.theta[p];
            }
            if (relu) {
                for (const auto& o : off) gsum[o.alpha] = 0.0;
            }
            ++step;
            if (opts.optimizer == Optimizer::Adam) {
                const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
                const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
                for (std::size_t p = 0; p < P; ++p) {
                    m[p] = b1 * m[p] + (1.0 - b1) * gsum[p];
                    v[p] = b2 * v[p] + (1.0 - b2) * gsum[p] * gsum[p];
                    net.theta[p] -= lr * (m[p] / c1) / (std::sqrt(v[p] / c2) + eps);
                }
            } else {
                for (std::size_t p = 0; p < P; ++p) net.theta[p] -= lr * gsum[p];
            }
        }
        epoch_loss /= static_cast<double>(n * dout);
        if (!std::isfinite(epoch_loss) ||
            !std::all_of(net.theta.begin(), net.theta.end(), [](double a) { return std::isfinite(a); })) {
            throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch), best, epoch);
        }
        res.loss.push_back(epoch_loss);
        res.loss_running_min.push_back(res.loss_running_min.empty() ? epoch_loss
                                                                    : std::min(res.loss_running_min.back(), epoch_loss));
        if (opts.keep_best) {
            const double full = mse(net, data);
            if (full < best_loss) {
                best_loss = full;
                best = net;
            }
            if (full <= opts.target_mse) break;
        } else {
            best = net;
            if (epoch_loss <= opts.target_mse) break;
        }
    }
    res.net = opts.keep_best && std::isfinite(best_loss) ? best : net;
    res.final_mse = mse(res.net, data);
    return res;
}

// ---------------------------------------------------------------------------

void write_model(std::ostream& os, const Network& net) {
    check(net);
    binio::put_magic(os, kModelMagic);
    binio::put<std::uint32_t>(os, kModelVersion);
    binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(net.spec.activation));
    binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(net.spec.depth()));
    for (auto d : net.spec.dims) binio::put<std::uint64_t>(os, d);
    binio::put<std::uint64_t>(os, net.theta.size());
    for (double v : net.theta) binio::put<double>(os, v);
    if (!os) throw IntegrityError("failed writing model stream");
}

Network read_model(std::istream& is) {
    binio::expect_magic(is, kModelMagic);
    const auto version = binio::get<std::uint32_t>(is);
    if (version != kModelVersion) throw IntegrityError("unsupported model layout version " + std::to_string(version));
    const auto act_raw = binio::get<std::uint32_t>(is);
    if (act_raw > 1) throw IntegrityError("unknown activation code");
    const auto J = binio::get<std::uint32_t>(is);
    if (J == 0 || J > 4096) throw IntegrityError("implausible network depth");
    Network net;
    net.spec.activation = static_cast<Activation>(act_raw);
    for (std::uint32_t j = 0; j <= J; ++j) {
        const auto d = binio::get<std::uint64_t>(is);
        if (d == 0 || d > (1u << 24)) throw IntegrityError("implausible network width");
        net.spec.dims.push_back(d);
    }
    const auto count = binio::get<std::uint64_t>(is);
    if (count != param_count(net.spec)) throw IntegrityError("parameter count does not match the header dims");
    net.theta.resize(count);
    for (auto& v : net.theta) v = binio::get<double>(is);
    try {
        check(net);
    } catch (const InvalidArgument& e) {
        throw IntegrityError(std::string("model file: ") + e.what());
    }
    return net;
}

void save_model(const std::string& path, const Network& net) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IntegrityError("cannot open " + path + " for writing");
    write_model(os, net);
}

Network load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IntegrityError("cannot open " + path);
    return read_model(is);
}

}  // namespace cno::net
