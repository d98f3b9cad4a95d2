#include "cno/bench.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace cno::bench {

std::string to_string(GKind g) {
    switch (g) {
        case GKind::Mean: return "mean";
        case GKind::AbsDiff: return "absdiff";
        case GKind::ClippedAffine: return "clipped_affine";
    }
    return "?";
}

GKind g_from_string(const std::string& s) {
    if (s == "mean") return GKind::Mean;
    if (s == "absdiff") return GKind::AbsDiff;
    if (s == "clipped_affine") return GKind::ClippedAffine;
    throw InvalidArgument("unknown recursive cell '" + s + "'");
}

double apply_G(GKind g, double a, double b) {
    switch (g) {
        case GKind::Mean: return 0.5 * (a + b);
        case GKind::AbsDiff: return std::abs(a - b);
        case GKind::ClippedAffine: return std::clamp(0.7 * a - 0.5 * b + 0.4, 0.0, 1.0);
    }
    return 0.0;
}

static void check_input(const RecursiveTarget& target, const Vec& z) {
    if (target.T == 0) throw InvalidArgument("recursive target needs T >= 1");
    if (z.size() != target.T) throw InvalidArgument("input length does not match T");
    for (double v : z) {
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("input is outside the unit cube");
    }
}

Vec recursive_states(const RecursiveTarget& target, const Vec& z) {
    check_input(target, z);
    Vec s;
    double prev = 0.0;
    for (double v : z) {
        prev = apply_G(target.G, v, prev);
        s.push_back(prev);
    }
    return s;
}

double eval_recursive(const RecursiveTarget& target, const Vec& z) { return recursive_states(target, z).back(); }

static std::vector<Vec> draw_inputs(std::size_t n, std::size_t T, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<Vec> out(n, Vec(T));
    for (auto& z : out) {
        for (auto& v : z) v = U(rng);
    }
    return out;
}

causal::CausalDataset recursive_dataset(const RecursiveTarget& target, std::size_t n_paths, std::size_t M,
                                        std::uint64_t seed) {
    causal::CausalDataset ds;
    ds.grid = causal::uniform_grid(target.T, 1.0);
    ds.M = M;
    ds.in_dim = 1;
    ds.out_space = spaces::SchauderSpace::euclidean(1);
    ds.n_out = 1;
    for (const auto& z : draw_inputs(n_paths, target.T, seed)) {
        causal::PathSample p;
        const auto s = recursive_states(target, z);
        for (std::size_t t = 0; t < target.T; ++t) {
            p.x.push_back({z[t]});
            p.y.push_back({s[t]});
        }
        ds.paths.push_back(std::move(p));
    }
    return ds;
}

// Teacher-forced recurrent presentation: x_{t_i} = (z^(i-1), z_i).
static causal::CausalDataset recurrent_dataset(const RecursiveTarget& target, const std::vector<Vec>& zs) {
    causal::CausalDataset ds;
    ds.grid = causal::uniform_grid(target.T, 1.0);
    ds.M = 1;
    ds.in_dim = 2;
    ds.out_space = spaces::SchauderSpace::euclidean(1);
    ds.n_out = 1;
    for (const auto& z : zs) {
        causal::PathSample p;
        const auto s = recursive_states(target, z);
        double prev = 0.0;
        for (std::size_t t = 0; t < target.T; ++t) {
            p.x.push_back({prev, z[t]});
            p.y.push_back({s[t]});
            prev = s[t];
        }
        ds.paths.push_back(std::move(p));
    }
    return ds;
}

std::size_t cno_param_count(const causal::CnoModel& m) {
    return net::param_count(m.weave.hyper.spec) + m.weave.z0.size() + 1;
}

Vec predict_recurrent(const causal::CnoModel& model, const std::vector<net::Network>& filters, const Vec& z) {
    if (model.M != 1 || model.in_dim != model.n_out + 1) {
        throw InvalidArgument("model windows do not take (previous output, current input)");
    }
    if (filters.size() < z.size()) throw InvalidArgument("input is longer than the available filters");
    Vec y(model.n_out, 0.0);
    Vec out;
    for (std::size_t i = 0; i < z.size(); ++i) {
        Vec in = y;
        in.push_back(z[i]);
        y = net::forward(filters[i], in);
        out.push_back(y[0]);
    }
    return out;
}

static double median(Vec v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TradeoffReport compare(const RecursiveTarget& target, const std::vector<ModelConfig>& configs,
                       const CompareOptions& opts) {
    if (target.T == 0) throw InvalidArgument("recursive target needs T >= 1");
    if (configs.empty() || opts.seeds.empty()) throw InvalidArgument("nothing to compare");
    if (opts.n_train == 0 || opts.n_test == 0) throw InvalidArgument("empty train or test set");

    TradeoffReport rep;
    for (std::size_t c = 0; c < configs.size(); ++c) {
        const auto& cfg = configs[c];
        std::string label = cfg.label;
        if (label.empty()) {
            label = cfg.kind == ModelKind::FFNN ? "ffnn" : "cno";
            for (auto h : cfg.hidden) label += "-" + std::to_string(h);
        }
        Vec errs;
        std::size_t params = 0;
        for (auto seed : opts.seeds) {
            // Same draws for every model at a given seed.
            const auto train_z = draw_inputs(opts.n_train, target.T, seed * 2 + 1);
            const auto test_z = draw_inputs(opts.n_test, target.T, seed * 2 + 2);
            Row row;
            row.model = label;
            row.kind = cfg.kind;
            row.seed = seed;
            const auto t0 = std::chrono::steady_clock::now();
            auto topts = opts.train;
            topts.seed = seed;
            if (cfg.kind == ModelKind::FFNN) {
                net::NetSpec spec;
                spec.dims.push_back(target.T);
                spec.dims.insert(spec.dims.end(), cfg.hidden.begin(), cfg.hidden.end());
                spec.dims.push_back(1);
                net::Dataset train;
                for (const auto& z : train_z) {
                    train.x.push_back(z);
                    train.y.push_back({eval_recursive(target, z)});
                }
                net::Network n;
                try {
                    n = net::train(spec, train, topts).net;
                } catch (const net::TrainingDiverged& e) {
                    n = e.last_finite();
                    row.diverged = true;
                }
                row.params = net::param_count(n.spec);
                for (const auto& z : test_z) {
                    const double e = std::abs(net::forward(n, z)[0] - eval_recursive(target, z));
                    row.max_err = std::max(row.max_err, std::isnan(e) ? std::numeric_limits<double>::infinity() : e);
                }
            } else {
                causal::ConstructOptions co;
                co.eps_A = opts.eps_A;
                co.Q = opts.Q;
                co.delta = opts.delta;
                co.seed = seed;
                co.hidden = cfg.hidden;
                co.train = topts;
                co.threads = 1;
                const auto built = causal::construct_cno(recurrent_dataset(target, train_z), co);
                const auto filters = causal::rollout_filters(built.model, target.T);
                row.params = cno_param_count(built.model);
                for (const auto& w : built.windows) row.diverged = row.diverged || std::isinf(w.train_error);
                for (const auto& z : test_z) {
                    const double e = std::abs(predict_recurrent(built.model, filters, z).back() - eval_recursive(target, z));
                    row.max_err = std::max(row.max_err, std::isnan(e) ? std::numeric_limits<double>::infinity() : e);
                }
            }
            row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            params = std::max(params, row.params);
            errs.push_back(row.max_err);
            rep.rows.push_back(row);
        }
        rep.summary.push_back({label, cfg.kind, params, median(errs)});
    }
    return rep;
}

net::Network precompose_projection(const net::Network& src, std::size_t state_dim) {
    net::check(src);
    auto u = net::unpack(src.spec, src.theta);
    auto& L = u.layers.front();
    net::Layer wide;
    wide.rows = L.rows;
    wide.cols = L.cols + state_dim;
    wide.alpha = L.alpha;
    wide.A.assign(wide.rows * wide.cols, 0.0);
    for (std::size_t r = 0; r < L.rows; ++r) {
        for (std::size_t c = 0; c < L.cols; ++c) wide.at(r, c + state_dim) = L.at(r, c);
    }
    wide.b.assign(state_dim, 0.0);
    wide.b.insert(wide.b.end(), L.b.begin(), L.b.end());
    L = std::move(wide);
    net::NetSpec spec = src.spec;
    spec.dims.front() += state_dim;
    return {spec, net::pack(spec, u)};
}

bool rnn_reduction_check(const causal::CnoModel& model, const std::vector<std::vector<Vec>>& paths) {
    if (model.out_space.kind() != spaces::Kind::Euclidean || model.n_out != model.out_space.max_level()) {
        throw Unsupported("recurrent reduction needs a Euclidean output space with all coordinates kept");
    }
    const std::size_t T = model.horizon();
    const auto filters = causal::rollout_filters(model, T);
    std::vector<net::Network> cells;
    for (const auto& f : filters) cells.push_back(precompose_projection(f, model.n_out));
    for (const auto& x : paths) {
        const std::size_t h = std::min(T, x.size());
        const auto ref = causal::predict_with(model, filters, x, h);
        Vec y(model.n_out, 0.0);
        for (std::size_t i = 1; i <= h; ++i) {
            const std::vector<Vec> past(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(i));
            Vec in = y;
            const auto w = causal::window_input(past, i, model.M, model.in_dim);
            in.insert(in.end(), w.begin(), w.end());
            y = net::forward(cells[i - 1], in);
            for (std::size_t k = 0; k < y.size(); ++k) {
                if (std::bit_cast<std::uint64_t>(y[k]) != std::bit_cast<std::uint64_t>(ref[i - 1][k])) return false;
            }
        }
    }
    return true;
}

Verdict direction_verdict(const TradeoffReport& r) {
    Verdict v;
    const Summary* best = nullptr;
    for (const auto& s : r.summary) {
        if (s.kind == ModelKind::CNO && (!best || s.median_err < best->median_err)) best = &s;
    }
    if (!best) return v;
    v.best_cno = best->model;
    v.best_cno_err = best->median_err;
    v.best_cno_params = best->params;
    const Summary* ff = nullptr;
    for (const auto& s : r.summary) {
        if (s.kind == ModelKind::FFNN && s.params >= best->params && (!ff || s.median_err < ff->median_err)) ff = &s;
    }
    if (!ff) return v;
    v.ffnn = ff->model;
    v.ffnn_err = ff->median_err;
    v.ffnn_params = ff->params;
    v.pass = best->median_err <= ff->median_err;
    return v;
}

void write_csv(std::ostream& os, const TradeoffReport& r) {
    os << "model,params,max_err,seconds,seed,schema_version\n";
    os.precision(17);
    for (const auto& row : r.rows) {
        os << row.model << ',' << row.params << ',' << row.max_err << ',' << row.seconds << ',' << row.seed << ",1\n";
    }
}

}  // namespace cno::bench
