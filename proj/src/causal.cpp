#include "cno/causal.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <thread>

namespace cno::causal {

void validate(const TimeGrid& g) {
    if (g.times.size() < 2) throw InvalidArgument("time grid needs at least two points");
    if (g.times.front() != 0.0) throw InvalidArgument("time grid must start at 0");
    for (std::size_t i = 1; i < g.times.size(); ++i) {
        if (!(g.times[i] > g.times[i - 1]) || !std::isfinite(g.times[i])) {
            throw InvalidArgument("time grid must be strictly increasing and finite");
        }
    }
}

TimeGrid uniform_grid(std::size_t steps, double dt) {
    if (steps == 0 || !(dt > 0.0)) throw InvalidArgument("uniform grid needs steps >= 1 and dt > 0");
    TimeGrid g;
    for (std::size_t i = 0; i <= steps; ++i) g.times.push_back(dt * static_cast<double>(i));
    return g;
}

void validate(const CausalDataset& ds) {
    validate(ds.grid);
    if (ds.M == 0 || ds.in_dim == 0 || ds.n_out == 0) throw InvalidArgument("dataset dimensions must be positive");
    if (ds.n_out > ds.out_space.max_level()) throw InvalidArgument("n_out exceeds the output space");
    if (ds.paths.empty()) throw InvalidArgument("dataset has no paths");
    const std::size_t I = ds.horizon();
    for (const auto& p : ds.paths) {
        if (p.x.size() != I || p.y.size() != I) throw InvalidArgument("path length does not match the grid");
        if (!p.residual.empty() && p.residual.size() != I) throw InvalidArgument("residual length does not match the grid");
        for (const auto& v : p.x) {
            if (v.size() != ds.in_dim) throw InvalidArgument("input coordinates have the wrong length");
        }
        for (const auto& v : p.y) {
            if (v.size() != ds.n_out) throw InvalidArgument("target coordinates have the wrong length");
        }
    }
}

Vec window_input(const std::vector<Vec>& x, std::size_t i, std::size_t M, std::size_t in_dim) {
    if (i == 0 || i > x.size()) throw InvalidArgument("window index out of range");
    Vec out(M * in_dim, 0.0);
    for (std::size_t m = 0; m < M; ++m) {
        // slot m holds time i - M + 1 + m
        if (i + m + 1 <= M) continue;
        const std::size_t t = i + m + 1 - M;
        if (x[t - 1].size() != in_dim) throw InvalidArgument("input coordinates have the wrong length");
        std::copy(x[t - 1].begin(), x[t - 1].end(), out.begin() + static_cast<std::ptrdiff_t>(m * in_dim));
    }
    return out;
}

net::Dataset window_data(const CausalDataset& ds, std::size_t i) {
    net::Dataset d;
    for (const auto& p : ds.paths) {
        d.x.push_back(window_input(p.x, i, ds.M, ds.in_dim));
        d.y.push_back(p.y[i - 1]);
    }
    return d;
}

double target_distance(const spaces::SchauderSpace& out, const Vec& pred, const Vec& target, double residual,
                       filter::Measure m) {
    const spaces::Coefficients a{pred, 0.0};
    const spaces::Coefficients b{target, residual};
    return filter::distance(out, a, b, m);
}

std::size_t memory_for(double eps_A, double r, double c_mem) {
    if (!(eps_A > 0.0)) throw InvalidArgument("eps_A must be positive");
    if (!(r >= 0.0)) throw InvalidArgument("memory exponent must be nonnegative");
    if (!(c_mem > 0.0)) throw InvalidArgument("memory constant must be positive");
    const double v = std::ceil(c_mem * std::pow(eps_A, -r));
    if (!(v < 1e12)) throw BudgetOverflow("memory length is out of range", std::log(v));
    return std::max<std::size_t>(1, static_cast<std::size_t>(v));
}

std::uint64_t window_seed(std::uint64_t master, std::size_t i) {
    // splitmix64 of (master, i)
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(i) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Construction construct_cno(const CausalDataset& ds, const ConstructOptions& opts) {
    validate(ds);
    const std::size_t I = ds.horizon();
    const auto limit = weave::horizon_limit(opts.Q, opts.delta);
    if (I > limit) {
        throw InvalidArgument("horizon " + std::to_string(I) + " exceeds floor(delta^-Q) = " + std::to_string(limit));
    }
    if (!(opts.eps_A > 0.0)) throw InvalidArgument("eps_A must be positive");

    Construction out;
    if (opts.eps_D) {
        out.eps_D = *opts.eps_D;
    } else {
        for (const auto& p : ds.paths) {
            for (double r : p.residual) {
                const double e = filter::distance(ds.out_space, spaces::Coefficients{{}, 0.0},
                                                  spaces::Coefficients{{}, r}, opts.measure);
                out.eps_D = std::max(out.eps_D, e);
            }
        }
    }
    const double gate = opts.eps_A + out.eps_D;

    net::NetSpec spec;
    spec.dims.push_back(ds.M * ds.in_dim);
    spec.dims.insert(spec.dims.end(), opts.hidden.begin(), opts.hidden.end());
    spec.dims.push_back(ds.n_out);
    spec.activation = opts.activation;
    net::validate(spec);

    out.windows.resize(I);
    out.trained.resize(I);
    std::vector<std::string> errors(I);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t k = next++; k < I; k = next++) {
            const std::size_t i = k + 1;
            const auto t0 = std::chrono::steady_clock::now();
            WindowReport& rep = out.windows[k];
            rep.index = i;
            rep.seed = window_seed(opts.seed, i);
            rep.spec = spec;
            rep.gate = gate;
            try {
                const auto data = window_data(ds, i);
                auto topts = opts.train;
                topts.seed = rep.seed;
                auto res = net::train(spec, data, topts);
                rep.final_mse = res.final_mse;
                for (std::size_t s = 0; s < ds.paths.size(); ++s) {
                    const auto& p = ds.paths[s];
                    const double r = p.residual.empty() ? 0.0 : p.residual[k];
                    const auto y = net::forward(res.net, data.x[s]);
                    rep.train_error = std::max(rep.train_error, target_distance(ds.out_space, y, p.y[k], r, opts.measure));
                }
                out.trained[k] = std::move(res.net);
            } catch (const net::TrainingDiverged& e) {
                out.trained[k] = e.last_finite();
                rep.train_error = std::numeric_limits<double>::infinity();
            } catch (const std::exception& e) {
                errors[k] = e.what();
            }
            rep.shortfall = !(rep.train_error < gate);
            rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    std::size_t nthreads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    nthreads = std::min(nthreads, I);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
        if (!e.empty()) throw Error("window training failed: " + e);
    }
    for (const auto& w : out.windows) out.any_shortfall = out.any_shortfall || w.shortfall;

    std::vector<net::NetSpec> specs;
    for (const auto& n : out.trained) specs.push_back(n.spec);
    const auto dstar = net::dominating_dims(specs);
    std::vector<Vec> thetas;
    for (const auto& n : out.trained) {
        out.stored.push_back(net::pad_to(n, dstar));
        thetas.push_back(out.stored.back().theta);
    }

    CnoModel& m = out.model;
    m.synced_spec = {dstar, net::Activation::PReLU};
    m.grid = ds.grid;
    m.M = ds.M;
    m.in_dim = ds.in_dim;
    m.out_space = ds.out_space;
    m.n_out = ds.n_out;
    m.weave = weave::build_weave(thetas, opts.Q, opts.delta, opts.seed, opts.R);
    out.weave_drift = weave::rollout_drift(m.weave);
    return out;
}

std::vector<net::Network> rollout_filters(const CnoModel& model, std::size_t horizon) {
    const auto thetas = weave::rollout(model.weave, horizon);
    if (model.synced_spec.dims.empty() || net::param_count(model.synced_spec) != model.weave.P) {
        throw InvalidArgument("model spec does not match the woven parameter length");
    }
    std::vector<net::Network> nets;
    for (const auto& th : thetas) nets.push_back({model.synced_spec, th});
    return nets;
}

std::vector<Vec> predict_with(const CnoModel& model, const std::vector<net::Network>& filters,
                              const std::vector<Vec>& x_path, std::size_t horizon) {
    if (horizon > filters.size()) throw InvalidArgument("prediction horizon exceeds the available filters");
    if (x_path.size() < horizon) throw InvalidArgument("input path is shorter than the prediction horizon");
    std::vector<Vec> out;
    for (std::size_t i = 1; i <= horizon; ++i) {
        // Only x_{t_1..t_i} are visible here.
        const std::vector<Vec> past(x_path.begin(), x_path.begin() + static_cast<std::ptrdiff_t>(i));
        out.push_back(net::forward(filters[i - 1], window_input(past, i, model.M, model.in_dim)));
    }
    return out;
}

std::vector<Vec> predict(const CnoModel& model, const std::vector<Vec>& x_path, std::size_t horizon) {
    if (horizon > model.horizon()) throw InvalidArgument("prediction horizon exceeds the model horizon");
    return predict_with(model, rollout_filters(model, horizon), x_path, horizon);
}

std::vector<spaces::Element> predict_elements(const CnoModel& model, const std::vector<Vec>& x_path,
                                              std::size_t horizon) {
    std::vector<spaces::Element> out;
    for (auto& c : predict(model, x_path, horizon)) {
        out.push_back(spaces::reconstruct(model.out_space, {std::move(c), model.out_space.tag()}));
    }
    return out;
}

bool causality_audit(const CnoModel& model, const std::vector<Vec>& path_a, const std::vector<Vec>& path_b,
                     std::size_t i) {
    if (i == 0 || i > model.horizon()) throw InvalidArgument("audit index out of range");
    if (path_a.size() != path_b.size() || path_a.size() < i) throw InvalidArgument("audit paths differ in length");
    for (std::size_t t = 0; t < i; ++t) {
        if (path_a[t] != path_b[t]) throw InvalidArgument("audit paths must agree up to the audited time");
    }
    const std::size_t horizon = std::min(model.horizon(), path_a.size());
    const auto filters = rollout_filters(model, horizon);
    const auto ya = predict_with(model, filters, path_a, horizon);
    const auto yb = predict_with(model, filters, path_b, horizon);
    for (std::size_t t = 0; t < i; ++t) {
        for (std::size_t k = 0; k < ya[t].size(); ++k) {
            if (std::bit_cast<std::uint64_t>(ya[t][k]) != std::bit_cast<std::uint64_t>(yb[t][k])) return false;
        }
    }
    return true;
}

}  // namespace cno::causal
