#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "cno/bench.hpp"
#include "cno/io.hpp"
#include "cno/sde.hpp"
#include "config.hpp"

namespace fs = std::filesystem;
using namespace cno;
using cli::Section;
using json = nlohmann::json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kBudget = 3, kShortfall = 4, kIntegrity = 5 };

fs::path output_root() {
    const char* env = std::getenv("CNO_OUTPUT_ROOT");
    return env && *env ? fs::path(env) : fs::path(".");
}

// Collects what goes into run_manifest.json.
struct Run {
    std::string sub;
    fs::path dir;
    json config = json::object();
    json artifacts = json::object();
    json timings = json::object();
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    std::string path(const std::string& name) const { return (dir / name).string(); }

    void write_text(const std::string& name, const std::string& text) {
        io::write_file(path(name), text);
        artifacts[name] = io::file_entry(path(name));
    }
    void write_json(const std::string& name, const json& j) { write_text(name, j.dump(2) + "\n"); }
    void add_bundle(const std::string& name) {
        for (const char* f : {"manifest.json", "weave.bin", "spaces.json"}) {
            artifacts[name + "/" + f] = io::file_entry(path(name + "/" + f));
        }
    }
    void stage(const std::string& name) {
        const auto now = std::chrono::steady_clock::now();
        timings[name] = std::chrono::duration<double>(now - t0).count();
        t0 = now;
    }

    void manifest(int code, const json& error) const {
        fs::create_directories(dir);
        json m{{"schema_version", io::kSchemaVersion},
               {"subcommand", sub},
               {"library_version", io::kLibraryVersion},
               {"config", config},
               {"config_sha256", io::sha256_hex(config.dump())},
               {"artifacts", artifacts},
               {"timings_seconds", timings},
               {"exit_code", code},
               {"status", code == kOk ? "ok" : "error"}};
        if (!error.is_null()) m["error"] = error;
        io::write_file((dir / "run_manifest.json").string(), m.dump(2) + "\n");
    }
};

void set_output(Run& run, Section& root, const std::string& override_dir) {
    auto name = root.get<std::string>("output_dir", run.sub);
    if (!override_dir.empty()) name = override_dir;
    run.dir = output_root() / name;
    fs::create_directories(run.dir);
}

net::TrainOptions parse_train(Section s, net::TrainOptions o = {}) {
    o.lr = s.get("lr", o.lr);
    o.epochs = s.get("epochs", o.epochs);
    o.batch = s.get("batch", o.batch);
    o.optimizer = s.choice("optimizer", "adam", {"adam", "sgd"}) == "adam" ? net::Optimizer::Adam : net::Optimizer::SGD;
    o.cosine_decay = s.get("cosine_decay", o.cosine_decay);
    o.final_lr_ratio = s.get("final_lr_ratio", o.final_lr_ratio);
    o.target_mse = s.get("target_mse", o.target_mse);
    o.keep_best = s.get("keep_best", o.keep_best);
    if (!(o.lr > 0.0)) throw ConfigError(s.field("lr"), "must be positive");
    if (o.epochs == 0) throw ConfigError(s.field("epochs"), "must be positive");
    if (o.batch == 0) throw ConfigError(s.field("batch"), "must be positive");
    s.finish();
    return o;
}

net::Activation parse_activation(Section& s, const std::string& def) {
    return s.choice("activation", def, {"relu", "prelu"}) == "relu" ? net::Activation::ReLU : net::Activation::PReLU;
}

std::vector<std::size_t> parse_hidden(Section& s, const std::vector<std::size_t>& def) {
    auto h = s.get("hidden", def);
    if (h.empty()) throw ConfigError(s.field("hidden"), "needs at least one hidden layer");
    for (auto w : h) {
        if (w == 0) throw ConfigError(s.field("hidden"), "widths must be positive");
    }
    return h;
}

// "model" section shared by construct and sde-bench.
causal::ConstructOptions parse_model(Section s, causal::ConstructOptions o) {
    o.eps_A = s.get("eps_A", o.eps_A);
    if (s.has("eps_D")) {
        o.eps_D = s.get("eps_D", 0.0);
    } else {
        s.get<std::string>("eps_D", "measured");
    }
    o.Q = s.get("Q", o.Q);
    o.delta = s.get("delta", o.delta);
    o.R = s.get("R", o.R);
    o.seed = s.get("seed", o.seed);
    o.hidden = parse_hidden(s, o.hidden);
    o.activation = parse_activation(s, "relu");
    o.measure = s.choice("measure", "norm", {"norm", "metric"}) == "norm" ? filter::Measure::Norm : filter::Measure::Metric;
    o.threads = s.get("threads", o.threads);
    if (!(o.eps_A > 0.0)) throw ConfigError(s.field("eps_A"), "must be positive");
    if (o.eps_D && !(*o.eps_D >= 0.0)) throw ConfigError(s.field("eps_D"), "must be nonnegative");
    if (o.Q == 0) throw ConfigError(s.field("Q"), "must be positive");
    if (!(o.delta > 0.0 && o.delta < 1.0)) throw ConfigError(s.field("delta"), "must lie in (0, 1)");
    if (!(o.R > 0.0)) throw ConfigError(s.field("R"), "must be positive");
    s.finish();
    return o;
}

json window_reports(const std::vector<causal::WindowReport>& ws) {
    json a = json::array();
    for (const auto& w : ws) {
        a.push_back({{"index", w.index},
                     {"seed", w.seed},
                     {"spec", io::spec_to_json(w.spec)},
                     {"train_error", std::isfinite(w.train_error) ? json(w.train_error) : json("diverged")},
                     {"gate", w.gate},
                     {"shortfall", w.shortfall},
                     {"final_mse", w.final_mse}});
    }
    return a;
}

// ---------------------------------------------------------------------------

int cmd_budget(Run& run, Section& root) {
    const auto table = root.choice("table", "table1", {"table1", "table2"});
    json out{{"schema_version", io::kSchemaVersion}, {"table", table}};
    if (table == "table1") {
        filter::BudgetInput b;
        auto reg = root.child("regularity");
        const auto kind = reg.choice("kind", "holder", {"holder", "smooth"});
        if (kind == "holder") {
            const double alpha = reg.get("alpha", 1.0);
            if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError(reg.field("alpha"), "must lie in (0, 1]");
            b.regularity = spaces::Holder{alpha};
        } else {
            const int k = reg.get("k", 1);
            if (k < 1) throw ConfigError(reg.field("k"), "must be at least 1");
            b.regularity = spaces::Smooth{k};
        }
        reg.finish();
        b.eps_A = root.get("eps_A", b.eps_A);
        b.eps_D = root.get("eps_D", b.eps_D);
        b.lambda = root.get("lambda", b.lambda);
        b.n_in = root.get("n_in", b.n_in);
        b.n_out = root.get("n_out", b.n_out);
        b.C_f = root.get("C_f", b.C_f);
        auto mod = root.child("modulus");
        const auto mk = mod.choice("kind", "identity", {"identity", "table"});
        if (mk == "table") {
            filter::MonotoneTable t;
            t.xs = mod.require<std::vector<double>>("xs");
            t.ys = mod.require<std::vector<double>>("ys");
            try {
                filter::validate(t);
            } catch (const InvalidArgument& e) {
                throw ConfigError(mod.field("xs"), e.what());
            }
            b.omega_phi_dagger = filter::modulus_dagger(t);
        }
        mod.finish();
        root.finish();
        const auto r = filter::budget(b);
        out.update({{"width", r.width},
                    {"depth", r.depth},
                    {"C1", r.C1},
                    {"C2", r.C2},
                    {"C3", r.C3},
                    {"inner", r.inner},
                    {"log_inner", r.log_inner}});
    } else {
        const auto P = root.require<std::size_t>("P");
        const auto Q = root.require<std::size_t>("Q");
        const auto delta = root.require<double>("delta");
        const auto T = root.get<std::size_t>("T", 1);
        root.finish();
        if (Q == 0) throw ConfigError("Q", "must be positive");
        if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta", "must lie in (0, 1)");
        if (T > weave::horizon_limit(Q, delta)) {
            throw BudgetInfeasible("T exceeds floor(delta^-Q)", static_cast<double>(weave::horizon_limit(Q, delta)));
        }
        const auto r = weave::table2_report(P, Q, delta, T);
        out.update({{"I", r.I}, {"width_bound", r.width_bound}, {"depth_expr", r.depth_expr}, {"params_expr", r.params_expr}});
    }
    run.stage("budget");
    run.write_json("budget.json", out);
    std::cout << out.dump(2) << "\n";
    return kOk;
}

// Random element of FourierL2 given by coordinates with |c_h| <= h^-decay.
spaces::Coefficients random_series(std::mt19937_64& rng, std::size_t modes, double decay) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    spaces::Coefficients c;
    for (std::size_t h = 1; h <= modes; ++h) c.coords.push_back(U(rng) * std::pow(static_cast<double>(h), -decay));
    return c;
}

int cmd_train_filter(Run& run, Section& root) {
    auto task = root.child("task");
    const auto kind = task.choice("kind", "recursive", {"recursive", "fourier_damp"});
    const auto n_train = root.get<std::size_t>("n_train", 512);
    const auto n_test = root.get<std::size_t>("n_test", 256);
    const auto seed = root.get<std::uint64_t>("seed", 0);
    auto arch = root.child("network");
    const auto hidden = parse_hidden(arch, {32});
    const auto act = parse_activation(arch, "relu");
    arch.finish();
    const auto measure =
        root.choice("measure", "metric", {"metric", "norm"}) == "norm" ? filter::Measure::Norm : filter::Measure::Metric;
    auto topts = parse_train(root.child("train"));
    topts.seed = seed;
    if (n_train == 0 || n_test == 0) throw ConfigError("n_train", "train and test sets must be nonempty");

    std::mt19937_64 rng(seed ^ 0xa5a5a5a5ULL);
    std::optional<spaces::SchauderSpace> in_space, out_space;
    std::size_t n_in = 0, n_out = 0;
    filter::Operator target;
    std::vector<spaces::Element> train_x, test_x;
    if (kind == "recursive") {
        bench::RecursiveTarget rt;
        rt.T = task.get<std::size_t>("T", 4);
        rt.G = bench::g_from_string(task.choice("G", "mean", {"mean", "absdiff", "clipped_affine"}));
        if (rt.T == 0) throw ConfigError(task.field("T"), "must be positive");
        in_space = spaces::SchauderSpace::euclidean(rt.T);
        out_space = spaces::SchauderSpace::euclidean(1);
        n_in = rt.T;
        n_out = 1;
        target = [rt](const spaces::Element& x) -> spaces::Element {
            return spaces::Coefficients{{bench::eval_recursive(rt, std::get<spaces::Coefficients>(x).coords)}, 0.0};
        };
        std::uniform_real_distribution<double> U(0.0, 1.0);
        auto draw = [&]() {
            spaces::Coefficients c;
            for (std::size_t t = 0; t < rt.T; ++t) c.coords.push_back(U(rng));
            return spaces::Element{c};
        };
        for (std::size_t i = 0; i < n_train; ++i) train_x.push_back(draw());
        for (std::size_t i = 0; i < n_test; ++i) test_x.push_back(draw());
    } else {
        const double horizon = task.get("horizon", 1.0);
        const auto modes = task.get<std::size_t>("modes", 16);
        const double decay = task.get("decay", 1.0);
        n_in = task.get<std::size_t>("n_in", 8);
        n_out = task.get<std::size_t>("n_out", 8);
        if (!(horizon > 0.0)) throw ConfigError(task.field("horizon"), "must be positive");
        if (n_in == 0 || n_in > modes) throw ConfigError(task.field("n_in"), "must lie in [1, modes]");
        if (n_out == 0 || n_out > modes) throw ConfigError(task.field("n_out"), "must lie in [1, modes]");
        in_space = spaces::SchauderSpace::fourier_l2(horizon);
        out_space = in_space;
        // c_h -> c_h / (1 + h)
        target = [](const spaces::Element& x) -> spaces::Element {
            auto c = std::get<spaces::Coefficients>(x);
            for (std::size_t h = 0; h < c.coords.size(); ++h) c.coords[h] /= static_cast<double>(h + 2);
            return c;
        };
        for (std::size_t i = 0; i < n_train; ++i) train_x.push_back(random_series(rng, modes, decay));
        for (std::size_t i = 0; i < n_test; ++i) test_x.push_back(random_series(rng, modes, decay));
    }
    task.finish();
    root.finish();

    auto coords = [](const spaces::SchauderSpace& s, const spaces::Element& e, std::size_t n) {
        return spaces::project(s, e, n).coords;
    };
    net::Dataset data;
    for (const auto& x : train_x) {
        data.x.push_back(coords(*in_space, x, n_in));
        data.y.push_back(coords(*out_space, target(x), n_out));
    }
    net::NetSpec spec;
    spec.dims.push_back(n_in);
    spec.dims.insert(spec.dims.end(), hidden.begin(), hidden.end());
    spec.dims.push_back(n_out);
    spec.activation = act;
    run.stage("data");
    const auto res = net::train(spec, data, topts);
    run.stage("train");
    const auto f = filter::make_filter(*in_space, *out_space, res.net);
    const auto split_train = filter::error_decomposition(target, f, train_x, measure);
    const auto split_test = filter::error_decomposition(target, f, test_x, measure);
    run.stage("evaluate");

    std::ostringstream mb(std::ios::binary);
    net::write_model(mb, res.net);
    run.write_text("model.bin", mb.str());
    auto split_json = [](const filter::ErrorSplit& s) {
        return json{{"enc_out", s.enc_out}, {"enc_in", s.enc_in}, {"approx", s.approx},
                    {"end_to_end", s.end_to_end}, {"sum", s.sum()}, {"sound", s.end_to_end <= s.sum()}};
    };
    const json report{{"schema_version", io::kSchemaVersion},
                      {"in_space", io::space_to_json(*in_space)},
                      {"out_space", io::space_to_json(*out_space)},
                      {"n_in", n_in},
                      {"n_out", n_out},
                      {"spec", io::spec_to_json(spec)},
                      {"params", net::param_count(spec)},
                      {"final_mse", res.final_mse},
                      {"error_split_train", split_json(split_train)},
                      {"error_split_test", split_json(split_test)}};
    run.write_json("report.json", report);
    std::cout << report.dump(2) << "\n";
    return kOk;
}

int cmd_construct(Run& run, Section& root) {
    auto opts = parse_model(root.child("model"), causal::ConstructOptions{});
    opts.train = parse_train(root.child("train"));
    auto task = root.child("task");
    bench::RecursiveTarget rt;
    task.choice("kind", "recursive", {"recursive"});
    rt.T = task.get<std::size_t>("T", 8);
    rt.G = bench::g_from_string(task.choice("G", "mean", {"mean", "absdiff", "clipped_affine"}));
    auto M = task.get<std::size_t>("M", 0);
    if (task.has("c_mem")) {
        const double c_mem = task.get("c_mem", 1.0);
        const double r = task.get("r", 0.0);
        if (M != 0) throw ConfigError(task.field("M"), "give either M or c_mem, not both");
        M = causal::memory_for(opts.eps_A, r, c_mem);
    }
    if (M == 0) M = rt.T;
    const auto n_paths = task.get<std::size_t>("n_paths", 256);
    const auto data_seed = task.get<std::uint64_t>("data_seed", 0);
    task.finish();
    if (rt.T == 0) throw ConfigError(task.field("T"), "must be positive");
    root.finish();

    const auto ds = bench::recursive_dataset(rt, n_paths, M, data_seed);
    if (ds.horizon() > weave::horizon_limit(opts.Q, opts.delta)) {
        throw BudgetInfeasible("T exceeds floor(delta^-Q) for the configured Q and delta",
                               static_cast<double>(weave::horizon_limit(opts.Q, opts.delta)));
    }
    run.stage("data");
    const auto built = causal::construct_cno(ds, opts);
    run.stage("construct");
    const json extra{{"task", run.config["task"]}, {"windows", window_reports(built.windows)}};
    io::write_bundle(run.path("bundle"), built.model, extra);
    run.add_bundle("bundle");
    const json report{{"schema_version", io::kSchemaVersion},
                      {"M", M},
                      {"eps_D", built.eps_D},
                      {"weave_drift", built.weave_drift},
                      {"any_shortfall", built.any_shortfall},
                      {"windows", window_reports(built.windows)}};
    run.write_json("report.json", report);
    std::cout << report.dump(2) << "\n";
    return built.any_shortfall ? kShortfall : kOk;
}

std::vector<std::vector<causal::Vec>> read_paths(const std::string& file) {
    json j;
    try {
        j = json::parse(io::read_file(file));
    } catch (const std::exception& e) {
        throw ConfigError("<input>", std::string("cannot parse ") + file + ": " + e.what());
    }
    if (!j.contains("schema_version") || j["schema_version"] != io::kSchemaVersion) {
        throw ConfigError("schema_version", "input file has an unsupported schema_version");
    }
    try {
        return j.at("paths").get<std::vector<std::vector<causal::Vec>>>();
    } catch (const json::exception& e) {
        throw ConfigError("paths", e.what());
    }
}

int cmd_predict(Run& run, const std::string& bundle, const std::string& input, std::size_t horizon) {
    run.config = {{"bundle", bundle}, {"input", input}, {"horizon", horizon}};
    const auto model = io::read_bundle(bundle);
    const auto paths = read_paths(input);
    const std::size_t h = horizon ? horizon : model.horizon();
    if (h > model.horizon()) throw ConfigError("horizon", "exceeds the model horizon");
    const auto filters = causal::rollout_filters(model, h);
    json preds = json::array();
    for (std::size_t p = 0; p < paths.size(); ++p) {
        for (const auto& x : paths[p]) {
            if (x.size() != model.in_dim) throw ConfigError("paths[" + std::to_string(p) + "]", "wrong input dimension");
        }
        preds.push_back(causal::predict_with(model, filters, paths[p], h));
    }
    run.stage("predict");
    run.write_json("predictions.json", {{"schema_version", io::kSchemaVersion}, {"horizon", h}, {"predictions", preds}});
    return kOk;
}

int cmd_audit(Run& run, const std::string& bundle, std::size_t pairs, std::uint64_t seed) {
    run.config = {{"bundle", bundle}, {"pairs", pairs}, {"seed", seed}};
    const auto model = io::read_bundle(bundle);
    const std::size_t T = model.horizon();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(1, T);
    std::size_t passed = 0;
    json failures = json::array();
    for (std::size_t k = 0; k < pairs; ++k) {
        std::vector<causal::Vec> a(T, causal::Vec(model.in_dim));
        for (auto& v : a) {
            for (auto& x : v) x = U(rng);
        }
        const std::size_t i = pick(rng);
        auto b = a;
        for (std::size_t t = i; t < T; ++t) {
            for (auto& x : b[t]) x = U(rng);
        }
        if (causal::causality_audit(model, a, b, i)) {
            ++passed;
        } else {
            failures.push_back({{"pair", k}, {"index", i}});
        }
    }
    run.stage("audit");
    const json out{{"schema_version", io::kSchemaVersion}, {"pairs", pairs}, {"passed", passed}, {"failures", failures}};
    run.write_json("audit.json", out);
    std::cout << out.dump(2) << "\n";
    return passed == pairs ? kOk : kIntegrity;
}

int cmd_weave_test(Run& run, Section& root) {
    const auto T = root.get<std::size_t>("T", 16);
    const auto P = root.get<std::size_t>("P", 17);
    const auto Q = root.get<std::size_t>("Q", 4);
    const double delta = root.get("delta", 0.5);
    const double R = root.get("R", 1.0);
    const auto seed = root.get<std::uint64_t>("seed", 0);
    const double scale = root.get("theta_scale", 1.0);
    root.finish();
    if (T == 0 || P == 0 || Q == 0) throw ConfigError("T", "T, P and Q must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta", "must lie in (0, 1)");
    if (T > weave::horizon_limit(Q, delta)) {
        throw BudgetInfeasible("T exceeds floor(delta^-Q)", static_cast<double>(weave::horizon_limit(Q, delta)));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, scale);
    std::vector<weave::Vec> thetas(T, weave::Vec(P));
    for (auto& th : thetas) {
        for (auto& v : th) v = N(rng);
    }
    const auto w = weave::build_weave(thetas, Q, delta, seed, R);
    run.stage("weave");
    const auto roll = weave::rollout(w, T);
    double worst = 0.0;
    for (std::size_t t = 0; t < T; ++t) worst = std::max(worst, weave::relative_error(roll[t], thetas[t]));
    const auto t2 = weave::table2_report(w);
    const json out{{"schema_version", io::kSchemaVersion},
                   {"max_relative_error", worst},
                   {"min_separation", T > 1 ? weave::min_separation(w.packing) : 0.0},
                   {"aspect_ratio", T > 1 ? weave::aspect_ratio(w.packing) : 0.0},
                   {"aspect_bound", std::sqrt(5.0) / delta * R},
                   {"M_T", w.M_T},
                   {"table2",
                    {{"I", t2.I}, {"width_bound", t2.width_bound}, {"width", t2.width}, {"depth", t2.depth},
                     {"params", t2.params}, {"depth_expr", t2.depth_expr}, {"params_expr", t2.params_expr}}}};
    std::ostringstream wb(std::ios::binary);
    weave::write_weave(wb, w);
    run.write_text("weave.bin", wb.str());
    run.write_json("weave_test.json", out);
    std::cout << out.dump(2) << "\n";
    return kOk;
}

int cmd_sde_bench(Run& run, Section& root) {
    auto sde_s = root.child("sde");
    const auto kind = sde_s.choice("kind", "ou", {"ou", "constant_drift", "zero"});
    sde::SdeCoeffs c;
    if (kind == "ou") {
        c = sde::ornstein_uhlenbeck(sde_s.get("theta", 1.0), sde_s.get("sigma", 0.5));
    } else if (kind == "constant_drift") {
        c = sde::constant_drift(sde_s.get("a", 1.0));
    } else {
        c = sde::zero_coeffs();
    }
    sde_s.finish();
    sde::SdeBenchOptions o;
    auto g = root.child("grid");
    o.windows = g.get("windows", o.windows);
    o.dt = g.get("dt", o.dt);
    g.choice("time_unit", "s", {"s"});
    g.finish();
    auto orc = root.child("oracle");
    o.oracle.n_paths = orc.get("n_paths", o.oracle.n_paths);
    o.oracle.dt = orc.get("dt", o.oracle.dt);
    o.oracle.seed = orc.get("seed", o.oracle.seed);
    o.oracle.tamed = orc.get("tamed", o.oracle.tamed);
    orc.finish();
    auto d = root.child("data");
    o.train.n_orbits = d.get("n_orbits", o.train.n_orbits);
    o.train.n_modes = d.get("n_modes", o.train.n_modes);
    o.train.init.mean_lo = d.get("mean_lo", o.train.init.mean_lo);
    o.train.init.mean_hi = d.get("mean_hi", o.train.init.mean_hi);
    o.train.init.coeff_abs = d.get("coeff_abs", o.train.init.coeff_abs);
    o.train.seed = d.get("seed", o.train.seed);
    o.n_test_orbits = d.get("n_test_orbits", o.n_test_orbits);
    o.test_seed = d.get("test_seed", o.test_seed);
    o.lipschitz_pairs = d.get("lipschitz_pairs", o.lipschitz_pairs);
    d.finish();
    auto defaults = sde::sde_construct_defaults();
    o.construct = parse_model(root.child("model"), defaults);
    o.construct.train = parse_train(root.child("train"), defaults.train);
    root.finish();

    const auto r = sde::run_sde_bench(c, o);
    run.stage("sde_bench");

    std::ostringstream csv;
    csv.precision(17);
    csv << "window,train_error,test_error,gate,max_residual,within,schema_version\n";
    for (const auto& w : r.windows) {
        csv << w.index << ',' << w.train_error << ',' << w.test_error << ',' << w.gate << ',' << w.max_residual << ','
            << (w.within ? 1 : 0) << ",1\n";
    }
    run.write_text("sde_windows.csv", csv.str());

    auto dataset_json = [](const sde::SdeDataset& s) {
        json windows = json::array();
        for (std::size_t k = 0; k < s.ds.horizon(); ++k) {
            json x = json::array(), y = json::array(), res = json::array();
            for (const auto& p : s.ds.paths) {
                x.push_back(p.x[k]);
                y.push_back(p.y[k]);
                res.push_back(p.residual[k]);
            }
            windows.push_back({{"index", k + 1}, {"x", x}, {"y", y}, {"residual", res}});
        }
        return json{{"sde_times", s.sde_times}, {"cno_grid", s.ds.grid.times}, {"windows", windows}};
    };
    run.write_json("dataset.json", {{"schema_version", io::kSchemaVersion},
                                    {"oracle", run.config["oracle"]},
                                    {"sde", run.config["sde"]},
                                    {"train", dataset_json(r.train_data)},
                                    {"test", dataset_json(r.test_data)}});
    io::write_bundle(run.path("bundle"), r.built.model, {{"windows", window_reports(r.built.windows)}});
    run.add_bundle("bundle");
    const json report{{"schema_version", io::kSchemaVersion},
                      {"sde", c.name},
                      {"M_g", c.M_g},
                      {"eps_D", r.built.eps_D},
                      {"weave_drift", r.built.weave_drift},
                      {"all_within", r.all_within},
                      {"ito", {{"mc", r.ito.mc}, {"exact", r.ito.exact}, {"se", r.ito.se}, {"within", r.ito.within}}},
                      {"lipschitz",
                       {{"max_ratio", r.lipschitz.max_ratio},
                        {"bound", r.lipschitz.bound},
                        {"pairs", r.lipschitz.pairs_used},
                        {"within", r.lipschitz.within}}}};
    run.write_json("sde_report.json", report);
    std::cout << csv.str() << report.dump(2) << "\n";
    return r.all_within ? kOk : kShortfall;
}

int cmd_compare_rnn(Run& run, Section& root) {
    bench::RecursiveTarget rt;
    rt.T = root.get<std::size_t>("T", 6);
    rt.G = bench::g_from_string(root.choice("G", "mean", {"mean", "absdiff", "clipped_affine"}));
    bench::CompareOptions o;
    o.eps_A = root.get("eps_A", o.eps_A);
    o.Q = root.get("Q", o.Q);
    o.delta = root.get("delta", o.delta);
    o.n_train = root.get("n_train", o.n_train);
    o.n_test = root.get("n_test", o.n_test);
    o.seeds = root.get("seeds", o.seeds);
    std::vector<bench::ModelConfig> ladder;
    const json default_ladder = json::array({{{"kind", "ffnn"}, {"hidden", {8, 8}}},
                                             {{"kind", "ffnn"}, {"hidden", {16, 16}}},
                                             {{"kind", "ffnn"}, {"hidden", {32, 32}}},
                                             {{"kind", "ffnn"}, {"hidden", {64, 64}}},
                                             {{"kind", "cno"}, {"hidden", {4}}},
                                             {{"kind", "cno"}, {"hidden", {8}}}});
    const json src = root.has("ladder") ? root.raw()["ladder"] : default_ladder;
    root.get<json>("ladder", default_ladder);
    if (!src.is_array() || src.empty()) throw ConfigError("ladder", "expected a nonempty array");
    for (std::size_t i = 0; i < src.size(); ++i) {
        json resolved;
        Section e(src[i], "ladder[" + std::to_string(i) + "]", resolved);
        bench::ModelConfig mc;
        mc.kind = e.choice("kind", "ffnn", {"ffnn", "cno"}) == "ffnn" ? bench::ModelKind::FFNN : bench::ModelKind::CNO;
        mc.hidden = parse_hidden(e, {16});
        mc.label = e.get<std::string>("label", "");
        e.finish();
        ladder.push_back(mc);
    }
    o.train = parse_train(root.child("train"));
    root.finish();
    bool has_ffnn = false, has_cno = false;
    for (const auto& m : ladder) (m.kind == bench::ModelKind::FFNN ? has_ffnn : has_cno) = true;
    if (!has_ffnn || !has_cno) throw ConfigError("ladder", "needs at least one ffnn and one cno entry");

    const auto rep = bench::compare(rt, ladder, o);
    run.stage("compare");
    std::ostringstream csv;
    bench::write_csv(csv, rep);
    run.write_text("tradeoff.csv", csv.str());
    const auto v = bench::direction_verdict(rep);
    json summary = json::array();
    for (const auto& s : rep.summary) {
        summary.push_back({{"model", s.model},
                           {"kind", s.kind == bench::ModelKind::FFNN ? "ffnn" : "cno"},
                           {"params", s.params},
                           {"median_max_err", s.median_err}});
    }
    const json out{{"schema_version", io::kSchemaVersion},
                   {"directional", true},
                   {"summary", summary},
                   {"verdict",
                    {{"pass", v.pass},
                     {"best_cno", v.best_cno},
                     {"best_cno_err", v.best_cno_err},
                     {"best_cno_params", v.best_cno_params},
                     {"ffnn", v.ffnn},
                     {"ffnn_err", v.ffnn_err},
                     {"ffnn_params", v.ffnn_params}}}};
    run.write_json("summary.json", out);
    std::cout << csv.str() << out.dump(2) << "\n";
    return kOk;
}

json error_json(const std::exception& e, const char* type) {
    json j{{"type", type}, {"message", e.what()}};
    if (auto c = dynamic_cast<const ConfigError*>(&e)) j["field_path"] = c->field_path();
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal neural operator experiments"};
    app.require_subcommand(1);
    std::string config_path, out_dir, bundle, input;
    std::size_t horizon = 0, pairs = 100;
    std::uint64_t seed = 0;
    bool as_json = false;

    std::vector<std::string> config_cmds{"budget", "train-filter", "construct", "weave-test", "sde-bench", "compare-rnn"};
    for (const auto& name : config_cmds) {
        auto* s = app.add_subcommand(name);
        s->add_option("-c,--config", config_path, "JSON config file")->required();
        s->add_option("-o,--output-dir", out_dir, "output directory under CNO_OUTPUT_ROOT");
    }
    auto* pred = app.add_subcommand("predict", "Run a bundle on input paths");
    pred->add_option("-b,--bundle", bundle)->required();
    pred->add_option("-i,--input", input, "JSON file with {schema_version, paths}")->required();
    pred->add_option("--horizon", horizon);
    pred->add_option("-o,--output-dir", out_dir);
    auto* aud = app.add_subcommand("audit", "Randomized causality audit of a bundle");
    aud->add_option("-b,--bundle", bundle)->required();
    aud->add_option("--pairs", pairs);
    aud->add_option("--seed", seed);
    aud->add_option("-o,--output-dir", out_dir);
    auto* ins = app.add_subcommand("inspect", "Summarize and verify a bundle");
    ins->add_option("bundle", bundle)->required();
    ins->add_flag("--json", as_json);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    if (sub == "inspect") {
        try {
            const auto s = io::inspect_bundle(bundle);
            std::cout << (as_json ? s.dump(2) + "\n" : io::format_inspect(s));
            return kOk;
        } catch (const IntegrityError& e) {
            std::cerr << "integrity error: " << e.what() << "\n";
            return kIntegrity;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kFailure;
        }
    }

    Run run;
    run.sub = sub;
    run.dir = output_root() / (out_dir.empty() ? sub : out_dir);
    int code = kOk;
    json error;
    try {
        if (sub == "predict" || sub == "audit") {
            fs::create_directories(run.dir);
            code = sub == "predict" ? cmd_predict(run, bundle, input, horizon) : cmd_audit(run, bundle, pairs, seed);
        } else {
            run.config = json::object();
            const json cfg = cli::load_config(config_path);
            Section root(cfg, "", run.config);
            root.get<int>("schema_version", io::kSchemaVersion);
            set_output(run, root, out_dir);
            if (sub == "budget") code = cmd_budget(run, root);
            else if (sub == "train-filter") code = cmd_train_filter(run, root);
            else if (sub == "construct") code = cmd_construct(run, root);
            else if (sub == "weave-test") code = cmd_weave_test(run, root);
            else if (sub == "sde-bench") code = cmd_sde_bench(run, root);
            else code = cmd_compare_rnn(run, root);
        }
        if (code == kShortfall) error = {{"type", "shortfall"}, {"message", "a window missed its error gate"}};
        if (code == kIntegrity) error = {{"type", "causality"}, {"message", "causality audit failed"}};
    } catch (const ConfigError& e) {
        code = kConfig;
        error = error_json(e, "config");
    } catch (const BudgetInfeasible& e) {
        code = kBudget;
        error = error_json(e, "budget_infeasible");
        error["best_achieved"] = e.best_achieved();
    } catch (const BudgetOverflow& e) {
        code = kBudget;
        error = error_json(e, "budget_overflow");
        error["log_value"] = e.log_value();
    } catch (const PackingInfeasible& e) {
        code = kBudget;
        error = error_json(e, "packing_infeasible");
        error["achieved"] = e.achieved();
    } catch (const IntegrityError& e) {
        code = kIntegrity;
        error = error_json(e, "integrity");
    } catch (const InvalidArgument& e) {
        code = kConfig;
        error = error_json(e, "invalid_argument");
    } catch (const std::exception& e) {
        code = kFailure;
        error = error_json(e, "error");
    }
    if (!error.is_null()) std::cerr << sub << ": " << error.value("message", std::string()) << "\n";
    try {
        run.manifest(code, error);
    } catch (const std::exception& e) {
        std::cerr << "cannot write run manifest: " << e.what() << "\n";
        if (code == kOk) code = kFailure;
    }
    return code;
}
