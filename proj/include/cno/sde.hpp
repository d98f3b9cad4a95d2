#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cno/causal.hpp"

namespace cno::sde {

using Vec = std::vector<double>;

/// dX = drift(t, X) dt + diffusion(t, X) dB, with growth constant M_g.
struct SdeCoeffs {
    std::function<double(double, double)> drift;
    std::function<double(double, double)> diffusion;
    double M_g = 1.0;
    std::string name;
};

SdeCoeffs zero_coeffs();
SdeCoeffs constant_drift(double a);
/// drift -theta x, diffusion sigma; M_g = max(theta, |sigma|) satisfies both
/// the Lipschitz and the linear-growth condition.
SdeCoeffs ornstein_uhlenbeck(double theta, double sigma);

/// mean + sum_k coeffs[k] int_0^horizon f_k dB with the sine family on
/// [0, horizon].
struct ChaosCoords {
    double mean = 0.0;
    Vec coeffs;
    double horizon = 1.0;

    Vec flat() const;  // (mean, coeffs...)
    static ChaosCoords from_flat(const Vec& v, double horizon);
};

struct McOracle {
    std::size_t n_paths = 20000;
    double dt = 1.0 / 256.0;
    std::uint64_t seed = 0;
    bool tamed = true;
};

/// Brownian increments shared by every simulation drawn from one record.
struct BrownianRecord {
    double dt = 0.0;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    Vec dB;  // path-major: dB[p * n_steps + j]

    std::size_t steps_to(double t) const;  // t / dt, must be an integer
};

BrownianRecord record_brownian(const McOracle& o, double horizon);

/// Discrete first-chaos integrals I_k = sum_j f_k(s_j) dB_j (left points)
/// over [0, t] for k = 1..n_modes.
struct ChaosBasis {
    double horizon = 0.0;
    std::vector<Vec> I;  // I[k-1][path]
};

ChaosBasis chaos_basis(const BrownianRecord& rec, double t, std::size_t n_modes);

Vec synthesize(const ChaosCoords& eta, const ChaosBasis& basis);

/// Euler-Maruyama (tamed when requested) from t0 to t1 started at the given
/// per-path initial values, on the record's increments.
Vec sde_solve_mc(const SdeCoeffs& c, const Vec& eta_samples, double t0, double t1, const BrownianRecord& rec,
                 bool tamed);
Vec sde_solve_mc(const SdeCoeffs& c, const ChaosCoords& eta, double t0, double t1, const BrownianRecord& rec,
                 bool tamed);

struct Projection {
    ChaosCoords coords;
    double residual = 0.0;  // L2 norm of the part outside the kept modes
    Vec coeff_se;           // standard errors of the coefficient estimates
    double mean_se = 0.0;
};

Projection project_chaos(const Vec& samples, const ChaosBasis& basis, std::size_t n_modes);
Projection project_chaos(const Vec& samples, const BrownianRecord& rec, double t, std::size_t n_modes);

struct MomentCheck {
    double mc = 0.0;
    double exact = 0.0;
    double se = 0.0;
    bool within = false;  // |mc - exact| <= 3 se
};

/// E[eta^2] by Monte Carlo against mean^2 + |coeffs|^2.
MomentCheck ito_isometry_check(const ChaosCoords& eta, const ChaosBasis& basis);

double l2_norm(const Vec& samples);
double l2_distance(const Vec& a, const Vec& b);

/// sqrt(3) exp(3/2 M^2 (D + 1) D).
double lipschitz_bound(double M_g, double delta_plus);

struct LipschitzResult {
    double max_ratio = 0.0;
    double bound = 0.0;
    std::size_t pairs_used = 0;
    bool within = false;
};

LipschitzResult lipschitz_check(const SdeCoeffs& c, const std::vector<std::pair<ChaosCoords, ChaosCoords>>& pairs,
                                double t0, double t1, const BrownianRecord& rec, bool tamed);

/// Box of initial conditions: mean in [mean_lo, mean_hi], each coefficient in
/// [-coeff_abs, coeff_abs].
struct InitBox {
    double mean_lo = -1.0;
    double mean_hi = 1.0;
    double coeff_abs = 0.3;
};

struct SdeDatasetOptions {
    std::size_t n_orbits = 256;
    std::size_t n_modes = 8;
    InitBox init;
    std::uint64_t seed = 0;
};

/// Orbits eta_{t_{i+1}} = SDE-Solve_{t_i:t_{i+1}}(eta_{t_i}) started at t_1
/// from the init box (coordinates on [0, t_1]). Window i (1-based) maps the
/// coordinates of eta_{t_i} to those of X_{t_{i+1}}; memory M = 1.
struct SdeDataset {
    causal::CausalDataset ds;
    std::vector<double> sde_times;
};

SdeDataset build_sde_dataset(const SdeCoeffs& c, const causal::TimeGrid& grid, const BrownianRecord& rec,
                             bool tamed, const SdeDatasetOptions& opts);

/// Construction defaults for the chaos-coordinate windows: one hidden layer
/// of 32 units, 400 epochs.
causal::ConstructOptions sde_construct_defaults();

struct SdeBenchOptions {
    std::size_t windows = 4;  // CNO windows; the SDE grid has one more step
    double dt = 0.25;
    McOracle oracle;
    SdeDatasetOptions train;  // init box, modes and orbit count for training
    std::size_t n_test_orbits = 32;
    std::uint64_t test_seed = 1;
    std::size_t lipschitz_pairs = 16;
    causal::ConstructOptions construct = sde_construct_defaults();
};

struct SdeWindowResult {
    std::size_t index = 0;
    double train_error = 0.0;
    double test_error = 0.0;  // max L2 error over held-out orbits, woven model
    double gate = 0.0;
    double max_residual = 0.0;
    bool within = false;      // test_error <= gate
};

struct SdeBenchResult {
    causal::Construction built;
    std::vector<SdeWindowResult> windows;
    MomentCheck ito;
    LipschitzResult lipschitz;
    std::vector<double> sde_times;
    SdeDataset train_data;
    SdeDataset test_data;
    bool all_within = false;
};

/// Records Brownian increments, builds training and held-out orbit data,
/// constructs the CNO and evaluates it per window, plus the isometry and
/// Lipschitz checks on the first step.
SdeBenchResult run_sde_bench(const SdeCoeffs& c, const SdeBenchOptions& opts);

}  // namespace cno::sde
