/**
 * @file integrity.hpp
 * @brief Multiple-hypothesis solution separation (MHSS) integrity for one
 * receiver position: WLS estimators, fault-mode enumeration, solution
 * separation tests and horizontal protection levels.
 *
 * Axis convention: q = 0 is east, q = 1 is north. Measurement order is all
 * GPS rows followed by all LTE rows.
 */

#ifndef INTPATH_INTEGRITY_HPP
#define INTPATH_INTEGRITY_HPP

#include "intpath/normal.hpp"
#include "intpath/pseudorange.hpp"

#include <array>
#include <limits>
#include <span>
#include <vector>

namespace intpath {

using GeometryMatrix = Eigen::Matrix<double, Eigen::Dynamic, 4>;
using EstimatorMatrix = Eigen::Matrix<double, 4, Eigen::Dynamic>;

constexpr std::size_t kMinMeasurements = 5;

struct IntegrityParams {
    double b_int = 0.5;        // maximum nominal range bias [m]
    double p_hmi = 0.01;
    double p_fault = 2e-4;     // prior of a single-measurement fault
    int k_max = 3;             // largest simultaneous fault count
    double fault_max = 0.15;   // allowed ratio of faulty nodes on a path
    double hal = 40.0;         // horizontal alert limit [m]
    double p_fa = 0.01;        // false-alert budget of the separation tests

    void validate() const {
        auto prob = [](double p, const char* name) {
            if (!(p > 0.0 && p < 1.0)) throw ValidationError(std::string("integrity: ") + name + " must be in (0, 1)");
        };
        prob(p_hmi, "p_hmi");
        prob(p_fault, "p_fault");
        prob(p_fa, "p_fa");
        if (!(b_int >= 0.0) || !std::isfinite(b_int)) throw ValidationError("integrity: b_int must be >= 0");
        if (!(hal > 0.0)) throw ValidationError("integrity: hal must be > 0");
        if (k_max < 1) throw ValidationError("integrity: k_max must be >= 1");
        if (!(fault_max >= 0.0 && fault_max <= 1.0)) throw ValidationError("integrity: fault_max must be in [0, 1]");
    }
};

/// Row i = [-cos El sin Az, -cos El cos Az, -sin El, 1].
inline GeometryMatrix build_geometry(std::span<const AzEl> looks) {
    if (looks.size() < kMinMeasurements) {
        throw InsufficientRedundancy("build_geometry: insufficient redundancy (" +
                                     std::to_string(looks.size()) + " measurements)");
    }
    GeometryMatrix G(static_cast<Eigen::Index>(looks.size()), 4);
    for (std::size_t i = 0; i < looks.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double ce = std::cos(looks[i].el);
        G(r, 0) = -ce * std::sin(looks[i].az);
        G(r, 1) = -ce * std::cos(looks[i].az);
        G(r, 2) = -std::sin(looks[i].el);
        G(r, 3) = 1.0;
    }
    return G;
}

/// Diagonal of W, i.e. 1 / sigma^2 per measurement.
inline Eigen::VectorXd build_weights(std::span<const double> sigmas) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(sigmas.size()));
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        if (!(sigmas[i] > 0.0)) throw ValidationError("build_weights: sigma must be > 0");
        w[static_cast<Eigen::Index>(i)] = 1.0 / (sigmas[i] * sigmas[i]);
    }
    return w;
}

struct WlsSolution {
    EstimatorMatrix S;                       // (G^T R W G)^-1 G^T R W
    Eigen::Matrix4d covariance;              // (G^T R W G)^-1
    std::array<double, 2> sigma{0.0, 0.0};   // sqrt of east/north covariance
};

/**
 * Weighted least-squares estimator with the excluded rows zeroed in R.
 * Throws GeometryError when the normal matrix is singular.
 */
inline WlsSolution wls_solution(const GeometryMatrix& G, const Eigen::VectorXd& weights,
                                std::span<const std::size_t> excluded = {}) {
    if (weights.size() != G.rows()) throw ValidationError("wls_solution: weight count mismatch");
    Eigen::VectorXd rw = weights;
    for (std::size_t j : excluded) {
        if (static_cast<Eigen::Index>(j) >= rw.size()) throw ValidationError("wls_solution: exclusion out of range");
        rw[static_cast<Eigen::Index>(j)] = 0.0;
    }
    const EstimatorMatrix GtRW = G.transpose() * rw.asDiagonal();
    const Eigen::Matrix4d normal = GtRW * G;
    Eigen::FullPivLU<Eigen::Matrix4d> lu(normal);
    lu.setThreshold(1e-10);
    if (lu.rank() < 4) throw GeometryError("wls_solution: degenerate geometry (singular normal matrix)");
    WlsSolution out;
    out.covariance = lu.inverse();
    out.S = out.covariance * GtRW;
    out.sigma = {std::sqrt(out.covariance(0, 0)), std::sqrt(out.covariance(1, 1))};
    return out;
}

// ---------------------------------------------------------------------------
// Fault modes
// ---------------------------------------------------------------------------

struct FaultMode {
    std::size_t index = 0;
    std::vector<std::size_t> excluded;  // sorted measurement indices
    double prior = 0.0;
};

/**
 * Every subset of 1..k_max measurements whose exclusion still leaves at
 * least five, in lexicographic order of the excluded index sets. The prior
 * of a size-k mode is p_single^k.
 */
inline std::vector<FaultMode> enumerate_fault_modes(std::size_t n_meas, int k_max, double p_single) {
    if (n_meas < kMinMeasurements + 1) {
        throw InsufficientRedundancy("enumerate_fault_modes: need at least 6 measurements, have " +
                                     std::to_string(n_meas));
    }
    if (k_max < 1) throw ValidationError("enumerate_fault_modes: k_max must be >= 1");
    const std::size_t k_eff = std::min<std::size_t>(static_cast<std::size_t>(k_max), n_meas - kMinMeasurements);
    std::vector<FaultMode> modes;
    std::vector<std::size_t> current;
    // Depth-first generation yields lexicographic order directly.
    auto recurse = [&](auto&& self, std::size_t next) -> void {
        for (std::size_t j = next; j < n_meas; ++j) {
            current.push_back(j);
            FaultMode m;
            m.index = modes.size();
            m.excluded = current;
            m.prior = std::pow(p_single, static_cast<double>(current.size()));
            modes.push_back(std::move(m));
            if (current.size() < k_eff) self(self, j + 1);
            current.pop_back();
        }
    };
    recurse(recurse, 0);
    return modes;
}

// ---------------------------------------------------------------------------
// Multipliers
// ---------------------------------------------------------------------------

/// K for the fault-free hypothesis: Q^-1(P_HMI / (4 (N_maxsub + 1))).
inline double k_md_fault_free(const IntegrityParams& p, std::size_t n_maxsub) {
    return inverse_normal_tail(p.p_hmi / (4.0 * (static_cast<double>(n_maxsub) + 1.0)));
}

struct ModeMultiplier {
    double k = 0.0;
    bool clamped = false;
};

/// K for a fault mode: Q^-1(P_HMI / (4 P_f^i (N_maxsub + 1))), with the prior
/// in the denominator. Arguments that would make K non-positive clamp to 0.
inline ModeMultiplier k_md_fault_mode(const IntegrityParams& p, double prior, std::size_t n_maxsub) {
    const double arg = p.p_hmi / (4.0 * prior * (static_cast<double>(n_maxsub) + 1.0));
    if (arg >= 0.5) return {0.0, true};
    return {inverse_normal_tail(arg), false};
}

/// K for the separation thresholds: Q^-1(P_FA / (4 N_maxsub)).
inline double k_false_alert(const IntegrityParams& p, std::size_t n_maxsub) {
    if (n_maxsub == 0) return 0.0;
    return inverse_normal_tail(p.p_fa / (4.0 * static_cast<double>(n_maxsub)));
}

// ---------------------------------------------------------------------------
// Separation statistics
// ---------------------------------------------------------------------------

/// Standard deviation of (x^i - x^0) along east/north under the nominal noise.
inline std::array<double, 2> separation_sigma(const WlsSolution& all, const WlsSolution& subset,
                                              const Eigen::VectorXd& weights) {
    std::array<double, 2> out{};
    const EstimatorMatrix dS = subset.S - all.S;
    for (int q = 0; q < 2; ++q) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < dS.cols(); ++j) acc += dS(q, j) * dS(q, j) / weights[j];
        out[static_cast<std::size_t>(q)] = std::sqrt(acc);
    }
    return out;
}

/// Sum_j |S_{q,j}| * b_int for q = east, north.
inline std::array<double, 2> bias_term(const WlsSolution& sol, double b_int) {
    return {sol.S.row(0).cwiseAbs().sum() * b_int, sol.S.row(1).cwiseAbs().sum() * b_int};
}

struct ModeDiagnostics {
    std::size_t index = 0;
    std::vector<std::size_t> excluded;
    double prior = 0.0;
    std::array<double, 2> delta_r{0.0, 0.0};    // |x^i_q - x^0_q|
    std::array<double, 2> threshold{0.0, 0.0};  // D_q^i
    std::array<double, 2> sigma{0.0, 0.0};      // sigma_q^i
    std::array<double, 2> sigma_ss{0.0, 0.0};
    std::array<double, 2> bias{0.0, 0.0};       // Sum |S^i_{q,j}| b_int
    double k_md = 0.0;
    bool k_clamped = false;
    std::array<double, 2> pl{0.0, 0.0};         // PL^i_q

    bool separation_exceeded() const { return delta_r[0] > threshold[0] || delta_r[1] > threshold[1]; }
};

struct IntegrityAnalysis {
    std::size_t n_maxsub = 0;
    double k_md0 = 0.0;
    double k_fa = 0.0;
    std::array<double, 2> sigma0{0.0, 0.0};
    std::array<double, 2> bias0{0.0, 0.0};
    std::array<double, 2> pl0{0.0, 0.0};
    std::array<double, 2> pl{0.0, 0.0};
    std::vector<ModeDiagnostics> modes;
    bool fault = false;
    double hpl = 0.0;
};

inline double hpl(double pl_east, double pl_north) {
    if (!(pl_east >= 0.0) || !(pl_north >= 0.0)) throw ValidationError("hpl: protection levels must be >= 0");
    return std::hypot(pl_east, pl_north);
}

/// D_q^i = K_fa * sigma_ss,q^i.
inline std::array<double, 2> detection_threshold(const WlsSolution& all, const WlsSolution& subset,
                                                 const Eigen::VectorXd& weights, double k_fa) {
    const auto ss = separation_sigma(all, subset, weights);
    return {k_fa * ss[0], k_fa * ss[1]};
}

inline std::array<double, 2> detection_threshold(const FaultMode& mode, const GeometryMatrix& G,
                                                 const Eigen::VectorXd& weights, const IntegrityParams& params,
                                                 std::size_t n_maxsub) {
    const WlsSolution all = wls_solution(G, weights);
    const WlsSolution sub = wls_solution(G, weights, mode.excluded);
    return detection_threshold(all, sub, weights, k_false_alert(params, n_maxsub));
}

/**
 * Full per-position analysis. residuals holds pseudorange minus predicted
 * range for every row (the noise-free biases for planning); pass an empty
 * vector to skip the separation tests.
 */
inline IntegrityAnalysis analyze_integrity(const GeometryMatrix& G, const Eigen::VectorXd& weights,
                                           const Eigen::VectorXd& residuals, std::span<const FaultMode> modes,
                                           const IntegrityParams& params) {
    IntegrityAnalysis out;
    out.n_maxsub = modes.size();
    const WlsSolution all = wls_solution(G, weights);
    out.k_md0 = k_md_fault_free(params, out.n_maxsub);
    out.k_fa = k_false_alert(params, out.n_maxsub);
    out.sigma0 = all.sigma;
    out.bias0 = bias_term(all, params.b_int);
    for (int q = 0; q < 2; ++q) {
        const auto qi = static_cast<std::size_t>(q);
        out.pl0[qi] = out.k_md0 * all.sigma[qi] + out.bias0[qi];
        out.pl[qi] = out.pl0[qi];
    }
    const bool test = residuals.size() > 0;
    if (test && residuals.size() != G.rows()) throw ValidationError("analyze_integrity: residual count mismatch");
    Eigen::Vector4d x0 = Eigen::Vector4d::Zero();
    if (test) x0 = all.S * residuals;

    out.modes.reserve(modes.size());
    for (const FaultMode& mode : modes) {
        const WlsSolution sub = wls_solution(G, weights, mode.excluded);
        ModeDiagnostics d;
        d.index = mode.index;
        d.excluded = mode.excluded;
        d.prior = mode.prior;
        d.sigma = sub.sigma;
        d.sigma_ss = separation_sigma(all, sub, weights);
        d.bias = bias_term(sub, params.b_int);
        const ModeMultiplier km = k_md_fault_mode(params, mode.prior, out.n_maxsub);
        d.k_md = km.k;
        d.k_clamped = km.clamped;
        for (std::size_t q = 0; q < 2; ++q) {
            d.threshold[q] = out.k_fa * d.sigma_ss[q];
            d.pl[q] = d.k_md * d.sigma[q] + d.bias[q] + d.threshold[q];
            out.pl[q] = std::max(out.pl[q], d.pl[q]);
        }
        if (test) {
            const Eigen::Vector4d xi = sub.S * residuals;
            d.delta_r = {std::abs(xi[0] - x0[0]), std::abs(xi[1] - x0[1])};
            if (d.separation_exceeded()) out.fault = true;
        }
        out.modes.push_back(std::move(d));
    }
    out.hpl = hpl(out.pl[0], out.pl[1]);
    return out;
}

struct FaultPrediction {
    bool fault = false;
    std::vector<ModeDiagnostics> modes;
};

/// Solution-separation test on predicted residuals: a fault is flagged when
/// any mode separates beyond its threshold on either horizontal axis.
inline FaultPrediction predict_fault(const Eigen::VectorXd& residuals, const GeometryMatrix& G,
                                     const Eigen::VectorXd& weights, std::span<const FaultMode> modes,
                                     const IntegrityParams& params) {
    if (residuals.size() == 0) throw ValidationError("predict_fault: no residuals");
    auto a = analyze_integrity(G, weights, residuals, modes, params);
    return {a.fault, std::move(a.modes)};
}

struct ProtectionLevels {
    std::array<double, 2> pl{0.0, 0.0};
    std::array<double, 2> pl0{0.0, 0.0};
    std::vector<std::array<double, 2>> per_mode;
};

inline ProtectionLevels protection_levels(const GeometryMatrix& G, const Eigen::VectorXd& weights,
                                          std::span<const FaultMode> modes, const IntegrityParams& params) {
    const auto a = analyze_integrity(G, weights, Eigen::VectorXd(), modes, params);
    ProtectionLevels out;
    out.pl = a.pl;
    out.pl0 = a.pl0;
    for (const auto& m : a.modes) out.per_mode.push_back(m.pl);
    return out;
}

// ---------------------------------------------------------------------------
// Node evaluation
// ---------------------------------------------------------------------------

struct PredictionConfig {
    GpsOptions gps;
    LteOptions lte;
    double clock_bias = 0.0;                 // receiver clock bias used in prediction [s]
    std::optional<std::uint64_t> noise_seed; // noise mode, for validation only

    void validate() const {
        if (gps.max_bounces < 1) throw ValidationError("prediction: gps max_bounces must be >= 1");
        if (lte.max_bounces < 1) throw ValidationError("prediction: lte max_bounces must be >= 1");
        if (!std::isfinite(lte.loss_threshold_db)) throw ValidationError("prediction: loss threshold must be finite");
        if (!(std::abs(clock_bias) < 1.0)) throw ValidationError("prediction: |clock_bias| must be < 1 s");
        lte.discriminator.validate();
        gps.sigma.validate();
        lte.sigma.validate();
    }
};

struct NodeIntegrityResult {
    std::string node_id;
    double epoch = 0.0;
    Vec3 position = Vec3::Zero();
    double hpl = 0.0;
    bool fault = false;
    std::size_t n_gps = 0;
    std::size_t n_lte = 0;
    std::vector<ModeDiagnostics> per_mode;
    std::array<double, 2> pl{0.0, 0.0};
    std::array<double, 2> pl0{0.0, 0.0};
    std::string degenerate_reason;  // set when the conservative result was used
    std::vector<GpsMeasurement> gps;
    std::vector<LteMeasurement> lte;
};

/**
 * Predicts every measurement at a scheduled node and runs the integrity
 * analysis. Nodes with fewer than five usable measurements, or with a
 * singular estimator, get hpl = +inf and fault = true.
 */
inline NodeIntegrityResult evaluate_node(const ScheduleEntry& entry, const SceneModel& scene,
                                         const IntegrityParams& params, const PredictionConfig& cfg) {
    NodeIntegrityResult r;
    r.node_id = entry.node_id;
    r.epoch = entry.epoch;
    r.position = entry.position;

    const ReceiverState rx{r.position, cfg.clock_bias};
    std::optional<NoiseKey> noise;
    if (cfg.noise_seed) noise = NoiseKey{*cfg.noise_seed, entry.node_id};

    for (const auto& sat : scene.gps_satellites) {
        if (auto m = predict_gps(rx, sat, entry.epoch, scene, cfg.gps, noise)) r.gps.push_back(std::move(*m));
    }
    for (const auto& bs : scene.lte_base_stations) {
        if (auto m = predict_lte(rx, bs, scene, cfg.lte, noise)) r.lte.push_back(std::move(*m));
    }
    r.n_gps = r.gps.size();
    r.n_lte = r.lte.size();
    const std::size_t n = r.n_gps + r.n_lte;

    auto conservative = [&r](std::string why) {
        r.hpl = std::numeric_limits<double>::infinity();
        r.fault = true;
        r.pl = {r.hpl, r.hpl};
        r.pl0 = {r.hpl, r.hpl};
        r.per_mode.clear();
        r.degenerate_reason = std::move(why);
        return r;
    };
    if (n < kMinMeasurements) {
        return conservative("insufficient redundancy: " + std::to_string(n) + " usable measurements");
    }

    std::vector<AzEl> looks;
    std::vector<double> sigmas;
    Eigen::VectorXd residuals(static_cast<Eigen::Index>(n));
    Eigen::Index row = 0;
    for (const auto& m : r.gps) {
        looks.push_back(m.look);
        sigmas.push_back(m.sigma);
        residuals[row++] = m.pseudorange - m.true_range - constants::kSpeedOfLight * cfg.clock_bias;
    }
    for (const auto& m : r.lte) {
        looks.push_back(m.look);
        sigmas.push_back(m.sigma);
        residuals[row++] = m.pseudorange - m.true_range - constants::kSpeedOfLight * cfg.clock_bias;
    }

    try {
        const GeometryMatrix G = build_geometry(looks);
        const Eigen::VectorXd w = build_weights(sigmas);
        std::vector<FaultMode> modes;
        if (n > kMinMeasurements) modes = enumerate_fault_modes(n, params.k_max, params.p_fault);
        auto a = analyze_integrity(G, w, residuals, modes, params);
        r.hpl = a.hpl;
        r.fault = a.fault;
        r.pl = a.pl;
        r.pl0 = a.pl0;
        r.per_mode = std::move(a.modes);
    } catch (const GeometryError& e) {
        return conservative(e.what());
    }
    return r;
}

// ---------------------------------------------------------------------------
// Position fix
// ---------------------------------------------------------------------------

struct PositionFix {
    Vec3 position = Vec3::Zero();
    double clock_bias = 0.0;  // [s]
    int iterations = 0;
};

/**
 * Iterated WLS position and clock solution from pseudoranges to known
 * transmitter positions.
 */
inline PositionFix solve_position(std::span<const Vec3> transmitters, std::span<const double> pseudoranges,
                                  std::span<const double> sigmas, const Vec3& initial, int max_iterations = 20) {
    if (transmitters.size() != pseudoranges.size() || transmitters.size() != sigmas.size()) {
        throw ValidationError("solve_position: size mismatch");
    }
    const Eigen::VectorXd w = build_weights(sigmas);
    PositionFix fix;
    fix.position = initial;
    double cdt = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        std::vector<AzEl> looks;
        Eigen::VectorXd dy(static_cast<Eigen::Index>(transmitters.size()));
        for (std::size_t i = 0; i < transmitters.size(); ++i) {
            looks.push_back(azimuth_elevation(fix.position, transmitters[i]));
            dy[static_cast<Eigen::Index>(i)] = pseudoranges[i] - (transmitters[i] - fix.position).norm() - cdt;
        }
        const GeometryMatrix G = build_geometry(looks);
        const Eigen::Vector4d dx = wls_solution(G, w).S * dy;
        fix.position += dx.head<3>();
        cdt += dx[3];
        fix.iterations = it + 1;
        if (dx.norm() < 1e-9) break;
    }
    fix.clock_bias = cdt / constants::kSpeedOfLight;
    return fix;
}

}  // namespace intpath

#endif  // INTPATH_INTEGRITY_HPP
