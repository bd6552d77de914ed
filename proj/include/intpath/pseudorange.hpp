/**
 * @file pseudorange.hpp
 * @brief Predicted GPS and LTE pseudoranges with deterministic NLOS and
 * multipath biases.
 *
 * GPS: corrected pseudorange = geometric range + c*dt_r + NLOS excess, where
 * the excess is the single-reflection path length minus the direct range
 * whenever the direct ray is blocked.
 *
 * LTE: the first arrival of the ray-traced channel impulse response sets the
 * geometric part of the bias; the CRS code discriminator adds the two
 * multipath distortion terms chi1 and chi2.
 */

#ifndef INTPATH_PSEUDORANGE_HPP
#define INTPATH_PSEUDORANGE_HPP

#include "intpath/raytrace.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace intpath {

struct ReceiverState {
    Vec3 position = Vec3::Zero();
    double clock_bias = 0.0;  // [s]
};

enum class TransmitterKind { Gps, Lte };

inline const char* to_string(TransmitterKind k) { return k == TransmitterKind::Gps ? "GPS" : "LTE"; }

struct GpsMeasurement {
    std::string sat_id;
    double pseudorange = 0.0;  // [m]
    double sigma = 0.0;        // [m]
    double nlos_bias = 0.0;    // [m]
    bool is_los = true;
    double true_range = 0.0;
    AzEl look;
    PropagationPath path;  // direct or reflected ray actually used
};

struct LteMeasurement {
    std::string bs_id;
    double pseudorange = 0.0;  // [m]
    double sigma = 0.0;        // [m]
    double mp_bias = 0.0;      // [m], signed
    bool is_los = true;        // first arrival is the direct ray
    double true_range = 0.0;
    AzEl look;
    ChannelImpulseResponse cir;
    std::vector<PropagationPath> paths;  // survivors of the loss threshold
};

/// CRS ranging discriminator parameters (20 MHz LTE by default).
struct DiscriminatorConfig {
    int crs_subcarriers = 200;             // B
    int total_subcarriers = 2048;          // N_c
    double subcarrier_spacing_hz = 15e3;   // delta_f
    double time_shift = 0.5;               // xi, in samples
    double symbol_error = 0.0;             // e, normalised
    double power_scale = 1.0;              // C

    /// T_s = T_symb / N_c with T_symb = 1 / delta_f.
    double sample_interval() const {
        return 1.0 / (subcarrier_spacing_hz * static_cast<double>(total_subcarriers));
    }

    void validate() const {
        if (crs_subcarriers < 1) throw ValidationError("discriminator: crs_subcarriers must be >= 1");
        if (total_subcarriers < 1) throw ValidationError("discriminator: total_subcarriers must be >= 1");
        if (!(subcarrier_spacing_hz > 0.0)) throw ValidationError("discriminator: subcarrier_spacing_hz must be > 0");
        if (!std::isfinite(time_shift) || !std::isfinite(symbol_error) || !std::isfinite(power_scale)) {
            throw ValidationError("discriminator: non-finite parameter");
        }
    }
};

/// Measurement standard deviation model.
struct SigmaModel {
    double gps_floor_m = 1.5;         // a
    double gps_scale_m = 4.0;         // b
    double gps_elevation_rad = 0.262; // El_0
    double lte_m = 5.0;

    void validate() const {
        if (!(gps_floor_m > 0.0) || !(gps_scale_m >= 0.0) || !(gps_elevation_rad > 0.0) || !(lte_m > 0.0)) {
            throw ValidationError("sigma model: parameters must be positive");
        }
    }
};

/// sigma = a + b exp(-El / El_0) for GPS, constant for LTE.
inline double assign_sigma(TransmitterKind kind, double elevation, const SigmaModel& model = {}) {
    if (kind == TransmitterKind::Lte) return model.lte_m;
    if (!(elevation >= 0.0 && elevation <= constants::kPi / 2.0 + 1e-12)) {
        throw ValidationError("assign_sigma: GPS elevation outside [0, pi/2]");
    }
    return model.gps_floor_m + model.gps_scale_m * std::exp(-elevation / model.gps_elevation_rad);
}

inline double nlos_bias(double direct, double reflected) {
    if (reflected < direct) {
        throw GeometryError("nlos_bias: reflected path shorter than direct range");
    }
    return reflected - direct;
}

// ---------------------------------------------------------------------------
// Discriminator distortion
// ---------------------------------------------------------------------------

namespace detail {

/// sum_{b=0}^{B-1} exp(-j 2 pi (b/B) x) in closed form (Dirichlet kernel).
/// The ratio sin(pi x)/sin(pi x/B) is evaluated about the nearest multiple
/// of B so it stays accurate where both sines vanish.
inline std::complex<double> subcarrier_sum(double x, int B) {
    const double Bd = static_cast<double>(B);
    const double y = x / Bd;
    const double k = std::round(y);
    const double delta = y - k;
    double mag = Bd;
    if (delta != 0.0) mag = std::sin(constants::kPi * Bd * delta) / std::sin(constants::kPi * delta);
    if (std::fmod(std::abs(k) * (Bd - 1.0), 2.0) == 1.0) mag = -mag;
    const double phase = -constants::kPi * x * (Bd - 1.0) / Bd;
    return std::polar(1.0, phase) * mag;
}

/// sum_l alpha_l * subcarrier_sum(tau_l/T_s + offset) over multipath components l >= 1.
inline std::complex<double> multipath_sum(const ChannelImpulseResponse& cir, const DiscriminatorConfig& cfg,
                                          double offset) {
    std::complex<double> acc{0.0, 0.0};
    if (cir.components.size() < 2) return acc;
    const double ts = cfg.sample_interval();
    const double tau0 = cir.components.front().tau;
    for (std::size_t l = 1; l < cir.components.size(); ++l) {
        const double delay = (cir.components[l].tau - tau0) / ts;
        acc += cir.components[l].alpha * subcarrier_sum(delay + offset, cfg.crs_subcarriers);
    }
    return acc;
}

}  // namespace detail

/**
 * Multipath distortion of the early-minus-late power discriminator:
 * C |sum_b sum_l alpha_l e^{-j2pi(b/B)(tau_l/T_s + e - xi)}|^2 minus the same
 * with +xi. Delays are taken relative to the first arrival.
 */
inline double chi1(const ChannelImpulseResponse& cir, const DiscriminatorConfig& cfg) {
    if (cir.components.size() < 2) return 0.0;
    const auto early = detail::multipath_sum(cir, cfg, cfg.symbol_error - cfg.time_shift);
    const auto late = detail::multipath_sum(cir, cfg, cfg.symbol_error + cfg.time_shift);
    return cfg.power_scale * std::norm(early) - cfg.power_scale * std::norm(late);
}

/// Cross terms between the direct-path correlation and the conjugated
/// multipath sums. Amplitudes are real, so conjugation leaves alpha unchanged.
inline double chi2(const ChannelImpulseResponse& cir, const DiscriminatorConfig& cfg) {
    if (cir.components.size() < 2) return 0.0;
    const int B = cfg.crs_subcarriers;
    const double e = cfg.symbol_error;
    const double xi = cfg.time_shift;
    const auto early = detail::subcarrier_sum(e - xi, B) * detail::multipath_sum(cir, cfg, e - xi);
    const auto late = detail::subcarrier_sum(e + xi, B) * detail::multipath_sum(cir, cfg, e + xi);
    return 2.0 * cfg.power_scale * early.real() - 2.0 * cfg.power_scale * late.real();
}

/// c * tau_0 - true_range + chi1 + chi2. The first-arrival range c * tau_0
/// is taken from the component's ray length when it is recorded.
inline double multipath_bias(const ChannelImpulseResponse& cir, double true_range,
                             const DiscriminatorConfig& cfg) {
    if (cir.components.empty()) throw ValidationError("multipath_bias: empty impulse response");
    const CirComponent& first = cir.components.front();
    const double first_range = first.length > 0.0 ? first.length : constants::kSpeedOfLight * first.tau;
    const double geometric = first_range - true_range;
    return geometric + chi1(cir, cfg) + chi2(cir, cfg);
}

// ---------------------------------------------------------------------------
// Seeded noise
// ---------------------------------------------------------------------------

/// Identifies one noise draw. The generator state is derived from
/// (seed, node_id, tx_id) alone so evaluation order never matters.
struct NoiseKey {
    std::uint64_t seed = 0;
    std::string node_id;
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

inline double gaussian_draw(const NoiseKey& key, std::string_view tx_id) {
    std::uint64_t h = detail::splitmix64(key.seed);
    h = detail::fnv1a(key.node_id, h);
    h = detail::fnv1a("|", h);
    h = detail::fnv1a(tx_id, h);
    std::mt19937_64 gen(detail::splitmix64(h));
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(gen);
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

struct GpsOptions {
    int max_bounces = 1;
    SigmaModel sigma;
};

/// Predicted corrected GPS pseudorange, or nullopt when neither the direct
/// ray nor any reflection reaches the receiver.
inline std::optional<GpsMeasurement> predict_gps(const ReceiverState& rx, const GpsSatellite& sat, double epoch,
                                                 const SceneModel& scene, const GpsOptions& opts = {},
                                                 const std::optional<NoiseKey>& noise = std::nullopt) {
    const Vec3 tx = sat.position_at(epoch);
    GpsMeasurement m;
    m.sat_id = sat.id;
    m.true_range = (tx - rx.position).norm();
    m.look = azimuth_elevation(rx.position, tx);
    if (!los_blocked(rx.position, tx, scene)) {
        m.is_los = true;
        m.nlos_bias = 0.0;
        m.path = direct_path(rx.position, tx);
    } else {
        auto refl = reflection_paths(rx.position, tx, scene, opts.max_bounces);
        if (refl.empty()) return std::nullopt;
        auto shortest = std::min_element(refl.begin(), refl.end(), [](const auto& a, const auto& b) {
            return a.total_length < b.total_length;
        });
        m.is_los = false;
        m.nlos_bias = nlos_bias(m.true_range, shortest->total_length);
        m.path = *shortest;
    }
    m.sigma = assign_sigma(TransmitterKind::Gps, std::max(0.0, m.look.el), opts.sigma);
    m.pseudorange = m.true_range + constants::kSpeedOfLight * rx.clock_bias + m.nlos_bias;
    if (noise) m.pseudorange += m.sigma * gaussian_draw(*noise, sat.id);
    return m;
}

struct LteOptions {
    int max_bounces = 2;
    double loss_threshold_db = 130.0;
    DiscriminatorConfig discriminator;
    SigmaModel sigma;
};

/// Predicted LTE pseudorange, or nullopt when the base station has no
/// coverage at the receiver.
inline std::optional<LteMeasurement> predict_lte(const ReceiverState& rx, const LteBaseStation& bs,
                                                 const SceneModel& scene, const LteOptions& opts = {},
                                                 const std::optional<NoiseKey>& noise = std::nullopt) {
    auto paths = trace_paths(rx.position, bs.position, scene, opts.max_bounces);
    for (auto& p : paths) p.path_loss_db = path_loss(p, bs.carrier_frequency_hz, scene);
    LteMeasurement m;
    m.bs_id = bs.id;
    m.true_range = (bs.position - rx.position).norm();
    m.look = azimuth_elevation(rx.position, bs.position);
    try {
        m.cir = build_cir(paths, opts.loss_threshold_db);
    } catch (const NoCoverage&) {
        return std::nullopt;
    }
    std::erase_if(paths, [&](const PropagationPath& p) { return p.path_loss_db > opts.loss_threshold_db; });
    std::stable_sort(paths.begin(), paths.end(), [](const auto& a, const auto& b) {
        if (a.total_length != b.total_length) return a.total_length < b.total_length;
        return a.path_loss_db < b.path_loss_db;
    });
    m.is_los = paths.front().bounces == 0;
    m.paths = std::move(paths);
    m.mp_bias = multipath_bias(m.cir, m.true_range, opts.discriminator);
    m.sigma = assign_sigma(TransmitterKind::Lte, m.look.el, opts.sigma);
    m.pseudorange = m.true_range + constants::kSpeedOfLight * rx.clock_bias + m.mp_bias;
    if (noise) m.pseudorange += m.sigma * gaussian_draw(*noise, bs.id);
    return m;
}

}  // namespace intpath

#endif  // INTPATH_PSEUDORANGE_HPP
