/**
 * @file raytrace.hpp
 * @brief Deterministic geometric propagation over extruded-polygon buildings.
 *
 * Only line-of-sight and specular wall reflections are modelled (image
 * method). Diffraction, penetration, roof and ground reflections are not.
 *
 * Boundary conventions:
 *  - blockage is an open-set test: a segment that only touches a building
 *    surface (grazing a wall plane, touching an edge) is not blocked;
 *  - bounce points are accepted on the closed wall rectangle.
 */

#ifndef INTPATH_RAYTRACE_HPP
#define INTPATH_RAYTRACE_HPP

#include "intpath/world.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace intpath {

/// One vertical face of an extruded building.
struct WallFace {
    std::size_t building = 0;
    std::size_t edge = 0;
    Vec2 a = Vec2::Zero();       // footprint edge start
    Vec2 b = Vec2::Zero();       // footprint edge end
    Vec2 normal = Vec2::Zero();  // outward unit normal
    double z_low = 0.0;
    double z_high = 0.0;

    double length() const { return (b - a).norm(); }

    /// Signed horizontal distance of p in front of the face.
    double side(const Vec3& p) const { return (horizontal(p) - a).dot(normal); }

    Vec3 mirror(const Vec3& p) const {
        const Vec2 off = 2.0 * side(p) * normal;
        return {p.x() - off.x(), p.y() - off.y(), p.z()};
    }
};

struct WallRef {
    std::size_t building = 0;
    std::size_t edge = 0;

    bool operator==(const WallRef&) const = default;
};

struct PropagationPath {
    std::vector<Vec3> vertices;  // tx, bounce points..., rx
    std::vector<WallRef> walls;  // struck face per bounce
    double total_length = 0.0;
    int bounces = 0;
    double path_loss_db = 0.0;  // filled by path_loss()
};

struct CirComponent {
    double alpha = 1.0;  // amplitude relative to the first arrival
    double tau = 0.0;    // absolute delay [s]
    double length = 0.0; // ray length [m]; tau = length / c
};

struct ChannelImpulseResponse {
    std::vector<CirComponent> components;  // sorted by tau

    std::size_t size() const { return components.size(); }
};

inline std::vector<WallFace> wall_faces(const SceneModel& scene) {
    std::vector<WallFace> out;
    for (std::size_t bi = 0; bi < scene.buildings.size(); ++bi) {
        const Building& bld = scene.buildings[bi];
        const std::size_t n = bld.footprint.size();
        for (std::size_t e = 0; e < n; ++e) {
            WallFace w;
            w.building = bi;
            w.edge = e;
            w.a = bld.footprint[e];
            w.b = bld.footprint[(e + 1) % n];
            const Vec2 d = w.b - w.a;
            w.normal = Vec2(d.y(), -d.x()).normalized();
            w.z_low = scene.ground_elevation;
            w.z_high = scene.ground_elevation + bld.height;
            out.push_back(w);
        }
    }
    return out;
}

namespace detail {

constexpr double kBoundaryEps = 1e-9;  // [m]

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

/// Strict interior test; points within kBoundaryEps of an edge are outside.
inline bool strictly_inside(const Vec2& p, std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& pi = poly[i];
        const Vec2& pj = poly[j];
        if (point_segment_distance(p, pj, pi) <= kBoundaryEps) return false;
        if ((pi.y() > p.y()) != (pj.y() > p.y())) {
            const double x = pj.x() + (p.y() - pj.y()) * (pi.x() - pj.x()) / (pi.y() - pj.y());
            if (p.x() < x) inside = !inside;
        }
    }
    return inside;
}

/// Does the open segment p0 + t*(p1-p0), t in (0,1), enter the open prism?
inline bool segment_enters_prism(Vec3 p0, Vec3 p1, std::span<const Vec2> footprint, double z_low, double z_high) {
    // Parametrize from the end nearer the footprint so sample points keep
    // full precision when the other end is a satellite.
    if ((horizontal(p1) - footprint[0]).squaredNorm() < (horizontal(p0) - footprint[0]).squaredNorm()) {
        std::swap(p0, p1);
    }
    const Vec3 d = p1 - p0;
    double lo = 0.0;
    double hi = 1.0;
    if (d.z() == 0.0) {
        if (!(p0.z() > z_low && p0.z() < z_high)) return false;
    } else {
        double t1 = (z_low - p0.z()) / d.z();
        double t2 = (z_high - p0.z()) / d.z();
        if (t1 > t2) std::swap(t1, t2);
        lo = std::max(lo, t1);
        hi = std::min(hi, t2);
        if (!(lo < hi)) return false;
    }

    const Vec2 o = horizontal(p0);
    const Vec2 dir = horizontal(d);

    // Bounding-box rejection on the clipped sub-segment.
    Vec2 bmin = footprint[0];
    Vec2 bmax = footprint[0];
    for (const auto& v : footprint) {
        bmin = bmin.cwiseMin(v);
        bmax = bmax.cwiseMax(v);
    }
    const Vec2 s0 = o + lo * dir;
    const Vec2 s1 = o + hi * dir;
    if (std::max(s0.x(), s1.x()) <= bmin.x() || std::min(s0.x(), s1.x()) >= bmax.x() ||
        std::max(s0.y(), s1.y()) <= bmin.y() || std::min(s0.y(), s1.y()) >= bmax.y()) {
        return false;
    }

    const double dir_len = dir.norm();
    if (dir_len == 0.0) return strictly_inside(o, footprint);

    std::vector<double> cuts{lo, hi};
    const std::size_t n = footprint.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = footprint[i];
        const Vec2& b = footprint[(i + 1) % n];
        const Vec2 e = b - a;
        const double denom = cross2(dir, e);
        if (std::abs(denom) <= 1e-12 * dir_len * e.norm()) {
            // Parallel: only collinear overlaps contribute breakpoints.
            if (std::abs(cross2(a - o, dir)) / dir_len <= kBoundaryEps) {
                cuts.push_back((a - o).dot(dir) / (dir_len * dir_len));
                cuts.push_back((b - o).dot(dir) / (dir_len * dir_len));
            }
            continue;
        }
        const double t = cross2(a - o, e) / denom;
        const double u = cross2(a - o, dir) / denom;
        if (u >= -1e-12 && u <= 1.0 + 1e-12) cuts.push_back(t);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double ta = std::max(cuts[i], lo);
        const double tb = std::min(cuts[i + 1], hi);
        if (!(tb > ta)) continue;
        const double tm = 0.5 * (ta + tb);
        if (strictly_inside(o + tm * dir, footprint)) return true;
    }
    return false;
}

}  // namespace detail

/// True iff the open segment between the two points crosses a building interior.
inline bool los_blocked(const Vec3& rx, const Vec3& tx, const SceneModel& scene) {
    if (rx == tx) throw GeometryError("los_blocked: coincident points");
    const double z_low = scene.ground_elevation;
    for (const auto& b : scene.buildings) {
        if (detail::segment_enters_prism(rx, tx, b.footprint, z_low, z_low + b.height)) return true;
    }
    return false;
}

inline PropagationPath make_path(std::vector<Vec3> vertices, std::vector<WallRef> walls) {
    PropagationPath p;
    p.vertices = std::move(vertices);
    p.walls = std::move(walls);
    p.bounces = static_cast<int>(p.walls.size());
    for (std::size_t i = 1; i < p.vertices.size(); ++i) {
        p.total_length += (p.vertices[i] - p.vertices[i - 1]).norm();
    }
    return p;
}

inline PropagationPath direct_path(const Vec3& rx, const Vec3& tx) { return make_path({tx, rx}, {}); }

namespace detail {

struct ImageSearch {
    const SceneModel& scene;
    const std::vector<WallFace>& walls;
    const Vec3& rx;
    int max_bounces;
    std::vector<PropagationPath>& out;

    std::vector<std::size_t> sequence;  // wall indices, first struck first
    std::vector<Vec3> images;           // images[0] = tx, images[j] after wall j

    void expand() {
        if (!sequence.empty()) try_connect();
        if (static_cast<int>(sequence.size()) == max_bounces) return;
        for (std::size_t w = 0; w < walls.size(); ++w) {
            if (!sequence.empty() && sequence.back() == w) continue;
            // The current virtual source must see the face from the front.
            if (walls[w].side(images.back()) <= kBoundaryEps) continue;
            sequence.push_back(w);
            images.push_back(walls[w].mirror(images.back()));
            expand();
            images.pop_back();
            sequence.pop_back();
        }
    }

    void try_connect() {
        const std::size_t k = sequence.size();
        std::vector<Vec3> bounce(k);
        Vec3 target = rx;
        for (std::size_t j = k; j-- > 0;) {
            const WallFace& w = walls[sequence[j]];
            const double s_target = w.side(target);
            if (s_target <= kBoundaryEps) return;
            const Vec3& image = images[j + 1];
            const double s_image = w.side(image);  // negative: behind the face
            const double t = s_target / (s_target - s_image);
            const Vec3 p = target + t * (image - target);
            const double along = (horizontal(p) - w.a).dot((w.b - w.a).normalized());
            if (along < -kBoundaryEps || along > w.length() + kBoundaryEps) return;
            if (p.z() < w.z_low - kBoundaryEps || p.z() > w.z_high + kBoundaryEps) return;
            bounce[j] = p;
            target = p;
        }
        // Source side of the first face is guaranteed by expand(); check the
        // departure point of every later face.
        for (std::size_t j = 1; j < k; ++j) {
            if (walls[sequence[j]].side(bounce[j - 1]) <= kBoundaryEps) return;
        }
        std::vector<Vec3> verts;
        verts.reserve(k + 2);
        verts.push_back(images[0]);
        for (const auto& p : bounce) verts.push_back(p);
        verts.push_back(rx);
        for (std::size_t i = 1; i < verts.size(); ++i) {
            if ((verts[i] - verts[i - 1]).norm() <= kBoundaryEps) return;
            if (los_blocked(verts[i - 1], verts[i], scene)) return;
        }
        std::vector<WallRef> refs;
        for (std::size_t w : sequence) refs.push_back({walls[w].building, walls[w].edge});
        out.push_back(make_path(std::move(verts), std::move(refs)));
    }
};

}  // namespace detail

/**
 * All specular paths from tx to rx with 1..max_bounces wall reflections.
 * Output order follows the wall enumeration order (building, then edge),
 * depth first.
 */
inline std::vector<PropagationPath> reflection_paths(const Vec3& rx, const Vec3& tx,
                                                     const SceneModel& scene, int max_bounces) {
    if (max_bounces < 1) throw ValidationError("reflection_paths: max_bounces must be >= 1");
    const std::vector<WallFace> walls = wall_faces(scene);
    std::vector<PropagationPath> out;
    detail::ImageSearch search{scene, walls, rx, max_bounces, out, {}, {tx}};
    search.expand();
    return out;
}

/// Direct path (when unobstructed) followed by every reflected path.
inline std::vector<PropagationPath> trace_paths(const Vec3& rx, const Vec3& tx, const SceneModel& scene,
                                                int max_bounces) {
    std::vector<PropagationPath> out;
    if (!los_blocked(rx, tx, scene)) out.push_back(direct_path(rx, tx));
    if (max_bounces >= 1) {
        auto refl = reflection_paths(rx, tx, scene, max_bounces);
        out.insert(out.end(), std::make_move_iterator(refl.begin()), std::make_move_iterator(refl.end()));
    }
    return out;
}

/// Largest deviation [rad] between the mirrored incoming direction and the
/// outgoing direction over all bounces of a path.
inline double specular_error(const PropagationPath& path, const SceneModel& scene) {
    double worst = 0.0;
    const auto walls = wall_faces(scene);
    for (std::size_t j = 0; j < path.walls.size(); ++j) {
        auto it = std::find_if(walls.begin(), walls.end(), [&](const WallFace& w) {
            return w.building == path.walls[j].building && w.edge == path.walls[j].edge;
        });
        if (it == walls.end()) throw ValidationError("specular_error: unknown wall");
        const Vec3 n(it->normal.x(), it->normal.y(), 0.0);
        const Vec3 in = (path.vertices[j + 1] - path.vertices[j]).normalized();
        const Vec3 out = (path.vertices[j + 2] - path.vertices[j + 1]).normalized();
        const Vec3 mirrored = in - 2.0 * in.dot(n) * n;
        const double angle = std::atan2(mirrored.cross(out).norm(), mirrored.dot(out));
        worst = std::max(worst, angle);
    }
    return worst;
}

/// Free-space loss plus the struck material's loss per bounce [dB].
inline double path_loss(const PropagationPath& path, double frequency_hz, const SceneModel& scene) {
    if (!(path.total_length > 0.0)) throw ValidationError("path_loss: total_length must be > 0");
    if (!(frequency_hz > 0.0)) throw ValidationError("path_loss: frequency must be > 0");
    double loss = 20.0 * std::log10(path.total_length) + 20.0 * std::log10(frequency_hz) - 147.55;
    for (const auto& w : path.walls) {
        const std::string& mat = scene.buildings.at(w.building).material;
        auto it = scene.materials.find(mat);
        if (it == scene.materials.end()) throw ValidationError("path_loss: unknown material '" + mat + "'");
        loss += it->second;
    }
    return loss;
}

/**
 * Channel impulse response from paths whose path_loss_db is already set.
 * Paths above the loss threshold are dropped; amplitudes are relative to the
 * earliest survivor.
 */
inline ChannelImpulseResponse build_cir(std::vector<PropagationPath> paths, double loss_threshold_db) {
    std::erase_if(paths, [&](const PropagationPath& p) { return p.path_loss_db > loss_threshold_db; });
    if (paths.empty()) throw NoCoverage("no propagation path within the loss threshold");
    std::stable_sort(paths.begin(), paths.end(), [](const PropagationPath& a, const PropagationPath& b) {
        if (a.total_length != b.total_length) return a.total_length < b.total_length;
        return a.path_loss_db < b.path_loss_db;
    });
    ChannelImpulseResponse cir;
    const double loss0 = paths.front().path_loss_db;
    for (const auto& p : paths) {
        cir.components.push_back({std::pow(10.0, (loss0 - p.path_loss_db) / 20.0),
                                  p.total_length / constants::kSpeedOfLight, p.total_length});
    }
    cir.components.front().alpha = 1.0;
    return cir;
}

}  // namespace intpath

#endif  // INTPATH_RAYTRACE_HPP
