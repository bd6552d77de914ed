/**
 * @file world.hpp
 * @brief Scene model (buildings, road graph, transmitters), validation,
 * route scheduling and look-angle geometry.
 *
 * All coordinates are local east-north-up metres over a flat ground plane.
 */

#ifndef INTPATH_WORLD_HPP
#define INTPATH_WORLD_HPP

#include "intpath/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace intpath {

struct Building {
    std::string id;
    std::vector<Vec2> footprint;  // counter-clockwise, not closed
    double height = 0.0;
    std::string material = "concrete";

    bool operator==(const Building&) const = default;
};

struct RoadEdge {
    std::string from;
    std::string to;
    double length = 0.0;

    bool operator==(const RoadEdge&) const = default;
};

/// Undirected road network. Node ids are unique strings.
struct RoadGraph {
    std::map<std::string, Vec3> nodes;
    std::vector<RoadEdge> edges;

    bool has_node(const std::string& id) const { return nodes.contains(id); }

    const Vec3& position(const std::string& id) const {
        auto it = nodes.find(id);
        if (it == nodes.end()) throw ValidationError("unknown road node '" + id + "'");
        return it->second;
    }

    /// Shortest declared edge between a and b (either direction).
    std::optional<double> edge_length(const std::string& a, const std::string& b) const {
        std::optional<double> best;
        for (const auto& e : edges) {
            if ((e.from == a && e.to == b) || (e.from == b && e.to == a)) {
                if (!best || e.length < *best) best = e.length;
            }
        }
        return best;
    }

    /// Neighbour list keyed by node id; parallel edges collapse to the shortest.
    std::map<std::string, std::map<std::string, double>> adjacency() const {
        std::map<std::string, std::map<std::string, double>> adj;
        for (const auto& [id, _] : nodes) adj[id];
        auto add = [&adj](const std::string& a, const std::string& b, double len) {
            auto [it, inserted] = adj[a].emplace(b, len);
            if (!inserted) it->second = std::min(it->second, len);
        };
        for (const auto& e : edges) {
            add(e.from, e.to, e.length);
            add(e.to, e.from, e.length);
        }
        return adj;
    }

    bool operator==(const RoadGraph&) const = default;
};

struct EphemerisSample {
    double epoch = 0.0;  // [s]
    Vec3 position = Vec3::Zero();

    bool operator==(const EphemerisSample&) const = default;
};

/// GPS satellite with tabulated positions. Positions between samples are
/// linearly interpolated; a single-sample table is treated as static.
struct GpsSatellite {
    std::string id;
    std::vector<EphemerisSample> positions;

    Vec3 position_at(double epoch) const {
        if (positions.empty()) throw ValidationError("satellite '" + id + "' has no positions");
        if (positions.size() == 1) return positions.front().position;
        if (epoch < positions.front().epoch || epoch > positions.back().epoch) {
            throw ValidationError("satellite '" + id + "' position undefined at epoch " +
                                  std::to_string(epoch));
        }
        auto hi = std::upper_bound(positions.begin(), positions.end(), epoch,
                                   [](double t, const EphemerisSample& s) { return t < s.epoch; });
        if (hi == positions.end()) return positions.back().position;
        auto lo = std::prev(hi);
        const double w = (epoch - lo->epoch) / (hi->epoch - lo->epoch);
        return lo->position + w * (hi->position - lo->position);
    }

    bool operator==(const GpsSatellite&) const = default;
};

struct LteBaseStation {
    std::string id;
    Vec3 position = Vec3::Zero();
    double carrier_frequency_hz = 2.1e9;
    double tx_power_dbm = 43.0;

    bool operator==(const LteBaseStation&) const = default;
};

struct SceneModel {
    double ground_elevation = 0.0;
    std::map<std::string, double> materials;  // name -> reflection loss per bounce [dB]
    std::vector<Building> buildings;
    RoadGraph graph;
    std::vector<GpsSatellite> gps_satellites;
    std::vector<LteBaseStation> lte_base_stations;
    std::map<std::string, std::vector<std::string>> routes;

    bool operator==(const SceneModel&) const = default;
};

// ---------------------------------------------------------------------------
// Polygon helpers
// ---------------------------------------------------------------------------

inline double signed_area(std::span<const Vec2> poly) {
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        a += cross2(poly[i], poly[(i + 1) % poly.size()]);
    }
    return 0.5 * a;
}

namespace detail {

inline int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double v = cross2(b - a, c - a);
    return (v > 0.0) - (v < 0.0);
}

inline bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

/// Closed-segment intersection test (touching counts).
inline bool segments_touch(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
    const int o1 = orientation(p1, p2, q1);
    const int o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1);
    const int o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment(p1, p2, q2)) return true;
    if (o3 == 0 && on_segment(q1, q2, p1)) return true;
    if (o4 == 0 && on_segment(q1, q2, p2)) return true;
    return false;
}

}  // namespace detail

/// True when no two non-adjacent edges touch and adjacent edges meet only at
/// their shared vertex.
inline bool is_simple_polygon(std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (poly[i] == poly[(i + 1) % n]) return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a1 = poly[i];
        const Vec2& a2 = poly[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            const Vec2& b1 = poly[j];
            const Vec2& b2 = poly[(j + 1) % n];
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent) {
                // Shared vertex is fine; a fold-back along the same line is not.
                const Vec2& shared = (j == i + 1) ? a2 : a1;
                const Vec2& other_a = (j == i + 1) ? a1 : a2;
                const Vec2& other_b = (j == i + 1) ? b2 : b1;
                if (detail::orientation(other_a, shared, other_b) == 0 &&
                    (other_a - shared).dot(other_b - shared) > 0.0) {
                    return false;
                }
                continue;
            }
            if (detail::segments_touch(a1, a2, b1, b2)) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace detail {

inline bool finite(const Vec3& v) { return v.allFinite(); }
inline bool finite(const Vec2& v) { return v.allFinite(); }

}  // namespace detail

/// Checks every scene invariant; throws ValidationError naming the entity.
inline void validate_scene(const SceneModel& scene) {
    if (!std::isfinite(scene.ground_elevation)) {
        throw ValidationError("ground_elevation must be finite");
    }
    for (const auto& [name, loss] : scene.materials) {
        if (!std::isfinite(loss) || loss < 0.0) {
            throw ValidationError("material '" + name + "': reflection_loss_db must be >= 0");
        }
    }
    for (const auto& b : scene.buildings) {
        const std::string who = "building '" + b.id + "'";
        if (b.footprint.size() < 3) {
            throw ValidationError(who + ": footprint needs at least 3 vertices");
        }
        for (const auto& v : b.footprint) {
            if (!detail::finite(v)) throw ValidationError(who + ": non-finite footprint vertex");
        }
        if (!std::isfinite(b.height) || b.height <= 0.0) {
            throw ValidationError(who + ": height must be > 0");
        }
        if (!is_simple_polygon(b.footprint)) {
            throw ValidationError(who + ": footprint is not a simple polygon");
        }
        if (signed_area(b.footprint) <= 0.0) {
            throw ValidationError(who + ": footprint must be counter-clockwise");
        }
        if (!scene.materials.contains(b.material)) {
            throw ValidationError(who + ": unknown material '" + b.material + "'");
        }
    }
    for (const auto& [id, p] : scene.graph.nodes) {
        if (!detail::finite(p)) throw ValidationError("road node '" + id + "': non-finite position");
    }
    for (const auto& e : scene.graph.edges) {
        const std::string who = "edge '" + e.from + "'-'" + e.to + "'";
        if (!scene.graph.has_node(e.from) || !scene.graph.has_node(e.to)) {
            throw ValidationError(who + ": references an unknown node");
        }
        if (!std::isfinite(e.length) || e.length <= 0.0) {
            throw ValidationError(who + ": length must be > 0");
        }
        const double euclid = (scene.graph.nodes.at(e.from) - scene.graph.nodes.at(e.to)).norm();
        if (std::abs(e.length - euclid) > 1e-3 * euclid) {
            throw ValidationError(who + ": length deviates more than 0.1% from endpoint distance");
        }
    }
    for (const auto& sat : scene.gps_satellites) {
        const std::string who = "satellite '" + sat.id + "'";
        if (sat.positions.empty()) throw ValidationError(who + ": no positions");
        for (std::size_t i = 0; i < sat.positions.size(); ++i) {
            const auto& s = sat.positions[i];
            if (!std::isfinite(s.epoch) || !detail::finite(s.position)) {
                throw ValidationError(who + ": non-finite ephemeris sample");
            }
            if (s.position.z() <= 1e6) {
                throw ValidationError(who + ": altitude must exceed 1e6 m");
            }
            if (i > 0 && s.epoch <= sat.positions[i - 1].epoch) {
                throw ValidationError(who + ": epochs must be strictly increasing");
            }
        }
    }
    for (const auto& bs : scene.lte_base_stations) {
        const std::string who = "base station '" + bs.id + "'";
        if (!detail::finite(bs.position)) throw ValidationError(who + ": non-finite position");
        if (!std::isfinite(bs.carrier_frequency_hz) || bs.carrier_frequency_hz <= 0.0) {
            throw ValidationError(who + ": carrier_frequency_hz must be > 0");
        }
        if (!std::isfinite(bs.tx_power_dbm)) throw ValidationError(who + ": non-finite tx power");
    }
    for (const auto& [name, ids] : scene.routes) {
        const std::string who = "route '" + name + "'";
        if (ids.empty()) throw ValidationError(who + ": empty");
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (!scene.graph.has_node(ids[i])) {
                throw ValidationError(who + ": unknown node '" + ids[i] + "'");
            }
            if (i > 0 && !scene.graph.edge_length(ids[i - 1], ids[i])) {
                throw ValidationError(who + ": no edge between '" + ids[i - 1] + "' and '" +
                                      ids[i] + "'");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Scheduling
// ---------------------------------------------------------------------------

struct ScheduleEntry {
    std::string node_id;
    Vec3 position = Vec3::Zero();
    double epoch = 0.0;           // [s]
    double segment_length = 0.0;  // incoming segment [m]; 0 for the first entry
};

struct NodeSchedule {
    std::vector<ScheduleEntry> entries;

    double total_length() const {
        double sum = 0.0;
        for (const auto& e : entries) sum += e.segment_length;
        return sum;
    }
};

/// Id given to the k-th intermediate node inserted on the edge a -> b.
inline std::string densified_node_id(const std::string& a, const std::string& b, std::size_t k) {
    return a + ">" + b + "#" + std::to_string(k);
}

/**
 * Time-tags the nodes of a route driven at constant speed.
 *
 * With spacing > 0 each edge is split into ceil(length / spacing) equal
 * pieces and the intermediate points become extra nodes.
 */
inline NodeSchedule schedule_nodes(const RoadGraph& graph, std::span<const std::string> path,
                                   double speed, double start_epoch, double spacing = 0.0) {
    if (!(speed > 0.0) || !std::isfinite(speed)) throw ValidationError("speed must be > 0");
    NodeSchedule out;
    if (path.empty()) return out;
    out.entries.push_back({path.front(), graph.position(path.front()), start_epoch, 0.0});
    double travelled = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const auto len = graph.edge_length(path[i - 1], path[i]);
        if (!len) {
            throw ValidationError("nodes '" + path[i - 1] + "' and '" + path[i] +
                                  "' are not connected");
        }
        const Vec3& a = graph.position(path[i - 1]);
        const Vec3& b = graph.position(path[i]);
        std::size_t pieces = 1;
        if (spacing > 0.0) pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(*len / spacing - 1e-9)));
        const double step = *len / static_cast<double>(pieces);
        for (std::size_t k = 1; k <= pieces; ++k) {
            travelled += step;
            const double w = static_cast<double>(k) / static_cast<double>(pieces);
            ScheduleEntry e;
            e.node_id = (k == pieces) ? path[i] : densified_node_id(path[i - 1], path[i], k);
            e.position = (k == pieces) ? b : Vec3(a + w * (b - a));
            e.epoch = start_epoch + travelled / speed;
            e.segment_length = step;
            out.entries.push_back(std::move(e));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Look angles
// ---------------------------------------------------------------------------

struct AzEl {
    double az = 0.0;  // clockwise from north, [0, 2pi)
    double el = 0.0;  // above the horizontal plane, [-pi/2, pi/2]
};

inline AzEl azimuth_elevation(const Vec3& rx, const Vec3& tx) {
    const Vec3 d = tx - rx;
    const double horiz = std::hypot(d.x(), d.y());
    if (horiz == 0.0 && d.z() == 0.0) throw GeometryError("azimuth_elevation: coincident points");
    AzEl out;
    out.el = std::atan2(d.z(), horiz);
    if (horiz > 0.0) {
        out.az = std::atan2(d.x(), d.y());
        if (out.az < 0.0) out.az += constants::kTwoPi;
        if (out.az >= constants::kTwoPi) out.az -= constants::kTwoPi;
    }
    return out;
}

}  // namespace intpath

#endif  // INTPATH_WORLD_HPP
