/**
 * @file scene_io.hpp
 * @brief JSON scene documents. The layout is described in docs/scene_format.md.
 */

#ifndef INTPATH_SCENE_IO_HPP
#define INTPATH_SCENE_IO_HPP

#include "intpath/world.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace intpath {

namespace detail {

using nlohmann::json;

inline const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ParseError(where + ": missing field '" + key + "'");
    }
    return obj.at(key);
}

inline double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ParseError(where + ": expected a number");
    return v.get<double>();
}

inline std::string text(const json& v, const std::string& where) {
    if (!v.is_string()) throw ParseError(where + ": expected a string");
    return v.get<std::string>();
}

template <int N>
Eigen::Matrix<double, N, 1> point(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != static_cast<std::size_t>(N)) {
        throw ParseError(where + ": expected an array of " + std::to_string(N) + " numbers");
    }
    Eigen::Matrix<double, N, 1> p;
    for (int i = 0; i < N; ++i) p[i] = number(v[static_cast<std::size_t>(i)], where);
    return p;
}

template <int N>
json to_array(const Eigen::Matrix<double, N, 1>& p) {
    json a = json::array();
    for (int i = 0; i < N; ++i) a.push_back(p[i]);
    return a;
}

inline const json& array_field(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_array()) throw ParseError(where + ": field '" + key + "' must be an array");
    return v;
}

}  // namespace detail

/// Builds a SceneModel from a parsed document without validating it.
inline SceneModel scene_from_json(const nlohmann::json& doc) {
    using detail::json;
    if (!doc.is_object()) throw ParseError("scene: top level must be an object");
    SceneModel scene;
    if (doc.contains("ground_elevation")) {
        scene.ground_elevation = detail::number(doc.at("ground_elevation"), "ground_elevation");
    }
    if (doc.contains("materials")) {
        const json& mats = doc.at("materials");
        if (!mats.is_object()) throw ParseError("materials: expected an object");
        for (const auto& [name, m] : mats.items()) {
            const std::string where = "materials." + name;
            scene.materials[name] =
                detail::number(detail::require(m, "reflection_loss_db", where), where);
        }
    }
    if (doc.contains("buildings")) {
        const json& arr = doc.at("buildings");
        if (!arr.is_array()) throw ParseError("buildings: expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const json& b = arr[i];
            std::string where = "buildings[" + std::to_string(i) + "]";
            Building out;
            out.id = b.contains("id") ? detail::text(b.at("id"), where + ".id") : where;
            where = "building '" + out.id + "'";
            for (const json& v : detail::array_field(b, "footprint", where)) {
                out.footprint.push_back(detail::point<2>(v, where + ".footprint"));
            }
            out.height = detail::number(detail::require(b, "height", where), where + ".height");
            if (b.contains("material")) out.material = detail::text(b.at("material"), where);
            scene.buildings.push_back(std::move(out));
        }
    }
    if (doc.contains("graph")) {
        const json& g = doc.at("graph");
        for (const json& n : detail::array_field(g, "nodes", "graph")) {
            const std::string id = detail::text(detail::require(n, "id", "graph.nodes"), "graph.nodes.id");
            if (scene.graph.nodes.contains(id)) {
                throw ParseError("graph.nodes: duplicate id '" + id + "'");
            }
            scene.graph.nodes[id] =
                detail::point<3>(detail::require(n, "position", "node " + id), "node " + id);
        }
        if (g.contains("edges")) {
            for (const json& e : detail::array_field(g, "edges", "graph")) {
                RoadEdge edge;
                edge.from = detail::text(detail::require(e, "from", "graph.edges"), "edge.from");
                edge.to = detail::text(detail::require(e, "to", "graph.edges"), "edge.to");
                if (e.contains("length")) {
                    edge.length = detail::number(e.at("length"), "edge.length");
                } else {
                    auto a = scene.graph.nodes.find(edge.from);
                    auto b = scene.graph.nodes.find(edge.to);
                    if (a == scene.graph.nodes.end() || b == scene.graph.nodes.end()) {
                        throw ParseError("edge '" + edge.from + "'-'" + edge.to +
                                         "': unknown endpoint");
                    }
                    edge.length = (a->second - b->second).norm();
                }
                scene.graph.edges.push_back(std::move(edge));
            }
        }
    }
    if (doc.contains("gps_satellites")) {
        for (const json& s : detail::array_field(doc, "gps_satellites", "scene")) {
            GpsSatellite sat;
            sat.id = detail::text(detail::require(s, "id", "gps_satellites"), "gps_satellites.id");
            const std::string where = "satellite '" + sat.id + "'";
            for (const json& p : detail::array_field(s, "positions", where)) {
                EphemerisSample sample;
                sample.epoch = detail::number(detail::require(p, "epoch", where), where);
                sample.position = detail::point<3>(detail::require(p, "position", where), where);
                sat.positions.push_back(sample);
            }
            scene.gps_satellites.push_back(std::move(sat));
        }
    }
    if (doc.contains("lte_base_stations")) {
        for (const json& s : detail::array_field(doc, "lte_base_stations", "scene")) {
            LteBaseStation bs;
            bs.id = detail::text(detail::require(s, "id", "lte_base_stations"), "lte_base_stations.id");
            const std::string where = "base station '" + bs.id + "'";
            bs.position = detail::point<3>(detail::require(s, "position", where), where);
            bs.carrier_frequency_hz =
                detail::number(detail::require(s, "carrier_frequency_hz", where), where);
            if (s.contains("tx_power_dbm")) bs.tx_power_dbm = detail::number(s.at("tx_power_dbm"), where);
            scene.lte_base_stations.push_back(std::move(bs));
        }
    }
    if (doc.contains("routes")) {
        const json& routes = doc.at("routes");
        if (!routes.is_object()) throw ParseError("routes: expected an object");
        for (const auto& [name, ids] : routes.items()) {
            if (!ids.is_array()) throw ParseError("routes." + name + ": expected an array");
            std::vector<std::string> seq;
            for (const json& id : ids) seq.push_back(detail::text(id, "routes." + name));
            scene.routes[name] = std::move(seq);
        }
    }
    return scene;
}

inline nlohmann::json scene_to_json(const SceneModel& scene) {
    using detail::json;
    json doc;
    doc["ground_elevation"] = scene.ground_elevation;
    doc["materials"] = json::object();
    for (const auto& [name, loss] : scene.materials) {
        doc["materials"][name] = {{"reflection_loss_db", loss}};
    }
    doc["buildings"] = json::array();
    for (const auto& b : scene.buildings) {
        json fp = json::array();
        for (const auto& v : b.footprint) fp.push_back(detail::to_array<2>(v));
        doc["buildings"].push_back(
            {{"id", b.id}, {"footprint", fp}, {"height", b.height}, {"material", b.material}});
    }
    json nodes = json::array();
    for (const auto& [id, p] : scene.graph.nodes) {
        nodes.push_back({{"id", id}, {"position", detail::to_array<3>(p)}});
    }
    json edges = json::array();
    for (const auto& e : scene.graph.edges) {
        edges.push_back({{"from", e.from}, {"to", e.to}, {"length", e.length}});
    }
    doc["graph"] = {{"nodes", nodes}, {"edges", edges}};
    doc["gps_satellites"] = json::array();
    for (const auto& s : scene.gps_satellites) {
        json positions = json::array();
        for (const auto& p : s.positions) {
            positions.push_back({{"epoch", p.epoch}, {"position", detail::to_array<3>(p.position)}});
        }
        doc["gps_satellites"].push_back({{"id", s.id}, {"positions", positions}});
    }
    doc["lte_base_stations"] = json::array();
    for (const auto& bs : scene.lte_base_stations) {
        doc["lte_base_stations"].push_back({{"id", bs.id},
                                            {"position", detail::to_array<3>(bs.position)},
                                            {"carrier_frequency_hz", bs.carrier_frequency_hz},
                                            {"tx_power_dbm", bs.tx_power_dbm}});
    }
    doc["routes"] = json::object();
    for (const auto& [name, ids] : scene.routes) doc["routes"][name] = ids;
    return doc;
}

/// Parses and validates a scene document held in memory.
inline SceneModel parse_scene(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("scene: ") + e.what());
    }
    SceneModel scene = scene_from_json(doc);
    validate_scene(scene);
    return scene;
}

inline SceneModel load_scene(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scene file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scene(buf.str());
}

inline std::string serialize_scene(const SceneModel& scene) { return scene_to_json(scene).dump(2); }

}  // namespace intpath

#endif  // INTPATH_SCENE_IO_HPP
