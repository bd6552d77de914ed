/**
 * @file pipeline.hpp
 * @brief Run configuration and the end-to-end planning pipeline:
 * candidates -> schedules -> per-node prediction and integrity -> selection.
 */

#ifndef INTPATH_PIPELINE_HPP
#define INTPATH_PIPELINE_HPP

#include "intpath/parallel.hpp"
#include "intpath/planner.hpp"
#include "intpath/scene_io.hpp"

#include <filesystem>
#include <set>

namespace intpath {

enum class CandidateMode { Auto, Named, KShortest };

struct RunConfig {
    std::filesystem::path scene_path;
    std::string start_node;
    std::string target_node;
    double departure_epoch = 0.0;  // [s]
    double speed = 40.0 / 3.6;     // [m/s]
    double node_spacing = 25.0;    // [m]; 0 keeps only road-graph vertices
    IntegrityParams integrity;
    PredictionConfig prediction;
    CandidateMode candidates = CandidateMode::Auto;
    std::size_t k_paths = 10;
    std::filesystem::path output_dir = "out";
    bool ray_dump = false;
    unsigned threads = 0;  // 0 = hardware concurrency

    void validate() const {
        if (scene_path.empty()) throw ValidationError("config: scene is required");
        if (start_node.empty()) throw ValidationError("config: start is required");
        if (target_node.empty()) throw ValidationError("config: target is required");
        if (!std::isfinite(departure_epoch)) throw ValidationError("config: departure_epoch must be finite");
        if (!(speed > 0.0) || !std::isfinite(speed)) throw ValidationError("config: speed must be > 0");
        if (!(node_spacing >= 0.0) || !std::isfinite(node_spacing)) {
            throw ValidationError("config: node_spacing must be >= 0");
        }
        if (k_paths < 1) throw ValidationError("config: candidates.k must be >= 1");
        integrity.validate();
        prediction.validate();
    }

    /// Checks the node references against a loaded scene.
    void validate_against(const SceneModel& scene) const {
        if (!scene.graph.has_node(start_node)) throw ValidationError("config: start node '" + start_node + "' not in scene");
        if (!scene.graph.has_node(target_node)) {
            throw ValidationError("config: target node '" + target_node + "' not in scene");
        }
        if (candidates == CandidateMode::Named) {
            const bool any = std::any_of(scene.routes.begin(), scene.routes.end(), [&](const auto& r) {
                return !r.second.empty() && r.second.front() == start_node && r.second.back() == target_node;
            });
            if (!any) throw ValidationError("config: candidates.mode is 'named' but no scene route joins start and target");
        }
    }
};

inline const char* to_string(CandidateMode m) {
    switch (m) {
        case CandidateMode::Named: return "named";
        case CandidateMode::KShortest: return "k_shortest";
        default: return "auto";
    }
}

inline CandidateMode candidate_mode_from(const std::string& s) {
    if (s == "auto") return CandidateMode::Auto;
    if (s == "named") return CandidateMode::Named;
    if (s == "k_shortest") return CandidateMode::KShortest;
    throw ValidationError("config: candidates.mode must be auto, named or k_shortest (got '" + s + "')");
}

namespace detail {

/// Copies recognised keys out of a JSON object; anything else is rejected so
/// typos surface instead of being ignored.
class FieldReader {
public:
    FieldReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) throw ParseError("config: " + where_ + " must be an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!obj_.contains(key)) return;
        const json& v = obj_.at(key);
        const std::string name = "config: " + qualified(key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ParseError(name + " must be a boolean");
            out = v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ParseError(name + " must be a string");
            out = v.get<std::string>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ParseError(name + " must be an integer");
            if (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0) throw ParseError(name + " must be >= 0");
            out = v.get<T>();
        } else {
            if (!v.is_number()) throw ParseError(name + " must be a number");
            out = v.get<T>();
        }
    }

    const json* child(const char* key) {
        seen_.insert(key);
        return obj_.contains(key) ? &obj_.at(key) : nullptr;
    }

    void finish() const {
        for (const auto& [k, _] : obj_.items()) {
            if (!seen_.contains(k)) throw ParseError("config: unknown field '" + qualified(k) + "'");
        }
    }

    std::string qualified(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

private:
    const json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

inline SigmaModel read_sigma(const json& v, SigmaModel model) {
    FieldReader r(v, "sigma");
    r.get("gps_a", model.gps_floor_m);
    r.get("gps_b", model.gps_scale_m);
    r.get("gps_el0", model.gps_elevation_rad);
    r.get("lte", model.lte_m);
    r.finish();
    return model;
}

}  // namespace detail

/// Parses a run configuration. Relative scene and output paths resolve
/// against base_dir.
inline RunConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {}) {
    RunConfig cfg;
    detail::FieldReader top(doc, "");
    std::string scene;
    std::string output;
    std::string mode = "auto";
    top.get("scene", scene);
    top.get("start", cfg.start_node);
    top.get("target", cfg.target_node);
    top.get("departure_epoch", cfg.departure_epoch);
    top.get("speed", cfg.speed);
    top.get("node_spacing", cfg.node_spacing);
    top.get("output_dir", output);
    top.get("ray_dump", cfg.ray_dump);
    top.get("threads", cfg.threads);
    top.get("clock_bias", cfg.prediction.clock_bias);
    if (const auto* seed = top.child("seed"); seed && !seed->is_null()) {
        if (!seed->is_number_unsigned()) throw ParseError("config: seed must be a non-negative integer");
        cfg.prediction.noise_seed = seed->get<std::uint64_t>();
    }
    if (const auto* v = top.child("integrity")) {
        detail::FieldReader r(*v, "integrity");
        auto& p = cfg.integrity;
        r.get("b_int", p.b_int);
        r.get("p_hmi", p.p_hmi);
        r.get("p_fault", p.p_fault);
        r.get("k_max", p.k_max);
        r.get("fault_max", p.fault_max);
        r.get("hal", p.hal);
        r.get("p_fa", p.p_fa);
        r.finish();
    }
    if (const auto* v = top.child("discriminator")) {
        detail::FieldReader r(*v, "discriminator");
        auto& d = cfg.prediction.lte.discriminator;
        r.get("crs_subcarriers", d.crs_subcarriers);
        r.get("total_subcarriers", d.total_subcarriers);
        r.get("subcarrier_spacing_hz", d.subcarrier_spacing_hz);
        r.get("time_shift", d.time_shift);
        r.get("symbol_error", d.symbol_error);
        r.get("power_scale", d.power_scale);
        r.finish();
    }
    if (const auto* v = top.child("sigma")) {
        cfg.prediction.gps.sigma = detail::read_sigma(*v, cfg.prediction.gps.sigma);
        cfg.prediction.lte.sigma = cfg.prediction.gps.sigma;
    }
    if (const auto* v = top.child("rays")) {
        detail::FieldReader r(*v, "rays");
        r.get("gps_max_bounces", cfg.prediction.gps.max_bounces);
        r.get("lte_max_bounces", cfg.prediction.lte.max_bounces);
        r.get("loss_threshold_db", cfg.prediction.lte.loss_threshold_db);
        r.finish();
    }
    if (const auto* v = top.child("candidates")) {
        detail::FieldReader r(*v, "candidates");
        r.get("mode", mode);
        r.get("k", cfg.k_paths);
        r.finish();
    }
    top.finish();
    cfg.candidates = candidate_mode_from(mode);
    if (!scene.empty()) cfg.scene_path = base_dir / scene;
    if (!output.empty()) cfg.output_dir = base_dir / output;
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read config '" + path.string() + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("config '" + path.string() + "': " + e.what());
    }
    return config_from_json(doc, path.parent_path());
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

struct RouteOutcome {
    CandidatePath candidate;
    NodeSchedule schedule;
    std::vector<NodeIntegrityResult> results;  // parallel to schedule.entries
    PathEvaluation evaluation;
};

struct PlanOutcome {
    std::vector<RouteOutcome> routes;
    PlanResult plan;
};

/// Candidate routes for the configured mode. Auto uses the scene's named
/// routes when any joins start and target, and K-shortest paths otherwise.
inline std::vector<CandidatePath> select_candidates(const RunConfig& cfg, const SceneModel& scene) {
    const auto& s = cfg.start_node;
    const auto& t = cfg.target_node;
    if (s == t) return {make_candidate(scene.graph, s, {s})};
    std::vector<CandidatePath> named;
    for (const auto& [name, ids] : scene.routes) {
        if (!ids.empty() && ids.front() == s && ids.back() == t) named.push_back(make_candidate(scene.graph, name, ids));
    }
    switch (cfg.candidates) {
        case CandidateMode::Named: return named;
        case CandidateMode::KShortest: return enumerate_candidates(scene.graph, s, t, cfg.k_paths, scene.routes);
        default: return named.empty() ? k_shortest_paths(scene.graph, s, t, cfg.k_paths) : named;
    }
}

/// Evaluates every scheduled node of every route. Node results are written
/// to fixed slots so the output does not depend on thread timing.
inline std::vector<RouteOutcome> evaluate_routes(const RunConfig& cfg, const SceneModel& scene,
                                                 std::vector<CandidatePath> candidates) {
    std::vector<RouteOutcome> routes;
    std::vector<std::pair<std::size_t, std::size_t>> jobs;
    for (auto& c : candidates) {
        RouteOutcome r;
        r.schedule = schedule_nodes(scene.graph, c.nodes, cfg.speed, cfg.departure_epoch, cfg.node_spacing);
        r.results.resize(r.schedule.entries.size());
        r.candidate = std::move(c);
        for (std::size_t j = 0; j < r.schedule.entries.size(); ++j) jobs.emplace_back(routes.size(), j);
        routes.push_back(std::move(r));
    }
    parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
        const auto [ri, ni] = jobs[i];
        auto& route = routes[ri];
        route.results[ni] = evaluate_node(route.schedule.entries[ni], scene, cfg.integrity, cfg.prediction);
    });
    for (auto& r : routes) {
        std::map<std::string, NodeIntegrityResult> by_id;
        for (const auto& res : r.results) by_id.emplace(res.node_id, res);
        r.evaluation = evaluate_path(r.schedule, by_id, cfg.integrity);
        r.evaluation.name = r.candidate.name;
        r.evaluation.nodes = r.candidate.nodes;
    }
    return routes;
}

inline PlanOutcome run_plan(const RunConfig& cfg, const SceneModel& scene) {
    cfg.validate();
    cfg.validate_against(scene);
    PlanOutcome out;
    out.routes = evaluate_routes(cfg, scene, select_candidates(cfg, scene));
    std::vector<PathEvaluation> evals;
    for (const auto& r : out.routes) evals.push_back(r.evaluation);
    out.plan = select_optimal(std::move(evals));
    return out;
}

/// Integrity at one road-graph node at the departure epoch.
inline NodeIntegrityResult run_node_report(const RunConfig& cfg, const SceneModel& scene, const std::string& node_id) {
    if (!scene.graph.has_node(node_id)) throw ValidationError("unknown road node '" + node_id + "'");
    cfg.integrity.validate();
    cfg.prediction.validate();
    ScheduleEntry e;
    e.node_id = node_id;
    e.position = scene.graph.position(node_id);
    e.epoch = cfg.departure_epoch;
    return evaluate_node(e, scene, cfg.integrity, cfg.prediction);
}

}  // namespace intpath

#endif  // INTPATH_PIPELINE_HPP
