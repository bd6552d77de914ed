/**
 * @file report.hpp
 * @brief Text artifacts of a planning run: measurement, integrity and ray
 * dumps (full precision, tab separated), the plan report (JSON, 6
 * significant digits) and console summaries.
 */

#ifndef INTPATH_REPORT_HPP
#define INTPATH_REPORT_HPP

#include "intpath/pipeline.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

namespace intpath {

/// printf-style "%.<digits>g"; infinities are spelled inf / -inf.
inline std::string format_g(double v, int digits) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

inline std::string full(double v) { return format_g(v, 17); }

/// Rounds to 6 significant digits.
inline double round6(double v) {
    if (!std::isfinite(v)) return v;
    return std::strtod(format_g(v, 6).c_str(), nullptr);
}

namespace detail {

inline nlohmann::json report_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return round6(v);
}

/// Struck faces as building_id:edge_index, separated by ';'.
inline std::string wall_list(const PropagationPath& p, const SceneModel& scene) {
    std::string out;
    for (std::size_t i = 0; i < p.walls.size(); ++i) {
        if (i) out += ';';
        out += scene.buildings.at(p.walls[i].building).id + ":" + std::to_string(p.walls[i].edge);
    }
    return out.empty() ? "-" : out;
}

inline std::string vertex_list(const PropagationPath& p) {
    std::string out;
    for (std::size_t i = 0; i < p.vertices.size(); ++i) {
        if (i) out += ';';
        const Vec3& v = p.vertices[i];
        out += full(v.x()) + "," + full(v.y()) + "," + full(v.z());
    }
    return out;
}

}  // namespace detail

inline void write_measurements(std::ostream& os, const std::vector<RouteOutcome>& routes) {
    os << "route\tnode_id\tepoch\tsystem\ttx_id\tlos\taz_rad\tel_rad\ttrue_range_m\tbias_m\tsigma_m\tpseudorange_m\n";
    for (const auto& r : routes) {
        for (const auto& n : r.results) {
            const std::string head = r.candidate.name + "\t" + n.node_id + "\t" + full(n.epoch) + "\t";
            for (const auto& m : n.gps) {
                os << head << "GPS\t" << m.sat_id << '\t' << (m.is_los ? 1 : 0) << '\t' << full(m.look.az) << '\t'
                   << full(m.look.el) << '\t' << full(m.true_range) << '\t' << full(m.nlos_bias) << '\t'
                   << full(m.sigma) << '\t' << full(m.pseudorange) << '\n';
            }
            for (const auto& m : n.lte) {
                os << head << "LTE\t" << m.bs_id << '\t' << (m.is_los ? 1 : 0) << '\t' << full(m.look.az) << '\t'
                   << full(m.look.el) << '\t' << full(m.true_range) << '\t' << full(m.mp_bias) << '\t'
                   << full(m.sigma) << '\t' << full(m.pseudorange) << '\n';
            }
        }
    }
}

/// Per-node table; dist_m is the incoming segment length used in the cost.
inline void write_integrity(std::ostream& os, const std::vector<RouteOutcome>& routes) {
    os << "route\tnode_id\tepoch\tn_gps\tn_lte\tfault\thpl_m\tdist_m\n";
    for (const auto& r : routes) {
        for (std::size_t i = 0; i < r.results.size(); ++i) {
            const auto& n = r.results[i];
            os << r.candidate.name << '\t' << n.node_id << '\t' << full(n.epoch) << '\t' << n.n_gps << '\t' << n.n_lte
               << '\t' << (n.fault ? 1 : 0) << '\t' << full(n.hpl) << '\t'
               << full(r.schedule.entries[i].segment_length) << '\n';
        }
    }
}

/// One row per retained propagation path. GPS rows carry no loss value.
inline void write_rays(std::ostream& os, const std::vector<RouteOutcome>& routes, const SceneModel& scene) {
    os << "route\tnode_id\ttx_id\tbounces\tlength_m\tloss_db\twalls\tvertices\n";
    for (const auto& r : routes) {
        for (const auto& n : r.results) {
            const std::string head = r.candidate.name + "\t" + n.node_id + "\t";
            for (const auto& m : n.gps) {
                os << head << m.sat_id << '\t' << m.path.bounces << '\t' << full(m.path.total_length) << "\t-\t"
                   << detail::wall_list(m.path, scene) << '\t' << detail::vertex_list(m.path) << '\n';
            }
            for (const auto& m : n.lte) {
                for (const auto& p : m.paths) {
                    os << head << m.bs_id << '\t' << p.bounces << '\t' << full(p.total_length) << '\t'
                       << full(p.path_loss_db) << '\t' << detail::wall_list(p, scene) << '\t' << detail::vertex_list(p) << '\n';
                }
            }
        }
    }
}

inline nlohmann::json plan_report(const RunConfig& cfg, const PlanOutcome& outcome) {
    using nlohmann::json;
    using detail::report_number;
    json doc;
    doc["start"] = cfg.start_node;
    doc["target"] = cfg.target_node;
    doc["departure_epoch"] = report_number(cfg.departure_epoch);
    doc["speed"] = report_number(cfg.speed);
    doc["node_spacing"] = report_number(cfg.node_spacing);
    const auto& p = cfg.integrity;
    doc["integrity"] = {{"b_int", report_number(p.b_int)}, {"p_hmi", report_number(p.p_hmi)},
                        {"p_fault", report_number(p.p_fault)}, {"k_max", p.k_max},
                        {"fault_max", report_number(p.fault_max)}, {"hal", report_number(p.hal)},
                        {"p_fa", report_number(p.p_fa)}};
    json rows = json::array();
    for (const auto& e : outcome.plan.evaluations) {
        rows.push_back({{"name", e.name},
                        {"nodes", e.nodes},
                        {"travel_distance_m", report_number(e.total_distance)},
                        {"avg_hpl_m", report_number(e.avg_hpl)},
                        {"max_hpl_m", report_number(e.max_hpl)},
                        {"fault_ratio", report_number(e.fault_ratio)},
                        {"n_nodes", e.n_nodes},
                        {"n_faulty", e.n_faulty},
                        {"cost_m2", report_number(e.cost)},
                        {"fault_ratio_ok", e.fault_ratio_ok},
                        {"hal_ok", e.hal_ok},
                        {"feasible", e.feasible}});
    }
    doc["candidates"] = std::move(rows);
    if (outcome.plan.chosen) {
        const auto& c = outcome.plan.evaluations[*outcome.plan.chosen];
        doc["chosen"] = c.name;
        doc["chosen_nodes"] = c.nodes;
    } else {
        doc["chosen"] = nullptr;
        doc["chosen_nodes"] = json::array();
    }
    return doc;
}

/// Every output file of a plan run as (file name, contents).
inline std::vector<std::pair<std::string, std::string>> render_artifacts(const RunConfig& cfg, const PlanOutcome& outcome,
                                                                         const SceneModel& scene) {
    std::vector<std::pair<std::string, std::string>> files;
    std::ostringstream meas, integ;
    write_measurements(meas, outcome.routes);
    write_integrity(integ, outcome.routes);
    files.emplace_back("measurements.tsv", meas.str());
    files.emplace_back("integrity.tsv", integ.str());
    files.emplace_back("plan_report.json", plan_report(cfg, outcome).dump(2) + "\n");
    if (cfg.ray_dump) {
        std::ostringstream rays;
        write_rays(rays, outcome.routes, scene);
        files.emplace_back("rays.tsv", rays.str());
    }
    return files;
}

/// Table of distance, HPL statistics, fault ratio, cost and feasibility.
inline void print_summary(std::ostream& os, const PlanOutcome& outcome) {
    char line[256];
    std::snprintf(line, sizeof line, "%-12s %12s %10s %10s %10s %14s  %s\n", "candidate", "distance_m", "avg_hpl_m",
                  "max_hpl_m", "fault_%", "cost_m2", "feasible");
    os << line;
    for (const auto& e : outcome.plan.evaluations) {
        std::snprintf(line, sizeof line, "%-12s %12s %10s %10s %10s %14s  %s\n", e.name.c_str(),
                      format_g(e.total_distance, 6).c_str(), format_g(e.avg_hpl, 6).c_str(),
                      format_g(e.max_hpl, 6).c_str(), format_g(100.0 * e.fault_ratio, 4).c_str(),
                      format_g(e.cost, 6).c_str(), e.feasible ? "yes" : (e.fault_ratio_ok ? "no (HAL)" : "no (faults)"));
        os << line;
    }
    if (outcome.plan.chosen) {
        const auto& c = outcome.plan.evaluations[*outcome.plan.chosen];
        os << "chosen: " << c.name << " (";
        for (std::size_t i = 0; i < c.nodes.size(); ++i) os << (i ? " -> " : "") << c.nodes[i];
        os << ")\n";
    } else {
        os << "chosen: none (no feasible path)\n";
    }
}

/// Human-readable breakdown of one node's measurements and protection levels.
inline void print_node_report(std::ostream& os, const NodeIntegrityResult& r, const IntegrityParams& params) {
    char line[256];
    os << "node " << r.node_id << " at epoch " << format_g(r.epoch, 10) << " s, position (" << format_g(r.position.x(), 8)
       << ", " << format_g(r.position.y(), 8) << ", " << format_g(r.position.z(), 8) << ")\n";
    os << "GPS satellites visible: " << r.n_gps << "\n";
    std::size_t row = 0;
    for (const auto& m : r.gps) {
        std::snprintf(line, sizeof line, "  [%zu] %-8s az %7.2f deg  el %6.2f deg  %-4s  nlos_bias %10.4f m  sigma %7.4f m\n",
                      row++, m.sat_id.c_str(), m.look.az * 180.0 / constants::kPi, m.look.el * 180.0 / constants::kPi,
                      m.is_los ? "LOS" : "NLOS", m.nlos_bias, m.sigma);
        os << line;
    }
    os << "LTE base stations with coverage: " << r.n_lte << "\n";
    for (const auto& m : r.lte) {
        std::snprintf(line, sizeof line, "  [%zu] %-8s paths %2zu  first %-4s  mp_bias %12.4f m  sigma %7.4f m\n",
                      row++, m.bs_id.c_str(), m.cir.size(), m.is_los ? "LOS" : "NLOS", m.mp_bias, m.sigma);
        os << line;
    }
    if (!r.degenerate_reason.empty()) {
        os << "conservative result: " << r.degenerate_reason << "\n";
        os << "HPL inf m, fault yes\n";
        return;
    }
    const std::size_t n = r.n_gps + r.n_lte;
    os << "fault modes: " << r.per_mode.size() << " (k_max " << params.k_max << ", " << n << " measurements)\n";
    if (!r.per_mode.empty()) {
        std::snprintf(line, sizeof line, "  %5s %-12s %11s %11s %11s %11s %8s %11s %11s\n", "mode", "excluded", "dr_east",
                      "D_east", "dr_north", "D_north", "K_md", "PL_east", "PL_north");
        os << line;
    }
    for (const auto& m : r.per_mode) {
        std::string ex;
        for (std::size_t j : m.excluded) ex += (ex.empty() ? "" : ",") + std::to_string(j);
        std::snprintf(line, sizeof line, "  %5zu %-12s %11.4f %11.4f %11.4f %11.4f %8.4f %11.4f %11.4f%s\n", m.index,
                      ex.c_str(), m.delta_r[0], m.threshold[0], m.delta_r[1], m.threshold[1], m.k_md, m.pl[0], m.pl[1],
                      m.separation_exceeded() ? "  exceeded" : "");
        os << line;
    }
    std::snprintf(line, sizeof line, "PL0 east %.4f m, north %.4f m\nPL  east %.4f m, north %.4f m\n", r.pl0[0],
                  r.pl0[1], r.pl[0], r.pl[1]);
    os << line;
    os << "HPL " << format_g(r.hpl, 6) << " m, fault " << (r.fault ? "yes" : "no") << "\n";
}

}  // namespace intpath

#endif  // INTPATH_REPORT_HPP
