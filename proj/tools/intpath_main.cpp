// Command-line front end: plan, node, rays and validate subcommands.
//
// Exit status: 0 success (a feasible route for `plan`), 2 no feasible route,
// 1 invalid input, 3 internal error.

#include "intpath/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNoFeasible = 2;
constexpr int kExitInternal = 3;

struct Overrides {
    std::string config;
    std::optional<std::string> scene, start, target, output_dir, candidates;
    std::optional<double> departure_epoch, speed, spacing, clock_bias;
    std::optional<double> b_int, p_hmi, p_fault, fault_max, hal, p_fa, loss_threshold;
    std::optional<int> k_max, gps_bounces, lte_bounces;
    std::optional<std::size_t> k_paths;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool ray_dump = false;
};

void add_run_options(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config, "Run configuration (JSON)");
    cmd->add_option("--scene", o.scene, "Scene file (overrides config)");
    cmd->add_option("--start", o.start, "Start node id");
    cmd->add_option("--target", o.target, "Target node id");
    cmd->add_option("--departure-epoch", o.departure_epoch, "Departure time [s]");
    cmd->add_option("--speed", o.speed, "Vehicle speed [m/s]");
    cmd->add_option("--spacing", o.spacing, "Node spacing along edges [m], 0 disables densification");
    cmd->add_option("--clock-bias", o.clock_bias, "Receiver clock bias used in prediction [s]");
    cmd->add_option("--output-dir", o.output_dir, "Directory for output artifacts");
    cmd->add_option("--candidates", o.candidates, "auto, named or k_shortest")
        ->check(CLI::IsMember({"auto", "named", "k_shortest"}));
    cmd->add_option("--k", o.k_paths, "Number of shortest paths");
    cmd->add_option("--b-int", o.b_int, "Nominal bias bound [m]");
    cmd->add_option("--p-hmi", o.p_hmi, "Integrity risk");
    cmd->add_option("--p-fault", o.p_fault, "Single-measurement fault prior");
    cmd->add_option("--k-max", o.k_max, "Largest simultaneous fault count");
    cmd->add_option("--fault-max", o.fault_max, "Allowed faulty-node ratio");
    cmd->add_option("--hal", o.hal, "Horizontal alert limit [m]");
    cmd->add_option("--p-fa", o.p_fa, "False-alert probability");
    cmd->add_option("--gps-bounces", o.gps_bounces, "Maximum GPS reflections");
    cmd->add_option("--lte-bounces", o.lte_bounces, "Maximum LTE reflections");
    cmd->add_option("--loss-threshold", o.loss_threshold, "LTE path-loss threshold [dB]");
    cmd->add_option("--seed", o.seed, "Enable seeded measurement noise");
    cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
}

intpath::RunConfig make_config(const Overrides& o) {
    intpath::RunConfig cfg;
    if (!o.config.empty()) cfg = intpath::load_config(o.config);
    if (o.scene) cfg.scene_path = *o.scene;
    if (o.start) cfg.start_node = *o.start;
    if (o.target) cfg.target_node = *o.target;
    if (o.output_dir) cfg.output_dir = *o.output_dir;
    if (o.candidates) cfg.candidates = intpath::candidate_mode_from(*o.candidates);
    if (o.departure_epoch) cfg.departure_epoch = *o.departure_epoch;
    if (o.speed) cfg.speed = *o.speed;
    if (o.spacing) cfg.node_spacing = *o.spacing;
    if (o.clock_bias) cfg.prediction.clock_bias = *o.clock_bias;
    if (o.k_paths) cfg.k_paths = *o.k_paths;
    if (o.b_int) cfg.integrity.b_int = *o.b_int;
    if (o.p_hmi) cfg.integrity.p_hmi = *o.p_hmi;
    if (o.p_fault) cfg.integrity.p_fault = *o.p_fault;
    if (o.k_max) cfg.integrity.k_max = *o.k_max;
    if (o.fault_max) cfg.integrity.fault_max = *o.fault_max;
    if (o.hal) cfg.integrity.hal = *o.hal;
    if (o.p_fa) cfg.integrity.p_fa = *o.p_fa;
    if (o.gps_bounces) cfg.prediction.gps.max_bounces = *o.gps_bounces;
    if (o.lte_bounces) cfg.prediction.lte.max_bounces = *o.lte_bounces;
    if (o.loss_threshold) cfg.prediction.lte.loss_threshold_db = *o.loss_threshold;
    if (o.seed) cfg.prediction.noise_seed = *o.seed;
    if (o.threads) cfg.threads = *o.threads;
    if (o.ray_dump) cfg.ray_dump = true;
    return cfg;
}

/// All artifacts are rendered in memory first so a failure leaves nothing
/// half-written on disk.
void write_files(const std::filesystem::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
    std::filesystem::create_directories(dir);
    for (const auto& [name, body] : files) {
        std::ofstream out(dir / name, std::ios::binary);
        out << body;
        if (!out) throw std::runtime_error("cannot write '" + (dir / name).string() + "'");
    }
}

int cmd_plan(const Overrides& o) {
    const auto cfg = make_config(o);
    cfg.validate();
    const auto scene = intpath::load_scene(cfg.scene_path);
    const auto outcome = intpath::run_plan(cfg, scene);

    const auto files = intpath::render_artifacts(cfg, outcome, scene);
    write_files(cfg.output_dir, files);

    intpath::print_summary(std::cout, outcome);
    return outcome.plan.chosen ? kExitOk : kExitNoFeasible;
}

int cmd_node(const Overrides& o, const std::string& node) {
    const auto cfg = make_config(o);
    if (cfg.scene_path.empty()) throw intpath::ValidationError("config: scene is required");
    const auto scene = intpath::load_scene(cfg.scene_path);
    const auto result = intpath::run_node_report(cfg, scene, node);
    intpath::print_node_report(std::cout, result, cfg.integrity);
    return kExitOk;
}

int cmd_rays(const Overrides& o) {
    auto cfg = make_config(o);
    cfg.validate();
    const auto scene = intpath::load_scene(cfg.scene_path);
    cfg.validate_against(scene);
    const auto routes = intpath::evaluate_routes(cfg, scene, intpath::select_candidates(cfg, scene));
    std::ostringstream rays;
    intpath::write_rays(rays, routes, scene);
    write_files(cfg.output_dir, {{"rays.tsv", rays.str()}});
    std::cout << "wrote " << (cfg.output_dir / "rays.tsv").string() << "\n";
    return kExitOk;
}

int cmd_validate(const Overrides& o) {
    const auto cfg = make_config(o);
    if (cfg.scene_path.empty()) throw intpath::ValidationError("config: scene is required");
    const auto scene = intpath::load_scene(cfg.scene_path);
    std::cout << "scene ok: " << scene.buildings.size() << " buildings, " << scene.graph.nodes.size() << " nodes, "
              << scene.graph.edges.size() << " edges, " << scene.gps_satellites.size() << " GPS satellites, "
              << scene.lte_base_stations.size() << " LTE base stations, " << scene.routes.size() << " routes\n";
    if (!cfg.start_node.empty() || !cfg.target_node.empty()) {
        cfg.validate();
        cfg.validate_against(scene);
        const auto candidates = intpath::select_candidates(cfg, scene);
        std::cout << "config ok: " << candidates.size() << " candidate routes from " << cfg.start_node << " to "
                  << cfg.target_node << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Integrity-aware route planning with GPS and LTE"};
    app.require_subcommand(1);

    Overrides plan_o, node_o, rays_o, validate_o;
    std::string node_id;

    auto* plan = app.add_subcommand("plan", "Evaluate candidate routes and choose the optimal feasible one");
    add_run_options(plan, plan_o);
    plan->add_flag("--ray-dump", plan_o.ray_dump, "Also write rays.tsv");

    auto* node = app.add_subcommand("node", "Integrity breakdown at one road node");
    add_run_options(node, node_o);
    node->add_option("--node", node_id, "Road node id")->required();

    auto* rays = app.add_subcommand("rays", "Write the propagation paths along every candidate route");
    add_run_options(rays, rays_o);

    auto* validate = app.add_subcommand("validate", "Check a scene and configuration");
    add_run_options(validate, validate_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*plan) return cmd_plan(plan_o);
        if (*node) return cmd_node(node_o, node_id);
        if (*rays) return cmd_rays(rays_o);
        return cmd_validate(validate_o);
    } catch (const intpath::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
