#include "intpath/report.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace intpath;

namespace {

const std::filesystem::path kData = INTPATH_DATA_DIR;

RunConfig benchmark_config(unsigned threads = 0) {
    auto cfg = load_config(kData / "benchmark_config.json");
    cfg.threads = threads;
    return cfg;
}

const SceneModel& benchmark_scene() {
    static const SceneModel scene = load_scene(kData / "benchmark_scene.json");
    return scene;
}

const PlanOutcome& benchmark_outcome() {
    static const PlanOutcome out = run_plan(benchmark_config(), benchmark_scene());
    return out;
}

std::vector<std::vector<std::string>> read_tsv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, '\t')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST(Config, DefaultsMatchReferenceParameters) {
    const RunConfig cfg;
    EXPECT_EQ(cfg.integrity.b_int, 0.5);
    EXPECT_EQ(cfg.integrity.p_hmi, 0.01);
    EXPECT_EQ(cfg.integrity.p_fault, 2e-4);
    EXPECT_EQ(cfg.integrity.k_max, 3);
    EXPECT_EQ(cfg.integrity.fault_max, 0.15);
    EXPECT_EQ(cfg.integrity.hal, 40.0);
    EXPECT_EQ(cfg.prediction.gps.max_bounces, 1);
    EXPECT_EQ(cfg.prediction.lte.max_bounces, 2);
    EXPECT_EQ(cfg.prediction.lte.loss_threshold_db, 130.0);
    EXPECT_NEAR(cfg.speed, 11.111, 1e-3);
}

TEST(Config, ParsesEveryField) {
    const auto doc = nlohmann::json::parse(R"({
      "scene": "s.json", "start": "A", "target": "B", "departure_epoch": 12, "speed": 5, "node_spacing": 0,
      "output_dir": "o", "ray_dump": true, "threads": 2, "clock_bias": 1e-7, "seed": 9,
      "integrity": {"b_int": 1, "p_hmi": 0.001, "p_fault": 1e-5, "k_max": 2, "fault_max": 0.2, "hal": 30, "p_fa": 0.02},
      "discriminator": {"crs_subcarriers": 100, "total_subcarriers": 1024, "subcarrier_spacing_hz": 30000,
                        "time_shift": 0.25, "symbol_error": 0.1, "power_scale": 2},
      "sigma": {"gps_a": 1, "gps_b": 3, "gps_el0": 0.3, "lte": 4},
      "rays": {"gps_max_bounces": 1, "lte_max_bounces": 1, "loss_threshold_db": 120},
      "candidates": {"mode": "k_shortest", "k": 3}
    })");
    const auto cfg = config_from_json(doc, "base");
    EXPECT_EQ(cfg.scene_path, std::filesystem::path("base") / "s.json");
    EXPECT_EQ(cfg.output_dir, std::filesystem::path("base") / "o");
    EXPECT_EQ(cfg.start_node, "A");
    EXPECT_EQ(cfg.departure_epoch, 12.0);
    EXPECT_EQ(cfg.node_spacing, 0.0);
    EXPECT_TRUE(cfg.ray_dump);
    EXPECT_EQ(cfg.threads, 2u);
    EXPECT_EQ(*cfg.prediction.noise_seed, 9u);
    EXPECT_EQ(cfg.integrity.k_max, 2);
    EXPECT_EQ(cfg.integrity.p_fa, 0.02);
    EXPECT_EQ(cfg.prediction.lte.discriminator.total_subcarriers, 1024);
    EXPECT_EQ(cfg.prediction.lte.sigma.lte_m, 4.0);
    EXPECT_EQ(cfg.prediction.gps.sigma.gps_scale_m, 3.0);
    EXPECT_EQ(cfg.prediction.lte.loss_threshold_db, 120.0);
    EXPECT_EQ(cfg.candidates, CandidateMode::KShortest);
    EXPECT_EQ(cfg.k_paths, 3u);
}

TEST(Config, UnknownFieldIsNamed) {
    try {
        config_from_json(nlohmann::json::parse(R"({"integrity": {"hal": 40, "hla": 3}})"));
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("integrity.hla"), std::string::npos) << e.what();
    }
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"sceen": "x"})")), Error);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"candidates": {"mode": "best"}})")), ValidationError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"speed": "fast"})")), Error);
}

TEST(Config, ValidationRejectsBadValues) {
    auto cfg = benchmark_config();
    cfg.integrity.p_hmi = 1.5;
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg = benchmark_config();
    cfg.speed = 0.0;
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg = benchmark_config();
    cfg.start_node = "nowhere";
    EXPECT_THROW(cfg.validate_against(benchmark_scene()), ValidationError);
}

TEST(Plan, BenchmarkChoosesTheNorthernBypass) {
    const auto& out = benchmark_outcome();
    ASSERT_EQ(out.plan.evaluations.size(), 4u);
    ASSERT_TRUE(out.plan.chosen);
    EXPECT_EQ(out.plan.evaluations[*out.plan.chosen].name, "path3");
    const auto shortest = std::min_element(out.plan.evaluations.begin(), out.plan.evaluations.end(),
                                           [](const auto& a, const auto& b) { return a.total_distance < b.total_distance; });
    EXPECT_EQ(shortest->name, "path4");
    EXPECT_GT(shortest->fault_ratio, 0.15);
    EXPECT_FALSE(shortest->feasible);
}

TEST(Plan, ReportMatchesIntegrityTable) {
    const auto cfg = benchmark_config();
    const auto& out = benchmark_outcome();
    std::ostringstream integ;
    write_integrity(integ, out.routes);
    const auto rows = read_tsv(integ.str());
    ASSERT_EQ(rows[0], (std::vector<std::string>{"route", "node_id", "epoch", "n_gps", "n_lte", "fault", "hpl_m", "dist_m"}));
    struct Acc {
        double cost = 0, dist = 0, hpl_sum = 0, hpl_max = 0;
        std::size_t n = 0, faulty = 0;
    };
    std::map<std::string, Acc> acc;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        auto& a = acc[rows[i][0]];
        const double hpl = std::stod(rows[i][6]);
        const double dist = std::stod(rows[i][7]);
        if (dist > 0) a.cost += dist * hpl;
        a.dist += dist;
        a.hpl_sum += hpl;
        a.hpl_max = std::max(a.hpl_max, hpl);
        a.faulty += rows[i][5] == "1";
        ++a.n;
    }
    const auto report = plan_report(cfg, out);
    ASSERT_EQ(report["candidates"].size(), acc.size());
    for (const auto& c : report["candidates"]) {
        const auto& a = acc.at(c["name"].get<std::string>());
        const double ratio = static_cast<double>(a.faulty) / static_cast<double>(a.n);
        EXPECT_EQ(c["travel_distance_m"].get<double>(), round6(a.dist));
        EXPECT_EQ(c["avg_hpl_m"].get<double>(), round6(a.hpl_sum / static_cast<double>(a.n)));
        EXPECT_EQ(c["max_hpl_m"].get<double>(), round6(a.hpl_max));
        EXPECT_EQ(c["fault_ratio"].get<double>(), round6(ratio));
        EXPECT_EQ(c["cost_m2"].get<double>(), round6(a.cost));
        EXPECT_EQ(c["n_nodes"].get<std::size_t>(), a.n);
        EXPECT_EQ(c["feasible"].get<bool>(), ratio <= 0.15 && a.hpl_max <= 40.0);
    }
}

TEST(Plan, ParallelEvaluationIsBitIdentical) {
    auto serial_cfg = benchmark_config(1);
    serial_cfg.ray_dump = true;
    auto parallel_cfg = benchmark_config(8);
    parallel_cfg.ray_dump = true;
    const auto a = render_artifacts(serial_cfg, run_plan(serial_cfg, benchmark_scene()), benchmark_scene());
    const auto b = render_artifacts(parallel_cfg, run_plan(parallel_cfg, benchmark_scene()), benchmark_scene());
    ASSERT_EQ(a.size(), 4u);
    EXPECT_EQ(a, b);
}

TEST(Plan, StartEqualsTarget) {
    auto cfg = benchmark_config();
    cfg.start_node = cfg.target_node = "N2";
    cfg.candidates = CandidateMode::Auto;
    const auto out = run_plan(cfg, benchmark_scene());
    ASSERT_EQ(out.plan.evaluations.size(), 1u);
    const auto& e = out.plan.evaluations[0];
    EXPECT_EQ(e.n_nodes, 1u);
    EXPECT_EQ(e.cost, 0.0);
    EXPECT_EQ(e.total_distance, 0.0);
    EXPECT_EQ(e.feasible, !out.routes[0].results[0].fault && out.routes[0].results[0].hpl <= cfg.integrity.hal);
}

TEST(Plan, KShortestModeIncludesNamedRoutes) {
    auto cfg = benchmark_config();
    cfg.candidates = CandidateMode::KShortest;
    cfg.k_paths = 2;
    const auto c = select_candidates(cfg, benchmark_scene());
    EXPECT_EQ(c.size(), 4u);
    EXPECT_EQ(c[0].name, "path4");
}

TEST(NodeReport, CanyonNodeListsNlosBias) {
    const auto cfg = benchmark_config();
    const auto canyon = run_node_report(cfg, benchmark_scene(), "C2");
    double max_bias = 0.0;
    for (const auto& m : canyon.gps) max_bias = std::max(max_bias, m.nlos_bias);
    EXPECT_GT(max_bias, 0.0);
    std::ostringstream text;
    print_node_report(text, canyon, cfg.integrity);
    EXPECT_NE(text.str().find("NLOS"), std::string::npos);
    EXPECT_THROW(run_node_report(cfg, benchmark_scene(), "nope"), ValidationError);
}

TEST(NodeReport, OpenSkyNodeHasNoSeparation) {
    auto scene = benchmark_scene();
    scene.buildings.clear();
    const auto r = run_node_report(benchmark_config(), scene, "S");
    EXPECT_FALSE(r.fault);
    for (const auto& m : r.per_mode) EXPECT_EQ(m.delta_r[0] + m.delta_r[1], 0.0);
}

TEST(NodeReport, TooFewTransmittersIsConservative) {
    auto scene = benchmark_scene();
    scene.gps_satellites.resize(2);
    scene.lte_base_stations.resize(1);
    const auto r = run_node_report(benchmark_config(), scene, "S");
    EXPECT_TRUE(std::isinf(r.hpl));
    std::ostringstream text;
    print_node_report(text, r, IntegrityParams{});
    EXPECT_NE(text.str().find("HPL inf"), std::string::npos);
}
