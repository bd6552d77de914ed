#include "oracles.hpp"

#include "intpath/raytrace.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace intpath;

namespace {

SceneModel box_scene(double x0, double y0, double x1, double y1, double h) {
    SceneModel s;
    s.materials["concrete"] = 6.0;
    Building b;
    b.id = "box";
    b.footprint = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    b.height = h;
    s.buildings.push_back(b);
    return s;
}

// Face x = 5 of a thick block behind it, tall enough to act as an infinite wall.
SceneModel wall_at_x5() { return box_scene(5.0, -1000.0, 50.0, 1000.0, 1e4); }

PropagationPath straight(double length) { return make_path({Vec3(0, 0, 0), Vec3(length, 0, 0)}, {}); }

}  // namespace

TEST(LosBlocked, EmptyScene) {
    EXPECT_FALSE(los_blocked(Vec3(0, 0, 1), Vec3(100, 50, 30), SceneModel{}));
}

TEST(LosBlocked, BoxAtMidpoint) {
    const auto s = box_scene(45, -5, 55, 5, 20);
    EXPECT_TRUE(los_blocked(Vec3(0, 0, 1.5), Vec3(100, 0, 1.5), s));
}

TEST(LosBlocked, GrazingAlongWallIsClear) {
    const auto s = box_scene(5, 0, 10, 10, 20);
    const Vec3 a(5, -10, 2), b(5, 20, 2);
    EXPECT_FALSE(los_blocked(a, b, s));
    EXPECT_FALSE(oracle::los_blocked(a, b, s));
    // Across the roof edge exactly.
    const Vec3 c(-10, 5, 20), d(30, 5, 20);
    EXPECT_FALSE(los_blocked(c, d, s));
    EXPECT_FALSE(oracle::los_blocked(c, d, s));
}

TEST(LosBlocked, MatchesRationalOracleAndIsSymmetric) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> xy(-200.0, 200.0), z(0.0, 80.0);
    for (int k = 0; k < 40; ++k) {
        const auto scene = oracle::random_convex_scene(rng);
        for (int i = 0; i < 50; ++i) {
            const Vec3 a(xy(rng), xy(rng), z(rng)), b(xy(rng), xy(rng), z(rng));
            const bool ab = los_blocked(a, b, scene);
            EXPECT_EQ(ab, los_blocked(b, a, scene));
            EXPECT_EQ(ab, oracle::los_blocked(a, b, scene));
        }
    }
}

TEST(ReflectionPaths, EmptySceneHasNone) {
    EXPECT_TRUE(reflection_paths(Vec3(0, 0, 0), Vec3(0, 0, 100), SceneModel{}, 2).empty());
}

TEST(ReflectionPaths, ImageOfWallAtX5) {
    const auto s = wall_at_x5();
    const auto paths = reflection_paths(Vec3(0, 0, 0), Vec3(0, 0, 100), s, 1);
    ASSERT_EQ(paths.size(), 1u);
    EXPECT_NEAR(paths[0].total_length, std::sqrt(100.0 + 10000.0), 1e-9);
    EXPECT_NEAR(paths[0].total_length, 100.4988, 1e-4);
    EXPECT_NEAR(paths[0].vertices[1].x(), 5.0, 1e-12);
    EXPECT_LT(specular_error(paths[0], s), 1e-9);
}

TEST(ReflectionPaths, ReceiverBehindWall) {
    const auto s = wall_at_x5();
    EXPECT_TRUE(reflection_paths(Vec3(60, 0, 1), Vec3(0, 0, 100), s, 1).empty());
}

TEST(ReflectionPaths, MatchesPerWallOracle) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> xy(-200.0, 200.0), far(-1.5e7, 1.5e7);
    int compared = 0;
    for (int k = 0; k < 50; ++k) {
        const auto scene = oracle::random_convex_scene(rng);
        for (int i = 0; i < 4; ++i) {
            Vec3 rx;
            do {
                rx = Vec3(xy(rng), xy(rng), 1.5);
            } while (oracle::inside_any_footprint(rx.head<2>(), scene));
            const Vec3 tx = (i % 2 == 0) ? Vec3(far(rng), far(rng), 2.0e7) : Vec3(xy(rng) * 2, xy(rng) * 2, 35.0);
            if (oracle::inside_any_footprint(tx.head<2>(), scene)) continue;
            const auto got = reflection_paths(rx, tx, scene, 1);
            const auto want = oracle::single_bounce_paths(rx, tx, scene);
            ASSERT_EQ(got.size(), want.size()) << "scene " << k << " pair " << i;
            for (std::size_t j = 0; j < got.size(); ++j) {
                ASSERT_EQ(got[j].walls.size(), 1u);
                EXPECT_EQ(got[j].walls[0].building, want[j].building);
                EXPECT_EQ(got[j].walls[0].edge, want[j].edge);
                EXPECT_NEAR(got[j].total_length, want[j].length, 1e-6);
                EXPECT_LT(specular_error(got[j], scene), 1e-9);
                EXPECT_GE(got[j].total_length, (tx - rx).norm());
            }
            compared += static_cast<int>(want.size());
        }
    }
    EXPECT_GT(compared, 20);
}

TEST(ReflectionPaths, FarTransmitterKeepsBouncesOnTheWall) {
    SceneModel scene;
    scene.materials["concrete"] = 6.0;
    // Rotated so bounce points are not exactly representable.
    const double c = std::cos(0.37), s = std::sin(0.37);
    const auto rot = [&](double x, double y) { return Vec2(c * x - s * y, s * x + c * y); };
    scene.buildings.push_back({"box", {rot(10, -10), rot(30, -10), rot(30, 10), rot(10, 10)}, 40.0, "concrete"});
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> x(-20.0, 9.0), y(-9.0, 9.0);
    int found = 0;
    for (int k = 0; k < 2000; ++k) {
        const Vec2 r = rot(x(rng), y(rng));
        const Vec3 rx(r.x(), r.y(), 1.5);
        Vec3 tx = oracle::sky_point(rng, 5.0, 40.0);
        const Vec2 back = rot(-std::abs(c * tx.x() + s * tx.y()), -s * tx.x() + c * tx.y());
        tx.x() = back.x();
        tx.y() = back.y();
        const auto got = reflection_paths(rx, tx, scene, 1);
        const auto want = oracle::single_bounce_paths(rx, tx, scene);
        ASSERT_EQ(got.size(), want.size()) << "case " << k;
        found += static_cast<int>(got.size());
    }
    EXPECT_GT(found, 400);
}

TEST(ReflectionPaths, DoubleBouncesObeySpecularLaw) {
    std::mt19937_64 rng(5);
    int seen = 0;
    for (int k = 0; k < 20; ++k) {
        double w = 0.0;
        const auto scene = oracle::random_canyon(rng, w);
        std::uniform_real_distribution<double> across(-0.8 * w, 0.8 * w), along(-150.0, 150.0), up(5.0, 45.0);
        const Vec3 rx(across(rng), along(rng), 1.5);
        const Vec3 tx(across(rng), along(rng), up(rng));
        for (const auto& p : reflection_paths(rx, tx, scene, 2)) {
            EXPECT_LT(specular_error(p, scene), 1e-9);
            EXPECT_GE(p.total_length, (tx - rx).norm());
            seen += p.bounces == 2;
        }
    }
    EXPECT_GT(seen, 10);
}

TEST(RayEngine, ZeroHeightBuildingsMatchEmptyScene) {
    std::mt19937_64 rng(99);
    auto scene = oracle::random_convex_scene(rng);
    for (auto& b : scene.buildings) b.height = 0.0;
    const Vec3 rx(-170, -170, 1.5), tx(170, 160, 40);
    EXPECT_FALSE(los_blocked(rx, tx, scene));
    EXPECT_TRUE(reflection_paths(rx, tx, scene, 2).empty());
    auto paths = trace_paths(rx, tx, scene, 2);
    ASSERT_EQ(paths.size(), 1u);
    paths[0].path_loss_db = path_loss(paths[0], 2.1e9, scene);
    EXPECT_EQ(build_cir(paths, 130.0).size(), 1u);
}

TEST(PathLoss, FreeSpaceAndBounce) {
    SceneModel s = box_scene(0, 0, 1, 1, 1);
    const auto los = straight(100.0);
    EXPECT_NEAR(path_loss(los, 2.1e9, s), 78.89, 0.01);
    auto bounced = los;
    bounced.walls.push_back({0, 0});
    EXPECT_NEAR(path_loss(bounced, 2.1e9, s), 84.89, 0.01);
    EXPECT_NEAR(path_loss(bounced, 2.1e9, s) - path_loss(los, 2.1e9, s), 6.0, 1e-12);
}

TEST(BuildCir, SingleLosPath) {
    auto p = straight(300.0);
    p.path_loss_db = 80.0;
    const auto cir = build_cir({p}, 130.0);
    ASSERT_EQ(cir.size(), 1u);
    EXPECT_DOUBLE_EQ(cir.components[0].alpha, 1.0);
    EXPECT_NEAR(cir.components[0].tau, 1.0007e-6, 1e-10);
}

TEST(BuildCir, LosPlusReflection) {
    SceneModel s = box_scene(0, 0, 1, 1, 1);
    auto los = straight(300.0);
    auto refl = straight(360.0);
    refl.walls.push_back({0, 0});
    los.path_loss_db = path_loss(los, 2.1e9, s);
    refl.path_loss_db = path_loss(refl, 2.1e9, s);
    const auto cir = build_cir({refl, los}, 130.0);
    ASSERT_EQ(cir.size(), 2u);
    EXPECT_DOUBLE_EQ(cir.components[0].alpha, 1.0);
    EXPECT_NEAR(cir.components[1].alpha, 0.417, 1e-3);
    EXPECT_NEAR(cir.components[1].alpha, (300.0 / 360.0) * std::pow(10.0, -6.0 / 20.0), 1e-12);
    EXPECT_NEAR(cir.components[1].tau - cir.components[0].tau, 60.0 / constants::kSpeedOfLight, 1e-18);
    EXPECT_NEAR(cir.components[1].tau - cir.components[0].tau, 2.0014e-7, 1e-11);
}

TEST(BuildCir, EverythingFilteredIsNoCoverage) {
    auto p = straight(300.0);
    p.path_loss_db = 140.0;
    EXPECT_THROW(build_cir({p}, 130.0), NoCoverage);
}

TEST(BuildCir, AmplitudesInUnitIntervalWhenFirstArrivalIsDirect) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> extra(0.1, 500.0), loss(0.0, 40.0);
    for (int k = 0; k < 200; ++k) {
        std::vector<PropagationPath> paths;
        auto los = straight(200.0);
        los.path_loss_db = 80.0;
        paths.push_back(los);
        for (int j = 0; j < 4; ++j) {
            auto p = straight(200.0 + extra(rng));
            p.path_loss_db = 80.0 + loss(rng) + 20.0 * std::log10(p.total_length / 200.0);
            paths.push_back(p);
        }
        const auto cir = build_cir(paths, 130.0);
        EXPECT_EQ(cir.components.front().alpha, 1.0);
        for (std::size_t i = 0; i < cir.size(); ++i) {
            EXPECT_GT(cir.components[i].alpha, 0.0);
            EXPECT_LE(cir.components[i].alpha, 1.0);
            if (i) {
                EXPECT_GE(cir.components[i].tau, cir.components[i - 1].tau);
            }
        }
    }
}
