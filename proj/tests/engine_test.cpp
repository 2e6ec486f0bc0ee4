#include "trafficsim/cli.h"
#include "trafficsim/error.h"
#include "trafficsim/intersection.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace trafficsim;
namespace fs = std::filesystem;

namespace {

    const std::vector<std::string> kEastbound{"road_0_1_0", "road_1_1_0"};

    std::unique_ptr<Engine> emptyEngine(EngineConfig cfg = {}) {
        cfg.checkInvariants = true;
        return std::make_unique<Engine>(cfg, buildGrid(1, 1), std::vector<FlowSpec>{});
    }

    fs::path scratchDir(const std::string &name) {
        fs::path dir = fs::temp_directory_path() / ("trafficsim_engine_test_" + name);
        fs::remove_all(dir);
        fs::create_directories(dir);
        return dir;
    }


}

TEST(Engine, FreshEngine) {
    auto eng = emptyEngine();
    EXPECT_EQ(eng->getCurrentTime(), 0.0);
    EXPECT_EQ(eng->getVehicleCount(), 0);
    for (const auto &[lane, count] : eng->getLaneVehicleCount())
        EXPECT_EQ(count, 0) << lane;
    EXPECT_EQ(eng->getAverageTravelTime(), 0.0);
    EXPECT_EQ(eng->getTlPhase("intersection_1_1"), 0);
}

TEST(Engine, EmptyNetworkOnlyAdvancesTime) {
    EngineConfig cfg;
    cfg.interval = 0.5;
    auto eng = emptyEngine(cfg);
    for (int i = 0; i < 4; ++i)
        eng->nextStep();
    EXPECT_DOUBLE_EQ(eng->getCurrentTime(), 2.0);
    EXPECT_EQ(eng->getStepCount(), 4u);
    EXPECT_EQ(eng->getVehicleCount(), 0);
}

TEST(Engine, SingleVehicleFirstStep) {
    auto eng = emptyEngine();
    VehicleParams p;
    p.maxPosAcc = 2;
    std::string id = eng->placeVehicle(p, kEastbound, 1, 10, 0);
    eng->nextStep();
    auto v = eng->vehicle(id);
    ASSERT_TRUE(v);
    EXPECT_DOUBLE_EQ(v->speed, 2.0);
    EXPECT_DOUBLE_EQ(v->pos, 11.0);
}

TEST(Engine, PlatoonSettlesBehindStoppedLeader) {
    auto eng = emptyEngine();
    const RoadNet &net = eng->roadnet();
    VehicleParams p;
    int lane = net.roads[net.findRoad("road_0_1_0")].lanes[1];
    double laneLength = net.lanes[lane].length;
    double laneMax = net.lanes[lane].maxSpeed;
    int link = net.laneLinkFor(lane, net.findRoad("road_1_1_0"));
    ASSERT_EQ(eng->laneLinkColor(link), SignalColor::Red);

    std::string leader = eng->placeVehicle(p, kEastbound, 1, laneLength, 0);
    std::string follower = eng->placeVehicle(p, kEastbound, 1, 100, 10);
    double v = 10, pos = 100;
    for (int step = 0; step < 120; ++step) {
        // oracle: the follower's constraints composed from the kinematics and signal operations
        double gap = laneLength - p.length - pos;
        std::vector<double> bounds{noCollisionSpeed(v, 0, p.maxNegAcc, p.maxNegAcc, gap - p.minGap, 1),
                                   headwaySpeed(gap, p.headwayTime, p.minGap)};
        if (auto s = signalConstraint(SignalColor::Red, laneLength - pos, v, p, 1))
            bounds.push_back(*s);
        double next = clampSpeed(bounds, v, p, laneMax, 1);
        pos = ballisticAdvance(pos, v, next, 1).newPos;
        v = next;

        eng->nextStep();
        auto lv = eng->vehicle(leader);
        auto fv = eng->vehicle(follower);
        ASSERT_TRUE(lv && fv);
        EXPECT_EQ(lv->speed, 0.0);
        EXPECT_NEAR(fv->speed, v, 1e-9) << step;
        EXPECT_NEAR(fv->pos, pos, 1e-9) << step;
        EXPECT_GE(lv->pos - lv->length - fv->pos, -1e-6) << step;
    }
    // the composed rules settle short of minGap: the stopping term counts continuous braking
    auto fv = eng->vehicle(follower);
    EXPECT_EQ(fv->speed, 0.0);
    EXPECT_NEAR(laneLength - p.length - fv->pos, 1.981, 1e-3);
    EXPECT_GT(laneLength - p.length - fv->pos, 0.0);
}

TEST(Engine, WaitingThreshold) {
    auto eng = emptyEngine();
    eng->placeVehicle(VehicleParams{}, kEastbound, 1, 50, 0.05);
    eng->placeVehicle(VehicleParams{}, kEastbound, 2, 50, 0.2);
    auto waiting = eng->getLaneWaitingVehicleCount();
    EXPECT_EQ(waiting["road_0_1_0_1"], 1);
    EXPECT_EQ(waiting["road_0_1_0_2"], 0);
}

TEST(Engine, PushedVehiclesAppearAtLaneStart) {
    auto eng = emptyEngine();
    std::string id = eng->pushVehicle(VehicleParams{}, kEastbound, 1);
    EXPECT_FALSE(eng->vehicle(id));
    eng->nextStep();
    auto v = eng->vehicle(id);
    ASSERT_TRUE(v);
    EXPECT_EQ(v->drivable, "road_0_1_0_1");
    EXPECT_EQ(v->pos, 0.0);
}

TEST(Engine, ThreeVehiclesOnOneLane) {
    auto eng = emptyEngine();
    for (double pos : {20.0, 60.0, 100.0})
        eng->placeVehicle(VehicleParams{}, kEastbound, 2, pos, 5);
    EXPECT_EQ(eng->getLaneVehicleCount()["road_0_1_0_2"], 3);
    auto ids = eng->getLaneVehicles()["road_0_1_0_2"];
    ASSERT_EQ(ids.size(), 3u);
    EXPECT_DOUBLE_EQ(eng->vehicle(ids[0])->pos, 100.0); // front first
}

TEST(Engine, JammedEntryKeepsQueue) {
    auto eng = emptyEngine();
    VehicleParams p;
    // a stopped vehicle at the entry leaves no room for insertion
    eng->placeVehicle(p, kEastbound, 1, 3, 0);
    std::string id = eng->pushVehicle(p, kEastbound, 1);
    eng->nextStep();
    EXPECT_FALSE(eng->vehicle(id));
    EXPECT_EQ(eng->queuedVehicles(), 1u);
    const auto &s = eng->stats();
    EXPECT_EQ(s.spawned, static_cast<std::uint64_t>(eng->getVehicleCount()) + s.finished + eng->queuedVehicles());
}

TEST(Engine, PushErrors) {
    auto eng = emptyEngine();
    EXPECT_THROW(eng->pushVehicle(VehicleParams{}, {"road_0_1_0", "road_2_1_2"}, 0), SemanticError);
    EXPECT_THROW(eng->pushVehicle(VehicleParams{}, {"nowhere"}, 0), SemanticError);
    EXPECT_THROW(eng->pushVehicle(VehicleParams{}, kEastbound, 3), ParameterError);
    EXPECT_EQ(eng->queuedVehicles(), 0u);
}

TEST(Engine, SetTlPhase) {
    auto eng = emptyEngine();
    EXPECT_THROW(eng->setTlPhase("intersection_9_9", 0), ParameterError);
    EXPECT_THROW(eng->setTlPhase("intersection_1_1", 99), ParameterError);
    std::string before = eng->signalColors();
    eng->setTlPhase("intersection_1_1", 0);
    EXPECT_EQ(eng->signalColors(), before);
    eng->setTlPhase("intersection_1_1", 2);
    eng->nextStep();
    EXPECT_NE(eng->signalColors().find('y'), std::string::npos);
    for (int i = 0; i < 5; ++i)
        eng->nextStep();
    EXPECT_EQ(eng->getTlPhase("intersection_1_1"), 2);
    EXPECT_EQ(eng->signalColors().find('y'), std::string::npos);
}

TEST(Engine, TimingControlsNeedAutoSignals) {
    auto eng = emptyEngine();
    EXPECT_THROW(eng->setCycleLength("", 60), ContractError);
}

TEST(Engine, FinishedDurationCountsInAverage) {
    EngineConfig cfg;
    cfg.rlTrafficLight = false;
    cfg.recordTrips = true;
    auto eng = emptyEngine(cfg);
    eng->placeVehicle(VehicleParams{}, {"road_0_1_0"}, 1, 250, 10);
    for (int i = 0; i < 20; ++i)
        eng->nextStep();
    ASSERT_EQ(eng->trips().size(), 1u);
    const Trip &t = eng->trips()[0];
    EXPECT_DOUBLE_EQ(eng->getAverageTravelTime(), t.exitTime - t.enterTime);
}

TEST(Engine, ResetReproducesTheRun) {
    GridScenario s;
    s.volume = 500;
    RoadNet net = buildGrid(1, 1, s.grid);
    EngineConfig cfg;
    cfg.rlTrafficLight = false;
    Engine eng(cfg, net, gridFlows(net, s));
    auto run = [&] {
        for (int i = 0; i < 100; ++i) {
            if (i == 30)
                eng.pushVehicle(VehicleParams{}, kEastbound, 1);
            eng.nextStep();
        }
        return eng.replayDigest().value();
    };
    std::uint64_t first = run();
    eng.reset();
    EXPECT_EQ(eng.getCurrentTime(), 0.0);
    EXPECT_EQ(eng.getVehicleCount(), 0);
    eng.reset();
    EXPECT_EQ(run(), first);
}

TEST(Engine, ShadowsStayHidden) {
    GridScenario s;
    s.volume = 500;
    s.laneChange = true;
    RoadNet net = buildGrid(1, 1, s.grid);
    EngineConfig cfg;
    cfg.rlTrafficLight = false;
    cfg.laneChange = true;
    cfg.checkInvariants = true;
    Engine eng(cfg, net, gridFlows(net, s));
    bool sawChange = false;
    for (int i = 0; i < 900; ++i) {
        eng.nextStep();
        auto views = eng.vehicles();
        std::set<std::string> ids;
        for (const auto &v : views) {
            EXPECT_TRUE(ids.insert(v.id).second) << v.id;
            sawChange = sawChange || v.changingLane;
        }
        EXPECT_EQ(static_cast<int>(views.size()), eng.getVehicleCount());
        EXPECT_EQ(eng.getVehicleSpeed().size(), views.size());
        std::size_t onLanes = 0;
        for (const auto &[lane, list] : eng.getLaneVehicles())
            for (const auto &id : list) {
                EXPECT_TRUE(ids.count(id)) << id;
                ++onLanes;
            }
        EXPECT_LE(onLanes, views.size());
    }
    EXPECT_TRUE(sawChange);
}

TEST(EngineConfig, Errors) {
    EXPECT_THROW(parseConfig(R"({"interval": 1, "roadnetFile": "r.json", "flowFile": "f.json", "threads": 0})"),
                 ConfigError);
    EXPECT_THROW(parseConfig(R"({"interval": 0, "roadnetFile": "r.json", "flowFile": "f.json"})"), ConfigError);
    EXPECT_THROW(parseConfig("{"), ConfigError);
    EXPECT_THROW(parseConfig(R"({"interval": "one", "roadnetFile": "r.json", "flowFile": "f.json"})"), ConfigError);
}

TEST(EngineConfig, RoundTrip) {
    auto cfg = parseConfig(R"({"interval": 0.5, "seed": 3, "roadnetFile": "r.json", "flowFile": "f.json",
                               "laneChange": true, "threads": 2})");
    auto again = parseConfig(serializeConfig(cfg));
    EXPECT_DOUBLE_EQ(again.interval, 0.5);
    EXPECT_EQ(again.seed, 3u);
    EXPECT_TRUE(again.laneChange);
    EXPECT_EQ(again.threads, 2);
    EXPECT_EQ(again.flowFile, "f.json");
}

TEST(EngineConfig, MissingFlowFileNamed) {
    fs::path dir = scratchDir("missing_flow");
    GridScenario s;
    std::string config = writeGridScenario(s, dir.string());
    fs::remove(dir / "flow.json");
    try {
        Engine eng(config);
        FAIL();
    } catch (const Error &e) {
        EXPECT_NE(std::string(e.what()).find("flow.json"), std::string::npos) << e.what();
    }
}

TEST(EngineConfig, LoadsGeneratedScenario) {
    fs::path dir = scratchDir("generated");
    GridScenario s;
    Engine eng(writeGridScenario(s, dir.string()));
    EXPECT_EQ(eng.getCurrentTime(), 0.0);
    EXPECT_EQ(eng.roadnet().intersections.size(), 5u);
}

TEST(Engine, SignalTimingControls) {
    EngineConfig cfg;
    cfg.rlTrafficLight = false;
    auto eng = emptyEngine(cfg);
    eng->setCycleLength("intersection_1_1", 60);
    auto d = eng->getPhaseDurations("intersection_1_1");
    ASSERT_EQ(d.size(), 4u);
    for (double x : d)
        EXPECT_DOUBLE_EQ(x, 15);
    eng->setGreenRatio("intersection_1_1", {3, 1, 1, 1});
    d = eng->getPhaseDurations("intersection_1_1");
    EXPECT_DOUBLE_EQ(d[0], 30);
    EXPECT_DOUBLE_EQ(d[1], 10);
    EXPECT_THROW(eng->setGreenRatio("", {1, 1}), ParameterError);
    EXPECT_DOUBLE_EQ(eng->getPhaseDurations("intersection_1_1")[0], 30);
    EXPECT_THROW(eng->setCycleLength("intersection_1_1", 0), ParameterError);
}
