#pragma once

#include "trafficsim/engine.h"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace trafficsim {

    struct RunReport {
        std::uint64_t steps = 0;
        double wallSeconds = 0.0;
        double stepsPerSecond = 0.0;
        std::uint64_t finishedVehicles = 0;
        double averageTravelTime = 0.0;
        int threads = 1;
        std::uint64_t peakVehicles = 0;
        std::string replayDigest;
    };

    nlohmann::json toJson(const RunReport &report);

    // Called before every step with the number of steps already run.
    using StepHook = std::function<void(Engine &, std::uint64_t)>;

    RunReport runEngine(Engine &engine, std::uint64_t steps, const StepHook &hook = {});

    struct BenchResult {
        std::vector<RunReport> reports;
        bool identical = true;
    };

    // Runs the same scenario once per thread count, each writing its replay under `replayDir`.
    BenchResult benchScenario(const std::string &configPath, std::uint64_t steps, const std::vector<int> &threads,
                              const std::string &replayDir);

    struct GridScenario {
        int rows = 1;
        int cols = 1;
        GridParams grid;
        double volume = 300.0;       // vehicles per hour per entry road
        double straightShare = 0.6;
        double leftShare = 0.2;
        double rightShare = 0.2;
        double endTime = -1.0;
        VehicleParams vehicle;
        bool autoSignals = true;     // written as rlTrafficLight = !autoSignals
        bool laneChange = false;
        double interval = 1.0;
        int threads = 1;
    };

    // Canonical stand-in for the volume sweep: one signalised intersection, 300 m approaches,
    // two-phase fixed-time plan.
    GridScenario table1Scenario(double volume);

    // Flows entering at every boundary road: straight through, or turning left / right at the
    // first intersection and then straight on to the boundary.
    std::vector<FlowSpec> gridFlows(const RoadNet &net, const GridScenario &scenario);

    // Writes roadnet.json, flow.json and config.json into `dir`; returns the config path.
    std::string writeGridScenario(const GridScenario &scenario, const std::string &dir);

    // Command-line entry point; returns the process exit code.
    int runCli(int argc, char **argv);

}
