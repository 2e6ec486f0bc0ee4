#include "trafficsim/cli.h"
#include "trafficsim/error.h"
#include "trafficsim/log.h"
#include "trafficsim/serve.h"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <unistd.h>

namespace trafficsim {

    using nlohmann::json;
    namespace fs = std::filesystem;

    json toJson(const RunReport &r) {
        return {{"steps", r.steps},
                {"wallSeconds", r.wallSeconds},
                {"stepsPerSecond", r.stepsPerSecond},
                {"finishedVehicles", r.finishedVehicles},
                {"averageTravelTime", r.averageTravelTime},
                {"threads", r.threads},
                {"peakVehicles", r.peakVehicles},
                {"replayDigest", r.replayDigest}};
    }

    RunReport runEngine(Engine &engine, std::uint64_t steps, const StepHook &hook) {
        RunReport report;
        report.threads = engine.config().threads;
        auto start = std::chrono::steady_clock::now();
        for (std::uint64_t i = 0; i < steps; ++i) {
            if (hook)
                hook(engine, i);
            engine.nextStep();
            report.peakVehicles = std::max<std::uint64_t>(report.peakVehicles, engine.getVehicleCount());
        }
        report.wallSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.steps = steps;
        report.stepsPerSecond = report.wallSeconds > 0 ? static_cast<double>(steps) / report.wallSeconds : 0.0;
        report.finishedVehicles = engine.stats().finished;
        report.averageTravelTime = engine.getAverageTravelTime();
        report.replayDigest = engine.replayDigest().hex();
        return report;
    }

    BenchResult benchScenario(const std::string &configPath, std::uint64_t steps, const std::vector<int> &threads,
                              const std::string &replayDir) {
        EngineConfig base = loadConfig(configPath);
        RoadNet net = loadRoadNet(base.resolve(base.roadnetFile), base.segmentLength);
        auto flows = loadFlow(base.resolve(base.flowFile), net);
        fs::create_directories(replayDir);
        BenchResult result;
        std::uint64_t reference = 0;
        for (std::size_t i = 0; i < threads.size(); ++i) {
            EngineConfig cfg = base;
            cfg.threads = threads[i];
            cfg.saveReplay = true;
            cfg.dir = fs::absolute(replayDir).string();
            cfg.replayLogFile = "replay_threads" + std::to_string(threads[i]) + ".txt";
            cfg.roadnetLogFile = "roadnet_log.json";
            std::string replayPath = cfg.resolve(cfg.replayLogFile);
            RunReport report;
            {
                Engine engine(cfg, net, flows);
                report = runEngine(engine, steps);
            }
            std::uint64_t digest = fileDigest(replayPath);
            if (i == 0)
                reference = digest;
            else if (digest != reference)
                result.identical = false;
            result.reports.push_back(report);
        }
        return result;
    }

    namespace {
        std::vector<int> parseThreadList(const std::string &text) {
            std::vector<int> out;
            std::stringstream in(text);
            std::string item;
            while (std::getline(in, item, ',')) {
                try {
                    std::size_t used = 0;
                    int n = std::stoi(item, &used);
                    if (used != item.size() || n < 1)
                        throw std::invalid_argument(item);
                    out.push_back(n);
                } catch (const std::exception &) {
                    throw ConfigError("bad thread count '" + item + "'");
                }
            }
            if (out.empty())
                throw ConfigError("empty thread list");
            return out;
        }

        void writeReport(const json &doc, const std::string &path) {
            std::cout << doc.dump(2) << std::endl;
            if (path.empty())
                return;
            std::ofstream out(path);
            if (!out)
                throw ConfigError("cannot write report " + path);
            out << doc.dump(2) << '\n';
        }

        std::atomic<bool> interrupted{false};
    }

    int runCli(int argc, char **argv) {
        CLI::App app{"trafficsim: microscopic traffic simulator"};
        app.require_subcommand(1);
        std::string logLevel = "warn";
        app.add_option("--log-level", logLevel, "debug, info, warn, error or off");

        std::string configPath, reportPath, threadList = "1,2,4", outDir, replayDir, phasePlan = "standard",
                                             scenarioName;
        std::uint64_t steps = 3600;
        int rows = 1, cols = 1, lanes = 3, port = 8080;
        double volume = 300.0, roadLength = 300.0, maxSpeed = 11.11, rate = 10.0, endTime = -1.0;
        bool fast = false, laneChange = false;

        auto *run = app.add_subcommand("run", "run a scenario and print a report");
        run->add_option("config", configPath, "config file")->required();
        run->add_option("--steps", steps, "number of steps");
        run->add_option("--report", reportPath, "also write the report here");

        auto *bench = app.add_subcommand("bench", "measure throughput and check replay determinism across thread counts");
        bench->add_option("config", configPath, "config file")->required();
        bench->add_option("--steps", steps, "number of steps");
        bench->add_option("--threads", threadList, "comma separated thread counts");
        bench->add_option("--replay-dir", replayDir, "where per-run replays go (default: temp dir)");
        bench->add_option("--report", reportPath, "also write the report here");

        auto *gen = app.add_subcommand("gen-grid", "write a grid scenario (roadnet, flow, config)");
        gen->add_option("rows", rows)->required()->check(CLI::PositiveNumber);
        gen->add_option("cols", cols)->required()->check(CLI::PositiveNumber);
        gen->add_option("--out", outDir, "output directory")->required();
        gen->add_option("--volume", volume, "vehicles per hour per entry road");
        gen->add_option("--phase-plan", phasePlan, "standard, two-phase or all-green");
        gen->add_option("--road-length", roadLength, "metres between intersection edges");
        gen->add_option("--lanes", lanes, "lanes per road")->check(CLI::PositiveNumber);
        gen->add_option("--max-speed", maxSpeed, "lane speed limit in m/s");
        gen->add_option("--end-time", endTime, "last spawn time (default: unbounded)");
        gen->add_flag("--lane-change", laneChange, "enable lane changing");
        gen->add_option("--scenario", scenarioName, "named preset: table1");

        auto *serve = app.add_subcommand("serve", "serve a live engine to the web viewer");
        serve->add_option("config", configPath, "config file")->required();
        serve->add_option("--port", port, "listen port");
        serve->add_option("--rate", rate, "steps per second");
        serve->add_flag("--max-speed", fast, "step as fast as possible");

        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError &e) {
            return app.exit(e) == 0 ? 0 : 1;
        }

        try {
            if (logLevel == "debug")
                log::setLevel(log::Level::Debug);
            else if (logLevel == "info")
                log::setLevel(log::Level::Info);
            else if (logLevel == "error")
                log::setLevel(log::Level::Error);
            else if (logLevel == "off")
                log::setLevel(log::Level::Off);

            if (*run) {
                Engine engine(configPath);
                writeReport(toJson(runEngine(engine, steps)), reportPath);
                return 0;
            }
            if (*bench) {
                if (replayDir.empty())
                    replayDir = (fs::temp_directory_path() / ("trafficsim-bench-" + std::to_string(::getpid()))).string();
                auto result = benchScenario(configPath, steps, parseThreadList(threadList), replayDir);
                json reports = json::array();
                for (const auto &r : result.reports)
                    reports.push_back(toJson(r));
                json doc = {{"reports", reports}, {"identicalReplays", result.identical}};
                if (result.reports.size() > 1 && result.reports.front().stepsPerSecond > 0)
                    doc["speedup"] = result.reports.back().stepsPerSecond / result.reports.front().stepsPerSecond;
                writeReport(doc, reportPath);
                if (!result.identical) {
                    std::cerr << "error: replays differ across thread counts\n";
                    return 2;
                }
                return 0;
            }
            if (*gen) {
                GridScenario s;
                if (scenarioName == "table1") {
                    s = table1Scenario(volume);
                } else if (!scenarioName.empty()) {
                    throw ConfigError("unknown scenario '" + scenarioName + "'");
                } else {
                    s.rows = rows;
                    s.cols = cols;
                    s.volume = volume;
                    s.grid.phasePlan = phasePlanFromString(phasePlan);
                    s.grid.roadLength = roadLength;
                    s.grid.lanesPerRoad = lanes;
                    s.grid.maxSpeed = maxSpeed;
                }
                s.endTime = endTime;
                s.laneChange = laneChange;
                std::cout << writeGridScenario(s, outDir) << std::endl;
                return 0;
            }
            if (*serve) {
                Engine engine(configPath);
                ServeOptions options;
                options.port = static_cast<unsigned short>(port);
                options.rate = rate;
                options.maxSpeed = fast;
                ServeServer server(engine, options);
                std::signal(SIGINT, [](int) { interrupted = true; });
                std::signal(SIGTERM, [](int) { interrupted = true; });
                server.start();
                std::cout << "listening on port " << server.port() << std::endl;
                while (!interrupted)
                    std::this_thread::sleep_for(std::chrono::milliseconds(100));
                server.stop();
                return 0;
            }
        } catch (const InvariantError &e) {
            std::cerr << "internal error: " << e.what() << '\n';
            return 2;
        } catch (const Error &e) {
            std::cerr << "error: " << e.what() << '\n';
            return 1;
        } catch (const std::exception &e) {
            std::cerr << "internal error: " << e.what() << '\n';
            return 2;
        }
        return 1;
    }

}
