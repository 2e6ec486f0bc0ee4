#include "trafficsim/cli.h"
#include "trafficsim/error.h"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

namespace trafficsim {

    namespace fs = std::filesystem;

    GridScenario table1Scenario(double volume) {
        GridScenario s;
        s.grid.roadLength = 300.0;
        s.grid.phasePlan = PhasePlan::TwoPhase;
        s.volume = volume;
        s.autoSignals = true;
        return s;
    }

    namespace {
        constexpr int kDx[4] = {1, 0, -1, 0};
        constexpr int kDy[4] = {0, 1, 0, -1};

        std::string roadName(int x, int y, int d) {
            return "road_" + std::to_string(x) + "_" + std::to_string(y) + "_" + std::to_string(d);
        }

        // Route entering at boundary node (x, y) heading d, taking `turn` (0 straight, 1 left,
        // 3 right) at the first intersection.
        std::vector<int> buildRoute(const RoadNet &net, int x, int y, int d, int turn) {
            std::vector<int> route;
            int road = net.findRoad(roadName(x, y, d));
            if (road < 0)
                return {};
            route.push_back(road);
            x += kDx[d];
            y += kDy[d];
            int dir = (d + turn) % 4;
            while (true) {
                road = net.findRoad(roadName(x, y, dir));
                if (road < 0)
                    return {};
                route.push_back(road);
                if (net.intersections[net.roads[road].endIntersection].isVirtual)
                    return route;
                x += kDx[dir];
                y += kDy[dir];
            }
        }

        void writeFile(const fs::path &path, const std::string &text) {
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out)
                throw ConfigError("cannot write " + path.string());
            out << text;
            if (!out)
                throw ConfigError("cannot write " + path.string());
        }
    }

    std::vector<FlowSpec> gridFlows(const RoadNet &net, const GridScenario &s) {
        struct Entry {
            int x, y, d;
        };
        std::vector<Entry> entries;
        for (int y = 1; y <= s.rows; ++y) {
            entries.push_back({0, y, 0});
            entries.push_back({s.cols + 1, y, 2});
        }
        for (int x = 1; x <= s.cols; ++x) {
            entries.push_back({x, 0, 1});
            entries.push_back({x, s.rows + 1, 3});
        }
        std::vector<FlowSpec> flows;
        const std::pair<int, double> turns[] = {{0, s.straightShare}, {1, s.leftShare}, {3, s.rightShare}};
        for (const auto &e : entries)
            for (auto [turn, share] : turns) {
                if (!(share > 0) || !(s.volume > 0))
                    continue;
                auto route = buildRoute(net, e.x, e.y, e.d, turn);
                if (route.empty())
                    continue;
                FlowSpec f;
                f.vehicle = s.vehicle;
                f.route = std::move(route);
                f.interval = 3600.0 / (s.volume * share);
                f.startTime = 0.0;
                f.endTime = s.endTime;
                flows.push_back(std::move(f));
            }
        return flows;
    }

    std::string writeGridScenario(const GridScenario &s, const std::string &dir) {
        RoadNet net = buildGrid(s.rows, s.cols, s.grid);
        auto flows = gridFlows(net, s);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec || !fs::is_directory(dir))
            throw ConfigError("cannot create directory " + dir);
        EngineConfig cfg;
        cfg.interval = s.interval;
        cfg.roadnetFile = "roadnet.json";
        cfg.flowFile = "flow.json";
        cfg.rlTrafficLight = !s.autoSignals;
        cfg.saveReplay = true;
        cfg.roadnetLogFile = "roadnet_log.json";
        cfg.replayLogFile = "replay.txt";
        cfg.laneChange = s.laneChange;
        cfg.threads = s.threads;
        fs::path base(dir);
        writeFile(base / "roadnet.json", serializeRoadNet(net));
        writeFile(base / "flow.json", serializeFlows(flows, net));
        writeFile(base / "config.json", serializeConfig(cfg));
        return (base / "config.json").string();
    }

}
