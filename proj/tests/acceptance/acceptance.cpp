// Acceptance gate. Each criterion prints exactly one line "PASS <name>: ..." or "FAIL <name>: ...".
// Usage: acceptance <criterion>|all

#include "support.h"

#include "trafficsim/error.h"
#include "trafficsim/log.h"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

using namespace trafficsim;

namespace {

    struct Outcome {
        bool pass;
        std::string detail;
    };

    using Clock = std::chrono::steady_clock;

    double seconds(Clock::time_point since) {
        return std::chrono::duration<double>(Clock::now() - since).count();
    }

    std::string fmt(const char *format, auto... args) {
        char buf[512];
        std::snprintf(buf, sizeof buf, format, args...);
        return buf;
    }

    // Red-light crossings seen by every scenario run in this process.
    std::uint64_t redCrossingsTotal = 0;

    struct GridRun {
        std::uint64_t overlaps = 0;
        std::uint64_t otherViolations = 0;
        std::string firstProblem;
        std::uint64_t redCrossings = 0;
        std::uint64_t finished = 0;
    };

    GridRun runAudited(const GridScenario &s, int steps, int threads = 1) {
        RoadNet net = buildGrid(s.rows, s.cols, s.grid);
        EngineConfig cfg;
        cfg.rlTrafficLight = !s.autoSignals;
        cfg.laneChange = s.laneChange;
        cfg.threads = threads;
        Engine engine(cfg, net, gridFlows(net, s));
        GridRun run;
        for (int i = 0; i < steps; ++i) {
            engine.nextStep();
            for (const auto &p : engine.checkInvariants()) {
                bool overlap = p.rfind("overlap", 0) == 0;
                (overlap ? run.overlaps : run.otherViolations)++;
                if (run.firstProblem.empty())
                    run.firstProblem = "step " + std::to_string(i + 1) + ": " + p;
            }
        }
        run.redCrossings = engine.stats().redLightCrossings;
        run.finished = engine.stats().finished;
        redCrossingsTotal += run.redCrossings;
        return run;
    }

    Outcome noCollisionSafety() {
        auto start = Clock::now();
        std::mt19937_64 rng(20240601);
        std::uniform_real_distribution<double> speed(0.0, 20.0), decel(2.0, 6.0), gapDist(0.0, 100.0),
            unit(0.0, 1.0);
        const double dts[] = {0.1, 0.5, 1.0};
        int unsafe = 0, monotoneBreaks = 0;
        double worst = 0.0;
        const int cases = 10000;
        for (int i = 0; i < cases; ++i) {
            double vF = speed(rng), vL = speed(rng), dF = decel(rng), dL = decel(rng), gap = gapDist(rng);
            double dt = dts[rng() % 3];
            double s = noCollisionSpeed(vF, vL, dF, dL, gap, dt);
            double minGap = oracle::worstCaseMinGap(vF, vL, dF, dL, gap, dt, s);
            if (minGap < -1e-6) {
                ++unsafe;
                worst = std::min(worst, minGap);
            }
            double bump = 0.01 + 5 * unit(rng);
            if (noCollisionSpeed(vF, vL, dF, dL, gap + bump, dt) < s - 1e-9)
                ++monotoneBreaks;
            if (noCollisionSpeed(vF, vL + bump, dF, dL, gap, dt) < s - 1e-9)
                ++monotoneBreaks;
            if (noCollisionSpeed(vF + bump, vL, dF, dL, gap, dt) > s + 1e-9)
                ++monotoneBreaks;
            if (noCollisionSpeed(vF, vL, dF, dL + bump, gap, dt) > s + 1e-9)
                ++monotoneBreaks;
        }
        double elapsed = seconds(start);
        bool pass = unsafe == 0 && monotoneBreaks == 0 && elapsed < 10.0;
        return {pass, fmt("%d/%d cases below -1e-6 m (worst %.3f m), %d monotonicity breaks, %.2f s", unsafe, cases,
                          worst, monotoneBreaks, elapsed)};
    }

    Outcome collisionFreedom() {
        auto start = Clock::now();
        std::ostringstream detail;
        bool pass = true;
        std::uint64_t totalOverlaps = 0, totalOther = 0;
        std::string first;
        for (int size : {1, 2, 6})
            for (double volume : {100.0, 200.0, 300.0, 400.0, 500.0}) {
                GridScenario s;
                s.rows = s.cols = size;
                s.volume = volume;
                auto run = runAudited(s, 3600);
                totalOverlaps += run.overlaps;
                totalOther += run.otherViolations;
                if (first.empty() && !run.firstProblem.empty())
                    first = fmt("%dx%d@%.0f %s", size, size, volume, run.firstProblem.c_str());
            }
        double elapsed = seconds(start);
        pass = totalOverlaps == 0 && elapsed < 120.0;
        detail << totalOverlaps << " overlaps, " << totalOther << " other audit findings over 15 runs, "
               << fmt("%.1f s", elapsed);
        if (!first.empty())
            detail << "; first: " << first;
        return {pass, detail.str()};
    }

    Outcome determinism() {
        std::string dir = oracle::tempDir("determinism");
        GridScenario s;
        s.rows = s.cols = 6;
        s.volume = 400;
        std::string config = writeGridScenario(s, dir + "/scenario");
        auto result = benchScenario(config, 1800, {1, 2, 4}, dir + "/replays");
        std::ostringstream detail;
        for (const auto &r : result.reports)
            detail << r.threads << "t=" << r.replayDigest << " ";
        detail << "(1800 steps, peak " << result.reports.front().peakVehicles << " vehicles)";
        return {result.identical, detail.str()};
    }

    // Grid run warmed up until at least `target` vehicles are on the network, then timed.
    struct Throughput {
        double stepsPerSecond = 0.0;
        int vehicles = 0;
        bool reachedTarget = false;
    };

    Throughput measure(int size, double volume, int target, int threads, int timedSteps, int maxWarmup) {
        GridScenario s;
        s.rows = s.cols = size;
        s.volume = volume;
        RoadNet net = buildGrid(size, size, s.grid);
        EngineConfig cfg;
        cfg.rlTrafficLight = false;
        cfg.threads = threads;
        Engine engine(cfg, net, gridFlows(net, s));
        int warm = 0;
        while (engine.getVehicleCount() < target && warm < maxWarmup) {
            engine.nextStep();
            ++warm;
        }
        Throughput t;
        t.reachedTarget = engine.getVehicleCount() >= target;
        int minVehicles = engine.getVehicleCount();
        auto start = Clock::now();
        for (int i = 0; i < timedSteps; ++i) {
            engine.nextStep();
            minVehicles = std::min(minVehicles, engine.getVehicleCount());
        }
        t.stepsPerSecond = timedSteps / seconds(start);
        t.vehicles = minVehicles;
        t.reachedTarget = t.reachedTarget && minVehicles >= target;
        return t;
    }

    Outcome throughputSingle() {
        auto t = measure(10, 900, 2000, 1, 300, 3000);
        bool pass = t.reachedTarget && t.stepsPerSecond >= 72.0;
        return {pass, fmt("10x10, %d active vehicles (min over timed window), %.1f steps/s single thread",
                          t.vehicles, t.stepsPerSecond)};
    }

    Outcome throughputScaling() {
        auto one = measure(30, 700, 10000, 1, 60, 3000);
        auto four = measure(30, 700, 10000, 4, 60, 3000);
        double ratio = four.stepsPerSecond / one.stepsPerSecond;
        bool pass = one.reachedTarget && four.reachedTarget && ratio >= 1.8;
        return {pass, fmt("30x30, %d vehicles, 1 thread %.1f steps/s, 4 threads %.1f steps/s, ratio %.2f "
                          "(hardware threads: %u)",
                          one.vehicles, one.stepsPerSecond, four.stepsPerSecond, ratio,
                          std::thread::hardware_concurrency())};
    }

    Outcome table1() {
        std::vector<double> durations;
        double freeFlow = 0.0;
        for (double volume : {100.0, 200.0, 300.0, 400.0, 500.0}) {
            GridScenario s = table1Scenario(volume);
            RoadNet net = buildGrid(s.rows, s.cols, s.grid);
            auto flows = gridFlows(net, s);
            if (volume == 100.0) {
                double weight = 0.0;
                for (const auto &f : flows) {
                    freeFlow += oracle::freeFlowTime(net, f.route, f.vehicle) / f.interval;
                    weight += 1.0 / f.interval;
                }
                freeFlow /= weight;
            }
            EngineConfig cfg;
            cfg.rlTrafficLight = false;
            Engine engine(cfg, net, flows);
            for (int i = 0; i < 3600; ++i)
                engine.nextStep();
            redCrossingsTotal += engine.stats().redLightCrossings;
            durations.push_back(engine.getAverageTravelTime());
        }
        bool monotone = true, inBand = true;
        std::ostringstream detail;
        for (std::size_t i = 0; i < durations.size(); ++i) {
            if (i > 0 && durations[i] < durations[i - 1])
                monotone = false;
            if (durations[i] < 0.8 * freeFlow || durations[i] > 2.0 * freeFlow)
                inBand = false;
            detail << fmt("%.2f ", durations[i]);
        }
        detail << fmt("s for 100..500 veh/h; free flow %.2f s", freeFlow);
        return {monotone && inBand, detail.str()};
    }

    Outcome intersectionLogic() {
        GridScenario s;
        s.grid.phasePlan = PhasePlan::AllGreen;
        RoadNet net = buildGrid(1, 1, s.grid);
        // west->east straight against east->south left turn and south->north straight
        auto route = [&](std::initializer_list<const char *> ids) {
            std::vector<int> r;
            for (const char *id : ids)
                r.push_back(net.findRoad(id));
            return r;
        };
        std::vector<FlowSpec> flows(3);
        flows[0].route = route({"road_0_1_0", "road_1_1_0"});
        flows[1].route = route({"road_2_1_2", "road_1_1_3"});
        flows[2].route = route({"road_1_0_1", "road_1_1_1"});
        flows[0].interval = 10.0;
        flows[1].interval = 10.0;
        flows[2].interval = 12.0;
        EngineConfig cfg;
        cfg.rlTrafficLight = false;
        cfg.recordTrips = true;
        Engine engine(cfg, net, flows);
        int violations = 0;
        std::string first;
        for (int i = 0; i < 3600; ++i) {
            engine.nextStep();
            violations += oracle::mutualExclusionViolations(engine, first.empty() ? &first : nullptr);
        }
        std::map<std::string, std::pair<double, int>> delay; // by flow prefix
        for (const auto &t : engine.trips()) {
            std::string flow = t.id.substr(0, t.id.rfind('_'));
            double ff = oracle::freeFlowTime(net, t.route, VehicleParams{});
            delay[flow].first += t.exitTime - t.enterTime - ff;
            delay[flow].second += 1;
        }
        auto avg = [&](const std::string &f) {
            auto &d = delay[f];
            return d.second ? d.first / d.second : std::numeric_limits<double>::infinity();
        };
        double straight = avg("flow_0"), left = avg("flow_1");
        redCrossingsTotal += engine.stats().redLightCrossings;
        bool pass = violations == 0 && straight <= left && delay["flow_0"].second > 0 && delay["flow_1"].second > 0 &&
                    redCrossingsTotal == 0;
        std::string detail = fmt("%d mutual-exclusion violations; delay straight %.2f s (%d trips) vs left %.2f s "
                                 "(%d trips); red-light crossings in all runs so far: %llu",
                                 violations, straight, delay["flow_0"].second, left, delay["flow_1"].second,
                                 static_cast<unsigned long long>(redCrossingsTotal));
        if (!first.empty())
            detail += "; first: " + first;
        return {pass, detail};
    }

    Outcome laneChange() {
        // neighbour scan against a linear scan
        std::mt19937_64 rng(7);
        int mismatches = 0;
        for (int c = 0; c < 1000; ++c) {
            double length = std::uniform_real_distribution<double>(5.0, 400.0)(rng);
            double seg = std::uniform_real_distribution<double>(2.0, 30.0)(rng);
            LaneOccupancy lane(length, seg);
            std::vector<Occupant> all;
            int n = static_cast<int>(rng() % 40);
            for (int i = 0; i < n; ++i) {
                double pos = (rng() % 4 == 0) ? std::floor(std::uniform_real_distribution<double>(0, length)(rng))
                                              : std::uniform_real_distribution<double>(0, length)(rng);
                all.push_back({pos, static_cast<std::uint64_t>(i), i});
            }
            lane.assign(all);
            for (int q = 0; q < 20; ++q) {
                double pos = std::uniform_real_distribution<double>(0, length)(rng);
                if (q == 0 && !all.empty())
                    pos = all.front().pos;
                int inspected = 0;
                auto got = lane.scanNeighbors(pos, &inspected);
                auto want = oracle::bruteNeighbors(all, pos);
                auto same = [](const std::optional<Occupant> &a, const std::optional<Occupant> &b) {
                    return a.has_value() == b.has_value() && (!a || a->handle == b->handle);
                };
                if (!same(got.leader, want.leader) || !same(got.follower, want.follower) || inspected > 3)
                    ++mismatches;
            }
        }

        // forced route: enter on the middle lane, turn left (only lane 0 turns left)
        GridScenario s;
        RoadNet net = buildGrid(1, 1, s.grid);
        FlowSpec flow;
        flow.route = {net.findRoad("road_0_1_0"), net.findRoad("road_1_1_1")};
        // one spawn per 15 s stays below what the protected left phase can discharge
        flow.interval = 15.0;
        flow.endTime = 499 * 15.0;
        flow.entryLane = 1;
        EngineConfig cfg;
        cfg.rlTrafficLight = false;
        cfg.laneChange = true;
        Engine engine(cfg, net, {flow});
        int audits = 0;
        std::string first;
        int steps = 0;
        while (steps < 9000 && (engine.stats().spawned < 500 || engine.getVehicleCount() > 0 || engine.queuedVehicles() > 0)) {
            engine.nextStep();
            ++steps;
            auto problems = engine.checkInvariants();
            audits += static_cast<int>(problems.size());
            if (first.empty() && !problems.empty())
                first = problems.front();
        }
        const auto &st = engine.stats();
        redCrossingsTotal += st.redLightCrossings;
        bool pass = mismatches == 0 && st.spawned == 500 && st.finished == 500 && st.routeFailures == 0 && audits == 0;
        std::string detail = fmt("scan mismatches %d/20000; forced route: %llu spawned, %llu finished, %llu route "
                                 "failures, %llu lane changes, %d audit findings in %d steps",
                                 mismatches, (unsigned long long)st.spawned, (unsigned long long)st.finished,
                                 (unsigned long long)st.routeFailures, (unsigned long long)st.laneChangesFinished,
                                 audits, steps);
        if (!first.empty())
            detail += "; first: " + first;
        return {pass, detail};
    }

    Outcome listing() {
        std::string dir = oracle::tempDir("listing");
        GridScenario s;
        s.autoSignals = false;
        s.volume = 400;
        std::string config = writeGridScenario(s, dir);
        Engine eng(config);
        const int phases[] = {0, 1, 2, 3};
        int inconsistent = 0;
        std::string first;
        auto flag = [&](const std::string &what) {
            ++inconsistent;
            if (first.empty())
                first = what;
        };
        for (int step = 0; step < 3600; ++step) {
            eng.setTlPhase("intersection_1_1", phases[(step / 30) % 4]);
            eng.nextStep();
            double now = eng.getCurrentTime();
            auto counts = eng.getLaneVehicleCount();
            auto waiting = eng.getLaneWaitingVehicleCount();
            auto lanes = eng.getLaneVehicles();
            auto speeds = eng.getVehicleSpeed();
            double att = eng.getAverageTravelTime();
            if (std::abs(now - (step + 1)) > 1e-9)
                flag("time");
            if (counts.size() != lanes.size() || waiting.size() != lanes.size())
                flag("lane key sets differ");
            std::size_t listed = 0;
            for (const auto &[lane, ids] : lanes) {
                listed += ids.size();
                if (counts[lane] != static_cast<int>(ids.size()))
                    flag("count vs list on " + lane);
                int slow = 0;
                for (const auto &id : ids) {
                    auto it = speeds.find(id);
                    if (it == speeds.end()) {
                        flag("missing speed for " + id);
                        continue;
                    }
                    slow += it->second < 0.1;
                }
                if (waiting[lane] != slow)
                    flag("waiting count on " + lane);
            }
            if (listed > speeds.size())
                flag("more listed vehicles than speeds");
            if (!(att >= 0) || !std::isfinite(att))
                flag("average travel time");
        }
        redCrossingsTotal += eng.stats().redLightCrossings;
        bool pass = inconsistent == 0 && eng.stats().finished > 0;
        std::string detail = fmt("%d inconsistent snapshots over 3600 steps, %llu vehicles finished", inconsistent,
                                 (unsigned long long)eng.stats().finished);
        if (!first.empty())
            detail += "; first: " + first;
        return {pass, detail};
    }

    const std::vector<std::pair<std::string, std::function<Outcome()>>> &criteria() {
        static const std::vector<std::pair<std::string, std::function<Outcome()>>> list = {
            {"no_collision_safety", noCollisionSafety},
            {"collision_freedom", collisionFreedom},
            {"determinism", determinism},
            {"throughput_single", throughputSingle},
            {"throughput_scaling", throughputScaling},
            {"table1", table1},
            {"intersection", intersectionLogic},
            {"lane_change", laneChange},
            {"listing", listing},
        };
        return list;
    }

}

int main(int argc, char **argv) {
    log::setLevel(log::Level::Error);
    std::string which = argc > 1 ? argv[1] : "all";
    bool allPassed = true, found = false;
    for (const auto &[name, fn] : criteria()) {
        if (which != "all" && which != name)
            continue;
        found = true;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
        allPassed = allPassed && o.pass;
    }
    if (!found) {
        std::cerr << "unknown criterion " << which << '\n';
        return 2;
    }
    return allPassed ? 0 : 1;
}
