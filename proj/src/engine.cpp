#include "trafficsim/engine.h"
#include "trafficsim/error.h"
#include "trafficsim/log.h"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace trafficsim {

    using nlohmann::json;
    namespace fs = std::filesystem;

    std::string EngineConfig::resolve(const std::string &file) const {
        if (file.empty() || fs::path(file).is_absolute())
            return file;
        return (fs::path(dir) / file).lexically_normal().string();
    }

    void EngineConfig::validate() const {
        if (!(interval > 0))
            throw ConfigError("interval must be positive");
        if (threads < 1)
            throw ConfigError("threads must be at least 1");
        if (!(segmentLength > 0))
            throw ConfigError("segmentLength must be positive");
        if (!(yellowTime >= 0))
            throw ConfigError("yellowTime must not be negative");
        if (saveReplay && (replayLogFile.empty() || roadnetLogFile.empty()))
            throw ConfigError("saveReplay needs replayLogFile and roadnetLogFile");
    }

    EngineConfig parseConfig(std::string_view text, const std::string &baseDir) {
        json doc;
        try {
            doc = json::parse(text.begin(), text.end());
        } catch (const json::parse_error &e) {
            throw ConfigError(std::string("config syntax error: ") + e.what());
        }
        if (!doc.is_object())
            throw ConfigError("config must be an object");
        EngineConfig cfg;
        auto get = [&](const char *key, auto &field) {
            auto it = doc.find(key);
            if (it == doc.end() || it->is_null())
                return false;
            try {
                it->get_to(field);
            } catch (const json::exception &) {
                throw ConfigError(std::string("config field '") + key + "' has the wrong type");
            }
            return true;
        };
        for (const char *key : {"roadnetFile", "flowFile"})
            if (!doc.contains(key))
                throw ConfigError(std::string("config is missing '") + key + "'");
        get("interval", cfg.interval);
        get("seed", cfg.seed);
        get("dir", cfg.dir);
        get("roadnetFile", cfg.roadnetFile);
        get("flowFile", cfg.flowFile);
        get("rlTrafficLight", cfg.rlTrafficLight);
        get("saveReplay", cfg.saveReplay);
        get("roadnetLogFile", cfg.roadnetLogFile);
        get("replayLogFile", cfg.replayLogFile);
        get("laneChange", cfg.laneChange);
        get("threads", cfg.threads);
        get("segmentLength", cfg.segmentLength);
        get("yellowTime", cfg.yellowTime);
        get("checkInvariants", cfg.checkInvariants);
        get("haltOnViolation", cfg.haltOnViolation);
        get("recordTrips", cfg.recordTrips);
        if (!baseDir.empty() && !fs::path(cfg.dir).is_absolute())
            cfg.dir = (fs::path(baseDir) / cfg.dir).lexically_normal().string();
        cfg.validate();
        return cfg;
    }

    EngineConfig loadConfig(const std::string &path) {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config file: " + path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        try {
            return parseConfig(buffer.str(), fs::path(path).parent_path().string());
        } catch (const ConfigError &e) {
            throw ConfigError(path + ": " + e.what());
        }
    }

    std::string serializeConfig(const EngineConfig &c) {
        json doc = {{"interval", c.interval},
                    {"seed", c.seed},
                    {"dir", c.dir},
                    {"roadnetFile", c.roadnetFile},
                    {"flowFile", c.flowFile},
                    {"rlTrafficLight", c.rlTrafficLight},
                    {"saveReplay", c.saveReplay},
                    {"roadnetLogFile", c.roadnetLogFile},
                    {"replayLogFile", c.replayLogFile},
                    {"laneChange", c.laneChange},
                    {"threads", c.threads},
                    {"segmentLength", c.segmentLength},
                    {"yellowTime", c.yellowTime}};
        return doc.dump(2);
    }

    namespace {
        void rejectBadNetwork(const RoadNet &net) {
            for (const auto &d : validate(net))
                if (d.severity == Severity::Error)
                    throw SemanticError("invalid roadnet: " + d.entity + ": " + d.message);
                else
                    log::warn("roadnet: " + d.entity + ": " + d.message);
        }
    }

    Engine::Engine(const std::string &configFile) {
        cfg = loadConfig(configFile);
        net = loadRoadNet(cfg.resolve(cfg.roadnetFile), cfg.segmentLength);
        rejectBadNetwork(net);
        flows = loadFlow(cfg.resolve(cfg.flowFile), net);
        workers = std::make_unique<ThreadPool>(cfg.threads);
        if (cfg.saveReplay)
            writeRoadnetLog(cfg.resolve(cfg.roadnetLogFile));
        rng.seed(cfg.seed);
        initialise();
    }

    Engine::Engine(EngineConfig config, RoadNet network, std::vector<FlowSpec> flowSpecs)
        : cfg(std::move(config)), net(std::move(network)), flows(std::move(flowSpecs)) {
        cfg.validate();
        rejectBadNetwork(net);
        for (std::size_t i = 0; i < flows.size(); ++i)
            if (auto problem = routeProblem(net, flows[i].route); !problem.empty())
                throw SemanticError("flow " + std::to_string(i) + ": " + problem);
        workers = std::make_unique<ThreadPool>(cfg.threads);
        if (cfg.saveReplay)
            writeRoadnetLog(cfg.resolve(cfg.roadnetLogFile));
        rng.seed(cfg.seed);
        initialise();
    }

    Engine::~Engine() = default;

    void Engine::initialise() {
        time = 0.0;
        step = 0;
        nextSerial = 0;
        pushedCount = 0;
        counters = {};
        slots.clear();
        freeSlots.clear();
        byId.clear();

        occupancy.clear();
        buckets.assign(net.drivableCount(), {});
        occupancy.reserve(net.drivableCount());
        for (int d = 0; d < net.drivableCount(); ++d)
            occupancy.emplace_back(net.drivableLength(d), net.segmentLength);
        entryQueues.assign(net.lanes.size(), {});

        schedules.clear();
        for (const auto &f : flows)
            schedules.emplace_back(f);
        roundRobin.assign(flows.size(), 0);

        signals.clear();
        phaseDurations.clear();
        localRoadLink.assign(net.roadLinks.size(), -1);
        for (const auto &inter : net.intersections) {
            signals.emplace_back(inter, cfg.yellowTime);
            std::vector<double> durations;
            for (const auto &p : inter.phases)
                durations.push_back(p.time);
            phaseDurations.push_back(std::move(durations));
            for (std::size_t i = 0; i < inter.roadLinks.size(); ++i)
                localRoadLink[inter.roadLinks[i]] = static_cast<int>(i);
        }
        claims.assign(net.crossPoints.size(), {});
        tripLog.clear();
        replay.open(cfg.saveReplay ? cfg.resolve(cfg.replayLogFile) : std::string());
    }

    void Engine::reset(bool keepRng) {
        if (!keepRng)
            rng.seed(cfg.seed);
        initialise();
    }

    void Engine::writeRoadnetLog(const std::string &path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw ConfigError("cannot write roadnet log: " + path);
        out << roadnetLog(net).dump();
    }

    int Engine::allocate() {
        if (!freeSlots.empty()) {
            int h = freeSlots.back();
            freeSlots.pop_back();
            slots[h] = Vehicle{};
            slots[h].alive = true;
            return h;
        }
        slots.emplace_back();
        slots.back().alive = true;
        return static_cast<int>(slots.size()) - 1;
    }

    void Engine::releaseSlot(int handle) {
        Vehicle &v = slots[handle];
        if (!v.isShadow)
            byId.erase(v.id);
        v.alive = false;
        v.route.clear();
        freeSlots.push_back(handle);
    }

    int Engine::nextLinkFrom(int lane, const std::vector<int> &route, std::size_t routeIndex) const {
        if (routeIndex + 1 >= route.size())
            return -1;
        int after = routeIndex + 2 < route.size() ? route[routeIndex + 2] : -1;
        return net.laneLinkFor(lane, route[routeIndex + 1], after);
    }

    int Engine::nextLinkOf(const Vehicle &v) const {
        if (net.isLaneLink(v.drivable))
            return net.laneLinkOf(v.drivable);
        return nextLinkFrom(v.drivable, v.route, v.routeIndex);
    }

    int Engine::intersectionIndex(const std::string &id) const {
        int idx = net.findIntersection(id);
        if (idx < 0)
            throw ParameterError("unknown intersection " + id);
        return idx;
    }

    int Engine::handleOf(const std::string &id) const {
        auto it = byId.find(id);
        return it == byId.end() ? -1 : it->second;
    }

    std::vector<int> Engine::routeIndices(const std::vector<std::string> &route) const {
        std::vector<int> out;
        for (const auto &r : route) {
            int idx = net.findRoad(r);
            if (idx < 0)
                throw SemanticError("unknown road " + r);
            out.push_back(idx);
        }
        if (auto problem = routeProblem(net, out); !problem.empty())
            throw SemanticError("route: " + problem);
        return out;
    }

    std::string Engine::createPending(std::string id, const VehicleParams &params, std::vector<int> route, int lane) {
        entryQueues[lane].push_back({id, nextSerial++, params, std::move(route)});
        ++counters.spawned;
        return id;
    }

    int Engine::createVehicle(const Pending &p, int lane, double pos, double speed) {
        int h = allocate();
        Vehicle &v = slots[h];
        v.id = p.id;
        v.serial = p.serial;
        v.params = p.params;
        v.route = p.route;
        v.routeIndex = 0;
        v.drivable = lane;
        v.pos = pos;
        v.speed = v.prevSpeed = speed;
        v.enterTime = time;
        v.insertedAt = step;
        byId[v.id] = h;
        occupancy[lane].insert({pos, v.serial, h});
        ++counters.inserted;
        return h;
    }

    std::string Engine::pushVehicle(const VehicleParams &params, const std::vector<std::string> &route, int lane) {
        if (!params.valid())
            throw ParameterError("invalid vehicle parameters");
        auto indices = routeIndices(route);
        const Road &entry = net.roads[indices.front()];
        if (lane < 0 || lane >= static_cast<int>(entry.lanes.size()))
            throw ParameterError("road " + entry.id + " has no lane " + std::to_string(lane));
        return createPending("pushed_" + std::to_string(pushedCount++), params, std::move(indices), entry.lanes[lane]);
    }

    std::string Engine::placeVehicle(const VehicleParams &params, const std::vector<std::string> &route, int lane,
                                     double pos, double speed) {
        if (!params.valid())
            throw ParameterError("invalid vehicle parameters");
        auto indices = routeIndices(route);
        const Road &entry = net.roads[indices.front()];
        if (lane < 0 || lane >= static_cast<int>(entry.lanes.size()))
            throw ParameterError("road " + entry.id + " has no lane " + std::to_string(lane));
        int laneIdx = entry.lanes[lane];
        if (pos < 0 || pos > net.lanes[laneIdx].length)
            throw ParameterError("position outside lane");
        if (speed < 0 || speed > params.maxSpeed)
            throw ParameterError("speed outside [0, maxSpeed]");
        auto near = occupancy[laneIdx].scanNeighbors(pos);
        if (near.leader && near.leader->pos - slots[near.leader->handle].params.length < pos)
            throw ParameterError("spot overlaps the vehicle ahead");
        if (near.follower && near.follower->pos > pos - params.length)
            throw ParameterError("spot overlaps the vehicle behind");
        Pending p{"placed_" + std::to_string(pushedCount++), nextSerial++, params, std::move(indices)};
        ++counters.spawned;
        createVehicle(p, laneIdx, pos, speed);
        return p.id;
    }

    int Engine::chooseEntryLane(std::size_t flow) {
        const FlowSpec &spec = flows[flow];
        const Road &entry = net.roads[spec.route.front()];
        if (spec.entryLane)
            return entry.lanes[*spec.entryLane];
        std::vector<int> candidates;
        for (int lane : entry.lanes)
            if (spec.route.size() < 2 || net.laneServes(lane, spec.route[1]))
                candidates.push_back(lane);
        if (candidates.empty())
            candidates = entry.lanes;
        int lane = candidates[roundRobin[flow] % candidates.size()];
        ++roundRobin[flow];
        return lane;
    }

    // signals and timing

    SignalColor Engine::laneLinkColor(int laneLink) const {
        const LaneLink &link = net.laneLinks[laneLink];
        return signals[link.intersection].color(localRoadLink[link.roadLink]);
    }

    std::string Engine::signalColors() const {
        std::string out;
        out.reserve(net.laneLinks.size());
        for (int k = 0; k < static_cast<int>(net.laneLinks.size()); ++k)
            out.push_back(colorChar(laneLinkColor(k)));
        return out;
    }

    void Engine::setTlPhase(const std::string &intersectionId, int phase, bool immediate) {
        signals[intersectionIndex(intersectionId)].request(phase, immediate);
    }

    int Engine::getTlPhase(const std::string &intersectionId) const {
        return signals[intersectionIndex(intersectionId)].currentPhase();
    }

    void Engine::requireTimingControl() const {
        if (cfg.rlTrafficLight)
            throw ContractError("signal timing is externally controlled (rlTrafficLight)");
    }

    void Engine::setPhaseDurations(const std::string &intersectionId, const std::vector<double> &durations) {
        requireTimingControl();
        int idx = intersectionIndex(intersectionId);
        if (durations.size() != phaseDurations[idx].size())
            throw ParameterError("expected " + std::to_string(phaseDurations[idx].size()) + " durations");
        for (double d : durations)
            if (!(d > 0))
                throw ParameterError("phase durations must be positive");
        phaseDurations[idx] = durations;
    }

    void Engine::setCycleLength(const std::string &intersectionId, double seconds) {
        requireTimingControl();
        if (!(seconds > 0))
            throw ParameterError("cycle length must be positive");
        auto apply = [&](int idx) {
            auto &d = phaseDurations[idx];
            double total = std::accumulate(d.begin(), d.end(), 0.0);
            if (d.empty() || !(total > 0))
                return;
            for (double &x : d)
                x *= seconds / total;
        };
        if (intersectionId.empty()) {
            for (int i = 0; i < static_cast<int>(net.intersections.size()); ++i)
                apply(i);
        } else {
            apply(intersectionIndex(intersectionId));
        }
    }

    void Engine::setGreenRatio(const std::string &intersectionId, const std::vector<double> &splits) {
        requireTimingControl();
        double sum = 0.0;
        for (double s : splits) {
            if (!(s > 0))
                throw ParameterError("green ratios must be positive");
            sum += s;
        }
        auto check = [&](int idx) {
            if (phaseDurations[idx].size() != splits.size())
                throw ParameterError(net.intersections[idx].id + " has " + std::to_string(phaseDurations[idx].size()) +
                                     " phases");
        };
        auto apply = [&](int idx) {
            auto &d = phaseDurations[idx];
            double cycle = std::accumulate(d.begin(), d.end(), 0.0);
            for (std::size_t i = 0; i < d.size(); ++i)
                d[i] = cycle * splits[i] / sum;
        };
        if (intersectionId.empty()) {
            for (int i = 0; i < static_cast<int>(net.intersections.size()); ++i)
                if (!phaseDurations[i].empty())
                    check(i);
            for (int i = 0; i < static_cast<int>(net.intersections.size()); ++i)
                if (!phaseDurations[i].empty())
                    apply(i);
        } else {
            int idx = intersectionIndex(intersectionId);
            check(idx);
            apply(idx);
        }
    }

    std::vector<double> Engine::getPhaseDurations(const std::string &intersectionId) const {
        return phaseDurations[intersectionIndex(intersectionId)];
    }

    void Engine::setVolumeScale(double factor) {
        if (!(factor > 0))
            throw ParameterError("volume scale must be positive");
        for (auto &s : schedules)
            s.setVolumeScale(factor);
    }

    // observations

    std::map<std::string, int> Engine::getLaneVehicleCount() const {
        std::map<std::string, int> out;
        for (std::size_t l = 0; l < net.lanes.size(); ++l) {
            int n = 0;
            for (const auto &o : occupancy[l].sequence())
                n += !slots[o.handle].isShadow;
            out.emplace(net.lanes[l].id, n);
        }
        return out;
    }

    std::map<std::string, int> Engine::getLaneWaitingVehicleCount() const {
        std::map<std::string, int> out;
        for (std::size_t l = 0; l < net.lanes.size(); ++l) {
            int n = 0;
            for (const auto &o : occupancy[l].sequence()) {
                const Vehicle &v = slots[o.handle];
                n += !v.isShadow && v.speed < 0.1;
            }
            out.emplace(net.lanes[l].id, n);
        }
        return out;
    }

    std::map<std::string, std::vector<std::string>> Engine::getLaneVehicles() const {
        std::map<std::string, std::vector<std::string>> out;
        for (std::size_t l = 0; l < net.lanes.size(); ++l) {
            std::vector<std::string> ids;
            for (const auto &o : occupancy[l].sequence())
                if (!slots[o.handle].isShadow)
                    ids.push_back(slots[o.handle].id);
            out.emplace(net.lanes[l].id, std::move(ids));
        }
        return out;
    }

    std::map<std::string, double> Engine::getVehicleSpeed() const {
        std::map<std::string, double> out;
        for (const auto &v : slots)
            if (v.alive && !v.isShadow)
                out.emplace(v.id, v.speed);
        return out;
    }

    int Engine::getVehicleCount() const {
        return static_cast<int>(byId.size());
    }

    double Engine::getAverageTravelTime() const {
        double total = counters.totalDuration;
        std::uint64_t count = counters.finished;
        for (const auto &v : slots)
            if (v.alive && !v.isShadow) {
                total += time - v.enterTime;
                ++count;
            }
        return count ? total / static_cast<double>(count) : 0.0;
    }

    std::size_t Engine::queuedVehicles() const {
        std::size_t n = 0;
        for (const auto &q : entryQueues)
            n += q.size();
        return n;
    }

    std::vector<VehicleView> Engine::vehicles() const {
        std::vector<VehicleView> out;
        for (int d = 0; d < net.drivableCount(); ++d)
            for (const auto &o : occupancy[d].sequence()) {
                const Vehicle &v = slots[o.handle];
                if (v.isShadow)
                    continue;
                out.push_back({v.id, net.drivableId(d), v.pos, v.speed, v.params.length, net.isLaneLink(d),
                               v.change.phase() == LaneChangePhase::Executing, v.enterTime});
            }
        return out;
    }

    std::optional<VehicleView> Engine::vehicle(const std::string &id) const {
        int h = handleOf(id);
        if (h < 0)
            return std::nullopt;
        const Vehicle &v = slots[h];
        return VehicleView{v.id, net.drivableId(v.drivable), v.pos, v.speed, v.params.length,
                           net.isLaneLink(v.drivable), v.change.phase() == LaneChangePhase::Executing, v.enterTime};
    }

    double Engine::centerOn(const Vehicle &v, int laneLink) const {
        const LaneLink &link = net.laneLinks[laneLink];
        double center = v.pos - v.params.length / 2;
        if (v.drivable == net.drivableOfLaneLink(laneLink))
            return center;
        if (v.drivable == link.startLane)
            return center - net.lanes[link.startLane].length;
        return link.length + center;
    }

    std::optional<double> Engine::centerAlong(const std::string &vehicleId, int laneLink) const {
        int h = handleOf(vehicleId);
        if (h < 0)
            return std::nullopt;
        const Vehicle &v = slots[h];
        const LaneLink &link = net.laneLinks[laneLink];
        bool relevant = v.drivable == net.drivableOfLaneLink(laneLink) ||
                        (v.drivable == link.startLane && nextLinkOf(v) == laneLink) ||
                        (v.drivable == link.endLane && v.prevLink == laneLink);
        if (!relevant)
            return std::nullopt;
        return centerOn(v, laneLink);
    }

    double Engine::clearanceFor(const VehicleParams &params, int crossPoint) const {
        double s = std::max(std::sin(net.crossPoints[crossPoint].angle), 0.2);
        return (params.width / 2 + params.length / 2) / s + 3.0;
    }

    double Engine::clearance(const std::string &vehicleId, int crossPoint) const {
        int h = handleOf(vehicleId);
        if (h < 0)
            throw ParameterError("unknown vehicle " + vehicleId);
        return clearanceFor(slots[h].params, crossPoint);
    }

    Pose Engine::poseOf(const Vehicle &v) const {
        auto at = [&](int drivable, double pos) {
            const Polyline &path = net.drivablePath(drivable);
            double s = std::clamp(pos - v.params.length / 2, 0.0, path.length());
            return path.poseAt(s);
        };
        Pose pose = at(v.drivable, v.pos);
        if (v.change.phase() == LaneChangePhase::Executing && v.partner >= 0) {
            const Vehicle &shadow = slots[v.partner];
            Pose target = at(shadow.drivable, shadow.pos);
            double t = v.change.lateralProgress();
            pose.point = pose.point * (1 - t) + target.point * t;
        }
        return pose;
    }

    std::vector<VehiclePose> Engine::vehiclePoses() const {
        std::vector<VehiclePose> out;
        for (int d = 0; d < net.drivableCount(); ++d)
            for (const auto &o : occupancy[d].sequence()) {
                const Vehicle &v = slots[o.handle];
                if (v.isShadow)
                    continue;
                Pose p = poseOf(v);
                out.push_back({v.id, p.point.x, p.point.y, p.heading, v.speed});
            }
        return out;
    }

    // audit

    std::vector<std::string> Engine::checkInvariants() const {
        std::vector<std::string> problems;
        const double tol = 1e-6;
        const double dt = cfg.interval;
        std::size_t listed = 0;
        auto rearOf = [&](const Occupant &o) { return o.pos - slots[o.handle].params.length; };

        for (int d = 0; d < net.drivableCount(); ++d) {
            auto seq = occupancy[d].sequence();
            double len = net.drivableLength(d);
            listed += seq.size();
            for (std::size_t i = 0; i < seq.size(); ++i) {
                const Vehicle &v = slots[seq[i].handle];
                if (!v.alive || v.drivable != d || v.pos != seq[i].pos)
                    problems.push_back("stale entry for " + v.id + " on " + net.drivableId(d));
                if (seq[i].pos < -tol || seq[i].pos > len + tol)
                    problems.push_back(v.id + " outside " + net.drivableId(d));
                if (i > 0) {
                    if (frontOf(seq[i], seq[i - 1]))
                        problems.push_back("unsorted sequence on " + net.drivableId(d));
                    double gap = rearOf(seq[i - 1]) - seq[i].pos;
                    if (gap < -tol)
                        problems.push_back("overlap on " + net.drivableId(d) + ": " + slots[seq[i - 1].handle].id +
                                           " and " + v.id + " gap " + std::to_string(gap));
                }
            }
            // a vehicle whose rear still hangs back into the previous drivable
            if (seq.empty())
                continue;
            const Occupant &last = seq.back();
            double rear = rearOf(last);
            if (rear >= 0)
                continue;
            auto checkBehind = [&](int behind) {
                const Occupant *front = occupancy[behind].first();
                if (!front)
                    return;
                double gap = net.drivableLength(behind) + rear - front->pos;
                if (gap < -tol)
                    problems.push_back("overlap across " + net.drivableId(behind) + " -> " + net.drivableId(d) +
                                       ": " + slots[front->handle].id + " and " + slots[last.handle].id);
            };
            if (net.isLaneLink(d))
                checkBehind(net.laneLinks[net.laneLinkOf(d)].startLane);
            else
                for (int in : net.lanes[d].inLinks)
                    checkBehind(net.drivableOfLaneLink(in));
        }

        std::size_t alive = 0, originals = 0;
        for (const auto &v : slots) {
            if (!v.alive)
                continue;
            ++alive;
            if (v.isShadow) {
                if (v.partner < 0 || !slots[v.partner].alive || slots[v.partner].partner < 0 ||
                    &slots[slots[v.partner].partner] != &v)
                    problems.push_back("orphan shadow of " + v.id);
                continue;
            }
            ++originals;
            if (v.speed < -tol || v.speed > v.params.maxSpeed + tol)
                problems.push_back(v.id + " speed " + std::to_string(v.speed) + " outside [0, maxSpeed]");
            if (v.insertedAt != step) {
                double lo = std::max(0.0, v.prevSpeed - v.params.maxNegAcc * dt);
                double hi = v.prevSpeed + v.params.maxPosAcc * dt;
                if (v.speed < lo - tol || v.speed > hi + tol)
                    problems.push_back(v.id + " speed change " + std::to_string(v.prevSpeed) + " -> " +
                                       std::to_string(v.speed) + " exceeds acceleration bounds");
            }
            if (v.change.phase() == LaneChangePhase::Executing &&
                (v.partner < 0 || !slots[v.partner].alive || !slots[v.partner].isShadow))
                problems.push_back(v.id + " changing lane without a shadow");
        }
        if (listed != alive)
            problems.push_back("lane sequences list " + std::to_string(listed) + " vehicles, " +
                               std::to_string(alive) + " alive");
        std::uint64_t accounted = originals + counters.finished + queuedVehicles();
        if (accounted != counters.spawned)
            problems.push_back("conservation: spawned " + std::to_string(counters.spawned) + " != " +
                               std::to_string(accounted));
        return problems;
    }

}
