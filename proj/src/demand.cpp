#include "trafficsim/demand.h"
#include "trafficsim/error.h"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace trafficsim {

    using nlohmann::json;

    std::string routeProblem(const RoadNet &net, const std::vector<int> &route) {
        if (route.empty())
            return "empty route";
        for (std::size_t i = 0; i + 1 < route.size(); ++i)
            if (!net.roadsConnected(route[i], route[i + 1]))
                return "no lanelink from " + net.roads[route[i]].id + " to " + net.roads[route[i + 1]].id;
        return {};
    }

    namespace {
        double number(const json &obj, const char *key, const std::string &path) {
            auto it = obj.find(key);
            if (it == obj.end())
                throw ParseError(path + ": missing required field '" + key + "'");
            if (!it->is_number())
                throw ParseError(path + "/" + key + ": expected a number");
            return it->get<double>();
        }
    }

    std::vector<FlowSpec> parseFlow(std::string_view text, const RoadNet &net) {
        json doc;
        try {
            doc = json::parse(text.begin(), text.end());
        } catch (const json::parse_error &e) {
            throw ParseError(std::string("flow syntax error: ") + e.what(), e.byte);
        }
        if (!doc.is_array())
            throw ParseError("flow document must be an array");
        std::vector<FlowSpec> flows;
        for (std::size_t i = 0; i < doc.size(); ++i) {
            std::string path = "/" + std::to_string(i);
            const json &fj = doc[i];
            if (!fj.is_object())
                throw ParseError(path + ": expected an object");
            FlowSpec spec;
            auto vit = fj.find("vehicle");
            if (vit == fj.end() || !vit->is_object())
                throw ParseError(path + ": missing required field 'vehicle'");
            std::string vp = path + "/vehicle";
            spec.vehicle.length = number(*vit, "length", vp);
            spec.vehicle.width = number(*vit, "width", vp);
            spec.vehicle.maxPosAcc = number(*vit, "maxPosAcc", vp);
            spec.vehicle.maxNegAcc = number(*vit, "maxNegAcc", vp);
            spec.vehicle.usualPosAcc = number(*vit, "usualPosAcc", vp);
            spec.vehicle.usualNegAcc = number(*vit, "usualNegAcc", vp);
            spec.vehicle.minGap = number(*vit, "minGap", vp);
            spec.vehicle.maxSpeed = number(*vit, "maxSpeed", vp);
            spec.vehicle.headwayTime = number(*vit, "headwayTime", vp);
            if (!spec.vehicle.valid())
                throw SemanticError(vp + ": invalid vehicle parameters");

            auto rit = fj.find("route");
            if (rit == fj.end() || !rit->is_array())
                throw ParseError(path + ": missing required field 'route'");
            for (const auto &r : *rit) {
                if (!r.is_string())
                    throw ParseError(path + "/route: expected road ids");
                int road = net.findRoad(r.get<std::string>());
                if (road < 0)
                    throw SemanticError(path + "/route: unknown road " + r.get<std::string>());
                spec.route.push_back(road);
            }
            if (auto problem = routeProblem(net, spec.route); !problem.empty())
                throw SemanticError(path + "/route: " + problem);

            spec.interval = number(fj, "interval", path);
            if (!(spec.interval > 0))
                throw SemanticError(path + ": interval must be positive");
            spec.startTime = fj.contains("startTime") ? number(fj, "startTime", path) : 0.0;
            spec.endTime = fj.contains("endTime") ? number(fj, "endTime", path) : -1.0;
            if (spec.endTime >= 0 && spec.endTime < spec.startTime)
                throw SemanticError(path + ": endTime before startTime");
            if (auto lit = fj.find("entryLane"); lit != fj.end() && !lit->is_null()) {
                int lane = lit->get<int>();
                if (lane < 0 || lane >= static_cast<int>(net.roads[spec.route.front()].lanes.size()))
                    throw SemanticError(path + ": entryLane out of range");
                spec.entryLane = lane;
            }
            flows.push_back(std::move(spec));
        }
        return flows;
    }

    std::vector<FlowSpec> loadFlow(const std::string &path, const RoadNet &net) {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open flow file: " + path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        try {
            return parseFlow(buffer.str(), net);
        } catch (const ParseError &e) {
            throw ParseError(path + ": " + e.what());
        } catch (const SemanticError &e) {
            throw SemanticError(path + ": " + e.what());
        }
    }

    std::string serializeFlows(const std::vector<FlowSpec> &flows, const RoadNet &net) {
        json arr = json::array();
        for (const auto &f : flows) {
            json route = json::array();
            for (int r : f.route)
                route.push_back(net.roads[r].id);
            json fj = {{"vehicle",
                        {{"length", f.vehicle.length},
                         {"width", f.vehicle.width},
                         {"maxPosAcc", f.vehicle.maxPosAcc},
                         {"maxNegAcc", f.vehicle.maxNegAcc},
                         {"usualPosAcc", f.vehicle.usualPosAcc},
                         {"usualNegAcc", f.vehicle.usualNegAcc},
                         {"minGap", f.vehicle.minGap},
                         {"maxSpeed", f.vehicle.maxSpeed},
                         {"headwayTime", f.vehicle.headwayTime}}},
                       {"route", std::move(route)},
                       {"interval", f.interval},
                       {"startTime", f.startTime},
                       {"endTime", f.endTime}};
            if (f.entryLane)
                fj["entryLane"] = *f.entryLane;
            arr.push_back(std::move(fj));
        }
        return arr.dump(2);
    }

    FlowSchedule::FlowSchedule(const FlowSpec &spec)
        : base(spec.startTime), endTime(spec.endTime), baseInterval(spec.interval), currentInterval(spec.interval),
          anchorTime(spec.startTime) {}

    double FlowSchedule::nextDue() const {
        return anchorTime + static_cast<double>(nextIndex - anchorIndex) * currentInterval;
    }

    void FlowSchedule::collect(int flowIndex, double now, double dt, std::vector<SpawnRequest> &out) {
        constexpr double eps = 1e-9;
        while (true) {
            double due = nextDue();
            if (endTime >= 0 && due > endTime + eps)
                return;
            if (due >= now + dt - eps)
                return;
            // spawns that fell before the window (e.g. a schedule created mid-run) are still released
            out.push_back({flowIndex, nextIndex, due});
            ++nextIndex;
        }
    }

    void FlowSchedule::setVolumeScale(double scale) {
        if (!(scale > 0))
            throw ParameterError("volume scale must be positive");
        double next = nextDue();
        anchorTime = next;
        anchorIndex = nextIndex;
        currentInterval = baseInterval / scale;
        (void)base;
    }

    std::vector<SpawnRequest> dueSpawns(std::vector<FlowSchedule> &schedules, double now, double dt) {
        std::vector<SpawnRequest> out;
        for (std::size_t i = 0; i < schedules.size(); ++i)
            schedules[i].collect(static_cast<int>(i), now, dt, out);
        return out;
    }

    InsertionDecision tryInsert(const VehicleParams &params, double laneMaxSpeed,
                                const std::optional<RearVehicle> &last, double dt) {
        double full = std::min(laneMaxSpeed, params.maxSpeed);
        if (!last)
            return {true, full};
        double bumper = last->pos - last->length;
        if (bumper <= params.minGap)
            return {false, 0.0};
        double gap = bumper - params.minGap;
        double safe = noCollisionSpeed(full, last->speed, params.maxNegAcc, last->maxNegAcc, gap, dt);
        double headway = headwaySpeed(bumper, params.headwayTime, params.minGap);
        if (safe >= full && headway >= full)
            return {true, full};
        // largest v with noCollisionSpeed(v, ...) >= v: v^2/(2 dF) + v dt - (vL^2/(2 dL) + gap) = 0
        double reach = last->speed * last->speed / (2 * last->maxNegAcc) + gap;
        double a = 1 / (2 * params.maxNegAcc);
        double v = (-dt + std::sqrt(dt * dt + 4 * a * reach)) / (2 * a);
        v = std::clamp(std::min(v, headway), 0.0, full);
        return {true, v};
    }

}
