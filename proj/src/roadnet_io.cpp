#include "trafficsim/roadnet.h"
#include "trafficsim/error.h"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace trafficsim {

    using nlohmann::json;

    namespace {

        const json &require(const json &obj, const char *key, const std::string &path) {
            if (!obj.is_object())
                throw ParseError(path + ": expected an object");
            auto it = obj.find(key);
            if (it == obj.end())
                throw ParseError(path + ": missing required field '" + key + "'");
            return *it;
        }

        template <class T>
        T requireAs(const json &obj, const char *key, const std::string &path) {
            const json &v = require(obj, key, path);
            try {
                return v.get<T>();
            } catch (const json::exception &) {
                throw ParseError(path + "/" + key + ": wrong type");
            }
        }

        const json &requireArray(const json &obj, const char *key, const std::string &path) {
            const json &v = require(obj, key, path);
            if (!v.is_array())
                throw ParseError(path + "/" + key + ": expected an array");
            return v;
        }

        Point parsePoint(const json &v, const std::string &path) {
            return {requireAs<double>(v, "x", path), requireAs<double>(v, "y", path)};
        }

        std::vector<Point> parsePoints(const json &arr, const std::string &path) {
            std::vector<Point> out;
            for (std::size_t i = 0; i < arr.size(); ++i)
                out.push_back(parsePoint(arr[i], path + "/" + std::to_string(i)));
            return out;
        }

        json pointJson(const Point &p) { return json{{"x", p.x}, {"y", p.y}}; }

        json pointsJson(const std::vector<Point> &pts) {
            json arr = json::array();
            for (const auto &p : pts)
                arr.push_back(pointJson(p));
            return arr;
        }
    }

    RoadNet parseRoadNet(std::string_view text, double segmentLength) {
        json doc;
        try {
            doc = json::parse(text.begin(), text.end());
        } catch (const json::parse_error &e) {
            throw ParseError(std::string("roadnet syntax error: ") + e.what(), e.byte);
        }
        RoadNet net;
        net.segmentLength = segmentLength;

        const json &inters = requireArray(doc, "intersections", "");
        const json &roads = requireArray(doc, "roads", "");

        for (std::size_t i = 0; i < inters.size(); ++i) {
            std::string path = "/intersections/" + std::to_string(i);
            Intersection inter;
            inter.id = requireAs<std::string>(inters[i], "id", path);
            inter.center = parsePoint(require(inters[i], "point", path), path + "/point");
            inter.isVirtual = requireAs<bool>(inters[i], "virtual", path);
            net.intersections.push_back(std::move(inter));
        }
        std::unordered_map<std::string, int> interIdx;
        for (int i = 0; i < static_cast<int>(net.intersections.size()); ++i)
            interIdx.emplace(net.intersections[i].id, i);

        std::unordered_map<std::string, int> roadIdx;
        for (std::size_t r = 0; r < roads.size(); ++r) {
            std::string path = "/roads/" + std::to_string(r);
            const json &rj = roads[r];
            Road road;
            road.id = requireAs<std::string>(rj, "id", path);
            for (const char *key : {"startIntersection", "endIntersection"}) {
                auto name = requireAs<std::string>(rj, key, path);
                auto it = interIdx.find(name);
                if (it == interIdx.end())
                    throw SemanticError(path + ": unknown intersection " + name);
                (std::string_view(key) == "startIntersection" ? road.startIntersection : road.endIntersection) = it->second;
            }
            road.points = parsePoints(requireArray(rj, "points", path), path + "/points");
            const json &lanes = requireArray(rj, "lanes", path);
            int roadIndex = static_cast<int>(net.roads.size());
            for (std::size_t l = 0; l < lanes.size(); ++l) {
                std::string lp = path + "/lanes/" + std::to_string(l);
                Lane lane;
                lane.road = roadIndex;
                lane.index = static_cast<int>(l);
                lane.width = requireAs<double>(lanes[l], "width", lp);
                lane.maxSpeed = requireAs<double>(lanes[l], "maxSpeed", lp);
                road.lanes.push_back(static_cast<int>(net.lanes.size()));
                net.lanes.push_back(std::move(lane));
            }
            if (!roadIdx.emplace(road.id, roadIndex).second)
                throw SemanticError(path + ": duplicate road id " + road.id);
            net.roads.push_back(std::move(road));
        }

        auto findRoad = [&](const std::string &name, const std::string &path) {
            auto it = roadIdx.find(name);
            if (it == roadIdx.end())
                throw SemanticError(path + ": unknown road " + name);
            return it->second;
        };
        auto laneOf = [&](int road, int index, const std::string &path) {
            const Road &rd = net.roads[road];
            if (index < 0 || index >= static_cast<int>(rd.lanes.size()))
                throw SemanticError(path + ": unknown lane " + laneIdOf(rd.id, index));
            return rd.lanes[index];
        };

        for (std::size_t i = 0; i < inters.size(); ++i) {
            std::string path = "/intersections/" + std::to_string(i);
            const json &ij = inters[i];
            Intersection &inter = net.intersections[i];
            const json &rls = requireArray(ij, "roadLinks", path);
            for (std::size_t k = 0; k < rls.size(); ++k) {
                std::string rp = path + "/roadLinks/" + std::to_string(k);
                const json &rj = rls[k];
                RoadLink rl;
                rl.id = inter.id + "_rl" + std::to_string(k);
                rl.intersection = static_cast<int>(i);
                rl.kind = roadLinkKindFromString(requireAs<std::string>(rj, "type", rp));
                rl.startRoad = findRoad(requireAs<std::string>(rj, "startRoad", rp), rp);
                rl.endRoad = findRoad(requireAs<std::string>(rj, "endRoad", rp), rp);
                rl.priority = defaultPriority(rl.kind);
                if (auto it = rj.find("priority"); it != rj.end()) {
                    rl.priority = it->get<int>();
                    rl.priorityOverridden = true;
                }
                int rlIndex = static_cast<int>(net.roadLinks.size());
                const json &lls = requireArray(rj, "laneLinks", rp);
                for (std::size_t m = 0; m < lls.size(); ++m) {
                    std::string lp = rp + "/laneLinks/" + std::to_string(m);
                    LaneLink link;
                    link.intersection = static_cast<int>(i);
                    link.roadLink = rlIndex;
                    link.startLane = laneOf(rl.startRoad, requireAs<int>(lls[m], "startLaneIndex", lp), lp);
                    link.endLane = laneOf(rl.endRoad, requireAs<int>(lls[m], "endLaneIndex", lp), lp);
                    link.path = Polyline(parsePoints(requireArray(lls[m], "points", lp), lp + "/points"));
                    rl.laneLinks.push_back(static_cast<int>(net.laneLinks.size()));
                    net.laneLinks.push_back(std::move(link));
                }
                inter.roadLinks.push_back(rlIndex);
                net.roadLinks.push_back(std::move(rl));
            }
            auto tl = ij.find("trafficLight");
            if (tl != ij.end() && !tl->is_null()) {
                const json &phases = requireArray(*tl, "lightphases", path + "/trafficLight");
                for (std::size_t p = 0; p < phases.size(); ++p) {
                    std::string pp = path + "/trafficLight/lightphases/" + std::to_string(p);
                    SignalPhase phase;
                    phase.time = requireAs<double>(phases[p], "time", pp);
                    phase.availableRoadLinks = requireAs<std::vector<int>>(phases[p], "availableRoadLinks", pp);
                    for (int rl : phase.availableRoadLinks)
                        if (rl < 0 || rl >= static_cast<int>(inter.roadLinks.size()))
                            throw SemanticError(pp + ": unknown roadlink index " + std::to_string(rl));
                    inter.phases.push_back(std::move(phase));
                }
            } else if (!inter.isVirtual) {
                throw ParseError(path + ": missing required field 'trafficLight'");
            }
            if (!inter.isVirtual && inter.phases.empty())
                throw SemanticError(path + ": signalised intersection " + inter.id + " has no phases");
        }

        net.finalize();
        return net;
    }

    RoadNet loadRoadNet(const std::string &path, double segmentLength) {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open roadnet file: " + path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        try {
            return parseRoadNet(buffer.str(), segmentLength);
        } catch (const ParseError &e) {
            throw ParseError(path + ": " + e.what());
        } catch (const SemanticError &e) {
            throw SemanticError(path + ": " + e.what());
        }
    }

    json toJson(const RoadNet &net) {
        json inters = json::array();
        for (const auto &inter : net.intersections) {
            json rls = json::array();
            for (int rlIdx : inter.roadLinks) {
                const RoadLink &rl = net.roadLinks[rlIdx];
                json lls = json::array();
                for (int l : rl.laneLinks) {
                    const LaneLink &link = net.laneLinks[l];
                    lls.push_back({{"startLaneIndex", net.lanes[link.startLane].index},
                                   {"endLaneIndex", net.lanes[link.endLane].index},
                                   {"points", pointsJson(link.path.points())}});
                }
                json rj = {{"type", toString(rl.kind)},
                           {"startRoad", net.roads[rl.startRoad].id},
                           {"endRoad", net.roads[rl.endRoad].id},
                           {"laneLinks", std::move(lls)}};
                if (rl.priorityOverridden)
                    rj["priority"] = rl.priority;
                rls.push_back(std::move(rj));
            }
            json ij = {{"id", inter.id},
                       {"point", pointJson(inter.center)},
                       {"virtual", inter.isVirtual},
                       {"roadLinks", std::move(rls)}};
            if (!inter.isVirtual || !inter.phases.empty()) {
                json phases = json::array();
                for (const auto &p : inter.phases)
                    phases.push_back({{"availableRoadLinks", p.availableRoadLinks}, {"time", p.time}});
                ij["trafficLight"] = {{"lightphases", std::move(phases)}};
            }
            inters.push_back(std::move(ij));
        }
        json roads = json::array();
        for (const auto &road : net.roads) {
            json lanes = json::array();
            for (int l : road.lanes)
                lanes.push_back({{"width", net.lanes[l].width}, {"maxSpeed", net.lanes[l].maxSpeed}});
            roads.push_back({{"id", road.id},
                             {"startIntersection", net.intersections[road.startIntersection].id},
                             {"endIntersection", net.intersections[road.endIntersection].id},
                             {"points", pointsJson(road.points)},
                             {"lanes", std::move(lanes)}});
        }
        return json{{"intersections", std::move(inters)}, {"roads", std::move(roads)}};
    }

    std::string serializeRoadNet(const RoadNet &net) { return toJson(net).dump(2); }

    json roadnetLog(const RoadNet &net) {
        json inters = json::array();
        for (const auto &inter : net.intersections) {
            json links = json::array();
            for (int l : inter.laneLinks)
                links.push_back({{"id", net.laneLinks[l].id}, {"points", pointsJson(net.laneLinks[l].path.points())}});
            inters.push_back({{"id", inter.id},
                              {"point", pointJson(inter.center)},
                              {"virtual", inter.isVirtual},
                              {"laneLinks", std::move(links)}});
        }
        json roads = json::array();
        for (const auto &road : net.roads) {
            json lanes = json::array();
            for (int l : road.lanes)
                lanes.push_back({{"id", net.lanes[l].id},
                                 {"width", net.lanes[l].width},
                                 {"points", pointsJson(net.lanes[l].path.points())}});
            roads.push_back({{"id", road.id}, {"points", pointsJson(road.points)}, {"lanes", std::move(lanes)}});
        }
        json order = json::array();
        for (const auto &link : net.laneLinks)
            order.push_back(link.id);
        return json{{"static", {{"intersections", std::move(inters)}, {"roads", std::move(roads)}}},
                    {"signalOrder", std::move(order)}};
    }

}
