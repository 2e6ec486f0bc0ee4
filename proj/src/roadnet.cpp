#include "trafficsim/roadnet.h"
#include "trafficsim/error.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace trafficsim {

    std::string_view toString(RoadLinkKind kind) {
        switch (kind) {
            case RoadLinkKind::Straight: return "go_straight";
            case RoadLinkKind::TurnLeft: return "turn_left";
            case RoadLinkKind::TurnRight: return "turn_right";
        }
        return "go_straight";
    }

    RoadLinkKind roadLinkKindFromString(std::string_view text) {
        if (text == "go_straight" || text == "straight")
            return RoadLinkKind::Straight;
        if (text == "turn_left")
            return RoadLinkKind::TurnLeft;
        if (text == "turn_right")
            return RoadLinkKind::TurnRight;
        throw SemanticError("unknown roadlink type: " + std::string(text));
    }

    int defaultPriority(RoadLinkKind kind) {
        switch (kind) {
            case RoadLinkKind::Straight: return 2;
            case RoadLinkKind::TurnRight: return 1;
            case RoadLinkKind::TurnLeft: return 0;
        }
        return 0;
    }

    std::string laneIdOf(const std::string &roadId, int index) {
        return roadId + "_" + std::to_string(index);
    }

    std::string laneLinkIdOf(const std::string &startLane, const std::string &endLane) {
        return startLane + ">" + endLane;
    }

    int segmentOf(const Lane &lane, double pos, double segmentLength) {
        if (!(pos >= 0.0) || pos > lane.length)
            throw ParameterError("position " + std::to_string(pos) + " outside lane " + lane.id);
        int idx = static_cast<int>(std::floor(pos / segmentLength));
        int last = static_cast<int>(lane.segments.size()) - 1;
        return std::clamp(idx, 0, std::max(last, 0));
    }

    namespace {
        template <class Map>
        int lookup(const Map &map, std::string_view id) {
            auto it = map.find(std::string(id));
            return it == map.end() ? -1 : it->second;
        }

        long long laneRoadKey(int lane, int road) {
            return (static_cast<long long>(lane) << 32) | static_cast<unsigned int>(road);
        }
    }

    int RoadNet::findRoad(std::string_view id) const { return lookup(roadIndex, id); }
    int RoadNet::findLane(std::string_view id) const { return lookup(laneIndex, id); }
    int RoadNet::findLaneLink(std::string_view id) const { return lookup(laneLinkIndex, id); }
    int RoadNet::findIntersection(std::string_view id) const { return lookup(intersectionIndex, id); }

    int RoadNet::chooseLaneLink(int lane, int road, int nextRoad) const {
        auto it = laneToRoadLink.find(laneRoadKey(lane, road));
        if (it == laneToRoadLink.end())
            return -1;
        int best = -1;
        std::pair<bool, int> bestKey{true, 0};
        for (int l : it->second) {
            const Lane &end = lanes[laneLinks[l].endLane];
            bool misses = nextRoad >= 0 && laneToRoadLink.find(laneRoadKey(laneLinks[l].endLane, nextRoad)) ==
                                               laneToRoadLink.end();
            std::pair<bool, int> key{misses, std::abs(end.index - lanes[lane].index)};
            if (best < 0 || key < bestKey) {
                best = l;
                bestKey = key;
            }
        }
        return best;
    }

    int RoadNet::laneLinkFor(int lane, int road, int nextRoad) const {
        int fallback = -1;
        for (const auto &c : linkChoices[lane]) {
            if (c.road != road)
                continue;
            if (c.nextRoad == nextRoad)
                return c.laneLink;
            if (c.nextRoad < 0)
                fallback = c.laneLink;
        }
        return fallback;
    }

    bool RoadNet::roadsConnected(int from, int to) const {
        for (int lane : roads[from].lanes)
            if (laneServes(lane, to))
                return true;
        return false;
    }

    double RoadNet::drivableLength(int drivable) const {
        return isLaneLink(drivable) ? laneLinks[laneLinkOf(drivable)].length : lanes[drivable].length;
    }

    double RoadNet::drivableMaxSpeed(int drivable) const {
        return isLaneLink(drivable) ? laneLinks[laneLinkOf(drivable)].maxSpeed : lanes[drivable].maxSpeed;
    }

    const Polyline &RoadNet::drivablePath(int drivable) const {
        return isLaneLink(drivable) ? laneLinks[laneLinkOf(drivable)].path : lanes[drivable].path;
    }

    const std::string &RoadNet::drivableId(int drivable) const {
        return isLaneLink(drivable) ? laneLinks[laneLinkOf(drivable)].id : lanes[drivable].id;
    }

    void RoadNet::finalize() {
        if (!(segmentLength > 0))
            throw ParameterError("segment length must be positive");
        buildIndices();
        buildLaneGeometry();
        buildLinks();

        crossPoints.clear();
        for (auto &link : laneLinks)
            link.crossPoints.clear();
        for (auto &inter : intersections)
            inter.crossPoints.clear();
        for (int i = 0; i < static_cast<int>(intersections.size()); ++i) {
            for (CrossPoint cp : computeCrossPoints(*this, i)) {
                cp.id = static_cast<int>(crossPoints.size());
                intersections[i].crossPoints.push_back(cp.id);
                laneLinks[cp.laneLinkA].crossPoints.push_back(cp.id);
                laneLinks[cp.laneLinkB].crossPoints.push_back(cp.id);
                crossPoints.push_back(cp);
            }
        }
        for (int l = 0; l < static_cast<int>(laneLinks.size()); ++l) {
            auto &cps = laneLinks[l].crossPoints;
            std::stable_sort(cps.begin(), cps.end(), [&](int a, int b) {
                return crossPoints[a].distanceOn(l) < crossPoints[b].distanceOn(l);
            });
        }
    }

    void RoadNet::buildIndices() {
        intersectionIndex.clear();
        roadIndex.clear();
        for (int i = 0; i < static_cast<int>(intersections.size()); ++i)
            if (!intersectionIndex.emplace(intersections[i].id, i).second)
                throw SemanticError("duplicate intersection id: " + intersections[i].id);
        for (int i = 0; i < static_cast<int>(roads.size()); ++i) {
            const Road &road = roads[i];
            if (!roadIndex.emplace(road.id, i).second)
                throw SemanticError("duplicate road id: " + road.id);
            int n = static_cast<int>(intersections.size());
            if (road.startIntersection < 0 || road.startIntersection >= n)
                throw SemanticError("road " + road.id + " has an unknown start intersection");
            if (road.endIntersection < 0 || road.endIntersection >= n)
                throw SemanticError("road " + road.id + " has an unknown end intersection");
            if (road.points.size() < 2)
                throw SemanticError("road " + road.id + " needs at least two points");
            for (int laneIdx : road.lanes)
                if (laneIdx < 0 || laneIdx >= static_cast<int>(lanes.size()) || lanes[laneIdx].road != i)
                    throw SemanticError("road " + road.id + " has an inconsistent lane list");
        }
    }

    void RoadNet::buildLaneGeometry() {
        laneIndex.clear();
        for (auto &road : roads) {
            double roadLength = Polyline(road.points).length();
            double offset = 0.0;
            for (int laneIdx : road.lanes) {
                Lane &lane = lanes[laneIdx];
                lane.id = laneIdOf(road.id, lane.index);
                lane.length = roadLength;
                lane.path = Polyline(offsetPolyline(road.points, offset + lane.width / 2));
                offset += lane.width;
                lane.segments.clear();
                lane.outLinks.clear();
                lane.inLinks.clear();
                int count = std::max(1, static_cast<int>(std::floor(roadLength / segmentLength)));
                for (int s = 0; s < count; ++s) {
                    double start = s * segmentLength;
                    double end = s + 1 == count ? roadLength : (s + 1) * segmentLength;
                    lane.segments.push_back({laneIdx, start, end});
                }
            }
        }
        for (int i = 0; i < static_cast<int>(lanes.size()); ++i) {
            if (lanes[i].road < 0)
                throw SemanticError("lane " + std::to_string(i) + " belongs to no road");
            if (!laneIndex.emplace(lanes[i].id, i).second)
                throw SemanticError("duplicate lane id: " + lanes[i].id);
        }
    }

    void RoadNet::buildLinks() {
        laneLinkIndex.clear();
        laneToRoadLink.clear();
        for (auto &inter : intersections)
            inter.laneLinks.clear();
        int nLanes = static_cast<int>(lanes.size());
        for (int l = 0; l < static_cast<int>(laneLinks.size()); ++l) {
            LaneLink &link = laneLinks[l];
            if (link.startLane < 0 || link.startLane >= nLanes || link.endLane < 0 || link.endLane >= nLanes)
                throw SemanticError("lanelink " + std::to_string(l) + " references an unknown lane");
            link.id = laneLinkIdOf(lanes[link.startLane].id, lanes[link.endLane].id);
            link.length = link.path.length();
            link.maxSpeed = std::min(lanes[link.startLane].maxSpeed, lanes[link.endLane].maxSpeed);
            if (!laneLinkIndex.emplace(link.id, l).second)
                throw SemanticError("duplicate lanelink: " + link.id);
            lanes[link.startLane].outLinks.push_back(l);
            lanes[link.endLane].inLinks.push_back(l);
            intersections[link.intersection].laneLinks.push_back(l);
            laneToRoadLink[laneRoadKey(link.startLane, lanes[link.endLane].road)].push_back(l);
        }
        linkChoices.assign(lanes.size(), {});
        for (int lane = 0; lane < nLanes; ++lane) {
            std::vector<int> reached;
            for (int l : lanes[lane].outLinks)
                reached.push_back(lanes[laneLinks[l].endLane].road);
            std::sort(reached.begin(), reached.end());
            reached.erase(std::unique(reached.begin(), reached.end()), reached.end());
            for (int road : reached) {
                int fallback = chooseLaneLink(lane, road, -1);
                linkChoices[lane].push_back({road, -1, fallback});
                std::vector<int> after;
                for (int l : laneToRoadLink[laneRoadKey(lane, road)])
                    for (int m : lanes[laneLinks[l].endLane].outLinks)
                        after.push_back(lanes[laneLinks[m].endLane].road);
                std::sort(after.begin(), after.end());
                after.erase(std::unique(after.begin(), after.end()), after.end());
                for (int next : after)
                    if (int choice = chooseLaneLink(lane, road, next); choice != fallback)
                        linkChoices[lane].push_back({road, next, choice});
            }
        }
    }

    std::vector<CrossPoint> computeCrossPoints(const RoadNet &net, int intersection) {
        const auto &links = net.intersections[intersection].laneLinks;
        std::vector<int> ordered(links.begin(), links.end());
        std::sort(ordered.begin(), ordered.end(),
                  [&](int a, int b) { return net.laneLinks[a].id < net.laneLinks[b].id; });
        for (int l : ordered) {
            const auto &link = net.laneLinks[l];
            if (link.path.segmentCount() == 0 || !(link.path.minSegmentLength() > 0))
                throw SemanticError("degenerate lanelink path: " + link.id);
        }
        std::vector<CrossPoint> out;
        for (std::size_t i = 0; i < ordered.size(); ++i) {
            for (std::size_t j = i + 1; j < ordered.size(); ++j) {
                const auto &a = net.laneLinks[ordered[i]];
                const auto &b = net.laneLinks[ordered[j]];
                if (a.startLane == b.startLane)
                    continue;
                auto hit = firstIntersection(a.path, b.path);
                if (!hit)
                    continue;
                CrossPoint cp;
                cp.intersection = intersection;
                cp.laneLinkA = ordered[i];
                cp.laneLinkB = ordered[j];
                cp.distA = hit->distA;
                cp.distB = hit->distB;
                cp.angle = hit->angle;
                out.push_back(cp);
            }
        }
        return out;
    }

    std::vector<Diagnostic> validate(const RoadNet &net) {
        std::vector<Diagnostic> out;
        auto error = [&](const std::string &entity, std::string message) {
            out.push_back({Severity::Error, entity, std::move(message)});
        };
        constexpr double joinTolerance = 0.01;

        for (const auto &road : net.roads) {
            if (road.points.size() < 2)
                error(road.id, "road polyline needs at least two points");
            for (const auto &p : road.points)
                if (!p.isFinite())
                    error(road.id, "non-finite road point");
            if (road.lanes.empty())
                error(road.id, "road has no lanes");
            if (road.startIntersection == road.endIntersection)
                error(road.id, "road starts and ends at the same intersection");
        }
        for (const auto &lane : net.lanes) {
            if (!(lane.maxSpeed > 0))
                error(lane.id, "lane maxSpeed must be positive");
            if (!(lane.width > 0))
                error(lane.id, "lane width must be positive");
            if (!(lane.length > 0)) {
                error(lane.id, "lane length must be positive");
                continue;
            }
            double cursor = 0.0;
            bool tiled = !lane.segments.empty();
            for (std::size_t s = 0; s < lane.segments.size(); ++s) {
                const auto &seg = lane.segments[s];
                if (std::abs(seg.startPos - cursor) > 1e-9 || !(seg.endPos > seg.startPos))
                    tiled = false;
                if (s + 1 < lane.segments.size() && std::abs(seg.endPos - seg.startPos - net.segmentLength) > 1e-9)
                    tiled = false;
                cursor = seg.endPos;
            }
            if (!tiled || std::abs(cursor - lane.length) > 1e-9)
                error(lane.id, "segments do not tile the lane");
        }
        for (const auto &inter : net.intersections) {
            if (!inter.center.isFinite())
                error(inter.id, "non-finite intersection point");
            if (!inter.isVirtual && inter.phases.empty())
                error(inter.id, "signalised intersection has no phases");
            for (std::size_t p = 0; p < inter.phases.size(); ++p)
                for (int rl : inter.phases[p].availableRoadLinks)
                    if (rl < 0 || rl >= static_cast<int>(inter.roadLinks.size()))
                        error(inter.id, "phase " + std::to_string(p) + " references unknown roadlink " + std::to_string(rl));
        }
        for (const auto &rl : net.roadLinks) {
            if (rl.laneLinks.empty())
                error(rl.id, "roadlink has no lanelinks");
            const auto &start = net.roads[rl.startRoad];
            const auto &end = net.roads[rl.endRoad];
            if (start.endIntersection != rl.intersection || end.startIntersection != rl.intersection)
                error(rl.id, "roadlink roads do not meet at its intersection");
        }
        for (const auto &link : net.laneLinks) {
            if (!(link.length > 0)) {
                error(link.id, "lanelink length must be positive");
                continue;
            }
            const auto &from = net.lanes[link.startLane].path.points();
            const auto &to = net.lanes[link.endLane].path.points();
            const auto &pts = link.path.points();
            if (distance(pts.front(), from.back()) > joinTolerance)
                error(link.id, "lanelink does not start at the end of its start lane");
            if (distance(pts.back(), to.front()) > joinTolerance)
                error(link.id, "lanelink does not end at the start of its end lane");
        }
        return out;
    }

}
