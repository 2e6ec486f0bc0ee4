#include "trafficsim/error.h"
#include "trafficsim/roadnet.h"

#include <algorithm>
#include <array>
#include <map>

namespace trafficsim {

    PhasePlan phasePlanFromString(std::string_view text) {
        if (text == "standard")
            return PhasePlan::Standard;
        if (text == "two-phase" || text == "twoPhase")
            return PhasePlan::TwoPhase;
        if (text == "all-green" || text == "allGreen")
            return PhasePlan::AllGreen;
        throw ParameterError("unknown phase plan: " + std::string(text));
    }

    std::string_view toString(PhasePlan plan) {
        switch (plan) {
            case PhasePlan::Standard: return "standard";
            case PhasePlan::TwoPhase: return "two-phase";
            case PhasePlan::AllGreen: return "all-green";
        }
        return "standard";
    }

    namespace {
        constexpr std::array<Point, 4> kDirs{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
        constexpr std::array<int, 4> kDx{1, 0, -1, 0};
        constexpr std::array<int, 4> kDy{0, 1, 0, -1};
    }

    RoadNet buildGrid(int rows, int cols, const GridParams &params, double segmentLength) {
        if (rows < 1 || cols < 1)
            throw ParameterError("grid dimensions must be positive");
        if (!(params.roadLength > 0) || params.lanesPerRoad < 1 || !(params.laneWidth > 0) ||
            !(params.maxSpeed > 0) || !(params.phaseTime > 0))
            throw ParameterError("grid parameters must be positive");

        const double half = params.lanesPerRoad * params.laneWidth;
        const double spacing = params.roadLength + 2 * half;
        auto coord = [&](int i, int count) {
            if (i == 0)
                return -(params.roadLength + half);
            if (i == count + 1)
                return (count - 1) * spacing + params.roadLength + half;
            return (i - 1) * spacing;
        };
        auto isInternal = [&](int x, int y) { return x >= 1 && x <= cols && y >= 1 && y <= rows; };
        auto exists = [&](int x, int y) {
            if (isInternal(x, y))
                return true;
            bool edgeX = (x == 0 || x == cols + 1) && y >= 1 && y <= rows;
            bool edgeY = (y == 0 || y == rows + 1) && x >= 1 && x <= cols;
            return edgeX || edgeY;
        };

        RoadNet net;
        net.segmentLength = segmentLength;
        std::map<std::pair<int, int>, int> nodeIndex;
        for (int y = 0; y <= rows + 1; ++y)
            for (int x = 0; x <= cols + 1; ++x) {
                if (!exists(x, y))
                    continue;
                Intersection inter;
                inter.id = "intersection_" + std::to_string(x) + "_" + std::to_string(y);
                inter.center = {coord(x, cols), coord(y, rows)};
                inter.isVirtual = !isInternal(x, y);
                nodeIndex[{x, y}] = static_cast<int>(net.intersections.size());
                net.intersections.push_back(std::move(inter));
            }

        // road lookup: (x, y, dir) -> road index
        std::map<std::array<int, 3>, int> roadAt;
        for (const auto &[xy, idx] : nodeIndex) {
            auto [x, y] = xy;
            for (int d = 0; d < 4; ++d) {
                int nx = x + kDx[d], ny = y + kDy[d];
                if (!exists(nx, ny) || (!isInternal(x, y) && !isInternal(nx, ny)))
                    continue;
                int to = nodeIndex.at({nx, ny});
                const auto &a = net.intersections[idx];
                const auto &b = net.intersections[to];
                double wa = a.isVirtual ? 0.0 : half;
                double wb = b.isVirtual ? 0.0 : half;
                Road road;
                road.id = "road_" + std::to_string(x) + "_" + std::to_string(y) + "_" + std::to_string(d);
                road.startIntersection = idx;
                road.endIntersection = to;
                road.points = {a.center + kDirs[d] * wa, b.center - kDirs[d] * wb};
                int roadIndex = static_cast<int>(net.roads.size());
                for (int l = 0; l < params.lanesPerRoad; ++l) {
                    Lane lane;
                    lane.road = roadIndex;
                    lane.index = l;
                    lane.width = params.laneWidth;
                    lane.maxSpeed = params.maxSpeed;
                    road.lanes.push_back(static_cast<int>(net.lanes.size()));
                    net.lanes.push_back(lane);
                }
                roadAt[{x, y, d}] = roadIndex;
                net.roads.push_back(std::move(road));
            }
        }

        auto lanePoint = [&](int road, int laneIdx, bool atEnd) {
            const Road &rd = net.roads[road];
            double offset = params.laneWidth * laneIdx + params.laneWidth / 2;
            auto pts = offsetPolyline(rd.points, offset);
            return atEnd ? pts.back() : pts.front();
        };

        const int n = params.lanesPerRoad;
        for (const auto &[xy, idx] : nodeIndex) {
            auto [x, y] = xy;
            if (!isInternal(x, y))
                continue;
            Intersection &inter = net.intersections[idx];
            // groups for phase construction
            std::array<std::vector<int>, 4> straightByDir, leftByDir;
            std::vector<int> rights;
            for (int d = 0; d < 4; ++d) {
                // incoming road travelling in direction d starts at the neighbour behind us
                auto in = roadAt.find({x - kDx[d], y - kDy[d], d});
                if (in == roadAt.end())
                    continue;
                for (int e : {d, (d + 1) % 4, (d + 3) % 4}) {
                    auto out = roadAt.find({x, y, e});
                    if (out == roadAt.end())
                        continue;
                    RoadLink rl;
                    rl.intersection = idx;
                    rl.startRoad = in->second;
                    rl.endRoad = out->second;
                    rl.kind = e == d ? RoadLinkKind::Straight
                                     : (e == (d + 1) % 4 ? RoadLinkKind::TurnLeft : RoadLinkKind::TurnRight);
                    rl.priority = defaultPriority(rl.kind);
                    int local = static_cast<int>(inter.roadLinks.size());
                    rl.id = inter.id + "_rl" + std::to_string(local);
                    // the innermost lane is reserved for left turns once there are two or more;
                    // every movement may end on any lane so routes need no lane changes
                    std::vector<int> starts;
                    if (rl.kind == RoadLinkKind::Straight)
                        for (int l = n >= 2 ? 1 : 0; l < n; ++l)
                            starts.push_back(l);
                    else
                        starts.push_back(rl.kind == RoadLinkKind::TurnLeft ? 0 : n - 1);
                    std::vector<std::pair<int, int>> pairs;
                    for (int from : starts)
                        for (int to = 0; to < n; ++to)
                            pairs.emplace_back(from, to);
                    int rlIndex = static_cast<int>(net.roadLinks.size());
                    for (auto [from, to] : pairs) {
                        LaneLink link;
                        link.intersection = idx;
                        link.roadLink = rlIndex;
                        link.startLane = net.roads[rl.startRoad].lanes[from];
                        link.endLane = net.roads[rl.endRoad].lanes[to];
                        link.path = Polyline(turnPath(lanePoint(rl.startRoad, from, true), kDirs[d],
                                                      lanePoint(rl.endRoad, to, false), kDirs[e]));
                        rl.laneLinks.push_back(static_cast<int>(net.laneLinks.size()));
                        net.laneLinks.push_back(std::move(link));
                    }
                    if (rl.kind == RoadLinkKind::Straight)
                        straightByDir[d].push_back(local);
                    else if (rl.kind == RoadLinkKind::TurnLeft)
                        leftByDir[d].push_back(local);
                    else
                        rights.push_back(local);
                    inter.roadLinks.push_back(rlIndex);
                    net.roadLinks.push_back(std::move(rl));
                }
            }
            auto phaseOf = [&](std::initializer_list<const std::vector<int> *> groups) {
                SignalPhase phase;
                phase.time = params.phaseTime;
                for (const auto *g : groups)
                    phase.availableRoadLinks.insert(phase.availableRoadLinks.end(), g->begin(), g->end());
                std::sort(phase.availableRoadLinks.begin(), phase.availableRoadLinks.end());
                return phase;
            };
            // direction 1/3 travel north/south, 0/2 east/west
            switch (params.phasePlan) {
                case PhasePlan::Standard:
                    inter.phases.push_back(phaseOf({&straightByDir[1], &straightByDir[3], &rights}));
                    inter.phases.push_back(phaseOf({&leftByDir[1], &leftByDir[3], &rights}));
                    inter.phases.push_back(phaseOf({&straightByDir[0], &straightByDir[2], &rights}));
                    inter.phases.push_back(phaseOf({&leftByDir[0], &leftByDir[2], &rights}));
                    break;
                case PhasePlan::TwoPhase: {
                    std::vector<int> ns, ew;
                    for (int local = 0; local < static_cast<int>(inter.roadLinks.size()); ++local) {
                        const RoadLink &rl = net.roadLinks[inter.roadLinks[local]];
                        const std::string &rid = net.roads[rl.startRoad].id;
                        int dir = rid.back() - '0';
                        (dir % 2 == 1 ? ns : ew).push_back(local);
                    }
                    inter.phases.push_back(phaseOf({&ns}));
                    inter.phases.push_back(phaseOf({&ew}));
                    break;
                }
                case PhasePlan::AllGreen: {
                    std::vector<int> all(inter.roadLinks.size());
                    for (std::size_t i = 0; i < all.size(); ++i)
                        all[i] = static_cast<int>(i);
                    inter.phases.push_back(phaseOf({&all}));
                    break;
                }
            }
        }
        net.finalize();
        return net;
    }

}
