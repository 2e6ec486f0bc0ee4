#pragma once

#include "trafficsim/geometry.h"

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace trafficsim {

    // Roads, lanes, lanelinks and intersections are addressed by dense indices into the
    // RoadNet's vectors. String ids are kept for files and observations.

    struct Segment {
        int lane = -1;
        double startPos = 0.0;
        double endPos = 0.0;
    };

    struct Lane {
        std::string id;
        int road = -1;
        int index = 0; // 0 = innermost
        double width = 0.0;
        double maxSpeed = 0.0;
        double length = 0.0;
        Polyline path;
        std::vector<Segment> segments;
        std::vector<int> outLinks;
        std::vector<int> inLinks;
    };

    struct Road {
        std::string id;
        int startIntersection = -1;
        int endIntersection = -1;
        std::vector<Point> points;
        std::vector<int> lanes; // global lane indices ordered by lane index
    };

    enum class RoadLinkKind { Straight, TurnLeft, TurnRight };

    std::string_view toString(RoadLinkKind kind);
    RoadLinkKind roadLinkKindFromString(std::string_view text);
    int defaultPriority(RoadLinkKind kind);

    struct LaneLink {
        std::string id;
        int intersection = -1;
        int roadLink = -1;
        int startLane = -1;
        int endLane = -1;
        Polyline path;
        double length = 0.0;
        double maxSpeed = 0.0;
        std::vector<int> crossPoints; // sorted by distance along this link
    };

    struct RoadLink {
        std::string id;
        int intersection = -1;
        int startRoad = -1;
        int endRoad = -1;
        RoadLinkKind kind = RoadLinkKind::Straight;
        int priority = 2;
        bool priorityOverridden = false;
        std::vector<int> laneLinks;
    };

    struct SignalPhase {
        std::vector<int> availableRoadLinks; // indices into Intersection::roadLinks
        double time = 0.0;
    };

    struct CrossPoint {
        int id = -1;
        int intersection = -1;
        int laneLinkA = -1;
        int laneLinkB = -1;
        double distA = 0.0;
        double distB = 0.0;
        double angle = 0.0;

        double distanceOn(int laneLink) const { return laneLink == laneLinkA ? distA : distB; }
        int other(int laneLink) const { return laneLink == laneLinkA ? laneLinkB : laneLinkA; }
    };

    struct Intersection {
        std::string id;
        Point center;
        bool isVirtual = false;
        std::vector<int> roadLinks; // global roadlink indices
        std::vector<SignalPhase> phases;
        std::vector<int> laneLinks;
        std::vector<int> crossPoints;
    };

    class RoadNet {
    public:
        std::vector<Intersection> intersections;
        std::vector<Road> roads;
        std::vector<Lane> lanes;
        std::vector<RoadLink> roadLinks;
        std::vector<LaneLink> laneLinks;
        std::vector<CrossPoint> crossPoints;
        double segmentLength = 10.0;

        // Rebuilds derived data (lane geometry, segments, link adjacency, cross points, indices)
        // from the primary fields. Throws SemanticError on dangling references or degenerate paths.
        void finalize();

        int findRoad(std::string_view id) const;
        int findLane(std::string_view id) const;
        int findLaneLink(std::string_view id) const;
        int findIntersection(std::string_view id) const;

        // Lanelink from `lane` towards `road`, or -1 if the lane does not serve it. With several
        // candidates, prefers an end lane that serves `nextRoad`, then the end lane whose index is
        // closest to the start lane's.
        int laneLinkFor(int lane, int road, int nextRoad = -1) const;
        bool laneServes(int lane, int road) const { return laneLinkFor(lane, road) >= 0; }
        bool roadsConnected(int from, int to) const;

        int drivableCount() const { return static_cast<int>(lanes.size() + laneLinks.size()); }
        bool isLaneLink(int drivable) const { return drivable >= static_cast<int>(lanes.size()); }
        int laneLinkOf(int drivable) const { return drivable - static_cast<int>(lanes.size()); }
        int drivableOfLaneLink(int laneLink) const { return laneLink + static_cast<int>(lanes.size()); }
        double drivableLength(int drivable) const;
        double drivableMaxSpeed(int drivable) const;
        const Polyline &drivablePath(int drivable) const;
        const std::string &drivableId(int drivable) const;

    private:
        void buildLaneGeometry();
        void buildLinks();
        void buildIndices();

        std::unordered_map<std::string, int> roadIndex, laneIndex, laneLinkIndex, intersectionIndex;
        // (lane, road) -> lanelinks in declaration order
        std::unordered_map<long long, std::vector<int>> laneToRoadLink;
        struct LinkChoice {
            int road, nextRoad, laneLink; // nextRoad -1: the choice for any other next road
        };
        std::vector<std::vector<LinkChoice>> linkChoices; // per lane
        int chooseLaneLink(int lane, int road, int nextRoad) const;
    };

    std::string laneIdOf(const std::string &roadId, int index);
    std::string laneLinkIdOf(const std::string &startLane, const std::string &endLane);

    // Lane segment holding `pos`: floor(pos / segmentLength) clamped to the last segment.
    // Throws ParameterError when pos is outside [0, lane.length].
    int segmentOf(const Lane &lane, double pos, double segmentLength);

    // Conflict points between lanelinks of one intersection. Pairs that share a start lane are
    // skipped. Ordered by (laneLinkA id, laneLinkB id) with laneLinkA id < laneLinkB id.
    // Throws SemanticError naming a lanelink whose path has a zero-length piece.
    std::vector<CrossPoint> computeCrossPoints(const RoadNet &net, int intersection);

    enum class Severity { Warning, Error };

    struct Diagnostic {
        Severity severity;
        std::string entity;
        std::string message;
    };

    std::vector<Diagnostic> validate(const RoadNet &net);

    RoadNet parseRoadNet(std::string_view text, double segmentLength = 10.0);
    RoadNet loadRoadNet(const std::string &path, double segmentLength = 10.0);
    nlohmann::json toJson(const RoadNet &net);
    std::string serializeRoadNet(const RoadNet &net);

    // Geometry-only document consumed by the viewer.
    nlohmann::json roadnetLog(const RoadNet &net);

    enum class PhasePlan { Standard, TwoPhase, AllGreen };

    PhasePlan phasePlanFromString(std::string_view text);
    std::string_view toString(PhasePlan plan);

    struct GridParams {
        double roadLength = 300.0;
        int lanesPerRoad = 3;
        double laneWidth = 4.0;
        double maxSpeed = 11.11;
        PhasePlan phasePlan = PhasePlan::Standard;
        double phaseTime = 30.0;
    };

    // rows x cols signalised intersections named intersection_{x}_{y} (x in 1..cols, y in 1..rows)
    // ringed by virtual boundary intersections. Roads are road_{x}_{y}_{dir} where (x, y) is the
    // start intersection and dir is 0 east, 1 north, 2 west, 3 south.
    RoadNet buildGrid(int rows, int cols, const GridParams &params = {}, double segmentLength = 10.0);

}
