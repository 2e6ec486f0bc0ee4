#pragma once

#include "trafficsim/kinematics.h"
#include "trafficsim/roadnet.h"

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trafficsim {

    struct FlowSpec {
        VehicleParams vehicle;
        std::vector<int> route; // road indices
        double interval = 1.0;
        double startTime = 0.0;
        double endTime = -1.0;  // negative: unbounded
        std::optional<int> entryLane; // fixed lane index; round robin when absent
    };

    // Checks that consecutive roads are joined by at least one lanelink; the message names the
    // first broken hop. Returns an empty string when connected.
    std::string routeProblem(const RoadNet &net, const std::vector<int> &route);

    // Validated flows. Throws ParseError on syntax and SemanticError on unknown or disconnected roads.
    std::vector<FlowSpec> parseFlow(std::string_view text, const RoadNet &net);
    std::vector<FlowSpec> loadFlow(const std::string &path, const RoadNet &net);
    std::string serializeFlows(const std::vector<FlowSpec> &flows, const RoadNet &net);

    struct SpawnRequest {
        int flow = -1;        // -1 for vehicles pushed through the API
        std::uint64_t index = 0; // spawn number within the flow
        double dueTime = 0.0;
    };

    // Spawn clock of one flow. Spawn k is due at anchor + (k - anchorIndex) * interval; rescaling
    // re-anchors at the next pending spawn so the change applies from the following cycle.
    class FlowSchedule {
    public:
        explicit FlowSchedule(const FlowSpec &spec);

        // Spawns due in [now, now + dt), not after endTime.
        void collect(int flowIndex, double now, double dt, std::vector<SpawnRequest> &out);

        void setVolumeScale(double scale);
        double interval() const { return currentInterval; }

    private:
        double nextDue() const;

        double base;
        double endTime;
        double baseInterval;
        double currentInterval;
        double anchorTime;
        std::uint64_t anchorIndex = 0;
        std::uint64_t nextIndex = 0;
    };

    // Every flow's due spawns in [now, now+dt), ordered by (flow index, due time).
    std::vector<SpawnRequest> dueSpawns(std::vector<FlowSchedule> &schedules, double now, double dt);

    struct InsertionDecision {
        bool inserted = false;
        double speed = 0.0;
    };

    struct RearVehicle {
        double pos;    // front position of the last vehicle on the lane
        double length;
        double speed;
        double maxNegAcc;
    };

    // Insertion at position 0: full allowed speed when the gap to the last vehicle allows it,
    // otherwise the largest safe speed if the bumper gap exceeds minGap, otherwise queue.
    InsertionDecision tryInsert(const VehicleParams &params, double laneMaxSpeed,
                                const std::optional<RearVehicle> &last, double dt);

}
