#pragma once

#include "trafficsim/kinematics.h"

#include <optional>
#include <vector>

namespace trafficsim {

    enum class LaneChangePhase { None, Signaled, Executing };
    enum class LaneChangeReason { Route, SpeedGain };

    struct LaneChangeSettings {
        double gainThreshold = 10.0;  // metres of extra leader gap
        double duration = 2.0;        // seconds of coupled movement
        double cooldown = 5.0;        // seconds between changes
    };

    class LaneChangeState {
    public:
        LaneChangePhase phase() const { return current; }
        int targetLane() const { return target; }
        int shadow() const { return shadowHandle; }
        double lateralProgress() const { return progress; }
        LaneChangeReason reason() const { return why; }

        void signal(int targetLane, LaneChangeReason reason);
        void reject();
        // Throws ContractError when a change is already executing.
        void begin(int shadowHandle);
        // Adds dt of coupled movement; returns true once the manoeuvre is complete.
        bool advance(double dt, double duration);
        void finish();

    private:
        LaneChangePhase current = LaneChangePhase::None;
        int target = -1;
        int shadowHandle = -1;
        double progress = 0.0;
        LaneChangeReason why = LaneChangeReason::Route;
    };

    // What a vehicle knows about one lane when deciding to change.
    struct LaneOption {
        int lane = -1;
        bool servesRoute = true;
        double leaderGap = 0.0;      // bumper gap to the leader, +inf when none
        bool followerSafe = true;    // target follower could accept a shadow here
    };

    struct ChangeIntent {
        int targetLane;
        LaneChangeReason reason;
    };

    // Route rule first: if the current lane cannot continue the route, move one lane towards the
    // nearest serving lane (`towardsServing` are the adjacent options on the side of that lane).
    // Otherwise speed gain: an adjacent lane that also serves the route and offers at least
    // gainThreshold more leader gap, with a follower that can accept the shadow.
    std::optional<ChangeIntent> changeUrge(const LaneOption &current, const std::vector<LaneOption> &adjacent,
                                           const std::optional<LaneOption> &towardsServing,
                                           const LaneChangeSettings &settings = {});

    struct GapCheck {
        double gap;            // bumper gap
        double followerSpeed;
        double leaderSpeed;
        const VehicleParams *follower;
        const VehicleParams *leader;
    };

    // Safe when the follower's next safe speed behind the leader stays at or above its current
    // speed minus usualNegAcc * dt.
    bool insertionSafe(const GapCheck &check, double dt);

    inline double coupleSpeeds(double vehicleSpeed, double shadowSpeed) {
        return vehicleSpeed < shadowSpeed ? vehicleSpeed : shadowSpeed;
    }

}
