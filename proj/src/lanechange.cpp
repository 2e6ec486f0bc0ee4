#include "trafficsim/lanechange.h"
#include "trafficsim/error.h"

#include <algorithm>
#include <cmath>

namespace trafficsim {

    void LaneChangeState::signal(int targetLane, LaneChangeReason reason) {
        if (current == LaneChangePhase::Executing)
            throw ContractError("lane change already executing");
        current = LaneChangePhase::Signaled;
        target = targetLane;
        why = reason;
    }

    void LaneChangeState::reject() {
        if (current == LaneChangePhase::Executing)
            throw ContractError("cannot reject an executing lane change");
        *this = LaneChangeState{};
    }

    void LaneChangeState::begin(int shadow) {
        if (current == LaneChangePhase::Executing)
            throw ContractError("lane change already executing");
        if (current != LaneChangePhase::Signaled)
            throw ContractError("lane change was not signaled");
        current = LaneChangePhase::Executing;
        shadowHandle = shadow;
        progress = 0.0;
    }

    bool LaneChangeState::advance(double dt, double duration) {
        if (current != LaneChangePhase::Executing)
            throw ContractError("no lane change executing");
        progress = std::min(1.0, progress + dt / duration);
        return progress >= 1.0 - 1e-9;
    }

    void LaneChangeState::finish() {
        if (current != LaneChangePhase::Executing)
            throw ContractError("no lane change executing");
        *this = LaneChangeState{};
    }

    std::optional<ChangeIntent> changeUrge(const LaneOption &current, const std::vector<LaneOption> &adjacent,
                                           const std::optional<LaneOption> &towardsServing,
                                           const LaneChangeSettings &settings) {
        if (!current.servesRoute) {
            if (towardsServing && towardsServing->followerSafe)
                return ChangeIntent{towardsServing->lane, LaneChangeReason::Route};
            return std::nullopt;
        }
        const LaneOption *best = nullptr;
        for (const auto &opt : adjacent) {
            if (!opt.servesRoute || !opt.followerSafe)
                continue;
            if (std::isinf(current.leaderGap))
                continue;
            if (!(opt.leaderGap > current.leaderGap + settings.gainThreshold))
                continue;
            if (!best || opt.leaderGap > best->leaderGap)
                best = &opt;
        }
        if (best)
            return ChangeIntent{best->lane, LaneChangeReason::SpeedGain};
        return std::nullopt;
    }

    bool insertionSafe(const GapCheck &check, double dt) {
        if (check.gap <= check.follower->minGap)
            return false;
        double s = noCollisionSpeed(check.followerSpeed, check.leaderSpeed, check.follower->maxNegAcc,
                                    check.leader->maxNegAcc, check.gap - check.follower->minGap, dt);
        return s >= check.followerSpeed - check.follower->usualNegAcc * dt;
    }

}
