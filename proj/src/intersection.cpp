#include "trafficsim/intersection.h"
#include "trafficsim/error.h"

#include <algorithm>

namespace trafficsim {

    std::optional<double> signalConstraint(SignalColor color, double distToStopLine, double v,
                                           const VehicleParams &params, double dt) {
        switch (color) {
            case SignalColor::Green:
                return std::nullopt;
            case SignalColor::Red:
                return stopSpeedFrom(v, distToStopLine, params.maxNegAcc, dt);
            case SignalColor::Yellow: {
                // a vehicle already braking on the previous yellow bound sits exactly on this boundary
                double needed = v * v / (2 * params.usualNegAcc) + v * dt / 2;
                if (needed <= distToStopLine + 1e-6)
                    return stopSpeedFrom(v, distToStopLine, params.usualNegAcc, dt);
                return std::nullopt;
            }
        }
        return std::nullopt;
    }

    bool claimBefore(const Claim &a, const Claim &b) {
        if (a.committed != b.committed)
            return a.committed;
        if (a.committed && a.arrivalEstimate != b.arrivalEstimate)
            return a.arrivalEstimate < b.arrivalEstimate;
        if (a.priority != b.priority)
            return a.priority > b.priority;
        if (a.arrivalEstimate != b.arrivalEstimate)
            return a.arrivalEstimate < b.arrivalEstimate;
        return a.vehicle < b.vehicle;
    }

    void CrossPointClaims::sortClaims() { std::sort(list.begin(), list.end(), claimBefore); }

    void CrossPointClaims::notifyArrival(const ArrivalNotice &notice, double now, std::uint64_t step) {
        auto it = std::find_if(list.begin(), list.end(), [&](const Claim &c) { return c.vehicle == notice.vehicle; });
        if (it != list.end() && it->step == step && step != 0)
            return;
        Claim claim;
        claim.vehicle = notice.vehicle;
        claim.handle = notice.handle;
        claim.side = notice.side;
        claim.arrivalEstimate = notice.committed
                                   ? notice.committedAt
                                   : now + std::max(notice.distanceToCp, 0.0) / std::max(notice.speed, kMinSpeedEstimate);
        claim.priority = notice.priority;
        claim.notifiedAtDistance = notice.distanceToCp;
        claim.committed = notice.committed;
        claim.cleared = notice.cleared;
        claim.blocked = notice.blocked;
        claim.step = step;
        if (it != list.end())
            *it = claim;
        else
            list.push_back(claim);
        sortClaims();
    }

    void CrossPointClaims::release(std::uint64_t vehicle) {
        std::erase_if(list, [&](const Claim &c) { return c.vehicle == vehicle; });
    }

    void CrossPointClaims::releaseStale(std::uint64_t step) {
        std::erase_if(list, [&](const Claim &c) { return c.step < step; });
    }

    const Claim *CrossPointClaims::find(std::uint64_t vehicle) const {
        for (const auto &c : list)
            if (c.vehicle == vehicle)
                return &c;
        return nullptr;
    }

    bool CrossPointClaims::mustYield(std::uint64_t vehicle) const {
        const Claim *own = find(vehicle);
        if (!own)
            throw ContractError("vehicle " + std::to_string(vehicle) + " has no claim on this cross point");
        // vehicles on the same lanelink are kept apart by car following
        for (const auto &c : list) {
            if (c.vehicle == vehicle)
                return false;
            if (!c.cleared && c.side != own->side)
                return true;
        }
        return false;
    }

    std::optional<double> CrossPointClaims::crossConstraint(std::uint64_t vehicle, double distanceToCp,
                                                            double yieldDistance, const VehicleParams &params,
                                                            double dt) const {
        if (!mustYield(vehicle))
            return std::nullopt;
        return stopSpeedForDistance(std::max(0.0, distanceToCp - yieldDistance), params.maxNegAcc, dt);
    }

}
