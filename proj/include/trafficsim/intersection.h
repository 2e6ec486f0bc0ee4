#pragma once

#include "trafficsim/kinematics.h"
#include "trafficsim/signal.h"

#include <cstdint>
#include <optional>
#include <vector>

namespace trafficsim {

    // Speed bound imposed by a signal on a vehicle `distToStopLine` before the stop line.
    // Red: stop with maxNegAcc. Yellow: stop with usualNegAcc if that is still possible, else
    // no bound. Green: no bound.
    std::optional<double> signalConstraint(SignalColor color, double distToStopLine, double v,
                                           const VehicleParams &params, double dt);

    enum class CrossSide { A, B };

    struct Claim {
        std::uint64_t vehicle = 0; // serial; also the deterministic tiebreak
        int handle = -1;           // engine slot, opaque here
        CrossSide side = CrossSide::A;
        double arrivalEstimate = 0.0; // commit time for committed claims
        int priority = 0;
        double notifiedAtDistance = 0.0;
        // Vehicles on the lanelink, unable to stop before it, or promoted by the deadlock breaker
        // outrank everyone else.
        bool committed = false;
        bool cleared = false;
        bool blocked = false; // queued behind a vehicle bound for another lanelink
        std::uint64_t step = 0;
    };

    struct ArrivalNotice {
        std::uint64_t vehicle = 0;
        int handle = -1;
        CrossSide side = CrossSide::A;
        double distanceToCp = 0.0;
        double speed = 0.0;
        int priority = 0;
        bool committed = false;
        double committedAt = 0.0; // committed claims rank by this instead of an arrival estimate
        bool cleared = false;
        bool blocked = false;
    };

    // Arrival claims held by one cross point. Not internally synchronised: the engine gives
    // each intersection to a single worker.
    class CrossPointClaims {
    public:
        static constexpr double kMinSpeedEstimate = 1.0;

        // Registers or refreshes a claim; at most one update per (vehicle, step).
        void notifyArrival(const ArrivalNotice &notice, double now, std::uint64_t step);

        void release(std::uint64_t vehicle);

        // Drops every claim whose last notification predates `step`.
        void releaseStale(std::uint64_t step);

        // Bound for a claimant `distanceToCp` metres before the cross point: none when every
        // higher-ranked claimant on the other lanelink has cleared; otherwise a stop `yieldDistance`
        // before the cross point. Throws ContractError if the vehicle holds no claim.
        std::optional<double> crossConstraint(std::uint64_t vehicle, double distanceToCp, double yieldDistance,
                                              const VehicleParams &params, double dt) const;

        // Same decision without the speed computation.
        bool mustYield(std::uint64_t vehicle) const;

        const std::vector<Claim> &claims() const { return list; }
        const Claim *find(std::uint64_t vehicle) const;
        bool empty() const { return list.empty(); }
        void clear() { list.clear(); }

    private:
        void sortClaims();

        std::vector<Claim> list;
    };

    // Claim order: committed claims first, among them earlier commitment; then higher priority,
    // earlier arrival, smaller vehicle id. Commit times belong to the vehicle rather than the
    // cross point, so the order is the same at every cross point and cannot form a cycle.
    bool claimBefore(const Claim &a, const Claim &b);

}
