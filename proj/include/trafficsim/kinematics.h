#pragma once

#include <initializer_list>
#include <span>

namespace trafficsim {

    struct VehicleParams {
        double length = 5.0;
        double width = 2.0;
        double maxPosAcc = 2.0;
        double maxNegAcc = 4.5;   // also the leader deceleration seen by followers
        double usualPosAcc = 2.0;
        double usualNegAcc = 2.5;
        double minGap = 2.5;
        double maxSpeed = 16.67;
        double headwayTime = 1.5;

        bool valid() const;
    };

    // Krauss-style safe speed. `gap` is the bumper gap already reduced by the follower's minGap.
    // Returns the positive root of s^2/(2 dF) + s dt/2 + c = 0 with
    // c = vF dt/2 - vL^2/(2 dL) - gap, clamped at zero; zero when there is no real root.
    double noCollisionSpeed(double vF, double vL, double dF, double dL, double gap, double dt);

    double headwaySpeed(double gap, double headwayTime, double minGap);

    // Largest v >= 0 with v dt/2 + v^2/(2 dec) <= distance.
    double stopSpeedForDistance(double distance, double dec, double dt);
    // Largest next-step speed s that keeps a stop within `distance` reachable under trapezoid
    // integration with braking capped at dec: v dt/2 + s dt + s^2/(2 dec) <= distance. Once
    // satisfied, braking at dec keeps it satisfied every later step.
    double stopSpeedFrom(double v, double distance, double dec, double dt);

    // min(candidates, laneLimit, maxSpeed, v + maxPosAcc dt), floored at max(0, v - maxNegAcc dt).
    double clampSpeed(std::span<const double> candidates, double v, const VehicleParams &params, double laneLimit,
                      double dt);
    double clampSpeed(std::initializer_list<double> candidates, double v, const VehicleParams &params,
                      double laneLimit, double dt);

    struct Advance {
        double newPos;
        double distance;
    };

    // Trapezoid (ballistic) position update.
    Advance ballisticAdvance(double pos, double vOld, double vNew, double dt);

}
