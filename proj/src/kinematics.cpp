#include "trafficsim/kinematics.h"
#include "trafficsim/error.h"
#include "trafficsim/log.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace trafficsim {

    bool VehicleParams::valid() const {
        return length > 0 && width > 0 && maxPosAcc > 0 && maxNegAcc > 0 && usualPosAcc > 0 && usualNegAcc > 0 &&
               minGap >= 0 && maxSpeed > 0 && headwayTime > 0 && usualNegAcc <= maxNegAcc &&
               usualPosAcc <= maxPosAcc;
    }

    double noCollisionSpeed(double vF, double vL, double dF, double dL, double gap, double dt) {
        if (!(dF > 0) || !(dL > 0) || !(dt > 0))
            throw ParameterError("noCollisionSpeed needs positive decelerations and interval");
        double c = vF * dt / 2 - vL * vL / (2 * dL) - gap;
        double a = 1 / (2 * dF);
        double b = dt / 2;
        double disc = b * b - 4 * a * c;
        if (disc < 0) {
            log::debug("no real safe speed; follower already too close");
            return 0.0;
        }
        double s = (-b + std::sqrt(disc)) / (2 * a);
        return std::max(0.0, s);
    }

    double headwaySpeed(double gap, double headwayTime, double minGap) {
        return std::max(0.0, (gap - minGap) / headwayTime);
    }

    double stopSpeedForDistance(double distance, double dec, double dt) {
        if (!(distance > 0))
            return 0.0;
        double b = dt / 2;
        double v = (-b + std::sqrt(b * b + 2 * distance / dec)) * dec;
        return std::max(0.0, v);
    }

    double stopSpeedFrom(double v, double distance, double dec, double dt) {
        double left = distance - v * dt / 2;
        if (!(left > 0))
            return 0.0;
        return std::max(0.0, (-dt + std::sqrt(dt * dt + 2 * left / dec)) * dec);
    }

    double clampSpeed(std::span<const double> candidates, double v, const VehicleParams &params, double laneLimit,
                      double dt) {
        double upper = std::min({laneLimit, params.maxSpeed, v + params.maxPosAcc * dt});
        for (double c : candidates)
            upper = std::min(upper, c);
        double floor = std::max(0.0, v - params.maxNegAcc * dt);
        return std::max(upper, floor);
    }

    double clampSpeed(std::initializer_list<double> candidates, double v, const VehicleParams &params,
                      double laneLimit, double dt) {
        return clampSpeed(std::span<const double>(candidates.begin(), candidates.size()), v, params, laneLimit, dt);
    }

    Advance ballisticAdvance(double pos, double vOld, double vNew, double dt) {
        if (vOld < 0 || vNew < 0)
            throw ParameterError("ballisticAdvance needs non-negative speeds");
        double distance = (vOld + vNew) * dt / 2;
        return {pos + distance, distance};
    }

}
