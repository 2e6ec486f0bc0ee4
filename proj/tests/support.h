#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include "trafficsim/cli.h"
#include "trafficsim/engine.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

    // Smallest bumper gap over the whole worst-case trajectory: the follower moves from vF to s
    // linearly during dt and then brakes at dF; the leader brakes at dL from t = 0.
    inline double worstCaseMinGap(double vF, double vL, double dF, double dL, double gap, double dt, double s) {
        auto leaderPos = [&](double t) {
            double stop = vL / dL;
            t = std::min(t, stop);
            return vL * t - dL * t * t / 2;
        };
        auto leaderVel = [&](double t) { return std::max(0.0, vL - dL * t); };
        auto followerPos = [&](double t) {
            if (t <= dt)
                return vF * t + (s - vF) * t * t / (2 * dt);
            double base = (vF + s) * dt / 2;
            double tau = std::min(t - dt, s / dF);
            return base + s * tau - dF * tau * tau / 2;
        };
        auto followerVel = [&](double t) {
            if (t <= dt)
                return vF + (s - vF) * t / dt;
            return std::max(0.0, s - dF * (t - dt));
        };
        std::vector<double> marks{0.0, dt, dt + s / dF, vL / dL};
        double end = std::max({dt + s / dF, vL / dL, dt}) + 1.0;
        marks.push_back(end);
        std::sort(marks.begin(), marks.end());
        auto g = [&](double t) { return gap + leaderPos(t) - followerPos(t); };
        double best = g(0.0);
        for (std::size_t i = 0; i + 1 < marks.size(); ++i) {
            double a = marks[i], b = marks[i + 1];
            if (b <= a)
                continue;
            best = std::min({best, g(a), g(b)});
            // relative speed is linear on the piece; the gap is extremal where it vanishes
            double ra = leaderVel(a) - followerVel(a);
            double rb = leaderVel(b) - followerVel(b);
            if ((ra < 0) != (rb < 0) && ra != rb) {
                double t = a + (b - a) * ra / (ra - rb);
                best = std::min(best, g(t));
            }
        }
        return best;
    }

    struct NeighborResult {
        std::optional<trafficsim::Occupant> leader, follower;
    };

    // Linear scan over an unordered list.
    inline NeighborResult bruteNeighbors(const std::vector<trafficsim::Occupant> &all, double pos) {
        NeighborResult r;
        for (const auto &o : all) {
            if (o.pos > pos) {
                if (!r.leader || o.pos < r.leader->pos || (o.pos == r.leader->pos && o.order > r.leader->order))
                    r.leader = o;
            } else {
                if (!r.follower || o.pos > r.follower->pos || (o.pos == r.follower->pos && o.order < r.follower->order))
                    r.follower = o;
            }
        }
        return r;
    }

    // Free-flow time of a route entered at full speed: total length over the lowest speed limit
    // along it.
    inline double freeFlowTime(const trafficsim::RoadNet &net, const std::vector<int> &route,
                               const trafficsim::VehicleParams &params) {
        double length = 0.0;
        double speed = params.maxSpeed;
        for (std::size_t i = 0; i < route.size(); ++i) {
            const auto &road = net.roads[route[i]];
            int lane = road.lanes.front();
            if (i + 1 < route.size()) {
                for (int l : road.lanes)
                    if (net.laneServes(l, route[i + 1])) {
                        lane = l;
                        break;
                    }
                int link = net.laneLinkFor(lane, route[i + 1]);
                length += net.laneLinks[link].length;
                speed = std::min(speed, net.laneLinks[link].maxSpeed);
            }
            length += net.lanes[lane].length;
            speed = std::min(speed, net.lanes[lane].maxSpeed);
        }
        return length / speed;
    }

    // Pairs of vehicles inside the clearance windows on both sides of one cross point.
    inline int mutualExclusionViolations(const trafficsim::Engine &engine, std::string *detail = nullptr) {
        const auto &net = engine.roadnet();
        auto views = engine.vehicles();
        int violations = 0;
        for (int cp = 0; cp < static_cast<int>(net.crossPoints.size()); ++cp) {
            const auto &point = net.crossPoints[cp];
            auto inside = [&](int link, double d) {
                std::vector<std::string> ids;
                for (const auto &v : views) {
                    auto c = engine.centerAlong(v.id, link);
                    if (c && std::abs(*c - d) < engine.clearance(v.id, cp))
                        ids.push_back(v.id);
                }
                return ids;
            };
            auto a = inside(point.laneLinkA, point.distA);
            if (a.empty())
                continue;
            auto b = inside(point.laneLinkB, point.distB);
            for (const auto &x : a)
                for (const auto &y : b)
                    if (x != y) {
                        ++violations;
                        if (detail && detail->empty())
                            *detail = x + " / " + y + " at " + net.laneLinks[point.laneLinkA].id + " x " +
                                      net.laneLinks[point.laneLinkB].id;
                    }
        }
        return violations;
    }

    inline std::string tempDir(const std::string &name) {
        auto dir = std::filesystem::temp_directory_path() / ("trafficsim-test-" + name);
        std::filesystem::remove_all(dir);
        std::filesystem::create_directories(dir);
        return dir.string();
    }

}
