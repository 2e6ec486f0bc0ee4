#include "trafficsim/engine.h"
#include "trafficsim/error.h"
#include "trafficsim/log.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace trafficsim {

    namespace {
        constexpr double kNoticeDistance = 50.0;   // approach distance at which claims are made
        constexpr double kLookaheadHorizon = 150.0;
        constexpr double kYieldMargin = 0.5;
        constexpr double kPromotionTime = 30.0;
        constexpr double kGapMargin = 2.0; // seconds kept between a gap-accepting vehicle and the next arrival
        constexpr double kWaitingSpeed = 0.1;
        constexpr double kMaxClearance = 25.0;     // bound on clearanceFor() for ordinary cars
        constexpr int kMaxCarries = 4;             // boundaries one vehicle may cross in a step
        const LaneChangeSettings kChange{};
    }

    void Engine::nextStep() {
        const double dt = cfg.interval;
        spawnAndInsert();
        advanceSignals();
        workers->parallelFor(net.intersections.size(), [this](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i)
                notifyIntersection(static_cast<int>(i));
        });
        workers->parallelFor(static_cast<std::size_t>(net.drivableCount()), [this](std::size_t b, std::size_t e) {
            for (std::size_t d = b; d < e; ++d) {
                auto seq = occupancy[d].sequence();
                for (std::size_t i = 0; i < seq.size(); ++i) {
                    Vehicle &v = slots[seq[i].handle];
                    if (v.isShadow)
                        planShadow(v, i);
                    else
                        planVehicle(v, i);
                }
            }
        });
        moveVehicles();
        rebuildOccupancy();
        finishLaneChanges();
        beginLaneChanges();
        updateBookkeeping();
        for (auto &s : signals)
            s.tick(dt);
        time += dt;
        ++step;
        if (cfg.saveReplay)
            recordReplay();
        if (cfg.checkInvariants) {
            auto problems = checkInvariants();
            if (!problems.empty()) {
                std::string msg = "step " + std::to_string(step) + ": " + problems.front();
                if (problems.size() > 1)
                    msg += " (+" + std::to_string(problems.size() - 1) + " more)";
                if (cfg.haltOnViolation)
                    throw InvariantError(msg);
                log::error(msg);
            }
        }
    }

    void Engine::spawnAndInsert() {
        const double dt = cfg.interval;
        for (const auto &r : dueSpawns(schedules, time, dt)) {
            const FlowSpec &spec = flows[r.flow];
            int lane = chooseEntryLane(static_cast<std::size_t>(r.flow));
            createPending("flow_" + std::to_string(r.flow) + "_" + std::to_string(r.index), spec.vehicle, spec.route,
                          lane);
        }
        for (std::size_t lane = 0; lane < entryQueues.size(); ++lane) {
            auto &queue = entryQueues[lane];
            if (queue.empty())
                continue;
            std::optional<RearVehicle> rear;
            if (const Occupant *last = occupancy[lane].last()) {
                const Vehicle &l = slots[last->handle];
                rear = RearVehicle{l.pos, l.params.length, l.speed, l.params.maxNegAcc};
            }
            auto decision = tryInsert(queue.front().params, net.lanes[lane].maxSpeed, rear, dt);
            if (!decision.inserted)
                continue;
            int h = createVehicle(queue.front(), static_cast<int>(lane), 0.0, decision.speed);
            slots[h].insertedAt = step + 1;
            queue.pop_front();
        }
    }

    void Engine::advanceSignals() {
        for (std::size_t i = 0; i < signals.size(); ++i) {
            SignalState &s = signals[i];
            s.settle();
            if (cfg.rlTrafficLight || s.phaseCount() < 2 || s.inYellow())
                continue;
            int current = s.currentPhase();
            if (s.timeInPhase() >= phaseDurations[i][current] - 1e-9)
                s.request((current + 1) % s.phaseCount());
        }
    }

    bool Engine::canStopWithin(const Vehicle &v, double distance) const {
        double floor = v.speed - v.params.maxNegAcc * cfg.interval;
        return floor <= stopSpeedFrom(v.speed, std::max(0.0, distance), v.params.maxNegAcc, cfg.interval) + 1e-9;
    }

    std::optional<double> Engine::commitTime(const Vehicle &v, int laneLink) const {
        for (const auto &[link, at] : v.commits)
            if (link == laneLink)
                return at;
        return std::nullopt;
    }

    void Engine::commit(Vehicle &v, int laneLink, bool promoted) {
        if (commitTime(v, laneLink))
            return;
        v.commits[1] = v.commits[0];
        // a promotion ranks after vehicles that committed in the same step by being unable to stop
        v.commits[0] = {laneLink, promoted ? time + cfg.interval / 2 : time};
    }

    double Engine::approachSlack(const VehicleParams &params, int laneLink) const {
        double slack = 0.0;
        for (int cp : net.laneLinks[laneLink].crossPoints) {
            double entry = net.crossPoints[cp].distanceOn(laneLink) - clearanceFor(params, cp) + params.length / 2 -
                           kYieldMargin;
            slack = std::min(slack, entry);
        }
        return slack;
    }

    namespace {
        // Time to cover `distance` from speed v0 accelerating at `acc` up to `vmax`.
        double timeToCover(double distance, double v0, double acc, double vmax) {
            if (distance <= 0)
                return 0.0;
            vmax = std::max(vmax, v0);
            double t1 = (vmax - v0) / acc;
            double d1 = (v0 + vmax) / 2 * t1;
            if (distance <= d1)
                return (-v0 + std::sqrt(v0 * v0 + 2 * acc * distance)) / acc;
            return t1 + (distance - d1) / vmax;
        }
    }

    // A vehicle ranked behind non-committed claimants from the other lanelink may still go when it
    // can clear the cross point window well before any of them could reach it.
    bool Engine::gapAccepted(const Vehicle &v, int laneLink, int crossPoint) const {
        const CrossPoint &point = net.crossPoints[crossPoint];
        const int other = point.other(laneLink);
        const double reach = point.distanceOn(laneLink) + clearanceFor(v.params, crossPoint) - centerOn(v, laneLink);
        const double vmax = std::min(v.params.maxSpeed, net.laneLinks[laneLink].maxSpeed);
        const double clearTime = timeToCover(reach, v.speed, v.params.usualPosAcc, vmax);
        const Claim *own = claims[crossPoint].find(v.serial);
        for (const auto &c : claims[crossPoint].claims()) {
            if (c.vehicle == v.serial)
                break;
            if (c.cleared || c.side == own->side)
                continue;
            const Vehicle &u = slots[c.handle];
            // stuck behind a vehicle bound elsewhere: it cannot commit before this one does
            if (c.blocked && !c.committed && u.speed < kWaitingSpeed)
                continue;
            if (c.committed)
                return false;
            double entry = point.distanceOn(other) - clearanceFor(u.params, crossPoint) - centerOn(u, other);
            double fast = std::max(u.speed, std::min(u.params.maxSpeed, net.laneLinks[other].maxSpeed));
            if (entry / fast < clearTime + kGapMargin)
                return false;
        }
        return true;
    }

    double Engine::gentleStop(const Vehicle &v, double distance) const {
        const double dt = cfg.interval;
        distance = std::max(0.0, distance);
        double s = stopSpeedFrom(v.speed, distance, v.params.usualNegAcc, dt);
        if (s < v.speed - v.params.usualNegAcc * dt)
            s = stopSpeedFrom(v.speed, distance, v.params.maxNegAcc, dt);
        return s;
    }

    // Claims are refreshed every step for vehicles approaching a lanelink (within kNoticeDistance
    // of the stop line, signal not red), on it, or on its end lane until they clear each cross
    // point. Committed vehicles rank by commit time; the others by arrival at the stop line,
    // which gives all approaching vehicles one consistent order.
    void Engine::notifyIntersection(int intersection) {
        const Intersection &inter = net.intersections[intersection];
        const std::uint64_t stepId = step + 1;
        for (int k : inter.laneLinks) {
            const LaneLink &link = net.laneLinks[k];
            if (link.crossPoints.empty())
                continue;
            const int priority = net.roadLinks[link.roadLink].priority;
            double reach = 0.0;
            for (int cp : link.crossPoints)
                reach = std::max(reach, net.crossPoints[cp].distanceOn(k));
            reach += kMaxClearance;

            auto notify = [&](const Vehicle &v, int handle, double stopLineDistance, bool blocked) {
                auto committedAt = commitTime(v, k);
                double center = centerOn(v, k);
                for (int cp : link.crossPoints) {
                    const CrossPoint &point = net.crossPoints[cp];
                    double d = point.distanceOn(k);
                    double cl = clearanceFor(v.params, cp);
                    if (center > d + cl)
                        continue;
                    ArrivalNotice n;
                    n.vehicle = v.serial;
                    n.handle = handle;
                    n.side = point.laneLinkA == k ? CrossSide::A : CrossSide::B;
                    n.distanceToCp = stopLineDistance;
                    n.speed = v.speed;
                    n.priority = priority;
                    n.committed = committedAt.has_value();
                    n.committedAt = committedAt.value_or(0.0);
                    n.blocked = blocked;
                    claims[cp].notifyArrival(n, time, stepId);
                }
            };

            for (const auto &o : occupancy[net.drivableOfLaneLink(k)].sequence())
                notify(slots[o.handle], o.handle, 0.0, false);

            if (laneLinkColor(k) != SignalColor::Red) {
                const double laneLength = net.lanes[link.startLane].length;
                bool blocked = false;
                for (const auto &o : occupancy[link.startLane].sequence()) {
                    const Vehicle &v = slots[o.handle];
                    double toEnd = laneLength - v.pos;
                    if (toEnd > kNoticeDistance)
                        break;
                    if (v.isShadow || v.change.phase() == LaneChangePhase::Executing || nextLinkOf(v) != k) {
                        blocked = true;
                        continue;
                    }
                    notify(v, o.handle, toEnd, blocked);
                }
            }

            auto endSeq = occupancy[link.endLane].sequence();
            for (std::size_t i = endSeq.size(); i-- > 0;) {
                const Vehicle &v = slots[endSeq[i].handle];
                if (centerOn(v, k) > reach)
                    break;
                if (!v.isShadow && v.prevLink == k)
                    notify(v, endSeq[i].handle, 0.0, false);
            }
        }
        for (int cp : inter.crossPoints)
            claims[cp].releaseStale(stepId);
    }

    std::optional<Engine::Leader> Engine::lookahead(int drivable, double pos, const std::vector<int> &route,
                                                    std::size_t routeIndex) const {
        std::optional<Leader> best;
        auto consider = [&](double gap, const Vehicle &l) {
            if (!best || gap < best->gap)
                best = Leader{gap, l.speed, &l.params};
        };
        double base = net.drivableLength(drivable) - pos;
        int cur = drivable;
        std::size_t r = routeIndex;
        if (!net.isLaneLink(cur))
            // vehicles that have just left this lane and still hang back over its end
            for (int out : net.lanes[cur].outLinks)
                if (const Occupant *o = occupancy[net.drivableOfLaneLink(out)].last()) {
                    const Vehicle &l = slots[o->handle];
                    if (o->pos < l.params.length)
                        consider(base + o->pos - l.params.length, l);
                }
        while (base < kLookaheadHorizon) {
            int next;
            if (net.isLaneLink(cur)) {
                next = net.laneLinks[net.laneLinkOf(cur)].endLane;
                ++r;
            } else {
                int k = nextLinkFrom(cur, route, r);
                if (k < 0)
                    break;
                next = net.drivableOfLaneLink(k);
            }
            if (const Occupant *o = occupancy[next].last()) {
                const Vehicle &l = slots[o->handle];
                consider(base + o->pos - l.params.length, l);
                break;
            }
            base += net.drivableLength(next);
            cur = next;
        }
        return best;
    }

    std::optional<Engine::Leader> Engine::leaderOf(const Vehicle &v, std::size_t seqIndex) const {
        if (seqIndex > 0) {
            const Vehicle &l = slots[occupancy[v.drivable].sequence()[seqIndex - 1].handle];
            return Leader{l.pos - l.params.length - v.pos, l.speed, &l.params};
        }
        return lookahead(v.drivable, v.pos, v.route, v.routeIndex);
    }

    std::optional<Engine::Leader> Engine::leaderAt(int drivable, double pos, const std::vector<int> &route,
                                                   std::size_t routeIndex) const {
        auto near = occupancy[drivable].scanNeighbors(std::clamp(pos, 0.0, net.drivableLength(drivable)));
        if (near.leader) {
            const Vehicle &l = slots[near.leader->handle];
            return Leader{l.pos - l.params.length - pos, l.speed, &l.params};
        }
        return lookahead(drivable, pos, route, routeIndex);
    }

    bool Engine::roomAfter(int laneLink, const Vehicle &v) const {
        const LaneLink &link = net.laneLinks[laneLink];
        double space = net.lanes[link.endLane].length;
        if (const Occupant *last = occupancy[link.endLane].last())
            space = last->pos - slots[last->handle].params.length;
        for (const auto &o : occupancy[net.drivableOfLaneLink(laneLink)].sequence()) {
            const Vehicle &u = slots[o.handle];
            space -= u.params.length + u.params.minGap;
        }
        return space >= v.params.length + v.params.minGap;
    }

    void Engine::planVehicle(Vehicle &v, std::size_t seqIndex) {
        const double dt = cfg.interval;
        const VehicleParams &p = v.params;
        v.intent.reset();
        v.yielding = false;
        v.interactions = 0;
        v.interactionsBounded = true;
        if (v.insertedAt == step + 1) {
            v.planned = v.speed;
            return;
        }
        double bounds[8];
        int n = 0;
        if (auto leader = leaderOf(v, seqIndex)) {
            bounds[n++] = noCollisionSpeed(v.speed, leader->speed, p.maxNegAcc, leader->params->maxNegAcc,
                                           leader->gap - p.minGap, dt);
            bounds[n++] = headwaySpeed(leader->gap, p.headwayTime, p.minGap);
        }
        const bool onLink = net.isLaneLink(v.drivable);
        const bool executing = v.change.phase() == LaneChangePhase::Executing;
        const double toEnd = net.drivableLength(v.drivable) - v.pos;
        if (!onLink) {
            const bool lastRoad = v.routeIndex + 1 >= v.route.size();
            const int k = nextLinkOf(v);
            if (!lastRoad && (k < 0 || executing)) {
                bounds[n++] = gentleStop(v, toEnd);
            } else if (k >= 0) {
                if (auto s = signalConstraint(laneLinkColor(k), toEnd, v.speed, p, dt))
                    bounds[n++] = *s;
                const auto &cps = net.laneLinks[k].crossPoints;
                bool crossYield = false;
                for (int cp : cps) {
                    if (!claims[cp].find(v.serial))
                        continue;
                    ++v.interactions;
                    crossYield = crossYield || (claims[cp].mustYield(v.serial) && !gapAccepted(v, k, cp));
                }
                v.interactionsBounded = v.interactions <= static_cast<int>(cps.size());
                double stopAt = std::numeric_limits<double>::infinity();
                if (crossYield)
                    stopAt = toEnd + approachSlack(p, k);
                // keep the box clear when the exit lane is backed up
                else if (toEnd <= kNoticeDistance && !commitTime(v, k) && !roomAfter(k, v))
                    stopAt = toEnd;
                if (stopAt < std::numeric_limits<double>::infinity())
                    bounds[n++] = stopSpeedFrom(v.speed, std::max(0.0, stopAt), p.maxNegAcc, dt);
                v.yielding = crossYield;
            }
        } else {
            const int k = net.laneLinkOf(v.drivable);
            const auto &cps = net.laneLinks[k].crossPoints;
            double tightest = std::numeric_limits<double>::infinity();
            for (int cp : cps) {
                if (!claims[cp].find(v.serial))
                    continue;
                ++v.interactions;
                double d = net.crossPoints[cp].distanceOn(k);
                double entry = d - clearanceFor(p, cp) + p.length / 2 - kYieldMargin;
                if (v.pos < entry && claims[cp].mustYield(v.serial))
                    tightest = std::min(tightest, entry - v.pos);
            }
            v.interactionsBounded = v.interactions <= static_cast<int>(cps.size());
            if (tightest < std::numeric_limits<double>::infinity()) {
                bounds[n++] = stopSpeedFrom(v.speed, tightest, p.maxNegAcc, dt);
                v.yielding = true;
            }
        }
        v.planned = clampSpeed(std::span<const double>(bounds, n), v.speed, p, net.drivableMaxSpeed(v.drivable), dt);
        if (cfg.laneChange && !onLink && !executing && time - v.lastChangeEnd >= kChange.cooldown)
            planLaneChange(v);
    }

    void Engine::planShadow(Vehicle &v, std::size_t seqIndex) {
        const double dt = cfg.interval;
        const VehicleParams &p = v.params;
        double bounds[3];
        int n = 0;
        if (auto leader = leaderOf(v, seqIndex)) {
            bounds[n++] = noCollisionSpeed(v.speed, leader->speed, p.maxNegAcc, leader->params->maxNegAcc,
                                           leader->gap - p.minGap, dt);
            bounds[n++] = headwaySpeed(leader->gap, p.headwayTime, p.minGap);
        }
        bounds[n++] = gentleStop(v, net.drivableLength(v.drivable) - v.pos);
        v.planned = clampSpeed(std::span<const double>(bounds, n), v.speed, p, net.drivableMaxSpeed(v.drivable), dt);
    }

    void Engine::planLaneChange(Vehicle &v) {
        const double dt = cfg.interval;
        const Lane &lane = net.lanes[v.drivable];
        const Road &road = net.roads[lane.road];
        const bool lastRoad = v.routeIndex + 1 >= v.route.size();
        auto serves = [&](int l) { return lastRoad || net.laneServes(l, v.route[v.routeIndex + 1]); };
        const double inf = std::numeric_limits<double>::infinity();

        auto option = [&](int laneIndex) {
            LaneOption o;
            o.lane = road.lanes[laneIndex];
            o.servesRoute = serves(o.lane);
            auto leader = leaderAt(o.lane, v.pos, v.route, v.routeIndex);
            o.leaderGap = leader ? leader->gap : inf;
            auto near = occupancy[o.lane].scanNeighbors(std::clamp(v.pos, 0.0, net.lanes[o.lane].length));
            if (near.follower) {
                const Vehicle &f = slots[near.follower->handle];
                o.followerSafe = insertionSafe({v.pos - v.params.length - f.pos, f.speed, v.speed, &f.params, &v.params}, dt);
            }
            return o;
        };

        LaneOption current;
        current.lane = v.drivable;
        current.servesRoute = serves(v.drivable);
        auto leader = leaderAt(v.drivable, v.pos, v.route, v.routeIndex);
        current.leaderGap = leader ? leader->gap : inf;

        std::vector<LaneOption> adjacent;
        const int count = static_cast<int>(road.lanes.size());
        if (lane.index > 0)
            adjacent.push_back(option(lane.index - 1));
        if (lane.index + 1 < count)
            adjacent.push_back(option(lane.index + 1));

        std::optional<LaneOption> towards;
        if (!current.servesRoute) {
            int best = -1;
            for (int j = 0; j < count; ++j)
                if (serves(road.lanes[j]) && (best < 0 || std::abs(j - lane.index) < std::abs(best - lane.index)))
                    best = j;
            if (best >= 0)
                towards = option(lane.index + (best > lane.index ? 1 : -1));
        }
        v.intent = changeUrge(current, adjacent, towards, kChange);
    }

    void Engine::moveVehicles() {
        const double dt = cfg.interval;
        std::vector<int> finished;
        for (int h = 0; h < static_cast<int>(slots.size()); ++h) {
            Vehicle &v = slots[h];
            if (!v.alive || v.isShadow || v.insertedAt == step + 1)
                continue;
            const bool executing = v.change.phase() == LaneChangePhase::Executing;
            double target = v.planned;
            if (executing)
                target = coupleSpeeds(target, slots[v.partner].planned);
            auto adv = ballisticAdvance(v.pos, v.speed, target, dt);
            v.prevSpeed = v.speed;
            v.speed = target;
            v.pos = adv.newPos;

            int carries = 0;
            while (true) {
                double len = net.drivableLength(v.drivable);
                if (!net.isLaneLink(v.drivable)) {
                    if (v.routeIndex + 1 >= v.route.size()) {
                        if (v.pos >= len)
                            finished.push_back(h);
                        break;
                    }
                    if (v.pos <= len)
                        break;
                    int k = nextLinkOf(v);
                    if (k < 0 || executing || carries == kMaxCarries) {
                        v.pos = len;
                        ++counters.migrationClamps;
                        log::warn("vehicle " + v.id + " clamped at the end of " + net.drivableId(v.drivable));
                        break;
                    }
                    if (laneLinkColor(k) == SignalColor::Red)
                        ++counters.redLightCrossings;
                    v.pos -= len;
                    v.drivable = net.drivableOfLaneLink(k);
                } else {
                    if (v.pos <= len)
                        break;
                    if (carries == kMaxCarries) {
                        v.pos = len;
                        ++counters.migrationClamps;
                        log::warn("vehicle " + v.id + " clamped at the end of " + net.drivableId(v.drivable));
                        break;
                    }
                    int k = net.laneLinkOf(v.drivable);
                    v.pos -= len;
                    v.drivable = net.laneLinks[k].endLane;
                    ++v.routeIndex;
                    v.prevLink = k;
                }
                ++carries;
            }
        }
        for (auto &s : slots) {
            if (!s.alive || !s.isShadow)
                continue;
            const Vehicle &orig = slots[s.partner];
            s.prevSpeed = s.speed;
            s.speed = orig.speed;
            s.pos = std::min(orig.pos, net.drivableLength(s.drivable));
        }
        for (int h : finished) {
            Vehicle &v = slots[h];
            ++counters.finished;
            counters.totalDuration += time + dt - v.enterTime;
            if (cfg.recordTrips)
                tripLog.push_back({v.id, v.route, v.enterTime, time + dt});
            if (v.partner >= 0)
                releaseSlot(v.partner);
            releaseSlot(h);
        }
    }

    void Engine::rebuildOccupancy() {
        for (int h = 0; h < static_cast<int>(slots.size()); ++h) {
            const Vehicle &v = slots[h];
            if (v.alive)
                buckets[v.drivable].push_back({v.pos, v.serial, h});
        }
        workers->parallelFor(buckets.size(), [this](std::size_t b, std::size_t e) {
            for (std::size_t d = b; d < e; ++d) {
                occupancy[d].assign(std::move(buckets[d]));
                buckets[d].clear();
            }
        });
    }

    void Engine::finishLaneChanges() {
        const double dt = cfg.interval;
        for (int h = 0; h < static_cast<int>(slots.size()); ++h) {
            Vehicle &v = slots[h];
            if (!v.alive || v.isShadow || v.change.phase() != LaneChangePhase::Executing)
                continue;
            if (!v.change.advance(dt, kChange.duration))
                continue;
            int s = v.partner;
            Vehicle &shadow = slots[s];
            occupancy[v.drivable].erase(h);
            occupancy[shadow.drivable].erase(s);
            v.drivable = shadow.drivable;
            v.pos = shadow.pos;
            occupancy[v.drivable].insert({v.pos, v.serial, h});
            releaseSlot(s);
            v.partner = -1;
            v.change.finish();
            v.lastChangeEnd = time + dt;
            ++counters.laneChangesFinished;
        }
    }

    void Engine::beginLaneChanges() {
        const double dt = cfg.interval;
        std::vector<int> candidates;
        for (int h = 0; h < static_cast<int>(slots.size()); ++h) {
            const Vehicle &v = slots[h];
            if (!v.alive || v.isShadow || !v.intent || net.isLaneLink(v.drivable) ||
                v.change.phase() == LaneChangePhase::Executing)
                continue;
            const Lane &target = net.lanes[v.intent->targetLane];
            if (target.road != net.lanes[v.drivable].road)
                continue;
            candidates.push_back(h);
        }
        std::sort(candidates.begin(), candidates.end(),
                  [&](int a, int b) { return slots[a].serial < slots[b].serial; });

        for (int h : candidates) {
            const int target = slots[h].intent->targetLane;
            const double pos = std::min(slots[h].pos, net.lanes[target].length);
            {
                Vehicle &v = slots[h];
                v.change.signal(target, v.intent->reason);
                v.intent.reset();
            }
            const Vehicle &v = slots[h];
            int inspected = 0;
            auto near = occupancy[target].scanNeighbors(pos, &inspected);
            counters.maxSegmentsInspected = std::max(counters.maxSegmentsInspected, inspected);
            bool safe = true;
            if (near.follower) {
                const Vehicle &f = slots[near.follower->handle];
                safe = insertionSafe({pos - v.params.length - f.pos, f.speed, v.speed, &f.params, &v.params}, dt);
            }
            std::optional<Leader> leader;
            if (near.leader) {
                const Vehicle &l = slots[near.leader->handle];
                leader = Leader{l.pos - l.params.length - pos, l.speed, &l.params};
            } else {
                leader = lookahead(target, pos, v.route, v.routeIndex);
            }
            if (safe && leader)
                safe = insertionSafe({leader->gap, v.speed, leader->speed, &v.params, leader->params}, dt);
            if (!safe) {
                slots[h].change.reject();
                ++counters.laneChangesRejected;
                continue;
            }
            int s = allocate();
            Vehicle &orig = slots[h];
            Vehicle &shadow = slots[s];
            shadow.id = orig.id;
            shadow.serial = orig.serial;
            shadow.params = orig.params;
            shadow.route = orig.route;
            shadow.routeIndex = orig.routeIndex;
            shadow.drivable = target;
            shadow.pos = pos;
            shadow.speed = shadow.prevSpeed = orig.speed;
            shadow.enterTime = orig.enterTime;
            shadow.isShadow = true;
            shadow.partner = h;
            orig.partner = s;
            orig.change.begin(s);
            occupancy[target].insert({pos, shadow.serial, s});
            ++counters.laneChangesStarted;
        }
    }

    void Engine::updateBookkeeping() {
        const double dt = cfg.interval;
        for (std::size_t h = 0; h < slots.size(); ++h) {
            Vehicle &v = slots[h];
            if (!v.alive || v.isShadow)
                continue;
            const bool onLink = net.isLaneLink(v.drivable);
            const auto &seq = occupancy[v.drivable].sequence();
            const bool atFront = !seq.empty() && seq.front().handle == static_cast<int>(h);
            if (v.yielding && v.speed < kWaitingSpeed && atFront) {
                double before = v.yieldTime;
                v.yieldTime += dt;
                if (before <= kPromotionTime && v.yieldTime > kPromotionTime)
                    ++counters.deadlockPromotions;
            } else if (!v.yielding || !atFront) {
                v.yieldTime = 0.0;
            }
            // commitments are taken here, serially, and seen by the next step's notifications
            if (onLink) {
                commit(v, net.laneLinkOf(v.drivable), false);
            } else if (int k = nextLinkOf(v); k >= 0 && v.change.phase() != LaneChangePhase::Executing) {
                double toEnd = net.lanes[v.drivable].length - v.pos;
                if (!atFront) {
                    // whoever is ahead has to clear the stop line first
                    for (auto &c : v.commits)
                        if (c.first == k)
                            c = {-1, 0.0};
                } else if (toEnd <= kNoticeDistance && !canStopWithin(v, toEnd + approachSlack(v.params, k))) {
                    commit(v, k, false);
                } else if (laneLinkColor(k) == SignalColor::Red) {
                    // no claims are made at red, so a standing commitment would surface later
                    // ahead of vehicles that could not see it
                    for (auto &c : v.commits)
                        if (c.first == k)
                            c = {-1, 0.0};
                    v.yieldTime = 0.0;
                } else if (toEnd <= kNoticeDistance && v.yieldTime > kPromotionTime) {
                    commit(v, k, true);
                }
            }
            counters.maxCrossInteractions = std::max(counters.maxCrossInteractions, v.interactions);
            counters.crossInteractionsBounded = counters.crossInteractionsBounded && v.interactionsBounded;
            if (!v.routeFailed && !onLink && v.routeIndex + 1 < v.route.size() && nextLinkOf(v) < 0 &&
                net.lanes[v.drivable].length - v.pos < 0.5 && v.speed < kWaitingSpeed) {
                v.routeFailed = true;
                ++counters.routeFailures;
            }
        }
    }

    void Engine::recordReplay() {
        replay.write(formatReplayLine(vehiclePoses(), signalColors()));
    }

}
