#include "trafficsim/error.h"
#include "trafficsim/intersection.h"
#include "trafficsim/roadnet.h"
#include "trafficsim/signal.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace trafficsim;

namespace {

    ArrivalNotice notice(std::uint64_t vehicle, CrossSide side, double distance, double speed, int priority) {
        ArrivalNotice n;
        n.vehicle = vehicle;
        n.side = side;
        n.distanceToCp = distance;
        n.speed = speed;
        n.priority = priority;
        return n;
    }

    // Positive root of x^2/(2 dec) + c1 x - d = 0 by the quadratic formula written out directly.
    double root(double dec, double c1, double d) {
        double a = 1 / (2 * dec);
        return (-c1 + std::sqrt(c1 * c1 + 4 * a * d)) / (2 * a);
    }

    Intersection twoPhaseNode() {
        Intersection node;
        node.id = "n";
        node.roadLinks = {0, 1, 2};
        node.phases = {{{0, 2}, 30.0}, {{1, 2}, 30.0}};
        return node;
    }

}

TEST(SignalConstraint, GreenIsUnbounded) {
    EXPECT_FALSE(signalConstraint(SignalColor::Green, 0.0, 10.0, {}, 1.0));
    EXPECT_FALSE(signalConstraint(SignalColor::Green, 500.0, 0.0, {}, 1.0));
}

TEST(SignalConstraint, RedAtTheLine) {
    auto b = signalConstraint(SignalColor::Red, 0.0, 0.0, {}, 1.0);
    ASSERT_TRUE(b);
    EXPECT_EQ(*b, 0.0);
}

TEST(SignalConstraint, RedKeepsAStopReachable) {
    VehicleParams p;
    auto b = signalConstraint(SignalColor::Red, 40.0, 12.0, p, 1.0);
    ASSERT_TRUE(b);
    // 12/2 + s + s^2/9 = 40
    EXPECT_NEAR(*b, root(p.maxNegAcc, 1.0, 34.0), 1e-9);
}

TEST(SignalConstraint, YellowStopsWhenComfortable) {
    VehicleParams p;
    p.usualNegAcc = 2.5;
    // stop test 100/5 + 5 = 25 <= 30, so the vehicle must stop: 10/2 + s + s^2/5 = 30
    auto b = signalConstraint(SignalColor::Yellow, 30.0, 10.0, p, 1.0);
    ASSERT_TRUE(b);
    EXPECT_NEAR(*b, root(2.5, 1.0, 25.0), 1e-9);
    EXPECT_NEAR(*b, 8.956, 1e-3);
}

TEST(SignalConstraint, YellowProceedsWhenTooClose) {
    VehicleParams p;
    p.usualNegAcc = 2.5;
    EXPECT_FALSE(signalConstraint(SignalColor::Yellow, 20.0, 10.0, p, 1.0));
}

TEST(SignalConstraint, YellowBrakingStaysCommitted) {
    // Following the yellow bound must never flip to "proceed" before the vehicle stops.
    VehicleParams p;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> speed(5, 16), distance(20, 120);
    for (int i = 0; i < 500; ++i) {
        double v = speed(rng), d = distance(rng);
        if (!signalConstraint(SignalColor::Yellow, d, v, p, 1.0))
            continue;
        while (v > 0) {
            auto b = signalConstraint(SignalColor::Yellow, d, v, p, 1.0);
            ASSERT_TRUE(b) << "flipped at d=" << d << " v=" << v;
            double s = std::max(std::min(*b, v), std::max(0.0, v - p.usualNegAcc));
            d -= (v + s) / 2;
            v = s;
        }
        EXPECT_GE(d, -1e-9);
    }
}

TEST(SignalState, PhaseChangeGoesThroughYellow) {
    SignalState s(twoPhaseNode(), 3.0);
    EXPECT_EQ(s.color(0), SignalColor::Green);
    EXPECT_EQ(s.color(1), SignalColor::Red);
    EXPECT_EQ(s.color(2), SignalColor::Green);
    s.request(1);
    EXPECT_EQ(s.color(0), SignalColor::Yellow);
    EXPECT_EQ(s.color(1), SignalColor::Red);
    EXPECT_EQ(s.color(2), SignalColor::Green); // kept in both phases
    for (int i = 0; i < 3; ++i) {
        s.settle();
        EXPECT_EQ(s.currentPhase(), 0);
        s.tick(1.0);
    }
    s.settle();
    EXPECT_EQ(s.currentPhase(), 1);
    EXPECT_EQ(s.color(0), SignalColor::Red);
    EXPECT_EQ(s.color(1), SignalColor::Green);
}

TEST(SignalState, SamePhaseIsNoOp) {
    SignalState s(twoPhaseNode(), 3.0);
    s.tick(5.0);
    s.request(0);
    EXPECT_FALSE(s.inYellow());
    EXPECT_DOUBLE_EQ(s.timeInPhase(), 5.0);
}

TEST(SignalState, ImmediateSkipsYellow) {
    SignalState s(twoPhaseNode(), 3.0);
    s.request(1, true);
    EXPECT_EQ(s.currentPhase(), 1);
    EXPECT_EQ(s.color(0), SignalColor::Red);
}

TEST(SignalState, RejectsBadPhase) {
    SignalState s(twoPhaseNode(), 3.0);
    EXPECT_THROW(s.request(2), ParameterError);
    EXPECT_THROW(s.request(-1), ParameterError);
}

TEST(Claims, SingleClaimant) {
    CrossPointClaims c;
    c.notifyArrival(notice(1, CrossSide::A, 10, 5, 2), 0.0, 1);
    ASSERT_EQ(c.claims().size(), 1u);
    EXPECT_EQ(c.claims()[0].vehicle, 1u);
    EXPECT_DOUBLE_EQ(c.claims()[0].arrivalEstimate, 2.0);
    EXPECT_FALSE(c.mustYield(1));
}

TEST(Claims, StraightBeforeLeftAtEqualEta) {
    CrossPointClaims c;
    c.notifyArrival(notice(1, CrossSide::A, 10, 5, 0), 0.0, 1);
    c.notifyArrival(notice(2, CrossSide::B, 10, 5, 2), 0.0, 1);
    EXPECT_EQ(c.claims()[0].vehicle, 2u);
    EXPECT_TRUE(c.mustYield(1));
    EXPECT_FALSE(c.mustYield(2));
}

TEST(Claims, EarlierEtaFirstAtEqualPriority) {
    CrossPointClaims c;
    c.notifyArrival(notice(1, CrossSide::A, 20, 5, 2), 0.0, 1); // 4 s
    c.notifyArrival(notice(2, CrossSide::B, 15, 5, 2), 0.0, 1); // 3 s
    EXPECT_EQ(c.claims()[0].vehicle, 2u);
}

TEST(Claims, SlowVehiclesUseTheMinimumSpeedEstimate) {
    CrossPointClaims c;
    c.notifyArrival(notice(1, CrossSide::A, 4, 0, 2), 10.0, 1);
    EXPECT_DOUBLE_EQ(c.claims()[0].arrivalEstimate, 10.0 + 4 / CrossPointClaims::kMinSpeedEstimate);
}

TEST(Claims, CommittedOutrankByCommitTime) {
    CrossPointClaims c;
    auto a = notice(1, CrossSide::A, 2, 10, 2);
    auto b = notice(2, CrossSide::B, 30, 1, 0);
    b.committed = true;
    b.committedAt = 4.0;
    auto d = notice(3, CrossSide::A, 20, 1, 0);
    d.committed = true;
    d.committedAt = 3.0;
    c.notifyArrival(a, 5.0, 1);
    c.notifyArrival(b, 5.0, 1);
    c.notifyArrival(d, 5.0, 1);
    ASSERT_EQ(c.claims().size(), 3u);
    EXPECT_EQ(c.claims()[0].vehicle, 3u);
    EXPECT_EQ(c.claims()[1].vehicle, 2u);
    EXPECT_EQ(c.claims()[2].vehicle, 1u);
}

TEST(Claims, IdempotentWithinAStep) {
    CrossPointClaims c;
    c.notifyArrival(notice(1, CrossSide::A, 10, 5, 2), 0.0, 3);
    c.notifyArrival(notice(1, CrossSide::A, 50, 5, 2), 0.0, 3);
    EXPECT_DOUBLE_EQ(c.claims()[0].notifiedAtDistance, 10.0);
    c.notifyArrival(notice(1, CrossSide::A, 5, 5, 2), 1.0, 4);
    EXPECT_EQ(c.claims().size(), 1u);
    EXPECT_DOUBLE_EQ(c.claims()[0].notifiedAtDistance, 5.0);
}

TEST(Claims, SecondRankedYieldsWithBuffer) {
    CrossPointClaims c;
    VehicleParams p;
    c.notifyArrival(notice(1, CrossSide::A, 5, 5, 2), 0.0, 1);
    c.notifyArrival(notice(2, CrossSide::B, 12, 5, 0), 0.0, 1);
    EXPECT_FALSE(c.crossConstraint(1, 5, 3, p, 1.0));
    auto bound = c.crossConstraint(2, 12, 3, p, 1.0);
    ASSERT_TRUE(bound);
    // s/2 + s^2/9 = 9
    EXPECT_NEAR(*bound, root(4.5, 0.5, 9.0), 1e-9);
    EXPECT_NEAR(*bound, 7.027, 1e-3);
}

TEST(Claims, ClearedHeadDoesNotBlock) {
    CrossPointClaims c;
    VehicleParams p;
    auto head = notice(1, CrossSide::A, 0, 5, 2);
    head.cleared = true;
    c.notifyArrival(head, 0.0, 1);
    c.notifyArrival(notice(2, CrossSide::B, 12, 5, 0), 0.0, 1);
    EXPECT_FALSE(c.crossConstraint(2, 12, 3, p, 1.0));
}

TEST(Claims, SameSideLeaderDoesNotBlock) {
    CrossPointClaims c;
    c.notifyArrival(notice(1, CrossSide::A, 5, 5, 2), 0.0, 1);
    c.notifyArrival(notice(2, CrossSide::A, 15, 5, 2), 0.0, 1);
    EXPECT_FALSE(c.mustYield(2));
}

TEST(Claims, OtherSideHigherRankBlocks) {
    CrossPointClaims c;
    c.notifyArrival(notice(1, CrossSide::A, 5, 5, 2), 0.0, 1);
    c.notifyArrival(notice(2, CrossSide::A, 15, 5, 2), 0.0, 1);
    c.notifyArrival(notice(3, CrossSide::B, 8, 5, 2), 0.0, 1);
    EXPECT_TRUE(c.mustYield(3));
    EXPECT_TRUE(c.mustYield(2));
}

TEST(Claims, MissingClaimIsAContractError) {
    CrossPointClaims c;
    VehicleParams p;
    EXPECT_THROW(c.mustYield(9), ContractError);
    EXPECT_THROW(c.crossConstraint(9, 1, 1, p, 1.0), ContractError);
}

TEST(Claims, Release) {
    CrossPointClaims c;
    c.notifyArrival(notice(1, CrossSide::A, 5, 5, 2), 0.0, 1);
    c.notifyArrival(notice(2, CrossSide::B, 12, 5, 0), 0.0, 1);
    c.release(1);
    ASSERT_EQ(c.claims().size(), 1u);
    EXPECT_FALSE(c.mustYield(2));
    c.release(1);
    EXPECT_EQ(c.claims().size(), 1u);
    c.release(2);
    EXPECT_TRUE(c.empty());
}

TEST(Claims, StaleClaimsDropped) {
    CrossPointClaims c;
    c.notifyArrival(notice(1, CrossSide::A, 5, 5, 2), 0.0, 1);
    c.notifyArrival(notice(2, CrossSide::B, 12, 5, 0), 1.0, 2);
    c.releaseStale(2);
    ASSERT_EQ(c.claims().size(), 1u);
    EXPECT_EQ(c.claims()[0].vehicle, 2u);
}

TEST(Claims, OrderIsATotalOrder) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> pri(0, 2), coin(0, 1);
    std::uniform_real_distribution<double> t(0, 10);
    std::vector<Claim> claims;
    for (int i = 0; i < 60; ++i) {
        Claim c;
        c.vehicle = i;
        c.priority = pri(rng);
        c.committed = coin(rng);
        c.arrivalEstimate = std::round(t(rng));
        claims.push_back(c);
    }
    for (const auto &a : claims) {
        EXPECT_FALSE(claimBefore(a, a));
        for (const auto &b : claims) {
            if (a.vehicle != b.vehicle)
                EXPECT_NE(claimBefore(a, b), claimBefore(b, a));
            for (const auto &c : claims)
                if (claimBefore(a, b) && claimBefore(b, c))
                    EXPECT_TRUE(claimBefore(a, c));
        }
    }
}
