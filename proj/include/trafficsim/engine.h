#pragma once

#include "trafficsim/demand.h"
#include "trafficsim/intersection.h"
#include "trafficsim/lanechange.h"
#include "trafficsim/occupancy.h"
#include "trafficsim/replay.h"
#include "trafficsim/roadnet.h"
#include "trafficsim/signal.h"
#include "trafficsim/thread_pool.h"

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace trafficsim {

    struct EngineConfig {
        double interval = 1.0;
        std::uint64_t seed = 0;
        std::string dir;            // prefix for the file entries below
        std::string roadnetFile;
        std::string flowFile;
        bool rlTrafficLight = true; // true: phases change only through setTlPhase
        bool saveReplay = false;
        std::string roadnetLogFile;
        std::string replayLogFile;
        bool laneChange = false;
        int threads = 1;
        double segmentLength = 10.0;
        double yellowTime = 3.0;
        bool checkInvariants = false; // audit after every step
        bool haltOnViolation = true;  // throw InvariantError instead of logging
        bool recordTrips = false;     // keep one Trip per finished vehicle

        std::string resolve(const std::string &file) const;
        void validate() const;
    };

    // Config document keys match the field names. `dir` is taken relative to the config file's
    // directory when it is not absolute. Throws ConfigError.
    EngineConfig parseConfig(std::string_view text, const std::string &baseDir = "");
    EngineConfig loadConfig(const std::string &path);
    std::string serializeConfig(const EngineConfig &config);

    struct EngineStats {
        std::uint64_t spawned = 0;   // vehicles created by flows or pushVehicle
        std::uint64_t inserted = 0;
        std::uint64_t finished = 0;
        double totalDuration = 0.0;  // over finished vehicles
        std::uint64_t laneChangesStarted = 0;
        std::uint64_t laneChangesFinished = 0;
        std::uint64_t laneChangesRejected = 0;
        std::uint64_t routeFailures = 0;
        std::uint64_t redLightCrossings = 0;
        std::uint64_t migrationClamps = 0;
        std::uint64_t deadlockPromotions = 0;
        int maxCrossInteractions = 0;      // claims touched by one vehicle in one step
        bool crossInteractionsBounded = true; // never more than the cross points on its lanelink
        int maxSegmentsInspected = 0;
    };

    struct Trip {
        std::string id;
        std::vector<int> route;
        double enterTime = 0.0;
        double exitTime = 0.0;
    };

    // Public snapshot of one vehicle.
    struct VehicleView {
        std::string id;
        std::string drivable; // lane or lanelink id
        double pos = 0.0;
        double speed = 0.0;
        double length = 0.0;
        bool onLaneLink = false;
        bool changingLane = false;
        double enterTime = 0.0;
    };

    class Engine {
    public:
        explicit Engine(const std::string &configFile);
        Engine(EngineConfig config, RoadNet net, std::vector<FlowSpec> flows);
        ~Engine();

        Engine(const Engine &) = delete;
        Engine &operator=(const Engine &) = delete;

        void nextStep();

        void setTlPhase(const std::string &intersectionId, int phase, bool immediate = false);
        int getTlPhase(const std::string &intersectionId) const;

        double getCurrentTime() const { return time; }
        std::uint64_t getStepCount() const { return step; }
        std::map<std::string, int> getLaneVehicleCount() const;
        std::map<std::string, int> getLaneWaitingVehicleCount() const;
        std::map<std::string, std::vector<std::string>> getLaneVehicles() const;
        std::map<std::string, double> getVehicleSpeed() const;
        // (sum of finished durations + sum over vehicles on the network of (now - enterTime))
        // divided by the number of vehicles counted; 0 when none.
        double getAverageTravelTime() const;
        int getVehicleCount() const; // on the network, shadows excluded

        // Queues a vehicle at lane `lane` of route[0]; returns its id. Throws SemanticError for a
        // disconnected route and ParameterError for a bad lane or parameters.
        std::string pushVehicle(const VehicleParams &params, const std::vector<std::string> &route, int lane);

        // Test and tooling hook: puts a vehicle directly on a lane at `pos` with `speed`, bypassing
        // the entry queues. Throws ParameterError if the spot is occupied.
        std::string placeVehicle(const VehicleParams &params, const std::vector<std::string> &route, int lane,
                                 double pos, double speed);

        void reset(bool keepRng = false);

        // Signal timing for auto-advancing lights. Rejected (ContractError) under rlTrafficLight.
        void setPhaseDurations(const std::string &intersectionId, const std::vector<double> &durations);
        void setCycleLength(const std::string &intersectionId, double seconds); // empty id: all
        void setGreenRatio(const std::string &intersectionId, const std::vector<double> &splits);
        std::vector<double> getPhaseDurations(const std::string &intersectionId) const;
        // Multiplies every flow's nominal rate relative to its file value, from the next spawn on.
        void setVolumeScale(double factor);

        // Exhaustive audit of the committed state. Returns one message per violation.
        std::vector<std::string> checkInvariants() const;

        const RoadNet &roadnet() const { return net; }
        const EngineConfig &config() const { return cfg; }
        const EngineStats &stats() const { return counters; }
        const std::vector<Trip> &trips() const { return tripLog; }
        std::vector<VehicleView> vehicles() const;
        std::optional<VehicleView> vehicle(const std::string &id) const;
        std::vector<VehiclePose> vehiclePoses() const;
        std::string signalColors() const;       // one r/y/g per lanelink, declaration order
        SignalColor laneLinkColor(int laneLink) const;
        std::size_t queuedVehicles() const;
        const Digest &replayDigest() const { return replay.digest(); }
        // Claims currently registered at a cross point (global index).
        const CrossPointClaims &claimsAt(int crossPoint) const { return claims[crossPoint]; }
        // Where a vehicle's centre sits along `laneLink` (negative before it), if the vehicle is on
        // its start lane heading there, on it, or on its end lane having come through it.
        std::optional<double> centerAlong(const std::string &vehicleId, int laneLink) const;
        // Clearance half-window a vehicle needs around a cross point.
        double clearance(const std::string &vehicleId, int crossPoint) const;

        void writeRoadnetLog(const std::string &path) const;

    private:
        struct Vehicle {
            bool alive = false;
            std::string id;
            std::uint64_t serial = 0;
            VehicleParams params;
            std::vector<int> route; // road indices
            std::size_t routeIndex = 0;
            int drivable = -1;
            double pos = 0.0;
            double speed = 0.0;
            double prevSpeed = 0.0;
            std::uint64_t insertedAt = 0; // step that inserted it; it moves from the next one
            int prevLink = -1;
            double enterTime = 0.0;
            LaneChangeState change;
            int partner = -1; // shadow of an original, or original of a shadow
            bool isShadow = false;
            double lastChangeEnd = -1e9;
            double yieldTime = 0.0; // time spent stopped by a cross point yield at the lane front
            // lanelinks this vehicle is committed to, newest first, with the commit time
            std::array<std::pair<int, double>, 2> commits{{{-1, 0.0}, {-1, 0.0}}};
            bool routeFailed = false;
            // plan outputs
            double planned = 0.0;
            bool yielding = false;
            std::optional<ChangeIntent> intent;
            int interactions = 0;
            bool interactionsBounded = true;
        };

        struct Pending {
            std::string id;
            std::uint64_t serial;
            VehicleParams params;
            std::vector<int> route;
        };

        struct Leader {
            double gap; // bumper gap
            double speed;
            const VehicleParams *params;
        };

        void initialise();
        int allocate();
        void releaseSlot(int handle);
        int nextLinkOf(const Vehicle &v) const;
        int nextLinkFrom(int lane, const std::vector<int> &route, std::size_t routeIndex) const;
        int chooseEntryLane(std::size_t flow);
        std::string createPending(std::string id, const VehicleParams &params, std::vector<int> route, int lane);
        int createVehicle(const Pending &p, int lane, double pos, double speed);

        void spawnAndInsert();
        void advanceSignals();
        void notifyIntersection(int intersection);
        void planVehicle(Vehicle &v, std::size_t seqIndex);
        void planShadow(Vehicle &v, std::size_t seqIndex);
        void planLaneChange(Vehicle &v);
        void moveVehicles();
        void rebuildOccupancy();
        void finishLaneChanges();
        void beginLaneChanges();
        void updateBookkeeping();
        void recordReplay();

        std::optional<Leader> leaderOf(const Vehicle &v, std::size_t seqIndex) const;
        // Nearest vehicle ahead of `pos` beyond the end of `drivable`, following the route.
        std::optional<Leader> lookahead(int drivable, double pos, const std::vector<int> &route,
                                        std::size_t routeIndex) const;
        double gentleStop(const Vehicle &v, double distance) const;
        bool roomAfter(int laneLink, const Vehicle &v) const;
        std::optional<Leader> leaderAt(int drivable, double pos, const std::vector<int> &route,
                                       std::size_t routeIndex) const;
        bool canStopWithin(const Vehicle &v, double distance) const;
        std::optional<double> commitTime(const Vehicle &v, int laneLink) const;
        void commit(Vehicle &v, int laneLink, bool promoted);
        // How far past the stop line (negative: before it) a vehicle's front may go while yielding
        // on every cross point of `laneLink`; never positive.
        double approachSlack(const VehicleParams &params, int laneLink) const;
        bool gapAccepted(const Vehicle &v, int laneLink, int crossPoint) const;
        double clearanceFor(const VehicleParams &params, int crossPoint) const;
        double centerOn(const Vehicle &v, int laneLink) const;
        int handleOf(const std::string &id) const;
        Pose poseOf(const Vehicle &v) const;
        std::vector<int> routeIndices(const std::vector<std::string> &route) const;
        int intersectionIndex(const std::string &id) const;
        void requireTimingControl() const;

        EngineConfig cfg;
        RoadNet net;
        std::vector<FlowSpec> flows;
        std::unique_ptr<ThreadPool> workers;
        std::mt19937_64 rng;

        double time = 0.0;
        std::uint64_t step = 0;
        std::uint64_t nextSerial = 0;
        std::uint64_t pushedCount = 0;
        EngineStats counters;

        std::vector<Vehicle> slots;
        std::vector<int> freeSlots;
        std::unordered_map<std::string, int> byId; // originals only
        std::vector<LaneOccupancy> occupancy;     // per drivable
        std::vector<std::vector<Occupant>> buckets; // rebuild scratch, per drivable
        std::vector<std::deque<Pending>> entryQueues; // per lane
        std::vector<FlowSchedule> schedules;
        std::vector<int> roundRobin;
        std::vector<SignalState> signals;
        std::vector<std::vector<double>> phaseDurations;
        std::vector<int> localRoadLink; // global roadlink -> index within its intersection
        std::vector<CrossPointClaims> claims;
        ReplayWriter replay;
        std::vector<Trip> tripLog;
    };

}
