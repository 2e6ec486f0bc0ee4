#pragma once

#include "trafficsim/roadnet.h"

#include <optional>
#include <vector>

namespace trafficsim {

    enum class SignalColor { Green, Yellow, Red };

    char colorChar(SignalColor color);

    // Runtime signal of one intersection. Roadlinks are addressed by their local index in
    // Intersection::roadLinks.
    class SignalState {
    public:
        SignalState() = default;
        SignalState(const Intersection &intersection, double yellowTime);

        int currentPhase() const { return phase; }
        std::optional<int> pendingPhase() const { return pending; }
        double timeInPhase() const { return elapsed; }
        int phaseCount() const { return static_cast<int>(phaseSets.size()); }

        SignalColor color(int localRoadLink) const;

        // Same phase (or already pending) is a no-op. Otherwise roadlinks losing green turn
        // yellow for yellowTime before the new phase activates; `immediate` skips the yellow.
        void request(int newPhase, bool immediate = false);

        // Activates a pending phase whose yellow has run out. Called at the start of a step.
        void settle();

        // Advances timers by dt at the end of a step.
        void tick(double dt);

        bool inYellow() const { return pending.has_value(); }

    private:
        std::vector<std::vector<bool>> phaseSets;
        double yellowTime = 3.0;
        int phase = 0;
        std::optional<int> pending;
        double elapsed = 0.0;
        double yellowElapsed = 0.0;
    };

}
