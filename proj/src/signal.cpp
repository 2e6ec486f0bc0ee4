#include "trafficsim/signal.h"
#include "trafficsim/error.h"

namespace trafficsim {

    char colorChar(SignalColor color) {
        switch (color) {
            case SignalColor::Green: return 'g';
            case SignalColor::Yellow: return 'y';
            case SignalColor::Red: return 'r';
        }
        return 'r';
    }

    SignalState::SignalState(const Intersection &intersection, double yellowTime) : yellowTime(yellowTime) {
        for (const auto &p : intersection.phases) {
            std::vector<bool> set(intersection.roadLinks.size(), false);
            for (int rl : p.availableRoadLinks)
                set.at(static_cast<std::size_t>(rl)) = true;
            phaseSets.push_back(std::move(set));
        }
    }

    SignalColor SignalState::color(int localRoadLink) const {
        if (phaseSets.empty())
            return SignalColor::Green;
        bool green = phaseSets[phase][localRoadLink];
        if (!pending)
            return green ? SignalColor::Green : SignalColor::Red;
        if (!green)
            return SignalColor::Red;
        return phaseSets[*pending][localRoadLink] ? SignalColor::Green : SignalColor::Yellow;
    }

    void SignalState::request(int newPhase, bool immediate) {
        if (newPhase < 0 || newPhase >= phaseCount())
            throw ParameterError("phase index " + std::to_string(newPhase) + " out of range");
        if (immediate) {
            phase = newPhase;
            pending.reset();
            elapsed = yellowElapsed = 0.0;
            return;
        }
        if (pending) {
            if (*pending == newPhase)
                return;
            if (newPhase == phase) {
                // back to the running phase: cancel the transition
                pending.reset();
                yellowElapsed = 0.0;
                return;
            }
            pending = newPhase;
            return;
        }
        if (newPhase == phase)
            return;
        pending = newPhase;
        yellowElapsed = 0.0;
    }

    void SignalState::settle() {
        if (pending && yellowElapsed >= yellowTime - 1e-9) {
            phase = *pending;
            pending.reset();
            elapsed = yellowElapsed = 0.0;
        }
    }

    void SignalState::tick(double dt) {
        if (pending)
            yellowElapsed += dt;
        else
            elapsed += dt;
    }

}
