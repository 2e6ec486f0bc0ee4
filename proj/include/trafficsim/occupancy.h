#pragma once

#include "trafficsim/roadnet.h"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace trafficsim {

    struct Occupant {
        double pos = 0.0;          // front position along the drivable
        std::uint64_t order = 0;   // tiebreak for equal positions (vehicle serial)
        int handle = -1;
    };

    // Front-to-back ordering: larger pos first, then smaller order.
    inline bool frontOf(const Occupant &a, const Occupant &b) {
        return a.pos != b.pos ? a.pos > b.pos : a.order < b.order;
    }

    struct Neighbors {
        std::optional<Occupant> leader;   // nearest with pos > query
        std::optional<Occupant> follower; // nearest with pos <= query
    };

    // Vehicles on one lane (or lanelink) kept front to back, with a per-segment index: since the
    // sequence is sorted, each segment's vehicles form a contiguous range of it.
    class LaneOccupancy {
    public:
        LaneOccupancy() = default;
        LaneOccupancy(double length, double segmentLength);

        // Replaces the contents; input need not be sorted.
        void assign(std::vector<Occupant> occupants);
        void insert(const Occupant &occupant);
        bool erase(int handle);
        void clear();

        std::span<const Occupant> sequence() const { return seq; }
        std::size_t size() const { return seq.size(); }
        bool empty() const { return seq.empty(); }
        const Occupant *last() const { return seq.empty() ? nullptr : &seq.back(); }
        const Occupant *first() const { return seq.empty() ? nullptr : &seq.front(); }

        int segmentCount() const { return static_cast<int>(segBegin.size()); }
        int segmentIndex(double pos) const;
        std::span<const Occupant> segment(int index) const;

        // Nearest vehicles around `pos`, inspecting only the segment holding `pos`.
        // `inspected` (if given) receives the number of segments examined.
        Neighbors scanNeighbors(double pos, int *inspected = nullptr) const;

        double length() const { return len; }

    private:
        void rebuildIndex();

        double len = 0.0;
        double segLen = 10.0;
        std::vector<Occupant> seq;
        std::vector<std::size_t> segBegin, segEnd;
    };

}
