#include "trafficsim/occupancy.h"
#include "trafficsim/error.h"

#include <algorithm>
#include <cmath>

namespace trafficsim {

    LaneOccupancy::LaneOccupancy(double length, double segmentLength) : len(length), segLen(segmentLength) {
        int count = std::max(1, static_cast<int>(std::floor(length / segmentLength)));
        segBegin.assign(static_cast<std::size_t>(count), 0);
        segEnd.assign(static_cast<std::size_t>(count), 0);
    }

    int LaneOccupancy::segmentIndex(double pos) const {
        int idx = static_cast<int>(std::floor(pos / segLen));
        return std::clamp(idx, 0, segmentCount() - 1);
    }

    void LaneOccupancy::assign(std::vector<Occupant> occupants) {
        seq = std::move(occupants);
        std::sort(seq.begin(), seq.end(), frontOf);
        rebuildIndex();
    }

    void LaneOccupancy::insert(const Occupant &occupant) {
        auto it = std::lower_bound(seq.begin(), seq.end(), occupant, frontOf);
        seq.insert(it, occupant);
        rebuildIndex();
    }

    bool LaneOccupancy::erase(int handle) {
        auto it = std::find_if(seq.begin(), seq.end(), [&](const Occupant &o) { return o.handle == handle; });
        if (it == seq.end())
            return false;
        seq.erase(it);
        rebuildIndex();
        return true;
    }

    void LaneOccupancy::clear() {
        seq.clear();
        rebuildIndex();
    }

    void LaneOccupancy::rebuildIndex() {
        // walk segments from the far end so ranges line up with the front-to-back sequence
        std::size_t cursor = 0;
        for (int s = segmentCount() - 1; s >= 0; --s) {
            segBegin[s] = cursor;
            while (cursor < seq.size() && segmentIndex(seq[cursor].pos) >= s)
                ++cursor;
            segEnd[s] = cursor;
        }
    }

    std::span<const Occupant> LaneOccupancy::segment(int index) const {
        return std::span<const Occupant>(seq).subspan(segBegin[index], segEnd[index] - segBegin[index]);
    }

    Neighbors LaneOccupancy::scanNeighbors(double pos, int *inspected) const {
        if (!(pos >= 0.0) || pos > len)
            throw ParameterError("scan position outside the lane");
        int s = segmentIndex(pos);
        // vehicles ahead of pos precede the boundary inside this segment's range; an empty range
        // already sits at the boundary
        std::size_t j = segBegin[s];
        while (j < segEnd[s] && seq[j].pos > pos)
            ++j;
        if (inspected)
            *inspected = 1;
        Neighbors out;
        if (j > 0)
            out.leader = seq[j - 1];
        if (j < seq.size())
            out.follower = seq[j];
        return out;
    }

}
