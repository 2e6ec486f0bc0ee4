#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace trafficsim {

    struct VehiclePose {
        std::string id;
        double x = 0.0;
        double y = 0.0;
        double heading = 0.0;
        double speed = 0.0;
    };

    // One replay line: "x y heading speed id" entries joined by ',', then ';', then one
    // signal character per lanelink, then '\n'. Coordinates and speed use 2 decimals, heading 4.
    std::string formatReplayLine(const std::vector<VehiclePose> &poses, std::string_view signalColors);

    struct ReplayRecord {
        std::vector<VehiclePose> vehicles;
        std::string signals;
    };

    // Inverse of formatReplayLine (values are rounded as written). Throws ParseError.
    ReplayRecord parseReplayLine(std::string_view line);

    // 64-bit FNV-1a, used to compare replay streams.
    class Digest {
    public:
        void update(std::string_view bytes);
        std::uint64_t value() const { return hash; }
        std::string hex() const;

    private:
        std::uint64_t hash = 14695981039346656037ull;
    };

    std::uint64_t fileDigest(const std::string &path);

    // Appends replay lines to a file (optional) and keeps a running digest of everything written.
    class ReplayWriter {
    public:
        ReplayWriter() = default;

        // Truncates `path`; an empty path keeps only the digest.
        void open(const std::string &path);
        void close();
        void write(std::string_view line);
        void flush();

        const Digest &digest() const { return sum; }
        std::uint64_t lines() const { return count; }

    private:
        std::ofstream out;
        Digest sum;
        std::uint64_t count = 0;
    };

}
