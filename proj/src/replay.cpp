#include "trafficsim/replay.h"
#include "trafficsim/error.h"

#include <charconv>
#include <cstdio>
#include <sstream>

namespace trafficsim {

    std::string formatReplayLine(const std::vector<VehiclePose> &poses, std::string_view signalColors) {
        std::string line;
        line.reserve(poses.size() * 40 + signalColors.size() + 2);
        char buf[128];
        for (std::size_t i = 0; i < poses.size(); ++i) {
            const auto &p = poses[i];
            if (i)
                line.push_back(',');
            int n = std::snprintf(buf, sizeof buf, "%.2f %.2f %.4f %.2f ", p.x, p.y, p.heading, p.speed);
            line.append(buf, n);
            line.append(p.id);
        }
        line.push_back(';');
        line.append(signalColors);
        line.push_back('\n');
        return line;
    }

    namespace {
        double parseNumber(std::string_view token, std::string_view line) {
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
            if (ec != std::errc() || ptr != token.data() + token.size())
                throw ParseError("bad number '" + std::string(token) + "' in replay line",
                                 static_cast<std::size_t>(token.data() - line.data()));
            return value;
        }
    }

    ReplayRecord parseReplayLine(std::string_view line) {
        if (!line.empty() && line.back() == '\n')
            line.remove_suffix(1);
        auto sep = line.rfind(';');
        if (sep == std::string_view::npos)
            throw ParseError("replay line without ';' separator");
        ReplayRecord record;
        record.signals = std::string(line.substr(sep + 1));
        for (char c : record.signals)
            if (c != 'r' && c != 'g' && c != 'y')
                throw ParseError(std::string("bad signal character '") + c + "'", sep + 1);
        std::string_view body = line.substr(0, sep);
        while (!body.empty()) {
            auto comma = body.find(',');
            std::string_view entry = body.substr(0, comma);
            std::string_view fields[5];
            std::string_view rest = entry;
            for (int f = 0; f < 4; ++f) {
                auto space = rest.find(' ');
                if (space == std::string_view::npos)
                    throw ParseError("replay entry with fewer than 5 fields");
                fields[f] = rest.substr(0, space);
                rest = rest.substr(space + 1);
            }
            fields[4] = rest;
            if (rest.empty())
                throw ParseError("replay entry without vehicle id");
            record.vehicles.push_back({std::string(fields[4]), parseNumber(fields[0], line),
                                       parseNumber(fields[1], line), parseNumber(fields[2], line),
                                       parseNumber(fields[3], line)});
            if (comma == std::string_view::npos)
                break;
            body = body.substr(comma + 1);
        }
        return record;
    }

    void Digest::update(std::string_view bytes) {
        for (unsigned char c : bytes) {
            hash ^= c;
            hash *= 1099511628211ull;
        }
    }

    std::string Digest::hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
        return buf;
    }

    std::uint64_t fileDigest(const std::string &path) {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw ConfigError("cannot open " + path);
        Digest d;
        char buf[1 << 16];
        while (in) {
            in.read(buf, sizeof buf);
            d.update(std::string_view(buf, static_cast<std::size_t>(in.gcount())));
        }
        return d.value();
    }

    void ReplayWriter::open(const std::string &path) {
        close();
        sum = Digest();
        count = 0;
        if (path.empty())
            return;
        out.open(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw ConfigError("cannot write replay file: " + path);
    }

    void ReplayWriter::close() {
        if (out.is_open())
            out.close();
    }

    void ReplayWriter::write(std::string_view line) {
        sum.update(line);
        ++count;
        if (out.is_open())
            out.write(line.data(), static_cast<std::streamsize>(line.size()));
    }

    void ReplayWriter::flush() {
        if (out.is_open())
            out.flush();
    }

}
