#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace trafficsim {

    struct Point {
        double x = 0.0;
        double y = 0.0;

        Point operator+(const Point &o) const { return {x + o.x, y + o.y}; }
        Point operator-(const Point &o) const { return {x - o.x, y - o.y}; }
        Point operator*(double k) const { return {x * k, y * k}; }
        bool operator==(const Point &o) const = default;

        double length() const { return std::hypot(x, y); }
        bool isFinite() const { return std::isfinite(x) && std::isfinite(y); }
    };

    inline double dot(const Point &a, const Point &b) { return a.x * b.x + a.y * b.y; }
    inline double cross(const Point &a, const Point &b) { return a.x * b.y - a.y * b.x; }
    inline double distance(const Point &a, const Point &b) { return (a - b).length(); }

    // Unit normal pointing to the right of direction `d`.
    inline Point rightNormal(const Point &d) {
        double len = d.length();
        return len > 0 ? Point{d.y / len, -d.x / len} : Point{};
    }

    struct Pose {
        Point point;
        double heading = 0.0; // radians, atan2 convention
    };

    // Polyline with cached cumulative arc length.
    class Polyline {
    public:
        Polyline() = default;
        explicit Polyline(std::vector<Point> points);

        const std::vector<Point> &points() const { return pts; }
        double length() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
        std::size_t segmentCount() const { return pts.size() < 2 ? 0 : pts.size() - 1; }

        // Arc length at the start of segment i.
        double offsetOf(std::size_t segment) const { return cumulative[segment]; }

        // Smallest segment length; zero means a degenerate path.
        double minSegmentLength() const;

        Pose poseAt(double s) const;

    private:
        std::vector<Point> pts;
        std::vector<double> cumulative;
    };

    // Offsets every vertex along the averaged right normal of its adjacent segments.
    std::vector<Point> offsetPolyline(std::span<const Point> points, double offset);

    // Quadratic Bezier from `from` to `to` whose control point is the meeting point of
    // the incoming and outgoing directions; falls back to a straight line when they are parallel.
    // Sampled with spacing no larger than `resolution`.
    std::vector<Point> turnPath(const Point &from, const Point &dirIn, const Point &to, const Point &dirOut,
                                double resolution = 2.0);

    struct SegmentHit {
        double tA; // fraction along segment A
        double tB;
    };

    // Intersection of closed segments [a0,a1] and [b0,b1]. For collinear overlaps the hit
    // closest to a0 is returned.
    std::optional<SegmentHit> intersectSegments(const Point &a0, const Point &a1, const Point &b0, const Point &b1);

    struct PolylineHit {
        double distA;
        double distB;
        double angle; // radians in [0, pi] between the two travel directions
        Point point;
    };

    // First crossing along A (ties broken by smaller distance along B).
    std::optional<PolylineHit> firstIntersection(const Polyline &a, const Polyline &b);

}
