#include "trafficsim/geometry.h"

#include <algorithm>
#include <limits>

namespace trafficsim {

    Polyline::Polyline(std::vector<Point> points) : pts(std::move(points)) {
        cumulative.reserve(pts.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i > 0)
                acc += distance(pts[i - 1], pts[i]);
            cumulative.push_back(acc);
        }
    }

    double Polyline::minSegmentLength() const {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            best = std::min(best, cumulative[i + 1] - cumulative[i]);
        return pts.size() < 2 ? 0.0 : best;
    }

    Pose Polyline::poseAt(double s) const {
        if (pts.empty())
            return {};
        if (pts.size() == 1)
            return {pts.front(), 0.0};
        s = std::clamp(s, 0.0, length());
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
        std::size_t seg = it == cumulative.begin() ? 0 : static_cast<std::size_t>(it - cumulative.begin()) - 1;
        seg = std::min(seg, pts.size() - 2);
        // skip zero-length pieces so the heading stays meaningful
        while (seg + 2 < pts.size() && cumulative[seg + 1] - cumulative[seg] <= 0.0)
            ++seg;
        double segLen = cumulative[seg + 1] - cumulative[seg];
        Point d = pts[seg + 1] - pts[seg];
        double t = segLen > 0 ? (s - cumulative[seg]) / segLen : 0.0;
        return {pts[seg] + d * t, std::atan2(d.y, d.x)};
    }

    std::vector<Point> offsetPolyline(std::span<const Point> points, double offset) {
        std::vector<Point> out;
        out.reserve(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            Point n{};
            if (i > 0)
                n = n + rightNormal(points[i] - points[i - 1]);
            if (i + 1 < points.size())
                n = n + rightNormal(points[i + 1] - points[i]);
            double len = n.length();
            if (len > 0)
                n = n * (1.0 / len);
            out.push_back(points[i] + n * offset);
        }
        return out;
    }

    std::vector<Point> turnPath(const Point &from, const Point &dirIn, const Point &to, const Point &dirOut,
                                double resolution) {
        double denom = cross(dirIn, dirOut);
        if (std::abs(denom) < 1e-9)
            return {from, to};
        // from + dirIn * u == to - dirOut * w
        double u = cross(to - from, dirOut) / denom;
        Point control = from + dirIn * u;
        double approx = distance(from, control) + distance(control, to);
        int pieces = std::max(2, static_cast<int>(std::ceil(approx / resolution)));
        std::vector<Point> out;
        out.reserve(static_cast<std::size_t>(pieces) + 1);
        for (int i = 0; i <= pieces; ++i) {
            double t = static_cast<double>(i) / pieces;
            double a = (1 - t) * (1 - t), b = 2 * (1 - t) * t, c = t * t;
            out.push_back(from * a + control * b + to * c);
        }
        out.front() = from;
        out.back() = to;
        return out;
    }

    std::optional<SegmentHit> intersectSegments(const Point &a0, const Point &a1, const Point &b0, const Point &b1) {
        constexpr double eps = 1e-12;
        Point r = a1 - a0, s = b1 - b0, qp = b0 - a0;
        double rxs = cross(r, s);
        double scale = std::max({r.length() * s.length(), 1.0});
        if (std::abs(rxs) > eps * scale) {
            double t = cross(qp, s) / rxs;
            double u = cross(qp, r) / rxs;
            constexpr double tol = 1e-10;
            if (t < -tol || t > 1 + tol || u < -tol || u > 1 + tol)
                return std::nullopt;
            return SegmentHit{std::clamp(t, 0.0, 1.0), std::clamp(u, 0.0, 1.0)};
        }
        // parallel
        if (std::abs(cross(qp, r)) > 1e-9 * std::max(r.length(), 1.0))
            return std::nullopt;
        double rr = dot(r, r), ss = dot(s, s);
        if (rr <= 0 || ss <= 0)
            return std::nullopt;
        double t0 = dot(qp, r) / rr;
        double t1 = t0 + dot(s, r) / rr;
        double lo = std::max(0.0, std::min(t0, t1));
        double hi = std::min(1.0, std::max(t0, t1));
        if (lo > hi + 1e-12)
            return std::nullopt;
        Point p = a0 + r * lo;
        double u = dot(p - b0, s) / ss;
        return SegmentHit{lo, std::clamp(u, 0.0, 1.0)};
    }

    std::optional<PolylineHit> firstIntersection(const Polyline &a, const Polyline &b) {
        std::optional<PolylineHit> best;
        const auto &pa = a.points();
        const auto &pb = b.points();
        for (std::size_t i = 0; i < a.segmentCount(); ++i) {
            if (best && a.offsetOf(i) > best->distA)
                break;
            Point da = pa[i + 1] - pa[i];
            for (std::size_t j = 0; j < b.segmentCount(); ++j) {
                auto hit = intersectSegments(pa[i], pa[i + 1], pb[j], pb[j + 1]);
                if (!hit)
                    continue;
                Point db = pb[j + 1] - pb[j];
                double distA = a.offsetOf(i) + hit->tA * da.length();
                double distB = b.offsetOf(j) + hit->tB * db.length();
                if (!best || distA < best->distA - 1e-12 ||
                    (std::abs(distA - best->distA) <= 1e-12 && distB < best->distB)) {
                    double angle = std::atan2(std::abs(cross(da, db)), dot(da, db));
                    best = PolylineHit{distA, distB, angle, pa[i] + da * hit->tA};
                }
            }
        }
        return best;
    }

}
