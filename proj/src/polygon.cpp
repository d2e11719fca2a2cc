#include "deltacharger/polygon.hpp"

#include <cmath>
#include <numbers>

namespace deltacharger::geometry {

Polygon rectangle(const Point& center, double width, double height) {
    const double hx = width / 2, hy = height / 2;
    return {center + Point(-hx, -hy), center + Point(hx, -hy), center + Point(hx, hy),
            center + Point(-hx, hy)};
}

Polygon rigid_transform(const Polygon& poly, double angle_deg, const Point& translation) {
    const Eigen::Rotation2Dd rot(angle_deg * std::numbers::pi / 180.0);
    Polygon out;
    out.reserve(poly.size());
    for (const auto& p : poly) out.push_back(rot * p + translation);
    return out;
}

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

Polygon clip(const Polygon& subject, const Polygon& clipper) {
    Polygon output = subject;
    const std::size_t n = clipper.size();
    for (std::size_t e = 0; e < n && !output.empty(); ++e) {
        const Point& a = clipper[e];
        const Point& b = clipper[(e + 1) % n];
        const Point edge = b - a;
        auto side = [&](const Point& p) { return cross(edge, p - a); };

        Polygon input;
        input.swap(output);
        for (std::size_t i = 0; i < input.size(); ++i) {
            const Point& cur = input[i];
            const Point& prev = input[(i + input.size() - 1) % input.size()];
            const double sc = side(cur), sp = side(prev);
            if (sc >= 0) {
                if (sp < 0) output.push_back(prev + (cur - prev) * (sp / (sp - sc)));
                output.push_back(cur);
            } else if (sp >= 0) {
                output.push_back(prev + (cur - prev) * (sp / (sp - sc)));
            }
        }
    }
    return output;
}

double area(const Polygon& poly) {
    if (poly.size() < 3) return 0.0;
    double twice = 0;
    for (std::size_t i = 0; i < poly.size(); ++i) twice += cross(poly[i], poly[(i + 1) % poly.size()]);
    return std::abs(twice) / 2;
}

}  // namespace deltacharger::geometry
