#pragma once

#include <vector>

#include <Eigen/Dense>

namespace deltacharger::geometry {

using Point = Eigen::Vector2d;
/// Convex polygon, counter-clockwise vertex order.
using Polygon = std::vector<Point>;

Polygon rectangle(const Point& center, double width, double height);

/// Rotates about the origin by `angle_deg`, then translates.
Polygon rigid_transform(const Polygon& poly, double angle_deg, const Point& translation);

/// Sutherland-Hodgman clip of `subject` against the convex polygon `clipper`.
Polygon clip(const Polygon& subject, const Polygon& clipper);

double area(const Polygon& poly);

inline double overlap_area(const Polygon& a, const Polygon& b) { return area(clip(a, b)); }

}  // namespace deltacharger::geometry
