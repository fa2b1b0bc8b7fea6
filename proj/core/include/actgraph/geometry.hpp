#pragma once

namespace actgraph {

/// Axis-aligned half-open rectangle in real image coordinates.
/// Construction rejects degenerate or non-finite boxes, so every Box in the
/// system has strictly positive area.
struct Box {
  double x1, y1, x2, y2;

  Box(double x1, double y1, double x2, double y2);

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }

  bool operator==(const Box& other) const = default;
};

double intersection_area(const Box& a, const Box& b);

/// Intersection over union. Symmetric, in [0, 1], zero for disjoint boxes.
double iou(const Box& a, const Box& b);

}  // namespace actgraph
