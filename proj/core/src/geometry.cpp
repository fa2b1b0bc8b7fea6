#include "actgraph/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace actgraph {

Box::Box(double x1, double y1, double x2, double y2)
    : x1(x1), y1(y1), x2(x2), y2(y2) {
  const bool finite = std::isfinite(x1) && std::isfinite(y1) &&
                      std::isfinite(x2) && std::isfinite(y2);
  if (!finite || x1 >= x2 || y1 >= y2) {
    throw std::invalid_argument("Box requires finite coordinates with x1 < x2 and y1 < y2");
  }
}

double intersection_area(const Box& a, const Box& b) {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const Box& a, const Box& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return inter / uni;
}

}  // namespace actgraph
