#pragma once

#include <cmath>

namespace vfrac {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator-(const Point& a, const Point& b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator+(const Point& a, const Vec2& v) { return {a.x + v.x, a.y + v.y}; }
inline Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }
inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a.x + b.x, a.y + b.y}; }

inline double distance(const Point& a, const Point& b) { return (a - b).norm(); }

struct Rect {
  Point lo;
  Point hi;

  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  double area() const { return width() * height(); }

  friend bool operator==(const Rect&, const Rect&) = default;
};

struct Segment {
  Point a;
  Point b;

  double length() const { return distance(a, b); }

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Length of the part of segment s inside the closed disk B(c, r).
inline double segment_length_in_disk(const Segment& s, const Point& c, double r) {
  const Vec2 d = s.b - s.a;
  const Vec2 f = s.a - c;
  const double a = d.norm2();
  if (a == 0.0) return 0.0;
  const double b = 2.0 * f.dot(d);
  const double cc = f.norm2() - r * r;
  const double disc = b * b - 4.0 * a * cc;
  if (disc <= 0.0) return 0.0;
  const double sq = std::sqrt(disc);
  double t0 = (-b - sq) / (2.0 * a);
  double t1 = (-b + sq) / (2.0 * a);
  t0 = std::fmax(t0, 0.0);
  t1 = std::fmin(t1, 1.0);
  if (t1 <= t0) return 0.0;
  return (t1 - t0) * std::sqrt(a);
}

}  // namespace vfrac
