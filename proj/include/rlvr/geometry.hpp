#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rlvr {

/// Upper bound of the normalized image coordinate range [0, 1000).
inline constexpr double kCoordRange = 1000.0;
/// Gap kept below kCoordRange when clamping normalized coordinates.
inline constexpr double kCoordEpsilon = 1e-6;
/// Resampled length used to align trajectories before RMSE.
inline constexpr std::size_t kDefaultRmseSamples = 50;

/// A 2D position in normalized image coordinates, origin at the top-left.
struct Point2D {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2D&, const Point2D&) = default;
};

/// Ordered waypoints. Must be non-empty for every distance below.
using Trajectory = std::vector<Point2D>;

/// Axis-aligned box. A canonical box has x1 <= x2 and y1 <= y2.
struct BBox {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    /// Copy with corners swapped so that x1 <= x2 and y1 <= y2.
    BBox canonical() const;
    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }
    bool degenerate() const { return !(width() > 0.0 && height() > 0.0); }

    friend bool operator==(const BBox&, const BBox&) = default;
};

double euclidean(const Point2D& a, const Point2D& b);

/// Maps pixel coordinates into [0, 1000 - 1e-6]. Throws on non-positive
/// image dimensions.
Trajectory normalize_coords(std::span<const Point2D> pixels, double width, double height);
BBox normalize_box(const BBox& pixels, double width, double height);

/// Intersection over union. 0 when the union has zero area.
double iou(const BBox& a, const BBox& b);

/// Discrete Fréchet distance (Eiter-Mannila coupling DP, Euclidean ground metric).
double discrete_frechet(std::span<const Point2D> p, std::span<const Point2D> q);

/// Symmetric Hausdorff distance between the two point sets.
double hausdorff(std::span<const Point2D> p, std::span<const Point2D> q);

/// Resamples the polyline to `count` points at equal arc-length spacing.
/// Endpoints are kept exactly; a zero-length path yields `count` copies of
/// its single location; count == 1 yields the first point.
Trajectory resample(std::span<const Point2D> t, std::size_t count);

/// Root-mean-square pointwise error after resampling both inputs to `samples`.
double rmse(std::span<const Point2D> p, std::span<const Point2D> q,
            std::size_t samples = kDefaultRmseSamples);

/// Dynamic time warping total cost: Euclidean local cost, steps
/// {(1,0),(0,1),(1,1)}, no window.
double dtw(std::span<const Point2D> p, std::span<const Point2D> q);

/// Distance between the final points of the two trajectories.
double endpoint_distance(std::span<const Point2D> p, std::span<const Point2D> q);

}  // namespace rlvr
