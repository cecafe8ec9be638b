#include "rlvr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rlvr/error.hpp"

namespace rlvr {

namespace {

void require_non_empty(std::span<const Point2D> p, std::span<const Point2D> q, const char* op) {
    if (p.empty() || q.empty()) {
        throw Error(ErrorCode::EmptyTrajectory, std::string(op) + ": empty trajectory");
    }
}

double clamp_coord(double v) {
    return std::clamp(v, 0.0, kCoordRange - kCoordEpsilon);
}

void require_dimensions(double width, double height) {
    if (!(width > 0.0) || !(height > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "normalize_coords: image dimensions must be positive");
    }
}

// Row-major (|p| x |q|) scratch table for the lattice DPs.
class Lattice {
public:
    Lattice(std::size_t rows, std::size_t cols) : cols_(cols), data_(rows * cols, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

private:
    std::size_t cols_;
    std::vector<double> data_;
};

}  // namespace

BBox BBox::canonical() const {
    return BBox{std::min(x1, x2), std::min(y1, y2), std::max(x1, x2), std::max(y1, y2)};
}

double euclidean(const Point2D& a, const Point2D& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

Trajectory normalize_coords(std::span<const Point2D> pixels, double width, double height) {
    require_dimensions(width, height);
    Trajectory out;
    out.reserve(pixels.size());
    for (const auto& p : pixels) {
        out.push_back({clamp_coord(p.x / width * kCoordRange), clamp_coord(p.y / height * kCoordRange)});
    }
    return out;
}

BBox normalize_box(const BBox& pixels, double width, double height) {
    require_dimensions(width, height);
    return BBox{clamp_coord(pixels.x1 / width * kCoordRange), clamp_coord(pixels.y1 / height * kCoordRange),
                clamp_coord(pixels.x2 / width * kCoordRange), clamp_coord(pixels.y2 / height * kCoordRange)}
        .canonical();
}

double iou(const BBox& a, const BBox& b) {
    const double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
    const double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    if (!(uni > 0.0)) {
        return 0.0;
    }
    return std::clamp(inter / uni, 0.0, 1.0);
}

double discrete_frechet(std::span<const Point2D> p, std::span<const Point2D> q) {
    require_non_empty(p, q, "discrete_frechet");
    const std::size_t n = p.size();
    const std::size_t m = q.size();
    Lattice ca(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double d = euclidean(p[i], q[j]);
            if (i == 0 && j == 0) {
                ca(i, j) = d;
            } else if (i == 0) {
                ca(i, j) = std::max(ca(i, j - 1), d);
            } else if (j == 0) {
                ca(i, j) = std::max(ca(i - 1, j), d);
            } else {
                ca(i, j) = std::max(std::min({ca(i - 1, j), ca(i - 1, j - 1), ca(i, j - 1)}), d);
            }
        }
    }
    return ca(n - 1, m - 1);
}

namespace {

// Directed Hausdorff with early break: the inner scan stops as soon as the
// running nearest distance drops below the current maximum, since that point
// can no longer raise the result.
double directed_hausdorff(std::span<const Point2D> from, std::span<const Point2D> to) {
    double cmax = 0.0;
    for (const auto& a : from) {
        double cmin = std::numeric_limits<double>::infinity();
        bool pruned = false;
        for (const auto& b : to) {
            const double d = euclidean(a, b);
            if (d < cmax) {
                pruned = true;
                break;
            }
            cmin = std::min(cmin, d);
        }
        if (!pruned) {
            cmax = std::max(cmax, cmin);
        }
    }
    return cmax;
}

}  // namespace

double hausdorff(std::span<const Point2D> p, std::span<const Point2D> q) {
    require_non_empty(p, q, "hausdorff");
    return std::max(directed_hausdorff(p, q), directed_hausdorff(q, p));
}

Trajectory resample(std::span<const Point2D> t, std::size_t count) {
    if (t.empty()) {
        throw Error(ErrorCode::EmptyTrajectory, "resample: empty trajectory");
    }
    if (count == 0) {
        return {};
    }
    if (count == 1) {
        return {t.front()};
    }

    std::vector<double> cumulative(t.size(), 0.0);
    for (std::size_t i = 1; i < t.size(); ++i) {
        cumulative[i] = cumulative[i - 1] + euclidean(t[i - 1], t[i]);
    }
    const double total = cumulative.back();
    if (!(total > 0.0)) {
        return Trajectory(count, t.front());
    }

    Trajectory out;
    out.reserve(count);
    out.push_back(t.front());
    std::size_t seg = 1;
    for (std::size_t k = 1; k + 1 < count; ++k) {
        const double target = total * static_cast<double>(k) / static_cast<double>(count - 1);
        while (seg + 1 < t.size() && cumulative[seg] < target) {
            ++seg;
        }
        const double len = cumulative[seg] - cumulative[seg - 1];
        const double frac = len > 0.0 ? std::clamp((target - cumulative[seg - 1]) / len, 0.0, 1.0) : 1.0;
        const Point2D& a = t[seg - 1];
        const Point2D& b = t[seg];
        out.push_back({a.x + frac * (b.x - a.x), a.y + frac * (b.y - a.y)});
    }
    out.push_back(t.back());
    return out;
}

double rmse(std::span<const Point2D> p, std::span<const Point2D> q, std::size_t samples) {
    require_non_empty(p, q, "rmse");
    if (samples == 0) {
        throw Error(ErrorCode::InvalidArgument, "rmse: sample count must be positive");
    }
    const Trajectory a = resample(p, samples);
    const Trajectory b = resample(q, samples);
    double sum = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double dx = a[i].x - b[i].x;
        const double dy = a[i].y - b[i].y;
        sum += dx * dx + dy * dy;
    }
    return std::sqrt(sum / static_cast<double>(samples));
}

double dtw(std::span<const Point2D> p, std::span<const Point2D> q) {
    require_non_empty(p, q, "dtw");
    const std::size_t n = p.size();
    const std::size_t m = q.size();
    Lattice acc(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double d = euclidean(p[i], q[j]);
            if (i == 0 && j == 0) {
                acc(i, j) = d;
            } else if (i == 0) {
                acc(i, j) = acc(i, j - 1) + d;
            } else if (j == 0) {
                acc(i, j) = acc(i - 1, j) + d;
            } else {
                acc(i, j) = d + std::min({acc(i - 1, j), acc(i - 1, j - 1), acc(i, j - 1)});
            }
        }
    }
    return acc(n - 1, m - 1);
}

double endpoint_distance(std::span<const Point2D> p, std::span<const Point2D> q) {
    require_non_empty(p, q, "endpoint_distance");
    return euclidean(p.back(), q.back());
}

}  // namespace rlvr
