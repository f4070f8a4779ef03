#pragma once

#include <Eigen/Core>
#include <cmath>

namespace actlearn {

using Vec3 = Eigen::Vector3d;

// Planar robot base pose: position in the world x/y plane plus heading.
// Heading 0 looks along +x (toward the wall at x = 0).
struct Pose2 {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;
};

// Normalizes into (-pi, pi]; the boundary itself maps to +pi.
inline double normalize_angle(double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a <= -M_PI) a += 2.0 * M_PI;
    return a;
}

// Axis-aligned box, used for device-local success regions.
struct Box3 {
    Vec3 lo = Vec3::Zero();
    Vec3 hi = Vec3::Zero();

    bool contains(const Vec3& p) const {
        return p.x() >= lo.x() && p.x() <= hi.x() &&
               p.y() >= lo.y() && p.y() <= hi.y() &&
               p.z() >= lo.z() && p.z() <= hi.z();
    }

    Vec3 clamp(const Vec3& p) const {
        return Vec3(std::clamp(p.x(), lo.x(), hi.x()),
                    std::clamp(p.y(), lo.y(), hi.y()),
                    std::clamp(p.z(), lo.z(), hi.z()));
    }

    // Distance from p to the box boundary (surface). Zero only on the surface;
    // positive both inside and outside.
    double boundary_distance(const Vec3& p) const {
        if (!contains(p)) return (p - clamp(p)).norm();
        double d = hi.x() - p.x();
        d = std::min(d, p.x() - lo.x());
        d = std::min(d, hi.y() - p.y());
        d = std::min(d, p.y() - lo.y());
        d = std::min(d, hi.z() - p.z());
        d = std::min(d, p.z() - lo.z());
        return d;
    }
};

}  // namespace actlearn
