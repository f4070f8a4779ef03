#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "actlearn/config.hpp"
#include "actlearn/device.hpp"
#include "actlearn/geometry.hpp"
#include "actlearn/image.hpp"
#include "actlearn/rng.hpp"

namespace actlearn {

// World frame: x points from the robot toward the wall plane at x = 0,
// z is up, y completes the right-handed frame (to the robot's left).

struct CloudPoint {
    Vec3 p;
    int u = 0;
    int v = 0;
};

struct CameraPose {
    Vec3 origin = Vec3::Zero();
    Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();  // columns: right, down, forward

    Vec3 to_camera(const Vec3& world) const { return rot.transpose() * (world - origin); }
    Vec3 to_world_dir(const Vec3& cam_dir) const { return rot * cam_dir; }
};

struct Observation {
    Image rgb;
    std::vector<CloudPoint> cloud;
    CameraPose camera;
    double illumination = 0.0;  // 1.0 when the scene light is on
};

// Snapshot of everything the renderer needs. Texture is procedural (pure
// functions of world coordinates), so this is a cheap value type and captures
// from different poses see the same wall.
struct SceneModel {
    DeviceKind kind = DeviceKind::kLightSwitch;
    bool device_state = false;
    Vec3 device_pos = Vec3::Zero();
    uint64_t texture_seed = 0;
    double wall_width = 0.0;
    double wall_height = 0.0;
    double wall_base_z = 0.0;
    double brightness = 1.0;
};

inline SceneModel generate_scene(const ScenarioConfig& cfg, const SimDevice& device) {
    cfg.validate();
    SceneModel s;
    s.kind = cfg.kind;
    s.device_state = device.state;
    s.device_pos = device.placement;
    s.texture_seed = cfg.texture_seed;
    s.wall_width = cfg.wall_width;
    s.wall_height = cfg.wall_height;
    s.wall_base_z = cfg.wall_base_z;
    s.brightness = device.illuminated() ? cfg.on_brightness : 1.0;
    return s;
}

namespace detail {

inline double hash01(uint64_t seed, int64_t ix, int64_t iy, int channel) {
    uint64_t h = seed;
    h = hash_combine(h, static_cast<uint64_t>(ix) * 2654435761ull);
    h = hash_combine(h, static_cast<uint64_t>(iy) * 40503ull);
    h = hash_combine(h, static_cast<uint64_t>(channel) + 11ull);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// Bilinear value noise on a lattice of the given cell size, in [-1, 1].
inline double value_noise(uint64_t seed, double y, double z, double cell, int channel) {
    double fy = y / cell, fz = z / cell;
    int64_t iy = static_cast<int64_t>(std::floor(fy));
    int64_t iz = static_cast<int64_t>(std::floor(fz));
    double ty = smoothstep(fy - static_cast<double>(iy));
    double tz = smoothstep(fz - static_cast<double>(iz));
    double n00 = hash01(seed, iy, iz, channel);
    double n10 = hash01(seed, iy + 1, iz, channel);
    double n01 = hash01(seed, iy, iz + 1, channel);
    double n11 = hash01(seed, iy + 1, iz + 1, channel);
    double n0 = n00 + (n10 - n00) * ty;
    double n1 = n01 + (n11 - n01) * ty;
    return 2.0 * (n0 + (n1 - n0) * tz) - 1.0;
}

// Per-cell (unsmoothed) noise in [-1, 1], for fine grain.
inline double cell_noise(uint64_t seed, double y, double z, double cell, int channel) {
    int64_t iy = static_cast<int64_t>(std::floor(y / cell));
    int64_t iz = static_cast<int64_t>(std::floor(z / cell));
    return 2.0 * hash01(seed, iy, iz, channel) - 1.0;
}

struct Rgb {
    double r, g, b;
};

// Device surfaces keep a fixed internal texture seed: changing the scenario's
// texture seed re-skins the background wall but not the manufactured parts.
constexpr uint64_t kDeviceTextureSeed = 0x5eedde71ceull;

inline Rgb shade(const Rgb& base, uint64_t seed, double y, double z, double coarse_amp,
                 double fine_amp) {
    Rgb c = base;
    double out[3] = {c.r, c.g, c.b};
    for (int ch = 0; ch < 3; ch++) {
        out[ch] += coarse_amp * value_noise(seed, y, z, 0.01, ch);
        out[ch] += fine_amp * cell_noise(seed ^ 0x9e1full, y, z, 0.002, ch);
    }
    return {out[0], out[1], out[2]};
}

inline bool in_rect(double y, double z, double cy, double cz, double half_w, double half_h) {
    return std::abs(y - cy) <= half_w && std::abs(z - cz) <= half_h;
}

}  // namespace detail

// Pre-brightness surface color at wall coordinates (y, z), in [0, 255] doubles.
inline void scene_color(const SceneModel& s, double y, double z, double rgb[3]) {
    using namespace detail;
    double half_w = s.wall_width / 2.0;
    if (y < -half_w || y > half_w || z < s.wall_base_z || z > s.wall_base_z + s.wall_height) {
        rgb[0] = rgb[1] = rgb[2] = 24.0;  // off-wall void
        return;
    }
    // Background: gradient + coarse colored noise + fine grain.
    double gy = (y + half_w) / s.wall_width;
    double gz = (z - s.wall_base_z) / s.wall_height;
    Rgb c{150.0 + 26.0 * gy - 14.0 * gz, 144.0 + 18.0 * gy + 10.0 * gz, 134.0 - 12.0 * gy + 20.0 * gz};
    double out[3] = {c.r, c.g, c.b};
    for (int ch = 0; ch < 3; ch++) {
        out[ch] += 18.0 * value_noise(s.texture_seed, y, z, 0.08, ch);
        out[ch] += 9.0 * value_noise(s.texture_seed ^ 0xabcdull, y, z, 0.021, ch);
        out[ch] += 8.0 * cell_noise(s.texture_seed ^ 0x1234ull, y, z, 0.002, ch);
    }
    c = {out[0], out[1], out[2]};

    // Device geometry, in device-local wall coordinates.
    double dy = y - s.device_pos.y();
    double dz = z - s.device_pos.z();
    switch (s.kind) {
        case DeviceKind::kLightSwitch: {
            if (in_rect(dy, dz, 0.0, 0.0, 0.035, 0.0575)) {
                c = shade({208.0, 204.0, 194.0}, kDeviceTextureSeed, dy, dz, 5.0, 3.0);
                if (in_rect(dy, dz, 0.0, 0.0, 0.030, 0.0525))
                    c = shade({222.0, 218.0, 208.0}, kDeviceTextureSeed ^ 0x77ull, dy, dz, 4.0, 3.0);
                // Toggle nub: pivots up (state true) or down around the plate center.
                double nub_cz = s.device_state ? 0.009 : -0.009;
                if (in_rect(dy, dz, 0.0, nub_cz, 0.004, 0.009))
                    c = shade({120.0, 116.0, 108.0}, kDeviceTextureSeed ^ 0x99ull, dy, dz, 6.0, 4.0);
                // Pivot shadow opposite the nub.
                double sh_cz = s.device_state ? -0.004 : 0.004;
                if (in_rect(dy, dz, 0.0, sh_cz, 0.005, 0.003))
                    c = {c.r * 0.55, c.g * 0.55, c.b * 0.55};
            }
            break;
        }
        case DeviceKind::kRocker: {
            if (in_rect(dy, dz, 0.0, 0.0, 0.040, 0.060)) {
                c = shade({206.0, 203.0, 196.0}, kDeviceTextureSeed, dy, dz, 5.0, 3.0);
                if (in_rect(dy, dz, 0.0, 0.0, 0.020, 0.035)) {
                    c = shade({224.0, 221.0, 214.0}, kDeviceTextureSeed ^ 0x55ull, dy, dz, 4.0, 3.0);
                    // The pressed half sits deeper: shadow band on that edge.
                    double edge_cz = s.device_state ? 0.030 : -0.030;
                    if (in_rect(dy, dz, 0.0, edge_cz, 0.020, 0.005))
                        c = {c.r * 0.62, c.g * 0.62, c.b * 0.62};
                }
            }
            break;
        }
        case DeviceKind::kDrawer: {
            bool on_face = in_rect(dy, dz, 0.0, 0.0, 0.225, 0.080);
            if (on_face) {
                c = shade({172.0, 132.0, 88.0}, kDeviceTextureSeed, dy, dz, 8.0, 5.0);
                // Wood grain: horizontal streaks.
                c.r += 10.0 * value_noise(kDeviceTextureSeed ^ 0x33ull, dy * 0.15, dz, 0.004, 0);
                c.g += 6.0 * value_noise(kDeviceTextureSeed ^ 0x33ull, dy * 0.15, dz, 0.004, 1);
                if (in_rect(dy, dz, 0.0, 0.0, 0.060, 0.010))
                    c = shade({210.0, 212.0, 218.0}, kDeviceTextureSeed ^ 0x44ull, dy, dz, 4.0, 2.0);
            }
            // Open drawer protrudes: dark gap frame just outside the face.
            if (s.device_state && !on_face && in_rect(dy, dz, 0.0, 0.0, 0.240, 0.095))
                c = {30.0, 26.0, 22.0};
            break;
        }
    }
    rgb[0] = c.r;
    rgb[1] = c.g;
    rgb[2] = c.b;
}

inline CameraPose camera_for_pose(const Pose2& pose, double camera_height) {
    CameraPose cam;
    cam.origin = Vec3(pose.x, pose.y, camera_height);
    double ch = std::cos(pose.heading), sh = std::sin(pose.heading);
    Vec3 forward(ch, sh, 0.0);
    Vec3 down(0.0, 0.0, -1.0);
    Vec3 right(sh, -ch, 0.0);  // down x forward
    cam.rot.col(0) = right;
    cam.rot.col(1) = down;
    cam.rot.col(2) = forward;
    return cam;
}

// Continuous pixel coordinates of a world point; z_cam out: depth along the axis.
inline bool project_point(const CameraPose& cam, const ScenarioConfig& cfg, const Vec3& p,
                          double& u, double& v) {
    Vec3 pc = cam.to_camera(p);
    if (pc.z() <= 1e-9) return false;
    u = cfg.principal_x + cfg.focal_px * pc.x() / pc.z();
    v = cfg.principal_y + cfg.focal_px * pc.y() / pc.z();
    return true;
}

// Intersection of the ray through pixel (u, v) with the wall plane x = 0.
inline bool pixel_to_wall(const CameraPose& cam, const ScenarioConfig& cfg, double u, double v,
                          Vec3& hit) {
    Vec3 dir_cam((u - cfg.principal_x) / cfg.focal_px, (v - cfg.principal_y) / cfg.focal_px, 1.0);
    Vec3 dir = cam.to_world_dir(dir_cam);
    if (dir.x() <= 1e-12) return false;
    double t = -cam.origin.x() / dir.x();
    if (t <= 0.0) return false;
    hit = cam.origin + t * dir;
    return true;
}

inline Observation capture(const SceneModel& scene, const Pose2& pose, const ScenarioConfig& cfg) {
    Observation obs;
    obs.camera = camera_for_pose(pose, cfg.camera_height);
    obs.illumination = (scene.brightness > 1.0) ? 1.0 : 0.0;

    double du, dv;
    if (!project_point(obs.camera, cfg, scene.device_pos, du, dv) || du < 0.0 ||
        du > cfg.image_width - 1 || dv < 0.0 || dv > cfg.image_height - 1)
        throw std::runtime_error("device outside camera frustum");

    obs.rgb = Image(cfg.image_width, cfg.image_height);
    Vec3 hit;
    double rgb[3];
    for (int v = 0; v < cfg.image_height; v++) {
        for (int u = 0; u < cfg.image_width; u++) {
            double c[3] = {24.0, 24.0, 24.0};
            if (pixel_to_wall(obs.camera, cfg, u, v, hit)) {
                scene_color(scene, hit.y(), hit.z(), rgb);
                for (int ch = 0; ch < 3; ch++) c[ch] = rgb[ch] * scene.brightness;
            }
            for (int ch = 0; ch < 3; ch++) {
                double q = std::round(std::clamp(c[ch], 0.0, 255.0));
                obs.rgb.at(u, v, ch) = static_cast<uint8_t>(q);
            }
        }
    }
    int stride = cfg.cloud_stride;
    for (int v = 0; v < cfg.image_height; v += stride) {
        for (int u = 0; u < cfg.image_width; u += stride) {
            if (pixel_to_wall(obs.camera, cfg, u, v, hit)) {
                double half_w = scene.wall_width / 2.0;
                if (hit.y() < -half_w || hit.y() > half_w || hit.z() < scene.wall_base_z ||
                    hit.z() > scene.wall_base_z + scene.wall_height)
                    continue;
                obs.cloud.push_back({hit, u, v});
            }
        }
    }
    return obs;
}

struct PoseNoise {
    double std_x = 0.0;
    double std_y = 0.0;
};

// The configured stds describe the dispersion of the point 50 cm ahead of the
// robot. Lateral variance is split evenly between a base offset and heading
// error so that both contribute; depth error maps directly to x.
inline Pose2 sample_approach_pose(const Pose2& nominal, const PoseNoise& noise, RngStream& rng) {
    double dx = noise.std_x * rng.next_gaussian();
    double dy = (noise.std_y / std::sqrt(2.0)) * rng.next_gaussian();
    double dth = (noise.std_y * std::sqrt(2.0)) * rng.next_gaussian();
    Pose2 out;
    double ch = std::cos(nominal.heading), sh = std::sin(nominal.heading);
    out.x = nominal.x + dx * ch - dy * sh;
    out.y = nominal.y + dx * sh + dy * ch;
    out.heading = normalize_angle(nominal.heading + dth);
    return out;
}

inline Vec3 point_ahead(const Pose2& pose, double dist) {
    return Vec3(pose.x + dist * std::cos(pose.heading), pose.y + dist * std::sin(pose.heading),
                0.0);
}

}  // namespace actlearn
