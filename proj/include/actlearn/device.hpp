#pragma once

#include <stdexcept>
#include <string>

#include "actlearn/config.hpp"
#include "actlearn/geometry.hpp"
#include "actlearn/image.hpp"
#include "actlearn/rng.hpp"

namespace actlearn {

// A behavior pair: kPrimary moves the device out of its rest state (flip up /
// rocker on / pull open), kComplement reverses it.
enum class BehaviorId { kPrimary = 0, kComplement = 1 };

inline BehaviorId complement_of(BehaviorId b) {
    return b == BehaviorId::kPrimary ? BehaviorId::kComplement : BehaviorId::kPrimary;
}

inline int behavior_index(BehaviorId b) { return static_cast<int>(b); }

inline std::string behavior_tag(DeviceKind kind, BehaviorId b) {
    bool primary = b == BehaviorId::kPrimary;
    switch (kind) {
        case DeviceKind::kLightSwitch: return primary ? "flip-up" : "flip-down";
        case DeviceKind::kRocker: return primary ? "rocker-on" : "rocker-off";
        case DeviceKind::kDrawer: return primary ? "drawer-open" : "drawer-close";
    }
    return "?";
}

struct BehaviorOutcome {
    bool success = false;
    Vec3 returned_point = Vec3::Zero();  // Eq. "behavior(p3D) -> (success, p3D)" second output
    double gripper_travel = 0.0;         // simulated travel, nonzero only for drawer successes
};

// Ground truth about one execution, consumed by verifiers and tests.
struct Transition {
    bool success = false;
    double gripper_travel = 0.0;
};

// Binary-state device on the wall plane. state == false is the rest state
// (switch down / rocker off / drawer closed), which is where kPrimary applies.
struct SimDevice {
    DeviceKind kind = DeviceKind::kLightSwitch;
    bool state = false;
    Vec3 placement = Vec3::Zero();
    Box3 region_primary;     // device-local success region for kPrimary
    Box3 region_complement;  // device-local success region for kComplement
    double complement_offset = 0.0;  // vertical returned-point offset (switch kinds)
    double travel = 0.0;             // drawer travel along the wall normal
    double label_noise = 0.0;
    double noise_shell = 0.0;
    RngStream noise_rng;

    const Box3& region(BehaviorId b) const {
        return b == BehaviorId::kPrimary ? region_primary : region_complement;
    }

    // true iff the device is lit in its current state (drives render brightness)
    bool illuminated() const { return kind != DeviceKind::kDrawer && state; }
};

inline SimDevice make_device(const ScenarioConfig& cfg, uint64_t master_seed) {
    SimDevice d;
    d.kind = cfg.kind;
    d.state = false;
    d.placement = cfg.device_pos;
    d.label_noise = cfg.label_noise;
    d.noise_shell = cfg.noise_shell;
    d.noise_rng = derive_stream(master_seed, RngPurpose::kDeviceNoise);
    // The x extents are wide: candidate points lie on the wall plane, so only
    // the in-plane coordinates discriminate.
    switch (cfg.kind) {
        case DeviceKind::kLightSwitch:
            // 2x2 cm bands centered 1.5 cm above and below the switch nub
            d.region_primary = {Vec3(-0.05, -0.010, 0.005), Vec3(0.05, 0.010, 0.025)};
            d.region_complement = {Vec3(-0.05, -0.010, -0.025), Vec3(0.05, 0.010, -0.005)};
            d.complement_offset = 0.08;
            break;
        case DeviceKind::kRocker:
            // top/bottom halves of the 4x7 cm rocker minus a 1 cm center dead zone
            d.region_primary = {Vec3(-0.05, -0.020, 0.005), Vec3(0.05, 0.020, 0.035)};
            d.region_complement = {Vec3(-0.05, -0.020, -0.035), Vec3(0.05, 0.020, -0.005)};
            d.complement_offset = 0.05;
            break;
        case DeviceKind::kDrawer:
            // open = handle bar, close = the whole drawer face
            d.region_primary = {Vec3(-0.05, -0.060, -0.010), Vec3(0.05, 0.060, 0.010)};
            d.region_complement = {Vec3(-0.05, -0.225, -0.080), Vec3(0.05, 0.225, 0.080)};
            d.travel = cfg.drawer_travel;
            break;
    }
    return d;
}

inline bool is_start_state(const SimDevice& d, BehaviorId b) {
    return b == BehaviorId::kPrimary ? !d.state : d.state;
}

inline bool is_goal_state(const SimDevice& d, BehaviorId b) {
    return b == BehaviorId::kPrimary ? d.state : !d.state;
}

inline BehaviorOutcome execute_behavior(SimDevice& d, BehaviorId which, const Vec3& p) {
    Vec3 local = p - d.placement;
    bool ok = is_start_state(d, which) && d.region(which).contains(local);
    // Optional boundary-shell label noise: outcomes near the region edge flip
    // with probability label_noise (world effect flips too, keeping verifiers
    // consistent with what actually happened).
    if (d.label_noise > 0.0 && is_start_state(d, which) &&
        d.region(which).boundary_distance(local) <= d.noise_shell) {
        if (d.noise_rng.next_double() < d.label_noise) ok = !ok;
    }
    BehaviorOutcome out;
    out.returned_point = p;
    if (!ok) return out;
    out.success = true;
    d.state = !d.state;
    switch (d.kind) {
        case DeviceKind::kLightSwitch:
        case DeviceKind::kRocker: {
            double dz = which == BehaviorId::kPrimary ? d.complement_offset : -d.complement_offset;
            out.returned_point = p + Vec3(0.0, 0.0, dz);
            break;
        }
        case DeviceKind::kDrawer: {
            // Gripper tip after the pull/push, displaced along the wall normal.
            double dx = which == BehaviorId::kPrimary ? -d.travel : d.travel;
            out.returned_point = p + Vec3(dx, 0.0, 0.0);
            out.gripper_travel = d.travel;
            break;
        }
    }
    return out;
}

struct VerifierConfig {
    VerifierKind kind = VerifierKind::kOracle;
    double intensity_threshold = 10.0;
    double min_travel = 0.10;
};

inline VerifierConfig make_verifier(const ScenarioConfig& cfg) {
    VerifierConfig v;
    v.kind = cfg.verifier;
    v.intensity_threshold = cfg.intensity_threshold;
    v.min_travel = cfg.min_travel;
    return v;
}

inline bool verify(const VerifierConfig& v, const Image& before, const Image& after,
                   const Transition& truth) {
    if (before.width != after.width || before.height != after.height)
        throw std::invalid_argument("verify: mismatched image sizes");
    switch (v.kind) {
        case VerifierKind::kOracle:
            return truth.success;
        case VerifierKind::kIntensityDiff:
            return std::abs(after.mean_intensity() - before.mean_intensity()) >
                   v.intensity_threshold;
        case VerifierKind::kDisplacement:
            return truth.gripper_travel >= v.min_travel;
    }
    return false;
}

}  // namespace actlearn
