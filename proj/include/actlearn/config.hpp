#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "actlearn/geometry.hpp"

namespace actlearn {

enum class DeviceKind { kLightSwitch, kRocker, kDrawer };
enum class VerifierKind { kOracle, kIntensityDiff, kDisplacement };

inline std::string to_string(DeviceKind k) {
    switch (k) {
        case DeviceKind::kLightSwitch: return "wall-switch";
        case DeviceKind::kRocker: return "rocker";
        case DeviceKind::kDrawer: return "drawer";
    }
    return "?";
}

// All tunables for one scenario. Defaults describe the standard light-switch
// scene; config files override via [section] key = value lines.
struct ScenarioConfig {
    // [scene]
    DeviceKind kind = DeviceKind::kLightSwitch;
    uint64_t texture_seed = 7;
    Vec3 device_pos = Vec3(0.0, 0.0, 1.2);  // on the wall plane x = 0
    double wall_width = 2.4;
    double wall_height = 2.4;
    double wall_base_z = 0.0;
    int image_width = 640;
    int image_height = 480;
    double focal_px = 525.0;
    double principal_x = 319.5;
    double principal_y = 239.5;
    int cloud_stride = 4;
    double camera_height = 1.2;
    double on_brightness = 1.25;

    // [device]
    Vec3 seed_point = Vec3(0.0, 0.0, 1.2);  // user-designated 3D point near the device
    double label_noise = 0.0;               // probability of flipping outcomes near region edges
    double noise_shell = 0.01;              // half-width of the flip-eligible boundary shell (m)
    double drawer_travel = 0.12;            // simulated gripper travel on drawer success (m)
    VerifierKind verifier = VerifierKind::kIntensityDiff;
    double intensity_threshold = 10.0;
    double min_travel = 0.10;

    // [noise]
    Pose2 nominal_pose{-0.6, 0.0, 0.0};
    double pose_std_x = 0.0185;
    double pose_std_y = 0.0179;

    // [learner]
    int candidate_count = 200;
    double sampler_var_x = 0.0009;  // m^2, execution/practice candidate sampler
    double sampler_var_y = 0.0009;
    double sampler_var_z = 0.0009;
    double init_sigma = 0.02;       // m, spherical initialization sampler
    int init_cap = 50;
    double gamma = 0.0;             // 0 = auto: 1 / (50 * mean feature variance)
    double cost_neg = 1.0;
    double cost_pos = 0.0;          // 0 = auto: cost_neg * #neg / #pos
    double svm_tol = 1e-3;
    int svm_max_iter = 500000;
    int visit_budget = 6;
    int practice_poses = 8;
    int label_cap = 300;            // per behavior
    double kde_bandwidth = 0.0;     // 0 = Scott's rule
    int max_attempts = 10;

    void validate() const {
        if (image_width < 322 || image_height < 322)
            throw std::runtime_error("image size must be at least 322x322 to fit the largest patch");
        if (pose_std_x < 0.0 || pose_std_y < 0.0)
            throw std::runtime_error("pose noise stds must be >= 0");
        if (sampler_var_x <= 0.0 || sampler_var_y <= 0.0 || sampler_var_z <= 0.0)
            throw std::runtime_error("sampler variances must be > 0");
        if (candidate_count < 1) throw std::runtime_error("candidate_count must be >= 1");
        if (focal_px <= 0.0) throw std::runtime_error("focal length must be > 0");
        if (cloud_stride < 1) throw std::runtime_error("cloud_stride must be >= 1");
        if (on_brightness < 1.0) throw std::runtime_error("on_brightness must be >= 1");
        double half_w = wall_width / 2.0;
        if (device_pos.y() < -half_w || device_pos.y() > half_w ||
            device_pos.z() < wall_base_z || device_pos.z() > wall_base_z + wall_height)
            throw std::runtime_error("device placement outside wall extent");
        if (visit_budget < 1 || practice_poses < 1 || label_cap < 1 || max_attempts < 1 ||
            init_cap < 1 || svm_max_iter < 1)
            throw std::runtime_error("budgets and caps must be >= 1");
        if (cost_neg <= 0.0 || cost_pos < 0.0 || svm_tol <= 0.0 ||
            gamma < 0.0 || kde_bandwidth < 0.0 || init_sigma <= 0.0)
            throw std::runtime_error("learner scalars out of range");
        if (intensity_threshold <= 0.0 || min_travel <= 0.0 || drawer_travel <= 0.0)
            throw std::runtime_error("verifier thresholds must be > 0");
        if (label_noise < 0.0 || label_noise > 1.0 || noise_shell < 0.0)
            throw std::runtime_error("label noise parameters out of range");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

struct ConfigReader {
    std::string section;
    std::string key;
    std::string value;
    int line_no = 0;

    [[noreturn]] void fail(const std::string& why) const {
        throw std::runtime_error("config line " + std::to_string(line_no) + ": " + why);
    }

    double num() const {
        try {
            size_t pos = 0;
            double v = std::stod(value, &pos);
            if (pos != value.size()) fail("trailing characters after number in '" + value + "'");
            return v;
        } catch (const std::logic_error&) {
            fail("expected a number, got '" + value + "'");
        }
    }

    int integer() const {
        double v = num();
        if (v != static_cast<double>(static_cast<long long>(v)))
            fail("expected an integer, got '" + value + "'");
        return static_cast<int>(v);
    }

    uint64_t u64() const {
        try {
            size_t pos = 0;
            uint64_t v = std::stoull(value, &pos);
            if (pos != value.size()) fail("trailing characters after integer in '" + value + "'");
            return v;
        } catch (const std::logic_error&) {
            fail("expected an unsigned integer, got '" + value + "'");
        }
    }
};

}  // namespace detail

inline ScenarioConfig parse_scenario_config(std::istream& in) {
    ScenarioConfig cfg;
    detail::ConfigReader r;
    std::string line;
    bool saw_version = false;
    while (std::getline(in, line)) {
        r.line_no++;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') r.fail("unterminated section header");
            r.section = detail::trim(line.substr(1, line.size() - 2));
            if (r.section != "scene" && r.section != "device" && r.section != "noise" &&
                r.section != "learner")
                r.fail("unknown section [" + r.section + "]");
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) r.fail("expected key = value");
        r.key = detail::trim(line.substr(0, eq));
        r.value = detail::trim(line.substr(eq + 1));
        if (r.key.empty() || r.value.empty()) r.fail("empty key or value");

        if (r.section.empty()) {
            if (r.key == "version") {
                if (r.u64() != 1) r.fail("unsupported config version " + r.value);
                saw_version = true;
            } else {
                r.fail("unknown top-level key '" + r.key + "'");
            }
            continue;
        }
        const std::string& k = r.key;
        if (r.section == "scene") {
            if (k == "kind") {
                if (r.value == "wall-switch") cfg.kind = DeviceKind::kLightSwitch;
                else if (r.value == "rocker") cfg.kind = DeviceKind::kRocker;
                else if (r.value == "drawer") cfg.kind = DeviceKind::kDrawer;
                else r.fail("unknown scene kind '" + r.value + "'");
            } else if (k == "texture_seed") cfg.texture_seed = r.u64();
            else if (k == "device_x") cfg.device_pos.x() = r.num();
            else if (k == "device_y") cfg.device_pos.y() = r.num();
            else if (k == "device_z") cfg.device_pos.z() = r.num();
            else if (k == "wall_width") cfg.wall_width = r.num();
            else if (k == "wall_height") cfg.wall_height = r.num();
            else if (k == "wall_base_z") cfg.wall_base_z = r.num();
            else if (k == "image_width") cfg.image_width = r.integer();
            else if (k == "image_height") cfg.image_height = r.integer();
            else if (k == "focal_px") cfg.focal_px = r.num();
            else if (k == "principal_x") cfg.principal_x = r.num();
            else if (k == "principal_y") cfg.principal_y = r.num();
            else if (k == "cloud_stride") cfg.cloud_stride = r.integer();
            else if (k == "camera_height") cfg.camera_height = r.num();
            else if (k == "on_brightness") cfg.on_brightness = r.num();
            else r.fail("unknown [scene] key '" + k + "'");
        } else if (r.section == "device") {
            if (k == "seed_x") cfg.seed_point.x() = r.num();
            else if (k == "seed_y") cfg.seed_point.y() = r.num();
            else if (k == "seed_z") cfg.seed_point.z() = r.num();
            else if (k == "label_noise") cfg.label_noise = r.num();
            else if (k == "noise_shell") cfg.noise_shell = r.num();
            else if (k == "drawer_travel") cfg.drawer_travel = r.num();
            else if (k == "verifier") {
                if (r.value == "oracle") cfg.verifier = VerifierKind::kOracle;
                else if (r.value == "intensity-diff") cfg.verifier = VerifierKind::kIntensityDiff;
                else if (r.value == "displacement") cfg.verifier = VerifierKind::kDisplacement;
                else r.fail("unknown verifier '" + r.value + "'");
            } else if (k == "intensity_threshold") cfg.intensity_threshold = r.num();
            else if (k == "min_travel") cfg.min_travel = r.num();
            else r.fail("unknown [device] key '" + k + "'");
        } else if (r.section == "noise") {
            if (k == "nominal_x") cfg.nominal_pose.x = r.num();
            else if (k == "nominal_y") cfg.nominal_pose.y = r.num();
            else if (k == "nominal_heading") cfg.nominal_pose.heading = r.num();
            else if (k == "pose_std_x") cfg.pose_std_x = r.num();
            else if (k == "pose_std_y") cfg.pose_std_y = r.num();
            else r.fail("unknown [noise] key '" + k + "'");
        } else {  // learner
            if (k == "candidate_count") cfg.candidate_count = r.integer();
            else if (k == "sampler_var_x") cfg.sampler_var_x = r.num();
            else if (k == "sampler_var_y") cfg.sampler_var_y = r.num();
            else if (k == "sampler_var_z") cfg.sampler_var_z = r.num();
            else if (k == "init_sigma") cfg.init_sigma = r.num();
            else if (k == "init_cap") cfg.init_cap = r.integer();
            else if (k == "gamma") cfg.gamma = r.num();
            else if (k == "cost_neg") cfg.cost_neg = r.num();
            else if (k == "cost_pos") cfg.cost_pos = r.num();
            else if (k == "svm_tol") cfg.svm_tol = r.num();
            else if (k == "svm_max_iter") cfg.svm_max_iter = r.integer();
            else if (k == "visit_budget") cfg.visit_budget = r.integer();
            else if (k == "practice_poses") cfg.practice_poses = r.integer();
            else if (k == "label_cap") cfg.label_cap = r.integer();
            else if (k == "kde_bandwidth") cfg.kde_bandwidth = r.num();
            else if (k == "max_attempts") cfg.max_attempts = r.integer();
            else r.fail("unknown [learner] key '" + k + "'");
        }
    }
    if (!saw_version) throw std::runtime_error("config missing required 'version' key");
    cfg.validate();
    return cfg;
}

inline ScenarioConfig load_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario config: " + path);
    return parse_scenario_config(in);
}

}  // namespace actlearn
