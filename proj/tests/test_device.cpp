#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "actlearn/device.hpp"
#include "actlearn/scene.hpp"
#include "helpers.hpp"

using namespace actlearn;
using namespace testutil;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

Vec3 uniform_in(const Box3& box, RngStream& rng) {
    // On-wall points carry local x = 0; only y/z discriminate.
    return Vec3(0.0, box.lo.y() + rng.next_double() * (box.hi.y() - box.lo.y()),
                box.lo.z() + rng.next_double() * (box.hi.z() - box.lo.z()));
}

}  // namespace

TEST_CASE("behavior pairs and tags", "[device]") {
    CHECK(complement_of(BehaviorId::kPrimary) == BehaviorId::kComplement);
    CHECK(complement_of(BehaviorId::kComplement) == BehaviorId::kPrimary);
    CHECK(behavior_index(BehaviorId::kPrimary) == 0);
    CHECK(behavior_index(BehaviorId::kComplement) == 1);

    CHECK(behavior_tag(DeviceKind::kLightSwitch, BehaviorId::kPrimary) == "flip-up");
    CHECK(behavior_tag(DeviceKind::kLightSwitch, BehaviorId::kComplement) == "flip-down");
    CHECK(behavior_tag(DeviceKind::kRocker, BehaviorId::kPrimary) == "rocker-on");
    CHECK(behavior_tag(DeviceKind::kRocker, BehaviorId::kComplement) == "rocker-off");
    CHECK(behavior_tag(DeviceKind::kDrawer, BehaviorId::kPrimary) == "drawer-open");
    CHECK(behavior_tag(DeviceKind::kDrawer, BehaviorId::kComplement) == "drawer-close");
}

TEST_CASE("device regions carry the documented geometry", "[device]") {
    ScenarioConfig cfg = small_scene(DeviceKind::kLightSwitch);
    SimDevice sw = make_device(cfg, 1);
    CHECK(bits_equal(sw.region_primary.lo, Vec3(-0.05, -0.010, 0.005)));
    CHECK(bits_equal(sw.region_primary.hi, Vec3(0.05, 0.010, 0.025)));
    CHECK(bits_equal(sw.region_complement.lo, Vec3(-0.05, -0.010, -0.025)));
    CHECK(bits_equal(sw.region_complement.hi, Vec3(0.05, 0.010, -0.005)));
    CHECK(sw.complement_offset == 0.08);
    CHECK(sw.travel == 0.0);
    CHECK_FALSE(sw.state);

    SimDevice ro = make_device(small_scene(DeviceKind::kRocker), 1);
    CHECK(bits_equal(ro.region_primary.lo, Vec3(-0.05, -0.020, 0.005)));
    CHECK(bits_equal(ro.region_primary.hi, Vec3(0.05, 0.020, 0.035)));
    CHECK(bits_equal(ro.region_complement.lo, Vec3(-0.05, -0.020, -0.035)));
    CHECK(bits_equal(ro.region_complement.hi, Vec3(0.05, 0.020, -0.005)));
    CHECK(ro.complement_offset == 0.05);

    ScenarioConfig dcfg = small_scene(DeviceKind::kDrawer);
    dcfg.drawer_travel = 0.12;
    SimDevice dr = make_device(dcfg, 1);
    CHECK(bits_equal(dr.region_primary.lo, Vec3(-0.05, -0.060, -0.010)));
    CHECK(bits_equal(dr.region_primary.hi, Vec3(0.05, 0.060, 0.010)));
    CHECK(bits_equal(dr.region_complement.lo, Vec3(-0.05, -0.225, -0.080)));
    CHECK(bits_equal(dr.region_complement.hi, Vec3(0.05, 0.225, 0.080)));
    CHECK(dr.travel == 0.12);
}

TEST_CASE("start and goal state predicates", "[device]") {
    SimDevice d = make_device(small_scene(DeviceKind::kLightSwitch), 1);
    CHECK(is_start_state(d, BehaviorId::kPrimary));
    CHECK_FALSE(is_start_state(d, BehaviorId::kComplement));
    CHECK(is_goal_state(d, BehaviorId::kComplement));
    CHECK_FALSE(is_goal_state(d, BehaviorId::kPrimary));
    d.state = true;
    CHECK(is_start_state(d, BehaviorId::kComplement));
    CHECK(is_goal_state(d, BehaviorId::kPrimary));
}

TEST_CASE("switch success offsets the returned point upward", "[device]") {
    SimDevice d = make_device(small_scene(DeviceKind::kLightSwitch), 1);
    Vec3 p = d.placement + Vec3(0.0, 0.005, 0.015);
    BehaviorOutcome out = execute_behavior(d, BehaviorId::kPrimary, p);
    CHECK(out.success);
    CHECK(d.state);
    CHECK(bits_equal(out.returned_point, p + Vec3(0.0, 0.0, 0.08)));
    CHECK(out.gripper_travel == 0.0);

    Vec3 q = d.placement + Vec3(0.0, -0.003, -0.012);
    BehaviorOutcome back = execute_behavior(d, BehaviorId::kComplement, q);
    CHECK(back.success);
    CHECK_FALSE(d.state);
    CHECK(bits_equal(back.returned_point, q + Vec3(0.0, 0.0, -0.08)));
}

TEST_CASE("rocker uses its own vertical offset", "[device]") {
    SimDevice d = make_device(small_scene(DeviceKind::kRocker), 1);
    Vec3 p = d.placement + Vec3(0.0, 0.01, 0.02);
    BehaviorOutcome out = execute_behavior(d, BehaviorId::kPrimary, p);
    CHECK(out.success);
    CHECK(bits_equal(out.returned_point, p + Vec3(0.0, 0.0, 0.05)));
}

TEST_CASE("drawer success displaces the gripper along the wall normal", "[device]") {
    ScenarioConfig cfg = small_scene(DeviceKind::kDrawer);
    SimDevice d = make_device(cfg, 1);
    Vec3 handle = d.placement + Vec3(0.0, 0.03, 0.005);
    BehaviorOutcome open = execute_behavior(d, BehaviorId::kPrimary, handle);
    CHECK(open.success);
    CHECK(d.state);
    CHECK(bits_equal(open.returned_point, handle + Vec3(-0.12, 0.0, 0.0)));
    CHECK(open.gripper_travel == 0.12);

    Vec3 face = d.placement + Vec3(0.0, -0.15, 0.05);
    BehaviorOutcome close = execute_behavior(d, BehaviorId::kComplement, face);
    CHECK(close.success);
    CHECK_FALSE(d.state);
    CHECK(bits_equal(close.returned_point, face + Vec3(0.12, 0.0, 0.0)));
    CHECK(close.gripper_travel == 0.12);
}

TEST_CASE("failed executions never mutate the world", "[device]") {
    SimDevice d = make_device(small_scene(DeviceKind::kLightSwitch), 1);

    // Outside the region.
    Vec3 miss = d.placement + Vec3(0.0, 0.0, 0.20);
    BehaviorOutcome out = execute_behavior(d, BehaviorId::kPrimary, miss);
    CHECK_FALSE(out.success);
    CHECK_FALSE(d.state);
    CHECK(bits_equal(out.returned_point, miss));
    CHECK(out.gripper_travel == 0.0);

    // Right point, wrong state: the complement has no effect from rest.
    Vec3 lower = d.placement + Vec3(0.0, 0.0, -0.015);
    out = execute_behavior(d, BehaviorId::kComplement, lower);
    CHECK_FALSE(out.success);
    CHECK_FALSE(d.state);
    CHECK(bits_equal(out.returned_point, lower));

    // Wrong state blocks even a perfectly placed primary.
    d.state = true;
    Vec3 band = d.placement + Vec3(0.0, 0.0, 0.015);
    out = execute_behavior(d, BehaviorId::kPrimary, band);
    CHECK_FALSE(out.success);
    CHECK(d.state);
}

TEST_CASE("complement returns every kind to rest from any region point", "[device]") {
    RngStream rng(6001);
    for (DeviceKind kind :
         {DeviceKind::kLightSwitch, DeviceKind::kRocker, DeviceKind::kDrawer}) {
        SimDevice d = make_device(small_scene(kind), 1);
        for (int i = 0; i < 50; i++) {
            Vec3 p1 = d.placement + uniform_in(d.region_primary, rng);
            BehaviorOutcome go = execute_behavior(d, BehaviorId::kPrimary, p1);
            REQUIRE(go.success);
            REQUIRE(is_goal_state(d, BehaviorId::kPrimary));

            Vec3 p2 = d.placement + uniform_in(d.region_complement, rng);
            BehaviorOutcome back = execute_behavior(d, BehaviorId::kComplement, p2);
            REQUIRE(back.success);
            REQUIRE(is_goal_state(d, BehaviorId::kComplement));
            REQUIRE_FALSE(d.state);
        }
    }
}

TEST_CASE("certain label noise flips outcomes only inside the boundary shell", "[device]") {
    ScenarioConfig cfg = small_scene(DeviceKind::kLightSwitch);
    cfg.label_noise = 1.0;
    cfg.noise_shell = 0.002;

    // Just inside the region edge: the guaranteed flip turns success into a
    // no-op failure.
    {
        SimDevice d = make_device(cfg, 3);
        Vec3 p = d.placement + Vec3(0.0, 0.0, 0.0055);
        BehaviorOutcome out = execute_behavior(d, BehaviorId::kPrimary, p);
        CHECK_FALSE(out.success);
        CHECK_FALSE(d.state);
        CHECK(bits_equal(out.returned_point, p));
    }
    // Just outside: the flip executes the full success, world effect included.
    {
        SimDevice d = make_device(cfg, 3);
        Vec3 p = d.placement + Vec3(0.0, 0.0, 0.0045);
        BehaviorOutcome out = execute_behavior(d, BehaviorId::kPrimary, p);
        CHECK(out.success);
        CHECK(d.state);
        CHECK(bits_equal(out.returned_point, p + Vec3(0.0, 0.0, 0.08)));
    }
    // Deep inside the region, outside the shell: no flip.
    {
        SimDevice d = make_device(cfg, 3);
        Vec3 p = d.placement + Vec3(0.0, 0.0, 0.015);
        BehaviorOutcome out = execute_behavior(d, BehaviorId::kPrimary, p);
        CHECK(out.success);
        CHECK(d.state);
    }
    // Wrong start state never flips into success.
    {
        SimDevice d = make_device(cfg, 3);
        d.state = true;
        Vec3 p = d.placement + Vec3(0.0, 0.0, 0.0055);
        BehaviorOutcome out = execute_behavior(d, BehaviorId::kPrimary, p);
        CHECK_FALSE(out.success);
        CHECK(d.state);
    }
}

TEST_CASE("label-noise draws are deterministic per master seed", "[device]") {
    ScenarioConfig cfg = small_scene(DeviceKind::kRocker);
    cfg.label_noise = 0.5;
    cfg.noise_shell = 0.01;
    SimDevice a = make_device(cfg, 11);
    SimDevice b = make_device(cfg, 11);
    RngStream pts(6002);
    for (int i = 0; i < 40; i++) {
        BehaviorId beh = is_start_state(a, BehaviorId::kPrimary) ? BehaviorId::kPrimary
                                                                 : BehaviorId::kComplement;
        Vec3 p = a.placement + uniform_in(a.region(beh), pts);
        BehaviorOutcome oa = execute_behavior(a, beh, p);
        BehaviorOutcome ob = execute_behavior(b, beh, p);
        REQUIRE(oa.success == ob.success);
        REQUIRE(a.state == b.state);
    }
}

TEST_CASE("verifier modes", "[device]") {
    Image before(4, 4), after(4, 4);
    for (auto& px : before.pixels) px = 100;
    for (auto& px : after.pixels) px = 130;

    VerifierConfig oracle;
    oracle.kind = VerifierKind::kOracle;
    CHECK(verify(oracle, before, after, Transition{true, 0.0}));
    CHECK_FALSE(verify(oracle, before, after, Transition{false, 0.0}));

    VerifierConfig intensity;
    intensity.kind = VerifierKind::kIntensityDiff;
    intensity.intensity_threshold = 10.0;
    CHECK(verify(intensity, before, after, Transition{false, 0.0}));  // |130-100| > 10
    Image nearly = after;
    for (auto& px : nearly.pixels) px = 105;
    CHECK_FALSE(verify(intensity, before, nearly, Transition{true, 0.0}));

    VerifierConfig travel;
    travel.kind = VerifierKind::kDisplacement;
    travel.min_travel = 0.10;
    CHECK(verify(travel, before, after, Transition{false, 0.12}));
    CHECK_FALSE(verify(travel, before, after, Transition{true, 0.06}));

    Image odd(3, 4);
    CHECK_THROWS_WITH(verify(intensity, before, odd, Transition{}),
                      ContainsSubstring("mismatched image sizes"));
}

TEST_CASE("intensity verifier agrees with the oracle on lamp devices", "[device]") {
    // Pre-render both lamp states for both switch kinds from the nominal pose;
    // every successful transition toggles the lamp and a failure leaves the
    // image identical, so 200 randomized executions are four renders total.
    RngStream rng(6003);
    int trials = 0;
    for (DeviceKind kind : {DeviceKind::kLightSwitch, DeviceKind::kRocker}) {
        ScenarioConfig cfg = small_scene(kind);
        cfg.verifier = VerifierKind::kIntensityDiff;
        SimDevice dev = make_device(cfg, 21);
        VerifierConfig verifier = make_verifier(cfg);
        Pose2 pose = cfg.nominal_pose;

        Image img_by_state[2];
        for (int s = 0; s < 2; s++) {
            SimDevice tmp = dev;
            tmp.state = s != 0;
            img_by_state[s] = capture(generate_scene(cfg, tmp), pose, cfg).rgb;
        }

        for (int i = 0; i < 100; i++, trials++) {
            BehaviorId beh = rng.next_double() < 0.5 ? BehaviorId::kPrimary
                                                     : BehaviorId::kComplement;
            bool hit_region = rng.next_double() < 0.6;
            Vec3 local = hit_region ? uniform_in(dev.region(beh), rng)
                                    : Vec3(0.0, 0.0, 0.2 + rng.next_double());
            const Image& before = img_by_state[dev.state ? 1 : 0];
            BehaviorOutcome out = execute_behavior(dev, beh, dev.placement + local);
            const Image& after = img_by_state[dev.state ? 1 : 0];
            Transition truth{out.success, out.gripper_travel};
            REQUIRE(verify(verifier, before, after, truth) == truth.success);
        }
    }
    CHECK(trials == 200);
}
