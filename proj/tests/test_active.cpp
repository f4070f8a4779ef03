#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "actlearn/active.hpp"
#include "helpers.hpp"

using namespace actlearn;
using namespace testutil;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

SvmModel forged_two_sv_model() {
    // f(x) = 0.2 exp(-x^2) - exp(-(x-10)^2) + 0.1
    // f(0) ~ 0.3 and f(10) ~ -0.9, so the support-vector guard is ~0.3.
    SvmModel m;
    m.trained = true;
    m.params.gamma = 1.0;
    m.support_vectors = {fv1(0.0), fv1(10.0)};
    m.coefficients = {0.2, -1.0};
    m.bias = 0.1;
    return m;
}

}  // namespace

TEST_CASE("svm_pick matches the brute-force reference on random fixtures", "[active]") {
    RngStream rng(3001);
    for (int trial = 0; trial < 1000; trial++) {
        LabeledDataset data = random_dataset(rng, 2 + static_cast<int>(rng.next_below(4)),
                                             2 + static_cast<int>(rng.next_below(4)), 2, 2.5);
        SvmParams p;
        p.gamma = 0.6;
        SvmModel model = train(data, p);

        std::vector<FeatureVector> inst;
        int n = 3 + static_cast<int>(rng.next_below(12));
        for (int i = 0; i < n; i++) {
            FeatureVector f;
            f.values[0] = 5.0 * (rng.next_double() - 0.5);
            f.values[1] = 5.0 * (rng.next_double() - 0.5);
            inst.push_back(f);
        }
        CandidatePool pool(inst);
        for (int i = 0; i < n; i++)
            if (rng.next_double() < 0.2) pool.consume(i);

        PickResult got = svm_pick(model, pool);
        BrutePickResult want = brute_pick(model, pool);
        CHECK(got.converged == want.converged);
        if (!want.converged) {
            CHECK(got.index == want.index);
            CHECK(got.distance == want.distance);
        }
    }
}

TEST_CASE("svm_pick takes the closest qualifying candidate then converges", "[active]") {
    SvmModel m = forged_two_sv_model();
    std::vector<FeatureVector> inst = {
        fv1(10.0 - std::sqrt(std::log(2.0))),  // |f| ~ 0.4: outside the guard
        fv1(std::sqrt(std::log(2.0))),         // |f| = 0.2: qualifies
        fv1(10.0),                             // |f| ~ 0.9: outside the guard
    };
    CandidatePool pool(inst);

    PickResult r = svm_pick(m, pool);
    REQUIRE_FALSE(r.converged);
    CHECK(r.index == 1);
    CHECK(r.distance == Approx(0.2).margin(1e-9));

    pool.consume(r.index);
    CHECK(svm_pick(m, pool).converged);
}

TEST_CASE("svm_pick edge cases", "[active]") {
    SvmModel m = forged_two_sv_model();

    CandidatePool empty;
    CHECK(svm_pick(m, empty).converged);

    CandidatePool all_used(std::vector<FeatureVector>{fv1(0.8), fv1(0.9)});
    all_used.consume(0);
    all_used.consume(1);
    CHECK(svm_pick(m, all_used).converged);

    SvmModel untrained;
    CHECK_THROWS_WITH(svm_pick(untrained, empty), ContainsSubstring("model not trained"));
}

TEST_CASE("svm_pick breaks ties toward the lowest index", "[active]") {
    SvmModel m;
    m.trained = true;
    m.params.gamma = 1.0;
    m.support_vectors = {fv1(0.0)};
    m.coefficients = {1.0};
    m.bias = -0.5;  // f(0) = 0.5 -> guard 0.5; f(0.5) ~ 0.2788

    CandidatePool pool(std::vector<FeatureVector>{fv1(0.5), fv1(0.5)});
    PickResult r = svm_pick(m, pool);
    REQUIRE_FALSE(r.converged);
    CHECK(r.index == 0);
    pool.consume(0);
    r = svm_pick(m, pool);
    REQUIRE_FALSE(r.converged);
    CHECK(r.index == 1);
}

TEST_CASE("add_and_retrain appends and refreshes the class weight", "[active]") {
    LabeledDataset data;
    data.examples.push_back({fv1(-1.0), +1});
    data.examples.push_back({fv1(1.0), -1});
    SvmParams p;
    p.gamma = 1.0;

    SvmModel m = add_and_retrain(data, fv1(1.4), -1, p);
    CHECK(data.examples.size() == 3);
    CHECK(data.examples.back().label == -1);
    CHECK(m.params.cost_pos == 2.0);  // 2 negatives / 1 positive

    // Build up to 23 positives vs 35 negatives: the ratio tracks exactly.
    RngStream rng(3002);
    LabeledDataset big = random_dataset(rng, 22, 35, 2, 3.0);
    SvmModel m2 = add_and_retrain(big, fv1(-2.0), +1, p);
    CHECK(big.positives() == 23);
    CHECK(big.negatives() == 35);
    CHECK(m2.params.cost_pos == 35.0 / 23.0);
}

TEST_CASE("duplicating a non-support vector leaves the decision unchanged", "[active]") {
    RngStream rng(3003);
    LabeledDataset data = random_dataset(rng, 12, 12, 2, 5.0);
    SvmParams p;
    p.gamma = 0.4;
    p.cost_neg = 10.0;
    p.cost_pos = 10.0;  // pin both costs so duplication cannot shift the ratio
    p.tol = 1e-8;
    SvmModel before = train(data, p);

    // Find a training example that carries no weight.
    int idle = -1;
    for (size_t i = 0; i < data.examples.size(); i++) {
        bool is_sv = false;
        for (const auto& sv : before.support_vectors)
            if (bits_equal(sv.values, data.examples[i].x.values)) is_sv = true;
        if (!is_sv) {
            idle = static_cast<int>(i);
            break;
        }
    }
    REQUIRE(idle >= 0);

    SvmModel after =
        add_and_retrain(data, data.examples[idle].x, data.examples[idle].label, p);
    for (int k = 0; k < 100; k++) {
        FeatureVector probe;
        probe.values[0] = 8.0 * (rng.next_double() - 0.5);
        probe.values[1] = 8.0 * (rng.next_double() - 0.5);
        CHECK(std::abs(decision_value(after, probe) - decision_value(before, probe)) <= 1e-6);
    }
}

TEST_CASE("active loop consumes monotonically and terminates", "[active]") {
    RngStream rng(3004);
    LabeledDataset data;
    data.examples.push_back({fv1(-2.0), +1});
    data.examples.push_back({fv1(2.0), -1});

    std::vector<FeatureVector> inst;
    for (int i = 0; i < 40; i++) {
        FeatureVector f;
        f.values[0] = 6.0 * (rng.next_double() - 0.5);
        inst.push_back(f);
    }
    CandidatePool pool(inst);

    SvmParams p;
    p.gamma = 0.8;
    SvmModel model = train(data, p);
    std::set<size_t> seen;
    int steps = 0;
    while (true) {
        PickResult r = svm_pick(model, pool);
        if (r.converged) break;
        CHECK(seen.insert(r.index).second);  // never re-picked
        size_t before = pool.remaining();
        pool.consume(r.index);
        CHECK(pool.remaining() == before - 1);
        int label = pool.instances[r.index].values[0] < 0.0 ? +1 : -1;
        model = add_and_retrain(data, pool.instances[r.index], label, p);
        REQUIRE(++steps <= 42);
    }
    CHECK(steps <= 40);
}

TEST_CASE("pool consumption bounds", "[active]") {
    CandidatePool pool(std::vector<FeatureVector>{fv1(0.0)});
    CHECK(pool.remaining() == 1);
    pool.consume(0);
    CHECK(pool.remaining() == 0);
    CHECK_THROWS_WITH(pool.consume(1), ContainsSubstring("bad index"));
}

TEST_CASE("per-pose convergence flags are sticky", "[active]") {
    SvmModel m = forged_two_sv_model();
    ConvergenceState state(2);
    CHECK_FALSE(state.all_converged());

    CandidatePool qualifying(std::vector<FeatureVector>{fv1(std::sqrt(std::log(2.0)))});
    CHECK_FALSE(visit_converged(state, 0, qualifying, m));

    CandidatePool empty;
    CHECK(visit_converged(state, 0, empty, m));
    // Once retired, a pose stays retired even if new candidates would qualify.
    CHECK(visit_converged(state, 0, qualifying, m));
    CHECK_FALSE(state.all_converged());

    CHECK(visit_converged(state, 1, empty, m));
    CHECK(state.all_converged());

    CHECK_THROWS_WITH(visit_converged(state, 2, empty, m), ContainsSubstring("bad pose index"));
    CHECK_THROWS_WITH(visit_converged(state, -1, empty, m),
                      ContainsSubstring("bad pose index"));
}
