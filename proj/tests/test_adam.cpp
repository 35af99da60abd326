#include "doctest.h"
#include "hydrobatch/adam.hpp"

using namespace hydrobatch;

TEST_CASE("zero gradient leaves parameters unchanged and increments t") {
    GruModel m = init_params(1, 2, 3, 1);
    GruModel before = m;
    AdamState st(m);
    GruGrads g(2, 3, 1);
    adam_step(m, g, st);
    CHECK(st.step_count == 1);
    auto sa = m.param_spans(), sb = before.param_spans();
    for (size_t blk = 0; blk < sa.size(); ++blk)
        for (size_t i = 0; i < sa[blk].size(); ++i) CHECK(sa[blk][i] == sb[blk][i]);
}

TEST_CASE("first step magnitude is about lr regardless of gradient scale") {
    // closed form: mhat = g, vhat = g^2, update = lr * g / (|g| + eps)
    GruModel m(1, 1, 1);
    AdamState st(m, 0.01);
    GruGrads g(1, 1, 1);
    g.w_z(0, 0) = 0.5;
    adam_step(m, g, st);
    CHECK(m.w_z(0, 0) == doctest::Approx(-0.009999999800000003).epsilon(1e-12));
}

TEST_CASE("update opposes the gradient sign") {
    GruModel m(1, 1, 1);
    AdamState st(m, 0.01);
    GruGrads g(1, 1, 1);
    g.w_z(0, 0) = -0.5;
    adam_step(m, g, st);
    CHECK(m.w_z(0, 0) == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(m.w_z(0, 0) > 0.0);
}

TEST_CASE("shape mismatch is fatal") {
    GruModel m(1, 1, 1);
    AdamState st(m);
    GruGrads g(2, 1, 1);
    CHECK_THROWS_AS(adam_step(m, g, st), std::invalid_argument);
}

TEST_CASE("two steps with constant gradient keep moving the same way") {
    GruModel m(1, 1, 1);
    AdamState st(m, 0.01);
    GruGrads g(1, 1, 1);
    g.w_z(0, 0) = 0.5;
    adam_step(m, g, st);
    const double after_one = m.w_z(0, 0);
    adam_step(m, g, st);
    CHECK(st.step_count == 2);
    CHECK(m.w_z(0, 0) < after_one);
}
