#include <gtest/gtest.h>

#include "gait/battery.hpp"
#include "gait/gradcheck.hpp"
#include "gait/ops.hpp"

using namespace gait;

namespace {

// Doubling op whose backward claims a factor of 3.
Tensor broken_double(const Tensor& x) {
    std::vector<double> v(x.data().begin(), x.data().end());
    for (auto& e : v) e *= 2.0;
    return Tensor::make_result(
        x.shape(), std::move(v), {x},
        [](detail::Node& n) {
            auto& g = n.parents[0]->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += 3.0 * n.grad[i];
        },
        "broken_double");
}

}  // namespace

TEST(GradCheck, BatteryPasses) {
    auto checks = run_gradcheck_battery();
    EXPECT_GE(checks.size(), 30u);
    for (const auto& c : checks) EXPECT_LT(c.max_rel_error, kGradCheckTolerance) << c.name;
}

TEST(GradCheck, CorruptedBackwardIsCaught) {
    Tensor x = Tensor::from({3}, {0.5, -1.0, 2.0});
    const double err = grad_check([](const std::vector<Tensor>& in) { return sum_all(broken_double(in[0])); }, {x});
    EXPECT_GT(err, 0.4);
}

TEST(GradCheck, ReportNamesInputs) {
    Tensor a = Tensor::from({2}, {1, 2}), b = Tensor::from({2}, {3, 4});
    auto r = grad_check_report([](const std::vector<Tensor>& in) { return sum_all(mul(in[0], in[1])); }, {a, b}, 1e-4,
                               {"a", "b"});
    ASSERT_EQ(r.entries.size(), 2u);
    EXPECT_EQ(r.entries[1].name, "b");
    EXPECT_EQ(r.entries[0].coords, 2u);
    EXPECT_LT(r.max_rel_error, 1e-9);
}

TEST(GradCheck, MicroInputsClearKinks) {
    auto m = draw_micro_inputs(micro_model_config(), 7);
    EXPECT_GE(m.margin, kKinkMargin);
    EXPECT_EQ(m.frames.shape(), (Shape{1, 4, 8, 6}));
}
