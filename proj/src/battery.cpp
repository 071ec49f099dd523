#include "gait/battery.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gait/backbone.hpp"
#include "gait/gradcheck.hpp"
#include "gait/ops.hpp"
#include "gait/training.hpp"

namespace gait {

namespace {

Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(numel(shape));
    for (auto& x : v) x = rng.uniform(lo, hi);
    return Tensor::from(shape, std::move(v));
}

// Values bounded away from zero so kinked ops stay on one side under +-eps.
Tensor away_from_zero(const Shape& shape, Rng& rng) {
    std::vector<double> v(numel(shape));
    for (auto& x : v) x = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.1, 1.0);
    return Tensor::from(shape, std::move(v));
}

// Contracts an arbitrary output with fixed random weights into a scalar.
Tensor project(const Tensor& y, std::uint64_t salt) {
    Rng rng(salt);
    return sum_all(mul(y, random_tensor(y.shape(), rng)));
}

struct Battery {
    Rng rng;
    std::vector<BatteryCheck> out;

    void check(const std::string& name, const LossFn& f, const std::vector<Tensor>& inputs) {
        const auto t0 = std::chrono::steady_clock::now();
        GradCheckReport r = grad_check_report(f, inputs, kGradCheckEps);
        BatteryCheck c;
        c.name = name;
        c.max_rel_error = r.max_rel_error;
        for (const auto& e : r.entries) c.coords += e.coords;
        c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(c));
    }

    void unary(const std::string& name, const std::function<Tensor(const Tensor&)>& op, Tensor x) {
        const std::uint64_t salt = rng.next_u64();
        check(name, [=](const std::vector<Tensor>& in) { return project(op(in[0]), salt); }, {x});
    }
};

double kink_margin(const Tensor& frames, const ModelParams& params, const ModelConfig& cfg) {
    NoGradGuard guard;
    const auto& bc = cfg.backbone;
    auto margin = [](const Tensor& x) {
        double m = std::numeric_limits<double>::infinity();
        for (double v : x.data()) m = std::min(m, std::abs(v));
        return m;
    };
    Tensor x = conv3d(frames, params.backbone.stem.weight, params.backbone.stem.bias, {bc.stem_pad, bc.stem_stride});
    double m = margin(x);
    x = leaky_relu(x, bc.leaky_slope);
    if (bc.stem_pool > 1) x = max_pool2d(x, bc.stem_pool, bc.stem_pool);
    for (std::size_t i = 0; i < bc.blocks(); ++i) {
        const bool last = i + 1 == bc.blocks();
        x = last ? glconv_b(x, params.backbone.blocks[i], bc.partitions)
                 : glconv_a(x, params.backbone.blocks[i], bc.partitions);
        m = std::min(m, margin(x));
        x = leaky_relu(x, bc.leaky_slope);
    }
    return m;
}

}  // namespace

MicroInputs draw_micro_inputs(const ModelConfig& cfg, std::uint64_t seed) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        Rng init = Rng::stream(seed, "gradcheck/model/" + std::to_string(attempt));
        MicroInputs m;
        m.params = init_model(cfg, init);
        // non-zero second scoring layers so attention is not trivially uniform
        for (auto* ta : {&m.params.ta_appearance, &m.params.pose.ta}) {
            ta->score2.weight = random_tensor(ta->score2.weight.shape(), init);
            ta->score2.bias = random_tensor(ta->score2.bias.shape(), init);
        }
        m.frames = random_tensor({1, 4, cfg.backbone.in_height, cfg.backbone.in_width}, init, 0.0, 1.0);
        m.keypoints = random_tensor({4, kKeypointValues}, init);
        m.margin = kink_margin(m.frames, m.params, cfg);
        m.attempts = static_cast<std::size_t>(attempt) + 1;
        if (m.margin >= kKinkMargin) return m;
    }
    throw std::runtime_error("no micro-model draw keeps activations clear of the ReLU kink");
}

ModelConfig micro_model_config() {
    ModelConfig m;
    auto& b = m.backbone;
    b.in_height = 8;
    b.in_width = 6;
    b.stem_channels = 2;
    b.stem_kernel = {1, 3, 3};
    b.stem_stride = {1, 1, 1};
    b.stem_pad = {0, 1, 1};
    b.stem_pool = 1;
    b.channels = {2, 2};
    b.pool_after = {};
    b.partitions = 2;
    b.p_s = 3.0;
    b.learn_p_s = true;
    m.clip_length = 2;
    m.ta_hidden = 3;
    m.pose_dim = 4;
    m.heads = 2;
    m.embed_dim = 3;
    m.p_c = 1.5;
    m.learn_p_c = true;
    return m;
}

std::vector<BatteryCheck> run_gradcheck_battery(std::uint64_t seed) {
    Battery b{Rng::stream(seed, "gradcheck"), {}};
    Rng& rng = b.rng;

    // elementwise
    {
        const std::uint64_t salt = rng.next_u64();
        auto binary = [&](const std::string& name, Tensor (*op)(const Tensor&, const Tensor&)) {
            b.check(name, [=](const std::vector<Tensor>& in) { return project(op(in[0], in[1]), salt); },
                    {random_tensor({3, 4}, rng), random_tensor({3, 4}, rng)});
        };
        binary("add", add);
        binary("sub", sub);
        binary("mul", mul);
    }
    b.unary("add_scalar", [](const Tensor& x) { return add_scalar(x, 0.7); }, random_tensor({5}, rng));
    b.unary("scale", [](const Tensor& x) { return scale(x, -1.3); }, random_tensor({5}, rng));
    b.unary("pow", [](const Tensor& x) { return pow(x, 2.5); }, random_tensor({2, 3}, rng, 0.5, 1.5));
    b.unary("relu", [](const Tensor& x) { return relu(x); }, away_from_zero({4, 3}, rng));
    b.unary("leaky_relu", [](const Tensor& x) { return leaky_relu(x, 0.01); }, away_from_zero({4, 3}, rng));
    b.unary("softplus", [](const Tensor& x) { return softplus(x); }, random_tensor({4, 3}, rng, -3.0, 3.0));

    // shape
    b.unary("reshape", [](const Tensor& x) { return reshape(x, {3, 4}); }, random_tensor({2, 6}, rng));
    b.unary("permute", [](const Tensor& x) { return permute(x, {2, 0, 1}); }, random_tensor({2, 3, 4}, rng));
    b.unary("slice", [](const Tensor& x) { return slice(x, 1, 1, 3); }, random_tensor({2, 4, 3}, rng));
    {
        const std::uint64_t salt = rng.next_u64();
        b.check("concat", [=](const std::vector<Tensor>& in) { return project(concat({in[0], in[1], in[2]}, 1), salt); },
                {random_tensor({2, 1, 3}, rng), random_tensor({2, 2, 3}, rng), random_tensor({2, 3, 3}, rng)});
    }

    // reductions
    b.unary("sum", [](const Tensor& x) { return sum(x, 1); }, random_tensor({2, 3, 4}, rng));
    b.unary("mean", [](const Tensor& x) { return mean(x, 0); }, random_tensor({2, 3, 4}, rng));
    b.unary("max", [](const Tensor& x) { return max(x, 2); }, random_tensor({2, 3, 4}, rng));
    b.unary("sum_all", [](const Tensor& x) { return scale(sum_all(x), 1.0); }, random_tensor({3, 2}, rng));
    b.unary("mean_all", [](const Tensor& x) { return mean_all(x); }, random_tensor({3, 2}, rng));
    b.unary("softmax", [](const Tensor& x) { return softmax(x, 1); }, random_tensor({3, 5}, rng, -2.0, 2.0));

    // convolution, pooling, linear
    {
        struct ConvCase {
            const char* name;
            Shape in, kernel;
            Conv3dOptions opts;
        };
        const ConvCase cases[] = {
            {"conv3d", {2, 4, 5, 4}, {3, 2, 3, 3, 3}, {{1, 1, 1}, {1, 1, 1}}},
            {"conv3d_strided", {1, 3, 8, 6}, {2, 1, 1, 4, 4}, {{0, 1, 1}, {1, 2, 2}}},
            {"conv3d_unpadded", {2, 3, 4, 5}, {2, 2, 2, 3, 2}, {{0, 0, 0}, {1, 1, 1}}},
        };
        for (const auto& c : cases) {
            const std::uint64_t salt = rng.next_u64();
            const Conv3dOptions opts = c.opts;
            b.check(c.name,
                    [=](const std::vector<Tensor>& in) { return project(conv3d(in[0], in[1], in[2], opts), salt); },
                    {random_tensor(c.in, rng), random_tensor(c.kernel, rng), random_tensor({c.kernel[0]}, rng)});
        }
    }
    b.unary("max_pool2d", [](const Tensor& x) { return max_pool2d(x, 2, 2); }, random_tensor({2, 2, 4, 5}, rng));
    {
        const std::uint64_t salt = rng.next_u64();
        b.check("linear", [=](const std::vector<Tensor>& in) { return project(linear(in[0], in[1], in[2]), salt); },
                {random_tensor({3, 5}, rng), random_tensor({5, 4}, rng), random_tensor({4}, rng)});
    }

    // pooling and attention primitives
    {
        const std::uint64_t salt = rng.next_u64();
        b.check("gem", [=](const std::vector<Tensor>& in) { return project(gem(in[0], in[1], 1), salt); },
                {random_tensor({3, 4, 2}, rng, 0.1, 2.0), Tensor::scalar(2.7)});
        b.check("gem_clamped", [=](const std::vector<Tensor>& in) { return project(gem(in[0], in[1], 0), salt); },
                {away_from_zero({4, 3}, rng), Tensor::scalar(1.8)});
    }
    {
        const std::uint64_t salt = rng.next_u64();
        b.check("weighted_sum", [=](const std::vector<Tensor>& in) { return project(weighted_sum(in[0], in[1]), salt); },
                {random_tensor({2, 3, 4}, rng), random_tensor({2, 3}, rng)});
    }
    b.unary("pairwise_euclidean", [](const Tensor& x) { return pairwise_euclidean(x); }, random_tensor({4, 3}, rng));

    // composite blocks
    {
        const std::uint64_t salt = rng.next_u64();
        Tensor x = random_tensor({2, 3, 4, 3}, rng);
        ConvParams g = init_conv(3, 2, 3, 3, 3, rng), l = init_conv(3, 2, 3, 3, 3, rng);
        b.check("glconv_a",
                [=](const std::vector<Tensor>& in) {
                    return project(glconv_a(in[0], GLConvParams{{in[1], in[2]}, {in[3], in[4]}}, 2), salt);
                },
                {x, g.weight, g.bias, l.weight, l.bias});
        b.check("glconv_b",
                [=](const std::vector<Tensor>& in) {
                    return project(glconv_b(in[0], GLConvParams{{in[1], in[2]}, {in[3], in[4]}}, 2), salt);
                },
                {x, g.weight, g.bias, l.weight, l.bias});
        b.check("spatial_gem", [=](const std::vector<Tensor>& in) { return project(spatial_gem(in[0], in[1]), salt); },
                {random_tensor({2, 3, 2, 4}, rng, 0.1, 1.0), Tensor::scalar(3.0)});
    }
    {
        const std::uint64_t salt = rng.next_u64();
        TAParams ta = init_ta(4, 3, rng);
        Tensor s2w = random_tensor({3, 1}, rng), s2b = random_tensor({1}, rng);
        b.check("ta_aggregate",
                [=](const std::vector<Tensor>& in) {
                    TAParams p{{in[1], in[2]}, {in[3], in[4]}};
                    return project(ta_aggregate(clip_split(in[0], 3), p), salt);
                },
                {random_tensor({7, 4}, rng), ta.score1.weight, ta.score1.bias, s2w, s2b});
    }
    {
        const std::uint64_t salt = rng.next_u64();
        PoseParams p = init_pose(5, 3, rng);
        b.check("pose_encode",
                [=](const std::vector<Tensor>& in) {
                    PoseParams q = p;
                    q.fc1 = {in[1], in[2]};
                    q.fc2 = {in[3], in[4]};
                    return project(pose_encode(in[0], q), salt);
                },
                {random_tensor({3, kKeypointValues}, rng), p.fc1.weight, p.fc1.bias, p.fc2.weight, p.fc2.bias});
    }
    {
        const std::uint64_t salt = rng.next_u64();
        b.check("fuse_clips", [=](const std::vector<Tensor>& in) { return project(fuse_clips(in[0], in[1]), salt); },
                {random_tensor({3, 4}, rng), random_tensor({3, 2}, rng)});
        b.check("clip_gem", [=](const std::vector<Tensor>& in) { return project(clip_gem(in[0], in[1]), salt); },
                {random_tensor({3, 4}, rng, 0.1, 2.0), Tensor::scalar(2.2)});
        HeadParams h = init_heads(4, 2, 3, 1.0, false, rng);
        b.check("heads",
                [=](const std::vector<Tensor>& in) {
                    HeadParams q = h;
                    q.heads = {{in[1], in[2]}, {in[3], in[4]}};
                    auto e = heads_forward(in[0], q);
                    return add(project(e[0], salt), project(e[1], salt + 1));
                },
                {random_tensor({1, 4}, rng), h.heads[0].weight, h.heads[0].bias, h.heads[1].weight, h.heads[1].bias});
    }
    {
        // 3 identities x 2 items, 2 heads; margin large enough that every hinge is active
        const std::vector<int> ids{0, 0, 1, 1, 2, 2};
        std::vector<Tensor> inputs;
        for (std::size_t i = 0; i < 12; ++i) inputs.push_back(random_tensor({1, 3}, rng));
        b.check("triplet_loss",
                [=](const std::vector<Tensor>& in) {
                    std::vector<EmbeddingSet> e;
                    for (std::size_t i = 0; i < 6; ++i) e.push_back({in[2 * i], in[2 * i + 1]});
                    return triplet_loss(e, ids, TripletConfig{5.0}).loss;
                },
                inputs);
    }

    // end to end
    {
        const ModelConfig cfg = micro_model_config();
        MicroInputs m = draw_micro_inputs(cfg, seed);
        std::vector<Tensor> leaves;
        for (auto& [name, t] : m.params.named()) leaves.push_back(t);
        const std::uint64_t salt = rng.next_u64();
        b.check("micro_model",
                [=](const std::vector<Tensor>&) {
                    EmbeddingSet e = model_forward(m.frames, m.keypoints, m.params, cfg);
                    Tensor total = project(e[0], salt);
                    for (std::size_t c = 1; c < e.size(); ++c) total = add(total, project(e[c], salt + c));
                    return total;
                },
                leaves);
    }
    return b.out;
}

}  // namespace gait
