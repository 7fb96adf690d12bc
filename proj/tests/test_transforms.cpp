#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "jpegrad/codec.hpp"
#include "jpegrad/errors.hpp"
#include "jpegrad/gradcheck.hpp"
#include "jpegrad/rng.hpp"
#include "jpegrad/transforms.hpp"
#include "test_util.hpp"

using namespace jpegrad;

TEST_CASE("curriculum schedule endpoints and shape") {
    CurriculumConfig cfg;  // 95 -> 50 over T=200
    CHECK(qf_min(0, cfg) == 95);
    CHECK(qf_min(100, cfg) == 50);
    CHECK(qf_min(200, cfg) == 50);
    CHECK(qf_min(50, cfg) == 73);  // 95 - 0.5*45 = 72.5, round half up

    for (int t = 100; t <= 200; ++t) CHECK(qf_min(t, cfg) == 50);

    int prev = 96;
    for (int t = 0; t <= 200; ++t) {
        const int v = qf_min(t, cfg);
        CHECK(v <= prev);
        CHECK(v >= cfg.qf_min_final);
        CHECK(v <= cfg.qf_max);
        prev = v;
    }

    CHECK_THROWS_AS(qf_min(201, cfg), ArgumentError);
    CHECK_THROWS_AS(qf_min(-1, cfg), ArgumentError);
    CHECK_THROWS_AS(qf_min(0, CurriculumConfig{40, 50, 100}), ArgumentError);
}

TEST_CASE("category distribution over 10k draws") {
    Rng rng(40);
    std::array<int, 5> counts{};
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const TransformSpec spec = sample_transform(rng, 50, 95, 64, 64);
        counts[static_cast<int>(spec.category)]++;
    }
    const std::array<double, 5> expected = {0.40, 0.30, 0.15, 0.10, 0.05};
    double chi2 = 0.0;
    for (int k = 0; k < 5; ++k) {
        const double freq = static_cast<double>(counts[k]) / n;
        CHECK(std::fabs(freq - expected[k]) < 0.02);  // within 2 percentage points
        const double e = expected[k] * n;
        chi2 += (counts[k] - e) * (counts[k] - e) / e;
    }
    CHECK(chi2 < 13.2767);  // chi-square critical value, 4 dof, significance 0.01
}

TEST_CASE("degenerate qf range pins every jpeg spec to that qf") {
    Rng rng(41);
    for (int i = 0; i < 200; ++i) {
        const TransformSpec spec = sample_transform(rng, 95, 95, 32, 32);
        if (spec.qf) CHECK(*spec.qf == 95);
    }
}

TEST_CASE("fixed seed reproduces the spec sequence") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        const TransformSpec sa = sample_transform(a, 50, 95, 64, 48);
        const TransformSpec sb = sample_transform(b, 50, 95, 64, 48);
        CHECK(to_string(sa) == to_string(sb));
        CHECK(sa.qf == sb.qf);
    }
}

TEST_CASE("sampled qf stays inside the curriculum range over 10k pairs") {
    CurriculumConfig cfg;
    Rng rng(43);
    for (int i = 0; i < 10000; ++i) {
        const int t = rng.uniform_int(0, cfg.total_steps);
        const int lo = qf_min(t, cfg);
        const TransformSpec spec = sample_transform(rng, lo, cfg.qf_max, 16, 16);
        if (spec.qf) {
            CHECK(*spec.qf >= lo);
            CHECK(*spec.qf <= cfg.qf_max);
        }
        if (spec.spatial) {
            if (spec.spatial->kind == SpatialKind::kGaussianBlur) {
                CHECK(spec.spatial->sigma >= 0.1f);
                CHECK(spec.spatial->sigma <= 2.0f);
            }
            if (spec.spatial->kind == SpatialKind::kCropResize) {
                CHECK(spec.spatial->crop_fraction >= 0.875f);
                CHECK(spec.spatial->crop_fraction <= 1.0f);
            }
        }
    }
}

TEST_CASE("sample_transform rejects invalid ranges") {
    Rng rng(44);
    CHECK_THROWS_AS(sample_transform(rng, 80, 60, 16, 16), ArgumentError);
    CHECK_THROWS_AS(sample_transform(rng, 0, 95, 16, 16), ArgumentError);
}

TEST_CASE("identity spec passes through with identity vjp") {
    TransformSpec spec;
    spec.category = TransformCategory::kIdentity;
    Rng rng(45);
    const ImageTensor x = random_image(rng, 16, 16, 3);
    TransformCtx ctx;
    const ImageTensor y = apply_transform(spec, x, GradMode::kWithGrad, &ctx);
    CHECK(max_abs_diff(x, y) == 0.0f);
    const Cotangent g = random_image(rng, 16, 16, 3, -1.0f, 1.0f);
    CHECK(max_abs_diff(transform_vjp(ctx, g), g) == 0.0f);
}

TEST_CASE("horizontal flip is an involution") {
    HorizontalFlipOp flip;
    Rng rng(46);
    const ImageTensor x = random_image(rng, 8, 12, 3);
    CHECK(max_abs_diff(flip.forward(flip.forward(x)), x) == 0.0f);
}

TEST_CASE("JpegOnly delegates to the codec exactly") {
    TransformSpec spec;
    spec.category = TransformCategory::kJpegOnly;
    spec.qf = 75;
    Rng rng(47);
    const ImageTensor x = random_image(rng, 16, 16, 3);
    const ImageTensor via_transform = apply_transform(spec, x, GradMode::kNoGrad);
    CodecConfig cfg;
    cfg.qf = 75;
    CHECK(max_abs_diff(via_transform, diffjpeg_forward(x, cfg)) == 0.0f);
}

TEST_CASE("grad modes share forward numerics") {
    Rng rng(48);
    const ImageTensor x = random_image(rng, 16, 16, 3);
    for (int i = 0; i < 20; ++i) {
        Rng sample_rng = rng.derive(i);
        const TransformSpec spec = sample_transform(sample_rng, 50, 95, 16, 16);
        TransformCtx ctx;
        const ImageTensor with = apply_transform(spec, x, GradMode::kWithGrad, &ctx);
        const ImageTensor without = apply_transform(spec, x, GradMode::kNoGrad);
        CHECK(max_abs_diff(with, without) == 0.0f);
    }
}

TEST_CASE("spec validation catches inconsistent fields") {
    Rng rng(49);
    const ImageTensor x = random_image(rng, 16, 16, 3);
    TransformSpec no_qf;
    no_qf.category = TransformCategory::kJpegOnly;  // qf missing
    CHECK_THROWS_AS(apply_transform(no_qf, x, GradMode::kNoGrad), ArgumentError);

    TransformSpec stray_spatial;
    stray_spatial.category = TransformCategory::kIdentity;
    stray_spatial.spatial = SpatialParams{};
    CHECK_THROWS_AS(apply_transform(stray_spatial, x, GradMode::kNoGrad), ArgumentError);
}

TEST_CASE("vjp without context is a usage error") {
    TransformCtx ctx;
    CHECK_THROWS_AS(transform_vjp(ctx, Cotangent(8, 8, 3, 0.0f)), UsageError);
}

TEST_CASE("gaussian blur passes the fd oracle at tol 1e-3") {
    Rng rng(50);
    for (const float sigma : {0.1f, 0.7f, 1.0f, 2.0f}) {
        GaussianBlurOp op(sigma);
        const ImageTensor x = random_image(rng, 20, 20, 3);
        const CheckReport report = finite_diff_check(op, x, 64, 1e-3f, 1e-3f, rng);
        CHECK_MESSAGE(report.pass, "sigma=", sigma, " err=", report.max_rel_error);
    }
}

TEST_CASE("blur kernel sums to one (flat image is a fixed point)") {
    GaussianBlurOp op(1.3f);
    const ImageTensor flat(16, 16, 1, 0.6173f);
    CHECK(max_abs_diff(op.forward(flat), flat) < 1e-5f);
}

TEST_CASE("flip and crop-resize pass the fd oracle") {
    Rng rng(51);
    HorizontalFlipOp flip;
    const ImageTensor x = random_image(rng, 16, 16, 3);
    CHECK(finite_diff_check(flip, x, 64, 1e-3f, 1e-3f, rng).pass);

    CropResizeOp crop_op(0.9f, 1, 1);
    CHECK(finite_diff_check(crop_op, x, 64, 1e-3f, 1e-3f, rng).pass);
}

TEST_CASE("spatial op adjoints are exact transposes") {
    Rng rng(52);
    SUBCASE("blur") {
        GaussianBlurOp op(1.0f);
        CHECK(jpegrad::test::adjoint_check(op, 16, 16, 3, 100, rng) < 1e-3);
    }
    SUBCASE("flip") {
        HorizontalFlipOp op;
        CHECK(jpegrad::test::adjoint_check(op, 16, 16, 3, 100, rng) < 1e-4);
    }
    SUBCASE("crop-resize") {
        CropResizeOp op(0.875f, 2, 1);
        CHECK(jpegrad::test::adjoint_check(op, 16, 16, 3, 100, rng) < 1e-3);
    }
}

TEST_CASE("category-shaped op chains pass the fd oracle end to end") {
    // The chains apply_transform builds, with the codec's deployment clamp
    // off: the clamp mask is a step function and would confound the smooth
    // surrogate probe at saturating coordinates.
    Rng rng(53);
    const ImageTensor x = random_image(rng, 16, 16, 3, 0.15f, 0.85f);
    CodecConfig codec_cfg;
    codec_cfg.qf = 60;
    codec_cfg.clamp_output = false;

    auto check_chain = [&](std::vector<std::unique_ptr<DiffOp>> ops) {
        ComposeOp op(std::move(ops));
        const CheckReport report = finite_diff_check(op, x, 48, 1e-3f, 1e-3f, rng);
        CHECK_MESSAGE(report.pass, op.name(), " err=", report.max_rel_error);
    };

    {
        std::vector<std::unique_ptr<DiffOp>> ops;
        ops.push_back(std::make_unique<DiffJpegOp>(codec_cfg));
        ops.push_back(std::make_unique<GaussianBlurOp>(0.8f));
        check_chain(std::move(ops));
    }
    {
        std::vector<std::unique_ptr<DiffOp>> ops;
        ops.push_back(std::make_unique<CropResizeOp>(0.9f, 1, 0));
        ops.push_back(std::make_unique<DiffJpegOp>(codec_cfg));
        check_chain(std::move(ops));
    }
    {
        std::vector<std::unique_ptr<DiffOp>> ops;
        ops.push_back(std::make_unique<HorizontalFlipOp>());
        ops.push_back(std::make_unique<DiffJpegOp>(codec_cfg));
        ops.push_back(std::make_unique<GaussianBlurOp>(1.4f));
        check_chain(std::move(ops));
    }
}

TEST_CASE("to_string formats match the log contract") {
    TransformSpec spec;
    spec.category = TransformCategory::kJpegThenSpatial;
    spec.qf = 72;
    SpatialParams p;
    p.kind = SpatialKind::kGaussianBlur;
    p.sigma = 0.84f;
    spec.spatial = p;
    CHECK(to_string(spec) == "JpegThenSpatial qf=72 blur sigma=0.84");

    TransformSpec id;
    id.category = TransformCategory::kIdentity;
    CHECK(to_string(id) == "Identity");

    TransformSpec crop_spec;
    crop_spec.category = TransformCategory::kSpatialOnly;
    SpatialParams cp;
    cp.kind = SpatialKind::kCropResize;
    cp.crop_fraction = 0.9f;
    cp.row_offset = 3;
    cp.col_offset = 1;
    crop_spec.spatial = cp;
    CHECK(to_string(crop_spec) == "SpatialOnly crop frac=0.900 off=(3,1)");
}
