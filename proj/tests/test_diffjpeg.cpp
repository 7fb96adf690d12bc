#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "jpegrad/codec.hpp"
#include "jpegrad/color.hpp"
#include "jpegrad/dct.hpp"
#include "jpegrad/errors.hpp"
#include "jpegrad/gradcheck.hpp"
#include "jpegrad/quant.hpp"
#include "jpegrad/rng.hpp"
#include "test_util.hpp"

using namespace jpegrad;

namespace {

// Independent double-precision DCT-II straight from the definition; the
// oracle for the matrix implementation.
void reference_dct_block(const double in[64], double out[64]) {
    const double pi = 3.14159265358979323846;
    for (int u = 0; u < 8; ++u) {
        for (int v = 0; v < 8; ++v) {
            const double cu = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            const double cv = v == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            double s = 0.0;
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    s += in[y * 8 + x] * std::cos(pi * (2 * y + 1) * u / 16.0) *
                         std::cos(pi * (2 * x + 1) * v / 16.0);
            out[u * 8 + v] = cu * cv * s;
        }
    }
}

}  // namespace

TEST_CASE("rgb_to_ycbcr pins black, white and pure red") {
    ImageTensor x(1, 3, 3);
    // pixels: black, white, red (255 scale)
    for (int c = 0; c < 3; ++c) {
        x.at(0, 0, c) = 0.0f;
        x.at(0, 1, c) = 255.0f;
        x.at(0, 2, c) = c == 0 ? 255.0f : 0.0f;
    }
    const ImageTensor y = rgb_to_ycbcr(x);
    CHECK(y.at(0, 0, 0) == doctest::Approx(0.0f).epsilon(1e-6));
    CHECK(y.at(0, 0, 1) == doctest::Approx(128.0f).epsilon(1e-6));
    CHECK(y.at(0, 0, 2) == doctest::Approx(128.0f).epsilon(1e-6));
    CHECK(y.at(0, 1, 0) == doctest::Approx(255.0f).epsilon(1e-6));
    CHECK(y.at(0, 1, 1) == doctest::Approx(128.0f).epsilon(1e-6));
    CHECK(y.at(0, 1, 2) == doctest::Approx(128.0f).epsilon(1e-6));
    CHECK(y.at(0, 2, 0) == doctest::Approx(76.245f).epsilon(1e-4));
    CHECK(y.at(0, 2, 1) == doctest::Approx(84.972f).epsilon(1e-4));
    CHECK(y.at(0, 2, 2) == doctest::Approx(255.5f).epsilon(1e-4));
}

TEST_CASE("ycbcr_to_rgb inverts the forward transform") {
    ImageTensor x(1, 2, 3);
    x.at(0, 0, 0) = 0.0f;   x.at(0, 0, 1) = 128.0f; x.at(0, 0, 2) = 128.0f;
    x.at(0, 1, 0) = 255.0f; x.at(0, 1, 1) = 128.0f; x.at(0, 1, 2) = 128.0f;
    const ImageTensor y = ycbcr_to_rgb(x);
    for (int c = 0; c < 3; ++c) {
        CHECK(y.at(0, 0, c) == doctest::Approx(0.0f).epsilon(1e-5));
        CHECK(y.at(0, 1, c) == doctest::Approx(255.0f).epsilon(1e-5));
    }

    Rng rng(20);
    const ImageTensor r = random_image(rng, 25, 40, 3, 0.0f, 255.0f);  // 1000 pixels
    CHECK(max_abs_diff(ycbcr_to_rgb(rgb_to_ycbcr(r)), r) < 1e-4f);
}

TEST_CASE("color ops reject wrong channel counts") {
    ImageTensor plane(8, 8, 1);
    CHECK_THROWS_AS(rgb_to_ycbcr(plane), ShapeError);
    CHECK_THROWS_AS(ycbcr_to_rgb(plane), ShapeError);
}

TEST_CASE("block_dct matches the definition-level oracle") {
    Rng rng(21);
    const ImageTensor plane = random_image(rng, 16, 16, 1, -128.0f, 128.0f);
    const ImageTensor coefs = block_dct(plane);

    for (int by = 0; by < 16; by += 8) {
        for (int bx = 0; bx < 16; bx += 8) {
            double in[64], expected[64];
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x) in[y * 8 + x] = plane.at(by + y, bx + x, 0);
            reference_dct_block(in, expected);
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    CHECK(coefs.at(by + y, bx + x, 0) ==
                          doctest::Approx(expected[y * 8 + x]).epsilon(1e-5));
        }
    }
}

TEST_CASE("constant block concentrates in DC: F[0,0] = 8v") {
    ImageTensor plane(8, 8, 1, -37.5f);
    const ImageTensor coefs = block_dct(plane);
    CHECK(coefs.at(0, 0, 0) == doctest::Approx(8.0f * -37.5f).epsilon(1e-6));
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            if (y || x) CHECK(std::fabs(coefs.at(y, x, 0)) < 1e-4f);
}

TEST_CASE("Parseval holds per block") {
    Rng rng(22);
    const ImageTensor plane = random_image(rng, 8, 8, 1, -128.0f, 128.0f);
    const ImageTensor coefs = block_dct(plane);
    double in_sq = 0.0, out_sq = 0.0;
    for (float v : plane.data) in_sq += static_cast<double>(v) * v;
    for (float v : coefs.data) out_sq += static_cast<double>(v) * v;
    CHECK(out_sq == doctest::Approx(in_sq).epsilon(1e-3));
}

TEST_CASE("block_idct round trip and the DC inverse case") {
    Rng rng(23);
    const ImageTensor plane = random_image(rng, 24, 16, 1, -128.0f, 128.0f);
    CHECK(max_abs_diff(block_idct(block_dct(plane)), plane) < 1e-4f);

    ImageTensor zeros(8, 8, 1, 0.0f);
    CHECK(linf_norm(block_idct(zeros)) == 0.0f);

    ImageTensor dc_only(8, 8, 1, 0.0f);
    dc_only.at(0, 0, 0) = 8.0f * 11.25f;
    const ImageTensor restored = block_idct(dc_only);
    for (float v : restored.data) CHECK(v == doctest::Approx(11.25f).epsilon(1e-5));
}

TEST_CASE("dct adjoint identity <D x, g> = <x, D^T g>") {
    Rng rng(24);
    BlockDctOp dct_op;
    BlockIdctOp idct_op;
    CHECK(jpegrad::test::adjoint_check(dct_op, 16, 16, 1, 100, rng, -128.0f, 128.0f) < 1e-4);
    CHECK(jpegrad::test::adjoint_check(idct_op, 16, 16, 1, 100, rng, -128.0f, 128.0f) < 1e-4);
}

TEST_CASE("dct rejects bad shapes") {
    CHECK_THROWS_AS(block_dct(ImageTensor(12, 16, 1)), ShapeError);
    CHECK_THROWS_AS(block_dct(ImageTensor(16, 16, 3)), ShapeError);
}

TEST_CASE("quality_to_tables pins the IJG formula") {
    const QuantTables q50 = quality_to_tables(50);
    CHECK(q50.luma[0] == 16);   // base table unchanged at qf=50
    CHECK(q50.chroma[0] == 17);
    CHECK(q50.luma[63] == 99);

    const QuantTables q100 = quality_to_tables(100);
    for (int i = 0; i < 64; ++i) {
        CHECK(q100.luma[i] == 1);
        CHECK(q100.chroma[i] == 1);
    }

    CHECK(quality_to_tables(95).luma[0] == 2);   // floor((16*10+50)/100)
    CHECK(quality_to_tables(25).luma[0] == 32);  // scale 200
    CHECK(quality_to_tables(10).luma[0] == 80);  // scale 500

    CHECK_THROWS_AS(quality_to_tables(0), ArgumentError);
    CHECK_THROWS_AS(quality_to_tables(101), ArgumentError);
}

TEST_CASE("table entries stay in [1,255] and are non-increasing in qf") {
    for (int qf = 1; qf <= 100; ++qf) {
        const QuantTables t = cached_tables(qf);
        for (int i = 0; i < 64; ++i) {
            CHECK(t.luma[i] >= 1);
            CHECK(t.luma[i] <= 255);
            CHECK(t.chroma[i] >= 1);
            CHECK(t.chroma[i] <= 255);
            if (qf > 1) {
                const QuantTables prev = cached_tables(qf - 1);
                CHECK(t.luma[i] <= prev.luma[i]);
                CHECK(t.chroma[i] <= prev.chroma[i]);
            }
        }
    }
}

TEST_CASE("ste_quantize forward values and identity backward") {
    QuantTables t = quality_to_tables(50);
    ImageTensor coefs(8, 8, 1, 0.0f);
    coefs.at(0, 0, 0) = 100.0f;  // Q=16 -> round(6.25)*16 = 96
    const ImageTensor q = ste_quantize(coefs, t, Plane::kLuma);
    CHECK(q.at(0, 0, 0) == doctest::Approx(96.0f));

    // half-away-from-zero on a negative coefficient
    QuantTables t8 = t;
    t8.luma.fill(8);
    coefs.at(0, 0, 0) = -12.4f;  // round(-1.55)*8 = -16
    CHECK(ste_quantize(coefs, t8, Plane::kLuma).at(0, 0, 0) == doctest::Approx(-16.0f));

    coefs.at(0, 0, 0) = 0.0f;
    CHECK(linf_norm(ste_quantize(coefs, t, Plane::kLuma)) == 0.0f);

    SteQuantizeOp op(t, Plane::kLuma);
    Rng rng(25);
    (void)op.forward(random_image(rng, 8, 8, 1, -100.0f, 100.0f));
    const Cotangent g = random_image(rng, 8, 8, 1, -1.0f, 1.0f);
    CHECK(max_abs_diff(op.vjp(g), g) == 0.0f);
}

TEST_CASE("ste op passes the fd check against its declared surrogate") {
    SteQuantizeOp op(quality_to_tables(50), Plane::kLuma);
    Rng rng(26);
    const ImageTensor x = random_image(rng, 8, 8, 1, -100.0f, 100.0f);
    const CheckReport report = finite_diff_check(op, x, 64, 0.25f, 1e-3f, rng);
    CHECK(report.pass);
    CHECK(report.used_surrogate_forward);
}

TEST_CASE("diffjpeg_forward is bit-exact with hard_jpeg") {
    Rng rng(27);
    for (int trial = 0; trial < 20; ++trial) {
        CodecConfig cfg;
        cfg.qf = rng.uniform_int(1, 100);
        cfg.clamp_output = trial % 2 == 0;
        const ImageTensor x = random_image(rng, 16, 16, 3);
        const ImageTensor a = diffjpeg_forward(x, cfg);
        const ImageTensor b = hard_jpeg(x, cfg);
        CHECK(max_abs_diff(a, b) == 0.0f);
    }
}

TEST_CASE("qf=100 output stays close to the input") {
    Rng rng(28);
    CodecConfig cfg;
    cfg.qf = 100;
    const ImageTensor x = random_image(rng, 32, 32, 3);
    const ImageTensor y = diffjpeg_forward(x, cfg);
    CHECK(max_abs_diff(x, y) < 3.0f / 255.0f);
}

TEST_CASE("constant gray stays constant within 1/255 at every qf") {
    const ImageTensor x(16, 16, 3, 0.5f);
    for (int qf = 1; qf <= 100; ++qf) {
        CodecConfig cfg;
        cfg.qf = qf;
        const ImageTensor y = hard_jpeg(x, cfg);
        CHECK(max_abs_diff(x, y) < 1.0f / 255.0f);
    }
}

TEST_CASE("identity vjp in 4:4:4 no-clamp mode") {
    Rng rng(29);
    CodecConfig cfg;
    cfg.qf = 75;
    cfg.clamp_output = false;
    const ImageTensor x = random_image(rng, 16, 16, 3);
    CodecCtx ctx;
    (void)diffjpeg_forward(x, cfg, &ctx);
    for (int trial = 0; trial < 5; ++trial) {
        const Cotangent g = random_image(rng, 16, 16, 3, -1.0f, 1.0f);
        CHECK(max_abs_diff(diffjpeg_vjp(ctx, g), g) < 1e-4f);
    }

    const Cotangent zero(16, 16, 3, 0.0f);
    CHECK(linf_norm(diffjpeg_vjp(ctx, zero)) == 0.0f);
}

TEST_CASE("clamped coordinates get a zero cotangent") {
    CodecConfig cfg;
    cfg.qf = 50;
    cfg.clamp_output = true;
    // Saturated white: ringing pushes some outputs past 1, which then clamp.
    ImageTensor x(16, 16, 3, 1.0f);
    for (int y = 0; y < 16; ++y) x.at(y, 7, 1) = 0.0f;  // an edge to ring against
    CodecCtx ctx;
    (void)diffjpeg_forward(x, cfg, &ctx);

    std::size_t n_clamped = 0;
    for (auto m : ctx.clamp_mask) n_clamped += m;
    REQUIRE(n_clamped > 0);

    const Cotangent g(16, 16, 3, 1.0f);
    const Cotangent back = diffjpeg_vjp(ctx, g);
    // The vjp chain spreads values, so check only that clamped outputs were
    // zeroed before the chain: push a delta at a clamped coordinate only.
    Cotangent probe(16, 16, 3, 0.0f);
    std::size_t clamped_idx = 0;
    while (!ctx.clamp_mask[clamped_idx]) ++clamped_idx;
    probe.data[clamped_idx] = 1.0f;
    CHECK(linf_norm(diffjpeg_vjp(ctx, probe)) == 0.0f);
    (void)back;
}

TEST_CASE("vjp without forward context is a usage error") {
    CodecCtx ctx;
    const Cotangent g(8, 8, 3, 0.0f);
    CHECK_THROWS_AS(diffjpeg_vjp(ctx, g), UsageError);
}

TEST_CASE("hard codec refuses gradient requests") {
    HardJpegOp op(CodecConfig{});
    Rng rng(30);
    (void)op.forward(random_image(rng, 8, 8, 3));
    CHECK_FALSE(op.has_vjp());
    CHECK_THROWS_AS(op.vjp(Cotangent(8, 8, 3, 0.0f)), UnsupportedOperation);
}

TEST_CASE("monotone distortion in qf") {
    Rng rng(31);
    const ImageTensor x = random_image(rng, 32, 32, 3);
    double prev_mae = 1e9;
    for (const int qf : {50, 60, 70, 80, 90, 100}) {
        CodecConfig cfg;
        cfg.qf = qf;
        const ImageTensor y = hard_jpeg(x, cfg);
        double mae = 0.0;
        for (std::size_t i = 0; i < x.data.size(); ++i)
            mae += std::fabs(static_cast<double>(x.data[i]) - y.data[i]);
        mae /= static_cast<double>(x.data.size());
        CHECK(mae <= prev_mae);
        prev_mae = mae;
    }
}

TEST_CASE("non-multiple-of-8 dims are padded and cropped transparently") {
    Rng rng(32);
    const ImageTensor x = random_image(rng, 50, 70, 3);
    CodecConfig cfg;
    cfg.qf = 75;
    CodecCtx ctx;
    const ImageTensor y = diffjpeg_forward(x, cfg, &ctx);
    CHECK(y.height == 50);
    CHECK(y.width == 70);
    CHECK(y.all_finite());
    CHECK(max_abs_diff(y, hard_jpeg(x, cfg)) == 0.0f);

    // Padding fold-back keeps the vjp a true adjoint.
    cfg.clamp_output = false;
    DiffJpegOp op(cfg);
    CHECK(jpegrad::test::adjoint_check(op, 50, 70, 3, 10, rng) < 1e-4);
}

TEST_CASE("full codec passes the fd check through the surrogate path") {
    CodecConfig cfg;
    cfg.qf = 75;
    cfg.clamp_output = false;
    DiffJpegOp op(cfg);
    Rng rng(33);
    const ImageTensor x = random_image(rng, 16, 16, 3);
    const CheckReport report = finite_diff_check(op, x, 64, 1e-3f, 1e-3f, rng);
    CHECK(report.pass);
    CHECK(report.used_surrogate_forward);
}

TEST_CASE("4:2:0 mode subsamples chroma and stays differentiable") {
    Rng rng(34);
    CodecConfig cfg;
    cfg.qf = 75;
    cfg.chroma_mode = ChromaMode::k420;
    const ImageTensor x = random_image(rng, 32, 32, 3);
    const ImageTensor y = diffjpeg_forward(x, cfg);
    CHECK(y.all_finite());
    CHECK(max_abs_diff(y, hard_jpeg(x, cfg)) == 0.0f);

    cfg.clamp_output = false;
    DiffJpegOp op(cfg);
    CHECK(jpegrad::test::adjoint_check(op, 32, 32, 3, 10, rng) < 1e-4);
    const CheckReport report = finite_diff_check(op, x, 64, 1e-3f, 1e-3f, rng);
    CHECK(report.pass);
}

TEST_CASE("codec rejects invalid configs and shapes") {
    Rng rng(35);
    const ImageTensor x = random_image(rng, 16, 16, 3);
    CodecConfig cfg;
    cfg.qf = 0;
    CHECK_THROWS_AS(diffjpeg_forward(x, cfg), ArgumentError);
    cfg.qf = 75;
    CHECK_THROWS_AS(diffjpeg_forward(ImageTensor(16, 16, 1), cfg), ShapeError);
}
