#include <cmath>
#include <random>

#include <doctest.h>

#include "calib/angles.hpp"
#include "calib/label_codec.hpp"

using namespace calib;

namespace {

LabelDistribution uniform_distribution() {
    LabelDistribution dist;
    dist.probs.assign(kBinCount, 1.0 / kBinCount);
    return dist;
}

LabelDistribution one_hot(int index) {
    LabelDistribution dist;
    dist.probs.assign(kBinCount, 0.0);
    dist.probs[static_cast<std::size_t>(index)] = 1.0;
    return dist;
}

} // namespace

TEST_CASE("bin spec shapes") {
    for (ParamKind kind : {ParamKind::slope, ParamKind::offset, ParamKind::vfov}) {
        BinSpec spec = make_bins(kind);
        REQUIRE(spec.edges.size() == 257);
        REQUIRE(spec.centers.size() == 256);
        for (std::size_t i = 1; i < spec.edges.size(); ++i) {
            CHECK(spec.edges[i] > spec.edges[i - 1]);
        }
        for (int i = 0; i < kBinCount; ++i) {
            CHECK(spec.centers[i] > spec.edges[i]);
            CHECK(spec.centers[i] < spec.edges[i + 1]);
        }
    }
    CHECK(make_bins(ParamKind::slope).range_min() == -kPi / 2.0);
    CHECK(make_bins(ParamKind::slope).range_max() == kPi / 2.0);
    CHECK(make_bins(ParamKind::offset).range_min() == -1.6);
    CHECK(make_bins(ParamKind::offset).range_max() == 1.6);
    CHECK(make_bins(ParamKind::vfov).range_min() == 0.2);
    CHECK(make_bins(ParamKind::vfov).range_max() == 1.8);
}

TEST_CASE("vfov bins are uniform with width 0.00625") {
    BinSpec spec = make_bins(ParamKind::vfov);
    CHECK((spec.range_max() - spec.range_min()) / kBinCount == 0.00625);
    for (int i = 0; i < kBinCount; ++i) {
        CHECK(std::abs((spec.edges[i + 1] - spec.edges[i]) - 0.00625) < 1e-15);
    }
}

TEST_CASE("slope and offset bins narrow toward zero") {
    for (ParamKind kind : {ParamKind::slope, ParamKind::offset}) {
        BinSpec spec = make_bins(kind);
        double width_at_zero = spec.edges[129] - spec.edges[128];
        double width_at_low_end = spec.edges[1] - spec.edges[0];
        double width_at_high_end = spec.edges[256] - spec.edges[255];
        CHECK(width_at_zero < width_at_low_end);
        CHECK(width_at_zero < width_at_high_end);

        // widths grow monotonically away from the center
        for (int i = 128; i < kBinCount - 1; ++i) {
            CHECK(spec.edges[i + 2] - spec.edges[i + 1] > spec.edges[i + 1] - spec.edges[i]);
        }
    }
}

TEST_CASE("slope edges are symmetric") {
    BinSpec spec = make_bins(ParamKind::slope);
    for (int i = 0; i <= kBinCount; ++i) {
        CHECK(spec.edges[i] == -spec.edges[kBinCount - i]);
    }
    CHECK(spec.edges[128] == 0.0);
}

TEST_CASE("encode picks the containing bin") {
    BinSpec vfov = make_bins(ParamKind::vfov);
    CHECK(bin_index(0.2, vfov) == 0);
    CHECK(bin_index(1.0, vfov) == 128);
    CHECK(bin_index(1.8, vfov) == 255);

    BinSpec slope = make_bins(ParamKind::slope);
    int zero_bin = bin_index(0.0, slope);
    CHECK(slope.edges[zero_bin] <= 0.0);
    CHECK(slope.edges[zero_bin + 1] > 0.0);

    LabelDistribution dist = encode(1.0, vfov);
    CHECK(dist.probs[128] == 1.0);
    double sum = 0.0;
    for (double p : dist.probs) sum += p;
    CHECK(sum == 1.0);

    CHECK_THROWS_AS(bin_index(0.19, vfov), std::invalid_argument);
    CHECK_THROWS_AS(bin_index(1.81, vfov), std::invalid_argument);

    SUBCASE("interior edge values go to the higher bin") {
        CHECK(bin_index(vfov.edges[100], vfov) == 100);
        CHECK(bin_index(slope.edges[128], slope) == 128);
    }
}

TEST_CASE("decode") {
    BinSpec vfov = make_bins(ParamKind::vfov);

    SUBCASE("one-hot decodes to the bin center") {
        for (int i : {0, 1, 17, 128, 255}) {
            CHECK(decode(one_hot(i), vfov) == vfov.centers[static_cast<std::size_t>(i)]);
            CHECK(decode(one_hot(i), vfov, DecodeMode::argmax) ==
                  vfov.centers[static_cast<std::size_t>(i)]);
        }
    }

    SUBCASE("uniform distribution decodes to the range midpoint") {
        CHECK(decode(uniform_distribution(), vfov) == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("encode/decode roundtrip stays within half the local bin width") {
        std::mt19937_64 rng(41);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (ParamKind kind : {ParamKind::slope, ParamKind::offset, ParamKind::vfov}) {
            BinSpec spec = make_bins(kind);
            for (int i = 0; i < 10000; ++i) {
                double value = spec.range_min() + (spec.range_max() - spec.range_min()) * u(rng);
                int bin = bin_index(value, spec);
                double half_width = 0.5 * (spec.edges[bin + 1] - spec.edges[bin]);
                CHECK(std::abs(decode(encode(value, spec), spec) - value) <= half_width + 1e-15);
            }
        }
    }

    SUBCASE("encode(decode(one-hot)) is the identity on bin indices") {
        for (ParamKind kind : {ParamKind::slope, ParamKind::offset, ParamKind::vfov}) {
            BinSpec spec = make_bins(kind);
            for (int i = 0; i < kBinCount; ++i) {
                CHECK(bin_index(decode(one_hot(i), spec), spec) == i);
            }
        }
    }
}

TEST_CASE("KL divergence") {
    SUBCASE("zero when pred equals target") {
        CHECK(kl_divergence(uniform_distribution(), uniform_distribution()) == 0.0);
        CHECK(kl_divergence(one_hot(7), one_hot(7)) == 0.0);
    }

    SUBCASE("uniform prediction against a one-hot target costs log 256") {
        CHECK(kl_divergence(uniform_distribution(), one_hot(42)) ==
              doctest::Approx(std::log(256.0)).epsilon(1e-12));
    }

    SUBCASE("three-head loss sums the heads and ignores head order") {
        std::array<LabelDistribution, 3> pred{uniform_distribution(), one_hot(3), one_hot(9)};
        std::array<LabelDistribution, 3> target{one_hot(5), one_hot(3), one_hot(9)};
        double loss = kl_loss(pred, target);
        CHECK(loss == doctest::Approx(std::log(256.0)).epsilon(1e-12));

        std::array<LabelDistribution, 3> pred_perm{one_hot(3), one_hot(9), uniform_distribution()};
        std::array<LabelDistribution, 3> target_perm{one_hot(3), one_hot(9), one_hot(5)};
        CHECK(kl_loss(pred_perm, target_perm) == doctest::Approx(loss).epsilon(1e-15));

        std::array<LabelDistribution, 3> equal{one_hot(1), one_hot(2), one_hot(3)};
        CHECK(kl_loss(equal, equal) == 0.0);
    }

    SUBCASE("nonnegative on random distributions") {
        std::mt19937_64 rng(43);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        auto random_dist = [&]() {
            LabelDistribution dist;
            dist.probs.resize(kBinCount);
            double sum = 0.0;
            for (double& p : dist.probs) {
                p = u(rng);
                sum += p;
            }
            for (double& p : dist.probs) p /= sum;
            return dist;
        };
        for (int i = 0; i < 200; ++i) {
            CHECK(kl_divergence(random_dist(), random_dist()) >= 0.0);
        }
    }

    SUBCASE("malformed distributions are rejected") {
        LabelDistribution short_dist;
        short_dist.probs.assign(100, 0.01);
        CHECK_THROWS_AS(kl_divergence(short_dist, one_hot(0)), std::invalid_argument);

        LabelDistribution not_normalized;
        not_normalized.probs.assign(kBinCount, 0.5);
        CHECK_THROWS_AS(kl_divergence(uniform_distribution(), not_normalized),
                        std::invalid_argument);

        LabelDistribution negative = uniform_distribution();
        negative.probs[0] = -negative.probs[0];
        CHECK_THROWS_AS(kl_divergence(negative, one_hot(0)), std::invalid_argument);

        CHECK_THROWS_AS(decode(not_normalized, make_bins(ParamKind::vfov)), std::invalid_argument);
    }
}

TEST_CASE("bin spec JSON roundtrip") {
    for (ParamKind kind : {ParamKind::slope, ParamKind::offset, ParamKind::vfov}) {
        BinSpec spec = make_bins(kind);
        BinSpec back = bin_spec_from_json(bin_spec_to_json(spec));
        CHECK(back.kind == spec.kind);
        REQUIRE(back.edges.size() == spec.edges.size());
        for (std::size_t i = 0; i < spec.edges.size(); ++i) {
            CHECK(back.edges[i] == spec.edges[i]);
        }
    }
    CHECK_THROWS_AS(bin_spec_from_json("{\"param\":\"vfov\",\"edges\":[0.2,1.8]}"),
                    std::invalid_argument);
}

TEST_CASE("param kind names") {
    CHECK(to_string(ParamKind::slope) == "slope");
    CHECK(param_kind_from_string("offset") == ParamKind::offset);
    CHECK_THROWS_AS(param_kind_from_string("fov"), std::invalid_argument);
}
