#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include <doctest.h>

#include "calib/angles.hpp"
#include "calib/camera_model.hpp"
#include "calib/image_io.hpp"
#include "calib/panorama_sampler.hpp"
#include "test_util.hpp"

using namespace calib;
using namespace testutil;

TEST_CASE("millimeter focal length to vfov") {
    CHECK(focal_mm_to_vfov(12.0, 24.0) == doctest::Approx(kPi / 2.0).epsilon(1e-12));
    // 2*atan(0.5)
    CHECK(focal_mm_to_vfov(24.0, 24.0) == doctest::Approx(0.9272952180016122).epsilon(1e-12));
    CHECK(focal_mm_to_vfov(1e9, 24.0) < 1e-6);
    CHECK_THROWS_AS(focal_mm_to_vfov(0.0, 24.0), std::invalid_argument);
    CHECK_THROWS_AS(focal_mm_to_vfov(50.0, -1.0), std::invalid_argument);
}

TEST_CASE("raw draws are reproducible per seed") {
    SamplingConfig config;
    UniformRng a(99), b(99);
    for (int i = 0; i < 200; ++i) {
        RawCameraDraw da = sample_raw_params(a, config);
        RawCameraDraw db = sample_raw_params(b, config);
        CHECK(std::memcmp(&da.focal_mm, &db.focal_mm, sizeof(double)) == 0);
        CHECK(std::memcmp(&da.midpoint, &db.midpoint, sizeof(double)) == 0);
        CHECK(std::memcmp(&da.roll, &db.roll, sizeof(double)) == 0);
        CHECK(std::memcmp(&da.yaw, &db.yaw, sizeof(double)) == 0);
        CHECK(da.aspect.w == db.aspect.w);
        CHECK(da.aspect.h == db.aspect.h);
    }
}

TEST_CASE("raw marginals match their analytic distributions") {
    SamplingConfig config;
    UniformRng rng(1);
    const int n = 100000;
    std::vector<double> focal, midpoint, roll, yaw;
    focal.reserve(n);
    int count_43 = 0;
    std::vector<int> aspect_counts(config.aspect_ratios.size(), 0);
    for (int i = 0; i < n; ++i) {
        RawCameraDraw draw = sample_raw_params(rng, config);
        focal.push_back(draw.focal_mm);
        midpoint.push_back(draw.midpoint);
        roll.push_back(draw.roll);
        yaw.push_back(draw.yaw);
        for (std::size_t a = 0; a < config.aspect_ratios.size(); ++a) {
            if (draw.aspect.w == config.aspect_ratios[a].w &&
                draw.aspect.h == config.aspect_ratios[a].h) {
                ++aspect_counts[a];
            }
        }
        if (draw.aspect.w == 4 && draw.aspect.h == 3) ++count_43;
    }

    CHECK(ks_pvalue(ks_statistic(focal, [](double x) { return lognormal_cdf(x, 0.8, 14.0, 17.0); }),
                    n) > 0.01);
    CHECK(ks_pvalue(ks_statistic(midpoint, [](double x) { return normal_cdf(x, 0.046, 0.6); }), n) >
          0.01);
    CHECK(ks_pvalue(ks_statistic(roll,
                                 [](double x) {
                                     return cauchy_mixture_cdf(x, 1.0 / 3.0, 0.001, 2.0 / 3.0, 0.1);
                                 }),
                    n) > 0.01);
    CHECK(ks_pvalue(ks_statistic(yaw, [](double x) { return uniform_cdf(x, -kPi, kPi); }), n) >
          0.01);

    double chi2 = 0.0;
    for (std::size_t a = 0; a < aspect_counts.size(); ++a) {
        double expected = config.aspect_ratios[a].prob * n;
        double diff = aspect_counts[a] - expected;
        chi2 += diff * diff / expected;
    }
    CHECK(chi2 < kChi2Critical4Dof);
    CHECK(static_cast<double>(count_43) / n == doctest::Approx(0.6).epsilon(0.0167)); // +/- 0.01
}

TEST_CASE("accepted draws stay inside the codec ranges") {
    SamplingConfig config;
    UniformRng rng(5);
    for (int i = 0; i < 10000; ++i) {
        CameraParams params = sample_camera_params(rng, config);
        CHECK(params.vfov >= 0.2);
        CHECK(params.vfov <= 1.8);
        CHECK(std::abs(params.roll) <= kPi / 2.0);
        CHECK(std::abs(params.midpoint * std::cos(params.roll)) <= 1.6);
        CHECK(params.yaw >= -kPi);
        CHECK(params.yaw < kPi);
        CHECK(params_within_codec_ranges(params));
    }
}

TEST_CASE("sampling config JSON") {
    SamplingConfig config;
    config.crops_per_pano = 5;
    config.horizon_mean = 0.1;
    SamplingConfig back = sampling_config_from_json(sampling_config_to_json(config));
    CHECK(back.crops_per_pano == 5);
    CHECK(back.horizon_mean == 0.1);
    CHECK(back.aspect_ratios.size() == config.aspect_ratios.size());
    CHECK(back.roll_scales == config.roll_scales);

    CHECK_THROWS_AS(sampling_config_from_json("{\"crops_per_pano\": 0}"), std::invalid_argument);
    CHECK_THROWS_AS(
        sampling_config_from_json("{\"roll_cauchy\":{\"scales\":[0.001,0.1],\"weights\":[0.33,0.66]}}"),
        std::invalid_argument);
}

TEST_CASE("extract_crop validates inputs") {
    Image square = Image::make(64, 64, 3);
    CHECK_THROWS_AS(extract_crop(square, 0, 0, 0, 1.0, 1.0, 32), std::invalid_argument);
    Image pano = Image::make(64, 32, 3);
    CHECK_THROWS_AS(extract_crop(pano, 0, 0, 0, 0.0, 1.0, 32), std::invalid_argument);
    CHECK_THROWS_AS(extract_crop(pano, 0, 0, 0, 1.0, -1.0, 32), std::invalid_argument);
}

TEST_CASE("identity orientation looks at the panorama center") {
    Image pano = smooth_noise_pano(128, 7);
    // odd output size puts the center pixel exactly on the optical axis
    Image crop = extract_crop(pano, 0.0, 0.0, 0.0, 1.0, 1.0, 225);
    for (int c = 0; c < 3; ++c) {
        double crop_center = crop.at(112, 112, c);
        // longitude 0 / latitude 0 sits midway between the four center texels
        double pano_center = 0.25 * (pano.at(127, 63, c) + pano.at(128, 63, c) +
                                     pano.at(127, 64, c) + pano.at(128, 64, c));
        CHECK(std::abs(crop_center - pano_center) <= 1.0);
    }
}

TEST_CASE("rendered horizon row matches the midpoint prediction") {
    Image pano = latitude_gradient_pano(512);
    UniformRng rng(21);
    const int out = 224;
    for (int trial = 0; trial < 10; ++trial) {
        double vfov = rng.next_in(0.5, 1.4);
        double midpoint = rng.next_in(-0.7, 0.7);
        double pitch = pitch_from_midpoint(midpoint, vfov);
        Image crop = extract_crop(pano, 0.0, pitch, 0.0, vfov, 1.0, out);

        // decoded code crosses 0.5 at latitude zero
        int col = out / 2;
        double crossing = -1.0;
        double prev = decode_code(crop.at(col, 0, 0), crop.at(col, 0, 1)) - 0.5;
        for (int i = 1; i < out; ++i) {
            double cur = decode_code(crop.at(col, i, 0), crop.at(col, i, 1)) - 0.5;
            if (prev <= 0.0 && cur > 0.0) {
                crossing = (i - 1) - prev / (cur - prev);
                break;
            }
            prev = cur;
        }
        REQUIRE(crossing >= 0.0);
        double predicted_row = out / 2.0 - 0.5 - midpoint * out / 2.0;
        CHECK(std::abs(crossing - predicted_row) <= 1.0);
    }
}

TEST_CASE("horizon row has constant color when roll is zero") {
    Image pano = latitude_gradient_pano(512);
    double vfov = 1.0, midpoint = 0.3;
    double pitch = pitch_from_midpoint(midpoint, vfov);
    Image crop = extract_crop(pano, 0.4, pitch, 0.0, vfov, 1.0, 224);

    int horizon_row = static_cast<int>(std::lround(112.0 - 0.5 - midpoint * 112.0));
    double lo = 2.0, hi = -2.0;
    for (int j = 0; j < 224; ++j) {
        double v = decode_code(crop.at(j, horizon_row, 0), crop.at(j, horizon_row, 1));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    // one 8-bit intensity level in decoded units
    CHECK(hi - lo <= 1.0 / 255.0);
}

TEST_CASE("yaw change shifts the sampled longitude") {
    Image pano = longitude_gradient_pano(256);
    const int out = 96;
    double vfov = 0.9;
    double delta = 40.0 * (2.0 * kPi / 512.0); // 40 panorama columns
    Image a = extract_crop(pano, 0.0, 0.1, 0.0, vfov, 1.0, out);
    Image b = extract_crop(pano, delta, 0.1, 0.0, vfov, 1.0, out);
    double expected = delta / (2.0 * kPi);
    for (int i = 8; i < out - 8; i += 16) {
        for (int j = 8; j < out - 8; j += 16) {
            double la = decode_code(a.at(j, i, 0), a.at(j, i, 1));
            double lb = decode_code(b.at(j, i, 0), b.at(j, i, 1));
            double shift = lb - la;
            if (shift < -0.5) shift += 1.0;
            if (shift > 0.5) shift -= 1.0;
            // one panorama pixel of slack
            CHECK(std::abs(shift - expected) <= 1.0 / 512.0);
        }
    }
}

TEST_CASE("crop extraction commutes with panorama rotation") {
    Image pano = smooth_noise_pano(128, 11);
    const int shift_cols = 37;
    Image rolled = Image::make(pano.width, pano.height, 3);
    for (int y = 0; y < pano.height; ++y) {
        for (int x = 0; x < pano.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                rolled.at(x, y, c) = pano.at((x + shift_cols) % pano.width, y, c);
            }
        }
    }
    double delta = shift_cols * 2.0 * kPi / pano.width;
    Image a = extract_crop(pano, delta, 0.2, 0.1, 1.0, 4.0 / 3.0, 96);
    Image b = extract_crop(rolled, 0.0, 0.2, 0.1, 1.0, 4.0 / 3.0, 96);
    int max_diff = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        max_diff = std::max(max_diff, std::abs(int(a.data[i]) - int(b.data[i])));
    }
    CHECK(max_diff <= 1);
}

TEST_CASE("split assignment is a pure function of the panorama id") {
    SplitFractions fractions;
    CHECK(split_for_pano("pano_007", fractions) == split_for_pano("pano_007", fractions));

    int train = 0, val = 0, test = 0;
    for (int i = 0; i < 5000; ++i) {
        switch (split_for_pano("pano_" + std::to_string(i), fractions)) {
        case Split::train: ++train; break;
        case Split::val: ++val; break;
        case Split::test: ++test; break;
        }
    }
    CHECK(train > 3700);
    CHECK(val > 300);
    CHECK(test > 300);
    CHECK_THROWS_AS(split_for_pano("x", {0.5, 0.1, 0.1}), std::invalid_argument);
}

TEST_CASE("build_dataset emits crops_per_pano records per panorama") {
    TempDir panos("panos");
    TempDir out("dataset");
    for (int i = 0; i < 10; ++i) {
        save_png(smooth_noise_pano(32, 100 + i), panos.path() / ("p" + std::to_string(i) + ".png"));
    }

    SamplingConfig config;
    config.out_size = 32;
    DatasetManifest manifest = build_dataset(panos.path(), out.path(), config, 7);
    CHECK(manifest.records.size() == 70);

    SUBCASE("every referenced image exists and labels fit the codec ranges") {
        for (const CropRecord& record : manifest.records) {
            CHECK(std::filesystem::exists(out.path() / record.image_path));
            CHECK(record.vfov >= 0.2);
            CHECK(record.vfov <= 1.8);
            CHECK(std::abs(record.midpoint * std::cos(record.roll)) <= 1.6);
            CHECK(std::abs(record.roll) <= kPi / 2.0);
        }
    }

    SUBCASE("no panorama straddles splits") {
        std::map<std::string, std::string> split_of;
        for (const CropRecord& record : manifest.records) {
            auto [it, inserted] = split_of.emplace(record.pano_id, to_string(record.split));
            CHECK(it->second == to_string(record.split));
        }
        CHECK(split_of.size() == 10);
    }

    SUBCASE("same seed reproduces an identical manifest") {
        TempDir out2("dataset2");
        build_dataset(panos.path(), out2.path(), config, 7);
        std::ifstream f1(out.path() / "manifest.jsonl", std::ios::binary);
        std::ifstream f2(out2.path() / "manifest.jsonl", std::ios::binary);
        std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
        std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
        CHECK(b1 == b2);
        CHECK(!b1.empty());
    }

    SUBCASE("manifest reload matches the in-memory records") {
        std::vector<CropRecord> loaded = load_manifest(out.path() / "manifest.jsonl");
        REQUIRE(loaded.size() == manifest.records.size());
        for (std::size_t i = 0; i < loaded.size(); ++i) {
            CHECK(loaded[i].crop_id == manifest.records[i].crop_id);
            CHECK(loaded[i].vfov == manifest.records[i].vfov);
            CHECK(loaded[i].midpoint == manifest.records[i].midpoint);
            CHECK(loaded[i].roll == manifest.records[i].roll);
            CHECK(loaded[i].yaw == manifest.records[i].yaw);
        }
    }
}

TEST_CASE("build_dataset skips bad files and fails on an empty corpus") {
    TempDir panos("panos-bad");
    TempDir out("dataset-bad");

    SUBCASE("empty directory is a hard error") {
        CHECK_THROWS_AS(build_dataset(panos.path(), out.path(), SamplingConfig{}, 1),
                        std::runtime_error);
    }

    SUBCASE("garbage and non-2:1 files are skipped") {
        std::ofstream bad(panos.path() / "broken.png", std::ios::binary);
        bad << "not a png";
        bad.close();
        save_png(Image::make(32, 32, 3), panos.path() / "square.png");
        SamplingConfig config;
        config.out_size = 16;
        save_png(smooth_noise_pano(16, 3), panos.path() / "ok.png");
        DatasetManifest manifest = build_dataset(panos.path(), out.path(), config, 1);
        CHECK(manifest.records.size() == 7);
    }
}
