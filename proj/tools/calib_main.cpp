#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "calib/angles.hpp"
#include "calib/camera_model.hpp"
#include "calib/label_codec.hpp"
#include "calib/panorama_sampler.hpp"
#include "calib/perceptual.hpp"
#include "calib/retrieval.hpp"
#include "calib/serde.hpp"
#include "calib/summary.hpp"

namespace {

using namespace calib;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

nlohmann::json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return nlohmann::json::parse(in);
}

// Angle inputs are radians unless --degrees is given; --radians restates the
// default and conflicts with --degrees.
struct AngleUnit {
    bool degrees = false;
    bool radians = false;

    void attach(CLI::App* cmd) {
        auto* deg = cmd->add_flag("--degrees", degrees, "interpret angle inputs as degrees");
        cmd->add_flag("--radians", radians, "interpret angle inputs as radians (default)")
            ->excludes(deg);
    }
    double to_rad(double value) const { return degrees ? deg_to_rad(value) : value; }
};

struct DatasetArgs {
    std::string pano_dir;
    std::string out_dir;
    std::string config_path;
    std::uint64_t seed = 0;
    SplitFractions fractions;
};

int run_generate_dataset(const DatasetArgs& args) {
    SamplingConfig config;
    std::string config_path = args.config_path;
    if (config_path.empty()) {
        if (const char* env = std::getenv("CALIB_CONFIG")) config_path = env;
    }
    if (!config_path.empty()) config = load_sampling_config(config_path);

    DatasetManifest manifest =
        build_dataset(args.pano_dir, args.out_dir, config, args.seed, args.fractions);
    std::cerr << "wrote " << manifest.records.size() << " crops under " << args.out_dir << '\n';
    return 0;
}

LabelDistribution distribution_from_json(const nlohmann::json& j) {
    LabelDistribution dist;
    dist.probs = j.get<std::vector<double>>();
    return dist;
}

std::array<LabelDistribution, 3> heads_from_json(const nlohmann::json& j) {
    return {distribution_from_json(j.at("slope")), distribution_from_json(j.at("offset")),
            distribution_from_json(j.at("vfov"))};
}

std::vector<SensitivityQuery> load_queries(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open queries " + path);
    std::vector<SensitivityQuery> queries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            SensitivityQuery q;
            q.pitch_value = j.at("pitch_value").get<double>();
            q.pitch_error = j.at("pitch_error").get<double>();
            q.roll_value = j.at("roll_value").get<double>();
            q.roll_error = j.at("roll_error").get<double>();
            q.vfov_value = j.at("vfov_value").get<double>();
            q.vfov_error = j.at("vfov_error").get<double>();
            queries.push_back(q);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return queries;
}

DistortionMask mask_from_names(const std::vector<std::string>& names) {
    DistortionMask mask;
    for (const std::string& name : names) {
        if (name == "pitch") mask.pitch = true;
        else if (name == "roll") mask.roll = true;
        else if (name == "vfov") mask.vfov = true;
        else throw CLI::ValidationError("--active", "unknown parameter: " + name);
    }
    return mask;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-image camera calibration toolkit"};
    app.require_subcommand(1);

    // generate-dataset
    DatasetArgs ds;
    auto* gen = app.add_subcommand("generate-dataset",
                                   "sample camera parameters and extract labeled panorama crops");
    gen->add_option("--panos", ds.pano_dir, "directory of 2:1 equirectangular panoramas")->required();
    gen->add_option("--out", ds.out_dir, "output directory for crops and manifest")->required();
    gen->add_option("--seed", ds.seed, "RNG seed")->required();
    gen->add_option("--config", ds.config_path,
                    "sampling config JSON (default: $CALIB_CONFIG if set, else built-in)");
    gen->add_option("--train", ds.fractions.train, "train split fraction");
    gen->add_option("--val", ds.fractions.val, "val split fraction");
    gen->add_option("--test", ds.fractions.test, "test split fraction");

    // export-bins
    std::string bins_param;
    std::string bins_out;
    auto* export_bins = app.add_subcommand("export-bins", "emit a bin spec as JSON");
    export_bins->add_option("--param", bins_param, "slope, offset or vfov")->required();
    export_bins->add_option("--out", bins_out, "output file (default stdout)");

    // encode
    std::string encode_param;
    double encode_value = 0.0;
    bool encode_json = false;
    AngleUnit encode_unit;
    auto* encode_cmd = app.add_subcommand("encode", "bin index of a parameter value");
    encode_cmd->add_option("--param", encode_param, "slope, offset or vfov")->required();
    encode_cmd->add_option("--value", encode_value, "parameter value")->required();
    encode_cmd->add_flag("--json", encode_json, "print the one-hot distribution instead");
    encode_unit.attach(encode_cmd);

    // decode
    std::string decode_param;
    std::string decode_probs;
    std::string decode_mode = "expectation";
    auto* decode_cmd = app.add_subcommand("decode", "value of a 256-bin distribution");
    decode_cmd->add_option("--param", decode_param, "slope, offset or vfov")->required();
    decode_cmd->add_option("--probs", decode_probs, "JSON array file of 256 probabilities")->required();
    decode_cmd->add_option("--mode", decode_mode, "expectation or argmax")
        ->check(CLI::IsMember({"expectation", "argmax"}));

    // kl-loss
    std::string kl_pred, kl_target;
    auto* kl_cmd = app.add_subcommand("kl-loss", "summed KL divergence of the three heads");
    kl_cmd->add_option("--pred", kl_pred, "JSON file with slope/offset/vfov arrays")->required();
    kl_cmd->add_option("--target", kl_target, "JSON file with slope/offset/vfov arrays")->required();

    // score
    std::string score_records, score_queries;
    int score_k = kDefaultKnnNeighbors;
    auto* score_cmd = app.add_subcommand("score", "kNN sensitivity of queries against study records");
    score_cmd->add_option("--records", score_records, "study records JSONL")->required();
    score_cmd->add_option("--queries", score_queries, "queries JSONL")->required();
    score_cmd->add_option("--k", score_k, "neighbor count");

    // sample-distortion
    std::vector<std::string> distort_active;
    int distort_count = 1;
    std::uint64_t distort_seed = 0;
    auto* distort_cmd = app.add_subcommand("sample-distortion", "draw study distortions");
    distort_cmd->add_option("--active", distort_active, "parameters to distort (pitch roll vfov)")
        ->required()
        ->delimiter(',');
    distort_cmd->add_option("--count", distort_count, "number of draws");
    distort_cmd->add_option("--seed", distort_seed, "RNG seed")->required();

    // compensate
    CameraCalibration comp_gt, comp_dist;
    double comp_ax = 0.0, comp_ay = 0.0, comp_height_px = 0.0, comp_cam_height = 1.6;
    ImageDims comp_dims;
    AngleUnit comp_unit;
    auto* comp_cmd = app.add_subcommand(
        "compensate", "anchor and scale correction for rendering under a distorted camera");
    comp_cmd->add_option("--gt-vfov", comp_gt.vfov)->required();
    comp_cmd->add_option("--gt-midpoint", comp_gt.midpoint)->required();
    comp_cmd->add_option("--gt-roll", comp_gt.roll)->required();
    comp_cmd->add_option("--dist-vfov", comp_dist.vfov)->required();
    comp_cmd->add_option("--dist-midpoint", comp_dist.midpoint)->required();
    comp_cmd->add_option("--dist-roll", comp_dist.roll)->required();
    comp_cmd->add_option("--anchor-x", comp_ax)->required();
    comp_cmd->add_option("--anchor-y", comp_ay)->required();
    comp_cmd->add_option("--apparent-height", comp_height_px, "object height in pixels")->required();
    comp_cmd->add_option("--width", comp_dims.width)->required();
    comp_cmd->add_option("--height", comp_dims.height)->required();
    comp_cmd->add_option("--camera-height", comp_cam_height, "camera height in meters");
    comp_unit.attach(comp_cmd);

    // retrieve-build
    std::string rb_manifest, rb_out;
    auto* rb_cmd = app.add_subcommand("retrieve-build", "build a horizon-feature index from a manifest");
    rb_cmd->add_option("--manifest", rb_manifest, "dataset manifest JSONL")->required();
    rb_cmd->add_option("--out", rb_out, "index output JSONL")->required();

    // retrieve-query
    std::string rq_index, rq_image_id;
    CameraCalibration rq_calib;
    int rq_aspect_w = 4, rq_aspect_h = 3;
    std::size_t rq_top_k = 4;
    AngleUnit rq_unit;
    auto* rq_cmd = app.add_subcommand("retrieve-query", "rank indexed images by horizon distance");
    rq_cmd->add_option("--index", rq_index, "index JSONL")->required();
    auto* rq_id_opt = rq_cmd->add_option("--image-id", rq_image_id, "query with an indexed image");
    auto* rq_vfov_opt = rq_cmd->add_option("--vfov", rq_calib.vfov, "query calibration vfov");
    rq_cmd->add_option("--midpoint", rq_calib.midpoint, "query calibration midpoint");
    rq_cmd->add_option("--roll", rq_calib.roll, "query calibration roll");
    rq_cmd->add_option("--aspect-w", rq_aspect_w, "query aspect width");
    rq_cmd->add_option("--aspect-h", rq_aspect_h, "query aspect height");
    rq_cmd->add_option("--top-k", rq_top_k, "matches to return");
    rq_unit.attach(rq_cmd);
    rq_id_opt->excludes(rq_vfov_opt);

    // insert-point
    CameraCalibration ip_calib;
    ImageDims ip_dims;
    double ip_x = 0.0, ip_y = 0.0, ip_cam_height = 1.6;
    AngleUnit ip_unit;
    auto* ip_cmd = app.add_subcommand("insert-point", "ground point under a pixel");
    ip_cmd->add_option("--vfov", ip_calib.vfov)->required();
    ip_cmd->add_option("--midpoint", ip_calib.midpoint)->required();
    ip_cmd->add_option("--roll", ip_calib.roll)->required();
    ip_cmd->add_option("--width", ip_dims.width)->required();
    ip_cmd->add_option("--height", ip_dims.height)->required();
    ip_cmd->add_option("--x", ip_x, "pixel x")->required();
    ip_cmd->add_option("--y", ip_y, "pixel y")->required();
    ip_cmd->add_option("--camera-height", ip_cam_height, "camera height in meters");
    ip_unit.attach(ip_cmd);

    // summarize
    std::string sum_pairs;
    int sum_bins = 10;
    auto* sum_cmd = app.add_subcommand("summarize", "binned error quartiles and vfov error CDF");
    sum_cmd->add_option("--pairs", sum_pairs, "JSONL of {gt, pred} calibrations")->required();
    sum_cmd->add_option("--bins", sum_bins, "bin count over the true parameter value");

    // make-study
    int study_count = 2000;
    std::uint64_t study_seed = 0;
    std::string study_out;
    auto* study_cmd =
        app.add_subcommand("make-study", "synthetic study records for tests and demos");
    study_cmd->add_option("--count", study_count, "record count");
    study_cmd->add_option("--seed", study_seed, "RNG seed")->required();
    study_cmd->add_option("--out", study_out, "output JSONL (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << '\n';
        return 2;
    }

    try {
        if (gen->parsed()) return run_generate_dataset(ds);

        if (export_bins->parsed()) {
            std::string text = bin_spec_to_json(make_bins(param_kind_from_string(bins_param)));
            if (bins_out.empty()) {
                std::cout << text << '\n';
            } else {
                std::ofstream out(bins_out);
                if (!out) throw std::runtime_error("cannot write " + bins_out);
                out << text << '\n';
            }
            return 0;
        }

        if (encode_cmd->parsed()) {
            ParamKind kind = param_kind_from_string(encode_param);
            double value = kind == ParamKind::offset ? encode_value : encode_unit.to_rad(encode_value);
            BinSpec spec = make_bins(kind);
            if (encode_json) {
                std::cout << nlohmann::json(encode(value, spec).probs).dump() << '\n';
            } else {
                std::cout << bin_index(value, spec) << '\n';
            }
            return 0;
        }

        if (decode_cmd->parsed()) {
            LabelDistribution dist = distribution_from_json(parse_json_file(decode_probs));
            BinSpec spec = make_bins(param_kind_from_string(decode_param));
            DecodeMode mode =
                decode_mode == "argmax" ? DecodeMode::argmax : DecodeMode::expectation;
            std::cout << fmt(decode(dist, spec, mode)) << '\n';
            return 0;
        }

        if (kl_cmd->parsed()) {
            double loss = kl_loss(heads_from_json(parse_json_file(kl_pred)),
                                  heads_from_json(parse_json_file(kl_target)));
            std::cout << fmt(loss) << '\n';
            return 0;
        }

        if (score_cmd->parsed()) {
            std::vector<StudyRecord> records = load_study(score_records);
            std::vector<SensitivityQuery> queries = load_queries(score_queries);
            std::cout << "query_index,sensitivity\n";
            for (std::size_t i = 0; i < queries.size(); ++i) {
                std::cout << i << ',' << fmt(knn_sensitivity(queries[i], records, score_k)) << '\n';
            }
            return 0;
        }

        if (distort_cmd->parsed()) {
            DistortionMask mask = mask_from_names(distort_active);
            UniformRng rng(distort_seed);
            std::cout << "d_pitch_deg,d_roll_deg,d_vfov_deg\n";
            for (int i = 0; i < distort_count; ++i) {
                DistortionSpec spec = sample_distortion(rng, mask);
                std::cout << fmt(spec.d_pitch_deg) << ',' << fmt(spec.d_roll_deg) << ','
                          << fmt(spec.d_vfov_deg) << '\n';
            }
            return 0;
        }

        if (comp_cmd->parsed()) {
            comp_gt.vfov = comp_unit.to_rad(comp_gt.vfov);
            comp_gt.roll = comp_unit.to_rad(comp_gt.roll);
            comp_dist.vfov = comp_unit.to_rad(comp_dist.vfov);
            comp_dist.roll = comp_unit.to_rad(comp_dist.roll);
            Placement placement = compensate_placement(comp_gt, comp_dist, {comp_ax, comp_ay},
                                                       comp_height_px, comp_dims, comp_cam_height);
            std::cout << "anchor_x,anchor_y,scale\n"
                      << fmt(placement.anchor_px.x()) << ',' << fmt(placement.anchor_px.y()) << ','
                      << fmt(placement.scale_factor) << '\n';
            return 0;
        }

        if (rb_cmd->parsed()) {
            RetrievalIndex index = RetrievalIndex::from_manifest(load_manifest(rb_manifest));
            index.save(rb_out);
            std::cerr << "indexed " << index.size() << " images\n";
            return 0;
        }

        if (rq_cmd->parsed()) {
            RetrievalIndex index = RetrievalIndex::load(rq_index);
            HorizonFeature feature;
            if (!rq_image_id.empty()) {
                const RetrievalEntry* entry = index.find(rq_image_id);
                if (!entry) throw std::runtime_error("image id not in index: " + rq_image_id);
                feature = entry->feature;
            } else if (rq_vfov_opt->count() > 0) {
                rq_calib.vfov = rq_unit.to_rad(rq_calib.vfov);
                rq_calib.roll = rq_unit.to_rad(rq_calib.roll);
                feature = horizon_edge_intersections(rq_calib, ImageDims{rq_aspect_w, rq_aspect_h});
            } else {
                throw CLI::ValidationError("retrieve-query",
                                           "provide --image-id or a query calibration");
            }
            std::cout << "rank,image_id,distance\n";
            std::vector<RetrievalMatch> matches = index.query(feature, rq_top_k);
            for (std::size_t i = 0; i < matches.size(); ++i) {
                std::cout << i + 1 << ',' << matches[i].image_id << ',' << fmt(matches[i].distance)
                          << '\n';
            }
            return 0;
        }

        if (ip_cmd->parsed()) {
            ip_calib.vfov = ip_unit.to_rad(ip_calib.vfov);
            ip_calib.roll = ip_unit.to_rad(ip_calib.roll);
            Eigen::Vector3d ground =
                unproject_to_ground({ip_x, ip_y}, ip_calib, ip_dims, ip_cam_height);
            std::cout << "x,y,z\n"
                      << fmt(ground.x()) << ',' << fmt(ground.y()) << ',' << fmt(ground.z()) << '\n';
            return 0;
        }

        if (sum_cmd->parsed()) {
            std::ifstream in(sum_pairs);
            if (!in) throw std::runtime_error("cannot open pairs " + sum_pairs);
            std::vector<std::pair<CameraCalibration, CameraCalibration>> pairs;
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                nlohmann::json j = nlohmann::json::parse(line);
                pairs.emplace_back(calibration_from_json(j.at("gt")),
                                   calibration_from_json(j.at("pred")));
            }
            write_summary_csv(summarize_errors(pairs, sum_bins), std::cout);
            return 0;
        }

        if (study_cmd->parsed()) {
            UniformRng rng(study_seed);
            std::vector<StudyRecord> records = make_synthetic_study(rng, study_count);
            if (study_out.empty()) {
                for (const StudyRecord& record : records) {
                    nlohmann::ordered_json j;
                    j["gt"] = calibration_to_json(record.gt);
                    j["distorted"] = calibration_to_json(record.distorted);
                    j["pct_chose_gt"] = record.pct_chose_gt;
                    j["n_votes"] = record.n_votes;
                    std::cout << j.dump() << '\n';
                }
            } else {
                save_study(records, study_out);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    std::cerr << app.help() << '\n';
    return 2;
}
