#include "kptrack/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kptrack/errors.hpp"
#include "kptrack/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace kptrack {

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_atomic(const std::string& path, const std::string& content) {
    fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open file for writing: " + tmp.string());
        out << content;
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("rename failed for " + target.string() + ": " + ec.message());
}

namespace {

bool trajectory_finite(const PointTrajectory& traj) {
    return std::all_of(traj.points.begin(), traj.points.end(), [](const Point2& p) {
        return std::isfinite(p.u) && std::isfinite(p.v);
    });
}

json trajectory_to_json(const PointTrajectory& traj) {
    json arr = json::array();
    for (const Point2& p : traj.points) arr.push_back({p.u, p.v});
    return arr;
}

PointTrajectory trajectory_from_json(const json& arr, const std::string& context) {
    if (!arr.is_array())
        throw ValidationError("expected array of points in " + context);
    PointTrajectory traj;
    traj.points.reserve(arr.size());
    for (const json& p : arr) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw ValidationError("expected [u, v] point in " + context);
        traj.points.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return traj;
}

} // namespace

void validate_episode(const EpisodeTrajectories& episode) {
    if (episode.ground_truth.empty())
        throw ValidationError("episode '" + episode.episode_id + "': no ground-truth trajectories (K = 0)");
    if (episode.keypoints.empty())
        throw ValidationError("episode '" + episode.episode_id + "': no keypoint trajectories (N = 0)");
    if (episode.object_names.size() != episode.ground_truth.size())
        throw ValidationError("episode '" + episode.episode_id + "': object_names count " +
                              std::to_string(episode.object_names.size()) + " != K = " +
                              std::to_string(episode.ground_truth.size()));
    std::set<std::string> names(episode.object_names.begin(), episode.object_names.end());
    if (names.size() != episode.object_names.size())
        throw ValidationError("episode '" + episode.episode_id + "': duplicate object names");

    const std::size_t T = episode.ground_truth.front().length();
    if (T == 0)
        throw ValidationError("episode '" + episode.episode_id + "': empty trajectory (T = 0)");
    auto check = [&](const PointTrajectory& traj, const std::string& which, std::size_t idx) {
        if (traj.length() != T)
            throw ValidationError("episode '" + episode.episode_id + "': " + which + " " +
                                  std::to_string(idx) + " has length " + std::to_string(traj.length()) +
                                  ", expected T = " + std::to_string(T));
        if (!trajectory_finite(traj))
            throw ValidationError("episode '" + episode.episode_id + "': non-finite coordinate in " +
                                  which + " " + std::to_string(idx));
    };
    for (std::size_t k = 0; k < episode.ground_truth.size(); ++k)
        check(episode.ground_truth[k], "ground-truth trajectory", k);
    for (std::size_t n = 0; n < episode.keypoints.size(); ++n)
        check(episode.keypoints[n], "keypoint trajectory", n);
}

bool episode_in_domain(const EpisodeTrajectories& episode) {
    auto in_domain = [](const PointTrajectory& traj) {
        return std::all_of(traj.points.begin(), traj.points.end(), [](const Point2& p) {
            return p.u >= -1.0 && p.u <= 1.0 && p.v >= -1.0 && p.v <= 1.0;
        });
    };
    return std::all_of(episode.ground_truth.begin(), episode.ground_truth.end(), in_domain) &&
           std::all_of(episode.keypoints.begin(), episode.keypoints.end(), in_domain);
}

EpisodeTrajectories load_episode(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw ValidationError("parse error in " + path + ": " + e.what());
    }
    if (!doc.is_object())
        throw ValidationError("episode file " + path + ": top-level value is not an object");
    for (const char* field : {"episode_id", "T", "object_names", "ground_truth", "keypoints"})
        if (!doc.contains(field))
            throw ValidationError("episode file " + path + ": missing field '" + field + "'");

    EpisodeTrajectories episode;
    episode.episode_id = doc["episode_id"].get<std::string>();
    episode.object_names = doc["object_names"].get<std::vector<std::string>>();
    for (const json& traj : doc["ground_truth"])
        episode.ground_truth.push_back(trajectory_from_json(traj, path + " ground_truth"));
    for (const json& traj : doc["keypoints"])
        episode.keypoints.push_back(trajectory_from_json(traj, path + " keypoints"));

    validate_episode(episode);
    const auto declared_T = doc["T"].get<std::size_t>();
    if (declared_T != episode.num_steps())
        throw ValidationError("episode file " + path + ": declared T = " + std::to_string(declared_T) +
                              " does not match trajectory length " + std::to_string(episode.num_steps()));
    return episode;
}

void save_episode(const EpisodeTrajectories& episode, const std::string& path) {
    validate_episode(episode);
    json doc;
    doc["episode_id"] = episode.episode_id;
    doc["T"] = episode.num_steps();
    doc["object_names"] = episode.object_names;
    json gt = json::array();
    for (const PointTrajectory& traj : episode.ground_truth) gt.push_back(trajectory_to_json(traj));
    doc["ground_truth"] = std::move(gt);
    json kp = json::array();
    for (const PointTrajectory& traj : episode.keypoints) kp.push_back(trajectory_to_json(traj));
    doc["keypoints"] = std::move(kp);
    write_text_atomic(path, doc.dump());
}

RunManifest load_run_manifest(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw ValidationError("parse error in " + path + ": " + e.what());
    }
    RunManifest manifest;
    manifest.run_id = doc.at("run_id").get<std::string>();
    manifest.seed = doc.at("seed").get<long>();
    int last_epoch = -1;
    for (const json& snap : doc.at("snapshots")) {
        RunManifest::Snapshot s;
        s.epoch = snap.at("epoch").get<int>();
        if (s.epoch <= last_epoch)
            throw ValidationError("manifest " + path + ": epochs not strictly increasing");
        last_epoch = s.epoch;
        s.episode_paths = snap.at("episodes").get<std::vector<std::string>>();
        manifest.snapshots.push_back(std::move(s));
    }
    return manifest;
}

void save_run_manifest(const RunManifest& manifest, const std::string& path) {
    json doc;
    doc["run_id"] = manifest.run_id;
    doc["seed"] = manifest.seed;
    json snaps = json::array();
    for (const auto& s : manifest.snapshots)
        snaps.push_back({{"epoch", s.epoch}, {"episodes", s.episode_paths}});
    doc["snapshots"] = std::move(snaps);
    write_text_atomic(path, doc.dump());
}

RunRecord load_run(const std::string& manifest_path) {
    RunManifest manifest = load_run_manifest(manifest_path);
    fs::path base = fs::path(manifest_path).parent_path();

    RunRecord run;
    run.run_id = manifest.run_id;
    run.seed = manifest.seed;
    for (const auto& snap : manifest.snapshots) {
        EpochSnapshot es;
        es.epoch = snap.epoch;
        for (const std::string& rel : snap.episode_paths)
            es.episodes.push_back(load_episode((base / rel).string()));
        run.snapshots.push_back(std::move(es));
    }

    // All snapshots must describe the same scene.
    if (!run.snapshots.empty() && !run.snapshots.front().episodes.empty()) {
        const EpisodeTrajectories& ref = run.snapshots.front().episodes.front();
        for (const auto& snap : run.snapshots)
            for (const auto& ep : snap.episodes) {
                if (ep.num_keypoints() != ref.num_keypoints() ||
                    ep.num_objects() != ref.num_objects() ||
                    ep.object_names != ref.object_names)
                    throw ValidationError("run " + run.run_id +
                                          ": inconsistent N/K/object_names across episodes");
            }
    }
    return run;
}

DatasetSplit split_sequences(const std::vector<std::string>& sequence_ids,
                             double r_train, double r_val, double r_test,
                             long seed) {
    if (sequence_ids.empty())
        throw ValidationError("split_sequences: empty id list");
    if (r_train < 0 || r_val < 0 || r_test < 0)
        throw ValidationError("split_sequences: negative ratio");
    if (std::abs(r_train + r_val + r_test - 1.0) > 1e-9)
        throw ValidationError("split_sequences: ratios must sum to 1");
    std::set<std::string> unique(sequence_ids.begin(), sequence_ids.end());
    if (unique.size() != sequence_ids.size())
        throw ValidationError("split_sequences: duplicate sequence ids");

    std::vector<std::string> ids = sequence_ids;
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    // Fisher-Yates with explicit bounded draws so the permutation depends only
    // on the seed, not on library shuffle internals.
    for (std::size_t i = ids.size() - 1; i > 0; --i) {
        std::uint64_t j = rng() % (i + 1);
        std::swap(ids[i], ids[j]);
    }

    const std::size_t total = ids.size();
    std::size_t n_train = static_cast<std::size_t>(std::llround(r_train * static_cast<double>(total)));
    std::size_t n_val = static_cast<std::size_t>(std::llround(r_val * static_cast<double>(total)));
    n_train = std::min(n_train, total);
    n_val = std::min(n_val, total - n_train);

    DatasetSplit split;
    split.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.validation.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                            ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    split.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), ids.end());
    return split;
}

} // namespace kptrack
