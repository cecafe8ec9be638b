// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.
//
//   rlvr_acceptance [--cli PATH_TO_RLVR] [--workdir DIR]
//
// Without --cli the two CLI-level criteria (self-evaluation, simulate
// determinism) run against the library entry points the CLI wraps.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlvr/eval_harness.hpp"
#include "rlvr/geometry.hpp"
#include "rlvr/group_optimizer.hpp"
#include "rlvr/response_parser.hpp"
#include "rlvr/reward.hpp"
#include "rlvr/toy_policy.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace rlvr;

namespace {

constexpr double kTol = 1e-9;

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_command(const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    return rc == -1 ? -1 : WEXITSTATUS(rc);
}

// ---------------------------------------------------------------------------

Outcome metric_oracles() {
    Outcome o;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1001);
    constexpr int kPairs = 600;
    double worst = 0.0;
    for (int i = 0; i < kPairs; ++i) {
        const auto p = oracle::random_trajectory(rng, 1, 6);
        const auto q = oracle::random_trajectory(rng, 1, 6);
        const double e1 = std::abs(discrete_frechet(p, q) - oracle::frechet_exhaustive(p, q));
        const double e2 = std::abs(dtw(p, q) - oracle::dtw_exhaustive(p, q));
        const double e3 = std::abs(hausdorff(p, q) - oracle::hausdorff_brute(p, q));
        worst = std::max({worst, e1, e2, e3});
        o.check(e1 <= kTol, "discrete_frechet differs from exhaustive oracle");
        o.check(e2 <= kTol, "dtw differs from exhaustive oracle");
        o.check(e3 <= kTol, "hausdorff differs from brute force");
    }
    const double elapsed = seconds_since(t0);
    o.check(elapsed < 60.0, "runtime exceeded 60 s");
    if (o.pass) {
        o.detail = std::to_string(kPairs) + " pairs, max |err| " + fmt(worst) + ", " + fmt(elapsed, 3) + " s";
    }
    return o;
}

Outcome geometry_invariants() {
    Outcome o;
    std::mt19937_64 rng(1002);
    std::uniform_real_distribution<double> shift(-400.0, 400.0);
    using Metric = std::function<double(const Trajectory&, const Trajectory&)>;
    const std::vector<std::pair<std::string, Metric>> metrics = {
        {"discrete_frechet", [](const Trajectory& a, const Trajectory& b) { return discrete_frechet(a, b); }},
        {"hausdorff", [](const Trajectory& a, const Trajectory& b) { return hausdorff(a, b); }},
        {"dtw", [](const Trajectory& a, const Trajectory& b) { return dtw(a, b); }},
        {"rmse", [](const Trajectory& a, const Trajectory& b) { return rmse(a, b); }},
    };
    constexpr int kPairs = 1200;
    int failures = 0;
    for (int i = 0; i < kPairs; ++i) {
        const auto p = oracle::random_trajectory(rng, 1, 12);
        const auto q = oracle::random_trajectory(rng, 1, 12);
        const double dx = shift(rng);
        const double dy = shift(rng);
        const auto pt = oracle::translated(p, dx, dy);
        const auto qt = oracle::translated(q, dx, dy);
        for (const auto& [name, m] : metrics) {
            const double d = m(p, q);
            const bool ok = d >= 0.0 && m(p, p) == 0.0 && m(q, q) == 0.0 && std::abs(m(q, p) - d) <= kTol &&
                            std::abs(m(pt, qt) - d) <= kTol;
            if (!ok) {
                ++failures;
                o.check(false, name + " violated an invariant");
            }
        }
        if (hausdorff(p, q) > discrete_frechet(p, q) + kTol) {
            ++failures;
            o.check(false, "hausdorff exceeded discrete_frechet");
        }
    }
    if (o.pass) {
        o.detail = std::to_string(kPairs) + " pairs, " + std::to_string(failures) + " failures";
    }
    return o;
}

Outcome iou_properties() {
    Outcome o;
    std::mt19937_64 rng(1003);
    for (int i = 0; i < 2000; ++i) {
        const auto a = oracle::random_box(rng);
        const auto b = oracle::random_box(rng);
        const double v = iou(a, b);
        o.check(v >= 0.0 && v <= 1.0, "iou out of [0,1]");
        o.check(v == iou(b, a), "iou not symmetric");
        if (!a.degenerate()) {
            o.check(iou(a, a) == 1.0, "identity did not give 1");
        }
        const BBox far{a.x2 + 1.0, a.y2 + 1.0, a.x2 + 50.0, a.y2 + 50.0};
        o.check(iou(a, far) == 0.0, "disjoint boxes did not give 0");
    }
    const double hand = iou(BBox{0, 0, 10, 10}, BBox{5, 5, 15, 15});
    o.check(std::abs(hand - 0.142857) < 5e-7, "25/175 case");
    if (o.pass) {
        o.detail = "2000 random pairs; 25/175 case = " + fmt(hand, 6);
    }
    return o;
}

Outcome reward_composition() {
    Outcome o;
    std::mt19937_64 rng(1004);
    const RewardConfig cfg;
    const double traj_max = cfg.format_reward_value + cfg.path_weights.sum() + 1.0;
    const double box_max = cfg.format_reward_value + 1.0;
    constexpr int kTruths = 250;
    for (int i = 0; i < kTruths; ++i) {
        const auto gt = oracle::random_trajectory(rng, kMinTrajectoryPoints, kMaxTrajectoryPoints);
        const auto best = trajectory_reward(wrap_response(gt), gt, cfg);
        o.check(std::abs(best.total - traj_max) <= kTol, "canonical trajectory gt below maximum");
        for (int k = 0; k < 5; ++k) {
            const auto other = trajectory_reward(wrap_response(oracle::random_trajectory(rng, 1, 12)), gt, cfg);
            o.check(other.total <= best.total + kTol, "random response beat canonical gt");
            o.check(std::abs(other.total - other.recomputed_total()) <= kTol, "trajectory decomposition");
        }

        BBox box = oracle::random_box(rng);
        if (box.degenerate()) {
            box.x2 = std::min(box.x1 + 1.0, 999.0);
            box.y2 = std::min(box.y1 + 1.0, 999.0);
        }
        const auto best_box = spatial_reward(wrap_response(box), box, cfg);
        o.check(std::abs(best_box.total - box_max) <= kTol, "canonical box gt below maximum");
        for (int k = 0; k < 5; ++k) {
            const auto other = spatial_reward(wrap_response(oracle::random_box(rng)), box, cfg);
            o.check(other.total <= best_box.total + kTol, "random box beat canonical gt");
            o.check(std::abs(other.total - other.recomputed_total()) <= kTol, "spatial decomposition");
        }

        // Format gate: tagless, too few and too many points.
        o.check(trajectory_reward(serialize_payload(gt), gt, cfg).total == 0.0, "tagless trajectory scored");
        o.check(spatial_reward(serialize_payload(box), box, cfg).total == 0.0, "tagless box scored");
        const Trajectory two(gt.begin(), gt.begin() + 2);
        o.check(trajectory_reward(wrap_response(two), gt, cfg).total == 0.0, "2-point response scored");
        Trajectory eleven = gt;
        while (eleven.size() < 11) {
            eleven.push_back(gt.back());
        }
        o.check(trajectory_reward(wrap_response(eleven), gt, cfg).total == 0.0, "11-point response scored");
    }
    if (o.pass) {
        o.detail = std::to_string(kTruths) + " ground truths per task; max totals " + fmt(traj_max) + " / " +
                   fmt(box_max);
    }
    return o;
}

Outcome advantage_suite() {
    Outcome o;
    const auto a = group_advantages(std::vector<double>{1, 2, 3});
    o.check(std::abs(a[0] + 1.224745) < 5e-7 && std::abs(a[1]) < 5e-7 && std::abs(a[2] - 1.224745) < 5e-7,
            "[1,2,3] case");
    const auto z = group_advantages(std::vector<double>{4, 4, 4, 4, 4});
    o.check(std::all_of(z.begin(), z.end(), [](double v) { return v == 0.0; }), "zero-variance group");

    std::mt19937_64 rng(1005);
    std::uniform_int_distribution<std::size_t> size(2, 16);
    std::uniform_real_distribution<double> value(-5.0, 5.0);
    std::uniform_real_distribution<double> scale(0.05, 20.0);
    constexpr int kGroups = 1500;
    for (int g = 0; g < kGroups; ++g) {
        std::vector<double> r(size(rng));
        for (auto& x : r) {
            x = value(rng);
        }
        const double c = value(rng);
        const double lambda = scale(rng);
        auto shifted = r;
        auto scaled = r;
        for (std::size_t i = 0; i < r.size(); ++i) {
            shifted[i] += c;
            scaled[i] *= lambda;
        }
        const auto base = group_advantages(r);
        const auto as = group_advantages(shifted);
        const auto al = group_advantages(scaled);
        for (std::size_t i = 0; i < r.size(); ++i) {
            o.check(std::abs(base[i] - as[i]) <= 1e-6, "shift invariance");
            o.check(std::abs(base[i] - al[i]) <= 1e-6, "scale invariance");
            for (std::size_t j = 0; j < r.size(); ++j) {
                if (r[i] > r[j]) {
                    o.check(base[i] > base[j], "ordering preservation");
                }
            }
        }
    }
    if (o.pass) {
        o.detail = "[1,2,3] -> [" + fmt(a[0], 7) + ", " + fmt(a[1], 7) + ", " + fmt(a[2], 7) + "]; " +
                   std::to_string(kGroups) + " random groups";
    }
    return o;
}

Outcome kl_checks() {
    Outcome o;
    std::mt19937_64 rng(1006);
    std::uniform_real_distribution<double> lp(-50.0, 5.0);
    for (int i = 0; i < 10000; ++i) {
        const std::vector<double> a{lp(rng)};
        const std::vector<double> b{lp(rng)};
        o.check(kl_penalty(a, b)[0] >= 0.0, "negative kl_penalty");
    }

    std::uniform_real_distribution<double> coord(200.0, 800.0);
    std::uniform_real_distribution<double> offset(-20.0, 20.0);
    std::uniform_real_distribution<double> sigma(25.0, 35.0);
    constexpr std::size_t kSamples = 100000;
    double worst_z = 0.0;
    for (int pair = 0; pair < 10; ++pair) {
        Trajectory mean(5);
        Trajectory ref_mean(5);
        for (std::size_t i = 0; i < mean.size(); ++i) {
            mean[i] = {coord(rng), coord(rng)};
            ref_mean[i] = {mean[i].x + offset(rng), mean[i].y + offset(rng)};
        }
        const auto policy = make_policy(mean, sigma(rng));
        const auto ref = make_policy(ref_mean, sigma(rng));
        Rng sampler(5000 + pair);
        const auto samples = sample_group(policy, kSamples, sampler);
        std::vector<double> lp_pol(kSamples);
        std::vector<double> lp_ref(kSamples);
        for (std::size_t s = 0; s < kSamples; ++s) {
            lp_pol[s] = samples[s].log_prob;
            lp_ref[s] = ref.log_prob(samples[s].traj);
        }
        const auto est = kl_penalty(lp_pol, lp_ref);
        double mean_est = 0.0;
        for (double v : est) {
            mean_est += v;
        }
        mean_est /= static_cast<double>(kSamples);
        double var = 0.0;
        for (double v : est) {
            var += (v - mean_est) * (v - mean_est);
        }
        var /= static_cast<double>(kSamples - 1);
        const double se = std::sqrt(var / static_cast<double>(kSamples));
        const double exact = gaussian_kl(policy, ref);
        const double z = std::abs(mean_est - exact) / se;
        worst_z = std::max(worst_z, z);
        o.check(z <= 3.0, "Monte-Carlo KL outside 3 standard errors (pair " + std::to_string(pair) + ")");
    }
    if (o.pass) {
        o.detail = "10 policy pairs at 1e5 samples, worst |z| = " + fmt(worst_z, 3);
    }
    return o;
}

Outcome self_evaluation(const std::string& cli, const fs::path& work) {
    Outcome o;
    std::mt19937_64 rng(1007);
    const auto input = work / "self_eval.jsonl";
    {
        std::ofstream out(input);
        for (int i = 0; i < 50; ++i) {
            BBox box = oracle::random_box(rng);
            box.x2 = std::max(box.x2, box.x1 + 1.0);
            box.y2 = std::max(box.y2, box.y1 + 1.0);
            const auto traj = oracle::random_trajectory(rng, kMinTrajectoryPoints, kMaxTrajectoryPoints);
            out << nlohmann::json{{"id", "box" + std::to_string(i)},
                                  {"task", "affordance"},
                                  {"instruction", "locate"},
                                  {"prediction", wrap_response(box, "self")},
                                  {"gt", nlohmann::json::parse(serialize_payload(box))}}
                       .dump()
                << "\n";
            out << nlohmann::json{{"id", "traj" + std::to_string(i)},
                                  {"task", "trajectory"},
                                  {"instruction", "move"},
                                  {"prediction", wrap_response(traj, "self")},
                                  {"gt", nlohmann::json::parse(serialize_payload(traj))}}
                       .dump()
                << "\n";
        }
    }

    MetricsReport report;
    if (!cli.empty()) {
        const auto out = work / "self_eval_report.json";
        const int rc = run_command("\"" + cli + "\" eval --input \"" + input.string() +
                                   "\" --task both --report json --out \"" + out.string() + "\" --workers 4");
        o.check(rc == 0, "rlvr eval exited with " + std::to_string(rc));
        if (!o.pass) {
            return o;
        }
        report = report_from_json(nlohmann::json::parse(read_file(out)));
    } else {
        const auto loaded = load_records(input.string());
        report = evaluate(loaded.records, TaskSelection::Both, {});
    }
    const auto& a = *report.affordance;
    const auto& t = *report.trajectory;
    o.check(a.mean_iou_percent == 100.0, "IoU " + fmt(a.mean_iou_percent) + " != 100.0");
    o.check(t.mean_dfd == 0.0 && t.mean_hd == 0.0 && t.mean_rmse == 0.0 && t.avg == 0.0,
            "trajectory distances not exactly 0");
    if (o.pass) {
        o.detail = std::string(cli.empty() ? "library" : "CLI") + ": IoU " + fmt(a.mean_iou_percent) + ", DFD " +
                   fmt(t.mean_dfd) + ", HD " + fmt(t.mean_hd) + ", RMSE " + fmt(t.mean_rmse) + ", Avg " + fmt(t.avg);
    }
    return o;
}

Outcome reward_ablation_ordering() {
    Outcome o;
    const auto t0 = Clock::now();
    SimConfig cfg = default_sim_config();
    cfg.steps = 300;
    cfg.variants = {RewardVariant::Full, RewardVariant::DtwEnd};
    cfg.seeds = {1, 2, 3, 4, 5};
    const auto result = run_simulation(cfg);
    const auto summary = simulation_summary(result);
    const double full_final = summary["variants"]["FULL"]["median_final_avg_distance"].get<double>();
    const double full_initial = summary["variants"]["FULL"]["median_initial_avg_distance"].get<double>();
    const double dtw_final = summary["variants"]["DTW_END"]["median_final_avg_distance"].get<double>();
    const double elapsed = seconds_since(t0);
    o.check(full_final <= dtw_final, "FULL median " + fmt(full_final) + " > DTW_END median " + fmt(dtw_final));
    o.check(full_final <= 0.5 * full_initial, "FULL improved by less than 50%");
    o.check(elapsed < 300.0, "runtime exceeded 5 min");
    if (o.pass) {
        o.detail = "median final (DFD+HD+RMSE)/3: FULL " + fmt(full_final, 5) + " vs DTW_END " + fmt(dtw_final, 5) +
                   "; FULL initial " + fmt(full_initial, 5) + " (" +
                   fmt(100.0 * (1.0 - full_final / full_initial), 3) + "% better), " + fmt(elapsed, 3) + " s";
    }
    return o;
}

Outcome simulate_determinism(const std::string& cli, const fs::path& work) {
    Outcome o;
    const auto cfg_path = work / "sim_config.json";
    std::ofstream(cfg_path) << R"({"steps": 120, "seeds": [3, 11], "beta": 0.04})";

    std::vector<std::pair<std::string, std::string>> runs;
    for (const char* name : {"sim_a", "sim_b"}) {
        const auto dir = work / name;
        fs::remove_all(dir);
        if (!cli.empty()) {
            const int rc = run_command("\"" + cli + "\" simulate --config \"" + cfg_path.string() + "\" --out \"" +
                                       dir.string() + "\" > /dev/null");
            o.check(rc == 0, "rlvr simulate exited with " + std::to_string(rc));
        } else {
            fs::create_directories(dir);
            const auto res = run_simulation(sim_config_from_json(nlohmann::json::parse(read_file(cfg_path))));
            for (const auto& c : res.curves) {
                std::ofstream(dir / (std::string(to_string(c.variant)) + "_seed" + std::to_string(c.seed) + ".csv"),
                              std::ios::binary)
                    << curve_to_csv(c);
            }
        }
    }
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(work / "sim_a")) {
        if (entry.path().extension() != ".csv") {
            continue;
        }
        const auto other = work / "sim_b" / entry.path().filename();
        o.check(fs::exists(other), "missing " + other.string());
        o.check(read_file(entry.path()) == read_file(other), "CSV differs: " + entry.path().filename().string());
        ++compared;
    }
    o.check(compared == 8, "expected 8 CSV files, found " + std::to_string(compared));
    if (o.pass) {
        o.detail = std::to_string(compared) + " CSV files byte-identical across two runs";
    }
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli;
    fs::path work = fs::temp_directory_path() / "rlvr_acceptance";
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--cli" && i + 1 < argc) {
            cli = argv[++i];
        } else if (arg == "--workdir" && i + 1 < argc) {
            work = argv[++i];
        } else {
            std::cerr << "usage: rlvr_acceptance [--cli PATH] [--workdir DIR]\n";
            return 2;
        }
    }
    fs::create_directories(work);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"metric-oracle suite", metric_oracles},
        {"geometry invariants", geometry_invariants},
        {"IoU properties", iou_properties},
        {"reward composition", reward_composition},
        {"advantage suite", advantage_suite},
        {"KL checks", kl_checks},
        {"self-evaluation identity", [&] { return self_evaluation(cli, work); }},
        {"reward-ablation ordering", reward_ablation_ordering},
        {"simulate determinism", [&] { return simulate_determinism(cli, work); }},
    };

    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome out;
        try {
            out = run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        failed += out.pass ? 0 : 1;
        std::cout << (out.pass ? "PASS" : "FAIL") << "  " << name << "  -- " << out.detail << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " acceptance criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
