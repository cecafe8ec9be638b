// rlvr: batch evaluation, reward scoring, format checking and the toy-policy
// simulator.
//
// Exit codes: 0 success, 1 I/O error, 2 schema or configuration error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "rlvr/error.hpp"
#include "rlvr/eval_harness.hpp"
#include "rlvr/reward.hpp"
#include "rlvr/toy_policy.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitSchema = 2;

int exit_code_for(rlvr::ErrorCode code) {
    return code == rlvr::ErrorCode::IoError ? kExitIo : kExitSchema;
}

void report_schema_errors(const rlvr::LoadResult& loaded, const std::string& path) {
    for (const auto& e : loaded.errors) {
        std::cerr << path << ":" << e.line << ": schema error: " << e.message << "\n";
    }
}

// Writes to `path`, or stdout when path is empty or "-".
void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw rlvr::Error(rlvr::ErrorCode::IoError, "cannot write " + path);
    }
}

struct EvalArgs {
    std::string input;
    std::string task = "both";
    std::string report = "table";
    std::string out;
    std::string run = "run";
    bool penalize_failures = false;
    bool pre_parsed = false;
    std::size_t workers = 1;
    std::size_t rmse_samples = rlvr::kDefaultRmseSamples;
};

int run_eval(const EvalArgs& args) {
    const auto loaded = rlvr::load_records(args.input);
    report_schema_errors(loaded, args.input);

    rlvr::EvalOptions opts;
    opts.penalize_failures = args.penalize_failures;
    opts.pre_parsed = args.pre_parsed;
    opts.workers = args.workers;
    opts.rmse_samples = args.rmse_samples;

    auto report = rlvr::evaluate(loaded.records, *rlvr::task_selection_from_string(args.task), opts);
    report.run = args.run;
    const auto format = *rlvr::report_format_from_string(args.report);
    if (args.out.empty() || args.out == "-") {
        std::cout << rlvr::render_report(report, format);
    } else {
        rlvr::emit_report(report, format, args.out);
    }
    return loaded.errors.empty() ? kExitOk : kExitSchema;
}

struct RewardArgs {
    std::string input;
    std::string config;
    std::string out;
    std::optional<double> tau;
    std::optional<double> k;
    std::optional<double> format_reward;
    std::vector<double> weights;
};

int run_reward(const RewardArgs& args) {
    rlvr::RewardConfig cfg = args.config.empty() ? rlvr::RewardConfig{} : rlvr::load_reward_config(args.config);
    if (args.tau) cfg.tau = *args.tau;
    if (args.k) cfg.k = *args.k;
    if (args.format_reward) cfg.format_reward_value = *args.format_reward;
    if (!args.weights.empty()) cfg.path_weights = {args.weights[0], args.weights[1], args.weights[2]};
    cfg.validate();

    const auto loaded = rlvr::load_records(args.input);
    report_schema_errors(loaded, args.input);

    std::string text;
    for (const auto& rec : loaded.records) {
        const auto breakdown =
            rec.task == rlvr::TaskKind::Affordance
                ? rlvr::spatial_reward(rec.prediction, std::get<rlvr::BBox>(rec.ground_truth), cfg)
                : rlvr::trajectory_reward(rec.prediction, std::get<rlvr::Trajectory>(rec.ground_truth), cfg);
        nlohmann::json line = breakdown;
        line["id"] = rec.id;
        line["task"] = std::string(rlvr::to_string(rec.task));
        text += line.dump() + "\n";
    }
    write_output(args.out, text);
    return loaded.errors.empty() ? kExitOk : kExitSchema;
}

struct ParseArgs {
    std::string input;
    std::string out;
    bool pre_parsed = false;
};

int run_parse(const ParseArgs& args) {
    const auto loaded = rlvr::load_records(args.input);
    report_schema_errors(loaded, args.input);

    std::string text;
    for (const auto& rec : loaded.records) {
        const auto parsed = args.pre_parsed ? rlvr::parse_payload(rec.prediction, rec.task)
                                            : rlvr::parse_response(rec.prediction, rec.task);
        auto violations = nlohmann::json::array();
        for (auto v : parsed.verdict.violations) {
            violations.push_back(std::string(rlvr::to_string(v)));
        }
        nlohmann::json line{{"id", rec.id},
                            {"task", std::string(rlvr::to_string(rec.task))},
                            {"compliant", parsed.verdict.compliant()},
                            {"violations", violations},
                            {"parsed", parsed.answer.has_value()}};
        if (parsed.answer) {
            line["answer"] = nlohmann::json::parse(rlvr::serialize_payload(parsed.answer->value));
        }
        text += line.dump() + "\n";
    }
    write_output(args.out, text);
    return loaded.errors.empty() ? kExitOk : kExitSchema;
}

struct SimulateArgs {
    std::string config;
    std::string out;
};

int run_simulate(const SimulateArgs& args) {
    nlohmann::json doc = nlohmann::json::object();
    if (!args.config.empty()) {
        std::ifstream in(args.config);
        if (!in) {
            throw rlvr::Error(rlvr::ErrorCode::IoError, "cannot open sim config: " + args.config);
        }
        doc = nlohmann::json::parse(in, nullptr, false);
        if (doc.is_discarded()) {
            throw rlvr::Error(rlvr::ErrorCode::SchemaError, "sim config is not valid JSON: " + args.config);
        }
    }
    const auto cfg = rlvr::sim_config_from_json(doc);
    const auto result = rlvr::run_simulation(cfg);

    std::error_code ec;
    std::filesystem::create_directories(args.out, ec);
    if (ec) {
        throw rlvr::Error(rlvr::ErrorCode::IoError, "cannot create output directory " + args.out);
    }
    const std::filesystem::path dir(args.out);
    for (const auto& curve : result.curves) {
        const auto name = std::string(rlvr::to_string(curve.variant)) + "_seed" + std::to_string(curve.seed) + ".csv";
        write_output((dir / name).string(), rlvr::curve_to_csv(curve));
    }
    const auto summary = rlvr::simulation_summary(result);
    write_output((dir / "summary.json").string(), summary.dump(2) + "\n");

    for (const auto& [name, v] : summary["variants"].items()) {
        std::cout << name << ": median final (DFD+HD+RMSE)/3 = " << v["median_final_avg_distance"].get<double>()
                  << " (initial " << v["median_initial_avg_distance"].get<double>() << ")\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Verifiable rewards and evaluation for affordance and trajectory prediction"};
    app.require_subcommand(1);

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Aggregate IoU / DFD / HD / RMSE metrics over a JSONL file");
    eval->add_option("--input", eval_args.input, "JSONL records")->required();
    eval->add_option("--task", eval_args.task, "affordance | trajectory | both")
        ->check(CLI::IsMember({"affordance", "trajectory", "both"}));
    eval->add_option("--report", eval_args.report, "json | csv | table")
        ->check(CLI::IsMember({"json", "csv", "table"}));
    eval->add_option("--out", eval_args.out, "Report path (stdout when omitted)");
    eval->add_option("--run", eval_args.run, "Run/model name used in the report");
    eval->add_flag("--penalize-failures", eval_args.penalize_failures,
                   "Score failed parses as IoU 0 / distance 1000*sqrt(2) instead of excluding them");
    eval->add_flag("--pre-parsed", eval_args.pre_parsed, "Predictions are bare payloads without tags");
    eval->add_option("--workers", eval_args.workers, "Scoring threads")->check(CLI::PositiveNumber);
    eval->add_option("--rmse-samples", eval_args.rmse_samples, "Resampled length for RMSE")
        ->check(CLI::PositiveNumber);

    RewardArgs reward_args;
    auto* reward = app.add_subcommand("reward", "Dump per-record reward breakdowns as JSONL");
    reward->add_option("--input", reward_args.input, "JSONL records")->required();
    reward->add_option("--config", reward_args.config, "Reward config JSON");
    reward->add_option("--out", reward_args.out, "Output path (stdout when omitted)");
    reward->add_option("--tau", reward_args.tau, "Distance-to-score scale");
    reward->add_option("--k", reward_args.k, "Endpoint decay");
    reward->add_option("--format-reward", reward_args.format_reward, "Format reward value");
    reward->add_option("--path-weights", reward_args.weights, "DFD HD RMSE weights")->expected(3);

    ParseArgs parse_args;
    auto* parse = app.add_subcommand("parse", "Report format verdicts as JSONL");
    parse->add_option("--input", parse_args.input, "JSONL records")->required();
    parse->add_option("--out", parse_args.out, "Output path (stdout when omitted)");
    parse->add_flag("--pre-parsed", parse_args.pre_parsed, "Predictions are bare payloads without tags");

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Run the toy-policy reward ablation");
    simulate->add_option("--config", sim_args.config, "Simulation config JSON");
    simulate->add_option("--out", sim_args.out, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*eval) return run_eval(eval_args);
        if (*reward) return run_reward(reward_args);
        if (*parse) return run_parse(parse_args);
        if (*simulate) return run_simulate(sim_args);
    } catch (const rlvr::Error& e) {
        std::cerr << "error [" << rlvr::to_string(e.code()) << "]: " << e.what() << "\n";
        return exit_code_for(e.code());
    }
    return kExitOk;
}
