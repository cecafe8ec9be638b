#pragma once

#include <cmath>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rlvr/geometry.hpp"
#include "rlvr/response_parser.hpp"

namespace rlvr {

struct ImageSize {
    double width = 0.0;
    double height = 0.0;
};

/// One JSONL line:
///   {"id":str, "task":"affordance"|"trajectory", "instruction":str,
///    "prediction":str, "gt":[x1,y1,x2,y2] | [[x,y],...], "image_size":[w,h]?}
/// When image_size is present the ground truth is given in pixels and is
/// normalized to [0, 1000) on load; predictions are always normalized.
struct EvalRecord {
    std::string id;
    TaskKind task = TaskKind::Affordance;
    std::string instruction;
    std::string prediction;
    Answer ground_truth;
    std::optional<ImageSize> image_size;
    std::size_t line = 0;
};

struct SchemaIssue {
    std::size_t line = 0;
    std::string message;
};

struct LoadResult {
    std::vector<EvalRecord> records;
    std::vector<SchemaIssue> errors;
};

/// Validates each non-blank line independently; bad lines land in `errors`
/// with their 1-based line number.
LoadResult parse_records(std::istream& in);
/// Throws IoError when unreadable and EmptyDataset when the file holds no
/// lines at all.
LoadResult load_records(const std::string& path);

struct EvalOptions {
    /// Predictions are bare payloads without think/answer tags.
    bool pre_parsed = false;
    /// Score unparseable predictions as IoU 0 / distance 1000 * sqrt(2)
    /// instead of excluding them.
    bool penalize_failures = false;
    std::size_t workers = 1;
    std::size_t rmse_samples = kDefaultRmseSamples;
};

/// Distance assigned to failed parses under penalize_failures.
inline const double kFailureDistance = kCoordRange * std::sqrt(2.0);

struct RecordScore {
    std::string id;
    bool parsed = false;
    bool compliant = false;
    double iou = 0.0;
    double dfd = 0.0;
    double hd = 0.0;
    double rmse = 0.0;
};

struct AffordanceMetrics {
    std::size_t count = 0;
    std::size_t parse_failures = 0;
    std::size_t compliant = 0;
    /// Mean IoU x 100 over the aggregated records; NaN when none qualify.
    double mean_iou_percent = 0.0;
    std::vector<RecordScore> per_record;

    double compliance_rate() const;
};

struct TrajectoryMetrics {
    std::size_t count = 0;
    std::size_t parse_failures = 0;
    std::size_t compliant = 0;
    double mean_dfd = 0.0;
    double mean_hd = 0.0;
    double mean_rmse = 0.0;
    /// (mean_dfd + mean_hd + mean_rmse) / 3.
    double avg = 0.0;
    std::vector<RecordScore> per_record;

    double compliance_rate() const;
};

enum class TaskSelection { Affordance, Trajectory, Both };

struct MetricsReport {
    std::string run = "run";
    std::size_t record_count = 0;
    std::optional<AffordanceMetrics> affordance;
    std::optional<TrajectoryMetrics> trajectory;
    bool penalize_failures = false;
    std::size_t rmse_samples = kDefaultRmseSamples;
};

/// Scores one record. Pure; safe to call from any thread.
RecordScore score_record(const EvalRecord& record, const EvalOptions& opts);

/// Throw EmptyDataset when no record of the matching kind is present.
AffordanceMetrics evaluate_affordance(std::span<const EvalRecord> records, const EvalOptions& opts);
TrajectoryMetrics evaluate_trajectory(std::span<const EvalRecord> records, const EvalOptions& opts);

MetricsReport evaluate(std::span<const EvalRecord> records, TaskSelection tasks, const EvalOptions& opts);

enum class ReportFormat { Json, Csv, Table };

std::optional<ReportFormat> report_format_from_string(std::string_view name);
std::optional<TaskSelection> task_selection_from_string(std::string_view name);

void to_json(nlohmann::json& j, const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);

std::string render_report(const MetricsReport& report, ReportFormat format);
/// Writes render_report() to `path`; throws IoError when unwritable.
void emit_report(const MetricsReport& report, ReportFormat format, const std::string& path);

}  // namespace rlvr
