#include "rlvr/eval_harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>
#include <cctype>
#include <thread>

#include <nlohmann/json.hpp>

#include "rlvr/error.hpp"

namespace rlvr {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::optional<double> finite(const json& j) {
    if (!j.is_number()) {
        return std::nullopt;
    }
    const double v = j.get<double>();
    return std::isfinite(v) ? std::optional<double>(v) : std::nullopt;
}

// Returns an error message, or nothing when the record is valid.
std::optional<std::string> decode_record(const json& j, EvalRecord& rec) {
    if (!j.is_object()) {
        return "record must be a JSON object";
    }
    if (!j.contains("id") || !j["id"].is_string()) {
        return "'id' must be a string";
    }
    rec.id = j["id"].get<std::string>();

    if (!j.contains("task") || !j["task"].is_string()) {
        return "'task' must be \"affordance\" or \"trajectory\"";
    }
    const auto task = task_from_string(j["task"].get<std::string>());
    if (!task) {
        return "'task' must be \"affordance\" or \"trajectory\"";
    }
    rec.task = *task;

    if (j.contains("instruction")) {
        if (!j["instruction"].is_string()) {
            return "'instruction' must be a string";
        }
        rec.instruction = j["instruction"].get<std::string>();
    }

    if (!j.contains("prediction")) {
        return "'prediction' is required";
    }
    const auto& pred = j["prediction"];
    if (pred.is_string()) {
        rec.prediction = pred.get<std::string>();
    } else if (pred.is_array()) {
        rec.prediction = pred.dump();
    } else {
        return "'prediction' must be a string";
    }

    if (j.contains("image_size")) {
        const auto& sz = j["image_size"];
        if (!sz.is_array() || sz.size() != 2 || !finite(sz[0]) || !finite(sz[1]) || !(sz[0].get<double>() > 0.0) ||
            !(sz[1].get<double>() > 0.0)) {
            return "'image_size' must be [width, height] with positive values";
        }
        rec.image_size = ImageSize{sz[0].get<double>(), sz[1].get<double>()};
    }

    if (!j.contains("gt") || !j["gt"].is_array()) {
        return "'gt' must be an array";
    }
    const auto& gt = j["gt"];
    if (rec.task == TaskKind::Affordance) {
        if (gt.size() != 4) {
            return "affordance 'gt' must be [x1, y1, x2, y2]";
        }
        double c[4];
        for (std::size_t i = 0; i < 4; ++i) {
            const auto v = finite(gt[i]);
            if (!v) {
                return "affordance 'gt' must hold four finite numbers";
            }
            c[i] = *v;
        }
        BBox box = BBox{c[0], c[1], c[2], c[3]}.canonical();
        if (rec.image_size) {
            box = normalize_box(box, rec.image_size->width, rec.image_size->height);
        }
        rec.ground_truth = box;
    } else {
        if (gt.size() < 2) {
            return "trajectory 'gt' must have at least 2 points";
        }
        Trajectory traj;
        for (const auto& p : gt) {
            if (!p.is_array() || p.size() != 2 || !finite(p[0]) || !finite(p[1])) {
                return "trajectory 'gt' must be [[x, y], ...] with finite numbers";
            }
            traj.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        if (rec.image_size) {
            traj = normalize_coords(traj, rec.image_size->width, rec.image_size->height);
        }
        rec.ground_truth = std::move(traj);
    }
    return std::nullopt;
}

std::vector<RecordScore> score_pool(std::span<const EvalRecord> records, TaskKind kind, const EvalOptions& opts) {
    std::vector<const EvalRecord*> pool;
    for (const auto& r : records) {
        if (r.task == kind) {
            pool.push_back(&r);
        }
    }
    if (pool.empty()) {
        throw Error(ErrorCode::EmptyDataset, std::string("no ") + std::string(to_string(kind)) + " records to evaluate");
    }

    std::vector<RecordScore> scores(pool.size());
    const std::size_t workers = std::clamp<std::size_t>(opts.workers, 1, pool.size());
    if (workers == 1) {
        for (std::size_t i = 0; i < pool.size(); ++i) {
            scores[i] = score_record(*pool[i], opts);
        }
    } else {
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            threads.emplace_back([&, w] {
                for (std::size_t i = w; i < pool.size(); i += workers) {
                    scores[i] = score_record(*pool[i], opts);
                }
            });
        }
    }

    // Fixed reduction order regardless of input order or thread count.
    std::sort(scores.begin(), scores.end(), [](const RecordScore& a, const RecordScore& b) {
        return std::tie(a.id, a.parsed, a.compliant, a.iou, a.dfd, a.hd, a.rmse) <
               std::tie(b.id, b.parsed, b.compliant, b.iou, b.dfd, b.hd, b.rmse);
    });
    return scores;
}

bool aggregated(const RecordScore& s, const EvalOptions& opts) {
    return s.parsed || opts.penalize_failures;
}

json number_or_null(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

double number_from(const json& j) {
    return j.is_number() ? j.get<double>() : kNaN;
}

json scores_to_json(const std::vector<RecordScore>& scores, bool trajectory) {
    json arr = json::array();
    for (const auto& s : scores) {
        json o{{"id", s.id}, {"parsed", s.parsed}, {"compliant", s.compliant}};
        if (trajectory) {
            o["dfd"] = s.dfd;
            o["hd"] = s.hd;
            o["rmse"] = s.rmse;
        } else {
            o["iou"] = s.iou;
        }
        arr.push_back(std::move(o));
    }
    return arr;
}

std::vector<RecordScore> scores_from_json(const json& arr) {
    std::vector<RecordScore> out;
    for (const auto& o : arr) {
        RecordScore s;
        s.id = o.at("id").get<std::string>();
        s.parsed = o.at("parsed").get<bool>();
        s.compliant = o.at("compliant").get<bool>();
        s.iou = o.value("iou", 0.0);
        s.dfd = o.value("dfd", 0.0);
        s.hd = o.value("hd", 0.0);
        s.rmse = o.value("rmse", 0.0);
        out.push_back(std::move(s));
    }
    return out;
}

std::string fixed(double v, int digits = 2) {
    if (!std::isfinite(v)) {
        return "n/a";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string full_precision(double v) {
    if (!std::isfinite(v)) {
        return "";
    }
    return format_number(v);
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

LoadResult parse_records(std::istream& in) {
    LoadResult out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) {
            continue;
        }
        const auto doc = json::parse(line, nullptr, false);
        if (doc.is_discarded()) {
            out.errors.push_back({lineno, "invalid JSON"});
            continue;
        }
        EvalRecord rec;
        rec.line = lineno;
        if (auto err = decode_record(doc, rec)) {
            out.errors.push_back({lineno, *err});
            continue;
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

LoadResult load_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open input file: " + path);
    }
    auto out = parse_records(in);
    if (in.bad()) {
        throw Error(ErrorCode::IoError, "error while reading: " + path);
    }
    if (out.records.empty() && out.errors.empty()) {
        throw Error(ErrorCode::EmptyDataset, "input file holds no records: " + path);
    }
    return out;
}

RecordScore score_record(const EvalRecord& record, const EvalOptions& opts) {
    RecordScore s;
    s.id = record.id;
    const auto parsed = opts.pre_parsed ? parse_payload(record.prediction, record.task)
                                        : parse_response(record.prediction, record.task);
    s.compliant = parsed.verdict.compliant();
    s.parsed = parsed.answer.has_value();

    if (record.task == TaskKind::Affordance) {
        const auto& gt = std::get<BBox>(record.ground_truth);
        s.iou = s.parsed ? iou(*parsed.answer->bbox(), gt) : 0.0;
        return s;
    }
    const auto& gt = std::get<Trajectory>(record.ground_truth);
    if (s.parsed) {
        const auto& pred = *parsed.answer->trajectory();
        s.dfd = discrete_frechet(pred, gt);
        s.hd = hausdorff(pred, gt);
        s.rmse = rmse(pred, gt, opts.rmse_samples);
    } else {
        s.dfd = s.hd = s.rmse = kFailureDistance;
    }
    return s;
}

double AffordanceMetrics::compliance_rate() const {
    return count == 0 ? 0.0 : static_cast<double>(compliant) / static_cast<double>(count);
}

double TrajectoryMetrics::compliance_rate() const {
    return count == 0 ? 0.0 : static_cast<double>(compliant) / static_cast<double>(count);
}

AffordanceMetrics evaluate_affordance(std::span<const EvalRecord> records, const EvalOptions& opts) {
    AffordanceMetrics m;
    m.per_record = score_pool(records, TaskKind::Affordance, opts);
    m.count = m.per_record.size();
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : m.per_record) {
        m.parse_failures += s.parsed ? 0 : 1;
        m.compliant += s.compliant ? 1 : 0;
        if (aggregated(s, opts)) {
            sum += s.iou;
            ++n;
        }
    }
    m.mean_iou_percent = n == 0 ? kNaN : sum / static_cast<double>(n) * 100.0;
    return m;
}

TrajectoryMetrics evaluate_trajectory(std::span<const EvalRecord> records, const EvalOptions& opts) {
    TrajectoryMetrics m;
    m.per_record = score_pool(records, TaskKind::Trajectory, opts);
    m.count = m.per_record.size();
    double dfd = 0.0;
    double hd = 0.0;
    double rm = 0.0;
    std::size_t n = 0;
    for (const auto& s : m.per_record) {
        m.parse_failures += s.parsed ? 0 : 1;
        m.compliant += s.compliant ? 1 : 0;
        if (aggregated(s, opts)) {
            dfd += s.dfd;
            hd += s.hd;
            rm += s.rmse;
            ++n;
        }
    }
    if (n == 0) {
        m.mean_dfd = m.mean_hd = m.mean_rmse = m.avg = kNaN;
        return m;
    }
    const double inv = 1.0 / static_cast<double>(n);
    m.mean_dfd = dfd * inv;
    m.mean_hd = hd * inv;
    m.mean_rmse = rm * inv;
    m.avg = (m.mean_dfd + m.mean_hd + m.mean_rmse) / 3.0;
    return m;
}

MetricsReport evaluate(std::span<const EvalRecord> records, TaskSelection tasks, const EvalOptions& opts) {
    MetricsReport report;
    report.penalize_failures = opts.penalize_failures;
    report.rmse_samples = opts.rmse_samples;
    if (tasks != TaskSelection::Trajectory) {
        report.affordance = evaluate_affordance(records, opts);
        report.record_count += report.affordance->count;
    }
    if (tasks != TaskSelection::Affordance) {
        report.trajectory = evaluate_trajectory(records, opts);
        report.record_count += report.trajectory->count;
    }
    return report;
}

std::optional<ReportFormat> report_format_from_string(std::string_view name) {
    if (name == "json") return ReportFormat::Json;
    if (name == "csv") return ReportFormat::Csv;
    if (name == "table") return ReportFormat::Table;
    return std::nullopt;
}

std::optional<TaskSelection> task_selection_from_string(std::string_view name) {
    if (name == "affordance") return TaskSelection::Affordance;
    if (name == "trajectory") return TaskSelection::Trajectory;
    if (name == "both") return TaskSelection::Both;
    return std::nullopt;
}

void to_json(json& j, const MetricsReport& report) {
    j = json{{"run", report.run},
             {"record_count", report.record_count},
             {"failure_policy", report.penalize_failures ? "penalize" : "exclude"},
             {"iou_aggregate", "mean over samples, percent"},
             {"rmse_resampling", {{"method", "arc-length"}, {"samples", report.rmse_samples}}},
             {"distance_resampling", "none (raw waypoints) for DFD and HD"}};
    if (const auto& a = report.affordance) {
        j["affordance"] = json{{"count", a->count},
                               {"parse_failures", a->parse_failures},
                               {"compliant", a->compliant},
                               {"format_compliance_rate", a->compliance_rate()},
                               {"mean_iou_percent", number_or_null(a->mean_iou_percent)},
                               {"per_record", scores_to_json(a->per_record, false)}};
    }
    if (const auto& t = report.trajectory) {
        j["trajectory"] = json{{"count", t->count},
                               {"parse_failures", t->parse_failures},
                               {"compliant", t->compliant},
                               {"format_compliance_rate", t->compliance_rate()},
                               {"mean_dfd", number_or_null(t->mean_dfd)},
                               {"mean_hd", number_or_null(t->mean_hd)},
                               {"mean_rmse", number_or_null(t->mean_rmse)},
                               {"avg", number_or_null(t->avg)},
                               {"per_record", scores_to_json(t->per_record, true)}};
    }
}

MetricsReport report_from_json(const json& j) {
    try {
        MetricsReport r;
        r.run = j.at("run").get<std::string>();
        r.record_count = j.at("record_count").get<std::size_t>();
        r.penalize_failures = j.at("failure_policy").get<std::string>() == "penalize";
        r.rmse_samples = j.at("rmse_resampling").at("samples").get<std::size_t>();
        if (j.contains("affordance")) {
            const auto& a = j["affordance"];
            AffordanceMetrics m;
            m.count = a.at("count").get<std::size_t>();
            m.parse_failures = a.at("parse_failures").get<std::size_t>();
            m.compliant = a.at("compliant").get<std::size_t>();
            m.mean_iou_percent = number_from(a.at("mean_iou_percent"));
            m.per_record = scores_from_json(a.at("per_record"));
            r.affordance = std::move(m);
        }
        if (j.contains("trajectory")) {
            const auto& t = j["trajectory"];
            TrajectoryMetrics m;
            m.count = t.at("count").get<std::size_t>();
            m.parse_failures = t.at("parse_failures").get<std::size_t>();
            m.compliant = t.at("compliant").get<std::size_t>();
            m.mean_dfd = number_from(t.at("mean_dfd"));
            m.mean_hd = number_from(t.at("mean_hd"));
            m.mean_rmse = number_from(t.at("mean_rmse"));
            m.avg = number_from(t.at("avg"));
            m.per_record = scores_from_json(t.at("per_record"));
            r.trajectory = std::move(m);
        }
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("malformed metrics report: ") + e.what());
    }
}

std::string render_report(const MetricsReport& report, ReportFormat format) {
    const double iou_pct = report.affordance ? report.affordance->mean_iou_percent : kNaN;
    const auto& t = report.trajectory;
    const double dfd = t ? t->mean_dfd : kNaN;
    const double hd = t ? t->mean_hd : kNaN;
    const double rm = t ? t->mean_rmse : kNaN;
    const double avg = t ? t->avg : kNaN;

    switch (format) {
        case ReportFormat::Json: {
            json j = report;
            return j.dump(2) + "\n";
        }
        case ReportFormat::Csv: {
            std::size_t failures = 0;
            failures += report.affordance ? report.affordance->parse_failures : 0;
            failures += t ? t->parse_failures : 0;
            std::string out = "run,records,iou,dfd,hd,rmse,avg,parse_failures,failure_policy\n";
            out += report.run + "," + std::to_string(report.record_count) + "," + full_precision(iou_pct) + "," +
                   full_precision(dfd) + "," + full_precision(hd) + "," + full_precision(rm) + "," +
                   full_precision(avg) + "," + std::to_string(failures) + "," +
                   (report.penalize_failures ? "penalize" : "exclude") + "\n";
            return out;
        }
        case ReportFormat::Table: {
            constexpr std::size_t w = 10;
            std::ostringstream os;
            os << "# IoU: mean over samples (%); DFD/HD/RMSE: mean over parsed predictions, [0,1000) coordinates\n";
            os << "# RMSE alignment: arc-length resampling to " << report.rmse_samples
               << " points; failure policy: " << (report.penalize_failures ? "penalize" : "exclude") << "\n";
            os << "| " << pad("Run", w) << " | " << pad("IoU", w) << " | " << pad("DFD", w) << " | " << pad("HD", w)
               << " | " << pad("RMSE", w) << " | " << pad("Avg", w) << " |\n";
            os << "|" << std::string(w + 2, '-') << "|" << std::string(w + 2, '-') << "|" << std::string(w + 2, '-')
               << "|" << std::string(w + 2, '-') << "|" << std::string(w + 2, '-') << "|" << std::string(w + 2, '-')
               << "|\n";
            os << "| " << pad(report.run, w) << " | " << pad(fixed(iou_pct, 1), w) << " | " << pad(fixed(dfd), w)
               << " | " << pad(fixed(hd), w) << " | " << pad(fixed(rm), w) << " | " << pad(fixed(avg), w) << " |\n";
            if (report.affordance) {
                os << "affordance: " << report.affordance->count << " records, "
                   << report.affordance->parse_failures << " parse failures, format compliance "
                   << fixed(100.0 * report.affordance->compliance_rate(), 1) << "%\n";
            }
            if (t) {
                os << "trajectory: " << t->count << " records, " << t->parse_failures
                   << " parse failures, format compliance " << fixed(100.0 * t->compliance_rate(), 1) << "%\n";
            }
            return os.str();
        }
    }
    return {};
}

void emit_report(const MetricsReport& report, ReportFormat format, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write report: " + path);
    }
    out << render_report(report, format);
    if (!out) {
        throw Error(ErrorCode::IoError, "failed writing report: " + path);
    }
}

}  // namespace rlvr
