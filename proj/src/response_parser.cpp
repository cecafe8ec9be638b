#include "rlvr/response_parser.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <nlohmann/json.hpp>

namespace rlvr {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

std::vector<std::size_t> find_all(std::string_view text, std::string_view tag) {
    std::vector<std::size_t> hits;
    for (auto pos = text.find(tag); pos != std::string_view::npos; pos = text.find(tag, pos + tag.size())) {
        hits.push_back(pos);
    }
    return hits;
}

void add(FormatVerdict& verdict, Violation v) {
    if (!verdict.has(v)) {
        verdict.violations.push_back(v);
    }
}

bool in_range(double v) {
    return v >= 0.0 && v < kCoordRange;
}

std::optional<double> finite_number(const nlohmann::json& node) {
    if (!node.is_number()) {
        return std::nullopt;
    }
    const double v = node.get<double>();
    if (!std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

// Range and point-count checks on a parsed payload.
void check_payload(const Answer& answer, FormatVerdict& verdict, std::optional<Violation> flag) {
    if (flag) {
        add(verdict, *flag);
    }
    if (const auto* box = std::get_if<BBox>(&answer)) {
        if (!(in_range(box->x1) && in_range(box->y1) && in_range(box->x2) && in_range(box->y2))) {
            add(verdict, Violation::CoordOutOfRange);
        }
        return;
    }
    const auto& traj = std::get<Trajectory>(answer);
    if (traj.size() < kMinTrajectoryPoints || traj.size() > kMaxTrajectoryPoints) {
        add(verdict, Violation::PointCountOutOfRange);
    }
    const bool all_in_range =
        std::all_of(traj.begin(), traj.end(), [](const Point2D& p) { return in_range(p.x) && in_range(p.y); });
    if (!all_in_range) {
        add(verdict, Violation::CoordOutOfRange);
    }
}

// Parses the payload for the task and records violations; returns the answer
// when the payload itself was well formed.
std::optional<Answer> parse_and_check(std::string_view payload, TaskKind task, FormatVerdict& verdict) {
    std::optional<Answer> value;
    std::optional<Violation> error;
    std::optional<Violation> flag;
    if (task == TaskKind::Affordance) {
        auto r = parse_bbox(payload);
        error = r.error;
        flag = r.flag;
        if (r.value) {
            value = *r.value;
        }
    } else {
        auto r = parse_trajectory(payload);
        error = r.error;
        if (r.value) {
            value = std::move(*r.value);
        }
    }
    if (error || !value) {
        add(verdict, Violation::UnparseableAnswer);
        return std::nullopt;
    }
    check_payload(*value, verdict, flag);
    return value;
}

}  // namespace

std::string_view to_string(TaskKind kind) {
    return kind == TaskKind::Affordance ? "affordance" : "trajectory";
}

std::optional<TaskKind> task_from_string(std::string_view name) {
    if (name == "affordance") return TaskKind::Affordance;
    if (name == "trajectory") return TaskKind::Trajectory;
    return std::nullopt;
}

std::string_view to_string(Violation v) {
    switch (v) {
        case Violation::MissingThink: return "MISSING_THINK";
        case Violation::MissingAnswer: return "MISSING_ANSWER";
        case Violation::BadTagOrder: return "BAD_TAG_ORDER";
        case Violation::UnparseableAnswer: return "UNPARSEABLE_ANSWER";
        case Violation::PointCountOutOfRange: return "POINT_COUNT_OUT_OF_RANGE";
        case Violation::CoordOutOfRange: return "COORD_OUT_OF_RANGE";
        case Violation::DegenerateBox: return "DEGENERATE_BOX";
    }
    return "UNKNOWN";
}

bool FormatVerdict::has(Violation v) const {
    return std::find(violations.begin(), violations.end(), v) != violations.end();
}

PayloadResult<BBox> parse_bbox(std::string_view payload) {
    PayloadResult<BBox> out;
    const auto doc = nlohmann::json::parse(payload.begin(), payload.end(), nullptr, false);
    if (doc.is_discarded() || !doc.is_array() || doc.size() != 4) {
        out.error = Violation::UnparseableAnswer;
        return out;
    }
    double c[4];
    for (std::size_t i = 0; i < 4; ++i) {
        const auto v = finite_number(doc[i]);
        if (!v) {
            out.error = Violation::UnparseableAnswer;
            return out;
        }
        c[i] = *v;
    }
    const BBox box = BBox{c[0], c[1], c[2], c[3]}.canonical();
    if (box.degenerate()) {
        out.flag = Violation::DegenerateBox;
    }
    out.value = box;
    return out;
}

PayloadResult<Trajectory> parse_trajectory(std::string_view payload) {
    PayloadResult<Trajectory> out;
    const auto doc = nlohmann::json::parse(payload.begin(), payload.end(), nullptr, false);
    if (doc.is_discarded() || !doc.is_array() || doc.empty()) {
        out.error = Violation::UnparseableAnswer;
        return out;
    }
    Trajectory traj;
    traj.reserve(doc.size());
    for (const auto& pair : doc) {
        if (!pair.is_array() || pair.size() != 2) {
            out.error = Violation::UnparseableAnswer;
            return out;
        }
        const auto x = finite_number(pair[0]);
        const auto y = finite_number(pair[1]);
        if (!x || !y) {
            out.error = Violation::UnparseableAnswer;
            return out;
        }
        traj.push_back({*x, *y});
    }
    out.value = std::move(traj);
    return out;
}

ParseResult parse_response(std::string_view response, TaskKind task) {
    ParseResult result;
    auto& verdict = result.verdict;

    const auto think_open = find_all(response, kThinkOpen);
    const auto think_close = find_all(response, kThinkClose);
    const auto answer_open = find_all(response, kAnswerOpen);
    const auto answer_close = find_all(response, kAnswerClose);

    const bool think_absent = think_open.empty() && think_close.empty();
    const bool answer_absent = answer_open.empty() && answer_close.empty();
    if (think_absent) {
        add(verdict, Violation::MissingThink);
    }
    if (answer_absent) {
        add(verdict, Violation::MissingAnswer);
    }

    const bool think_single = think_open.size() == 1 && think_close.size() == 1 && think_open[0] < think_close[0];
    const bool answer_single =
        answer_open.size() == 1 && answer_close.size() == 1 && answer_open[0] < answer_close[0];
    if ((!think_absent && !think_single) || (!answer_absent && !answer_single)) {
        add(verdict, Violation::BadTagOrder);
    }
    if (think_single && answer_single && !(think_close[0] < answer_open[0])) {
        add(verdict, Violation::BadTagOrder);
    }

    std::string reasoning;
    if (think_single) {
        const auto begin = think_open[0] + kThinkOpen.size();
        reasoning = std::string(response.substr(begin, think_close[0] - begin));
    }

    if (answer_single) {
        const auto begin = answer_open[0] + kAnswerOpen.size();
        const auto payload = response.substr(begin, answer_close[0] - begin);
        if (auto value = parse_and_check(payload, task, verdict)) {
            result.answer = ParsedAnswer{task, std::move(*value), std::move(reasoning)};
        }
    }
    return result;
}

ParseResult parse_payload(std::string_view payload, TaskKind task) {
    ParseResult result;
    if (auto value = parse_and_check(payload, task, result.verdict)) {
        result.answer = ParsedAnswer{task, std::move(*value), {}};
    }
    return result;
}

std::string format_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string serialize_payload(const BBox& box) {
    return "[" + format_number(box.x1) + "," + format_number(box.y1) + "," + format_number(box.x2) + "," +
           format_number(box.y2) + "]";
}

std::string serialize_payload(const Trajectory& traj) {
    std::string out = "[";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (i > 0) {
            out += ",";
        }
        out += "[" + format_number(traj[i].x) + "," + format_number(traj[i].y) + "]";
    }
    out += "]";
    return out;
}

std::string serialize_payload(const Answer& answer) {
    return std::visit([](const auto& v) { return serialize_payload(v); }, answer);
}

std::string wrap_response(const Answer& answer, std::string_view reasoning) {
    std::string out;
    out += kThinkOpen;
    out += reasoning;
    out += kThinkClose;
    out += kAnswerOpen;
    out += serialize_payload(answer);
    out += kAnswerClose;
    return out;
}

}  // namespace rlvr
