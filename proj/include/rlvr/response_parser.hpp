#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rlvr/geometry.hpp"

namespace rlvr {

enum class TaskKind { Affordance, Trajectory };

std::string_view to_string(TaskKind kind);
/// Accepts "affordance" / "trajectory"; nullopt otherwise.
std::optional<TaskKind> task_from_string(std::string_view name);

enum class Violation {
    MissingThink,
    MissingAnswer,
    BadTagOrder,
    UnparseableAnswer,
    PointCountOutOfRange,
    CoordOutOfRange,
    DegenerateBox,
};

std::string_view to_string(Violation v);

/// Valid trajectory point count, inclusive on both ends.
inline constexpr std::size_t kMinTrajectoryPoints = 3;
inline constexpr std::size_t kMaxTrajectoryPoints = 10;

struct FormatVerdict {
    std::vector<Violation> violations;

    bool compliant() const { return violations.empty(); }
    bool has(Violation v) const;
};

using Answer = std::variant<BBox, Trajectory>;

struct ParsedAnswer {
    TaskKind kind = TaskKind::Affordance;
    Answer value;
    /// Verbatim contents of the think span; empty when there is none.
    std::string reasoning;

    const BBox* bbox() const { return std::get_if<BBox>(&value); }
    const Trajectory* trajectory() const { return std::get_if<Trajectory>(&value); }
};

/// Verdict plus whatever payload could be recovered. `answer` is set whenever
/// the answer span was located and its payload parsed, even if other
/// violations (point count, range, tag order) make the response non-compliant.
struct ParseResult {
    FormatVerdict verdict;
    std::optional<ParsedAnswer> answer;
};

/// Outcome of parsing a bare payload. `error` is set when the payload is not
/// a well-formed array for the requested kind.
template <typename T>
struct PayloadResult {
    std::optional<T> value;
    std::optional<Violation> error;
    /// Only ever DegenerateBox for boxes; never set for trajectories.
    std::optional<Violation> flag;
};

/// Parses "[x1,y1,x2,y2]" and canonicalizes corner order.
PayloadResult<BBox> parse_bbox(std::string_view payload);
/// Parses "[[x,y],...]" keeping input order. An empty list is unparseable.
PayloadResult<Trajectory> parse_trajectory(std::string_view payload);

/// Full structural and payload check of a tagged response.
ParseResult parse_response(std::string_view response, TaskKind task);

/// Payload-only check for bare answers that carry no think/answer tags.
ParseResult parse_payload(std::string_view payload, TaskKind task);

inline FormatVerdict validate_format(std::string_view response, TaskKind task) {
    return parse_response(response, task).verdict;
}

/// Shortest decimal form that parses back to exactly `value`.
std::string format_number(double value);
std::string serialize_payload(const BBox& box);
std::string serialize_payload(const Trajectory& traj);
std::string serialize_payload(const Answer& answer);
/// Canonical `<think>..</think><answer>..</answer>` wrapping of an answer.
std::string wrap_response(const Answer& answer, std::string_view reasoning = "");

}  // namespace rlvr
