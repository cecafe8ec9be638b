#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rlvr/error.hpp"
#include "rlvr/geometry.hpp"
#include "rlvr/group_optimizer.hpp"
#include "rlvr/response_parser.hpp"
#include "rlvr/reward.hpp"

namespace py = pybind11;
using namespace rlvr;

namespace {

// Leaked on purpose: must outlive interpreter teardown.
py::object* g_error_type = nullptr;

// Converts a Python value (str, int, float, bool, None, list, dict) into JSON.
nlohmann::json to_json_value(const py::handle& obj) {
    if (obj.is_none()) {
        return nullptr;
    }
    if (py::isinstance<py::bool_>(obj)) {
        return obj.cast<bool>();
    }
    if (py::isinstance<py::int_>(obj)) {
        return obj.cast<long long>();
    }
    if (py::isinstance<py::float_>(obj)) {
        return obj.cast<double>();
    }
    if (py::isinstance<py::str>(obj)) {
        return obj.cast<std::string>();
    }
    if (py::isinstance<py::dict>(obj)) {
        nlohmann::json out = nlohmann::json::object();
        for (const auto& [k, v] : obj.cast<py::dict>()) {
            out[py::str(k).cast<std::string>()] = to_json_value(v);
        }
        return out;
    }
    if (py::isinstance<py::sequence>(obj)) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& v : obj.cast<py::sequence>()) {
            out.push_back(to_json_value(v));
        }
        return out;
    }
    throw Error(ErrorCode::InvalidArgument, "unsupported value of type " + std::string(py::str(obj.get_type())));
}

TaskKind task_arg(const std::string& name) {
    const auto kind = task_from_string(name);
    if (!kind) {
        throw Error(ErrorCode::InvalidArgument, "unknown task '" + name + "'");
    }
    return *kind;
}

// Ground truths may be payload strings or nested lists.
std::string payload_text(const py::handle& gt) {
    if (py::isinstance<py::str>(gt)) {
        return gt.cast<std::string>();
    }
    return to_json_value(gt).dump();
}

Answer parse_truth(const py::handle& gt, TaskKind task, std::size_t index) {
    const auto text = payload_text(gt);
    if (task == TaskKind::Affordance) {
        auto r = parse_bbox(text);
        if (!r.value) {
            throw Error(ErrorCode::SchemaError, "ground_truths[" + std::to_string(index) + "] is not a box");
        }
        return *r.value;
    }
    auto r = parse_trajectory(text);
    if (!r.value) {
        throw Error(ErrorCode::SchemaError, "ground_truths[" + std::to_string(index) + "] is not a trajectory");
    }
    return *r.value;
}

py::dict breakdown_dict(const RewardBreakdown& b) {
    py::dict components;
    for (const auto& c : b.components) {
        components[py::str(c.name)] = c.score;
    }
    py::list violations;
    for (auto v : b.verdict.violations) {
        violations.append(std::string(to_string(v)));
    }
    py::dict out;
    out["total"] = b.total;
    out["format"] = b.format;
    out["components"] = components;
    out["compliant"] = b.verdict.compliant();
    out["violations"] = violations;
    return out;
}

py::dict answer_dict(const ParseResult& r) {
    py::list violations;
    for (auto v : r.verdict.violations) {
        violations.append(std::string(to_string(v)));
    }
    py::dict out;
    out["compliant"] = r.verdict.compliant();
    out["violations"] = violations;
    if (!r.answer) {
        out["answer"] = py::none();
    } else if (const auto* box = r.answer->bbox()) {
        out["answer"] = std::vector<double>{box->x1, box->y1, box->x2, box->y2};
    } else {
        std::vector<std::vector<double>> pts;
        for (const auto& p : *r.answer->trajectory()) {
            pts.push_back({p.x, p.y});
        }
        out["answer"] = pts;
    }
    return out;
}

Trajectory trajectory_arg(const py::handle& obj) {
    if (py::isinstance<py::sequence>(obj) && !py::isinstance<py::str>(obj) && py::len(obj) == 0) {
        return {};  // let the metric report EMPTY_TRAJECTORY
    }
    auto r = parse_trajectory(payload_text(obj));
    if (!r.value) {
        throw Error(ErrorCode::InvalidArgument, "expected a list of [x, y] points");
    }
    return *r.value;
}

BBox box_arg(const py::handle& obj) {
    auto r = parse_bbox(payload_text(obj));
    if (!r.value) {
        throw Error(ErrorCode::InvalidArgument, "expected [x1, y1, x2, y2]");
    }
    return *r.value;
}

py::list score_batch(const std::vector<std::string>& responses, const py::list& ground_truths,
                     const std::string& task, const py::object& config) {
    if (responses.size() != ground_truths.size()) {
        throw Error(ErrorCode::LengthMismatch, "responses has " + std::to_string(responses.size()) +
                                                   " entries, ground_truths has " +
                                                   std::to_string(ground_truths.size()));
    }
    const TaskKind kind = task_arg(task);
    const RewardConfig cfg =
        config.is_none() ? RewardConfig{} : reward_config_from_json(to_json_value(config));
    cfg.validate();
    std::vector<Answer> truths;
    truths.reserve(responses.size());
    for (std::size_t i = 0; i < responses.size(); ++i) {
        truths.push_back(parse_truth(ground_truths[i], kind, i));
    }

    std::vector<RewardBreakdown> results(responses.size());
    {
        py::gil_scoped_release release;
        for (std::size_t i = 0; i < responses.size(); ++i) {
            results[i] = kind == TaskKind::Affordance
                             ? spatial_reward(responses[i], std::get<BBox>(truths[i]), cfg)
                             : trajectory_reward(responses[i], std::get<Trajectory>(truths[i]), cfg);
        }
    }
    py::list out;
    for (const auto& r : results) {
        out.append(breakdown_dict(r));
    }
    return out;
}

std::vector<std::vector<double>> advantages(const std::vector<std::vector<double>>& groups, double epsilon) {
    std::vector<std::vector<double>> out;
    out.reserve(groups.size());
    for (const auto& g : groups) {
        out.push_back(group_advantages(g, epsilon));
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Verifiable rewards and trajectory metrics for manipulation answers.";
    m.attr("__version__") = RLVR_VERSION;

    g_error_type = new py::object(py::exception<Error>(m, "RlvrError", PyExc_ValueError));
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const Error& e) {
            py::object exc = (*g_error_type)(std::string(to_string(e.code())) + ": " + e.what());
            exc.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(g_error_type->ptr(), exc.ptr());
        }
    });

    m.def("score_batch", &score_batch, py::arg("responses"), py::arg("ground_truths"), py::arg("task"),
          py::arg("config") = py::none(),
          "Score aligned responses against ground truths. Returns one dict per pair.");
    m.def("advantages", &advantages, py::arg("groups"), py::arg("epsilon") = 1e-8,
          "Group-normalized advantages, one list per group.");

    auto parse = m.def_submodule("parse", "Response format checks");
    parse.def(
        "validate_format",
        [](const std::vector<std::string>& responses, const std::string& task) {
            const TaskKind kind = task_arg(task);
            py::list out;
            for (const auto& r : responses) {
                out.append(answer_dict(parse_response(r, kind)));
            }
            return out;
        },
        py::arg("responses"), py::arg("task"));
    parse.def(
        "wrap",
        [](const py::object& answer, const std::string& task, const std::string& reasoning) {
            const TaskKind kind = task_arg(task);
            if (kind == TaskKind::Affordance) {
                return wrap_response(Answer{box_arg(answer)}, reasoning);
            }
            return wrap_response(Answer{trajectory_arg(answer)}, reasoning);
        },
        py::arg("answer"), py::arg("task"), py::arg("reasoning") = "");

    auto metrics = m.def_submodule("metrics", "Geometric metrics on normalized coordinates");
    metrics.def(
        "iou", [](const py::object& a, const py::object& b) { return iou(box_arg(a), box_arg(b)); }, py::arg("a"),
        py::arg("b"));
    auto pair_metric = [&](const char* name, double (*fn)(std::span<const Point2D>, std::span<const Point2D>)) {
        metrics.def(
            name, [fn](const py::object& p, const py::object& q) { return fn(trajectory_arg(p), trajectory_arg(q)); },
            py::arg("p"), py::arg("q"));
    };
    pair_metric("discrete_frechet", &discrete_frechet);
    pair_metric("hausdorff", &hausdorff);
    pair_metric("dtw", &dtw);
    pair_metric("endpoint_distance", &endpoint_distance);
    metrics.def(
        "rmse",
        [](const py::object& p, const py::object& q, std::size_t samples) {
            return rmse(trajectory_arg(p), trajectory_arg(q), samples);
        },
        py::arg("p"), py::arg("q"), py::arg("samples") = kDefaultRmseSamples);
}
