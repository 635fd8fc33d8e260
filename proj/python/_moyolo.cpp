// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "moyolo/box.hpp"
#include "moyolo/config.hpp"
#include "moyolo/hungarian.hpp"
#include "moyolo/lifecycle.hpp"
#include "moyolo/metrics.hpp"
#include "moyolo/mot_io.hpp"
#include "moyolo/synthetic.hpp"

namespace py = pybind11;
using namespace moyolo;

namespace {

CostMatrix to_matrix(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size(), m = n ? rows[0].size() : 0;
  CostMatrix c(n, m);
  for (std::size_t r = 0; r < n; ++r) {
    if (rows[r].size() != m) throw py::value_error("cost matrix rows differ in length");
    for (std::size_t k = 0; k < m; ++k) c(r, k) = rows[r][k];
  }
  return c;
}

std::vector<QueryEntry> to_entries(const std::vector<std::optional<std::int64_t>>& identities,
                                   const std::vector<int>& misses) {
  std::vector<QueryEntry> q(identities.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (identities[i]) {
      q[i].kind = QueryKind::Track;
      q[i].identity = identities[i];
    }
    if (i < misses.size()) q[i].miss_count = misses[i];
  }
  return q;
}

py::dict report_dict(const metrics::MetricReport& r) {
  py::dict d;
  d["name"] = r.name;
  d["HOTA"] = r.HOTA();
  d["DetA"] = r.DetA();
  d["AssA"] = r.AssA();
  d["IDF1"] = r.IDF1();
  d["MOTA"] = r.MOTA();
  d["TP"] = r.clear.tp;
  d["FP"] = r.clear.fp;
  d["FN"] = r.clear.fn;
  d["IDSW"] = r.clear.idsw;
  return d;
}

}  // namespace

PYBIND11_MODULE(_moyolo, m) {
  m.doc() = "moyolo core: boxes, matching, track lifecycle, MOTChallenge I/O and metrics";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);

  py::class_<BoundingBox>(m, "BoundingBox")
      .def(py::init<double, double, double, double>(), py::arg("cx"), py::arg("cy"), py::arg("w"), py::arg("h"))
      .def_static("from_corners", &BoundingBox::from_corners)
      .def_property_readonly("cx", &BoundingBox::cx)
      .def_property_readonly("cy", &BoundingBox::cy)
      .def_property_readonly("w", &BoundingBox::w)
      .def_property_readonly("h", &BoundingBox::h)
      .def_property_readonly("area", &BoundingBox::area)
      .def("corners", &BoundingBox::corners)
      .def("__repr__", [](const BoundingBox& b) {
        return "BoundingBox(" + std::to_string(b.cx()) + ", " + std::to_string(b.cy()) + ", " + std::to_string(b.w()) +
               ", " + std::to_string(b.h()) + ")";
      });

  m.def("iou", &iou);
  m.def("giou", &giou);
  m.def(
      "giou_with_gradient",
      [](const std::array<double, 4>& a, const std::array<double, 4>& b) {
        const auto g = giou_with_gradient(a, b);
        return py::make_tuple(g.value, g.grad);
      },
      "GIoU of two cxcywh quadruples and its gradient w.r.t. all eight inputs");

  m.def(
      "hungarian",
      [](const std::vector<std::vector<double>>& cost) {
        const auto c = to_matrix(cost);
        const auto r = hungarian(c);
        return py::make_tuple(r.pairs, r.total_cost(c));
      },
      py::arg("cost"), "Minimum-cost assignment; returns ([(row, col), ...], total cost)");

  py::class_<Thresholds>(m, "Thresholds")
      .def(py::init<>())
      .def_readwrite("new_track", &Thresholds::new_track)
      .def_readwrite("keep", &Thresholds::keep)
      .def_readwrite("emit", &Thresholds::emit)
      .def_readwrite("miss_tolerance", &Thresholds::miss_tolerance);

  py::class_<IdentityAllocator>(m, "IdentityAllocator").def(py::init<>()).def("peek", &IdentityAllocator::peek);

  m.def(
      "plan_propagation",
      [](const std::vector<std::optional<std::int64_t>>& identities, const std::vector<double>& scores,
         const Thresholds& th, IdentityAllocator& ids, const std::vector<int>& misses) {
        if (scores.size() != identities.size()) throw py::value_error("scores and identities differ in length");
        const auto plan = plan_propagation(to_entries(identities, misses), scores, th, ids);
        std::vector<std::int64_t> next_ids;
        std::vector<int> next_misses;
        for (const auto& e : plan.next) {
          next_ids.push_back(*e.identity);
          next_misses.push_back(e.miss_count);
        }
        py::dict d;
        d["source"] = plan.source;
        d["identities"] = next_ids;
        d["misses"] = next_misses;
        d["removed"] = plan.removed;
        return d;
      },
      py::arg("identities"), py::arg("scores"), py::arg("thresholds"), py::arg("allocator"),
      py::arg("misses") = std::vector<int>{},
      "One propagation step. `identities` holds None for detect queries.");

  py::class_<PixelBox>(m, "PixelBox")
      .def(py::init<double, double, double, double>(), py::arg("left"), py::arg("top"), py::arg("width"),
           py::arg("height"))
      .def_readwrite("left", &PixelBox::left)
      .def_readwrite("top", &PixelBox::top)
      .def_readwrite("width", &PixelBox::width)
      .def_readwrite("height", &PixelBox::height)
      .def(py::self == py::self);

  py::class_<TrackBox>(m, "TrackBox")
      .def(py::init<>())
      .def(py::init([](std::int64_t id, PixelBox box, double score, double visibility) {
             return TrackBox{id, box, score, visibility};
           }),
           py::arg("id"), py::arg("box"), py::arg("score") = 1.0, py::arg("visibility") = 1.0)
      .def_readwrite("id", &TrackBox::id)
      .def_readwrite("box", &TrackBox::box)
      .def_readwrite("score", &TrackBox::score)
      .def_readwrite("visibility", &TrackBox::visibility);

  py::class_<Tracks>(m, "Tracks")
      .def(py::init<>())
      .def(py::init([](std::vector<std::vector<TrackBox>> frames) { return Tracks{std::move(frames)}; }))
      .def_readwrite("frames", &Tracks::frames)
      .def("frame_count", &Tracks::frame_count)
      .def("box_count", &Tracks::box_count)
      .def(py::self == py::self);

  m.def("parse_gt_text", [](const std::string& text) { return parse_gt_text(text); });
  m.def("parse_results_text", [](const std::string& text) { return parse_results_text(text); });
  m.def("format_results", &format_results);

  m.def(
      "evaluate",
      [](const Tracks& gt, const Tracks& pred, double width, double height, const std::string& name) {
        return report_dict(metrics::evaluate({name, gt, pred, {width, height}}));
      },
      py::arg("gt"), py::arg("pred"), py::arg("width"), py::arg("height"), py::arg("name") = "SEQ",
      "HOTA, DetA, AssA, IDF1 and MOTA of one sequence (None when undefined)");

  m.def(
      "write_synthetic_dataset",
      [](const std::filesystem::path& root, std::uint64_t seed, int train, int eval, int width, int height,
         int frames) {
        DatasetOptions o;
        o.seed = seed;
        o.train_sequences = train;
        o.eval_sequences = eval;
        o.scene.width = width;
        o.scene.height = height;
        o.scene.frame_count = frames;
        o.scene.min_width = std::max(2, width / 16);
        o.scene.max_width = std::max(o.scene.min_width, width / 6);
        o.scene.min_height = std::max(2, height / 8);
        o.scene.max_height = std::max(o.scene.min_height, height / 3);
        write_synthetic_dataset(root, o);
      },
      py::arg("root"), py::arg("seed") = 7, py::arg("train") = 12, py::arg("eval") = 8, py::arg("width") = 640,
      py::arg("height") = 640, py::arg("frames") = 60);

  m.def("load_gt", [](const std::filesystem::path& sequence_dir) { return load_sequence(sequence_dir).gt; });

  m.def("format_config", [](const std::string& text) { return format_config(parse_config_text(text)); },
        "Resolved configuration (defaults filled in) of an INI text");
  m.def("config_keys", &config_keys);
}
