#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "grtree/attach_model.hpp"
#include "grtree/centrality.hpp"
#include "grtree/ctbp.hpp"
#include "grtree/errors.hpp"
#include "grtree/malthusian.hpp"
#include "grtree/rng.hpp"
#include "grtree/treegen.hpp"

namespace py = pybind11;
using namespace grtree;

namespace {

// Rebuilds tree structure from an arrival-ordered parent vector (parent[i] < i
// for i >= 1; parent[0] is ignored). This is the exchange format on the
// python side; model metadata stays optional there.
GrowingTree tree_from_parents(const std::vector<std::uint32_t>& parents) {
  if (parents.size() < 2) throw ConfigError("parent vector needs at least two vertices");
  GrowingTree t;
  std::uint32_t n = static_cast<std::uint32_t>(parents.size());
  t.parent.resize(n);
  t.children.resize(n);
  t.degree.assign(n, 0);
  t.parent[0] = kNoParent;
  for (std::uint32_t v = 1; v < n; ++v) {
    if (parents[v] >= v) throw ConfigError("parent vector must satisfy parent[i] < i");
    t.parent[v] = parents[v];
    t.children[parents[v]].push_back(v);
    t.degree[parents[v]] += 1;
    t.degree[v] += 1;
  }
  return t;
}

std::vector<std::uint32_t> parents_of(const GrowingTree& t) {
  std::vector<std::uint32_t> out(t.size());
  out[0] = 0;
  for (std::uint32_t v = 1; v < t.size(); ++v) out[v] = t.parent[v];
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "growing attachment trees: models, growth-rate solver, centrality, "
            "branching-process limits";

  py::register_exception<ConfigError>(m, "ModelConfigError", PyExc_ValueError);
  py::register_exception<ResourceCapError>(m, "ResourceCapError", PyExc_RuntimeError);

  py::class_<AttachmentFunction>(m, "AttachmentFunction")
      .def_static("uniform", &AttachmentFunction::uniform, py::arg("scale") = 1.0)
      .def_static("affine", &AttachmentFunction::affine, py::arg("beta"), py::arg("scale") = 1.0)
      .def_static("sublinear", &AttachmentFunction::sublinear, py::arg("alpha"),
                  py::arg("scale") = 1.0)
      .def_static("constant", &AttachmentFunction::constant, py::arg("c"), py::arg("scale") = 1.0)
      .def_static(
          "custom_table",
          [](const std::vector<double>& values, const std::string& extension, double scale) {
            TableExtension ext;
            if (extension == "hold-last-value")
              ext = TableExtension::hold_last_value;
            else if (extension == "reject")
              ext = TableExtension::reject;
            else
              throw ConfigError("extension must be 'hold-last-value' or 'reject'");
            return AttachmentFunction::custom_table(values, ext, scale);
          },
          py::arg("values"), py::arg("extension") = "hold-last-value", py::arg("scale") = 1.0)
      .def_static("from_json", &AttachmentFunction::from_json, py::arg("text"))
      .def("to_json", &AttachmentFunction::to_json)
      .def("evaluate", &AttachmentFunction::evaluate, py::arg("i"))
      .def("slug", &AttachmentFunction::slug)
      .def("f_star", &AttachmentFunction::f_star)
      .def("limsup_bound", &AttachmentFunction::limsup_bound)
      .def("__eq__", [](const AttachmentFunction& a, const AttachmentFunction& b) { return a == b; })
      .def("__repr__",
           [](const AttachmentFunction& f) { return "AttachmentFunction(" + f.slug() + ")"; });

  m.def("validate_model",
        [](const AttachmentFunction& f) { return validate(f).to_json(); },
        py::arg("model"), "Metadata consistency report as a JSON string.");

  m.def(
      "rho_hat",
      [](const AttachmentFunction& f, double lam, double tol) {
        RhoHatResult r = rho_hat(f, lam, tol);
        return py::make_tuple(r.value, r.tail_bound, r.terms);
      },
      py::arg("model"), py::arg("lam"), py::arg("tol") = 1e-12,
      "Offspring-mean series at lam: (value, tail_bound, terms).");

  m.def(
      "solve_malthusian",
      [](const AttachmentFunction& f, double tol) {
        MalthusianSolution s = solve_malthusian(f, tol);
        py::dict d;
        d["lambda_star"] = s.lambda_star;
        d["bracket"] = py::make_tuple(s.bracket_lo, s.bracket_hi);
        d["domain_lower"] = s.domain_lower;
        d["truncation_depth"] = s.truncation_depth;
        d["tail_bound"] = s.tail_bound;
        return d;
      },
      py::arg("model"), py::arg("tol") = 1e-9);

  m.def(
      "degree_pmf",
      [](const AttachmentFunction& f, double lambda_star, std::uint32_t k_max) {
        DegreePmf p = degree_pmf(f, lambda_star, k_max);
        return py::make_tuple(p.p, p.residual);
      },
      py::arg("model"), py::arg("lambda_star"), py::arg("k_max") = 64,
      "Limit degree pmf: (probabilities for degrees 1..k_max, residual).");

  m.def(
      "grow",
      [](const AttachmentFunction& f, std::uint32_t n, std::uint64_t seed, std::uint64_t stream) {
        return parents_of(grow(f, n, seed, stream));
      },
      py::arg("model"), py::arg("n"), py::arg("seed"), py::arg("stream") = 0,
      "Grow one tree; returns the arrival-ordered parent vector (entry 0 unused).");

  m.def(
      "psi",
      [](const std::vector<std::uint32_t>& parents) {
        GrowingTree t = tree_from_parents(parents);
        return psi_all(t).psi;
      },
      py::arg("parents"), "Jordan centrality of every vertex.");

  m.def(
      "top_k",
      [](const std::vector<std::uint32_t>& parents, std::uint32_t k) {
        GrowingTree t = tree_from_parents(parents);
        JordanState s = psi_all(t);
        return top_k(s, k);
      },
      py::arg("parents"), py::arg("k"),
      "The k vertices with smallest psi, ordered by (psi, arrival).");

  m.def(
      "simulate_embedding",
      [](const AttachmentFunction& f, std::uint32_t n, std::uint64_t seed, std::uint64_t stream) {
        EmbeddingResult r = simulate_embedding(f, n, seed, stream);
        return py::make_tuple(parents_of(r.tree), r.arrival_time);
      },
      py::arg("model"), py::arg("n"), py::arg("seed"), py::arg("stream") = 0,
      "Continuous-time embedding run: (parents, arrival_times).");

  m.def(
      "sample_y",
      [](const AttachmentFunction& f, double lam, std::uint64_t seed, std::uint64_t stream,
         double tol) {
        Rng rng(seed, stream);
        return sample_y(f, lam, tol, rng);
      },
      py::arg("model"), py::arg("lam"), py::arg("seed"), py::arg("stream") = 0,
      py::arg("tol") = 1e-9, "One draw of the discounted offspring sum.");

  m.def(
      "sample_w",
      [](const AttachmentFunction& f, double lam, std::uint64_t horizon_size, std::uint64_t seed,
         std::uint64_t stream) {
        Rng rng(seed, stream);
        WSample s = sample_w_infinity(f, lam, StopRule::at_size(horizon_size), rng);
        py::dict d;
        d["w"] = s.w;
        d["stop_time"] = s.stop_time;
        d["population"] = s.population;
        d["horizon_warning"] = s.horizon_warning;
        return d;
      },
      py::arg("model"), py::arg("lam"), py::arg("horizon_size"), py::arg("seed"),
      py::arg("stream") = 0, "One normalized-limit draw run to a population horizon.");
}
