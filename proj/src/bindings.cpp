#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "grb/fom.hpp"
#include "grb/greedy.hpp"
#include "grb/rom.hpp"
#include "grb/study.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Generative reduced basis toolkit (C++ core)";

    // Translators run newest-first: register the base before the derived
    // classes so the specific mappings win.
    py::register_exception<grb::Error>(m, "GrbError", PyExc_RuntimeError);
    py::register_exception<grb::OutOfRangeError>(m, "OutOfRangeError", PyExc_ValueError);
    py::register_exception<grb::ArtifactError>(m, "ArtifactError", PyExc_IOError);

    py::class_<grb::Activation>(m, "Activation")
        .def(py::init([](const std::string& name) { return grb::Activation::from_name(name); }),
             py::arg("name"))
        .def_property_readonly("name", &grb::Activation::name)
        .def_property_readonly("range", [](const grb::Activation& a) {
            return std::pair{a.range_lo(), a.range_hi()};
        })
        .def_property_readonly("safe_box", [](const grb::Activation& a) {
            return std::pair{a.safe_input_lo(), a.safe_input_hi()};
        })
        .def("eval", &grb::Activation::eval, py::arg("x"))
        .def("deriv1", &grb::Activation::deriv1, py::arg("x"))
        .def("deriv2", &grb::Activation::deriv2, py::arg("x"))
        .def("inverse", &grb::Activation::inverse, py::arg("y"))
        .def("clamp_to_range", &grb::Activation::clamp_to_range, py::arg("y"));

    m.def("g_transform", &grb::g_transform, py::arg("act"), py::arg("v1"), py::arg("v2"));
    m.def("h_transform", &grb::h_transform, py::arg("act"), py::arg("v1"), py::arg("v2"),
          py::arg("v3"));

    py::class_<grb::DiscreteSpace, std::shared_ptr<grb::DiscreteSpace>>(m, "DiscreteSpace")
        .def_property_readonly("dim", &grb::DiscreteSpace::dim)
        .def_property_readonly("label", &grb::DiscreteSpace::label)
        .def("inner", [](const grb::DiscreteSpace& s, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& v) { return s.inner(u, v); })
        .def("norm", &grb::DiscreteSpace::norm);

    m.def("make_diagonal_space", [](const Eigen::VectorXd& weights, const std::string& label) {
        return std::make_shared<grb::DiscreteSpace>(
            grb::DiscreteSpace::with_diagonal_weights(weights, label));
    }, py::arg("weights"), py::arg("label") = "diagonal");

    auto as_mutable = [](const grb::SpacePtr& s) {
        return std::const_pointer_cast<grb::DiscreteSpace>(s);
    };

    py::class_<grb::SnapshotSet>(m, "SnapshotSet")
        .def(py::init([](std::shared_ptr<grb::DiscreteSpace> space,
                         const Eigen::MatrixXd& columns) {
            grb::SnapshotSet set(std::move(space));
            set.reserve(columns.cols());
            for (Eigen::Index k = 0; k < columns.cols(); ++k) {
                set.append(columns.col(k), "snapshot " + std::to_string(k));
            }
            return set;
        }), py::arg("space"), py::arg("columns"))
        .def_property_readonly("size", &grb::SnapshotSet::size)
        .def("matrix", [](const grb::SnapshotSet& s) { return Eigen::MatrixXd(s.matrix()); })
        .def("tag", &grb::SnapshotSet::tag, py::arg("k"));

    py::class_<grb::Basis>(m, "Basis")
        .def_property_readonly("modes", [](const grb::Basis& b) { return b.modes; })
        .def_property_readonly("eigenvalues", [](const grb::Basis& b) { return b.eigenvalues; })
        .def_property_readonly("size", &grb::Basis::size);

    m.def("pod", [](const std::shared_ptr<grb::DiscreteSpace>& space,
                    const grb::SnapshotSet& snaps, int m_max) {
        return grb::pod(*space, snaps, m_max);
    }, py::arg("space"), py::arg("snapshots"), py::arg("max_modes"));
    m.def("error_metric", [](const std::shared_ptr<grb::DiscreteSpace>& space,
                             const grb::Basis& basis,
                             const grb::SnapshotSet& manifold, const std::string& mode) {
        return grb::error_metric(*space, basis, manifold,
                                 mode == "relative" ? grb::ErrorMode::relative
                                                    : grb::ErrorMode::absolute);
    }, py::arg("space"), py::arg("basis"), py::arg("manifold"), py::arg("mode") = "absolute");

    py::class_<grb::ParamBox>(m, "ParamBox")
        .def(py::init<Eigen::VectorXd, Eigen::VectorXd>(), py::arg("lo"), py::arg("hi"))
        .def_property_readonly("lo", [](const grb::ParamBox& b) { return b.lo; })
        .def_property_readonly("hi", [](const grb::ParamBox& b) { return b.hi; })
        .def("contains", [](const grb::ParamBox& b, const Eigen::VectorXd& mu) {
            return b.contains(mu);
        });

    py::class_<grb::ParamSample>(m, "ParamSample")
        .def(py::init([](const grb::ParamBox& box, const std::vector<Eigen::VectorXd>& pts) {
            return grb::ParamSample(box, pts);
        }), py::arg("box"), py::arg("points"))
        .def_property_readonly("size", &grb::ParamSample::size)
        .def("point", &grb::ParamSample::point, py::arg("n"));

    m.def("chebyshev_extended", &grb::chebyshev_extended, py::arg("n"), py::arg("lo"),
          py::arg("hi"));
    m.def("neighbor_table", [](const grb::ParamSample& s, int L) {
        return grb::neighbor_table(s, L).rows;
    }, py::arg("sample"), py::arg("L"));
    m.def("make_training_grid", &grb::make_training_grid, py::arg("box"), py::arg("dims"));

    py::class_<grb::GenerativeSpaces>(m, "GenerativeSpaces")
        .def_readonly("phi", &grb::GenerativeSpaces::phi)
        .def_readonly("psi", &grb::GenerativeSpaces::psi);
    m.def("build_generative_spaces",
          [](const std::shared_ptr<grb::DiscreteSpace>& space, const grb::SnapshotSet& snaps,
             const grb::ParamSample& sample, const grb::Activation& act, int L, int M1, int M2) {
              return grb::build_generative_spaces(*space, snaps, sample, act, L, M1, M2);
          },
          py::arg("space"), py::arg("snapshots"), py::arg("sample"), py::arg("activation"),
          py::arg("L"), py::arg("M1"), py::arg("M2"));

    py::class_<grb::Field>(m, "Field")
        .def_property_readonly("coeffs", [](const grb::Field& f) { return f.coeffs; });

    py::class_<grb::AnalyticGrid>(m, "AnalyticGrid")
        .def_property_readonly("coords", [](const grb::AnalyticGrid& g) { return g.coords; })
        .def_property_readonly("space", [as_mutable](const grb::AnalyticGrid& g) {
            return as_mutable(g.space);
        })
        .def_property_readonly("box", [](const grb::AnalyticGrid& g) { return g.box; });
    m.def("make_grid_1d", &grb::make_grid_1d, py::arg("n") = 2001);
    m.def("make_grid_2d", &grb::make_grid_2d, py::arg("n") = 201);
    m.def("make_grid_3d", &grb::make_grid_3d, py::arg("n") = 41);
    m.def("analytic_manifold_1d", &grb::analytic_manifold_1d, py::arg("mu"), py::arg("grid"));
    m.def("analytic_manifold_2d", &grb::analytic_manifold_2d, py::arg("mu"), py::arg("grid"));
    m.def("analytic_manifold_3d", &grb::analytic_manifold_3d, py::arg("mu"), py::arg("grid"));

    py::class_<grb::FullOrderModel>(m, "FullOrderModel")
        .def_property_readonly("dim", &grb::FullOrderModel::dim)
        .def_property_readonly("raw_dim", &grb::FullOrderModel::raw_dim)
        .def_property_readonly("label", &grb::FullOrderModel::label)
        .def_property_readonly("box", &grb::FullOrderModel::box)
        .def_property_readonly("space", [as_mutable](const grb::FullOrderModel& f) {
            return as_mutable(f.space_ptr());
        })
        .def("solve", &grb::FullOrderModel::solve, py::arg("mu"))
        .def("output", &grb::FullOrderModel::output, py::arg("u"));
    m.def("build_convdiff_fom", &grb::build_convdiff_fom, py::arg("nx") = 32, py::arg("ny") = 32,
          py::arg("degree") = 3);
    m.def("build_reacdiff_fom", &grb::build_reacdiff_fom, py::arg("resolution") = 3,
          py::arg("degree") = 3);

    py::class_<grb::OnlineResult>(m, "OnlineResult")
        .def_readonly("level", &grb::OnlineResult::level)
        .def_readonly("coeffs", &grb::OnlineResult::coeffs)
        .def_readonly("s", &grb::OnlineResult::s)
        .def_readonly("seconds", &grb::OnlineResult::seconds);

    py::class_<grb::ErrorEstimates>(m, "ErrorEstimates")
        .def_readonly("output_est", &grb::ErrorEstimates::output_est)
        .def_readonly("solution_est", &grb::ErrorEstimates::solution_est)
        .def_readonly("output_rel", &grb::ErrorEstimates::output_rel)
        .def_readonly("solution_rel", &grb::ErrorEstimates::solution_rel)
        .def_readonly("level1", &grb::ErrorEstimates::level1)
        .def_readonly("level2", &grb::ErrorEstimates::level2);

    py::class_<grb::ReducedModel>(m, "ReducedModel")
        .def_property_readonly("m1", &grb::ReducedModel::m1)
        .def_property_readonly("m2", &grb::ReducedModel::m2)
        .def_property_readonly("box", &grb::ReducedModel::box)
        .def_property_readonly("activation",
                               [](const grb::ReducedModel& rm) { return rm.meta().activation; })
        .def_property_readonly("n", [](const grb::ReducedModel& rm) { return rm.meta().n; })
        .def("online_solve", &grb::ReducedModel::online_solve, py::arg("mu"), py::arg("level") = 1)
        .def("estimate_errors", &grb::ReducedModel::estimate_errors, py::arg("mu"))
        .def("reconstruct", &grb::ReducedModel::reconstruct, py::arg("result"));

    m.def("offline_build",
          [](const grb::FullOrderModel& fom, const grb::ParamSample& sample,
             const grb::Activation& act, int L, int M1, int M2, bool store_bases) {
              grb::OfflineOptions opts;
              opts.store_bases = store_bases;
              return grb::offline_build(fom, sample, act, L, M1, M2, opts);
          },
          py::arg("fom"), py::arg("sample"), py::arg("activation"), py::arg("L"), py::arg("M1"),
          py::arg("M2"), py::arg("store_bases") = true);
    m.def("save_rom", &grb::save_rom, py::arg("model"), py::arg("path"));
    m.def("load_rom", &grb::load_rom, py::arg("path"));

    m.def("greedy_sample",
          [](const grb::FullOrderModel& fom, const grb::ParamSample& initial,
             const std::vector<Eigen::VectorXd>& training, double eps_tol, double m1_slope,
             double m2_slope, int l_max, int max_iterations, const std::string& activation) {
              grb::GreedyConfig cfg;
              cfg.initial = initial;
              cfg.training = training;
              cfg.eps_tol = eps_tol;
              cfg.m1 = grb::Schedule{m1_slope, 0.0};
              cfg.m2 = grb::Schedule{m2_slope, 0.0};
              cfg.L_max = l_max;
              cfg.max_iterations = max_iterations;
              cfg.activation = grb::Activation::from_name(activation);
              grb::GreedyResult result = grb::greedy_sample(fom, cfg);
              std::vector<double> estimates;
              for (const auto& row : result.trace.rows) estimates.push_back(row.max_estimate);
              return py::make_tuple(result.sample.points(), std::move(result.model), estimates,
                                    result.trace.converged);
          },
          py::arg("fom"), py::arg("initial"), py::arg("training"), py::arg("eps_tol") = 1e-5,
          py::arg("m1_slope") = 3.0, py::arg("m2_slope") = 4.0, py::arg("l_max") = 4,
          py::arg("max_iterations") = 100, py::arg("activation") = "exp");
}
