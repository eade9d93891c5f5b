#include <doctest.h>

#include <random>

#include "grb/genspace.hpp"

using namespace grb;

namespace {

SpacePtr identity_space(int n) {
    return std::make_shared<DiscreteSpace>(
        DiscreteSpace::with_diagonal_weights(Eigen::VectorXd::Ones(n), "identity"));
}

ParamSample sample_1d(const std::vector<double>& values, double lo = -100.0, double hi = 100.0) {
    ParamSample sample(ParamBox::interval(lo, hi));
    for (double v : values) {
        Eigen::VectorXd mu(1);
        mu << v;
        sample.append(mu);
    }
    return sample;
}

Eigen::VectorXd random_vec(int n, std::mt19937& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> unif(lo, hi);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = unif(rng);
    return v;
}

}  // namespace

TEST_CASE("neighbor_table on hand-checkable inputs") {
    CHECK(neighbor_table(sample_1d({3.0}), 1).rows == std::vector<std::vector<int>>{{0}});

    // equispaced points; ties broken by smaller index
    const NeighborTable t = neighbor_table(sample_1d({0.0, 1.0, 2.0, 3.0}), 2);
    CHECK(t.rows == std::vector<std::vector<int>>{{0, 1}, {1, 0}, {2, 1}, {3, 2}});

    CHECK_THROWS_AS((void)neighbor_table(sample_1d({0.0, 1.0}), 3), InvalidInputError);
}

TEST_CASE("neighbor_table matches exhaustive sort on a random 2D sample") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    ParamBox box(Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 1.0));
    ParamSample sample(box);
    const int n = 20, L = 5;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd mu(2);
        mu << unif(rng), unif(rng);
        sample.append(mu);
    }
    const NeighborTable t = neighbor_table(sample, L);
    for (int i = 0; i < n; ++i) {
        std::vector<int> order;
        for (int j = 0; j < n; ++j) order.push_back(j);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double da = (sample.point(i) - sample.point(a)).norm();
            const double db = (sample.point(i) - sample.point(b)).norm();
            if (da != db) return da < db;
            return a < b;
        });
        // self is at distance 0, hence first in the exhaustive order too
        for (int k = 0; k < L; ++k) {
            CHECK(t.rows[static_cast<size_t>(i)][static_cast<size_t>(k)] ==
                  order[static_cast<size_t>(k)]);
        }
    }
}

TEST_CASE("g_transform and h_transform scalar identities") {
    std::mt19937 rng(2);
    for (auto kind : {ActivationKind::tanh, ActivationKind::sigmoid, ActivationKind::arctan,
                      ActivationKind::softplus, ActivationKind::exp, ActivationKind::quadratic}) {
        const Activation act(kind);
        std::uniform_real_distribution<double> unif(act.safe_input_lo(), act.safe_input_hi());
        for (int i = 0; i < 50; ++i) {
            const double v = unif(rng), v2 = unif(rng), v3 = unif(rng);
            CHECK(g_transform(act, v, v) == doctest::Approx(act.eval(v)).epsilon(1e-14));
            CHECK(h_transform(act, v, v2, v) == doctest::Approx(g_transform(act, v, v2)));
            CHECK(h_transform(act, v, v, v3) == doctest::Approx(act.eval(v)).epsilon(1e-14));
        }
    }

    CHECK(g_transform(Activation(ActivationKind::exp), 0.0, 1.0) == doctest::Approx(2.0));
    const Activation tanh_act(ActivationKind::tanh);
    const double expected = std::tanh(0.2) + (1.0 - std::tanh(0.2) * std::tanh(0.2)) * (-0.3);
    CHECK(g_transform(tanh_act, 0.2, -0.1) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(h_transform(Activation(ActivationKind::quadratic), 0.5, 0.7, 0.6) ==
          doctest::Approx(0.47));
}

TEST_CASE("normalize_snapshots maps the value range into the safe box") {
    auto space = identity_space(5);

    // [0, 10] onto the tanh box [-0.4, 0.4]
    SnapshotSet set(space);
    Eigen::VectorXd v(5);
    v << 0.0, 2.5, 5.0, 7.5, 10.0;
    set.append(v, "v");
    const Activation tanh_act(ActivationKind::tanh);
    auto [normed, norm] = normalize_snapshots(set, tanh_act);
    CHECK(norm.scale == doctest::Approx(0.08));
    CHECK(norm.shift == doctest::Approx(-0.4));
    CHECK(normed.matrix().minCoeff() == doctest::Approx(-0.4));
    CHECK(normed.matrix().maxCoeff() == doctest::Approx(0.4));

    // already inside the box: identity map
    SnapshotSet inside(space);
    Eigen::VectorXd w(5);
    w << -0.4, -0.2, 0.0, 0.2, 0.4;
    inside.append(w, "w");
    auto [normed2, norm2] = normalize_snapshots(inside, tanh_act);
    CHECK(norm2.scale == doctest::Approx(1.0));
    CHECK(norm2.shift == doctest::Approx(0.0));

    // constant zero snapshots: scale 1, values at the box midpoint
    SnapshotSet constant(space);
    constant.append(Eigen::VectorXd::Zero(5), "0");
    auto [normed3, norm3] = normalize_snapshots(constant, tanh_act);
    CHECK(norm3.scale == doctest::Approx(1.0));
    CHECK(normed3.matrix().maxCoeff() == doctest::Approx(0.0));  // tanh box midpoint

    // random set scanned entrywise
    std::mt19937 rng(3);
    SnapshotSet random_set(space);
    for (int i = 0; i < 4; ++i) random_set.append(random_vec(5, rng, -7.0, 3.0), "r");
    const Activation exp_act(ActivationKind::exp);
    auto [normed4, norm4] = normalize_snapshots(random_set, exp_act);
    CHECK(normed4.matrix().minCoeff() >= exp_act.safe_input_lo() - 1e-12);
    CHECK(normed4.matrix().maxCoeff() <= exp_act.safe_input_hi() + 1e-12);
}

TEST_CASE("generate_g_set reproduces the inputs on self-neighbor entries") {
    auto space = identity_space(12);
    std::mt19937 rng(5);

    // N = 1, L = 1: the G-set is exactly the single input snapshot
    const ParamSample single = sample_1d({2.0});
    for (auto kind : {ActivationKind::tanh, ActivationKind::exp, ActivationKind::quadratic}) {
        const Activation act(kind);
        SnapshotSet set(space);
        set.append(random_vec(12, rng), "u");
        auto [normed, norm] = normalize_snapshots(set, act);
        const SnapshotSet g = generate_g_set(normed, act, neighbor_table(single, 1));
        REQUIRE(g.size() == 1);
        CHECK((g.column(0) - normed.column(0)).cwiseAbs().maxCoeff() <= 1e-12);
    }

    // general N: row entries with l = n reproduce xi_n entrywise
    const ParamSample sample = sample_1d({0.0, 1.0, 2.5});
    const NeighborTable nbrs = neighbor_table(sample, 2);
    const Activation act(ActivationKind::sigmoid);
    SnapshotSet set(space);
    for (int i = 0; i < 3; ++i) set.append(random_vec(12, rng), "u");
    auto [normed, norm] = normalize_snapshots(set, act);
    const SnapshotSet g = generate_g_set(normed, act, nbrs);
    REQUIRE(g.size() == 6);  // N * L
    for (int n = 0; n < 3; ++n) {
        CHECK((g.column(2 * n) - normed.column(n)).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(g.tag(2 * n) == "G(" + std::to_string(n) + "," + std::to_string(n) + ")");
    }
}

TEST_CASE("generate_g_set matches the scalar oracle with exp activation") {
    auto space = identity_space(8);
    std::mt19937 rng(8);
    const ParamSample sample = sample_1d({0.0, 1.0, 2.0});
    const NeighborTable nbrs = neighbor_table(sample, 2);
    const Activation act(ActivationKind::exp);
    SnapshotSet set(space);
    for (int i = 0; i < 3; ++i) set.append(random_vec(8, rng), "u");
    auto [normed, norm] = normalize_snapshots(set, act);
    const SnapshotSet g = generate_g_set(normed, act, nbrs);

    Eigen::Index out = 0;
    for (int n = 0; n < 3; ++n) {
        for (int l : nbrs.rows[static_cast<size_t>(n)]) {
            for (int i = 0; i < 8; ++i) {
                const double xn = normed.column(n)(i);
                const double xl = normed.column(l)(i);
                // ln(e^xn (1 + xl - xn)), clamped away from zero
                double inner = std::exp(xn) * (1.0 + xl - xn);
                inner = std::max(inner, 1e-8 * std::max(1.0, std::abs(inner)));
                CHECK(g.column(out)(i) == doctest::Approx(std::log(inner)).epsilon(1e-12));
            }
            ++out;
        }
    }
}

TEST_CASE("generate_h_set ordering, reduction to G, and scalar oracle") {
    auto space = identity_space(6);
    std::mt19937 rng(21);
    const ParamSample sample = sample_1d({0.0, 3.0});
    const NeighborTable nbrs = neighbor_table(sample, 2);
    const Activation act(ActivationKind::sigmoid);
    SnapshotSet set(space);
    for (int i = 0; i < 2; ++i) set.append(random_vec(6, rng), "u");
    auto [normed, norm] = normalize_snapshots(set, act);
    const SnapshotSet g = generate_g_set(normed, act, nbrs);
    const SnapshotSet h = generate_h_set(normed, act, nbrs);
    REQUIRE(h.size() == 8);  // N * L^2

    // (n, l, l') lexicographic in neighbor rank; l' = n reduces to G(n, l)
    Eigen::Index idx = 0;
    for (int n = 0; n < 2; ++n) {
        for (int lr = 0; lr < 2; ++lr) {
            for (int lpr = 0; lpr < 2; ++lpr, ++idx) {
                const int l = nbrs.rows[static_cast<size_t>(n)][static_cast<size_t>(lr)];
                const int lp = nbrs.rows[static_cast<size_t>(n)][static_cast<size_t>(lpr)];
                CHECK(h.tag(idx) == "H(" + std::to_string(n) + "," + std::to_string(l) + "," +
                                        std::to_string(lp) + ")");
                if (lp == n) {
                    // matches the corresponding G entry
                    const Eigen::Index g_idx = 2 * n + lr;
                    CHECK((h.column(idx) - g.column(g_idx)).cwiseAbs().maxCoeff() <= 1e-12);
                }
                if (l == n && lp == n) {
                    CHECK((h.column(idx) - normed.column(n)).cwiseAbs().maxCoeff() <= 1e-12);
                }
                // entrywise scalar oracle
                for (int i = 0; i < 6; ++i) {
                    const double v1 = normed.column(n)(i);
                    const double v2 = normed.column(l)(i);
                    const double v3 = normed.column(lp)(i);
                    const double s = 1.0 / (1.0 + std::exp(-v1));
                    double value = s + s * (1.0 - s) * (v2 - v1) +
                                   0.5 * s * (1.0 - s) * (1.0 - 2.0 * s) * (v2 - v1) * (v3 - v1);
                    value = std::min(std::max(value, 1e-8), 1.0 - 1e-8);
                    CHECK(h.column(idx)(i) ==
                          doctest::Approx(std::log(value / (1.0 - value))).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("build_generative_spaces spans and metric ordering") {
    auto space = identity_space(40);
    std::mt19937 rng(33);

    // N = 1: Phi and Psi both span exactly the single snapshot
    {
        SnapshotSet set(space);
        const Eigen::VectorXd u = random_vec(40, rng);
        set.append(u, "u");
        const GenerativeSpaces spaces = build_generative_spaces(
            *space, set, sample_1d({1.0}), Activation(ActivationKind::tanh), 1, 1, 1);
        CHECK(spaces.phi.size() == 1);
        CHECK(spaces.psi.size() == 1);
        CHECK(project(*space, spaces.phi, set.field(0)).residual_norm <= 1e-10);
        CHECK(project(*space, spaces.psi, set.field(0)).residual_norm <= 1e-10);
    }

    // L = N, untruncated: span(Psi) >= span(Phi) >= span(S) by projection
    {
        const int n = 4, dim = 40;
        const ParamSample sample = sample_1d({0.0, 1.0, 2.0, 4.0});
        SnapshotSet set(space);
        for (int i = 0; i < n; ++i) set.append(random_vec(dim, rng), "u");
        for (auto kind : {ActivationKind::sigmoid, ActivationKind::exp}) {
            const GenerativeSpaces spaces = build_generative_spaces(
                *space, set, sample, Activation(kind), n, n * n + n, n * n * n + n);
            for (int i = 0; i < n; ++i) {
                CHECK(project(*space, spaces.phi, set.field(i)).residual_norm <= 1e-8);
                CHECK(project(*space, spaces.psi, set.field(i)).residual_norm <= 1e-8);
            }
            // every Phi mode lies in span(Psi)
            for (Eigen::Index m = 0; m < spaces.phi.size(); ++m) {
                CHECK(project(*space, spaces.psi, Field(spaces.phi.modes.col(m), space))
                          .residual_norm <= 1e-7);
            }
        }
    }
}

TEST_CASE("generative spaces are deterministic") {
    auto space = identity_space(25);
    std::mt19937 rng(44);
    const ParamSample sample = sample_1d({0.0, 2.0, 5.0});
    SnapshotSet set(space);
    for (int i = 0; i < 3; ++i) set.append(random_vec(25, rng), "u");
    const Activation act(ActivationKind::softplus);
    const GenerativeSpaces a = build_generative_spaces(*space, set, sample, act, 2, 5, 8);
    const GenerativeSpaces b = build_generative_spaces(*space, set, sample, act, 2, 5, 8);
    CHECK((a.phi.modes - b.phi.modes).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.psi.modes - b.psi.modes).cwiseAbs().maxCoeff() == 0.0);

    // sign convention: the largest-magnitude entry of each mode is positive
    for (Eigen::Index m = 0; m < a.phi.size(); ++m) {
        Eigen::Index imax;
        a.phi.modes.col(m).cwiseAbs().maxCoeff(&imax);
        CHECK(a.phi.modes(imax, m) > 0.0);
    }
}

TEST_CASE("all generated entries are finite even for wild inputs") {
    auto space = identity_space(30);
    std::mt19937 rng(55);
    const ParamSample sample = sample_1d({0.0, 1.0, 10.0, 50.0});
    SnapshotSet set(space);
    for (int i = 0; i < 4; ++i) set.append(random_vec(30, rng, -1e4, 1e4), "u");
    for (auto kind : {ActivationKind::tanh, ActivationKind::sigmoid, ActivationKind::arctan,
                      ActivationKind::softplus, ActivationKind::exp, ActivationKind::quadratic}) {
        const Activation act(kind);
        auto [normed, norm] = normalize_snapshots(set, act);
        const NeighborTable nbrs = neighbor_table(sample, 3);
        CHECK(generate_g_set(normed, act, nbrs).matrix().allFinite());
        CHECK(generate_h_set(normed, act, nbrs).matrix().allFinite());
    }
}
