#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "lhs/encoder.hpp"
#include "lhs/linalg.hpp"
#include "lhs/metric.hpp"
#include "lhs/rng.hpp"

using namespace lhs;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng, double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.a) v = scale * rng.normal();
    return m;
}

MetricModel random_model(int d, int d0, Rng& rng, double scale = 1.0) {
    MetricModel m;
    m.proj_dim = d;
    m.input_dim = d0;
    m.L = random_matrix(d, d0, rng, scale);
    m.V = random_matrix(d, d0, rng, scale);
    return m;
}

std::vector<double> random_vec(int n, Rng& rng, double scale = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = scale * rng.normal();
    return v;
}

}  // namespace

TEST_CASE("joint_distance identities") {
    Rng rng(1);
    MetricModel m = random_model(3, 6, rng);
    std::vector<double> x = random_vec(6, rng);

    // identical arguments: the Euclidean part vanishes, leaving -||Vx||^2
    double vx_sq = 0.0;
    for (int r = 0; r < 3; ++r) {
        double s = 0.0;
        for (int c = 0; c < 6; ++c) s += m.V(r, c) * x[c];
        vx_sq += s * s;
    }
    CHECK(joint_distance(m, x, x) == Catch::Approx(-vx_sq).epsilon(1e-12));

    // V = 0: plain squared Euclidean distance in L-space, never negative
    MetricModel l_only = m;
    for (double& v : l_only.V.a) v = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        auto a = random_vec(6, rng), b = random_vec(6, rng);
        CHECK(joint_distance(l_only, a, b) >= 0.0);
    }
    CHECK(joint_distance(l_only, x, x) == 0.0);

    // exact symmetry in the arguments
    for (int trial = 0; trial < 20; ++trial) {
        auto a = random_vec(6, rng), b = random_vec(6, rng);
        CHECK(joint_distance(m, a, b) == joint_distance(m, b, a));
    }

    std::vector<double> short_vec(5);
    CHECK_THROWS_AS(joint_distance(m, short_vec, x), InvalidArgument);
}

TEST_CASE("hinge_loss matches hand-computed values") {
    Rng rng(2);
    MetricModel m = random_model(2, 4, rng);
    m.bias = 1.0;
    m.margin = 0.2;
    for (double& v : m.L.a) v = 0.0;
    for (double& v : m.V.a) v = 0.0;  // D_J^2 = 0 for every pair

    std::vector<double> a = random_vec(4, rng), b = random_vec(4, rng);
    CHECK(hinge_loss(m, a, b, +1) == 0.0);            // max(0, 0.2 - 1)
    CHECK(hinge_loss(m, a, b, -1) == Catch::Approx(1.2));  // max(0, 0.2 + 1)
}

TEST_CASE("hinge loss 0.3 for a different pair at distance 0.9") {
    // D_J^2 = 0.9 via L = sqrt(0.9) on a 1-d gap, V = 0
    MetricModel m;
    m.proj_dim = 1;
    m.input_dim = 1;
    m.bias = 1.0;
    m.margin = 0.2;
    m.L = Matrix(1, 1);
    m.L(0, 0) = std::sqrt(0.9);
    m.V = Matrix(1, 1);
    std::vector<double> xi{1.0}, xj{0.0};
    CHECK(joint_distance(m, xi, xj) == Catch::Approx(0.9));
    CHECK(hinge_loss(m, xi, xj, -1) == Catch::Approx(0.3));
}

TEST_CASE("a pair exactly at the margin boundary fires no update") {
    MetricModel m;
    m.proj_dim = 1;
    m.input_dim = 2;
    m.L = Matrix(1, 2);
    m.V = Matrix(1, 2);  // all zero: D_J^2 = 0, y (b - 0) = 1
    Matrix desc(2, 2);
    desc(0, 0) = 1.0;
    desc(1, 1) = 1.0;
    std::vector<IndexPair> pairs{{0, 1, +1}};
    SgdConfig cfg;
    cfg.bias = 1.0;
    cfg.margin = 1.0;  // y (b - D) == m exactly: strict '<' must not fire
    cfg.iters = 100;
    cfg.log_every = 0;
    MetricModel out = sgd_train(m, desc, pairs, cfg);
    CHECK(out.L.a == m.L.a);
    CHECK(out.V.a == m.V.a);
    CHECK(hinge_loss(out, desc.row_span(0), desc.row_span(1), +1) == 0.0);
}

TEST_CASE("wpca_init whitens isotropic data") {
    Rng rng(3);
    Matrix data = random_matrix(5000, 8, rng);
    Matrix p = wpca_init(data, 3, 7);
    REQUIRE(p.rows == 3);
    REQUIRE(p.cols == 8);
    // rows approximately orthonormal for unit-covariance data
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double g = dot({p.row(i), 8}, {p.row(j), 8});
            CHECK(g == Catch::Approx(i == j ? 1.0 : 0.0).margin(0.1));
        }
    // projections have unit variance per coordinate
    for (int r = 0; r < 3; ++r) {
        double mean = 0.0, sq = 0.0;
        for (int i = 0; i < data.rows; ++i) {
            double s = dot({p.row(r), 8}, data.row_span(i));
            mean += s;
            sq += s * s;
        }
        mean /= data.rows;
        CHECK(sq / data.rows - mean * mean == Catch::Approx(1.0).margin(0.05));
    }
}

TEST_CASE("wpca_init on one-directional data finds the variance axis") {
    Rng rng(4);
    std::vector<double> u{0.6, -0.8, 0.0, 0.0};  // unit direction
    Matrix data(300, 4);
    for (int i = 0; i < 300; ++i) {
        double t = rng.normal() * 2.5;
        for (int j = 0; j < 4; ++j) data(i, j) = t * u[j] + 1e-4 * rng.normal();
    }
    Matrix p = wpca_init(data, 1, 5);
    double cos = std::abs(dot({p.row(0), 4}, u)) /
                 std::sqrt(dot({p.row(0), 4}, {p.row(0), 4}));
    CHECK(cos == Catch::Approx(1.0).margin(1e-3));

    CHECK_THROWS_AS(wpca_init(Matrix(2, 4), 3, 0), InvalidArgument);
}

TEST_CASE("sgd update on a single violating same-pair reduces its distance") {
    Rng rng(5);
    MetricModel m = random_model(3, 8, rng, 1.5);
    Matrix desc(2, 8);
    for (int j = 0; j < 8; ++j) {
        desc(0, j) = rng.normal();
        desc(1, j) = rng.normal();
    }
    double before = joint_distance(m, desc.row_span(0), desc.row_span(1));
    SgdConfig cfg;
    cfg.bias = 1.0;
    cfg.margin = 0.2;
    cfg.rate = 1e-4;
    cfg.iters = 1;
    cfg.log_every = 0;
    std::vector<IndexPair> pairs{{0, 1, +1}};
    REQUIRE(1.0 * (cfg.bias - before) < cfg.margin);  // the pair violates
    MetricModel out = sgd_train(m, desc, pairs, cfg);
    double after = joint_distance(out, desc.row_span(0), desc.row_span(1));
    CHECK(after < before);
}

TEST_CASE("the L update matches the analytic gradient of the hinge loss") {
    Rng rng(6);
    MetricModel m = random_model(2, 5, rng, 1.5);
    m.bias = 1.0;
    m.margin = 0.2;
    std::vector<double> xi = random_vec(5, rng), xj = random_vec(5, rng);
    int y = +1;  // violates when D_J^2 > b - m
    // make sure the hinge is active for this pair
    REQUIRE(hinge_loss(m, xi, xj, y) > 0.0);

    // d loss / d L_ab = 2 y (L w)_a w_b with w = x_i - x_j
    std::vector<double> w(5), lw(2);
    for (int c = 0; c < 5; ++c) w[c] = xi[c] - xj[c];
    for (int r = 0; r < 2; ++r) lw[r] = dot({m.L.row(r), 5}, w);

    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 5; ++b) {
            double h = 1e-6;
            MetricModel up = m, dn = m;
            up.L(a, b) += h;
            dn.L(a, b) -= h;
            double fd = (hinge_loss(up, xi, xj, y) - hinge_loss(dn, xi, xj, y)) / (2 * h);
            double analytic = 2.0 * y * lw[a] * w[b];
            CHECK(fd == Catch::Approx(analytic).epsilon(1e-3));
        }
    }
}

TEST_CASE("the V update applies the stated rule, and the symmetric variant both terms") {
    Rng rng(7);
    MetricModel m = random_model(2, 4, rng, 2.0);  // large enough to violate
    Matrix desc(2, 4);
    for (int j = 0; j < 4; ++j) {
        desc(0, j) = rng.normal();
        desc(1, j) = rng.normal();
    }
    std::vector<IndexPair> pairs{{0, 1, +1}};
    SgdConfig cfg;
    cfg.rate = 0.01;
    cfg.iters = 1;
    cfg.log_every = 0;
    const double* xi = desc.row(0);
    const double* xj = desc.row(1);
    double before = joint_distance(m, desc.row_span(0), desc.row_span(1));
    REQUIRE(1.0 * (cfg.bias - before) < cfg.margin);

    std::vector<double> pi(2), pj(2);
    for (int r = 0; r < 2; ++r) {
        pi[r] = dot({m.V.row(r), 4}, desc.row_span(0));
        pj[r] = dot({m.V.row(r), 4}, desc.row_span(1));
    }

    MetricModel plain = sgd_train(m, desc, pairs, cfg);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 4; ++c)
            CHECK(plain.V(r, c) ==
                  Catch::Approx(m.V(r, c) + cfg.rate * 1.0 * pi[r] * xj[c]).epsilon(1e-12));

    SgdConfig sym = cfg;
    sym.symmetric_v_update = true;
    MetricModel both = sgd_train(m, desc, pairs, sym);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 4; ++c)
            CHECK(both.V(r, c) ==
                  Catch::Approx(m.V(r, c) + cfg.rate * (pi[r] * xj[c] + pj[r] * xi[c]))
                      .epsilon(1e-12));
}

TEST_CASE("sgd reduces the mean loss on separable identity data") {
    Rng rng(8);
    const int d0 = 16, per_id = 6, ids = 8;
    // identity centers in a shared low-dimensional subspace, isotropic noise
    Matrix basis(4, d0);
    for (double& v : basis.a) v = rng.normal();
    Matrix desc(ids * per_id, d0);
    std::vector<IndexPair> pairs;
    for (int id = 0; id < ids; ++id) {
        std::vector<double> center(d0, 0.0);
        for (int r = 0; r < 4; ++r) {
            double w = rng.normal();
            for (int j = 0; j < d0; ++j) center[j] += w * basis(r, j);
        }
        l2_normalize_inplace(center);
        for (int k = 0; k < per_id; ++k) {
            int row = id * per_id + k;
            for (int j = 0; j < d0; ++j) desc(row, j) = center[j] + 0.2 * rng.normal();
        }
        for (int a = 0; a < per_id; ++a)
            for (int b = a + 1; b < per_id; ++b)
                pairs.push_back({id * per_id + a, id * per_id + b, +1});
    }
    size_t same_count = pairs.size();
    for (size_t i = 0; i < same_count; ++i) {
        int a = static_cast<int>(rng.uniform_index(ids * per_id));
        int b = static_cast<int>(rng.uniform_index(ids * per_id));
        if (a / per_id == b / per_id) {
            --i;
            continue;
        }
        pairs.push_back({a, b, -1});
    }

    MetricModel init = make_metric_model(wpca_init(desc, 6, 3));
    double loss0 = mean_hinge_loss(init, desc, pairs);
    REQUIRE(loss0 > 0.0);  // the whitened init leaves violations to learn from
    SgdConfig cfg;
    cfg.iters = 30000;
    cfg.seed = 11;
    cfg.log_every = 0;
    MetricModel trained = sgd_train(init, desc, pairs, cfg);
    double loss1 = mean_hinge_loss(trained, desc, pairs);
    INFO("loss " << loss0 << " -> " << loss1);
    CHECK(loss1 < loss0);
}

TEST_CASE("sgd training is bit-identical under a fixed seed") {
    Rng rng(9);
    Matrix desc = random_matrix(10, 6, rng);
    std::vector<IndexPair> pairs;
    for (int i = 0; i < 10; ++i)
        pairs.push_back({i, (i + 1) % 10, i % 2 == 0 ? 1 : -1});
    auto serialize = [&] {
        MetricModel m = make_metric_model(wpca_init(desc, 3, 21));
        SgdConfig cfg;
        cfg.iters = 500;
        cfg.seed = 77;
        cfg.log_every = 0;
        MetricModel t = sgd_train(m, desc, pairs, cfg);
        std::ostringstream os;
        save_metric(t, os);
        return os.str();
    };
    CHECK(serialize() == serialize());
}

TEST_CASE("with V fixed at zero the distance is a squared pseudometric") {
    Rng rng(10);
    MetricModel m = random_model(3, 7, rng);
    for (double& v : m.V.a) v = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        auto a = random_vec(7, rng), b = random_vec(7, rng);
        CHECK(joint_distance(m, a, b) >= 0.0);
        CHECK(joint_distance(m, a, a) == 0.0);
    }
}

TEST_CASE("score_pair_flipped averages the four combinations") {
    Rng rng(11);
    MetricModel m = random_model(2, 5, rng);
    auto x = random_vec(5, rng);
    double expect = joint_distance(m, x, x);
    CHECK(score_pair_flipped(m, x, x, x, x) == Catch::Approx(expect).epsilon(1e-12));

    auto xi = random_vec(5, rng), xj = random_vec(5, rng);
    // symmetric faces: descriptor equals its flip, so the score is the plain distance
    CHECK(score_pair_flipped(m, xi, xi, xj, xj) ==
          Catch::Approx(joint_distance(m, xi, xj)).epsilon(1e-12));

    auto xif = random_vec(5, rng), xjf = random_vec(5, rng);
    double mean = 0.25 * (joint_distance(m, xi, xj) + joint_distance(m, xi, xjf) +
                          joint_distance(m, xif, xj) + joint_distance(m, xif, xjf));
    CHECK(score_pair_flipped(m, xi, xif, xj, xjf) == Catch::Approx(mean).margin(1e-12));
}

TEST_CASE("metric model file round-trips bit-exactly") {
    Rng rng(12);
    MetricModel m = random_model(3, 5, rng);
    m.bias = 1.0;
    m.margin = 0.2;
    std::ostringstream os;
    save_metric(m, os);
    std::istringstream is(os.str());
    MetricModel back = load_metric(is);
    CHECK(back.proj_dim == 3);
    CHECK(back.input_dim == 5);
    CHECK(back.bias == m.bias);
    CHECK(back.margin == m.margin);
    CHECK(back.L.a == m.L.a);
    CHECK(back.V.a == m.V.a);
}

TEST_CASE("sgd with flips draws one of the four variants") {
    Rng rng(13);
    Matrix desc = random_matrix(4, 6, rng);
    Matrix flipped = random_matrix(4, 6, rng);
    std::vector<IndexPair> pairs{{0, 1, -1}, {2, 3, +1}};
    MetricModel init = make_metric_model(wpca_init(desc, 2, 9));
    SgdConfig cfg;
    cfg.iters = 200;
    cfg.seed = 5;
    cfg.log_every = 0;
    MetricModel with_flips = sgd_train(init, desc, pairs, cfg, &flipped);
    MetricModel without = sgd_train(init, desc, pairs, cfg);
    CHECK(with_flips.V.a != without.V.a);  // flip variants entered the updates

    Matrix bad(3, 6);
    CHECK_THROWS_AS(sgd_train(init, desc, pairs, cfg, &bad), InvalidArgument);
}
