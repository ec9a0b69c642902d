#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include "helpers.hpp"
#include "sgdgp/error.hpp"
#include "sgdgp/synthetic.hpp"

using namespace sgdgp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("load_csv reads named target and remaining feature columns") {
    test::TempDir dir("csv_basic");
    const auto file = dir.path() / "d.csv";
    std::ofstream(file) << "a,b,y\n1,2,3\n4,5,6\n7,8,9\n";
    const Dataset d = load_csv(file, std::string("y"));
    CHECK(d.size() == 3);
    CHECK(d.dim() == 2);
    CHECK(d.inputs()(2, 1) == 8.0);
    CHECK(d.targets()[1] == 6.0);
    CHECK(d.feature_names() == std::vector<std::string>{"a", "b"});

    const Dataset by_index = load_csv(file, std::size_t{0});
    CHECK(by_index.targets()[2] == 7.0);
    CHECK(by_index.inputs()(0, 1) == 3.0);
}

TEST_CASE("load_csv rejects a NaN cell and names the row") {
    test::TempDir dir("csv_nan");
    const auto file = dir.path() / "d.csv";
    std::ofstream(file) << "a,y\n1,2\n3,NaN\n";
    try {
        load_csv(file, std::string("y"));
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
}

TEST_CASE("load_csv errors on missing file and missing column") {
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", std::string("y")), InputError);
    test::TempDir dir("csv_col");
    const auto file = dir.path() / "d.csv";
    std::ofstream(file) << "a,b\n1,2\n";
    CHECK_THROWS_AS(load_csv(file, std::string("y")), InputError);
}

TEST_CASE("csv round trip preserves values") {
    test::TempDir dir("csv_roundtrip");
    const Dataset d = test::random_problem(50, 3, 11);
    save_csv(d, dir.path() / "d.csv");
    const Dataset back = load_csv(dir.path() / "d.csv", std::string("y"));
    REQUIRE(back.size() == d.size());
    CHECK((back.inputs() - d.inputs()).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((back.targets() - d.targets()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("dataset rejects non-finite entries and mismatched sizes") {
    MatrixXd x = MatrixXd::Zero(2, 1);
    CHECK_THROWS_AS(Dataset(x, VectorXd::Zero(3)), InputError);
    x(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(Dataset(x, VectorXd::Zero(2)), InputError);
}

TEST_CASE("standardize uses the population deviation") {
    const Dataset d(MatrixXd::Zero(2, 1), (VectorXd(2) << 1.0, 3.0).finished());
    const auto [s, st] = standardize(d);
    CHECK(s.targets()[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(s.targets()[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(st.target_scale == doctest::Approx(1.0));
}

TEST_CASE("standardize maps a constant column to zero with unit deviation") {
    MatrixXd x(3, 2);
    x << 5, 1, 5, 2, 5, 4;
    const auto [s, st] = standardize(Dataset(x, VectorXd::LinSpaced(3, 0, 2)));
    CHECK(s.inputs().col(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(st.input_scale[0] == 1.0);
}

TEST_CASE("standardize is idempotent and invertible") {
    const Dataset d = test::random_problem(40, 2, 3);
    const auto [once, st] = standardize(d);
    const auto [twice, st2] = standardize(once);
    CHECK((twice.inputs() - once.inputs()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((twice.targets() - once.targets()).cwiseAbs().maxCoeff() < 1e-10);
    const Dataset back = st.inverse(once);
    CHECK((back.inputs() - d.inputs()).norm() <= 1e-12 * d.inputs().norm());
    CHECK((back.targets() - d.targets()).norm() <= 1e-12 * d.targets().norm());
}

TEST_CASE("split sizes, determinism and partition") {
    const Dataset d = test::random_problem(10, 1, 5);
    const auto [train, test_set] = split(d, SplitSpec{0.9, 4});
    CHECK(train.size() == 9);
    CHECK(test_set.size() == 1);

    const auto a = split_indices(100, SplitSpec{0.7, 8});
    const auto b = split_indices(100, SplitSpec{0.7, 8});
    CHECK(a == b);
    std::vector<Eigen::Index> all = a.first;
    all.insert(all.end(), a.second.begin(), a.second.end());
    std::sort(all.begin(), all.end());
    std::vector<Eigen::Index> expect(100);
    std::iota(expect.begin(), expect.end(), Eigen::Index{0});
    CHECK(all == expect);

    CHECK_THROWS_AS(split_indices(10, SplitSpec{1.0, 0}), InputError);
}

TEST_CASE("knn selection keeps one of two identical points") {
    const Dataset d(MatrixXd::Zero(2, 1), VectorXd::Zero(2));
    CHECK(knn_inducing_select(d, 0.1, 2).size() == 1);
}

TEST_CASE("knn selection keeps every point of a sparse grid") {
    MatrixXd x(25, 2);
    for (int i = 0; i < 25; ++i) x.row(i) << i / 5, i % 5;
    const Dataset d(x, VectorXd::Zero(25));
    CHECK(knn_inducing_select(d, 0.1, 3).size() == 25);
}

TEST_CASE("knn selection count does not decrease as the lengthscale shrinks") {
    Rng rng = make_rng(83);
    const Dataset d(test::uniform_matrix(100, 2, 0.0, 1.0, rng), VectorXd::Zero(100));
    std::size_t previous = 0;
    for (double ell : {1.0, 0.5, 0.3, 0.2, 0.1, 0.05, 0.02, 1e-5}) {
        const std::size_t count = knn_inducing_select(d, ell, 2).size();
        CHECK(count >= previous);
        previous = count;
    }
    CHECK(previous == 100);
}

TEST_CASE("generators are deterministic and sized") {
    GeneratorConfig cfg;
    cfg.kind = GeneratorKind::infill;
    cfg.n = 300;
    cfg.seed = 9;
    const Dataset a = generate(cfg), b = generate(cfg);
    CHECK(a.size() == 300);
    CHECK(a.inputs() == b.inputs());
    CHECK(a.targets() == b.targets());

    cfg.kind = GeneratorKind::grid;
    cfg.n = 11;
    cfg.spacing = 0.5;
    const Dataset g = generate(cfg);
    CHECK(g.inputs()(0, 0) == doctest::Approx(-2.5));
    CHECK(g.inputs()(10, 0) == doctest::Approx(2.5));

    cfg.kind = GeneratorKind::uniform;
    cfg.noise_variance = 0.0;
    cfg.n = 5;
    const Dataset u = generate(cfg);
    for (Eigen::Index i = 0; i < u.size(); ++i)
        CHECK(u.targets()[i] == doctest::Approx(std::sin(2 * u.inputs()(i, 0)) + std::cos(5 * u.inputs()(i, 0))));
}
