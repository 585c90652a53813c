#include <catch2/catch_amalgamated.hpp>

#include "mfreg/model.hpp"
#include "mfreg/rng.hpp"
#include "oracles.hpp"

using namespace mfreg;

namespace {

FactorModel tiny_model(FrameworkKind kind, Matrix U, Matrix V) {
    FactorModel m;
    m.k = U.cols();
    m.U = std::move(U);
    m.V = std::move(V);
    if (kind == FrameworkKind::vector_dot) {
        m.framework = RegularizationFramework::vector_dot();
        m.B = Matrix(m.U.rows(), m.k);
        m.G = Matrix(m.V.rows(), m.k);
    } else if (kind == FrameworkKind::global_scalar) {
        m.framework = RegularizationFramework::global_scalar(0.0);
    }
    return m;
}

Matrix from_rows(std::vector<std::vector<double>> rows) {
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

} // namespace

TEST_CASE("predict is the plain dot product") {
    FactorModel m = tiny_model(FrameworkKind::none, from_rows({{1, 0}}), from_rows({{0, 1}}));
    CHECK(predict(m, 0, 0) == 0.0);

    m = tiny_model(FrameworkKind::none, from_rows({{1, 2}}), from_rows({{3, 4}}));
    CHECK(predict(m, 0, 0) == 11.0);
}

TEST_CASE("predict matches a multiply-accumulate oracle on random vectors") {
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        FactorModel m = oracles::random_model(rng, FrameworkKind::none, 4, 3, 5);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                double expected = oracles::dot_mac(oracles::row_of(m.U, i), oracles::row_of(m.V, j));
                CHECK_THAT(predict(m, i, j),
                           Catch::Matchers::WithinRel(expected, 1e-12) ||
                               Catch::Matchers::WithinAbs(expected, 1e-15));
            }
    }
}

TEST_CASE("predict rejects out-of-range indices") {
    FactorModel m = tiny_model(FrameworkKind::none, from_rows({{1, 0}}), from_rows({{0, 1}}));
    CHECK_THROWS_AS(predict(m, 1, 0), contract_error);
    CHECK_THROWS_AS(predict(m, 0, 5), contract_error);
}

TEST_CASE("penalty: orthogonal vector_dot pair contributes nothing") {
    FactorModel m = tiny_model(FrameworkKind::vector_dot, from_rows({{1, -1}}), Matrix(0, 2));
    m.G = Matrix(0, 2);
    m.B = from_rows({{1, 1}});
    CHECK(penalty(m) == 0.0);
}

TEST_CASE("penalty: zero global coefficient kills the term") {
    Rng rng(7);
    FactorModel m = oracles::random_model(rng, FrameworkKind::global_scalar, 3, 4, 2);
    m.framework = RegularizationFramework::global_scalar(0.0);
    CHECK(penalty(m) == 0.0);
}

TEST_CASE("penalty matches the brute-force row accumulation oracle") {
    Rng rng(99);
    FactorModel m = oracles::random_model(rng, FrameworkKind::vector_dot, 3, 2, 4);
    double expected = oracles::penalty(m);
    CHECK_THAT(penalty(m), Catch::Matchers::WithinRel(expected, 1e-12));
}

TEST_CASE("penalty is nonnegative for every framework") {
    Rng rng(31);
    for (FrameworkKind kind : {FrameworkKind::none, FrameworkKind::global_scalar,
                               FrameworkKind::per_vector_scalar, FrameworkKind::vector_dot}) {
        for (int trial = 0; trial < 25; ++trial) {
            FactorModel m = oracles::random_model(rng, kind, 3, 4, 3);
            CHECK(penalty(m) >= 0.0);
        }
    }
}

TEST_CASE("vector_dot penalty is symmetric under negating one beta row") {
    Rng rng(1234);
    FactorModel m = oracles::random_model(rng, FrameworkKind::vector_dot, 4, 3, 3);
    double before = penalty(m);
    for (double& x : m.B.row(2)) x = -x;
    CHECK(penalty(m) == before);
}

TEST_CASE("global_scalar penalty scales linearly in beta") {
    Rng rng(555);
    FactorModel m = oracles::random_model(rng, FrameworkKind::global_scalar, 3, 3, 2);
    m.framework = RegularizationFramework::global_scalar(0.7);
    double p1 = penalty(m);
    m.framework = RegularizationFramework::global_scalar(1.4);
    CHECK(penalty(m) == 2.0 * p1);
}

TEST_CASE("scalar coefficients must be nonnegative at configuration") {
    CHECK_THROWS_AS(RegularizationFramework::global_scalar(-0.1), contract_error);
    CHECK_THROWS_AS(RegularizationFramework::per_vector_scalar({1.0, -1.0}, {}), contract_error);
}

TEST_CASE("total_loss: perfect fit, no penalty") {
    // R exactly equals u.v on every observed pair.
    FactorModel m = tiny_model(FrameworkKind::none, from_rows({{1, 2}, {0, 1}}),
                               from_rows({{1, 1}, {2, 0}}));
    std::vector<Observation> obs = {{0, 0, 3.0}, {0, 1, 2.0}, {1, 0, 1.0}, {1, 1, 0.0}};
    auto data = RatingsDataset::make(2, 2, obs, 0.0, 5.0);
    LossBreakdown lb = total_loss(m, data);
    CHECK(lb.fit == 0.0);
    CHECK(lb.penalty == 0.0);
    CHECK(lb.total == 0.0);
}

TEST_CASE("total_loss: single observation hand case") {
    FactorModel m = tiny_model(FrameworkKind::none, from_rows({{1, 0}}), from_rows({{1, 0}}));
    auto data = RatingsDataset::make(1, 1, {{0, 0, 2.0}}, 0.0, 5.0);
    CHECK(total_loss(m, data).fit == 1.0);
}

TEST_CASE("total_loss matches the double-loop oracle") {
    Rng rng(4242);
    for (FrameworkKind kind : {FrameworkKind::none, FrameworkKind::global_scalar,
                               FrameworkKind::per_vector_scalar, FrameworkKind::vector_dot}) {
        FactorModel m = oracles::random_model(rng, kind, 5, 4, 3);
        RatingsDataset data = oracles::random_dataset(rng, 5, 4);
        LossBreakdown lb = total_loss(m, data);
        CHECK_THAT(lb.total, Catch::Matchers::WithinRel(oracles::total_loss(m, data), 1e-10));
    }
}

TEST_CASE("loss decomposition is exact") {
    Rng rng(8);
    FactorModel m = oracles::random_model(rng, FrameworkKind::vector_dot, 4, 4, 3);
    RatingsDataset data = oracles::random_dataset(rng, 4, 4);
    LossBreakdown lb = total_loss(m, data);
    CHECK(lb.total == lb.fit + lb.penalty);
    CHECK(lb.fit >= 0.0);
    CHECK(lb.penalty >= 0.0);
}

TEST_CASE("total_loss rejects dimension mismatches") {
    Rng rng(3);
    FactorModel m = oracles::random_model(rng, FrameworkKind::none, 3, 3, 2);
    RatingsDataset data = oracles::random_dataset(rng, 4, 3);
    CHECK_THROWS_AS(total_loss(m, data), contract_error);
}
