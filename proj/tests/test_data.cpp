#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "mfreg/data_io.hpp"

using namespace mfreg;

TEST_CASE("movielens row parses and ignores the timestamp") {
    std::istringstream in("userId,movieId,rating,timestamp\n1,296,5.0,1147880044\n");
    RatingsDataset d = load_ratings_table(in, TableSchema::movielens());
    REQUIRE(d.size() == 1);
    CHECK(d.num_users() == 1);
    CHECK(d.num_items() == 1);
    CHECK(d.observations()[0].rating == 5.0);
    CHECK(d.user_external_id(0) == 1);
    CHECK(d.item_external_id(0) == 296);
    CHECK(d.user_index_of(1) == 0);
    CHECK(d.item_index_of(296) == 0);
}

TEST_CASE("external IDs remap in first-appearance order, stable across loads") {
    const char* text =
        "userId,movieId,rating,timestamp\n"
        "77,300,3.0,0\n"
        "5,300,4.0,0\n"
        "77,2,1.0,0\n";
    std::istringstream in1(text), in2(text);
    RatingsDataset a = load_ratings_table(in1, TableSchema::movielens());
    RatingsDataset b = load_ratings_table(in2, TableSchema::movielens());
    CHECK(a.user_external_id(0) == 77);
    CHECK(a.user_external_id(1) == 5);
    CHECK(a.item_external_id(0) == 300);
    CHECK(a.item_external_id(1) == 2);
    CHECK(a.user_ids() == b.user_ids());
    CHECK(a.item_ids() == b.item_ids());
}

TEST_CASE("duplicate pairs keep the last rating and are counted") {
    std::istringstream in(
        "userId,movieId,rating,timestamp\n"
        "1,10,2.0,0\n"
        "1,10,4.5,0\n");
    LoadStats stats;
    RatingsDataset d = load_ratings_table(in, TableSchema::movielens(), &stats);
    REQUIRE(d.size() == 1);
    CHECK(d.observations()[0].rating == 4.5);
    CHECK(stats.duplicates == 1);
}

TEST_CASE("loader errors carry line numbers") {
    SECTION("unparseable row") {
        std::istringstream in("userId,movieId,rating,timestamp\n1,oops,5.0,0\n");
        try {
            load_ratings_table(in, TableSchema::movielens());
            FAIL("expected parse_error");
        } catch (const parse_error& e) {
            CHECK(e.line() == 2);
        }
    }
    SECTION("rating out of bounds") {
        std::istringstream in("userId,movieId,rating,timestamp\n1,2,3.0,0\n1,3,9.0,0\n");
        try {
            load_ratings_table(in, TableSchema::movielens());
            FAIL("expected parse_error");
        } catch (const parse_error& e) {
            CHECK(e.line() == 3);
        }
    }
    SECTION("too few columns") {
        std::istringstream in("userId,movieId,rating,timestamp\n1,2\n");
        CHECK_THROWS_AS(load_ratings_table(in, TableSchema::movielens()), parse_error);
    }
    SECTION("empty file") {
        std::istringstream in("");
        CHECK_THROWS_AS(load_ratings_table(in, TableSchema::movielens()), parse_error);
    }
    SECTION("header only") {
        std::istringstream in("userId,movieId,rating,timestamp\n");
        CHECK_THROWS_AS(load_ratings_table(in, TableSchema::movielens()), parse_error);
    }
}

TEST_CASE("comoda-style table with configurable columns") {
    std::istringstream in("3\t9\t4\textra\tcontext\n3\t11\t2\tx\ty\n");
    TableSchema s = TableSchema::comoda();
    s.delimiter = '\t';
    s.has_header = false;
    RatingsDataset d = load_ratings_table(in, s);
    CHECK(d.size() == 2);
    CHECK(d.r_min() == 1.0);
    CHECK(d.r_max() == 5.0);
}

TEST_CASE("canonical round-trip reproduces the dataset") {
    RatingsDataset d = synthetic(9, 7, 2, 0.5, 0.3, 1234);
    std::ostringstream os;
    save_canonical(d, os);
    std::istringstream in(os.str());
    RatingsDataset back = load_canonical(in);
    CHECK(back.num_users() == d.num_users());
    CHECK(back.num_items() == d.num_items());
    CHECK(back.r_min() == d.r_min());
    CHECK(back.r_max() == d.r_max());
    REQUIRE(back.size() == d.size());
    for (std::size_t n = 0; n < d.size(); ++n)
        CHECK(back.observations()[n] == d.observations()[n]);

    // Re-serialization is byte-identical.
    std::ostringstream os2;
    save_canonical(back, os2);
    CHECK(os2.str() == os.str());
}

TEST_CASE("canonical load rejects malformed headers") {
    std::istringstream a("user_index,item_index,rating\n0,0,3\n");
    CHECK_THROWS_AS(load_canonical(a), parse_error);
    std::istringstream b("# 2,2,1,5\nwrong\n0,0,3\n");
    CHECK_THROWS_AS(load_canonical(b), parse_error);
}

TEST_CASE("synthetic is deterministic and respects its contract") {
    RatingsDataset a = synthetic(20, 15, 3, 0.4, 0.2, 77);
    RatingsDataset b = synthetic(20, 15, 3, 0.4, 0.2, 77);
    REQUIRE(a.size() == b.size());
    for (std::size_t n = 0; n < a.size(); ++n) CHECK(a.observations()[n] == b.observations()[n]);
    CHECK(a.r_min() == 1.0);
    CHECK(a.r_max() == 5.0);
    for (const Observation& o : a.observations()) {
        CHECK(o.rating >= 1.0);
        CHECK(o.rating <= 5.0);
    }

    CHECK_THROWS_AS(synthetic(10, 10, 0, 0.5, 0.1, 1), contract_error);
    CHECK_THROWS_AS(synthetic(10, 10, 2, 0.0, 0.1, 1), contract_error);
    CHECK_THROWS_AS(synthetic(10, 10, 2, 1.5, 0.1, 1), contract_error);
    CHECK_THROWS_AS(synthetic(10, 10, 2, 0.5, -0.1, 1), contract_error);
}

TEST_CASE("noiseless rank-1 synthetic data is rank-1 up to the affine rescale") {
    RatingsDataset d = synthetic(6, 5, 1, 1.0, 0.0, 5);
    REQUIRE(d.size() == 30);
    // Full matrix R with R_ij = a*x_i*y_j + b. Column differences eliminate b:
    // D_jl(i) = R_ij - R_il must have rank 1, so all 2x2 minors vanish.
    double R[6][5];
    for (const Observation& o : d.observations()) R[o.user][o.item] = o.rating;
    for (std::size_t i = 1; i < 6; ++i)
        for (std::size_t j = 1; j < 5; ++j) {
            double minor = (R[i][j] - R[i][0]) * (R[0][1] - R[0][0]) -
                           (R[i][1] - R[i][0]) * (R[0][j] - R[0][0]);
            CHECK_THAT(minor, Catch::Matchers::WithinAbs(0.0, 1e-9));
        }
}

TEST_CASE("synthetic observation count stays within the binomial 3-sigma band") {
    RatingsDataset d = synthetic(50, 40, 2, 0.2, 0.1, 99);
    double expected = 0.2 * 50 * 40;                      // 400
    double sigma = std::sqrt(2000 * 0.2 * 0.8);           // ~17.9
    CHECK(std::abs(static_cast<double>(d.size()) - expected) <= 3.0 * sigma);
}

TEST_CASE("split partitions the observations deterministically") {
    RatingsDataset d = synthetic(10, 10, 2, 0.3, 0.2, 11);
    SplitPair p1 = split(d, 0.8, 7);
    SplitPair p2 = split(d, 0.8, 7);

    CHECK(p1.train.size() == p2.train.size());
    for (std::size_t n = 0; n < p1.train.size(); ++n)
        CHECK(p1.train.observations()[n] == p2.train.observations()[n]);

    CHECK(p1.train.num_users() == d.num_users());
    CHECK(p1.test.num_items() == d.num_items());
    CHECK(p1.train.size() + p1.test.size() == d.size());

    // Disjoint and union = source (as multisets of (u,i,r) triples).
    auto key = [&](const Observation& o) {
        return o.user * 1000000 + o.item * 100 + static_cast<std::size_t>(o.rating * 10);
    };
    std::vector<std::size_t> all, parts;
    for (const Observation& o : d.observations()) all.push_back(key(o));
    for (const Observation& o : p1.train.observations()) parts.push_back(key(o));
    for (const Observation& o : p1.test.observations()) parts.push_back(key(o));
    std::sort(all.begin(), all.end());
    std::sort(parts.begin(), parts.end());
    CHECK(all == parts);
}

TEST_CASE("split partition property holds across random ratios and seeds") {
    Rng rng(424);
    RatingsDataset d = synthetic(15, 12, 2, 0.4, 0.3, 77);
    const std::size_t n = d.size();
    for (int trial = 0; trial < 25; ++trial) {
        double ratio = rng.uniform(0.05, 0.95);
        auto expected_train =
            static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n)));
        std::uint64_t seed = rng.below(1u << 30);
        if (expected_train == 0 || expected_train >= n) continue;
        SplitPair p = split(d, ratio, seed);
        CHECK(p.train.size() == expected_train);
        CHECK(p.train.size() + p.test.size() == n);

        std::vector<Observation> merged(p.train.observations().begin(),
                                        p.train.observations().end());
        merged.insert(merged.end(), p.test.observations().begin(), p.test.observations().end());
        auto by_pair = [](const Observation& a, const Observation& b) {
            return std::tie(a.user, a.item) < std::tie(b.user, b.item);
        };
        std::sort(merged.begin(), merged.end(), by_pair);
        std::vector<Observation> source(d.observations().begin(), d.observations().end());
        std::sort(source.begin(), source.end(), by_pair);
        bool equal = merged.size() == source.size();
        for (std::size_t m = 0; equal && m < merged.size(); ++m)
            equal = merged[m] == source[m];
        CHECK(equal); // disjoint + union = source: (u,i) pairs are unique
    }
}

TEST_CASE("split sizes follow ceil(ratio*n)") {
    RatingsDataset d = synthetic(5, 4, 2, 1.0, 0.0, 3);
    REQUIRE(d.size() == 20);
    SplitPair p = split(d, 0.8, 1);
    CHECK(p.train.size() == 16);
    CHECK(p.test.size() == 4);
}

TEST_CASE("degenerate splits are rejected") {
    RatingsDataset d = synthetic(5, 4, 2, 1.0, 0.0, 3);
    CHECK_THROWS_AS(split(d, 0.999, 1), contract_error); // ceil leaves empty test
    CHECK_THROWS_AS(split(d, 0.0, 1), contract_error);
    CHECK_THROWS_AS(split(d, 1.0, 1), contract_error);

    RatingsDataset one = RatingsDataset::make(1, 1, {{0, 0, 3.0}}, 1.0, 5.0);
    CHECK_THROWS_AS(split(one, 0.5, 1), contract_error);
}

TEST_CASE("dataset invariants are enforced at construction") {
    CHECK_THROWS_AS(RatingsDataset::make(2, 2, {{2, 0, 3.0}}, 1.0, 5.0), contract_error);
    CHECK_THROWS_AS(RatingsDataset::make(2, 2, {{0, 5, 3.0}}, 1.0, 5.0), contract_error);
    CHECK_THROWS_AS(RatingsDataset::make(2, 2, {{0, 0, 9.0}}, 1.0, 5.0), contract_error);
    CHECK_THROWS_AS(
        RatingsDataset::make(2, 2, {{0, 0, 3.0}, {0, 0, 4.0}}, 1.0, 5.0), contract_error);
    CHECK_THROWS_AS(RatingsDataset::make(2, 2, {}, 1.0, 5.0, {1, 1}, {}), contract_error);
}

// The published dataset sizes; these run only when the real files are
// available (MFREG_ML_SMALL / MFREG_COMODA point at the ratings tables).
TEST_CASE("movielens small has 610 users and 9724 rated movies") {
    const char* path = std::getenv("MFREG_ML_SMALL");
    if (!path) {
        SKIP("MFREG_ML_SMALL not set");
    }
    RatingsDataset d = load_ratings_table(path, TableSchema::movielens());
    CHECK(d.num_users() == 610);
    CHECK(d.num_items() == 9724);
}

TEST_CASE("ldos-comoda has 121 users and 1232 rated movies") {
    const char* path = std::getenv("MFREG_COMODA");
    if (!path) {
        SKIP("MFREG_COMODA not set");
    }
    RatingsDataset d = load_ratings_table(path, TableSchema::comoda());
    CHECK(d.num_users() == 121);
    CHECK(d.num_items() == 1232);
}

TEST_CASE("adjacency lists are sorted by the opposite index") {
    std::vector<Observation> obs = {{1, 3, 2.0}, {0, 2, 3.0}, {1, 0, 4.0}, {0, 0, 5.0}, {1, 1, 1.0}};
    RatingsDataset d = RatingsDataset::make(2, 4, obs, 1.0, 5.0);
    auto u1 = d.user_observations(1);
    REQUIRE(u1.size() == 3);
    CHECK(d.observations()[u1[0]].item == 0);
    CHECK(d.observations()[u1[1]].item == 1);
    CHECK(d.observations()[u1[2]].item == 3);
    auto i0 = d.item_observations(0);
    REQUIRE(i0.size() == 2);
    CHECK(d.observations()[i0[0]].user == 0);
    CHECK(d.observations()[i0[1]].user == 1);
    CHECK(d.user_degree(0) == 2);
    CHECK(d.item_degree(2) == 1);
}
