#ifndef MFREG_DATA_IO_HPP
#define MFREG_DATA_IO_HPP

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mfreg/dataset.hpp"
#include "mfreg/errors.hpp"
#include "mfreg/matrix.hpp"
#include "mfreg/rng.hpp"

namespace mfreg {

// Column layout of a delimiter-separated ratings table. Dataset packagings
// differ, so the user/item/rating positions are configuration with two
// shipped presets; extra columns (timestamps, context) are ignored.
struct TableSchema {
    char delimiter = ',';
    bool has_header = true;
    std::size_t user_col = 0;
    std::size_t item_col = 1;
    std::size_t rating_col = 2;
    double r_min = 0.5;
    double r_max = 5.0;

    // MovieLens ratings.csv: userId,movieId,rating,timestamp on a 0.5-5 scale.
    static TableSchema movielens() { return {}; }

    // LDOS-CoMoDa style table: first three columns user/item/rating on a
    // 1-5 scale; the contextual columns are ignored.
    static TableSchema comoda() {
        TableSchema s;
        s.r_min = 1.0;
        s.r_max = 5.0;
        return s;
    }
};

struct LoadStats {
    std::size_t rows = 0;       // data rows parsed
    std::size_t duplicates = 0; // repeated (user,item) pairs, last kept
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t p = 0; p <= line.size(); ++p) {
        if (p == line.size() || line[p] == delim) {
            out.push_back(line.substr(start, p - start));
            start = p + 1;
        }
    }
    return out;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
    s = trim(s);
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

// Parses a ratings table, remapping external IDs to dense indices in
// first-appearance order. Duplicate (user,item) pairs keep the last
// occurrence and are counted in stats. Any unparseable row, or a rating
// outside the schema's declared bounds, is an error naming the line.
inline RatingsDataset load_ratings_table(std::istream& in, const TableSchema& schema,
                                         LoadStats* stats = nullptr) {
    std::vector<Observation> obs;
    std::vector<std::int64_t> user_ids, item_ids;
    std::unordered_map<std::int64_t, std::size_t> user_index, item_index;
    std::unordered_map<std::uint64_t, std::size_t> pair_pos; // (u,i) -> obs index
    LoadStats local;

    const std::size_t need = std::max({schema.user_col, schema.item_col, schema.rating_col}) + 1;
    std::string line;
    std::size_t line_no = 0;
    bool header_pending = schema.has_header;

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = detail::trim(line);
        if (sv.empty()) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        auto fields = detail::split_fields(sv, schema.delimiter);
        if (fields.size() < need)
            throw parse_error(line_no, "line " + std::to_string(line_no) + ": expected at least " +
                                           std::to_string(need) + " columns, got " +
                                           std::to_string(fields.size()));
        auto uid = detail::parse_int(fields[schema.user_col]);
        auto iid = detail::parse_int(fields[schema.item_col]);
        auto rating = detail::parse_double(fields[schema.rating_col]);
        if (!uid || !iid || !rating)
            throw parse_error(line_no,
                              "line " + std::to_string(line_no) + ": unparseable user/item/rating");
        if (!(*rating >= schema.r_min && *rating <= schema.r_max))
            throw parse_error(line_no, "line " + std::to_string(line_no) + ": rating " +
                                           detail::fmt_double(*rating) + " outside [" +
                                           detail::fmt_double(schema.r_min) + "," +
                                           detail::fmt_double(schema.r_max) + "]");

        auto [uit, unew] = user_index.emplace(*uid, user_ids.size());
        if (unew) user_ids.push_back(*uid);
        auto [iit, inew] = item_index.emplace(*iid, item_ids.size());
        if (inew) item_ids.push_back(*iid);
        std::size_t u = uit->second, i = iit->second;

        std::uint64_t key = (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint64_t>(i);
        auto [pit, pnew] = pair_pos.emplace(key, obs.size());
        if (pnew) {
            obs.push_back({u, i, *rating});
        } else {
            obs[pit->second].rating = *rating; // keep-last
            ++local.duplicates;
        }
        ++local.rows;
    }
    if (obs.empty()) throw parse_error(0, "ratings table contains no data rows");
    if (stats) *stats = local;
    const std::size_t num_users = user_ids.size();
    const std::size_t num_items = item_ids.size();
    return RatingsDataset::make(num_users, num_items, std::move(obs), schema.r_min, schema.r_max,
                                std::move(user_ids), std::move(item_ids));
}

inline RatingsDataset load_ratings_table(const std::string& path, const TableSchema& schema,
                                         LoadStats* stats = nullptr) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open ratings table: " + path);
    return load_ratings_table(in, schema, stats);
}

// Canonical on-disk form: a two-line header carrying the dimensions and the
// rating bounds, then dense-index rows.
//
//   # M,N,r_min,r_max
//   user_index,item_index,rating
//   0,3,4.5
inline void save_canonical(const RatingsDataset& d, std::ostream& os) {
    os << "# " << d.num_users() << ',' << d.num_items() << ',' << detail::fmt_double(d.r_min())
       << ',' << detail::fmt_double(d.r_max()) << '\n';
    os << "user_index,item_index,rating\n";
    for (const Observation& o : d.observations())
        os << o.user << ',' << o.item << ',' << detail::fmt_double(o.rating) << '\n';
}

inline void save_canonical(const RatingsDataset& d, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot write dataset: " + path);
    save_canonical(d, os);
}

inline RatingsDataset load_canonical(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw parse_error(0, "canonical dataset: empty file");
    std::string_view sv = detail::trim(line);
    if (sv.empty() || sv[0] != '#')
        throw parse_error(1, "canonical dataset: missing '# M,N,r_min,r_max' header");
    sv.remove_prefix(1);
    auto head = detail::split_fields(detail::trim(sv), ',');
    if (head.size() != 4) throw parse_error(1, "canonical dataset: malformed header");
    auto M = detail::parse_int(head[0]);
    auto N = detail::parse_int(head[1]);
    auto lo = detail::parse_double(head[2]);
    auto hi = detail::parse_double(head[3]);
    if (!M || !N || !lo || !hi || *M < 0 || *N < 0)
        throw parse_error(1, "canonical dataset: malformed header");
    if (!std::getline(in, line) || detail::trim(line) != "user_index,item_index,rating")
        throw parse_error(2, "canonical dataset: missing column header");

    std::vector<Observation> obs;
    std::size_t line_no = 2;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row = detail::trim(line);
        if (row.empty()) continue;
        auto fields = detail::split_fields(row, ',');
        if (fields.size() != 3)
            throw parse_error(line_no, "line " + std::to_string(line_no) + ": expected 3 columns");
        auto u = detail::parse_int(fields[0]);
        auto i = detail::parse_int(fields[1]);
        auto r = detail::parse_double(fields[2]);
        if (!u || !i || !r || *u < 0 || *i < 0)
            throw parse_error(line_no, "line " + std::to_string(line_no) + ": unparseable row");
        obs.push_back({static_cast<std::size_t>(*u), static_cast<std::size_t>(*i), *r});
    }
    return RatingsDataset::make(static_cast<std::size_t>(*M), static_cast<std::size_t>(*N),
                                std::move(obs), *lo, *hi);
}

inline RatingsDataset load_canonical(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open dataset: " + path);
    return load_canonical(in);
}

// Seeded synthetic ratings: ground-truth factors drawn uniform, entrywise
// Gaussian noise, then one linear rescale of the whole matrix into [1,5].
// Each cell is kept independently with probability `density`.
inline RatingsDataset synthetic(std::size_t M, std::size_t N, std::size_t k_true, double density,
                                double noise_std, std::uint64_t seed) {
    if (M < 1 || N < 1) throw contract_error("synthetic: M and N must be >= 1");
    if (k_true < 1) throw contract_error("synthetic: k_true must be >= 1");
    if (!(density > 0.0 && density <= 1.0)) throw contract_error("synthetic: density in (0,1]");
    if (!(noise_std >= 0.0)) throw contract_error("synthetic: noise_std must be >= 0");

    Rng rng(seed);
    Matrix Ut(M, k_true), Vt(N, k_true);
    for (double& x : Ut.values()) x = rng.uniform(-1.0, 1.0);
    for (double& x : Vt.values()) x = rng.uniform(-1.0, 1.0);

    std::vector<Observation> kept;
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t j = 0; j < N; ++j) {
            double raw = dot(Ut.row(i), Vt.row(j)) + noise_std * rng.gaussian();
            if (first) {
                lo = hi = raw;
                first = false;
            } else {
                if (raw < lo) lo = raw;
                if (raw > hi) hi = raw;
            }
            if (rng.uniform() < density) kept.push_back({i, j, raw});
        }
    }
    if (hi > lo) {
        for (Observation& o : kept) o.rating = 1.0 + 4.0 * (o.rating - lo) / (hi - lo);
    } else {
        for (Observation& o : kept) o.rating = 3.0;
    }
    return RatingsDataset::make(M, N, std::move(kept), 1.0, 5.0);
}

struct SplitPair {
    RatingsDataset train;
    RatingsDataset test;
    double ratio = 0.0;
    std::uint64_t seed = 0;
};

// Seeded uniform shuffle; the first ceil(ratio*n) observations go to train,
// the rest to test. Both halves share the source's dims, bounds and ID maps.
inline SplitPair split(const RatingsDataset& d, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw contract_error("split: ratio must be in (0,1)");
    const std::size_t n = d.size();
    if (n < 2) throw contract_error("split: need at least 2 observations");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    auto n_train = static_cast<std::size_t>(
        std::ceil(ratio * static_cast<double>(n)));
    if (n_train >= n)
        throw contract_error("split: ratio " + detail::fmt_double(ratio) +
                             " leaves an empty test set");
    if (n_train == 0)
        throw contract_error("split: ratio leaves an empty train set");

    std::vector<Observation> train_obs, test_obs;
    train_obs.reserve(n_train);
    test_obs.reserve(n - n_train);
    for (std::size_t i = 0; i < n_train; ++i) train_obs.push_back(d.observations()[order[i]]);
    for (std::size_t i = n_train; i < n; ++i) test_obs.push_back(d.observations()[order[i]]);

    SplitPair p;
    p.train = d.with_observations(std::move(train_obs));
    p.test = d.with_observations(std::move(test_obs));
    p.ratio = ratio;
    p.seed = seed;
    return p;
}

} // namespace mfreg

#endif
