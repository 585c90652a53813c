#ifndef MFREG_METRICS_HPP
#define MFREG_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <vector>

#include "mfreg/dataset.hpp"
#include "mfreg/errors.hpp"
#include "mfreg/model.hpp"

namespace mfreg {

struct EvalReport {
    double mae = 0.0;
    double dme = 0.0; // Degree of Matthew Effect (log-log slope difference)
    std::size_t num_test_ratings = 0;
    bool clamped = true;
};

// Cold-start handling for held-out evaluation: test pairs whose user or item
// never appears in the training split (or falls outside the model) are
// predicted as the global training mean.
struct ColdStartInfo {
    double fallback_rating = 0.0;
    std::vector<std::uint8_t> user_seen;
    std::vector<std::uint8_t> item_seen;

    static ColdStartInfo from(const RatingsDataset& train) {
        ColdStartInfo c;
        c.fallback_rating = train.mean_rating();
        c.user_seen.assign(train.num_users(), 0);
        c.item_seen.assign(train.num_items(), 0);
        for (const Observation& o : train.observations()) {
            c.user_seen[o.user] = 1;
            c.item_seen[o.item] = 1;
        }
        return c;
    }
};

// Mean absolute error over the test observations. Out-of-model indices never
// crash: they fall back to the cold-start rating when available, otherwise to
// the midpoint of the rating scale.
inline double mae(const FactorModel& m, const RatingsDataset& test, bool clamp,
                  const ColdStartInfo* cold = nullptr) {
    if (test.empty()) throw contract_error("mae: test set is empty");
    const double mid = 0.5 * (test.r_min() + test.r_max());
    double sum = 0.0;
    for (const Observation& o : test.observations()) {
        double p;
        if (o.user >= m.U.rows() || o.item >= m.V.rows())
            p = cold ? cold->fallback_rating : mid;
        else if (cold && (o.user >= cold->user_seen.size() || !cold->user_seen[o.user] ||
                          o.item >= cold->item_seen.size() || !cold->item_seen[o.item]))
            p = cold->fallback_rating;
        else
            p = predict(m, o.user, o.item);
        if (clamp) p = clamp_rating(p, test.r_min(), test.r_max());
        sum += std::abs(p - o.rating);
    }
    return sum / static_cast<double>(test.size());
}

// Least-squares slope of ln(count) against ln(rank) after sorting the counts
// descending, rank starting at 1. Non-positive counts are dropped first.
inline double zipf_slope(std::vector<double> counts) {
    counts.erase(std::remove_if(counts.begin(), counts.end(), [](double c) { return !(c > 0.0); }),
                 counts.end());
    if (counts.size() < 2)
        throw insufficient_data_error("zipf_slope: fewer than 2 positive counts");
    std::sort(counts.begin(), counts.end(), std::greater<double>());

    const std::size_t n = counts.size();
    std::vector<double> xs(n), ys(n);
    for (std::size_t r = 0; r < n; ++r) {
        xs[r] = std::log(static_cast<double>(r + 1));
        ys[r] = std::log(counts[r]);
    }
    double xbar = 0.0, ybar = 0.0;
    for (std::size_t r = 0; r < n; ++r) xbar += xs[r];
    for (std::size_t r = 0; r < n; ++r) ybar += ys[r];
    xbar /= static_cast<double>(n);
    ybar /= static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        num += (xs[r] - xbar) * (ys[r] - ybar);
        den += (xs[r] - xbar) * (xs[r] - xbar);
    }
    return num / den;
}

// Per-item exposure counts induced by top-k recommendation: for every user,
// the k_top items with highest predicted score among items the user has not
// rated in train. Ties break toward the lower item index, so the tally is
// reproducible bitwise given a model.
inline std::vector<std::size_t> exposure_counts(const FactorModel& m, const RatingsDataset& train,
                                                std::size_t k_top) {
    if (k_top < 1) throw contract_error("exposure_counts: k_top must be >= 1");
    check_dims(m, train);
    const std::size_t N = train.num_items();
    std::vector<std::size_t> counts(N, 0);
    std::vector<std::uint8_t> rated(N, 0);
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(N);

    for (std::size_t i = 0; i < train.num_users(); ++i) {
        for (std::size_t idx : train.user_observations(i))
            rated[train.observations()[idx].item] = 1;

        scored.clear();
        for (std::size_t j = 0; j < N; ++j)
            if (!rated[j]) scored.emplace_back(dot(m.U.row(i), m.V.row(j)), j);

        std::size_t take = std::min(k_top, scored.size());
        auto better = [](const std::pair<double, std::size_t>& a,
                         const std::pair<double, std::size_t>& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        };
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                          scored.end(), better);
        for (std::size_t t = 0; t < take; ++t) ++counts[scored[t].second];

        for (std::size_t idx : train.user_observations(i))
            rated[train.observations()[idx].item] = 0;
    }
    return counts;
}

// Degree of Matthew Effect: zipf_slope(recommended exposure) minus
// zipf_slope(training popularity). Near 0 means the recommender mirrors the
// data's popularity skew; more negative means it concentrates exposure
// further onto the head. This is a slope-difference reading of the metric,
// configurable via k_top; it is the definition used throughout this project.
inline double degree_matthew_effect(const FactorModel& m, const RatingsDataset& train,
                                    std::size_t k_top) {
    std::vector<std::size_t> exposure = exposure_counts(m, train, k_top);
    bool any = false;
    for (std::size_t c : exposure)
        if (c > 0) { any = true; break; }
    if (!any)
        throw insufficient_data_error("degree_matthew_effect: no items were exposed");

    std::vector<double> exp_counts(exposure.size());
    for (std::size_t j = 0; j < exposure.size(); ++j)
        exp_counts[j] = static_cast<double>(exposure[j]);
    std::vector<double> pop_counts(train.num_items());
    for (std::size_t j = 0; j < train.num_items(); ++j)
        pop_counts[j] = static_cast<double>(train.item_degree(j));

    return zipf_slope(std::move(exp_counts)) - zipf_slope(std::move(pop_counts));
}

inline EvalReport evaluate(const FactorModel& m, const RatingsDataset& train,
                           const RatingsDataset& test, bool clamp, std::size_t k_top) {
    ColdStartInfo cold = ColdStartInfo::from(train);
    EvalReport r;
    r.mae = mae(m, test, clamp, &cold);
    r.dme = degree_matthew_effect(m, train, k_top);
    r.num_test_ratings = test.size();
    r.clamped = clamp;
    return r;
}

// One CSV row: mae,dme,num_test_ratings
inline void write_eval_csv(const EvalReport& r, std::ostream& os) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,", r.mae, r.dme);
    os << "mae,dme,num_test_ratings\n" << buf << r.num_test_ratings << '\n';
}

} // namespace mfreg

#endif
