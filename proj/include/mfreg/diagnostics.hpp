#ifndef MFREG_DIAGNOSTICS_HPP
#define MFREG_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "mfreg/dataset.hpp"
#include "mfreg/errors.hpp"
#include "mfreg/gradients.hpp"
#include "mfreg/model.hpp"

namespace mfreg {

// Users whose stationarity equation is singular (zero-norm feature vector or
// no observations) are excluded from spread reports and counted here.
constexpr double kSpreadNormFloor = 1e-12;

struct SpreadReport {
    std::vector<std::size_t> users;  // eligible user indices, ascending
    std::vector<double> values;      // implied coefficient per eligible user
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double std_dev = 0.0;
    double coefficient_of_variation = 0.0; // std/|mean|; meaningless when !cv_defined
    bool cv_defined = false;
    std::size_t num_users = 0;    // eligible count == values.size()
    std::size_t num_excluded = 0; // singular users skipped
};

// The coefficient value that would make user i's stationarity equation hold
// exactly:  -(1/||u_i||) * sum_{j in Omega_i} 2 (R_ij - u_i.v_j) (u_i.v_j).
// paper_literal_sign flips the leading sign to reproduce the positive form
// of the printed derivation.
inline double implied_beta(const FactorModel& m, const RatingsDataset& d, std::size_t i,
                           bool paper_literal_sign = false) {
    check_dims(m, d);
    if (i >= d.num_users()) throw contract_error("implied_beta: user index out of range");
    if (d.user_degree(i) == 0)
        throw contract_error("implied_beta: user " + std::to_string(i) + " has no observations");
    auto u = m.U.row(i);
    double n = norm2(u);
    if (n == 0.0)
        throw singularity_error("implied_beta: ||u_" + std::to_string(i) + "|| = 0");

    double s = 0.0;
    for (std::size_t idx : d.user_observations(i)) {
        const Observation& o = d.observations()[idx];
        double p = dot(u, m.V.row(o.item));
        s += 2.0 * (o.rating - p) * p;
    }
    double value = s / n;
    return paper_literal_sign ? value : -value;
}

// One implied coefficient per eligible user, with spread statistics. The
// spread quantifies how inconsistent the M single-user solutions are: a
// strictly positive std means no constant coefficient satisfies them all.
inline SpreadReport implied_beta_spread(const FactorModel& m, const RatingsDataset& d,
                                        bool paper_literal_sign = false) {
    check_dims(m, d);
    SpreadReport r;
    for (std::size_t i = 0; i < d.num_users(); ++i) {
        if (d.user_degree(i) == 0 || norm2(m.U.row(i)) <= kSpreadNormFloor) {
            ++r.num_excluded;
            continue;
        }
        r.users.push_back(i);
        r.values.push_back(implied_beta(m, d, i, paper_literal_sign));
    }
    r.num_users = r.values.size();
    if (r.num_users < 2)
        throw insufficient_data_error("implied_beta_spread: fewer than 2 eligible users (" +
                                      std::to_string(r.num_users) + ")");

    r.min = *std::min_element(r.values.begin(), r.values.end());
    r.max = *std::max_element(r.values.begin(), r.values.end());
    if (r.min == r.max) {
        // All values equal: report exactly zero spread instead of the
        // rounding dust the mean-based formula would produce.
        r.mean = r.min;
        r.std_dev = 0.0;
    } else {
        double sum = 0.0;
        for (double v : r.values) sum += v;
        r.mean = sum / static_cast<double>(r.num_users);
        double ss = 0.0;
        for (double v : r.values) ss += (v - r.mean) * (v - r.mean);
        r.std_dev = std::sqrt(ss / static_cast<double>(r.num_users));
    }
    r.cv_defined = r.mean != 0.0;
    r.coefficient_of_variation = r.cv_defined ? r.std_dev / std::abs(r.mean) : 0.0;
    return r;
}

// The squared-norm identity for user i's regularization vector under
// vector_dot:  sum_{j in Omega_i} 2 (R_ij - u_i.v_j) (beta_i.v_j) / sign(u_i.beta_i).
// Its gap from the actual ||beta_i||^2 measures how far the model is from
// the stationarity condition in u_i.
inline double implied_beta_norm_sq(const FactorModel& m, const RatingsDataset& d, std::size_t i) {
    if (m.framework.kind != FrameworkKind::vector_dot)
        throw contract_error("implied_beta_norm_sq requires the vector_dot framework");
    check_dims(m, d);
    if (i >= d.num_users()) throw contract_error("implied_beta_norm_sq: user index out of range");
    auto u = m.U.row(i);
    auto b = m.B.row(i);
    int s0 = sign(dot(u, b));
    if (s0 == 0)
        throw singularity_error("implied_beta_norm_sq: sign(u_" + std::to_string(i) +
                                " . beta) = 0");
    double s = 0.0;
    for (std::size_t idx : d.user_observations(i)) {
        const Observation& o = d.observations()[idx];
        auto v = m.V.row(o.item);
        s += 2.0 * (o.rating - dot(u, v)) * dot(b, v);
    }
    return s / static_cast<double>(s0);
}

// The plug-in reading of the implied coefficient: use each user's solved
// value as their per_vector_scalar coefficient. Negative solutions clamp to
// zero (coefficients are nonnegative by construction); singular users get
// zero. The item side has no derived counterpart, so item coefficients are
// zero unless a fill value is supplied.
inline RegularizationFramework implied_per_vector_scalar(const FactorModel& m,
                                                         const RatingsDataset& d,
                                                         double item_coeff_fill = 0.0) {
    check_dims(m, d);
    std::vector<double> user_coeffs(d.num_users(), 0.0);
    for (std::size_t i = 0; i < d.num_users(); ++i) {
        if (d.user_degree(i) == 0 || norm2(m.U.row(i)) <= kSpreadNormFloor) continue;
        user_coeffs[i] = std::max(0.0, implied_beta(m, d, i));
    }
    return RegularizationFramework::per_vector_scalar(
        std::move(user_coeffs), std::vector<double>(d.num_items(), item_coeff_fill));
}

// Flat CSV: one row per eligible user plus a trailing summary line.
inline void write_spread_csv(const SpreadReport& r, std::ostream& os) {
    char buf[64];
    os << "user_index,implied_beta\n";
    for (std::size_t n = 0; n < r.values.size(); ++n) {
        std::snprintf(buf, sizeof(buf), "%.17g", r.values[n]);
        os << r.users[n] << ',' << buf << '\n';
    }
    os << "# summary: num_users=" << r.num_users << " excluded=" << r.num_excluded;
    std::snprintf(buf, sizeof(buf), " min=%.17g", r.min);
    os << buf;
    std::snprintf(buf, sizeof(buf), " max=%.17g", r.max);
    os << buf;
    std::snprintf(buf, sizeof(buf), " mean=%.17g", r.mean);
    os << buf;
    std::snprintf(buf, sizeof(buf), " std=%.17g", r.std_dev);
    os << buf;
    if (r.cv_defined) {
        std::snprintf(buf, sizeof(buf), " cv=%.17g", r.coefficient_of_variation);
        os << buf;
    } else {
        os << " cv=undefined";
    }
    os << '\n';
}

} // namespace mfreg

#endif
