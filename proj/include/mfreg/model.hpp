#ifndef MFREG_MODEL_HPP
#define MFREG_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfreg/dataset.hpp"
#include "mfreg/errors.hpp"
#include "mfreg/matrix.hpp"

namespace mfreg {

enum class FrameworkKind {
    none,              // no penalty
    global_scalar,     // beta * (sum ||u_i|| + sum ||v_j||)
    per_vector_scalar, // sum beta_i ||u_i|| + sum gamma_j ||v_j||
    vector_dot,        // sum |beta_i . u_i| + sum |gamma_j . v_j|
};

inline const char* framework_name(FrameworkKind f) {
    switch (f) {
        case FrameworkKind::none: return "none";
        case FrameworkKind::global_scalar: return "global_scalar";
        case FrameworkKind::per_vector_scalar: return "per_vector_scalar";
        case FrameworkKind::vector_dot: return "vector_dot";
    }
    return "?";
}

inline std::optional<FrameworkKind> framework_from_name(std::string_view s) {
    if (s == "none") return FrameworkKind::none;
    if (s == "global_scalar") return FrameworkKind::global_scalar;
    if (s == "per_vector_scalar") return FrameworkKind::per_vector_scalar;
    if (s == "vector_dot") return FrameworkKind::vector_dot;
    return std::nullopt;
}

// Tagged penalty choice. Scalar coefficients live here; the vector_dot
// coefficients are model parameters and live in FactorModel::B/G.
struct RegularizationFramework {
    FrameworkKind kind = FrameworkKind::none;
    double beta = 0.0;                     // global_scalar
    std::vector<double> user_coeffs;       // per_vector_scalar, size M
    std::vector<double> item_coeffs;       // per_vector_scalar, size N

    static RegularizationFramework none() { return {}; }

    static RegularizationFramework global_scalar(double beta) {
        if (!(beta >= 0.0))
            throw contract_error("global_scalar beta must be nonnegative");
        RegularizationFramework f;
        f.kind = FrameworkKind::global_scalar;
        f.beta = beta;
        return f;
    }

    static RegularizationFramework per_vector_scalar(std::vector<double> user_coeffs,
                                                     std::vector<double> item_coeffs) {
        for (double b : user_coeffs)
            if (!(b >= 0.0)) throw contract_error("per-user coefficient must be nonnegative");
        for (double g : item_coeffs)
            if (!(g >= 0.0)) throw contract_error("per-item coefficient must be nonnegative");
        RegularizationFramework f;
        f.kind = FrameworkKind::per_vector_scalar;
        f.user_coeffs = std::move(user_coeffs);
        f.item_coeffs = std::move(item_coeffs);
        return f;
    }

    // All coefficients equal; convenience for grid sweeps.
    static RegularizationFramework per_vector_scalar_constant(std::size_t M, std::size_t N,
                                                              double value) {
        return per_vector_scalar(std::vector<double>(M, value), std::vector<double>(N, value));
    }

    static RegularizationFramework vector_dot() {
        RegularizationFramework f;
        f.kind = FrameworkKind::vector_dot;
        return f;
    }
};

enum class TrainMode { sgd, batch_gd };

inline const char* train_mode_name(TrainMode m) {
    return m == TrainMode::sgd ? "sgd" : "batch_gd";
}

inline std::optional<TrainMode> train_mode_from_name(std::string_view s) {
    if (s == "sgd") return TrainMode::sgd;
    if (s == "batch_gd" || s == "batch") return TrainMode::batch_gd;
    return std::nullopt;
}

struct Hyperparams {
    std::size_t k = 10;            // latent dimension
    double eta_feat = 0.01;        // learning rate for U, V
    double eta_reg = 0.01;         // learning rate for B, G
    std::size_t epochs = 200;
    std::uint64_t seed = 42;
    double init_scale_feat = -1.0; // negative = default 1/sqrt(k)
    double init_reg_value = 0.01;  // initial entry of B, G under vector_dot
    bool clamp_predictions = true;
    TrainMode mode = TrainMode::sgd;
    double early_stop_tol = 1e-5;  // relative total-loss change

    double feature_init_scale() const {
        return init_scale_feat >= 0.0 ? init_scale_feat
                                      : 1.0 / std::sqrt(static_cast<double>(k));
    }

    // Configuration-time validation (CLI / config files). The trainer itself
    // accepts eta_feat = 0 so that zero-step behavior stays testable.
    void validate() const {
        if (k < 1) throw contract_error("k must be >= 1");
        if (!(eta_feat > 0.0)) throw contract_error("eta_feat must be > 0");
        if (!(eta_reg >= 0.0)) throw contract_error("eta_reg must be >= 0");
        if (epochs < 1) throw contract_error("epochs must be >= 1");
        if (!(early_stop_tol >= 0.0)) throw contract_error("early_stop_tol must be >= 0");
        if (!std::isfinite(eta_feat) || !std::isfinite(eta_reg) ||
            !std::isfinite(init_reg_value) || !std::isfinite(feature_init_scale()))
            throw contract_error("hyperparameters must be finite");
    }
};

// Factor matrices plus the active penalty. B and G are present exactly when
// the framework is vector_dot.
struct FactorModel {
    Matrix U; // M x k
    Matrix V; // N x k
    Matrix B; // M x k, vector_dot only
    Matrix G; // N x k, vector_dot only
    RegularizationFramework framework;
    std::size_t k = 0;

    std::size_t num_users() const { return U.rows(); }
    std::size_t num_items() const { return V.rows(); }

    bool all_finite() const {
        return U.all_finite() && V.all_finite() && B.all_finite() && G.all_finite();
    }
};

struct LossBreakdown {
    double fit = 0.0;
    double penalty = 0.0;
    double total = 0.0;
};

inline void check_dims(const FactorModel& m, const RatingsDataset& d) {
    if (m.U.rows() != d.num_users() || m.V.rows() != d.num_items())
        throw contract_error("model dimensions do not match dataset");
    if (m.U.cols() != m.k || m.V.cols() != m.k)
        throw contract_error("factor matrices disagree on latent dimension");
}

// Unclamped u_i . v_j. Clamping to the rating scale is a metric-layer choice.
inline double predict(const FactorModel& m, std::size_t i, std::size_t j) {
    if (i >= m.U.rows())
        throw contract_error("predict: user index " + std::to_string(i) + " out of range");
    if (j >= m.V.rows())
        throw contract_error("predict: item index " + std::to_string(j) + " out of range");
    return dot(m.U.row(i), m.V.row(j));
}

inline double clamp_rating(double x, double r_min, double r_max) {
    if (x < r_min) return r_min;
    if (x > r_max) return r_max;
    return x;
}

inline double penalty(const FactorModel& m) {
    switch (m.framework.kind) {
        case FrameworkKind::none:
            return 0.0;
        case FrameworkKind::global_scalar: {
            double s = 0.0;
            for (std::size_t i = 0; i < m.U.rows(); ++i) s += norm2(m.U.row(i));
            for (std::size_t j = 0; j < m.V.rows(); ++j) s += norm2(m.V.row(j));
            return m.framework.beta * s;
        }
        case FrameworkKind::per_vector_scalar: {
            if (m.framework.user_coeffs.size() != m.U.rows() ||
                m.framework.item_coeffs.size() != m.V.rows())
                throw contract_error("per-vector coefficient counts do not match model");
            double s = 0.0;
            for (std::size_t i = 0; i < m.U.rows(); ++i)
                s += m.framework.user_coeffs[i] * norm2(m.U.row(i));
            for (std::size_t j = 0; j < m.V.rows(); ++j)
                s += m.framework.item_coeffs[j] * norm2(m.V.row(j));
            return s;
        }
        case FrameworkKind::vector_dot: {
            if (m.B.rows() != m.U.rows() || m.G.rows() != m.V.rows())
                throw contract_error("vector_dot model is missing B or G");
            double s = 0.0;
            for (std::size_t i = 0; i < m.U.rows(); ++i)
                s += std::abs(dot(m.B.row(i), m.U.row(i)));
            for (std::size_t j = 0; j < m.V.rows(); ++j)
                s += std::abs(dot(m.G.row(j), m.V.row(j)));
            return s;
        }
    }
    return 0.0;
}

// fit = sum over observed (i,j) of (R_ij - u_i.v_j)^2, penalty per framework.
inline LossBreakdown total_loss(const FactorModel& m, const RatingsDataset& d) {
    check_dims(m, d);
    LossBreakdown out;
    for (const Observation& o : d.observations()) {
        double r = o.rating - dot(m.U.row(o.user), m.V.row(o.item));
        out.fit += r * r;
    }
    out.penalty = penalty(m);
    out.total = out.fit + out.penalty;
    return out;
}

} // namespace mfreg

#endif
