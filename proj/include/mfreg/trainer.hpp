#ifndef MFREG_TRAINER_HPP
#define MFREG_TRAINER_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mfreg/dataset.hpp"
#include "mfreg/errors.hpp"
#include "mfreg/gradients.hpp"
#include "mfreg/model.hpp"
#include "mfreg/rng.hpp"

namespace mfreg {

struct TrainResult {
    FactorModel model;
    std::vector<LossBreakdown> trace; // total_loss after each epoch
    std::size_t epochs_run = 0;
    bool converged = false;
};

// Test instrumentation. Counters tally the updates actually applied; the
// freeze flags hold one parameter group fixed so the other's dynamics can be
// observed in isolation.
struct TrainHooks {
    std::uint64_t feature_update_pairs = 0; // one per visited rating (u_i, v_j)
    std::uint64_t reg_updates = 0;          // one per visited rating under vector_dot
    bool freeze_features = false;
    bool freeze_reg = false;
    std::function<void(const FactorModel&, const Observation&)> after_update;
};

// U, V entries i.i.d. uniform on [-s, +s] with s = feature_init_scale();
// under vector_dot, every entry of B and G starts at init_reg_value.
// Bitwise deterministic given (seed, M, N, k, framework).
inline FactorModel init_model(const Hyperparams& h, std::size_t M, std::size_t N,
                              RegularizationFramework framework) {
    if (h.k < 1) throw contract_error("init_model: k must be >= 1");
    if (framework.kind == FrameworkKind::per_vector_scalar &&
        (framework.user_coeffs.size() != M || framework.item_coeffs.size() != N))
        throw contract_error("init_model: per-vector coefficient counts do not match dims");

    FactorModel m;
    m.k = h.k;
    m.framework = std::move(framework);
    m.U = Matrix(M, h.k);
    m.V = Matrix(N, h.k);

    const double s = h.feature_init_scale();
    Rng rng(h.seed);
    for (double& x : m.U.values()) x = rng.uniform(-s, s);
    for (double& x : m.V.values()) x = rng.uniform(-s, s);

    if (m.framework.kind == FrameworkKind::vector_dot) {
        m.B = Matrix(M, h.k, h.init_reg_value);
        m.G = Matrix(N, h.k, h.init_reg_value);
    }
    return m;
}

namespace detail {

inline void check_train_args(const RatingsDataset& data, const Hyperparams& h) {
    if (data.empty()) throw contract_error("train: dataset has no observations");
    if (h.k < 1) throw contract_error("train: k must be >= 1");
    if (h.epochs < 1) throw contract_error("train: epochs must be >= 1");
    if (!(h.eta_feat >= 0.0) || !(h.eta_reg >= 0.0))
        throw contract_error("train: learning rates must be nonnegative");
    if (!(h.early_stop_tol >= 0.0)) throw contract_error("train: early_stop_tol must be >= 0");
}

// One SGD epoch: visit every observation once in `order`. All four updates
// for a rating are evaluated at the same pre-update parameter snapshot. The
// penalty gradients are scaled by 1/|Omega| so that a full epoch applies each
// per-row penalty gradient with total weight 1.
inline void sgd_epoch(FactorModel& m, const RatingsDataset& data, const Hyperparams& h,
                      const std::vector<std::size_t>& order, TrainHooks* hooks) {
    const std::size_t k = m.k;
    std::vector<double> du(k), dv(k), u_old(k), v_old(k);

    for (std::size_t n : order) {
        const Observation& o = data.observations()[n];
        auto u = m.U.row(o.user);
        auto v = m.V.row(o.item);
        u_old.assign(u.begin(), u.end());
        v_old.assign(v.begin(), v.end());

        const double inv_du = 1.0 / static_cast<double>(data.user_degree(o.user));
        const double inv_dv = 1.0 / static_cast<double>(data.item_degree(o.item));
        const double r2 = 2.0 * (dot(u, v) - o.rating);

        if (!hooks || !hooks->freeze_features) {
            std::fill(du.begin(), du.end(), 0.0);
            std::fill(dv.begin(), dv.end(), 0.0);
            axpy(r2, v_old, du);
            accumulate_grad_u_penalty(m, o.user, inv_du, du);
            axpy(r2, u_old, dv);
            accumulate_grad_v_penalty(m, o.item, inv_dv, dv);
            axpy(-h.eta_feat, du, u);
            axpy(-h.eta_feat, dv, v);
            if (hooks) ++hooks->feature_update_pairs;
        }

        if (m.framework.kind == FrameworkKind::vector_dot && (!hooks || !hooks->freeze_reg)) {
            int sb = sign(dot(u_old, m.B.row(o.user)));
            if (sb != 0) axpy(-h.eta_reg * sb * inv_du, u_old, m.B.row(o.user));
            int sg = sign(dot(v_old, m.G.row(o.item)));
            if (sg != 0) axpy(-h.eta_reg * sg * inv_dv, v_old, m.G.row(o.item));
            if (hooks) ++hooks->reg_updates;
        }

        if (hooks && hooks->after_update) hooks->after_update(m, o);
    }
}

inline void batch_epoch(FactorModel& m, const RatingsDataset& data, const Hyperparams& h,
                        TrainHooks* hooks) {
    GradientSet g = full_gradient(m, data);
    if (!hooks || !hooks->freeze_features) {
        for (std::size_t i = 0; i < m.U.values().size(); ++i)
            m.U.values()[i] -= h.eta_feat * g.dU.values()[i];
        for (std::size_t i = 0; i < m.V.values().size(); ++i)
            m.V.values()[i] -= h.eta_feat * g.dV.values()[i];
        if (hooks) hooks->feature_update_pairs += data.size();
    }
    if (m.framework.kind == FrameworkKind::vector_dot && (!hooks || !hooks->freeze_reg)) {
        for (std::size_t i = 0; i < m.B.values().size(); ++i)
            m.B.values()[i] -= h.eta_reg * g.dB.values()[i];
        for (std::size_t i = 0; i < m.G.values().size(); ++i)
            m.G.values()[i] -= h.eta_reg * g.dG.values()[i];
        if (hooks) hooks->reg_updates += data.size();
    }
}

} // namespace detail

// Gradient-descent training, stochastic per-rating or full-batch. Records
// total_loss after every epoch, stops early when the relative total change
// drops below early_stop_tol, and throws divergence_error (naming the epoch)
// as soon as any parameter goes non-finite.
inline TrainResult train(const RatingsDataset& data, const Hyperparams& h,
                         RegularizationFramework framework, TrainHooks* hooks = nullptr) {
    detail::check_train_args(data, h);

    TrainResult res;
    res.model = init_model(h, data.num_users(), data.num_items(), std::move(framework));

    // The shuffle stream is decoupled from the init stream so that both are
    // individually reproducible.
    Rng order_rng(h.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(data.size());
    for (std::size_t n = 0; n < order.size(); ++n) order[n] = n;

    for (std::size_t epoch = 1; epoch <= h.epochs; ++epoch) {
        if (h.mode == TrainMode::sgd) {
            order_rng.shuffle(order);
            detail::sgd_epoch(res.model, data, h, order, hooks);
        } else {
            detail::batch_epoch(res.model, data, h, hooks);
        }

        if (!res.model.all_finite())
            throw divergence_error(epoch, "training diverged at epoch " + std::to_string(epoch) +
                                              ": non-finite parameter");
        LossBreakdown lb = total_loss(res.model, data);
        if (!std::isfinite(lb.total))
            throw divergence_error(epoch, "training diverged at epoch " + std::to_string(epoch) +
                                              ": non-finite loss");
        res.trace.push_back(lb);

        if (res.trace.size() >= 2) {
            double prev = res.trace[res.trace.size() - 2].total;
            if (std::abs(lb.total - prev) < h.early_stop_tol * std::max(1.0, prev)) {
                res.converged = true;
                break;
            }
        }
    }
    res.epochs_run = res.trace.size();
    return res;
}

} // namespace mfreg

#endif
