#ifndef MFREG_GRADIENTS_HPP
#define MFREG_GRADIENTS_HPP

#include <span>
#include <vector>

#include "mfreg/dataset.hpp"
#include "mfreg/errors.hpp"
#include "mfreg/matrix.hpp"
#include "mfreg/model.hpp"

namespace mfreg {

// Exact subgradient convention: sign(0) = 0, so updates at a kink are no-ops
// and the norm gradient at the origin is the zero vector.
inline int sign(double x) {
    if (x < 0.0) return -1;
    if (x > 0.0) return 1;
    return 0;
}

struct GradientSet {
    Matrix dU; // M x k
    Matrix dV; // N x k
    Matrix dB; // M x k, vector_dot only
    Matrix dG; // N x k, vector_dot only
};

namespace detail {

// out += scale * d(penalty)/d(row), where row is U.row(i) or V.row(j) and the
// matching coefficients are coeff_row (B.row(i) / G.row(j)) or the scalar.
inline void add_norm_penalty_grad(std::span<const double> row, double coeff, double scale,
                                  std::span<double> out) {
    double n = norm2(row);
    if (n == 0.0) return; // subgradient 0 at the origin
    axpy(scale * coeff / n, row, out);
}

inline void add_abs_dot_penalty_grad(std::span<const double> row, std::span<const double> coeff_row,
                                     double scale, std::span<double> out) {
    int s = sign(dot(row, coeff_row));
    if (s == 0) return;
    axpy(scale * s, coeff_row, out);
}

} // namespace detail

// out += scale * d(penalty)/d(u_i)
inline void accumulate_grad_u_penalty(const FactorModel& m, std::size_t i, double scale,
                                      std::span<double> out) {
    switch (m.framework.kind) {
        case FrameworkKind::none:
            break;
        case FrameworkKind::global_scalar:
            detail::add_norm_penalty_grad(m.U.row(i), m.framework.beta, scale, out);
            break;
        case FrameworkKind::per_vector_scalar:
            detail::add_norm_penalty_grad(m.U.row(i), m.framework.user_coeffs[i], scale, out);
            break;
        case FrameworkKind::vector_dot:
            detail::add_abs_dot_penalty_grad(m.U.row(i), m.B.row(i), scale, out);
            break;
    }
}

// out += scale * d(penalty)/d(v_j)
inline void accumulate_grad_v_penalty(const FactorModel& m, std::size_t j, double scale,
                                      std::span<double> out) {
    switch (m.framework.kind) {
        case FrameworkKind::none:
            break;
        case FrameworkKind::global_scalar:
            detail::add_norm_penalty_grad(m.V.row(j), m.framework.beta, scale, out);
            break;
        case FrameworkKind::per_vector_scalar:
            detail::add_norm_penalty_grad(m.V.row(j), m.framework.item_coeffs[j], scale, out);
            break;
        case FrameworkKind::vector_dot:
            detail::add_abs_dot_penalty_grad(m.V.row(j), m.G.row(j), scale, out);
            break;
    }
}

inline std::vector<double> grad_u_penalty(const FactorModel& m, std::size_t i) {
    if (i >= m.U.rows()) throw contract_error("grad_u_penalty: user index out of range");
    std::vector<double> out(m.k, 0.0);
    accumulate_grad_u_penalty(m, i, 1.0, out);
    return out;
}

inline std::vector<double> grad_v_penalty(const FactorModel& m, std::size_t j) {
    if (j >= m.V.rows()) throw contract_error("grad_v_penalty: item index out of range");
    std::vector<double> out(m.k, 0.0);
    accumulate_grad_v_penalty(m, j, 1.0, out);
    return out;
}

// sign(u_i . beta_i) * u_i
inline std::vector<double> grad_beta(const FactorModel& m, std::size_t i) {
    if (m.framework.kind != FrameworkKind::vector_dot)
        throw contract_error("grad_beta requires the vector_dot framework");
    if (i >= m.U.rows()) throw contract_error("grad_beta: user index out of range");
    std::vector<double> out(m.k, 0.0);
    int s = sign(dot(m.U.row(i), m.B.row(i)));
    if (s != 0) axpy(static_cast<double>(s), m.U.row(i), out);
    return out;
}

// sign(v_j . gamma_j) * v_j
inline std::vector<double> grad_gamma(const FactorModel& m, std::size_t j) {
    if (m.framework.kind != FrameworkKind::vector_dot)
        throw contract_error("grad_gamma requires the vector_dot framework");
    if (j >= m.V.rows()) throw contract_error("grad_gamma: item index out of range");
    std::vector<double> out(m.k, 0.0);
    int s = sign(dot(m.V.row(j), m.G.row(j)));
    if (s != 0) axpy(static_cast<double>(s), m.V.row(j), out);
    return out;
}

// Full-batch gradient of total_loss. Row i of dU is
//   sum_{j in Omega_i} 2 (u_i.v_j - R_ij) v_j + d(penalty)/d(u_i),
// and symmetrically for dV; dB/dG exist only under vector_dot.
inline GradientSet full_gradient(const FactorModel& m, const RatingsDataset& d) {
    check_dims(m, d);
    GradientSet g;
    g.dU = Matrix(m.U.rows(), m.k);
    g.dV = Matrix(m.V.rows(), m.k);

    for (const Observation& o : d.observations()) {
        auto u = m.U.row(o.user);
        auto v = m.V.row(o.item);
        double r2 = 2.0 * (dot(u, v) - o.rating);
        axpy(r2, v, g.dU.row(o.user));
        axpy(r2, u, g.dV.row(o.item));
    }
    for (std::size_t i = 0; i < m.U.rows(); ++i)
        accumulate_grad_u_penalty(m, i, 1.0, g.dU.row(i));
    for (std::size_t j = 0; j < m.V.rows(); ++j)
        accumulate_grad_v_penalty(m, j, 1.0, g.dV.row(j));

    if (m.framework.kind == FrameworkKind::vector_dot) {
        g.dB = Matrix(m.U.rows(), m.k);
        g.dG = Matrix(m.V.rows(), m.k);
        for (std::size_t i = 0; i < m.U.rows(); ++i) {
            int s = sign(dot(m.U.row(i), m.B.row(i)));
            if (s != 0) axpy(static_cast<double>(s), m.U.row(i), g.dB.row(i));
        }
        for (std::size_t j = 0; j < m.V.rows(); ++j) {
            int s = sign(dot(m.V.row(j), m.G.row(j)));
            if (s != 0) axpy(static_cast<double>(s), m.V.row(j), g.dG.row(j));
        }
    }
    return g;
}

} // namespace mfreg

#endif
