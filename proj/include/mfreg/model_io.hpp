#ifndef MFREG_MODEL_IO_HPP
#define MFREG_MODEL_IO_HPP

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "mfreg/data_io.hpp"
#include "mfreg/errors.hpp"
#include "mfreg/model.hpp"

namespace mfreg {

// Flat text model format: a short header (dims, framework, scalar
// coefficients) followed by row-major matrices in decimal. Diffable and
// portable; %.17g round-trips doubles exactly.
//
//   mfreg-model 1
//   framework vector_dot
//   dims M N k
//   U
//   <M lines of k numbers>
//   V
//   ...
//   B        (vector_dot only)
//   G        (vector_dot only)

namespace detail {

inline void write_matrix(std::ostream& os, const Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto row = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) os << ' ';
            os << fmt_double(row[j]);
        }
        os << '\n';
    }
}

inline Matrix read_matrix(std::istream& in, std::size_t rows, std::size_t cols,
                          const char* what) {
    Matrix m(rows, cols);
    std::string line;
    for (std::size_t i = 0; i < rows; ++i) {
        if (!std::getline(in, line))
            throw parse_error(0, std::string("model file: truncated ") + what + " matrix");
        std::istringstream ls(line);
        for (std::size_t j = 0; j < cols; ++j) {
            if (!(ls >> m(i, j)))
                throw parse_error(0, std::string("model file: malformed ") + what + " row " +
                                         std::to_string(i));
        }
    }
    return m;
}

inline std::string expect_line(std::istream& in, const char* what) {
    std::string line;
    if (!std::getline(in, line))
        throw parse_error(0, std::string("model file: missing ") + what);
    return std::string(trim(line));
}

} // namespace detail

inline void save_model(const FactorModel& m, std::ostream& os) {
    os << "mfreg-model 1\n";
    os << "framework " << framework_name(m.framework.kind) << '\n';
    os << "dims " << m.U.rows() << ' ' << m.V.rows() << ' ' << m.k << '\n';
    if (m.framework.kind == FrameworkKind::global_scalar)
        os << "beta " << detail::fmt_double(m.framework.beta) << '\n';
    if (m.framework.kind == FrameworkKind::per_vector_scalar) {
        os << "user_coeffs\n";
        for (std::size_t i = 0; i < m.framework.user_coeffs.size(); ++i) {
            if (i) os << ' ';
            os << detail::fmt_double(m.framework.user_coeffs[i]);
        }
        os << '\n' << "item_coeffs\n";
        for (std::size_t j = 0; j < m.framework.item_coeffs.size(); ++j) {
            if (j) os << ' ';
            os << detail::fmt_double(m.framework.item_coeffs[j]);
        }
        os << '\n';
    }
    os << "U\n";
    detail::write_matrix(os, m.U);
    os << "V\n";
    detail::write_matrix(os, m.V);
    if (m.framework.kind == FrameworkKind::vector_dot) {
        os << "B\n";
        detail::write_matrix(os, m.B);
        os << "G\n";
        detail::write_matrix(os, m.G);
    }
}

inline void save_model(const FactorModel& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot write model: " + path);
    save_model(m, os);
}

inline FactorModel load_model(std::istream& in) {
    if (detail::expect_line(in, "magic") != "mfreg-model 1")
        throw parse_error(1, "model file: bad magic (expected 'mfreg-model 1')");

    std::string fw_line = detail::expect_line(in, "framework");
    if (fw_line.rfind("framework ", 0) != 0)
        throw parse_error(2, "model file: missing framework line");
    auto kind = framework_from_name(fw_line.substr(10));
    if (!kind) throw parse_error(2, "model file: unknown framework '" + fw_line.substr(10) + "'");

    std::string dims_line = detail::expect_line(in, "dims");
    std::istringstream ds(dims_line);
    std::string tag;
    std::size_t M = 0, N = 0, k = 0;
    if (!(ds >> tag >> M >> N >> k) || tag != "dims")
        throw parse_error(3, "model file: malformed dims line");
    if (k < 1) throw parse_error(3, "model file: k must be >= 1");

    FactorModel m;
    m.k = k;
    switch (*kind) {
        case FrameworkKind::none:
            m.framework = RegularizationFramework::none();
            break;
        case FrameworkKind::global_scalar: {
            std::string beta_line = detail::expect_line(in, "beta");
            std::istringstream bs(beta_line);
            double beta = 0.0;
            if (!(bs >> tag >> beta) || tag != "beta")
                throw parse_error(0, "model file: malformed beta line");
            m.framework = RegularizationFramework::global_scalar(beta);
            break;
        }
        case FrameworkKind::per_vector_scalar: {
            if (detail::expect_line(in, "user_coeffs") != "user_coeffs")
                throw parse_error(0, "model file: missing user_coeffs");
            Matrix uc = detail::read_matrix(in, 1, M, "user_coeffs");
            if (detail::expect_line(in, "item_coeffs") != "item_coeffs")
                throw parse_error(0, "model file: missing item_coeffs");
            Matrix ic = detail::read_matrix(in, 1, N, "item_coeffs");
            m.framework = RegularizationFramework::per_vector_scalar(uc.values(), ic.values());
            break;
        }
        case FrameworkKind::vector_dot:
            m.framework = RegularizationFramework::vector_dot();
            break;
    }

    if (detail::expect_line(in, "U section") != "U")
        throw parse_error(0, "model file: missing U section");
    m.U = detail::read_matrix(in, M, k, "U");
    if (detail::expect_line(in, "V section") != "V")
        throw parse_error(0, "model file: missing V section");
    m.V = detail::read_matrix(in, N, k, "V");
    if (*kind == FrameworkKind::vector_dot) {
        if (detail::expect_line(in, "B section") != "B")
            throw parse_error(0, "model file: missing B section");
        m.B = detail::read_matrix(in, M, k, "B");
        if (detail::expect_line(in, "G section") != "G")
            throw parse_error(0, "model file: missing G section");
        m.G = detail::read_matrix(in, N, k, "G");
    }
    return m;
}

inline FactorModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open model: " + path);
    return load_model(in);
}

} // namespace mfreg

#endif
