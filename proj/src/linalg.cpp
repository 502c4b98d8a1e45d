#include "berlin/linalg.hpp"

#include <cmath>
#include <string>

namespace berlin::linalg {

namespace {

void check_dims(std::size_t a, std::size_t b, const char* op) {
    if (a != b) {
        throw DimensionError(std::string(op) + ": dimension mismatch (" +
                             std::to_string(a) + " vs " + std::to_string(b) + ")");
    }
}

}  // namespace

double dot(const Vector& a, const Vector& b) {
    check_dims(a.size(), b.size(), "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Vector mat_vec(const SymMatrix& m, const Vector& x) {
    check_dims(m.dim(), x.size(), "mat_vec");
    const std::size_t d = m.dim();
    Vector y(d, 0.0);
    const double* p = m.data();
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        const double* row = p + i * d;
        for (std::size_t j = 0; j < d; ++j) s += row[j] * x[j];
        y[i] = s;
    }
    return y;
}

void rank1_add_inplace(SymMatrix& a, const Vector& x) {
    check_dims(a.dim(), x.size(), "rank1_add");
    const std::size_t d = a.dim();
    double* p = a.data();
    for (std::size_t i = 0; i < d; ++i) {
        const double xi = x[i];
        double* row = p + i * d;
        for (std::size_t j = 0; j < d; ++j) row[j] += xi * x[j];
    }
    a.symmetrize();
}

SymMatrix rank1_add(const SymMatrix& a, const Vector& x) {
    SymMatrix out = a;
    rank1_add_inplace(out, x);
    return out;
}

void sherman_morrison_inplace(SymMatrix& a_inv, const Vector& x) {
    check_dims(a_inv.dim(), x.size(), "sherman_morrison");
    const std::size_t d = a_inv.dim();
    const Vector u = mat_vec(a_inv, x);
    const double denom = 1.0 + dot(x, u);
    if (denom <= 1e-12) {
        throw NumericalError("sherman_morrison: denominator " +
                             std::to_string(denom) +
                             " below tolerance; SPD state corrupted");
    }
    double* p = a_inv.data();
    for (std::size_t i = 0; i < d; ++i) {
        const double ui = u[i] / denom;
        double* row = p + i * d;
        for (std::size_t j = 0; j < d; ++j) row[j] -= ui * u[j];
    }
    a_inv.symmetrize();
}

SymMatrix sherman_morrison(const SymMatrix& a_inv, const Vector& x) {
    SymMatrix out = a_inv;
    sherman_morrison_inplace(out, x);
    return out;
}

double quad_form(const SymMatrix& a_inv, const Vector& x) {
    check_dims(a_inv.dim(), x.size(), "quad_form");
    const double q = dot(x, mat_vec(a_inv, x));
    if (q < -1e-9) {
        throw NumericalError("quad_form: negative value " + std::to_string(q));
    }
    return q < 0.0 ? 0.0 : q;
}

Vector solve_theta(const SymMatrix& a_inv, const Vector& b) {
    check_dims(a_inv.dim(), b.size(), "solve_theta");
    return mat_vec(a_inv, b);
}

SymMatrix cholesky_inverse(const SymMatrix& a) {
    const std::size_t d = a.dim();
    // Lower-triangular factor A = L L^T.
    std::vector<double> l(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a.at(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l[i * d + k] * l[j * d + k];
            if (i == j) {
                if (s <= 0.0) {
                    throw NumericalError(
                        "cholesky_inverse: matrix not positive definite (pivot " +
                        std::to_string(s) + " at " + std::to_string(i) + ")");
                }
                l[i * d + i] = std::sqrt(s);
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    // Invert L in place (forward substitution on columns of I).
    std::vector<double> linv(d * d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        linv[j * d + j] = 1.0 / l[j * d + j];
        for (std::size_t i = j + 1; i < d; ++i) {
            double s = 0.0;
            for (std::size_t k = j; k < i; ++k) s -= l[i * d + k] * linv[k * d + j];
            linv[i * d + j] = s / l[i * d + i];
        }
    }
    // A^{-1} = L^{-T} L^{-1}
    SymMatrix out(d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = i; k < d; ++k) s += linv[k * d + i] * linv[k * d + j];
            out.at(i, j) = s;
            out.at(j, i) = s;
        }
    }
    out.symmetrize();
    return out;
}

}  // namespace berlin::linalg
