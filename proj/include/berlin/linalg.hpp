#pragma once

#include <cstddef>
#include <vector>

#include "berlin/errors.hpp"

namespace berlin::linalg {

using Vector = std::vector<double>;

// Dense row-major symmetric d x d matrix. Symmetry is enforced by
// re-symmetrizing ((M + M^T)/2) after every mutating update.
class SymMatrix {
public:
    explicit SymMatrix(std::size_t d) : d_(d), a_(d * d, 0.0) {}

    static SymMatrix identity(std::size_t d) {
        SymMatrix m(d);
        for (std::size_t i = 0; i < d; ++i) m.a_[i * d + i] = 1.0;
        return m;
    }

    std::size_t dim() const { return d_; }

    double& at(std::size_t i, std::size_t j) { return a_[i * d_ + j]; }
    double at(std::size_t i, std::size_t j) const { return a_[i * d_ + j]; }

    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }

    const std::vector<double>& storage() const { return a_; }
    std::vector<double>& storage() { return a_; }

    void symmetrize() {
        for (std::size_t i = 0; i < d_; ++i) {
            for (std::size_t j = i + 1; j < d_; ++j) {
                const double v = 0.5 * (a_[i * d_ + j] + a_[j * d_ + i]);
                a_[i * d_ + j] = v;
                a_[j * d_ + i] = v;
            }
        }
    }

    bool operator==(const SymMatrix& o) const = default;

private:
    std::size_t d_;
    std::vector<double> a_;
};

double dot(const Vector& a, const Vector& b);

// y = M x
Vector mat_vec(const SymMatrix& m, const Vector& x);

// In-place A += x x^T, re-symmetrized.
void rank1_add_inplace(SymMatrix& a, const Vector& x);
SymMatrix rank1_add(const SymMatrix& a, const Vector& x);

// In-place Sherman-Morrison: given A_inv = A^{-1}, replaces it with
// (A + x x^T)^{-1} = A_inv - (A_inv x)(A_inv x)^T / (1 + x^T A_inv x).
void sherman_morrison_inplace(SymMatrix& a_inv, const Vector& x);
SymMatrix sherman_morrison(const SymMatrix& a_inv, const Vector& x);

// x^T A_inv x, clamped to [0, inf). Values below -1e-9 raise NumericalError.
double quad_form(const SymMatrix& a_inv, const Vector& x);

// theta = A_inv * b
Vector solve_theta(const SymMatrix& a_inv, const Vector& b);

// Direct inverse of an SPD matrix via Cholesky factorization. Test oracle for
// the incrementally maintained inverse and the checkpoint-restore path.
SymMatrix cholesky_inverse(const SymMatrix& a);

}  // namespace berlin::linalg
