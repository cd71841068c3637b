// SPDX-License-Identifier: Apache-2.0
#pragma once

// Finite-dimensional C*-ternary rings: complex m x n matrices with the
// ternary product [xyz] = x y* z and the spectral norm.
//
// The spectral norm is the only matrix norm for which ||[xxx]|| = ||x||^3,
// so it is the norm used throughout.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "ternary_stab/errors.hpp"
#include "ternary_stab/rng.hpp"

namespace tstab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

struct Shape {
    std::size_t rows = 1;
    std::size_t cols = 1;

    std::size_t size() const noexcept { return rows * cols; }
    bool operator==(const Shape&) const = default;
    std::string str() const { return std::to_string(rows) + "x" + std::to_string(cols); }
};

inline void validate_shape(const Shape& s) {
    if (s.rows < 1 || s.cols < 1) {
        throw RejectedInput("shape must be positive (got " + s.str() + ")");
    }
}

/// An immutable member of the matrix TRO of its shape.
class RingElement {
public:
    RingElement() : m_(Matrix::Zero(1, 1)) {}

    static RingElement zero(Shape s) {
        validate_shape(s);
        return RingElement(Matrix::Zero(Eigen::Index(s.rows), Eigen::Index(s.cols)), Trusted{});
    }

    static RingElement from_matrix(Matrix m) {
        if (m.rows() < 1 || m.cols() < 1) {
            throw RejectedInput("shape must be positive");
        }
        if (!m.allFinite()) {
            throw RejectedInput("ring element entries must be finite");
        }
        return RingElement(std::move(m), Trusted{});
    }

    /// Row-major entries.
    static RingElement from_entries(Shape s, std::span<const Complex> entries) {
        validate_shape(s);
        if (entries.size() != s.size()) {
            throw RejectedInput("expected " + std::to_string(s.size()) + " entries for shape " +
                                s.str() + ", got " + std::to_string(entries.size()));
        }
        Matrix m(Eigen::Index(s.rows), Eigen::Index(s.cols));
        for (std::size_t i = 0; i < s.rows; ++i) {
            for (std::size_t j = 0; j < s.cols; ++j) {
                m(Eigen::Index(i), Eigen::Index(j)) = entries[i * s.cols + j];
            }
        }
        return from_matrix(std::move(m));
    }

    /// e_ij: 1 at (i, j), zero elsewhere (zero-based indices).
    static RingElement matrix_unit(Shape s, std::size_t i, std::size_t j) {
        if (i >= s.rows || j >= s.cols) {
            throw RejectedInput("matrix unit index out of range for shape " + s.str());
        }
        Matrix m = Matrix::Zero(Eigen::Index(s.rows), Eigen::Index(s.cols));
        m(Eigen::Index(i), Eigen::Index(j)) = 1.0;
        return RingElement(std::move(m), Trusted{});
    }

    static RingElement identity(std::size_t n) {
        validate_shape({n, n});
        return RingElement(Matrix::Identity(Eigen::Index(n), Eigen::Index(n)), Trusted{});
    }

    Shape shape() const noexcept {
        return {static_cast<std::size_t>(m_.rows()), static_cast<std::size_t>(m_.cols())};
    }
    const Matrix& matrix() const noexcept { return m_; }
    Complex operator()(std::size_t i, std::size_t j) const {
        return m_(Eigen::Index(i), Eigen::Index(j));
    }

    std::vector<Complex> entries() const {
        std::vector<Complex> out;
        out.reserve(std::size_t(m_.size()));
        for (Eigen::Index i = 0; i < m_.rows(); ++i) {
            for (Eigen::Index j = 0; j < m_.cols(); ++j) {
                out.push_back(m_(i, j));
            }
        }
        return out;
    }

    bool is_zero() const { return (m_.array() == Complex(0.0)).all(); }

    friend RingElement operator+(const RingElement& a, const RingElement& b) {
        require_same_shape(a, b, "add");
        return checked(a.m_ + b.m_);
    }
    friend RingElement operator-(const RingElement& a, const RingElement& b) {
        require_same_shape(a, b, "subtract");
        return checked(a.m_ - b.m_);
    }
    friend RingElement operator-(const RingElement& a) { return RingElement(-a.m_, Trusted{}); }
    friend RingElement operator*(Complex alpha, const RingElement& a) {
        return checked(alpha * a.m_);
    }

    /// Bitwise equality of entries (used by determinism tests).
    bool identical(const RingElement& other) const {
        return shape() == other.shape() && m_ == other.m_;
    }

    static void require_same_shape(const RingElement& a, const RingElement& b, const char* op) {
        if (a.shape() != b.shape()) {
            throw RejectedInput(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                                b.shape().str());
        }
    }

private:
    struct Trusted {};
    RingElement(Matrix m, Trusted) : m_(std::move(m)) {}

    static RingElement checked(Matrix m) {
        if (!m.allFinite()) {
            throw RejectedInput("arithmetic produced non-finite entries");
        }
        return RingElement(std::move(m), Trusted{});
    }

    Matrix m_;
};

inline RingElement add(const RingElement& x, const RingElement& y) { return x + y; }
inline RingElement sub(const RingElement& x, const RingElement& y) { return x - y; }
inline RingElement scale(Complex alpha, const RingElement& x) { return alpha * x; }

/// [xyz] = x y* z.
inline RingElement tprod(const RingElement& x, const RingElement& y, const RingElement& z) {
    RingElement::require_same_shape(x, y, "tprod");
    RingElement::require_same_shape(x, z, "tprod");
    return RingElement::from_matrix(x.matrix() * (y.matrix().adjoint() * z.matrix()));
}

/// Largest singular value of a complex matrix.
inline double spectral_norm(const Matrix& m) {
    if (m.size() == 1) {
        return std::abs(m(0, 0));
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

inline double norm(const RingElement& x) { return spectral_norm(x.matrix()); }

/// Row-major coordinates with respect to the matrix units.
inline std::vector<Complex> coordinates(const RingElement& x) { return x.entries(); }

// ---------------------------------------------------------------------------
// Random elements
// ---------------------------------------------------------------------------

/// Seeded random element with norm(x) <= radius.
///
/// Entries are i.i.d. circular complex Gaussians (mt19937_64 + Box-Muller);
/// the matrix is then rescaled to spectral norm radius * U with U uniform on
/// (0, 1], drawn from the same stream after the entries.
inline RingElement random_element(Shape shape, double radius, std::uint64_t seed) {
    validate_shape(shape);
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw RejectedInput("radius must be positive and finite");
    }
    Rng rng(seed);
    Matrix m(Eigen::Index(shape.rows), Eigen::Index(shape.cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            m(i, j) = rng.complex_gaussian();
        }
    }
    const double target = radius * (1.0 - rng.uniform());
    const double n = spectral_norm(m);
    if (n > 0.0) {
        m *= target / n;
    }
    return RingElement::from_matrix(std::move(m));
}

/// Draws from one stream; element k of the sequence is random_element(shape, radius, derive_seed(seed, k)).
class ElementSampler {
public:
    ElementSampler(Shape shape, double radius, std::uint64_t seed)
        : shape_(shape), radius_(radius), seed_(seed) {}

    RingElement next() { return random_element(shape_, radius_, derive_seed(seed_, counter_++)); }

private:
    Shape shape_;
    double radius_;
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

// ---------------------------------------------------------------------------
// Unit-induced C*-algebra
// ---------------------------------------------------------------------------

/// x . y = [x e y] and x* = [e x e] for a unit e of the ternary ring.
class UnitalStructure {
public:
    explicit UnitalStructure(RingElement e) : e_(std::move(e)) {}

    RingElement odot(const RingElement& x, const RingElement& y) const { return tprod(x, e_, y); }
    RingElement star(const RingElement& x) const { return tprod(e_, x, e_); }
    const RingElement& unit() const noexcept { return e_; }

private:
    RingElement e_;
};

/// Validates [xee] = [eex] = x on `samples` random x and returns the induced structure.
inline UnitalStructure unital_structure(const RingElement& e, std::uint64_t seed = 0,
                                        std::size_t samples = 16, double tol = 1e-9) {
    if (e.shape().rows != e.shape().cols) {
        throw PreconditionViolation("unit candidate must be square, got " + e.shape().str());
    }
    ElementSampler sampler(e.shape(), 1.0, seed);
    for (std::size_t k = 0; k < samples; ++k) {
        const RingElement x = sampler.next();
        const double scale = std::max(1.0, norm(x));
        const double left = norm(tprod(x, e, e) - x);
        const double right = norm(tprod(e, e, x) - x);
        if (left > tol * scale || right > tol * scale) {
            throw PreconditionViolation("element is not a unit: ||[xee] - x|| = " +
                                        std::to_string(left) + ", ||[eex] - x|| = " +
                                        std::to_string(right));
        }
    }
    return UnitalStructure(e);
}

// ---------------------------------------------------------------------------
// Axiom verification
// ---------------------------------------------------------------------------

struct RingAxiomReport {
    double max_assoc_residual = 0.0;
    double max_norm_ineq_violation = 0.0;
    double max_cube_identity_residual = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    Shape shape;
    double tol = 1e-9;

    bool passed() const {
        return max_assoc_residual <= tol && max_norm_ineq_violation <= tol &&
               max_cube_identity_residual <= tol;
    }
};

struct TroProduct {
    RingElement operator()(const RingElement& x, const RingElement& y, const RingElement& z) const {
        return tprod(x, y, z);
    }
};

namespace detail {
inline double relative(double diff, double reference) {
    return reference > 0.0 ? diff / reference : diff;
}
}  // namespace detail

/// Evaluates associativity, norm submultiplicativity and the cube identity on
/// random tuples. `product` defaults to the TRO product; tests inject others.
template <class Product = TroProduct>
RingAxiomReport axiom_suite(Shape shape, std::size_t samples, std::uint64_t seed,
                            double tol = 1e-9, Product product = {}) {
    validate_shape(shape);
    if (samples < 1) {
        throw RejectedInput("samples must be at least 1");
    }
    RingAxiomReport report;
    report.samples = samples;
    report.seed = seed;
    report.shape = shape;
    report.tol = tol;

    ElementSampler sampler(shape, 2.0, seed);
    for (std::size_t k = 0; k < samples; ++k) {
        const RingElement x = sampler.next();
        const RingElement y = sampler.next();
        const RingElement z = sampler.next();
        const RingElement t = sampler.next();
        const RingElement s = sampler.next();
        const double nx = norm(x), ny = norm(y), nz = norm(z), nt = norm(t), ns = norm(s);

        // [xy[zts]] = [x[tzy]s] = [[xyz]ts]
        const RingElement inner_right = product(x, y, product(z, t, s));
        const RingElement middle = product(x, product(t, z, y), s);
        const RingElement inner_left = product(product(x, y, z), t, s);
        const double ref5 = nx * ny * nz * nt * ns;
        report.max_assoc_residual =
            std::max({report.max_assoc_residual,
                      detail::relative(norm(inner_right - middle), ref5),
                      detail::relative(norm(inner_right - inner_left), ref5)});

        const double ref3 = nx * ny * nz;
        const double excess = std::max(0.0, norm(product(x, y, z)) - ref3);
        report.max_norm_ineq_violation =
            std::max(report.max_norm_ineq_violation, detail::relative(excess, ref3));

        const double cube = nx * nx * nx;
        report.max_cube_identity_residual =
            std::max(report.max_cube_identity_residual,
                     detail::relative(std::abs(norm(product(x, x, x)) - cube), cube));
    }
    return report;
}

}  // namespace tstab
