// mode_space.hpp - discretized momentum space.
//
// Every formula in the library works in momentum space on a uniform grid over
// [-R, R]^d with nodes k_j = -R + j * 2R/N, j = 1..N per axis, and cell volume
// (2R/N)^d. Integrals are Riemann sums over those nodes. The momentum-space
// norm ||f_hat||^2 = dk * sum |f_hat|^2 is the one stored everywhere; the
// position-space norm is (2pi)^{-d} times it.
#pragma once

#include "cohlim/numeric.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cohlim {

class MomentumGrid {
public:
    MomentumGrid(int dim, double half_width, std::size_t cells_per_axis);

    int dim() const { return dim_; }
    double half_width() const { return half_width_; }
    std::size_t cells_per_axis() const { return n_; }
    std::size_t size() const { return size_; }
    double spacing() const { return spacing_; }
    double cell_volume() const { return cell_volume_; }

    /// Node along one axis, j0 in [0, N): -R + (j0 + 1) * 2R/N.
    double axis_node(std::size_t j0) const;
    Point node(std::size_t flat) const;
    double node_norm(std::size_t flat) const { return norm_of(node(flat), dim_); }
    /// Flat index of the node closest to k (clamped to the box).
    std::size_t nearest(const Point& k) const;

    bool operator==(const MomentumGrid& o) const {
        return dim_ == o.dim_ && half_width_ == o.half_width_ && n_ == o.n_;
    }

private:
    int dim_;
    double half_width_;
    std::size_t n_;
    std::size_t size_;
    double spacing_;
    double cell_volume_;
};

/// Named closed-form test functions with both momentum- and position-space
/// expressions, f_hat(k) = \int e^{-ikx} f(x) dx.
///   gaussian:   f_hat = A exp(-|k-k0|^2 / (2 w^2)) e^{-i (k-k0).x0}
///   box:        f_hat = A on the half-open cube [k0-w, k0+w)^d
///   plane_wave: f(x) = A e^{i k0.x} on the cube |x - x0|_inf <= w
struct ClosedForm {
    enum class Kind { gaussian, box, plane_wave };

    Kind kind{Kind::gaussian};
    int dim{1};
    cplx amplitude{1.0};
    Point center{};  // k0
    double width{1.0};
    Point shift{};  // x0

    cplx momentum(const Point& k) const;
    cplx position(const Point& x) const;
    std::string label() const;
    ClosedForm scaled(cplx s) const {
        ClosedForm c = *this;
        c.amplitude *= s;
        return c;
    }
};

std::string to_string(ClosedForm::Kind k);
ClosedForm::Kind closed_form_kind(const std::string& name);

/// Samples f_hat(k_j) on a grid. Keeps an exact point evaluator when the
/// function came from closed forms; otherwise point evaluation snaps to the
/// nearest node, which carries an O(dk) error for off-grid points.
class TestFunction {
public:
    using Evaluator = std::function<cplx(const Point&)>;

    TestFunction(MomentumGrid grid, std::vector<cplx> values, Evaluator exact = {}, std::string label = {});

    static TestFunction zero(const MomentumGrid& grid);
    static TestFunction from_closed_form(const MomentumGrid& grid, const ClosedForm& form);
    static TestFunction from_evaluator(const MomentumGrid& grid, Evaluator exact, std::string label);

    const MomentumGrid& grid() const { return grid_; }
    const std::vector<cplx>& values() const { return values_; }
    const std::string& label() const { return label_; }
    bool has_exact() const { return static_cast<bool>(exact_); }
    const Evaluator& exact() const { return exact_; }

    cplx at(const Point& k) const;

    TestFunction operator+(const TestFunction& o) const;
    TestFunction operator-(const TestFunction& o) const;
    TestFunction operator-() const { return scaled(-1.0); }
    TestFunction scaled(cplx s) const;
    TestFunction conjugated() const;

private:
    MomentumGrid grid_;
    std::vector<cplx> values_;
    Evaluator exact_;
    std::string label_;
};

/// rho(k): particles per unit spatial volume per unit momentum volume.
class ModeDensity {
public:
    ModeDensity(MomentumGrid grid, std::vector<double> values);
    static ModeDensity zero(const MomentumGrid& grid);
    static ModeDensity constant(const MomentumGrid& grid, double value);
    static ModeDensity sample(const MomentumGrid& grid, const std::function<double(const Point&)>& rho);

    const MomentumGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    bool is_zero() const;
    ModeDensity scaled(double s) const;

private:
    MomentumGrid grid_;
    std::vector<double> values_;
};

void require_same_grid(const MomentumGrid& a, const MomentumGrid& b, const char* what);

/// dk * sum conj(g) w f with w = rho or 1; conjugate-linear in g.
cplx inner(const TestFunction& g, const TestFunction& f, const ModeDensity* weight = nullptr);
cplx inner(const TestFunction& g, const TestFunction& f, const ModeDensity& weight);

/// ||f_hat||_2^2 = dk * sum |f_hat|^2.
double norm_sq_momentum(const TestFunction& f);

/// Position-space function on the box [-L/2, L/2]^d.
using PositionFunction = std::function<cplx(const Point&)>;

struct BoxQuadrature {
    std::size_t points_per_axis{0};  // 0: 4096, 512, 96 for d = 1, 2, 3
};

/// f_hat_k = L^{-d/2} \int_box e^{-ikx} f(x) dx at k = 2 pi n / L for each integer
/// vector n, by the midpoint rule on points_per_axis^d cells.
std::vector<cplx> finite_volume_coefficients(const PositionFunction& f, int dim, double L,
                                             const std::vector<std::array<long, 3>>& modes,
                                             BoxQuadrature quad = {});

/// \int_box |f|^2 dx with the same midpoint rule.
double box_norm_sq(const PositionFunction& f, int dim, double L, BoxQuadrature quad = {});

/// Little-endian float64 (re, im) pairs.
std::vector<cplx> read_complex_column(const std::string& path);
void write_complex_column(const std::string& path, const std::vector<cplx>& values);

}  // namespace cohlim
