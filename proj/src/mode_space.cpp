#include "cohlim/mode_space.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <iterator>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cohlim {

static_assert(std::endian::native == std::endian::little, "column files are read by memcpy");

MomentumGrid::MomentumGrid(int dim, double half_width, std::size_t cells_per_axis)
    : dim_(dim), half_width_(half_width), n_(cells_per_axis) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("MomentumGrid: d must be 1, 2 or 3");
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw std::invalid_argument("MomentumGrid: R must be positive");
    if (cells_per_axis < 2) throw std::invalid_argument("MomentumGrid: N must be >= 2");
    size_ = 1;
    for (int i = 0; i < dim; ++i) size_ *= n_;
    spacing_ = 2.0 * half_width_ / static_cast<double>(n_);
    cell_volume_ = std::pow(spacing_, dim_);
}

double MomentumGrid::axis_node(std::size_t j0) const {
    return -half_width_ + static_cast<double>(j0 + 1) * spacing_;
}

Point MomentumGrid::node(std::size_t flat) const {
    Point k{};
    for (int i = 0; i < dim_; ++i) {
        k[i] = axis_node(flat % n_);
        flat /= n_;
    }
    return k;
}

std::size_t MomentumGrid::nearest(const Point& k) const {
    std::size_t flat = 0;
    std::size_t stride = 1;
    for (int i = 0; i < dim_; ++i) {
        double j = std::round((k[i] + half_width_) / spacing_) - 1.0;
        j = std::clamp(j, 0.0, static_cast<double>(n_ - 1));
        flat += static_cast<std::size_t>(j) * stride;
        stride *= n_;
    }
    return flat;
}

// ---------------------------------------------------------------------------

namespace {

double sinc_window(double q, double w) {
    // \int_{-w}^{w} e^{-iqx} dx
    if (std::abs(q * w) < 1e-8) return 2.0 * w * (1.0 - q * q * w * w / 6.0);
    return 2.0 * std::sin(q * w) / q;
}

}  // namespace

cplx ClosedForm::momentum(const Point& k) const {
    switch (kind) {
    case Kind::gaussian: {
        double r2 = 0.0, ph = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double q = k[i] - center[i];
            r2 += q * q;
            ph += q * shift[i];
        }
        return amplitude * std::exp(-r2 / (2.0 * width * width)) * std::polar(1.0, -ph);
    }
    case Kind::box:
        for (int i = 0; i < dim; ++i) {
            const double q = k[i] - center[i];
            if (q < -width || q >= width) return 0.0;
        }
        return amplitude;
    case Kind::plane_wave: {
        cplx v = amplitude;
        for (int i = 0; i < dim; ++i) {
            const double q = k[i] - center[i];
            v *= sinc_window(q, width) * std::polar(1.0, -q * shift[i]);
        }
        return v;
    }
    }
    return 0.0;
}

cplx ClosedForm::position(const Point& x) const {
    switch (kind) {
    case Kind::gaussian: {
        // (2pi)^{-d} \int e^{ikx} f_hat(k) dk
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) r2 += (x[i] - shift[i]) * (x[i] - shift[i]);
        const double norm = std::pow(kTwoPi, -dim) * std::pow(kTwoPi * width * width, 0.5 * dim);
        return amplitude * norm * std::exp(-0.5 * width * width * r2) * std::polar(1.0, dot(center, x, dim));
    }
    case Kind::box: {
        cplx v = amplitude * std::pow(kTwoPi, -dim);
        for (int i = 0; i < dim; ++i) v *= sinc_window(x[i], width) * std::polar(1.0, center[i] * x[i]);
        return v;
    }
    case Kind::plane_wave:
        for (int i = 0; i < dim; ++i)
            if (std::abs(x[i] - shift[i]) > width) return 0.0;
        return amplitude * std::polar(1.0, dot(center, x, dim));
    }
    return 0.0;
}

std::string to_string(ClosedForm::Kind k) {
    switch (k) {
    case ClosedForm::Kind::gaussian: return "gaussian";
    case ClosedForm::Kind::box: return "box";
    case ClosedForm::Kind::plane_wave: return "plane_wave";
    }
    return "?";
}

ClosedForm::Kind closed_form_kind(const std::string& name) {
    if (name == "gaussian") return ClosedForm::Kind::gaussian;
    if (name == "box") return ClosedForm::Kind::box;
    if (name == "plane_wave") return ClosedForm::Kind::plane_wave;
    throw std::invalid_argument("unknown test function kind '" + name + "'");
}

std::string ClosedForm::label() const {
    std::ostringstream os;
    os << to_string(kind) << "(A=" << amplitude.real();
    if (amplitude.imag() != 0.0) os << (amplitude.imag() > 0 ? "+" : "") << amplitude.imag() << "i";
    os << ",k0=" << center[0] << ",w=" << width << ",x0=" << shift[0] << ")";
    return os.str();
}

// ---------------------------------------------------------------------------

TestFunction::TestFunction(MomentumGrid grid, std::vector<cplx> values, Evaluator exact, std::string label)
    : grid_(std::move(grid)), values_(std::move(values)), exact_(std::move(exact)), label_(std::move(label)) {
    if (values_.size() != grid_.size()) throw std::invalid_argument("TestFunction: value count does not match grid");
    for (const cplx& v : values_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::invalid_argument("TestFunction: values must be finite");
}

TestFunction TestFunction::zero(const MomentumGrid& grid) {
    return TestFunction(grid, std::vector<cplx>(grid.size()), [](const Point&) { return cplx{}; }, "zero");
}

TestFunction TestFunction::from_closed_form(const MomentumGrid& grid, const ClosedForm& form) {
    if (form.dim != grid.dim()) throw std::invalid_argument("TestFunction: closed form dimension mismatch");
    return from_evaluator(grid, [form](const Point& k) { return form.momentum(k); }, form.label());
}

TestFunction TestFunction::from_evaluator(const MomentumGrid& grid, Evaluator exact, std::string label) {
    std::vector<cplx> v(grid.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = exact(grid.node(j));
    return TestFunction(grid, std::move(v), std::move(exact), std::move(label));
}

cplx TestFunction::at(const Point& k) const {
    if (exact_) return exact_(k);
    return values_[grid_.nearest(k)];
}

TestFunction TestFunction::operator+(const TestFunction& o) const {
    require_same_grid(grid_, o.grid_, "TestFunction +");
    std::vector<cplx> v(values_.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = values_[j] + o.values_[j];
    Evaluator e;
    if (exact_ && o.exact_) e = [a = exact_, b = o.exact_](const Point& k) { return a(k) + b(k); };
    return TestFunction(grid_, std::move(v), std::move(e), "(" + label_ + "+" + o.label_ + ")");
}

TestFunction TestFunction::operator-(const TestFunction& o) const { return *this + o.scaled(-1.0); }

TestFunction TestFunction::scaled(cplx s) const {
    std::vector<cplx> v(values_.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = s * values_[j];
    Evaluator e;
    if (exact_) e = [a = exact_, s](const Point& k) { return s * a(k); };
    std::ostringstream os;
    os << s << "*" << label_;
    return TestFunction(grid_, std::move(v), std::move(e), os.str());
}

TestFunction TestFunction::conjugated() const {
    std::vector<cplx> v(values_.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = std::conj(values_[j]);
    Evaluator e;
    if (exact_) e = [a = exact_](const Point& k) { return std::conj(a(k)); };
    return TestFunction(grid_, std::move(v), std::move(e), "conj(" + label_ + ")");
}

// ---------------------------------------------------------------------------

ModeDensity::ModeDensity(MomentumGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw std::invalid_argument("ModeDensity: value count does not match grid");
    for (double v : values_)
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("ModeDensity: values must be finite and >= 0");
}

ModeDensity ModeDensity::zero(const MomentumGrid& grid) { return ModeDensity(grid, std::vector<double>(grid.size())); }

ModeDensity ModeDensity::constant(const MomentumGrid& grid, double value) {
    return ModeDensity(grid, std::vector<double>(grid.size(), value));
}

ModeDensity ModeDensity::sample(const MomentumGrid& grid, const std::function<double(const Point&)>& rho) {
    std::vector<double> v(grid.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = rho(grid.node(j));
    return ModeDensity(grid, std::move(v));
}

bool ModeDensity::is_zero() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

ModeDensity ModeDensity::scaled(double s) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= s;
    return ModeDensity(grid_, std::move(v));
}

void require_same_grid(const MomentumGrid& a, const MomentumGrid& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

cplx inner(const TestFunction& g, const TestFunction& f, const ModeDensity* weight) {
    require_same_grid(g.grid(), f.grid(), "inner");
    if (weight) require_same_grid(g.grid(), weight->grid(), "inner");
    const auto& gv = g.values();
    const auto& fv = f.values();
    CompensatedSum<cplx> acc;
    for (std::size_t j = 0; j < gv.size(); ++j) {
        const double w = weight ? weight->values()[j] : 1.0;
        acc.add(std::conj(gv[j]) * w * fv[j]);
    }
    return g.grid().cell_volume() * acc.value();
}

cplx inner(const TestFunction& g, const TestFunction& f, const ModeDensity& weight) { return inner(g, f, &weight); }

double norm_sq_momentum(const TestFunction& f) {
    CompensatedSum<double> acc;
    for (const cplx& v : f.values()) acc.add(std::norm(v));
    return f.grid().cell_volume() * acc.value();
}

// ---------------------------------------------------------------------------

namespace {

std::size_t resolve_points(int dim, BoxQuadrature quad) {
    if (quad.points_per_axis > 0) return quad.points_per_axis;
    return dim == 1 ? 4096 : dim == 2 ? 512 : 96;
}

struct BoxSamples {
    std::vector<Point> x;
    std::vector<cplx> fx;
    double cell;
};

BoxSamples sample_box(const PositionFunction& f, int dim, double L, BoxQuadrature quad) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("finite volume: d must be 1, 2 or 3");
    if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("finite volume: L must be positive");
    const std::size_t m = resolve_points(dim, quad);
    const double h = L / static_cast<double>(m);
    std::size_t total = 1;
    for (int i = 0; i < dim; ++i) total *= m;
    BoxSamples s;
    s.x.resize(total);
    s.fx.resize(total);
    s.cell = std::pow(h, dim);
    for (std::size_t flat = 0; flat < total; ++flat) {
        Point x{};
        std::size_t rest = flat;
        for (int i = 0; i < dim; ++i) {
            x[i] = -0.5 * L + (static_cast<double>(rest % m) + 0.5) * h;
            rest /= m;
        }
        const cplx v = f(x);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::invalid_argument("finite volume: function is not finite on the box");
        s.x[flat] = x;
        s.fx[flat] = v;
    }
    return s;
}

}  // namespace

std::vector<cplx> finite_volume_coefficients(const PositionFunction& f, int dim, double L,
                                             const std::vector<std::array<long, 3>>& modes, BoxQuadrature quad) {
    const BoxSamples s = sample_box(f, dim, L, quad);
    const double pref = std::pow(L, -0.5 * dim) * s.cell;
    std::vector<cplx> out;
    out.reserve(modes.size());
    for (const auto& n : modes) {
        Point k{};
        for (int i = 0; i < dim; ++i) k[i] = kTwoPi * static_cast<double>(n[i]) / L;
        CompensatedSum<cplx> acc;
        for (std::size_t j = 0; j < s.x.size(); ++j) acc.add(std::polar(1.0, -dot(k, s.x[j], dim)) * s.fx[j]);
        out.push_back(pref * acc.value());
    }
    return out;
}

double box_norm_sq(const PositionFunction& f, int dim, double L, BoxQuadrature quad) {
    const BoxSamples s = sample_box(f, dim, L, quad);
    CompensatedSum<double> acc;
    for (const cplx& v : s.fx) acc.add(std::norm(v));
    return s.cell * acc.value();
}

std::vector<cplx> read_complex_column(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() % 16 != 0) throw std::runtime_error(path + ": size is not a multiple of 16 bytes");
    std::vector<cplx> out(bytes.size() / 16);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double re, im;
        std::memcpy(&re, bytes.data() + 16 * i, 8);
        std::memcpy(&im, bytes.data() + 16 * i + 8, 8);
        out[i] = {re, im};
    }
    return out;
}

void write_complex_column(const std::string& path, const std::vector<cplx>& values) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const cplx& v : values) {
        const double re = v.real(), im = v.imag();
        out.write(reinterpret_cast<const char*>(&re), 8);
        out.write(reinterpret_cast<const char*>(&im), 8);
    }
}

}  // namespace cohlim
