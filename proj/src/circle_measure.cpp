#include "cohlim/circle_measure.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace cohlim {

namespace {

constexpr double kRenormTol = 1e-9;

void normalize_or_reject(std::vector<double>& w, double scale, const char* what) {
    double total = 0.0;
    for (double x : w) {
        if (!(x >= 0.0) || !std::isfinite(x))
            throw std::invalid_argument(std::string(what) + ": weights must be finite and nonnegative");
        total += x;
    }
    total *= scale;
    if (std::abs(total - 1.0) > kRenormTol) {
        std::ostringstream os;
        os << what << ": total mass " << total << " is not 1 (tolerance " << kRenormTol << ")";
        throw std::invalid_argument(os.str());
    }
    for (double& x : w) x /= total;
}

}  // namespace

double wrap_angle(double theta) {
    double r = std::fmod(theta, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

PhaseMeasure PhaseMeasure::uniform() {
    PhaseMeasure m;
    m.kind_ = Kind::uniform;
    m.build_nodes();
    return m;
}

PhaseMeasure PhaseMeasure::atoms(std::vector<Atom> atoms) {
    if (atoms.empty()) throw std::invalid_argument("atoms: at least one atom required");
    std::vector<double> w;
    w.reserve(atoms.size());
    for (const auto& a : atoms) {
        if (!std::isfinite(a.angle)) throw std::invalid_argument("atoms: angle must be finite");
        w.push_back(a.weight);
    }
    normalize_or_reject(w, 1.0, "atoms");
    PhaseMeasure m;
    m.kind_ = Kind::atoms;
    for (std::size_t i = 0; i < atoms.size(); ++i) m.atoms_.push_back({wrap_angle(atoms[i].angle), w[i]});
    m.build_nodes();
    return m;
}

PhaseMeasure PhaseMeasure::density(std::vector<double> values) {
    if (values.size() < 2) throw std::invalid_argument("density: need at least 2 samples");
    double total = 0.0;
    for (double x : values) {
        if (!(x >= 0.0) || !std::isfinite(x))
            throw std::invalid_argument("density: values must be finite and nonnegative");
        total += x;
    }
    if (!(total > 0.0)) throw std::invalid_argument("density: values are all zero");
    // Sampled densities are taken up to scale and normalized against d theta.
    const double scale = static_cast<double>(values.size()) / (kTwoPi * total);
    for (double& x : values) x *= scale;
    PhaseMeasure m;
    m.kind_ = Kind::density;
    m.density_ = std::move(values);
    m.build_nodes();
    return m;
}

void PhaseMeasure::build_nodes() {
    nodes_.clear();
    switch (kind_) {
    case Kind::uniform:
        for (int i = 0; i < kUniformCircleNodes; ++i)
            nodes_.push_back({kTwoPi * i / kUniformCircleNodes, 1.0 / kUniformCircleNodes});
        break;
    case Kind::atoms:
        nodes_ = atoms_;
        break;
    case Kind::density: {
        const double m = static_cast<double>(density_.size());
        for (std::size_t i = 0; i < density_.size(); ++i)
            nodes_.push_back({kTwoPi * static_cast<double>(i) / m, density_[i] * kTwoPi / m});
        break;
    }
    }
}

std::string PhaseMeasure::describe() const {
    std::ostringstream os;
    switch (kind_) {
    case Kind::uniform: os << "uniform"; break;
    case Kind::atoms:
        os << "atoms(";
        for (std::size_t i = 0; i < atoms_.size(); ++i)
            os << (i ? "," : "") << atoms_[i].angle << ":" << atoms_[i].weight;
        os << ")";
        break;
    case Kind::density: os << "density[" << density_.size() << "]"; break;
    }
    return os.str();
}

cplx fourier_moment(const PhaseMeasure& mu, int n) {
    if (n == 0) return 1.0;
    if (mu.kind() == PhaseMeasure::Kind::uniform) return 0.0;
    CompensatedSum<cplx> acc;
    for (const auto& node : mu.nodes()) acc.add(node.weight * std::polar(1.0, -n * node.angle));
    return acc.value();
}

double sample_phase(const PhaseMeasure& mu, RngStream& rng) {
    switch (mu.kind()) {
    case PhaseMeasure::Kind::uniform:
        return wrap_angle(kTwoPi * rng.uniform());
    case PhaseMeasure::Kind::atoms:
    case PhaseMeasure::Kind::density: {
        const auto& nodes = mu.nodes();
        double u = rng.uniform();
        std::size_t pick = nodes.size() - 1;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (u < nodes[i].weight) {
                pick = i;
                break;
            }
            u -= nodes[i].weight;
        }
        if (mu.kind() == PhaseMeasure::Kind::atoms) return nodes[pick].angle;
        const double h = kTwoPi / static_cast<double>(nodes.size());
        return wrap_angle(nodes[pick].angle + h * (rng.uniform() - 0.5));
    }
    }
    return 0.0;
}

bool admissible(const PhaseMeasure& mu, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("admissible: tol must be positive");
    return std::abs(fourier_moment(mu, 1)) <= tol;
}

cplx circle_average(const PhaseMeasure& mu, const std::function<cplx(double)>& h) {
    CompensatedSum<cplx> acc;
    for (const auto& node : mu.nodes()) acc.add(node.weight * h(node.angle));
    return acc.value();
}

double circle_average_real(const PhaseMeasure& mu, const std::function<double(double)>& h) {
    CompensatedSum<double> acc;
    for (const auto& node : mu.nodes()) acc.add(node.weight * h(node.angle));
    return acc.value();
}

}  // namespace cohlim
