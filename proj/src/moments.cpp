#include "cohlim/moments.hpp"

#include "cohlim/parallel.hpp"
#include "cohlim/stats.hpp"

#include <limits>
#include <stdexcept>

namespace cohlim {

double QMatrix::symmetry_residual() const { return (entries - entries.transpose()).cwiseAbs().maxCoeff(); }

QMatrix build_q(std::span<const TestFunction> fs, std::span<const TestFunction> gs, const ModeDensity& rho,
                cplx mu2) {
    for (const auto& f : fs) require_same_grid(f.grid(), rho.grid(), "build_q");
    for (const auto& g : gs) require_same_grid(g.grid(), rho.grid(), "build_q");
    const std::size_t p = fs.size(), q = gs.size();
    QMatrix Q{p, q, Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(p + q), static_cast<Eigen::Index>(p + q))};
    auto at = [&Q](std::size_t i, std::size_t j) -> cplx& {
        return Q.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    };
    std::vector<TestFunction> fbar, gbar;
    for (const auto& f : fs) fbar.push_back(f.conjugated());
    for (const auto& g : gs) gbar.push_back(g.conjugated());
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) at(i, j) = mu2 * inner(fbar[i], fs[j], rho);
    for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = 0; j < q; ++j) at(p + i, p + j) = std::conj(mu2) * inner(gs[i], gbar[j], rho);
    for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            const cplx c = inner(gs[i], fs[j], rho);
            at(p + i, j) = c;
            at(j, p + i) = c;
        }
    return Q;
}

namespace {

cplx matchings(const Eigen::MatrixXcd& Q, std::vector<int>& free) {
    if (free.empty()) return 1.0;
    const int first = free.front();
    cplx total = 0.0;
    for (std::size_t idx = 1; idx < free.size(); ++idx) {
        const int partner = free[idx];
        const cplx w = Q(first, partner);
        if (w == cplx{}) continue;
        std::vector<int> rest;
        rest.reserve(free.size() - 2);
        for (std::size_t r = 1; r < free.size(); ++r)
            if (r != idx) rest.push_back(free[r]);
        total += w * matchings(Q, rest);
    }
    return total;
}

}  // namespace

cplx wick_moment(const QMatrix& Q) {
    const std::size_t n = Q.size();
    if (n > kMaxPairingOrder) throw std::invalid_argument("wick_moment: p + q > 16 is not supported");
    if (n % 2 == 1) return 0.0;
    std::vector<int> free(n);
    for (std::size_t i = 0; i < n; ++i) free[i] = static_cast<int>(i);
    return matchings(Q.entries, free);
}

cplx permanent(const Eigen::MatrixXcd& m) {
    const auto n = m.rows();
    if (m.cols() != n) throw std::invalid_argument("permanent: matrix must be square");
    if (n == 0) return 1.0;
    // Ryser: perm = (-1)^n sum_{S} (-1)^{|S|} prod_i sum_{j in S} m_ij
    std::vector<cplx> row_sums(static_cast<std::size_t>(n), 0.0);
    cplx total = 0.0;
    const std::uint64_t subsets = std::uint64_t{1} << n;
    std::uint64_t gray_prev = 0;
    for (std::uint64_t s = 1; s < subsets; ++s) {
        const std::uint64_t gray = s ^ (s >> 1);
        const std::uint64_t changed = gray ^ gray_prev;
        const int col = __builtin_ctzll(changed);
        const double sign_add = (gray & changed) ? 1.0 : -1.0;
        for (Eigen::Index i = 0; i < n; ++i) row_sums[static_cast<std::size_t>(i)] += sign_add * m(i, col);
        gray_prev = gray;
        cplx prod = 1.0;
        for (const cplx& r : row_sums) prod *= r;
        const int bits = __builtin_popcountll(gray);
        total += ((n - bits) % 2 == 0 ? 1.0 : -1.0) * prod;
    }
    return total;
}

cplx permanent_moment(std::span<const TestFunction> fs, std::span<const TestFunction> gs, const ModeDensity& rho) {
    if (fs.size() != gs.size()) return 0.0;
    if (fs.size() > 10) throw std::invalid_argument("permanent_moment: p > 10 is not supported");
    const auto p = static_cast<Eigen::Index>(fs.size());
    Eigen::MatrixXcd C(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            C(i, j) = inner(gs[static_cast<std::size_t>(i)], fs[static_cast<std::size_t>(j)], rho);
    return permanent(C);
}

cplx generating_fn(const QMatrix& Q, std::span<const cplx> t) {
    if (t.size() != Q.size()) throw std::invalid_argument("generating_fn: t has the wrong length");
    Eigen::VectorXcd v(static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) v(static_cast<Eigen::Index>(i)) = t[i];
    return std::exp((v.transpose() * Q.entries * v)(0, 0));
}

double McEstimate::z_score(cplx expected) const {
    const double diff = std::abs(expected - mean);
    const double se = standard_error();
    if (se == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return diff / se;
}

McEstimate mc_oracle(std::span<const TestFunction> fs, std::span<const TestFunction> gs,
                     const CoefficientPair& coeffs, std::size_t samples, std::uint64_t seed, unsigned threads) {
    if (samples < 1000) throw std::invalid_argument("mc_oracle: need at least 1000 samples");
    if (fs.empty() && gs.empty()) return {1.0, 0.0, 0.0, samples};
    std::vector<ChiKernel> fk, gk;
    for (const auto& f : fs) fk.emplace_back(f, coeffs);
    for (const auto& g : gs) gk.emplace_back(g, coeffs);
    const double norm = std::pow(2.0, -0.5 * static_cast<double>(fs.size() + gs.size()));
    std::vector<double> re(samples), im(samples);
    parallel_for(samples, threads, [&](std::size_t m) {
        const BrownianSample s = BrownianSample::draw(coeffs.grid, seed, m);
        cplx prod = norm;
        for (const auto& k : fk) prod *= k(s);
        for (const auto& k : gk) prod *= std::conj(k(s));
        re[m] = prod.real();
        im[m] = prod.imag();
    });
    const MeanEstimate r = jackknife_mean(re);
    const MeanEstimate i = jackknife_mean(im);
    return {{r.mean, i.mean}, r.stderr_, i.stderr_, samples};
}

cplx anti_normal_two_point(const TestFunction& f, const TestFunction& g, const ModeDensity& rho) {
    return inner(g, f, rho) + position_norm_factor(f.grid().dim()) * inner(g, f);
}

}  // namespace cohlim
