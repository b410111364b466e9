#include "sgns/triad.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <tuple>

namespace sgns {

namespace {

using cplx = std::complex<double>;

// Coefficient of exp(i s theta) in cos(theta) or sin(theta).
cplx exp_coefficient(Phase ph, int s) {
    if (ph == Phase::Cos) return {0.5, 0.0};
    return s > 0 ? cplx{0.0, -0.5} : cplx{0.0, 0.5};
}

// Drop analytic zeros polluted by round-off in the polarization products.
constexpr double kDropTolerance = 1e-14;

}  // namespace

double triad_integral(int dim, double norm, const Mode& va, const Mode& vb, const Mode& vc) {
    double pa_kb = 0.0, pb_pc = 0.0;
    for (int c = 0; c < dim; ++c) {
        pa_kb += va.p[c] * vb.k[c];
        pb_pc += vb.p[c] * vc.p[c];
    }
    if (pa_kb == 0.0 || pb_pc == 0.0) return 0.0;

    // d/dtheta cos = -sin, d/dtheta sin = cos
    Phase db = vb.phase == Phase::Cos ? Phase::Sin : Phase::Cos;
    double dsign = vb.phase == Phase::Cos ? -1.0 : 1.0;

    cplx sum{0.0, 0.0};
    for (int s1 : {1, -1})
        for (int s2 : {1, -1})
            for (int s3 : {1, -1}) {
                bool closes = true;
                for (int c = 0; c < 3; ++c)
                    if (s1 * va.k[c] + s2 * vb.k[c] + s3 * vc.k[c] != 0) closes = false;
                if (!closes) continue;
                sum += exp_coefficient(va.phase, s1) * exp_coefficient(db, s2) *
                       exp_coefficient(vc.phase, s3);
            }
    if (sum.real() == 0.0) return 0.0;
    // norm^3 (2 pi)^d = 2 norm
    return 2.0 * norm * dsign * pa_kb * pb_pc * sum.real();
}

std::vector<WaveVector> triad_partners(const WaveVector& ka, const WaveVector& kb) {
    std::vector<WaveVector> out;
    for (int s : {1, -1}) {
        WaveVector q{ka[0] + s * kb[0], ka[1] + s * kb[1], ka[2] + s * kb[2]};
        auto [c, sign] = canonicalize(q);
        if (sign == 0) continue;
        if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
    return out;
}

ConvectionTensor::ConvectionTensor(std::size_t n, std::vector<TriadEntry> entries)
    : n_(n), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(), [](const TriadEntry& x, const TriadEntry& y) {
        return std::tie(x.j, x.i, x.k) < std::tie(y.j, y.i, y.k);
    });
}

void ConvectionTensor::contract(const Eigen::VectorXd& a, Eigen::VectorXd& out) const {
    out.setZero(static_cast<Eigen::Index>(n_));
    const double* ap = a.data();
    double* op = out.data();
    for (const auto& e : entries_) op[e.j] += e.value * ap[e.i] * ap[e.k];
}

Eigen::VectorXd ConvectionTensor::contract(const Eigen::VectorXd& a) const {
    Eigen::VectorXd out;
    contract(a, out);
    return out;
}

double ConvectionTensor::at(std::size_t i, std::size_t k, std::size_t j) const {
    TriadEntry key{std::uint32_t(i), std::uint32_t(k), std::uint32_t(j), 0.0};
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const TriadEntry& x, const TriadEntry& y) {
                                   return std::tie(x.j, x.i, x.k) < std::tie(y.j, y.i, y.k);
                               });
    if (it != entries_.end() && it->i == i && it->k == k && it->j == j) return it->value;
    return 0.0;
}

double ConvectionTensor::frobenius_norm() const {
    double s = 0.0;
    for (const auto& e : entries_) s += e.value * e.value;
    return std::sqrt(s);
}

ConvectionTensor convection_tensor(const Basis& basis) {
    const std::size_t n = basis.size();
    const std::size_t per_k = 2 * static_cast<std::size_t>(basis.polarizations());
    std::vector<TriadEntry> entries;

    for (std::size_t i = 0; i < n; ++i) {
        const Mode& mi = basis.mode(i);
        for (std::size_t k = 0; k < n; ++k) {
            const Mode& mk = basis.mode(k);
            for (const WaveVector& q : triad_partners(mi.k, mk.k)) {
                auto first = basis.first_index(q);
                if (!first) continue;
                for (std::size_t j = *first; j < *first + per_k; ++j) {
                    // b_{i,k,j} = -b_{i,j,k}: compute k < j only and mirror
                    if (j <= k) continue;
                    double v = triad_integral(basis.dim(), basis.norm(), mi, mk, basis.mode(j));
                    if (std::abs(v) <= kDropTolerance) continue;
                    entries.push_back({std::uint32_t(i), std::uint32_t(k), std::uint32_t(j), v});
                    entries.push_back({std::uint32_t(i), std::uint32_t(j), std::uint32_t(k), -v});
                }
            }
        }
    }
    return ConvectionTensor(n, std::move(entries));
}

}  // namespace sgns
