#include "sgns/noise.hpp"

#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "sgns/triad.hpp"

namespace sgns {

namespace {

std::string describe(const WaveVector& k) {
    return "(" + std::to_string(k[0]) + "," + std::to_string(k[1]) + "," + std::to_string(k[2]) + ")";
}

Mode term_mode(int dim, const FieldTerm& t, int cutoff) {
    auto [c, sign] = canonicalize(t.k);
    if (sign == 0) throw std::invalid_argument("noise field term has zero wavevector");
    if (sign < 0 || c != t.k)
        throw std::invalid_argument("noise field wavevector " + describe(t.k) + " is not canonical");
    if (dim == 2 && t.k[2] != 0)
        throw std::invalid_argument("noise field wavevector " + describe(t.k) + " has a z-component in 2D");
    if (max_abs(t.k) > cutoff)
        throw std::invalid_argument("noise field wavevector " + describe(t.k) +
                                    " lies outside the assembly cutoff " + std::to_string(cutoff));
    auto pols = polarizations(dim, t.k);
    if (t.pol < 0 || t.pol >= static_cast<int>(pols.size()))
        throw std::invalid_argument("noise field polarization index out of range");
    return Mode{t.k, t.pol, t.phase, pols[t.pol], dot(t.k, t.k)};
}

}  // namespace

Eigen::VectorXd terms_to_coefficients(const Basis& basis, const std::vector<FieldTerm>& terms) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(basis.size());
    for (const auto& t : terms) {
        term_mode(basis.dim(), t, basis.cutoff());
        auto idx = basis.find(t.k, t.pol, t.phase);
        if (!idx) throw std::invalid_argument("field term " + describe(t.k) + " is not a basis mode");
        a[*idx] += t.amp;
    }
    return a;
}

AdditiveNoise assemble_eta(std::size_t n, std::size_t brownian_modes,
                           const std::vector<std::pair<std::size_t, Eigen::VectorXd>>& columns) {
    AdditiveNoise out;
    out.eta = Eigen::MatrixXd::Zero(n, brownian_modes);
    for (const auto& [ell, v] : columns) {
        if (ell >= brownian_modes)
            throw std::out_of_range("additive noise Brownian mode " + std::to_string(ell) +
                                    " out of range (K = " + std::to_string(brownian_modes) + ")");
        if (static_cast<std::size_t>(v.size()) != n)
            throw std::invalid_argument("additive noise column has length " + std::to_string(v.size()) +
                                        ", expected " + std::to_string(n));
        out.eta.col(ell) += v;
    }
    return out;
}

double hs_norm(const AdditiveNoise& additive) { return additive.eta.squaredNorm(); }

TransportNoise assemble_zeta(const Basis& basis, const std::vector<TransportField>& fields,
                             int assembly_cutoff) {
    TransportNoise out;
    out.assembly_cutoff = assembly_cutoff;
    out.fields = fields;
    const std::size_t n = basis.size();
    const std::size_t per_k = 2 * static_cast<std::size_t>(basis.polarizations());

    for (const auto& field : fields) {
        std::map<std::pair<std::size_t, std::size_t>, double> upper;  // (i, j), i < j
        for (const auto& term : field.terms) {
            Mode w = term_mode(basis.dim(), term, assembly_cutoff);
            for (std::size_t i = 0; i < n; ++i) {
                const Mode& vi = basis.mode(i);
                for (const WaveVector& q : triad_partners(w.k, vi.k)) {
                    auto first = basis.first_index(q);
                    if (!first) continue;
                    for (std::size_t j = *first; j < *first + per_k; ++j) {
                        if (j <= i) continue;
                        double v = triad_integral(basis.dim(), basis.norm(), w, vi, basis.mode(j));
                        if (v != 0.0) upper[{i, j}] += term.amp * v;
                    }
                }
            }
        }
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(2 * upper.size());
        for (const auto& [ij, v] : upper) {
            if (v == 0.0) continue;
            trip.emplace_back(ij.second, ij.first, v);   // zeta(j, i)
            trip.emplace_back(ij.first, ij.second, -v);  // zeta(i, j)
        }
        SparseMatrix z(n, n);
        z.setFromTriplets(trip.begin(), trip.end());
        out.zeta.push_back(std::move(z));
    }
    return out;
}

Eigen::MatrixXd ito_correction(const TransportNoise& transport, std::size_t n) {
    Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(n, n);
    for (const auto& z : transport.zeta) {
        SparseMatrix ztz = SparseMatrix(z.transpose()) * z;
        corr += 0.5 * Eigen::MatrixXd(ztz);
    }
    // symmetrize away round-off from the sparse product
    return 0.5 * (corr + corr.transpose());
}

Eigen::MatrixXd dissipation_matrix(const Basis& basis, double nu, const TransportNoise& transport) {
    if (!(nu >= 0.0)) throw std::invalid_argument("viscosity must be non-negative");
    Eigen::MatrixXd d = ito_correction(transport, basis.size());
    d.diagonal() += nu * basis.laplacian_eigenvalues();
    return d;
}

OrthogonalityReport check_orthogonality(const NoiseSpec& spec) {
    OrthogonalityReport r;
    std::set<std::size_t> transport_support;
    for (std::size_t f = 0; f < spec.transport.fields.size(); ++f) {
        bool nonzero = f < spec.transport.zeta.size() ? spec.transport.zeta[f].nonZeros() > 0 : false;
        if (!nonzero)
            for (const auto& t : spec.transport.fields[f].terms) nonzero = nonzero || t.amp != 0.0;
        if (nonzero) transport_support.insert(spec.transport.fields[f].ell);
    }
    for (Eigen::Index l = 0; l < spec.additive.eta.cols(); ++l) {
        if (spec.additive.eta.col(l).squaredNorm() == 0.0) continue;
        if (transport_support.count(static_cast<std::size_t>(l)))
            r.overlapping.push_back(static_cast<std::size_t>(l));
    }
    r.orthogonal = r.overlapping.empty();
    if (!r.orthogonal) {
        r.message = "additive and transport noise share Brownian mode";
        if (r.overlapping.size() > 1) r.message += "s";
        for (std::size_t i = 0; i < r.overlapping.size(); ++i)
            r.message += (i ? ", " : " ") + std::to_string(r.overlapping[i]);
    }
    return r;
}

NoiseSpec make_noise(const Basis& basis, std::size_t brownian_modes,
                     const std::vector<std::pair<std::size_t, std::vector<FieldTerm>>>& additive,
                     const std::vector<TransportField>& transport, int transport_cutoff) {
    NoiseSpec spec;
    spec.brownian_modes = brownian_modes;
    std::vector<std::pair<std::size_t, Eigen::VectorXd>> cols;
    for (const auto& [ell, terms] : additive) cols.emplace_back(ell, terms_to_coefficients(basis, terms));
    spec.additive = assemble_eta(basis.size(), brownian_modes, cols);
    std::set<std::size_t> seen;
    for (const auto& f : transport) {
        if (f.ell >= brownian_modes)
            throw std::out_of_range("transport noise Brownian mode " + std::to_string(f.ell) +
                                    " out of range (K = " + std::to_string(brownian_modes) + ")");
        if (!seen.insert(f.ell).second)
            throw std::invalid_argument("transport noise Brownian mode " + std::to_string(f.ell) +
                                        " listed twice");
    }
    spec.transport = assemble_zeta(basis, transport, transport_cutoff);
    auto report = check_orthogonality(spec);
    if (!report.orthogonal) throw std::invalid_argument(report.message);
    return spec;
}

NoiseSpec no_noise(std::size_t n) {
    NoiseSpec spec;
    spec.additive.eta = Eigen::MatrixXd::Zero(n, 0);
    return spec;
}

}  // namespace sgns
