#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sgns/basis.hpp"

namespace sgns {

// amp * v_{k,pol,phase}, with k canonical.
struct FieldTerm {
    WaveVector k{};
    int pol = 0;
    Phase phase = Phase::Cos;
    double amp = 0.0;
};

Eigen::VectorXd terms_to_coefficients(const Basis& basis, const std::vector<FieldTerm>& terms);

struct AdditiveNoise {
    Eigen::MatrixXd eta;  // N x K, eta(j, l) = <sigma1 e_l, v_j>
};

AdditiveNoise assemble_eta(std::size_t n, std::size_t brownian_modes,
                           const std::vector<std::pair<std::size_t, Eigen::VectorXd>>& columns);

// Squared Hilbert-Schmidt norm, sum of eta^2.
double hs_norm(const AdditiveNoise& additive);

struct TransportField {
    std::size_t ell = 0;
    std::vector<FieldTerm> terms;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

struct TransportNoise {
    int assembly_cutoff = 0;
    std::vector<TransportField> fields;
    std::vector<SparseMatrix> zeta;  // parallel to fields; zeta(j, i) = <(sigma2 e_l . grad) v_i, v_j>
};

TransportNoise assemble_zeta(const Basis& basis, const std::vector<TransportField>& fields,
                             int assembly_cutoff);

Eigen::MatrixXd ito_correction(const TransportNoise& transport, std::size_t n);

Eigen::MatrixXd dissipation_matrix(const Basis& basis, double nu, const TransportNoise& transport);

struct NoiseSpec {
    std::size_t brownian_modes = 0;
    AdditiveNoise additive;
    TransportNoise transport;
};

struct OrthogonalityReport {
    bool orthogonal = true;
    std::vector<std::size_t> overlapping;
    std::string message;
};

OrthogonalityReport check_orthogonality(const NoiseSpec& spec);

// Assembles both operators and refuses overlapping Brownian supports.
NoiseSpec make_noise(const Basis& basis, std::size_t brownian_modes,
                     const std::vector<std::pair<std::size_t, std::vector<FieldTerm>>>& additive,
                     const std::vector<TransportField>& transport, int transport_cutoff);

NoiseSpec no_noise(std::size_t n);

}  // namespace sgns
