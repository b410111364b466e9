#pragma once

// Brute-force tensor-product quadrature on the torus. Everything here is
// evaluated pointwise from the mode definition and summed on a uniform grid,
// which is exact for trigonometric polynomials of degree below M.

#include <vector>

#include <Eigen/Dense>

#include "sgns/basis.hpp"

namespace sgns::oracle {

struct ModeTable {
    int dim = 2;
    int M = 0;
    double weight = 0.0;                 // cell volume (2 pi / M)^d
    std::vector<Eigen::MatrixXd> value;  // per mode: G x d
    std::vector<Eigen::MatrixXd> grad;   // per mode: G x (d*d), entry (c, e) = d_e v_c
};

ModeTable tabulate(const Basis& basis, int M);
ModeTable tabulate(int dim, double norm, const std::vector<Mode>& modes, int M);

Eigen::MatrixXd gram(const Basis& basis, int M);

// Dense b_{i,k,j}, flattened as (i * N + k) * N + j.
std::vector<double> dense_convection(const Basis& basis, int M);

Eigen::VectorXd dense_contract(const std::vector<double>& b, std::size_t n, const Eigen::VectorXd& a);

// int (sigma . grad) v_i . v_j  for sigma = sum_m s_m w_m.
Eigen::MatrixXd dense_transport(const Basis& basis, const std::vector<Mode>& sigma_modes,
                                const std::vector<double>& sigma_coef, int M);

double quad_triad(int dim, double norm, const Mode& a, const Mode& b, const Mode& c, int M);

}  // namespace sgns::oracle
