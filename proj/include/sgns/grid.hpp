#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "sgns/basis.hpp"

namespace sgns {

// Evaluates fields sum_i a_i v_i and their gradients on the uniform M^d grid
// (first coordinate slowest, matching GridSamples).
class GridEvaluator {
public:
    GridEvaluator(const Basis& basis, int M);

    int dim() const { return dim_; }
    int M() const { return M_; }
    std::size_t points() const { return static_cast<std::size_t>(trig_.rows()); }
    double weight() const { return weight_; }

    Eigen::MatrixXd values(const Eigen::VectorXd& a) const;     // G x d
    Eigen::MatrixXd gradients(const Eigen::VectorXd& a) const;  // G x d^2, column c*d+e = d_e u_c
    Eigen::VectorXd point(std::size_t g) const;                 // coordinates of grid point g

private:
    int dim_;
    int M_;
    double weight_;
    Eigen::MatrixXd trig_;   // G x N, f_m(k_m . x_g)
    Eigen::MatrixXd dtrig_;  // G x N, f_m'(k_m . x_g)
    Eigen::MatrixXd pol_;    // N x d, c p_m
    Eigen::MatrixXd pk_;     // N x d^2, c p_mc k_me
};

// sup over grid points of the magnitude of the most negative eigenvalue of
// the symmetric part of the sampled gradient (0 where it is PSD).
double neg_part_spectral_sup(int dim, const Eigen::MatrixXd& gradients);

// 2 |(grad phi)_{sym,-}|_inf for phi in the basis span, taking the larger of
// the quadrature-grid and the 2x refined-grid sups.
class NegPartWeight {
public:
    explicit NegPartWeight(const Basis& basis);
    double operator()(const Eigen::VectorXd& a) const;

private:
    GridEvaluator coarse_;
    GridEvaluator fine_;
};

}  // namespace sgns
