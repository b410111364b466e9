#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "sgns/basis.hpp"

namespace sgns {

// Closed-form  int (va . grad) vb . vc dx  over the torus for three real
// trigonometric modes sharing the normalization constant `norm`.
double triad_integral(int dim, double norm, const Mode& va, const Mode& vb, const Mode& vc);

// Canonical wavevectors q with  +-ka +- kb +- q = 0, q != 0.
std::vector<WaveVector> triad_partners(const WaveVector& ka, const WaveVector& kb);

struct TriadEntry {
    std::uint32_t i;
    std::uint32_t k;
    std::uint32_t j;
    double value;
};

// Sparse b_{i,k,j}; entries sorted by (j, i, k).
class ConvectionTensor {
public:
    ConvectionTensor() = default;
    ConvectionTensor(std::size_t n, std::vector<TriadEntry> entries);

    std::size_t dimension() const { return n_; }
    std::size_t nnz() const { return entries_.size(); }
    const std::vector<TriadEntry>& entries() const { return entries_; }

    // out_j = sum_{i,k} b_{i,k,j} a_i a_k
    void contract(const Eigen::VectorXd& a, Eigen::VectorXd& out) const;
    Eigen::VectorXd contract(const Eigen::VectorXd& a) const;

    double at(std::size_t i, std::size_t k, std::size_t j) const;
    double frobenius_norm() const;

private:
    std::size_t n_ = 0;
    std::vector<TriadEntry> entries_;
};

ConvectionTensor convection_tensor(const Basis& basis);

}  // namespace sgns
