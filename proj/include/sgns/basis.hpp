#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace sgns {

// Integer wavevector; components beyond the spatial dimension are zero.
using WaveVector = std::array<int, 3>;

enum class Phase : std::uint8_t { Cos = 0, Sin = 1 };

// One real solenoidal mode  v(x) = c * p * f(k.x)  with f = cos or sin.
struct Mode {
    WaveVector k{};
    int pol = 0;
    Phase phase = Phase::Cos;
    std::array<double, 3> p{};  // unit polarization, orthogonal to k
    int k2 = 0;                 // |k|^2, the Stokes eigenvalue
};

int dot(const WaveVector& a, const WaveVector& b);
int max_abs(const WaveVector& k);

// Returns the representative of {k, -k} whose first nonzero component is
// positive, together with the sign that maps k onto it.
std::pair<WaveVector, int> canonicalize(const WaveVector& k);

class Basis {
public:
    static constexpr int kOrderingVersion = 1;

    static Basis build(int dim, int cutoff);

    int dim() const { return dim_; }
    int cutoff() const { return cutoff_; }
    std::size_t size() const { return modes_.size(); }
    int polarizations() const { return dim_ == 2 ? 1 : 2; }

    // L2 normalization constant sqrt(2 / (2 pi)^d).
    double norm() const { return norm_; }
    double volume() const;

    const Mode& mode(std::size_t i) const { return modes_[i]; }
    const std::vector<Mode>& modes() const { return modes_; }
    const std::vector<WaveVector>& wavevectors() const { return wavevectors_; }

    // Index of the first mode carried by canonical wavevector k.
    std::optional<std::size_t> first_index(const WaveVector& k) const;
    std::optional<std::size_t> find(const WaveVector& k, int pol, Phase phase) const;

    Eigen::VectorXd laplacian_eigenvalues() const;
    int max_k2() const;

private:
    int dim_ = 2;
    int cutoff_ = 1;
    double norm_ = 0.0;
    std::vector<Mode> modes_;
    std::vector<WaveVector> wavevectors_;
    std::unordered_map<std::int64_t, std::size_t> lookup_;
};

std::int64_t wavevector_key(const WaveVector& k);

// Polarization vectors for a canonical wavevector (one in 2D, two in 3D).
std::vector<std::array<double, 3>> polarizations(int dim, const WaveVector& k);

// A vector field written as  mean + sum_k [A_k cos(k.x) + B_k sin(k.x)]
// over an explicit list of wavevectors.
struct FourierField {
    int dim = 2;
    std::vector<WaveVector> k;
    Eigen::VectorXd mean;
    std::vector<Eigen::VectorXd> cos_coef;
    std::vector<Eigen::VectorXd> sin_coef;

    static FourierField zeros(int dim, const std::vector<WaveVector>& k);
};

// L2 projection onto the solenoidal, mean-free span of the basis. The field
// must be indexed by exactly the basis wavevector list.
Eigen::VectorXd leray_project(const Basis& basis, const FourierField& field);

// Inverse map: the Fourier representation of sum_i a_i v_i.
FourierField to_fourier(const Basis& basis, const Eigen::VectorXd& a);

// Samples of a vector field on the uniform M^d grid, point-major with the
// first coordinate varying slowest.
struct GridSamples {
    int dim = 2;
    int M = 0;
    Eigen::MatrixXd values;  // (M^d) x dim
};

int min_exact_grid(const Basis& basis);
Eigen::VectorXd project_field(const Basis& basis, const GridSamples& samples);

}  // namespace sgns
