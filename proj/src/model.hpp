// model.hpp — Spin-chain subsystem operators and the configuration-dependent
// adiabatic Hamiltonian H(R) = H_S - sum_ks b_ks sigma_z^(ks).

#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace spinbath {

struct SpinChainParams {
    int n_spins{2};
    double j_x{1.0};
    double j_y{1.0};
    double j_z{0.5};
};

// Dimension guard: dense 2^n x 2^n matrices stay cheap only for short chains.
inline constexpr int kMaxSpins = 12;

// Natural product basis, spin 1 = leftmost Kronecker factor, "up" first:
// for two spins |1> = |1,1>, |2> = |1,0>, |3> = |0,1>, |4> = |0,0>.
int subsystem_dimension(int n_spins);

// H_S = -sum over nearest-neighbour bonds of (j_x XX + j_y YY + j_z ZZ).
// Real symmetric for any couplings.
Eigen::MatrixXd spin_hamiltonian(const SpinChainParams& params);

// sigma_z acting on spin ks (1-based); diagonal with entries +-1.
Eigen::MatrixXd spin_z_operator(int ks, int n_spins);

// Diagonal of sigma_z^(ks) as a sign vector; the full matrix is rarely needed.
std::vector<double> spin_z_diagonal(int ks, int n_spins);

// H(R) folded through the per-bath scalars b_ks = sum_I c_I R_{I,ks}.
Eigen::MatrixXd adiabatic_hamiltonian(const Eigen::MatrixXd& h_s,
                                      std::span<const double> b);

// Model operators bundled for the trajectory engine: immutable, shareable.
struct ChainModel {
    SpinChainParams params;
    int dim{4};
    Eigen::MatrixXd h_s;
    std::vector<std::vector<double>> sz_diag;  // [ks][m], entries +-1

    explicit ChainModel(const SpinChainParams& p);

    bool has_fast_frame() const {
        return params.n_spins == 2 && params.j_x == params.j_y;
    }
};

}  // namespace spinbath
