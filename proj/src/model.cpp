#include "model.hpp"

#include <stdexcept>
#include <string>

namespace spinbath {

namespace {

// Spin ks (1-based) is "up" in basis state m when bit (n_spins-ks) of m is 0.
inline double z_sign(int m, int ks, int n_spins) {
    return ((m >> (n_spins - ks)) & 1) ? -1.0 : 1.0;
}

void check_params(const SpinChainParams& p) {
    if (p.n_spins < 2) {
        throw std::invalid_argument("spin chain needs at least 2 spins");
    }
    if (p.n_spins > kMaxSpins) {
        throw std::invalid_argument("n_spins exceeds configured maximum " +
                                    std::to_string(kMaxSpins));
    }
}

}  // namespace

int subsystem_dimension(int n_spins) {
    if (n_spins < 1 || n_spins > kMaxSpins) {
        throw std::invalid_argument("n_spins out of range");
    }
    return 1 << n_spins;
}

Eigen::MatrixXd spin_hamiltonian(const SpinChainParams& params) {
    check_params(params);
    const int n = params.n_spins;
    const int dim = subsystem_dimension(n);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);

    // Open chain, bonds (k, k+1). sigma_x flips a spin; sigma_y contributes
    // the extra sign (-1)^(number of down spins among the flipped pair before
    // flipping... handled via the standard matrix elements below).
    for (int k = 1; k < n; ++k) {
        for (int m = 0; m < dim; ++m) {
            const double sk = z_sign(m, k, n);
            const double sk1 = z_sign(m, k + 1, n);
            // ZZ term, diagonal
            h(m, m) -= params.j_z * sk * sk1;
            // XX and YY connect m to m with both spins k, k+1 flipped
            const int flipped = m ^ ((1 << (n - k)) | (1 << (n - k - 1)));
            // <flipped| XX |m> = 1 ; <flipped| YY |m> = -sk*sk1
            h(flipped, m) -= params.j_x * 1.0;
            h(flipped, m) -= params.j_y * (-sk * sk1);
        }
    }
    return h;
}

std::vector<double> spin_z_diagonal(int ks, int n_spins) {
    if (ks < 1 || ks > n_spins) {
        throw std::invalid_argument("spin index out of range");
    }
    const int dim = subsystem_dimension(n_spins);
    std::vector<double> d(static_cast<size_t>(dim));
    for (int m = 0; m < dim; ++m) {
        d[static_cast<size_t>(m)] = z_sign(m, ks, n_spins);
    }
    return d;
}

Eigen::MatrixXd spin_z_operator(int ks, int n_spins) {
    const auto d = spin_z_diagonal(ks, n_spins);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.size()),
                                              static_cast<Eigen::Index>(d.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        m(i, i) = d[static_cast<size_t>(i)];
    }
    return m;
}

Eigen::MatrixXd adiabatic_hamiltonian(const Eigen::MatrixXd& h_s,
                                      std::span<const double> b) {
    const Eigen::Index dim = h_s.rows();
    if (h_s.cols() != dim) {
        throw std::invalid_argument("adiabatic_hamiltonian: H_S must be square");
    }
    int n_spins = 0;
    while ((Eigen::Index{1} << n_spins) < dim) ++n_spins;
    if ((Eigen::Index{1} << n_spins) != dim ||
        static_cast<Eigen::Index>(b.size()) != n_spins) {
        throw std::invalid_argument("adiabatic_hamiltonian: dimension mismatch");
    }
    Eigen::MatrixXd h = h_s;
    for (int ks = 1; ks <= n_spins; ++ks) {
        for (Eigen::Index m = 0; m < dim; ++m) {
            h(m, m) -= b[static_cast<size_t>(ks - 1)] *
                       z_sign(static_cast<int>(m), ks, n_spins);
        }
    }
    return h;
}

ChainModel::ChainModel(const SpinChainParams& p) : params(p) {
    check_params(p);
    dim = subsystem_dimension(p.n_spins);
    h_s = spin_hamiltonian(p);
    sz_diag.reserve(static_cast<size_t>(p.n_spins));
    for (int ks = 1; ks <= p.n_spins; ++ks) {
        sz_diag.push_back(spin_z_diagonal(ks, p.n_spins));
    }
}

}  // namespace spinbath
