#include "dualrail/channels.hpp"

#include <cmath>
#include <stdexcept>

namespace dualrail {

void LossParams::check() const {
    if (l1 < 0.0 || l1 > 1.0 || l2 < 0.0 || l2 > 1.0)
        throw std::invalid_argument("losses must be in [0,1]");
}

void DecayModel::check() const {
    if (!(eta0 > 0.0) || eta0 > 1.0)
        throw std::invalid_argument("eta0 must be in (0,1]");
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
}

double DecayModel::efficiency_at(double t) const {
    check();
    if (t < 0.0) throw std::invalid_argument("time must be nonnegative");
    return eta0 * std::exp(-t / tau);
}

void DephasingParams::check() const {
    if (sigma < 0.0) throw std::invalid_argument("sigma must be nonnegative");
}

void ReleaseSchedule::check() const {
    if (t1 < 0.0 || t2 < 0.0)
        throw std::invalid_argument("release times must be nonnegative");
}

std::vector<Matrix> loss_kraus(int dim, double loss) {
    if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
    if (loss < 0.0 || loss > 1.0) throw std::invalid_argument("loss must be in [0,1]");
    // E_k = sum_n sqrt(C(n,k) (1-L)^(n-k) L^k) |n-k><n|
    std::vector<Matrix> ops;
    ops.reserve(dim);
    for (int k = 0; k < dim; ++k) {
        Matrix e = Matrix::Zero(dim, dim);
        for (int n = k; n < dim; ++n) {
            double binom = 1.0;
            for (int j = 0; j < k; ++j) binom *= static_cast<double>(n - j) / (j + 1);
            e(n - k, n) = std::sqrt(binom * std::pow(1.0 - loss, n - k) * std::pow(loss, k));
        }
        ops.push_back(std::move(e));
    }
    return ops;
}

namespace {

Matrix apply_single_mode_loss(const Matrix& rho, int d, double loss, int mode) {
    if (loss == 0.0) return rho;
    const auto kraus = loss_kraus(d, loss);
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    Matrix lifted = Matrix::Zero(rho.rows(), rho.cols());
    for (const Matrix& e : kraus) {
        lifted.setZero();
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                if (e(i, j) == Complex{}) continue;
                if (mode == 1)
                    for (int s = 0; s < d; ++s) lifted(i * d + s, j * d + s) = e(i, j);
                else
                    for (int s = 0; s < d; ++s) lifted(s * d + i, s * d + j) = e(i, j);
            }
        out += lifted * rho * lifted.adjoint();
    }
    return out;
}

} // namespace

Matrix apply_loss_map(const Matrix& rho, int mode_dim, double l1, double l2) {
    Matrix out = apply_single_mode_loss(rho, mode_dim, l1, 1);
    return apply_single_mode_loss(out, mode_dim, l2, 2);
}

Matrix apply_dephasing_map(const Matrix& rho, int mode_dim, double sigma) {
    const int d = mode_dim;
    Matrix out = rho;
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l)
            for (int m = 0; m < d; ++m)
                for (int n = 0; n < d; ++n) {
                    const int delta = (k - l) - (m - n);
                    if (delta == 0) continue;
                    out(k * d + l, m * d + n) *=
                        std::exp(-sigma * sigma * delta * delta / 8.0);
                }
    return out;
}

DensityMatrix loss_channel(const DensityMatrix& rho, const LossParams& p) {
    p.check();
    return DensityMatrix(rho.cutoff(),
                         apply_loss_map(rho.elements(), rho.mode_dim(), p.l1, p.l2));
}

DensityMatrix dephasing_channel(const DensityMatrix& rho, const DephasingParams& p) {
    p.check();
    return DensityMatrix(rho.cutoff(),
                         apply_dephasing_map(rho.elements(), rho.mode_dim(), p.sigma));
}

DensityMatrix detuning_rotation(const DensityMatrix& rho, const ReleaseSchedule& s) {
    s.check();
    return phase_rotation(rho, s.delta_omega * s.t1, s.delta_omega * s.t2);
}

} // namespace dualrail
