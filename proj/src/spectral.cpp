#include "ymh/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ymh {

double TwistedOperator::h() const { return 2.0 * std::numbers::pi / n_theta; }

TwistedOperator assemble(const AlgebraElement& alpha, int n_theta) {
    if (n_theta < 8) throw std::invalid_argument("assemble: n_theta must be at least 8");
    const int K = alpha.K();
    const int N = K * n_theta;
    TwistedOperator op;
    op.alpha = alpha;
    op.n_theta = n_theta;
    const double inv_h = 1.0 / op.h();
    const Eigen::MatrixXd X = alpha.matrix();
    op.d = Eigen::MatrixXd::Zero(N, N);
    for (int j = 0; j < n_theta; ++j) {
        const int jp = (j + 1) % n_theta;
        for (int a = 0; a < K; ++a) {
            op.d(j * K + a, jp * K + a) += inv_h;
            op.d(j * K + a, j * K + a) -= inv_h;
        }
        op.d.block(j * K, j * K, K, K) += X;
    }
    op.L = op.d.transpose() * op.d;
    op.L = 0.5 * (op.L + op.L.transpose()).eval();
    return op;
}

SpectralReport spectrum(const TwistedOperator& op, double kernel_tol) {
    if (!(kernel_tol > 0.0)) throw std::invalid_argument("spectrum: kernel_tol must be positive");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.L);
    if (es.info() != Eigen::Success) throw std::runtime_error("spectrum: eigensolver failed");
    SpectralReport rep;
    const auto& ev = es.eigenvalues();
    rep.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    rep.eigenvectors = es.eigenvectors();
    rep.kernel_dim = 0;
    for (double v : rep.eigenvalues)
        if (v < kernel_tol) ++rep.kernel_dim;
    if (rep.kernel_dim >= static_cast<int>(rep.eigenvalues.size()))
        throw std::runtime_error("spectrum: operator has no positive eigenvalue");
    rep.sigma_sq = rep.eigenvalues[rep.kernel_dim];
    rep.poincare_constant = 1.0 / rep.sigma_sq;
    return rep;
}

Eigen::MatrixXd kernel_basis(const SpectralReport& rep) { return rep.eigenvectors.leftCols(rep.kernel_dim); }

PoincareResult poincare_check(const TwistedOperator& op, const SpectralReport& rep, const Eigen::VectorXd& u) {
    if (u.size() != op.d.cols()) throw std::invalid_argument("poincare_check: field size mismatch");
    const Eigen::VectorXd du = op.d * u;
    const Eigen::VectorXd ddu = op.d * du;
    PoincareResult r;
    r.lhs = op.h() * du.squaredNorm();
    r.rhs = rep.poincare_constant * op.h() * ddu.squaredNorm();
    r.pass = r.lhs <= r.rhs * (1.0 + 1e-8);
    return r;
}

PoincareResult poincare_check(const TwistedOperator& op, const Eigen::VectorXd& u) {
    return poincare_check(op, spectrum(op), u);
}

DegenerationResult classify_degeneration(const std::vector<AlgebraElement>& alphas, const AlgebraElement& alpha_inf,
                                         int n_theta, double kernel_tol, double angle_tol) {
    if (alphas.empty()) throw std::invalid_argument("classify_degeneration: empty sequence");
    DegenerationResult out;
    const SpectralReport lim = spectrum(assemble(alpha_inf, n_theta), kernel_tol);
    const Eigen::MatrixXd V = kernel_basis(lim);
    out.limit_kernel_dim = lim.kernel_dim;
    for (const auto& a : alphas) {
        const SpectralReport rep = spectrum(assemble(a, n_theta), kernel_tol);
        const Eigen::MatrixXd Kn = kernel_basis(rep);
        double angle = 0.0;
        if (V.cols() > 0) {
            if (Kn.cols() == 0) angle = std::numbers::pi / 2;
            else {
                const Eigen::MatrixXd resid = V - Kn * (Kn.transpose() * V);
                Eigen::JacobiSVD<Eigen::MatrixXd> svd(resid);
                angle = std::asin(std::clamp(svd.singularValues()[0], 0.0, 1.0));
            }
        }
        out.kernel_dims.push_back(rep.kernel_dim);
        out.containment_angle.push_back(angle);
        out.poincare_constants.push_back(rep.poincare_constant);
        out.alpha_defect.push_back((a - alpha_inf).norm());
        out.max_tail_poincare = std::max(out.max_tail_poincare, rep.poincare_constant);
        if (angle > angle_tol) out.degenerating = true;
    }
    return out;
}

nlohmann::json to_json(const SpectralReport& rep, int m) {
    nlohmann::json j;
    j["alpha_id"] = rep.alpha_id;
    const int k = std::min<int>(m, static_cast<int>(rep.eigenvalues.size()));
    j["eigenvalues"] = std::vector<double>(rep.eigenvalues.begin(), rep.eigenvalues.begin() + k);
    j["kernel_dim"] = rep.kernel_dim;
    j["sigma_sq"] = rep.sigma_sq;
    j["poincare_constant"] = rep.poincare_constant;
    return j;
}

}  // namespace ymh
