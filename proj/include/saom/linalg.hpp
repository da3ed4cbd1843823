#ifndef SAOM_LINALG_HPP
#define SAOM_LINALG_HPP

#include <Eigen/Dense>

namespace saom {

// Moore-Penrose pseudo-inverse of a symmetric PSD matrix via eigen
// decomposition; eigenvalues below rel_cutoff * lambda_max are treated
// as zero.
inline Eigen::MatrixXd pseudo_inverse_psd(const Eigen::MatrixXd& m, double rel_cutoff = 1e-8) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double lmax = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
  const double cut = lmax * rel_cutoff;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    if (ev[k] > cut) inv[k] = 1.0 / ev[k];
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

// SVD pseudo-inverse for general (possibly non-symmetric) matrices.
inline Eigen::MatrixXd pseudo_inverse_svd(const Eigen::MatrixXd& m, double rel_cutoff = 1e-10) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cut = (sv.size() ? sv[0] : 0.0) * rel_cutoff;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv[k] > cut) inv[k] = 1.0 / sv[k];
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace saom

#endif
