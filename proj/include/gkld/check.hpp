#pragma once

#include <vector>

#include "gkld/oracle.hpp"

namespace gkld {

/// Full verification bundle for one instance: Jacobian vs central FD
/// (vec basis, elementwise), vech Hessian vs FD, symmetry and transpose
/// pairings, and stationarity/PSD checks when q == p.
inline std::vector<CheckReport> instance_checks(const GaussianPair& p,
                                                double tol_grad = 1e-6,
                                                double tol_hess = 1e-4) {
  std::vector<CheckReport> reports;

  // Jacobian against elementwise central differences of the extended
  // formula in vec coordinates.
  {
    const JacobianResult jac = assemble_jacobian(p, Basis::Vec);
    const Vector fd = fd_gradient(pack(p, Basis::Vec));
    const double scale = std::max(1.0, jac.assembled.cwiseAbs().maxCoeff());
    const double err =
        (jac.assembled - fd).cwiseAbs().maxCoeff() / scale;
    reports.push_back(make_report("jacobian_vs_fd_vec", err, tol_grad));
  }

  // Hessian against FD second differences in vech coordinates.
  {
    const HessianResult hess = assemble_hessian(p, Basis::Vech);
    const Matrix fd = fd_hessian(pack(p, Basis::Vech));
    const double scale = std::max(1.0, inf_norm(hess.assembled));
    const double err = (hess.assembled - fd).cwiseAbs().maxCoeff() / scale;
    reports.push_back(make_report("hessian_vs_fd_vech", err, tol_hess));
  }

  // Assembled symmetry and per-block transpose pairing, both bases.
  for (Basis basis : {Basis::Vec, Basis::Vech}) {
    const char* tag = basis == Basis::Vec ? "vec" : "vech";
    const HessianResult hess = assemble_hessian(p, basis);
    const double scale = std::max(1.0, inf_norm(hess.assembled));
    const double sym =
        (hess.assembled - hess.assembled.transpose()).cwiseAbs().maxCoeff();
    reports.push_back(make_report(std::string("hessian_symmetry_") + tag,
                                  sym / scale, 1e-12));
    double pairing = 0.0;
    for (auto row : kBlockOrder)
      for (auto col : kBlockOrder)
        pairing = std::max(
            pairing, (hess.block(row, col).transpose() - hess.block(col, row))
                             .cwiseAbs()
                             .maxCoeff());
    reports.push_back(make_report(std::string("hessian_block_pairing_") + tag,
                                  pairing / scale, 1e-12));
  }

  // At q == p the KLD has a global minimum: zero gradient, PSD curvature.
  const bool stationary = (p.m - p.w).cwiseAbs().maxCoeff() == 0.0 &&
                          (p.S - p.V).cwiseAbs().maxCoeff() == 0.0;
  if (stationary) {
    const JacobianResult jac = assemble_jacobian(p, Basis::Vech);
    const double jscale = std::max(1.0, inf_norm(p.V));
    reports.push_back(make_report(
        "stationarity", jac.assembled.cwiseAbs().maxCoeff() / jscale, 1e-12));
    const HessianResult hess = assemble_hessian(p, Basis::Vech);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(
        0.5 * (hess.assembled + hess.assembled.transpose()));
    const double hnorm = eig.eigenvalues().cwiseAbs().maxCoeff();
    const double min_eig = eig.eigenvalues().minCoeff();
    reports.push_back(make_report("minimum_psd",
                                  std::max(0.0, -min_eig),
                                  1e-10 * std::max(1.0, hnorm),
                                  "min eigenvalue " + std::to_string(min_eig)));
  }
  return reports;
}

}  // namespace gkld
