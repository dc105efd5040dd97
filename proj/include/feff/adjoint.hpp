#pragma once

// Adjoint tractor built from a vector field kappa:
//   K_B  = Z_B^a kappa_a - (1/n) X_B nabla_a kappa^a
//   s_AB = Y_A K_B + Z_A^a nabla_a K_B - (1/n) X_A (nabla^a nabla_a + J) K_B
// and the scalar
//   lambda = (1/n^2)(nabla_a kappa^a)^2 - kappa^a P_ab kappa^b - (1/n) kappa^a nabla_a nabla_b kappa^b.

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "feff/geocalc.hpp"
#include "feff/identity.hpp"
#include "feff/tractor.hpp"

namespace feff {

struct AdjointSection {
  SymField K;        // K_B
  SymField K_up;     // K^B
  SymField nabla_K;  // nabla_a K_B
  SymField s;        // s_AB
  SymField s_mixed;  // s^A_B = h^AC s_CB
  SymField s_up;     // s^AB
  SymField nabla_s;  // nabla_a s_BC
  SymField ell;      // ell_b
  expr::Expr div;
  expr::Expr lambda;  // Sparling scalar
};

AdjointSection splitting(const Tractor& tr, const KappaJets& k);

/// Sparling scalar from curvature and kappa jets alone.
expr::Expr sparling_scalar(const Curvature& curv, const KappaJets& k);

/// Residual identities: parallelism, Omega contractions, splitting algebra,
/// lambda consistency, the preferred-scale identities and the Killing
/// specialisation. Identities that need extra hypotheses are marked
/// diagnostic.
std::vector<Identity> adjoint_identities(const Tractor& tr, const KappaJets& k, const AdjointSection& sec);

/// max over points and components of |nabla_a s_BC|.
double parallel_residual(const Tractor& tr, const AdjointSection& sec, std::span<const double> points, int workers = 1);

struct LambdaStats {
  std::vector<double> values;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double spread = 0.0;
};

LambdaStats lambda_stats(std::vector<double> values);

struct SquareReport {
  std::vector<double> lambda_est;  // trace(s o s) / (n + 2) per point
  double residual = 0.0;           // max |s o s - lambda_est id|
  double max_abs = 0.0;            // max |s o s|
  std::vector<int> kernel_dims;    // numerical kernel dimension of s per point
};

struct ComplexTraceReport {
  bool applicable = false;
  double trace = 0.0;             // max |Omega_ab^A_A|
  double j_trace = 0.0;           // max |Omega_ab^A_B J^B_A|
  double j_square_residual = 0.0;  // max |J o J + id|
};

struct AdjointNumerics {
  LambdaStats lambda;
  SquareReport square;
  ComplexTraceReport complex;
};

/// Pointwise linear algebra on s and Omega. The complex trace check runs only
/// where every lambda_est is below -lambda_floor.
AdjointNumerics adjoint_numerics(const Tractor& tr, const AdjointSection& sec, std::span<const double> points,
                                 double lambda_floor, int workers = 1);

/// J = s / sqrt(-lambda_est) at one point, when lambda_est < -lambda_floor.
std::optional<Eigen::MatrixXd> complex_structure(const Tractor& tr, const AdjointSection& sec,
                                                 std::span<const double> point, double lambda_floor);

}  // namespace feff
