#pragma once

// Riemannian curvature of a symbolic metric.
//
// Conventions:
//   [nabla_a, nabla_b] v^c = R_ab^c_d v^d,   Ric_bd = R_ab^a_d,
//   R_abcd = g_ce R_ab^e_d,
//   P_ab = (Ric_ab - Scal/(2(n-1)) g_ab) / (n-2),   J = g^ab P_ab,
//   C_abcd = R_abcd - (g_ac P_bd - g_bc P_ad + g_bd P_ac - g_ad P_bc),
//   A_abc = nabla_b P_ca - nabla_c P_ba.
// With these, nabla^c C_abcd = (n-3) A_dab.
//
// Storage order: Gamma(c, a, b) = Gamma^c_ab, riemann(a, b, c, d) = R_ab^c_d.

#include <span>
#include <vector>

#include "feff/geometry.hpp"
#include "feff/identity.hpp"
#include "feff/symfield.hpp"

namespace feff {

/// Connection data for covariant differentiation. Tensor slots use the
/// Levi-Civita symbols; tractor slots use `tractor` (Gamma^T(a, A, B) with
/// nabla_a V^A = d_a V^A + Gamma^T_a^A_B V^B) and are rejected without it.
struct Connection {
  const SymField* christoffel = nullptr;
  const SymField* tractor = nullptr;
};

/// nabla_a t: one lower tensor slot prepended, Leibniz over every slot.
SymField covariant_derivative(const SymField& t, const Connection& conn);

/// Symbolic determinant by cofactor expansion with shared minors.
expr::Expr determinant(const SymField& m);
/// Symbolic inverse as adjugate / determinant.
SymField inverse(const SymField& m, Shape inverse_shape);

/// Gamma^c_ab = 1/2 g^cd (d_a g_db + d_b g_da - d_d g_ab), stored (c, a, b).
SymField christoffel(const SymField& g, const SymField& ginv);
SymField christoffel(const SymField& g);

class Curvature {
 public:
  explicit Curvature(const GeometrySpec& spec);

  const GeometrySpec& spec() const { return spec_; }
  expr::Pool& pool() const { return *spec_.pool; }
  int dimension() const { return spec_.n; }

  const SymField& metric() const { return spec_.metric; }
  const SymField& inverse_metric() const { return ginv_; }
  expr::Expr det() const { return det_; }
  const SymField& christoffel() const { return gamma_; }
  const SymField& riemann() const { return riem_; }
  const SymField& riemann_lower() const { return riem_low_; }
  const SymField& ricci() const { return ric_; }
  expr::Expr scalar() const { return scal_; }
  const SymField& schouten() const { return schouten_; }
  expr::Expr schouten_trace() const { return j_; }
  const SymField& weyl() const { return weyl_; }
  const SymField& cotton() const { return cotton_; }

  Connection levi_civita() const { return Connection{&gamma_, nullptr}; }
  SymField nabla(const SymField& t) const { return covariant_derivative(t, levi_civita()); }

  /// Index gymnastics with the representative metric; `slot` must be a
  /// tensor slot of the opposite variance.
  SymField raise(const SymField& t, int slot) const;
  SymField lower(const SymField& t, int slot) const;

 private:
  GeometrySpec spec_;
  SymField ginv_;
  expr::Expr det_;
  SymField gamma_, riem_, riem_low_, ric_, schouten_, weyl_, cotton_;
  expr::Expr scal_, j_;
};

/// Numeric curvature at one point.
struct CurvatureBundle {
  std::vector<double> point;
  NumField metric, Gamma, Riem, Ric, P, C, A;
  double Scal = 0.0;
  double J = 0.0;
};

CurvatureBundle curvature_bundle(const Curvature& curv, std::span<const double> point);

/// Symbolic jets of the candidate field kappa built from a curvature package.
struct KappaJets {
  SymField upper;     // kappa^a
  SymField lower;     // kappa_a
  SymField nabla;     // nabla_a kappa_b
  SymField nabla2;    // nabla_d nabla_a kappa_b
  SymField nabla_up;  // nabla^a kappa^b
  expr::Expr div;     // nabla_a kappa^a
  SymField grad_div;  // d_a (nabla_b kappa^b)
  expr::Expr norm;    // g_ab kappa^a kappa^b
};

KappaJets kappa_jets(const Curvature& curv);

/// Throws NumericalError naming the first sample point where g is singular,
/// InputError where its eigenvalue sign pattern differs from the declared
/// signature.
void validate_metric(const Curvature& curv, std::span<const double> points);

/// nabla_(a kappa_b) - (1/n)(nabla_c kappa^c) g_ab.
SymField conformal_killing_tensor(const Curvature& curv, const KappaJets& k);

/// Pure curvature identities of the metric (no kappa).
std::vector<Identity> curvature_identities(const Curvature& curv);

/// Conformal Killing equation, isotropy and the Weyl/Cotton insertions.
std::vector<Identity> kappa_identities(const Curvature& curv, const KappaJets& k);

/// Max-norm of the conformal Killing tensor over the points.
double conformal_killing_residual(const Curvature& curv, std::span<const double> points);

struct InsertionResiduals {
  double weyl = 0.0;            // max |kappa^a C_abcd|
  double cotton = 0.0;          // max |kappa^a A_cab|
  double cotton_first = 0.0;    // max |kappa^d A_dab|
  double weyl_gradient = 0.0;   // max |C_abcd nabla^c kappa^d|
  double bianchi_chain = 0.0;   // max |C_abcd nabla^c kappa^d + (n-3) kappa^d A_dab|
};

InsertionResiduals insertion_residuals(const Curvature& curv, std::span<const double> points);

}  // namespace feff
