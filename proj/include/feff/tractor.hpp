#pragma once

// Standard tractor bundle in the splitting of a fixed metric.
//
// Frame slots: 0 = Y direction, 1..n = Z directions (chart order), n+1 = X
// direction. A tractor V = sigma Y + mu^a Z_a + rho X has components
// V^0 = sigma, V^{a+1} = mu^a, V^{n+1} = rho, and
//   h(V, V) = 2 sigma rho + g_ab mu^a mu^b.
// Lowered injectors: X_A = delta_A^0, Y_A = delta_A^{n+1}, Z_A^a = delta_A^{a+1}.
//
// The tractor connection:
//   nabla_a sigma = d_a sigma - mu_a
//   nabla_a mu^b  = nabla_a mu^b + delta_a^b rho + P_a^b sigma
//   nabla_a rho   = d_a rho - P_ab mu^b

#include <span>
#include <vector>

#include "feff/geocalc.hpp"
#include "feff/identity.hpp"

namespace feff {

class Tractor {
 public:
  explicit Tractor(const Curvature& curv);

  const Curvature& curvature() const { return curv_; }
  int dimension() const { return curv_.dimension(); }
  int rank() const { return curv_.dimension() + 2; }
  int y_slot() const { return 0; }
  int z_slot(int a) const { return a + 1; }
  int x_slot() const { return curv_.dimension() + 1; }

  const SymField& metric() const { return h_; }           // h_AB
  const SymField& inverse_metric() const { return hinv_; }  // h^AB
  const SymField& connection() const { return gt_; }      // Gamma^T(a, A, B)

  const SymField& X_lower() const { return x_low_; }
  const SymField& X_upper() const { return x_up_; }
  const SymField& Y_lower() const { return y_low_; }
  const SymField& Y_upper() const { return y_up_; }
  const SymField& Z_lower() const { return z_low_; }  // Z_A^a, slots (tractor lower, tensor upper)
  const SymField& Z_upper() const { return z_up_; }   // Z^{A a}

  Connection coupled() const { return Connection{&curv_.christoffel(), &gt_}; }
  /// Coupled Levi-Civita / tractor derivative: one lower tensor slot prepended.
  SymField nabla(const SymField& t) const { return covariant_derivative(t, coupled()); }

  /// Raise or lower one tractor slot with h.
  SymField raise(const SymField& t, int slot) const;
  SymField lower(const SymField& t, int slot) const;

  /// Omega_abAB = Z_A^c Z_B^d C_abcd - 2 X_[A Z_B]^c A_cab, slots (a, b, A, B) all lower.
  SymField curvature_formula() const;
  /// Omega_ab^A_B from nabla_a nabla_b E - nabla_b nabla_a E on the frame basis E.
  SymField curvature_commutator() const;

 private:
  const Curvature& curv_;
  SymField h_, hinv_, gt_;
  SymField x_low_, x_up_, y_low_, y_up_, z_low_, z_up_;
};

/// Injector algebra, h-compatibility and the symmetries of Omega, including
/// the formula/commutator cross-check.
std::vector<Identity> tractor_identities(const Tractor& tr);

/// Number of positive eigenvalues of h at each point compared with p + 1.
/// Returns the first offending point index, or -1.
int check_tractor_signature(const Tractor& tr, std::span<const double> points);

}  // namespace feff
