#pragma once

// Parallel transport of tractor frames around closed coordinate loops.
//
// A loop is a chain of segments gamma(t), t in [0, 1], written as
// expressions in a parameter pool with the single coordinate "t". Transport
// integrates dV/dt = -gamma'^a(t) Gamma^T_a(gamma(t)) V with classical RK4;
// the holonomy element H has the transported frame basis as columns.
// Four loops are integrated together, one per tape lane.

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "feff/expr.hpp"
#include "feff/geometry.hpp"
#include "feff/tractor.hpp"

namespace feff {

struct Segment {
  std::vector<expr::Expr> curve;  // gamma^a(t)
};

struct Loop {
  std::string id;
  std::vector<Segment> segments;
};

struct HolonomyOptions {
  double epsilon = 0.0;      // rectangle side; 0 means 0.05 * smallest domain width
  int steps = 2000;          // RK4 steps per four-segment loop
  int loops_per_plane = 2;   // rectangles of side epsilon, epsilon/2, ...
  bool compositions = true;  // products of rectangles in consecutive planes
};

struct LoopSpec {
  std::vector<double> base;
  std::shared_ptr<expr::Pool> param;  // coordinates {"t"}
  std::vector<Loop> loops;
  int steps_per_segment = 500;
};

/// Rectangles in every coordinate plane at `base`, sides epsilon / 2^k.
/// Loop ids: "rect_<i><j>_e<k>" and "comp_<p>".
LoopSpec rectangle_loops(const GeometrySpec& spec, const std::vector<double>& base, const HolonomyOptions& opt);

/// Same loop traversed backwards.
Loop reversed(const Loop& loop, expr::Pool& param);

struct HolonomyElement {
  std::string loop_id;
  Eigen::MatrixXd H;
};

/// Throws InputError if a loop is not closed or leaves the domain box.
void validate_loops(const LoopSpec& spec, const GeometrySpec& geom);

std::vector<HolonomyElement> transport(const Tractor& tr, const LoopSpec& loops, int workers = 1);

struct ElementReport {
  std::string loop_id;
  double distance_from_identity = 0.0;  // max |H - id|
  double orthogonality = 0.0;           // max |H^T h H - h|
  double commutator = 0.0;              // max |H J - J H|
  double det_c_error = 0.0;             // |det_C(H) - 1|
  double reversal = 0.0;                // max |H_rev H - id|
};

struct ScalingRecord {
  std::string plane;
  double norm_eps = 0.0;
  double norm_half = 0.0;
  double ratio = 0.0;
  double curvature_term = 0.0;  // epsilon^2 max_AB |Omega_ij^A_B(base)|
  bool above_noise = false;
  /// above_noise and curvature_term >= |H(epsilon) - id| / 2: the ratio
  /// should then be close to 4.
  bool second_order = false;
};

struct HolonomyReport {
  std::vector<ElementReport> elements;
  bool unitary_applicable = false;
  double max_orthogonality = 0.0;
  double max_commutator = 0.0;
  double max_det_c_error = 0.0;
  double max_reversal = 0.0;
  int algebra_dimension = 0;  // lower bound from the sampled loops
  int skipped_logs = 0;
  std::vector<std::string> notices;
  std::vector<ScalingRecord> scaling;
  double epsilon = 0.0;
  int steps = 0;
};

/// Complex determinant of H as a complex-linear map of (R^N, J), computed on
/// the +i eigenspace of J.
std::complex<double> complex_determinant(const Eigen::MatrixXd& H, const Eigen::MatrixXd& J);

/// Transports the default loop family (and reversals) and summarises. `J`
/// is the normalised complex structure at the base point when available.
HolonomyReport holonomy_report(const Tractor& tr, const HolonomyOptions& opt, const std::vector<double>& base,
                               const std::optional<Eigen::MatrixXd>& J, double tau_ode, int workers = 1);

/// Noise floor below which |H - id| is treated as roundoff.
inline constexpr double kHolonomyNoiseFloor = 1e-9;

}  // namespace feff
