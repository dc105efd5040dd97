#include "feff/holonomy.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <thread>

#include "feff/errors.hpp"
#include "feff/tape.hpp"

namespace feff {

using expr::Expr;
using expr::kLanes;
using expr::Tape;

namespace {

std::string fmt_point(const std::vector<double>& x) {
  std::string s = "(";
  char buf[32];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.6g", i ? ", " : "", x[i]);
    s += buf;
  }
  return s + ")";
}

Segment line(expr::Pool& P, const std::vector<double>& from, const std::vector<double>& to) {
  Segment s;
  const Expr t = P.var(0);
  for (std::size_t i = 0; i < from.size(); ++i) {
    const double d = to[i] - from[i];
    s.curve.push_back(d == 0.0 ? P.decimal(from[i]) : P.decimal(from[i]) + P.decimal(d) * t);
  }
  return s;
}

Loop rectangle(expr::Pool& P, const std::vector<double>& base, int i, int j, double eps, std::string id) {
  std::vector<double> p1 = base, p2 = base, p3 = base;
  p1[i] += eps;
  p2[i] += eps;
  p2[j] += eps;
  p3[j] += eps;
  Loop L;
  L.id = std::move(id);
  L.segments = {line(P, base, p1), line(P, p1, p2), line(P, p2, p3), line(P, p3, base)};
  return L;
}

// Per segment: gamma and gamma' compiled together.
struct CompiledLoop {
  std::vector<Tape> seg;
};

CompiledLoop compile_loop(const Loop& L) {
  CompiledLoop c;
  for (const Segment& s : L.segments) {
    std::vector<Expr> roots = s.curve;
    for (const Expr& e : s.curve) roots.push_back(expr::diff(e, 0));
    c.seg.push_back(Tape::compile(roots));
  }
  return c;
}

void curve_at(const Tape& tape, double t, int n, double* x, double* dx) {
  double buf[64];
  const double tt[1] = {t};
  tape.evaluate(std::span<const double>(tt, 1), std::span<double>(buf, static_cast<std::size_t>(2 * n)));
  for (int a = 0; a < n; ++a) {
    x[a] = buf[a];
    dx[a] = buf[n + a];
  }
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

LoopSpec rectangle_loops(const GeometrySpec& spec, const std::vector<double>& base, const HolonomyOptions& opt) {
  const int n = spec.n;
  LoopSpec ls;
  ls.base = base;
  ls.param = std::make_shared<expr::Pool>(std::vector<std::string>{"t"});
  ls.steps_per_segment = std::max(1, opt.steps / 4);
  double eps = opt.epsilon;
  if (eps <= 0.0) {
    double w = spec.domain[0].width();
    for (const Interval& iv : spec.domain) w = std::min(w, iv.width());
    eps = 0.05 * w;
  }
  std::vector<std::pair<int, int>> planes;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) planes.emplace_back(i, j);
  for (int k = 0; k < std::max(1, opt.loops_per_plane); ++k) {
    const double e = eps / std::ldexp(1.0, k);
    for (auto [i, j] : planes)
      ls.loops.push_back(rectangle(*ls.param, base, i, j, e,
                                   "rect_" + std::to_string(i) + std::to_string(j) + "_e" + std::to_string(k)));
  }
  if (opt.compositions) {
    for (std::size_t p = 0; p + 1 < planes.size(); ++p) {
      Loop a = rectangle(*ls.param, base, planes[p].first, planes[p].second, eps, "");
      const Loop b = rectangle(*ls.param, base, planes[p + 1].first, planes[p + 1].second, eps, "");
      a.id = "comp_" + std::to_string(p);
      a.segments.insert(a.segments.end(), b.segments.begin(), b.segments.end());
      ls.loops.push_back(std::move(a));
    }
  }
  return ls;
}

Loop reversed(const Loop& loop, expr::Pool& param) {
  Loop r;
  r.id = loop.id + "_rev";
  const Expr s = param.one() - param.var(0);
  for (auto it = loop.segments.rbegin(); it != loop.segments.rend(); ++it) {
    Segment seg;
    for (const Expr& e : it->curve) seg.curve.push_back(expr::substitute(e, 0, s));
    r.segments.push_back(std::move(seg));
  }
  return r;
}

void validate_loops(const LoopSpec& spec, const GeometrySpec& geom) {
  const int n = geom.n;
  constexpr int kProbe = 64;
  std::vector<double> x(n), dx(n), prev(n);
  auto close = [&](const std::vector<double>& a, const std::vector<double>& b) {
    for (int i = 0; i < n; ++i)
      if (std::abs(a[i] - b[i]) > 1e-12 * (1.0 + std::abs(a[i]))) return false;
    return true;
  };
  for (const Loop& L : spec.loops) {
    if (L.segments.empty()) throw InputError("loop " + L.id + " has no segments");
    const CompiledLoop c = compile_loop(L);
    prev = spec.base;
    for (std::size_t s = 0; s < c.seg.size(); ++s) {
      if (static_cast<int>(L.segments[s].curve.size()) != n)
        throw InputError("loop " + L.id + ": segment needs " + std::to_string(n) + " components");
      for (int k = 0; k <= kProbe; ++k) {
        curve_at(c.seg[s], static_cast<double>(k) / kProbe, n, x.data(), dx.data());
        if (k == 0 && !close(x, prev))
          throw InputError("loop " + L.id + " is not continuous at segment " + std::to_string(s));
        for (int a = 0; a < n; ++a)
          if (x[a] < geom.domain[a].lo || x[a] > geom.domain[a].hi)
            throw InputError("loop " + L.id + " leaves the domain at " + fmt_point(x));
      }
      prev = x;
    }
    if (!close(prev, spec.base)) throw InputError("loop " + L.id + " is not closed at " + fmt_point(prev));
  }
}

std::vector<HolonomyElement> transport(const Tractor& tr, const LoopSpec& spec, int workers) {
  const int n = tr.dimension();
  const int N = tr.rank();
  const SymField& gt = tr.connection();
  const Tape gamma = Tape::compile(gt.components());
  const expr::Isa isa = expr::active_isa();

  std::vector<CompiledLoop> compiled;
  for (const Loop& L : spec.loops) compiled.push_back(compile_loop(L));
  const int nloops = static_cast<int>(spec.loops.size());
  const int nblocks = (nloops + kLanes - 1) / kLanes;
  const int steps = spec.steps_per_segment;
  const double h = 1.0 / steps;

  std::vector<HolonomyElement> out(static_cast<std::size_t>(nloops));

  auto run_block = [&](int blk) {
    const int first = blk * kLanes;
    const int lanes = std::min(kLanes, nloops - first);
    Tape::Workspace ws(gamma);
    std::vector<double> vars(static_cast<std::size_t>(n * kLanes));
    std::vector<double> gv(gt.size() * kLanes);
    std::vector<double> vel(static_cast<std::size_t>(n * kLanes));
    std::vector<Eigen::MatrixXd> V(kLanes, Eigen::MatrixXd::Identity(N, N));
    std::vector<Eigen::MatrixXd> k1(kLanes), k2(kLanes), k3(kLanes), k4(kLanes);
    std::size_t total = 0;
    for (int l = 0; l < lanes; ++l)
      total = std::max(total, compiled[first + l].seg.size() * static_cast<std::size_t>(steps));
    std::vector<double> x(n), dx(n);

    // F(t, V) = -gamma'^a Gamma_a V for every lane at global step index `step`
    // and local parameter `t`; finished lanes sit at the base point.
    auto rhs = [&](std::size_t step, double frac, const std::vector<Eigen::MatrixXd>& Vin,
                   std::vector<Eigen::MatrixXd>& F) {
      for (int l = 0; l < kLanes; ++l) {
        const bool live = l < lanes && step < compiled[first + l].seg.size() * steps;
        if (live) {
          const std::size_t seg = step / steps;
          const double t = (static_cast<double>(step % steps) + frac) * h;
          curve_at(compiled[first + l].seg[seg], t, n, x.data(), dx.data());
        } else {
          std::copy(spec.base.begin(), spec.base.end(), x.begin());
          std::fill(dx.begin(), dx.end(), 0.0);
        }
        for (int a = 0; a < n; ++a) {
          vars[a * kLanes + l] = x[a];
          vel[a * kLanes + l] = dx[a];
        }
      }
      gamma.evaluate_block(vars.data(), lanes, gv.data(), ws, isa);
      for (int l = 0; l < lanes; ++l) {
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(N, N);
        for (int a = 0; a < n; ++a) {
          const double va = vel[a * kLanes + l];
          if (va == 0.0) continue;
          for (int A = 0; A < N; ++A)
            for (int B = 0; B < N; ++B)
              G(A, B) += va * gv[((static_cast<std::size_t>(a) * N + A) * N + B) * kLanes + l];
        }
        F[l] = -G * Vin[l];
      }
    };

    std::vector<Eigen::MatrixXd> tmp(kLanes, Eigen::MatrixXd::Zero(N, N));
    for (std::size_t step = 0; step < total; ++step) {
      rhs(step, 0.0, V, k1);
      for (int l = 0; l < lanes; ++l) tmp[l] = V[l] + 0.5 * h * k1[l];
      rhs(step, 0.5, tmp, k2);
      for (int l = 0; l < lanes; ++l) tmp[l] = V[l] + 0.5 * h * k2[l];
      rhs(step, 0.5, tmp, k3);
      for (int l = 0; l < lanes; ++l) tmp[l] = V[l] + h * k3[l];
      rhs(step, 1.0, tmp, k4);
      for (int l = 0; l < lanes; ++l) {
        if (step >= compiled[first + l].seg.size() * steps) continue;
        V[l] += (h / 6.0) * (k1[l] + 2.0 * k2[l] + 2.0 * k3[l] + k4[l]);
      }
    }
    for (int l = 0; l < lanes; ++l) {
      if (!V[l].allFinite()) throw NumericalError("holonomy transport diverged on loop " + spec.loops[first + l].id);
      out[first + l] = {spec.loops[first + l].id, V[l]};
    }
  };

  const int nw = std::max(1, std::min(workers, nblocks));
  if (nw == 1) {
    for (int b = 0; b < nblocks; ++b) run_block(b);
    return out;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (int w = 0; w < nw; ++w)
    pool.emplace_back([&] {
      for (int b = next++; b < nblocks; b = next++) {
        try {
          run_block(b);
        } catch (...) {
          if (!failed.exchange(true)) err = std::current_exception();
          return;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return out;
}

std::complex<double> complex_determinant(const Eigen::MatrixXd& H, const Eigen::MatrixXd& J) {
  const int N = static_cast<int>(H.rows());
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(J.cast<std::complex<double>>());
  std::vector<int> plus;
  for (int i = 0; i < N; ++i)
    if (std::abs(es.eigenvalues()(i) - std::complex<double>(0.0, 1.0)) < 1e-6) plus.push_back(i);
  if (2 * static_cast<int>(plus.size()) != N) throw NumericalError("complex structure has unbalanced eigenspaces");
  Eigen::MatrixXcd W(N, static_cast<int>(plus.size()));
  for (std::size_t k = 0; k < plus.size(); ++k) W.col(static_cast<int>(k)) = es.eigenvectors().col(plus[k]);
  // H W = W M on the +i eigenspace.
  const Eigen::MatrixXcd M = W.colPivHouseholderQr().solve(H.cast<std::complex<double>>() * W);
  return M.determinant();
}

HolonomyReport holonomy_report(const Tractor& tr, const HolonomyOptions& opt, const std::vector<double>& base,
                               const std::optional<Eigen::MatrixXd>& J, double tau_ode, int workers) {
  const GeometrySpec& geom = tr.curvature().spec();
  const int n = geom.n;
  const int N = tr.rank();
  LoopSpec ls = rectangle_loops(geom, base, opt);
  const std::size_t forward = ls.loops.size();
  for (std::size_t i = 0; i < forward; ++i) ls.loops.push_back(reversed(ls.loops[i], *ls.param));
  validate_loops(ls, geom);

  HolonomyReport rep;
  rep.epsilon = opt.epsilon;
  if (rep.epsilon <= 0.0) {
    double w = geom.domain[0].width();
    for (const Interval& iv : geom.domain) w = std::min(w, iv.width());
    rep.epsilon = 0.05 * w;
  }
  rep.steps = ls.steps_per_segment * 4;

  const std::vector<HolonomyElement> els = transport(tr, ls, workers);

  FieldEvaluator ev;
  const int hh = ev.add(tr.metric());
  const int ho = ev.add(tr.curvature_commutator());
  ev.run(base);
  const NumField om = ev.get(ho, 0);
  const NumField hn = ev.get(hh, 0);
  Eigen::MatrixXd h(N, N);
  for (int A = 0; A < N; ++A)
    for (int B = 0; B < N; ++B) h(A, B) = hn(A, B);

  std::optional<Eigen::MatrixXd> Jc = J;
  if (Jc && max_abs(*Jc * *Jc + Eigen::MatrixXd::Identity(N, N)) > tau_ode) {
    rep.notices.push_back("s/sqrt(-lambda) is not a complex structure at the base point; unitary checks skipped");
    Jc.reset();
  }
  rep.unitary_applicable = Jc.has_value();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
  std::vector<Eigen::VectorXd> logs;
  for (std::size_t i = 0; i < forward; ++i) {
    const Eigen::MatrixXd& H = els[i].H;
    ElementReport er;
    er.loop_id = els[i].loop_id;
    er.distance_from_identity = max_abs(H - I);
    er.orthogonality = max_abs(H.transpose() * h * H - h);
    er.reversal = max_abs(els[forward + i].H * H - I);
    if (Jc) {
      er.commutator = max_abs(H * *Jc - *Jc * H);
      er.det_c_error = std::abs(complex_determinant(H, *Jc) - 1.0);
    }
    rep.max_orthogonality = std::max(rep.max_orthogonality, er.orthogonality);
    rep.max_reversal = std::max(rep.max_reversal, er.reversal);
    rep.max_commutator = std::max(rep.max_commutator, er.commutator);
    rep.max_det_c_error = std::max(rep.max_det_c_error, er.det_c_error);

    Eigen::EigenSolver<Eigen::MatrixXd> es(H, false);
    bool near_minus_one = false;
    for (int k = 0; k < N; ++k) near_minus_one |= std::abs(es.eigenvalues()(k) + 1.0) < 1e-3;
    if (near_minus_one) {
      ++rep.skipped_logs;
      rep.notices.push_back("matrix log skipped for " + er.loop_id + ": eigenvalue near -1");
    } else {
      const Eigen::MatrixXd Lg = H.log();
      logs.emplace_back(Eigen::Map<const Eigen::VectorXd>(Lg.data(), Lg.size()));
    }
    rep.elements.push_back(std::move(er));
  }
  if (!logs.empty()) {
    Eigen::MatrixXd S(static_cast<int>(logs.front().size()), static_cast<int>(logs.size()));
    for (std::size_t k = 0; k < logs.size(); ++k) S.col(static_cast<int>(k)) = logs[k];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
    for (int k = 0; k < svd.singularValues().size(); ++k) rep.algebra_dimension += svd.singularValues()(k) > tau_ode;
  }

  // epsilon-halving: rect_ij_e0 against rect_ij_e1.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const std::string stem = "rect_" + std::to_string(i) + std::to_string(j) + "_e";
      const ElementReport* a = nullptr;
      const ElementReport* b = nullptr;
      for (const ElementReport& er : rep.elements) {
        if (er.loop_id == stem + "0") a = &er;
        if (er.loop_id == stem + "1") b = &er;
      }
      if (!a || !b) continue;
      ScalingRecord sr;
      sr.plane = geom.coords[i] + geom.coords[j];
      sr.norm_eps = a->distance_from_identity;
      sr.norm_half = b->distance_from_identity;
      sr.above_noise = sr.norm_half > kHolonomyNoiseFloor;
      sr.ratio = sr.above_noise ? sr.norm_eps / sr.norm_half : 0.0;
      double w = 0.0;
      for (int A = 0; A < N; ++A)
        for (int B = 0; B < N; ++B) w = std::max(w, std::abs(om(i, j, A, B)));
      sr.curvature_term = rep.epsilon * rep.epsilon * w;
      sr.second_order = sr.above_noise && sr.curvature_term >= 0.5 * sr.norm_eps;
      rep.scaling.push_back(sr);
    }
  return rep;
}

}  // namespace feff
