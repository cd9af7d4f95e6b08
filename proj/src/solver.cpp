#include "annulus/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace annulus {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Derivatives that report singularities as infinities instead of throwing;
// the Newton damping and the residual reports treat non-finite values as
// "this point cannot be stationary".
double deriv_or_inf(const FunctionalForm& f, double r, double r_max) {
  if (f.family == FormFamily::power && r == 0.0 && f.p1 < 1.0) return kInf;
  return deriv(f, std::clamp(r, 0.0, r_max), r_max);
}

double deriv2_or_inf(const FunctionalForm& f, double r, double r_max) {
  if (f.family == FormFamily::power && r == 0.0 && f.p1 < 2.0 && f.p1 != 1.0)
    return f.p1 > 1.0 ? kInf : -kInf;
  return deriv2(f, std::clamp(r, 0.0, r_max), r_max);
}

struct Grad {
  double Fi = 0, Fo = 0;  // objective partials
  double gi = 0, go = 0;  // slack partials
};

struct Hess {
  double Fii = 0, Fio = 0, Foo = 0;
  double gii = 0, gio = 0, goo = 0;
};

Grad gradients(const Scenario& s, double ri, double ro) {
  const double rm = s.r_max;
  const double w = ro - ri;
  const double Bp = deriv_or_inf(s.premium, ri, rm);
  const double Vp = deriv_or_inf(s.value, ro, rm);
  const double Cp = deriv_or_inf(s.structuring_cost, ro, rm);
  const double Mp = deriv_or_inf(s.overlay_cost, ri, rm);
  const double Rp = deriv_or_inf(s.revenue, w, rm);
  Grad g;
  g.gi = -Rp - Mp;
  g.go = Rp - Cp;
  if (s.variant == ObjectiveVariant::welfare_plus_revenue) {
    g.Fi = Bp - Mp - Rp;
    g.Fo = Vp - Cp + Rp;
  } else {
    g.Fi = Bp - Mp;
    g.Fo = Vp - Cp;
  }
  return g;
}

Hess hessian(const Scenario& s, double ri, double ro) {
  const double rm = s.r_max;
  const double w = ro - ri;
  const double Bpp = deriv2_or_inf(s.premium, ri, rm);
  const double Vpp = deriv2_or_inf(s.value, ro, rm);
  const double Cpp = deriv2_or_inf(s.structuring_cost, ro, rm);
  const double Mpp = deriv2_or_inf(s.overlay_cost, ri, rm);
  const double Rpp = deriv2_or_inf(s.revenue, w, rm);
  Hess h;
  h.gii = Rpp - Mpp;
  h.gio = -Rpp;
  h.goo = Rpp - Cpp;
  if (s.variant == ObjectiveVariant::welfare_plus_revenue) {
    h.Fii = Bpp - Mpp + Rpp;
    h.Fio = -Rpp;
    h.Foo = Vpp - Cpp + Rpp;
  } else {
    h.Fii = Bpp - Mpp;
    h.Fio = 0.0;
    h.Foo = Vpp - Cpp;
  }
  return h;
}

double slack_at(const Scenario& s, double ri, double ro) {
  const double rm = s.r_max;
  return eval(s.revenue, std::clamp(ro - ri, 0.0, rm), rm) + s.subsidy -
         eval(s.structuring_cost, ro, rm) - eval(s.overlay_cost, ri, rm);
}

double objective_at(const Scenario& s, double ri, double ro) {
  const double rm = s.r_max;
  double v = eval(s.value, ro, rm) + eval(s.premium, ri, rm) -
             eval(s.structuring_cost, ro, rm) - eval(s.overlay_cost, ri, rm);
  if (s.variant == ObjectiveVariant::welfare_plus_revenue)
    v += eval(s.revenue, std::clamp(ro - ri, 0.0, rm), rm);
  return v;
}

// ---------------------------------------------------------------------------
// Grid search

struct GridData {
  int n = 0;        // index of the last lattice point
  double res = 0;
  std::vector<double> radius;
  std::vector<double> vc;     // V - C at radius[k]
  std::vector<double> bm;     // B - M at radius[k]
  std::vector<double> costc;  // C
  std::vector<double> costm;  // M
  std::vector<double> rev;    // R at width radius-step d
};

GridData build_grid(const Scenario& s, double resolution) {
  GridData g;
  g.res = resolution;
  g.n = static_cast<int>(std::floor(s.r_max / resolution + 1e-9));
  const size_t count = static_cast<size_t>(g.n) + 1;
  g.radius.resize(count);
  g.vc.resize(count);
  g.bm.resize(count);
  g.costc.resize(count);
  g.costm.resize(count);
  g.rev.resize(count);
  for (int k = 0; k <= g.n; ++k) {
    const double r = std::min(k * resolution, s.r_max);
    const size_t ku = static_cast<size_t>(k);
    g.radius[ku] = r;
    const double V = eval(s.value, r, s.r_max);
    const double B = eval(s.premium, r, s.r_max);
    g.costc[ku] = eval(s.structuring_cost, r, s.r_max);
    g.costm[ku] = eval(s.overlay_cost, r, s.r_max);
    g.vc[ku] = V - g.costc[ku];
    g.bm[ku] = B - g.costm[ku];
    g.rev[ku] = eval(s.revenue, r, s.r_max);
  }
  return g;
}

struct GridBest {
  bool found = false;
  int i = 0, o = 0;
  double objective = 0;
};

// Feasible maximizer on the lattice. Ties break toward larger r_i, then
// smaller r_o; the rule is applied explicitly so the result does not depend
// on the scan order.
GridBest grid_scan(const GridData& g, const Scenario& s, double subsidy) {
  const double ftol = s.solver.feasibility_tol;
  const bool add_rev = s.variant == ObjectiveVariant::welfare_plus_revenue;
  int dmax = g.n;
  if (s.width_cap) {
    const double cap = *s.width_cap;
    dmax = -1;
    for (int d = 0; d <= g.n; ++d) {
      if (std::min(d * g.res, s.r_max) <= cap + ftol) dmax = d;
      else break;
    }
  }
  GridBest best;
  for (int o = 0; o <= g.n; ++o) {
    const size_t ou = static_cast<size_t>(o);
    const double base = subsidy - g.costc[ou];
    const int ilo = dmax < o ? o - dmax : 0;
    for (int i = ilo; i <= o; ++i) {
      const size_t iu = static_cast<size_t>(i);
      const size_t du = static_cast<size_t>(o - i);
      const double slack = g.rev[du] + base - g.costm[iu];
      if (slack < -ftol) continue;
      const double obj = g.vc[ou] + g.bm[iu] + (add_rev ? g.rev[du] : 0.0);
      if (!best.found || obj > best.objective ||
          (obj == best.objective &&
           (i > best.i || (i == best.i && o < best.o)))) {
        best = {true, i, o, obj};
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Active-set Newton

struct ActiveSet {
  bool binding = false;
  ActiveBounds bounds;
};

enum class Reduction { free2, fixed_inner, fixed_outer, fixed_width, fixed_point };

struct Manifold {
  Reduction kind = Reduction::free2;
  double wbar = 0.0;      // fixed width for fixed_width
  double px = 0, py = 0;  // the fully determined point for fixed_point
};

Manifold reduce(const ActiveSet& a, const Scenario& s) {
  const bool has_width = a.bounds.width_cap || a.bounds.r_i_eq_r_o;
  const double wbar = a.bounds.width_cap ? *s.width_cap : 0.0;
  Manifold m;
  if (a.bounds.r_i_lower && a.bounds.r_o_upper)
    m = {Reduction::fixed_point, 0.0, 0.0, s.r_max};
  else if (a.bounds.r_i_lower && has_width)
    m = {Reduction::fixed_point, wbar, 0.0, wbar};
  else if (a.bounds.r_o_upper && has_width)
    m = {Reduction::fixed_point, wbar, s.r_max - wbar, s.r_max};
  else if (a.bounds.r_i_lower)
    m.kind = Reduction::fixed_inner;
  else if (a.bounds.r_o_upper)
    m.kind = Reduction::fixed_outer;
  else if (has_width)
    m = {Reduction::fixed_width, wbar, 0, 0};
  return m;
}

struct NewtonState {
  bool converged = false;
  double ri = 0, ro = 0, lambda = 0;
};

// Residual and Jacobian of the reduced stationarity system. Layout:
// x = [free vars..., lambda if binding]; rows = stationarity eqs + (g = 0).
struct System {
  int nvars = 0;  // free geometric variables (0..2)
  int dim = 0;    // nvars + binding
  std::array<double, 3> resid{};
  std::array<std::array<double, 3>, 3> jac{};
};

void point_of(const Manifold& m, const double* x, double r_max, double& ri,
              double& ro) {
  switch (m.kind) {
    case Reduction::free2: ri = x[0]; ro = x[1]; break;
    case Reduction::fixed_inner: ri = 0.0; ro = x[0]; break;
    case Reduction::fixed_outer: ri = x[0]; ro = r_max; break;
    case Reduction::fixed_width: ri = x[0]; ro = x[0] + m.wbar; break;
    case Reduction::fixed_point: ri = m.px; ro = m.py; break;
  }
}

System build_system(const Scenario& s, const Manifold& m, bool binding,
                    const double* x, double lambda) {
  System sys;
  double ri = 0, ro = 0;
  point_of(m, x, s.r_max, ri, ro);
  const double rm = s.r_max;

  switch (m.kind) {
    case Reduction::free2: sys.nvars = 2; break;
    case Reduction::fixed_point: sys.nvars = 0; break;
    default: sys.nvars = 1; break;
  }
  sys.dim = sys.nvars + (binding ? 1 : 0);
  if (sys.dim == 0) return sys;

  const double slack = slack_at(s, ri, ro);

  if (m.kind == Reduction::fixed_width) {
    // Along a fixed-width manifold the revenue terms cancel from the
    // directional derivative, which keeps w = 0 free of the power-family
    // singularity at zero width.
    const double Bp = deriv_or_inf(s.premium, ri, rm);
    const double Vp = deriv_or_inf(s.value, ro, rm);
    const double Cp = deriv_or_inf(s.structuring_cost, ro, rm);
    const double Mp = deriv_or_inf(s.overlay_cost, ri, rm);
    const double Bpp = deriv2_or_inf(s.premium, ri, rm);
    const double Vpp = deriv2_or_inf(s.value, ro, rm);
    const double Cpp = deriv2_or_inf(s.structuring_cost, ro, rm);
    const double Mpp = deriv2_or_inf(s.overlay_cost, ri, rm);
    const double dirF = Bp + Vp - Mp - Cp;
    const double dirg = -Mp - Cp;
    sys.resid[0] = dirF + lambda * dirg;
    sys.jac[0][0] = (Bpp + Vpp - Mpp - Cpp) + lambda * (-Mpp - Cpp);
    if (binding) {
      sys.resid[1] = slack;
      sys.jac[0][1] = dirg;
      sys.jac[1][0] = dirg;
      sys.jac[1][1] = 0.0;
    }
    return sys;
  }

  const Grad gr = gradients(s, ri, ro);
  const Hess h = hessian(s, ri, ro);
  const double Li = gr.Fi + lambda * gr.gi;
  const double Lo = gr.Fo + lambda * gr.go;
  const double Lii = h.Fii + lambda * h.gii;
  const double Lio = h.Fio + lambda * h.gio;
  const double Loo = h.Foo + lambda * h.goo;

  switch (m.kind) {
    case Reduction::free2:
      sys.resid[0] = Li;
      sys.resid[1] = Lo;
      sys.jac[0][0] = Lii;
      sys.jac[0][1] = Lio;
      sys.jac[1][0] = Lio;
      sys.jac[1][1] = Loo;
      if (binding) {
        sys.resid[2] = slack;
        sys.jac[0][2] = gr.gi;
        sys.jac[1][2] = gr.go;
        sys.jac[2][0] = gr.gi;
        sys.jac[2][1] = gr.go;
        sys.jac[2][2] = 0.0;
      }
      break;
    case Reduction::fixed_inner:
      sys.resid[0] = Lo;
      sys.jac[0][0] = Loo;
      if (binding) {
        sys.resid[1] = slack;
        sys.jac[0][1] = gr.go;
        sys.jac[1][0] = gr.go;
        sys.jac[1][1] = 0.0;
      }
      break;
    case Reduction::fixed_outer:
      sys.resid[0] = Li;
      sys.jac[0][0] = Lii;
      if (binding) {
        sys.resid[1] = slack;
        sys.jac[0][1] = gr.gi;
        sys.jac[1][0] = gr.gi;
        sys.jac[1][1] = 0.0;
      }
      break;
    default:
      break;
  }
  return sys;
}

double norm2(const std::array<double, 3>& v, int n) {
  double s = 0;
  for (int k = 0; k < n; ++k) {
    if (!std::isfinite(v[static_cast<size_t>(k)])) return kInf;
    s += v[static_cast<size_t>(k)] * v[static_cast<size_t>(k)];
  }
  return std::sqrt(s);
}

// Gaussian elimination with partial pivoting for the <= 3x3 Newton systems.
bool solve_linear(std::array<std::array<double, 3>, 3> a,
                  std::array<double, 3> b, int n, std::array<double, 3>& out) {
  std::array<int, 3> perm = {0, 1, 2};
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int row = col + 1; row < n; ++row)
      if (std::abs(a[static_cast<size_t>(perm[static_cast<size_t>(row)])]
                    [static_cast<size_t>(col)]) >
          std::abs(a[static_cast<size_t>(perm[static_cast<size_t>(piv)])]
                    [static_cast<size_t>(col)]))
        piv = row;
    std::swap(perm[static_cast<size_t>(col)], perm[static_cast<size_t>(piv)]);
    const double diag = a[static_cast<size_t>(perm[static_cast<size_t>(col)])]
                         [static_cast<size_t>(col)];
    if (!std::isfinite(diag) || std::abs(diag) < 1e-14) return false;
    for (int row = col + 1; row < n; ++row) {
      const size_t pr = static_cast<size_t>(perm[static_cast<size_t>(row)]);
      const size_t pc = static_cast<size_t>(perm[static_cast<size_t>(col)]);
      const double f = a[pr][static_cast<size_t>(col)] / diag;
      for (int k = col; k < n; ++k)
        a[pr][static_cast<size_t>(k)] -= f * a[pc][static_cast<size_t>(k)];
      b[pr] -= f * b[pc];
    }
  }
  for (int row = n - 1; row >= 0; --row) {
    const size_t pr = static_cast<size_t>(perm[static_cast<size_t>(row)]);
    double v = b[pr];
    for (int k = row + 1; k < n; ++k)
      v -= a[pr][static_cast<size_t>(k)] * out[static_cast<size_t>(k)];
    out[static_cast<size_t>(row)] = v / a[pr][static_cast<size_t>(row)];
    if (!std::isfinite(out[static_cast<size_t>(row)])) return false;
  }
  return true;
}

void clamp_vars(const Manifold& m, double r_max, double* x, int nvars) {
  if (nvars >= 1) {
    double hi = r_max;
    if (m.kind == Reduction::fixed_width) hi = r_max - m.wbar;
    x[0] = std::clamp(x[0], 0.0, hi);
  }
  if (nvars >= 2) x[1] = std::clamp(x[1], 0.0, r_max);
}

// Least-squares fit of lambda to both first-order conditions; may be
// negative or non-finite, callers clamp and flag.
double lambda_fit(const Scenario& s, double ri, double ro) {
  const double rm = s.r_max;
  const double w = ro - ri;
  const double t1 = deriv_or_inf(s.premium, ri, rm);
  const double t2 = deriv_or_inf(s.value, ro, rm);
  const double Rp = deriv_or_inf(s.revenue, w, rm);
  const double u1 = deriv_or_inf(s.overlay_cost, ri, rm) + Rp;
  const double u2 = deriv_or_inf(s.structuring_cost, ro, rm) - Rp;
  const double den = u1 * u1 + u2 * u2;
  if (!std::isfinite(den) || den < 1e-30) return std::numeric_limits<double>::quiet_NaN();
  return (t1 * u1 + t2 * u2) / den - 1.0;
}

NewtonState run_newton(const Scenario& s, const ActiveSet& a,
                       const Manifold& m, double seed_ri, double seed_ro,
                       double seed_lambda) {
  NewtonState st;
  const int nvars = m.kind == Reduction::free2      ? 2
                    : m.kind == Reduction::fixed_point ? 0
                                                       : 1;
  double x[2] = {0, 0};
  switch (m.kind) {
    case Reduction::free2: x[0] = seed_ri; x[1] = seed_ro; break;
    case Reduction::fixed_inner: x[0] = seed_ro; break;
    case Reduction::fixed_outer: x[0] = seed_ri; break;
    case Reduction::fixed_width:
      x[0] = std::clamp(seed_ri, 0.0, s.r_max - m.wbar);
      break;
    case Reduction::fixed_point: break;
  }
  double lambda = a.binding ? std::max(seed_lambda, 0.0) : 0.0;

  if (nvars == 0 && !a.binding) {
    point_of(m, x, s.r_max, st.ri, st.ro);
    st.lambda = 0.0;
    st.converged = true;
    return st;
  }
  if (nvars == 0 && a.binding) {
    // Fully pinned point: nothing to iterate; lambda comes from the
    // least-squares fit over both conditions.
    point_of(m, x, s.r_max, st.ri, st.ro);
    const double fit = lambda_fit(s, st.ri, st.ro);
    st.lambda = std::isfinite(fit) ? std::max(fit, 0.0) : 0.0;
    st.converged = true;
    return st;
  }

  System sys = build_system(s, m, a.binding, x, lambda);
  double fnorm = norm2(sys.resid, sys.dim);

  for (int iter = 0; iter < 100; ++iter) {
    if (fnorm < 1e-13) { st.converged = true; break; }
    std::array<double, 3> neg{};
    for (int k = 0; k < sys.dim; ++k)
      neg[static_cast<size_t>(k)] = -sys.resid[static_cast<size_t>(k)];
    std::array<double, 3> delta{};
    if (!std::isfinite(fnorm) || !solve_linear(sys.jac, neg, sys.dim, delta)) {
      st.converged = false;
      break;
    }
    const double step_norm = norm2(delta, sys.dim);
    bool accepted = false;
    for (double t = 1.0; t >= 1.0 / 1024.0; t *= 0.5) {
      double xc[2] = {x[0], x[1]};
      double lc = lambda;
      for (int k = 0; k < nvars; ++k) xc[k] += t * delta[static_cast<size_t>(k)];
      if (a.binding) lc += t * delta[static_cast<size_t>(nvars)];
      clamp_vars(m, s.r_max, xc, nvars);
      System cand = build_system(s, m, a.binding, xc, lc);
      const double cnorm = norm2(cand.resid, cand.dim);
      if (cnorm < fnorm || cnorm < 1e-13) {
        x[0] = xc[0];
        x[1] = xc[1];
        lambda = lc;
        sys = cand;
        fnorm = cnorm;
        accepted = true;
        break;
      }
    }
    if (!accepted) { st.converged = fnorm < 1e-8; break; }
    if (step_norm < s.solver.newton_tol) { st.converged = true; break; }
  }
  if (fnorm < 1e-8 && !st.converged) st.converged = true;

  point_of(m, x, s.r_max, st.ri, st.ro);
  st.lambda = a.binding ? lambda : 0.0;
  return st;
}

struct KktCheck {
  bool ok = true;
  ActiveSet next;
};

KktCheck check_kkt(const Scenario& s, const ActiveSet& a, const NewtonState& st) {
  const double ptol = 1e-9 * std::max(1.0, s.r_max);
  const double dtol = 1e-7;
  const double ftol = s.solver.feasibility_tol;
  const double w = st.ro - st.ri;
  const double slack = slack_at(s, st.ri, st.ro);

  KktCheck out;
  out.next = a;

  // Primal violations first: pin the most violated constraint.
  const bool has_width = a.bounds.width_cap || a.bounds.r_i_eq_r_o;
  double worst = ptol;
  int which = -1;
  if (!a.bounds.r_i_lower && -st.ri > worst) { worst = -st.ri; which = 0; }
  if (!has_width && -w > worst) { worst = -w; which = 1; }
  if (!a.bounds.r_o_upper && st.ro - s.r_max > worst) { worst = st.ro - s.r_max; which = 2; }
  if (s.width_cap && !a.bounds.width_cap && w - *s.width_cap > worst) {
    worst = w - *s.width_cap;
    which = 3;
  }
  if (which >= 0) {
    out.ok = false;
    if (which == 0) out.next.bounds.r_i_lower = true;
    if (which == 1) out.next.bounds.r_i_eq_r_o = true;
    if (which == 2) out.next.bounds.r_o_upper = true;
    if (which == 3) out.next.bounds.width_cap = true;
    return out;
  }
  if (!a.binding && slack < -ftol) {
    out.ok = false;
    out.next.binding = true;
    return out;
  }

  // Dual feasibility: recover the bound multipliers jointly from the
  // stationarity gradient and release the constraint with the most negative
  // one. Constraint normals, written for h >= 0 form:
  //   r_i_lower: (1, 0)   r_i_eq_r_o: (-1, 1)
  //   r_o_upper: (0, -1)  width_cap:  (1, -1)
  const Grad gr = gradients(s, st.ri, st.ro);
  const double lam = st.lambda;
  double Li = gr.Fi + lam * gr.gi;
  double Lo = gr.Fo + lam * gr.go;
  if (!std::isfinite(Li)) Li = -kInf;  // singular width margin never holds a bound
  if (!std::isfinite(Lo)) Lo = -kInf;

  struct BoundInfo {
    int id;  // 1..4 matching the drop handling below
    double ni, no;
  };
  std::vector<BoundInfo> act;
  if (a.bounds.r_i_lower) act.push_back({1, 1.0, 0.0});
  if (a.bounds.r_i_eq_r_o) act.push_back({2, -1.0, 1.0});
  if (a.bounds.r_o_upper) act.push_back({3, 0.0, -1.0});
  if (a.bounds.width_cap) act.push_back({4, 1.0, -1.0});

  double mu[5] = {0, 0, 0, 0, 0};
  if (act.size() == 1) {
    // Least-squares projection onto the single normal; the tangential
    // component vanished at the Newton solution.
    const BoundInfo& bd = act[0];
    mu[bd.id] = -(Li * bd.ni + Lo * bd.no) / (bd.ni * bd.ni + bd.no * bd.no);
  } else if (act.size() >= 2) {
    const BoundInfo& b1 = act[0];
    const BoundInfo& b2 = act[1];
    const double det = b1.ni * b2.no - b2.ni * b1.no;
    if (std::abs(det) > 1e-12) {
      mu[b1.id] = (-Li * b2.no + Lo * b2.ni) / det;
      mu[b2.id] = (-Lo * b1.ni + Li * b1.no) / det;
    } else {
      // Parallel normals (zero width cap): one multiplier carries both.
      mu[b1.id] = -(Li * b1.ni + Lo * b1.no) / (b1.ni * b1.ni + b1.no * b1.no);
    }
  }

  double most_negative = -dtol;
  int drop = -1;
  if (a.binding && lam < most_negative) { most_negative = lam; drop = 0; }
  for (const BoundInfo& bd : act) {
    const double v = std::isfinite(mu[bd.id]) ? mu[bd.id] : -kInf;
    if (v < most_negative) {
      most_negative = v;
      drop = bd.id;
    }
  }
  if (drop >= 0) {
    out.ok = false;
    if (drop == 0) out.next.binding = false;
    if (drop == 1) out.next.bounds.r_i_lower = false;
    if (drop == 2) out.next.bounds.r_i_eq_r_o = false;
    if (drop == 3) out.next.bounds.r_o_upper = false;
    if (drop == 4) out.next.bounds.width_cap = false;
    return out;
  }
  return out;
}

ActiveSet classify(const Scenario& s, double ri, double ro, double h) {
  ActiveSet a;
  const double near = 1.5 * h;
  const double w = ro - ri;
  if (ri <= near) a.bounds.r_i_lower = true;
  if (s.r_max - ro <= near) a.bounds.r_o_upper = true;
  if (s.width_cap && *s.width_cap - w <= near) a.bounds.width_cap = true;
  if (!a.bounds.width_cap && w <= near) a.bounds.r_i_eq_r_o = true;

  const Grad gr = gradients(s, ri, ro);
  double slope = 1.0;
  if (std::isfinite(gr.gi)) slope += std::abs(gr.gi);
  if (std::isfinite(gr.go)) slope += std::abs(gr.go);
  const double slack = slack_at(s, ri, ro);
  if (slack <= h * slope + s.solver.feasibility_tol) a.binding = true;
  return a;
}

Solution finish_solution(const Scenario& s, double ri, double ro,
                         double lambda, const ActiveBounds& bounds,
                         double oracle_gap) {
  Solution sol;
  sol.point = {ri, ro};
  sol.width = ro - ri;
  sol.shadow_price = std::max(lambda, 0.0);
  const WelfarePair wp = welfare(s, sol.point);
  sol.welfare = wp.welfare;
  sol.objective = wp.objective;
  const double slack = sustainability_slack(s, sol.point);
  sol.binding = std::abs(slack) <= s.solver.feasibility_tol;
  sol.active_bounds = bounds;
  const FocResiduals res = foc_residuals(s, sol.point, sol.shadow_price);
  sol.inner_residual = res.inner;
  sol.outer_residual = res.outer;
  sol.oracle_gap = oracle_gap;
  return sol;
}

}  // namespace

std::string to_string(const ActiveBounds& bounds) {
  std::string out;
  auto add = [&out](const char* name) {
    if (!out.empty()) out += ';';
    out += name;
  };
  if (bounds.r_i_lower) add("r_i_lower");
  if (bounds.r_i_eq_r_o) add("r_i_eq_r_o");
  if (bounds.r_o_upper) add("r_o_upper");
  if (bounds.width_cap) add("width_cap");
  return out;
}

Solution grid_solve(const Scenario& scenario, double resolution) {
  validate(scenario);
  if (!(resolution > 0.0) || !(resolution <= scenario.r_max / 10.0))
    throw std::invalid_argument("grid_solve: resolution must be in (0, r_max/10]");

  const GridData grid = build_grid(scenario, resolution);
  const GridBest best = grid_scan(grid, scenario, scenario.subsidy);
  if (!best.found)
    throw InfeasibleScenario("no feasible boundaries on the search lattice");

  const double delta = std::max(1e-3, 1e-3 * scenario.subsidy);
  const GridBest relaxed = grid_scan(grid, scenario, scenario.subsidy + delta);
  const double lambda =
      std::max(0.0, (relaxed.objective - best.objective) / delta);

  const double ri = grid.radius[static_cast<size_t>(best.i)];
  const double ro = grid.radius[static_cast<size_t>(best.o)];

  Solution sol;
  sol.point = {ri, ro};
  sol.width = ro - ri;
  sol.shadow_price = lambda;
  const WelfarePair wp = welfare(scenario, sol.point);
  sol.welfare = wp.welfare;
  sol.objective = wp.objective;

  const double slack = sustainability_slack(scenario, sol.point);
  const double rm = scenario.r_max;
  double slope = 1.0 + std::abs(deriv_or_inf(scenario.overlay_cost, ri, rm)) +
                 std::abs(deriv_or_inf(scenario.structuring_cost, ro, rm));
  const double rprime =
      deriv_or_inf(scenario.revenue, std::max(sol.width, resolution), rm);
  if (std::isfinite(rprime)) slope += std::abs(rprime);
  sol.binding =
      slack <= resolution * slope + scenario.solver.feasibility_tol;

  sol.active_bounds.r_i_lower = best.i == 0;
  sol.active_bounds.r_i_eq_r_o = best.i == best.o;
  sol.active_bounds.r_o_upper = best.o == grid.n;
  if (scenario.width_cap)
    sol.active_bounds.width_cap =
        std::abs(sol.width - *scenario.width_cap) <= resolution;

  const FocResiduals res = foc_residuals(scenario, sol.point, lambda);
  sol.inner_residual = res.inner;
  sol.outer_residual = res.outer;
  sol.oracle_gap = 0.0;
  return sol;
}

Solution kkt_solve(const Scenario& scenario) {
  validate(scenario);
  const double seed_res = scenario.r_max / 200.0;
  const GridData seed_grid = build_grid(scenario, seed_res);
  const GridBest seed = grid_scan(seed_grid, scenario, scenario.subsidy);
  if (!seed.found)
    throw InfeasibleScenario("no feasible boundaries on the search lattice");

  const double seed_ri = seed_grid.radius[static_cast<size_t>(seed.i)];
  const double seed_ro = seed_grid.radius[static_cast<size_t>(seed.o)];

  ActiveSet active = classify(scenario, seed_ri, seed_ro, seed_res);
  double guess_lambda = 0.0;
  if (active.binding) {
    const double fit = lambda_fit(scenario, seed_ri, seed_ro);
    guess_lambda = std::isfinite(fit) ? std::clamp(fit, 0.0, 1e6) : 1.0;
  }

  NewtonState state;
  bool solved = false;
  // Degenerate corners can violate constraint qualification (no multipliers
  // certify the optimum, e.g. an origin-only feasible set); keep the best
  // primal-feasible converged point as a fallback.
  bool have_fallback = false;
  NewtonState fallback;
  ActiveBounds fallback_bounds;
  auto primal_ok = [&](const NewtonState& st) {
    const double ptol = 1e-9 * std::max(1.0, scenario.r_max);
    if (st.ri < -ptol || st.ro - st.ri < -ptol) return false;
    if (st.ro > scenario.r_max + ptol) return false;
    if (scenario.width_cap && st.ro - st.ri > *scenario.width_cap + ptol)
      return false;
    return slack_at(scenario, st.ri, st.ro) >=
           -scenario.solver.feasibility_tol;
  };
  for (int attempt = 0; attempt < 5; ++attempt) {
    const Manifold m = reduce(active, scenario);
    state = run_newton(scenario, active, m, seed_ri, seed_ro, guess_lambda);
    if (state.converged && primal_ok(state)) {
      const double obj = objective_at(scenario, state.ri, state.ro);
      if (!have_fallback ||
          obj > objective_at(scenario, fallback.ri, fallback.ro)) {
        have_fallback = true;
        fallback = state;
        fallback_bounds = active.bounds;
      }
    }
    if (!state.converged) {
      // A stalled iterate pressed against a clamp means the corresponding
      // bound belongs in the active set; otherwise the budget constraint
      // classification was wrong.
      const double edge = 1e-9 * std::max(1.0, scenario.r_max);
      const double w = state.ro - state.ri;
      const bool has_width = active.bounds.width_cap || active.bounds.r_i_eq_r_o;
      if (!active.bounds.r_i_lower && state.ri <= edge &&
          m.kind != Reduction::fixed_width) {
        active.bounds.r_i_lower = true;
      } else if (!active.bounds.r_o_upper && state.ro >= scenario.r_max - edge) {
        active.bounds.r_o_upper = true;
      } else if (!has_width && w <= edge) {
        active.bounds.r_i_eq_r_o = true;
      } else if (scenario.width_cap && !active.bounds.width_cap &&
                 w >= *scenario.width_cap - edge) {
        active.bounds.width_cap = true;
      } else {
        active.binding = !active.binding;
      }
      guess_lambda = std::max(state.lambda, 0.0);
      continue;
    }
    const KktCheck chk = check_kkt(scenario, active, state);
    if (chk.ok) { solved = true; break; }
    active = chk.next;
    guess_lambda = std::max(state.lambda, 0.0);
  }
  if (!solved && have_fallback) {
    state = fallback;
    active.bounds = fallback_bounds;
    solved = true;
  }
  if (!solved)
    throw NoConvergence("active-set Newton failed to converge");

  double gap = std::numeric_limits<double>::infinity();
  {
    const double ores = oracle_resolution(scenario);
    const GridData fine = build_grid(scenario, ores);
    const GridBest fine_best = grid_scan(fine, scenario, scenario.subsidy);
    if (fine_best.found) {
      const double obj = objective_at(scenario, state.ri, state.ro);
      gap = std::abs(obj - fine_best.objective);
    }
  }

  return finish_solution(scenario, state.ri, state.ro, state.lambda,
                         active.bounds, gap);
}

ShadowPriceResult shadow_price(const Scenario& scenario, const Boundaries& at) {
  validate(scenario);
  validate(at, scenario.r_max);

  ShadowPriceResult out;
  const double slack = sustainability_slack(scenario, at);
  if (slack > scenario.solver.feasibility_tol) {
    return out;  // constraint slack: lambda = 0 by complementary slackness
  }

  const double fit = lambda_fit(scenario, at.inner, at.outer);
  if (std::isfinite(fit)) {
    out.clamped = fit < 0.0;
    out.lambda = std::max(fit, 0.0);
  } else {
    out.lambda = 0.0;
    out.envelope_consistent = false;
    return out;
  }

  const double delta = std::max(1e-3, 1e-3 * scenario.subsidy);
  auto objective_at_subsidy = [&](double s_value) -> std::optional<double> {
    Scenario sc = scenario;
    sc.subsidy = s_value;
    try {
      return kkt_solve(sc).objective;
    } catch (const InfeasibleScenario&) {
      return std::nullopt;
    } catch (const NoConvergence&) {
      return std::nullopt;
    }
  };

  std::optional<double> est;
  const auto hi = objective_at_subsidy(scenario.subsidy + delta);
  if (scenario.subsidy - delta >= 0.0) {
    const auto lo = objective_at_subsidy(scenario.subsidy - delta);
    if (hi && lo) est = (*hi - *lo) / (2.0 * delta);
  }
  if (!est && hi) {
    const auto base = objective_at_subsidy(scenario.subsidy);
    if (base) est = (*hi - *base) / delta;
  }
  if (!est) {
    out.envelope_consistent = false;
    return out;
  }
  out.envelope_estimate = *est;
  const double scale = std::max(std::abs(*est), 1e-9);
  out.envelope_consistent = std::abs(out.lambda - *est) <= 1e-3 * scale;
  return out;
}

FocResiduals foc_residuals(const Scenario& scenario, const Boundaries& b,
                           double lambda) {
  if (lambda < 0.0)
    throw std::domain_error("foc_residuals: lambda must be >= 0");
  validate(b, scenario.r_max);
  const double rm = scenario.r_max;
  const double w = b.width();
  const double Bp = deriv_or_inf(scenario.premium, b.inner, rm);
  const double Vp = deriv_or_inf(scenario.value, b.outer, rm);
  const double Cp = deriv_or_inf(scenario.structuring_cost, b.outer, rm);
  const double Mp = deriv_or_inf(scenario.overlay_cost, b.inner, rm);
  const double Rp = deriv_or_inf(scenario.revenue, w, rm);
  FocResiduals res;
  res.inner = std::abs(Bp - (1.0 + lambda) * (Mp + Rp));
  res.outer = std::abs(Vp - (1.0 + lambda) * (Cp - Rp));
  return res;
}

}  // namespace annulus
