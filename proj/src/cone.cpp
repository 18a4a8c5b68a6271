#include "torsionlab/cone.hpp"

#include <algorithm>
#include <cmath>

#include "torsionlab/errors.hpp"

namespace tl {

namespace {

double rel_gap(const Operator& diff, double scale) { return sup_norm(diff) / std::max(1.0, scale); }

Operator component(const ComplexMorphism& m, int i) {
  if (i >= 0 && i < static_cast<int>(m.f.size())) return m.f[static_cast<std::size_t>(i)];
  return Operator::zero(m.source.algebra(), m.target.dim(i), m.source.dim(i));
}

Operator coupling_at(const HilbertComplex& c1, const HilbertComplex& c2, const std::vector<Operator>& f, int i) {
  if (i >= 0 && i < static_cast<int>(f.size())) return f[static_cast<std::size_t>(i)];
  return Operator::zero(c1.algebra(), c1.dim(i + 1), c2.dim(i));
}

Algebra common_algebra(const HilbertComplex& a, const HilbertComplex& b) {
  require(a.algebra() == b.algebra(), ErrorKind::AlgebraMismatch, "complexes over different algebras");
  return a.algebra();
}

CheckResult finish(double lhs, double rhs, double tol, std::string detail = {}) {
  CheckResult r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.residual = std::abs(lhs - rhs);
  r.tolerance = tol;
  r.pass = r.residual < tol;
  r.detail = std::move(detail);
  return r;
}

Mat harmonic_basis(const Operator& projector) {
  const Mat& p = projector.matrix();
  if (p.rows() == 0) return Mat(0, 0);
  return range_basis(p, 0.5);
}

Mat basis_or_empty(const std::vector<Mat>& bases, int i, Index dim) {
  if (i >= 0 && i < static_cast<int>(bases.size())) return bases[static_cast<std::size_t>(i)];
  return Mat(dim, 0);
}

}  // namespace

double intertwining_defect(const ComplexMorphism& m) {
  double worst = 0.0;
  int n = m.source.top_degree();
  for (int i = 0; i < n; ++i) {
    Operator f0 = component(m, i), f1 = component(m, i + 1);
    Operator d1 = m.source.d(i), d2 = m.target.d(i);
    double scale = std::max(sup_norm(d2) * sup_norm(f0), sup_norm(f1) * sup_norm(d1));
    worst = std::max(worst, rel_gap(d2 * f0 - f1 * d1, scale));
  }
  return worst;
}

ComplexMorphism make_morphism(HilbertComplex source, HilbertComplex target, std::vector<Operator> f) {
  Algebra a = common_algebra(source, target);
  int n = std::max(source.top_degree(), target.top_degree());
  ComplexMorphism m{pad_to(source, n), pad_to(target, n), {}};
  require(static_cast<int>(f.size()) <= n + 1, ErrorKind::DimensionMismatch, "morphism has too many components");
  for (int i = 0; i <= n; ++i) {
    Operator fi = i < static_cast<int>(f.size()) ? promote(f[static_cast<std::size_t>(i)], a)
                                                 : Operator::zero(a, m.target.dim(i), m.source.dim(i));
    require(fi.rows() == m.target.dim(i) && fi.cols() == m.source.dim(i), ErrorKind::DimensionMismatch,
            "morphism component " + std::to_string(i) + " has the wrong shape");
    m.f.push_back(std::move(fi));
  }
  double defect = intertwining_defect(m);
  require(defect <= kComplexTol, ErrorKind::NotAMorphism,
          "components do not intertwine the differentials (relative defect " + std::to_string(defect) + ")");
  return m;
}

ComplexMorphism identity_morphism(const HilbertComplex& c) {
  std::vector<Operator> f;
  for (int i = 0; i <= c.top_degree(); ++i) f.push_back(Operator::identity(c.algebra(), c.dim(i)));
  return make_morphism(c, c, std::move(f));
}

ComplexMorphism compose(const ComplexMorphism& f2, const ComplexMorphism& f1) {
  int n = std::max(f1.source.top_degree(), f2.source.top_degree());
  for (int i = 0; i <= n; ++i)
    require(f1.target.dim(i) == f2.source.dim(i), ErrorKind::DimensionMismatch, "compose: middle complexes differ");
  std::vector<Operator> f;
  for (int i = 0; i <= n; ++i) f.push_back(component(f2, i) * component(f1, i));
  return make_morphism(f1.source, f2.target, std::move(f));
}

ConeComplex mapping_cone(const ComplexMorphism& m) {
  Algebra a = m.source.algebra();
  int n1 = m.source.top_degree();
  int n = n1 + 1;
  const HilbertComplex& c1 = m.source;
  const HilbertComplex& c2 = m.target;
  std::vector<Index> dims;
  for (int i = 0; i <= n; ++i) dims.push_back(c2.dim(i - 1) + c1.dim(i));
  std::vector<Operator> d;
  for (int i = 0; i < n; ++i) {
    BlockOperator b(a, {c2.dim(i), c1.dim(i + 1)}, {c2.dim(i - 1), c1.dim(i)});
    b.set(0, 0, -c2.d_or_zero(i - 1));
    b.set(0, 1, component(m, i));
    b.set(1, 1, c1.d_or_zero(i));
    d.push_back(b.assemble());
  }
  return {HilbertComplex(a, std::move(dims), std::move(d)), m};
}

double cone_laplacian_defect(const ComplexMorphism& m) {
  auto cone = mapping_cone(m);
  auto lap = laplacians(cone.complex);
  auto l1 = laplacians(m.source), l2 = laplacians(m.target);
  const HilbertComplex& c1 = m.source;
  const HilbertComplex& c2 = m.target;
  Algebra a = c1.algebra();
  auto lap_at = [&](const std::vector<Operator>& l, const HilbertComplex& c, int i) {
    if (i < 0 || i > c.top_degree()) return Operator::zero(a, c.dim(i), c.dim(i));
    return l[static_cast<std::size_t>(i)];
  };
  double worst = 0.0;
  for (int i = 0; i <= cone.complex.top_degree(); ++i) {
    Operator fi = component(m, i), fp = component(m, i - 1);
    Operator d2p = c2.d_or_zero(i - 1), d1p = c1.d_or_zero(i - 1);
    BlockOperator b(a, {c2.dim(i - 1), c1.dim(i)}, {c2.dim(i - 1), c1.dim(i)});
    b.set(0, 0, lap_at(l2, c2, i - 1) + fp * fp.adjoint());
    b.set(0, 1, -(d2p.adjoint() * fi) + fp * d1p.adjoint());
    b.set(1, 0, -(fi.adjoint() * d2p) + d1p * fp.adjoint());
    b.set(1, 1, lap_at(l1, c1, i) + fi.adjoint() * fi);
    Operator expect = b.assemble();
    worst = std::max(worst, sup_norm(lap[static_cast<std::size_t>(i)] - expect));
  }
  return worst;
}

double log_vol(const Operator& op, const SpectralOptions& opt) {
  if (op.rows() == 0 || op.cols() == 0) return 0.0;
  if (op.is_scalar() && op.is_square()) {
    // LU keeps every pivot; the relative kernel cut of fk_log_det would drop tiny but nonzero scales.
    Eigen::PartialPivLU<Mat> lu(op.matrix());
    const Mat& u = lu.matrixLU();
    double s = 0.0;
    bool singular = false;
    for (Index i = 0; i < u.rows(); ++i) {
      double a = std::abs(u(i, i));
      if (a == 0.0 || !std::isfinite(a)) singular = true;
      s += std::log(a);
    }
    if (!singular) return s;
  }
  return fk_log_det(op, opt);
}

CheckResult check_cone_volume(const ComplexMorphism& m, double tol, const SpectralOptions& opt) {
  double rhs = 0.0;
  for (int j = 0; j <= m.source.top_degree(); ++j) {
    const Operator& fj = m.f[static_cast<std::size_t>(j)];
    require(fj.rows() == fj.cols(), ErrorKind::NotInvertible, "component " + std::to_string(j) + " is not square");
    if (fj.rows() == 0) continue;
    if (fj.is_scalar()) {
      auto sv = singular_values(fj.matrix());
      require(sv(sv.size() - 1) > kSigmaTol * sv(0), ErrorKind::NotInvertible,
              "component " + std::to_string(j) + " is not invertible");
    }
    rhs += (j % 2 ? -1.0 : 1.0) * log_vol(fj, opt);
  }
  double lhs = log_torsion(mapping_cone(m).complex, opt);
  return finish(lhs, rhs, tol);
}

HilbertComplex cmm_assemble(const HilbertComplex& c1, const HilbertComplex& c2, const std::vector<Operator>& f) {
  Algebra a = common_algebra(c1, c2);
  int n = std::max(c1.top_degree(), c2.top_degree());
  HilbertComplex p1 = pad_to(c1, n), p2 = pad_to(c2, n);
  require(static_cast<int>(f.size()) <= n, ErrorKind::DimensionMismatch, "coupling has too many components");
  for (std::size_t i = 0; i < f.size(); ++i)
    require(f[i].rows() == p1.dim(static_cast<int>(i) + 1) && f[i].cols() == p2.dim(static_cast<int>(i)),
            ErrorKind::DimensionMismatch, "coupling component " + std::to_string(i) + " has the wrong shape");
  double defect = coupling_defect(p1, p2, f);
  require(defect <= kComplexTol, ErrorKind::NotAComplex,
          "coupling violates f_{i+1} d2_i + d1_{i+1} f_i = 0 (relative defect " + std::to_string(defect) + ")");
  std::vector<Index> dims;
  std::vector<Operator> d;
  for (int i = 0; i <= n; ++i) dims.push_back(p1.dim(i) + p2.dim(i));
  for (int i = 0; i < n; ++i) {
    BlockOperator b(a, {p1.dim(i + 1), p2.dim(i + 1)}, {p1.dim(i), p2.dim(i)});
    b.set(0, 0, p1.d(i));
    b.set(0, 1, coupling_at(p1, p2, f, i));
    b.set(1, 1, p2.d(i));
    d.push_back(b.assemble());
  }
  return HilbertComplex(a, std::move(dims), std::move(d));
}

double coupling_defect(const HilbertComplex& c1, const HilbertComplex& c2, const std::vector<Operator>& f) {
  int n = std::max(c1.top_degree(), c2.top_degree());
  double worst = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    Operator f0 = coupling_at(c1, c2, f, i), f1 = coupling_at(c1, c2, f, i + 1);
    Operator d2 = c2.d_or_zero(i), d1 = c1.d_or_zero(i + 1);
    double scale = std::max(sup_norm(f1) * sup_norm(d2), sup_norm(d1) * sup_norm(f0));
    worst = std::max(worst, rel_gap(f1 * d2 + d1 * f0, scale));
  }
  return worst;
}

CheckResult check_cmm(const HilbertComplex& c1, const HilbertComplex& c2, const std::vector<Operator>& f, double tol,
                      const SpectralOptions& opt) {
  auto t1 = torsion(c1, opt), t2 = torsion(c2, opt);
  require(t1.acyclic && t2.acyclic, ErrorKind::NotAcyclic, "coupled complexes must both be acyclic");
  double lhs = log_torsion(cmm_assemble(c1, c2, f), opt);
  return finish(lhs, t1.log_torsion + t2.log_torsion, tol);
}

CheckResult check_cmm_derivative(const HilbertComplex& c1, const HilbertComplex& c2, const std::vector<Operator>& f,
                                 double t, double h, double tol, const SpectralOptions& opt) {
  auto at = [&](double s) {
    std::vector<Operator> g;
    for (const auto& x : f) g.push_back(scale(x, s));
    return log_torsion(cmm_assemble(c1, c2, g), opt);
  };
  double deriv = (at(t + h) - at(t - h)) / (2.0 * h);
  return finish(deriv, 0.0, tol, "central difference at t = " + std::to_string(t));
}

bool induces_cohomology_iso(const ComplexMorphism& m, const SpectralOptions& opt) {
  auto h1 = hodge_decompose(m.source, opt), h2 = hodge_decompose(m.target, opt);
  constexpr double kIsoTol = 1e-6;
  auto fiber_ok = [&](const Mat& p1, const Mat& p2, const Mat& f) {
    Mat u1 = p1.rows() ? range_basis(p1, 0.5) : Mat(0, 0);
    Mat u2 = p2.rows() ? range_basis(p2, 0.5) : Mat(0, 0);
    if (u1.cols() != u2.cols()) return false;
    if (u1.cols() == 0) return true;
    RVec s = singular_values(u2.adjoint() * f * u1);
    return s(s.size() - 1) > kIsoTol;
  };
  for (int i = 0; i <= m.source.top_degree(); ++i) {
    const Operator& p1 = h1.harmonic[static_cast<std::size_t>(i)];
    const Operator& p2 = h2.harmonic[static_cast<std::size_t>(i)];
    const Operator& f = m.f[static_cast<std::size_t>(i)];
    if (m.source.algebra() == Algebra::Scalar) {
      if (!fiber_ok(p1.matrix(), p2.matrix(), f.matrix())) return false;
      continue;
    }
    std::size_t n = std::max(p1.sample_count(), p2.sample_count());
    double bad = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (!fiber_ok(p1.fiber_at(j, n), p2.fiber_at(j, n), f.fiber_at(j, n))) bad += 1.0 / static_cast<double>(n);
    if (bad >= kRankJumpTol) return false;
  }
  return true;
}

CheckResult check_composition(const ComplexMorphism& f1, const ComplexMorphism& f2, double tol,
                              const SpectralOptions& opt) {
  require(induces_cohomology_iso(f1, opt) && induces_cohomology_iso(f2, opt), ErrorKind::NotInvertible,
          "both maps must induce isomorphisms in cohomology");
  ComplexMorphism f = compose(f2, f1);
  double lhs = log_torsion(mapping_cone(f).complex, opt);
  double rhs = log_torsion(mapping_cone(f1).complex, opt) + log_torsion(mapping_cone(f2).complex, opt);
  return finish(lhs, rhs, tol);
}

ShortExactSequence cone_sequence(const ComplexMorphism& m) {
  auto cone = mapping_cone(m).complex;
  int n = cone.top_degree();
  HilbertComplex sub = pad_to(suspension(m.target), n);
  HilbertComplex quot = pad_to(m.source, n);
  Algebra a = cone.algebra();
  ShortExactSequence s{sub, cone, quot, {}, {}};
  for (int i = 0; i <= n; ++i) {
    Index top = m.target.dim(i - 1), bottom = m.source.dim(i);
    BlockOperator inc(a, {top, bottom}, {top});
    inc.set(0, 0, Operator::identity(a, top));
    BlockOperator proj(a, {bottom}, {top, bottom});
    proj.set(0, 1, Operator::identity(a, bottom));
    s.inclusion.push_back(inc.assemble());
    s.projection.push_back(proj.assemble());
  }
  return s;
}

ShortExactSequence split_sequence(const HilbertComplex& c1, const HilbertComplex& c2) {
  Algebra a = common_algebra(c1, c2);
  HilbertComplex mid = direct_sum(c1, c2);
  int n = mid.top_degree();
  ShortExactSequence s{pad_to(c1, n), mid, pad_to(c2, n), {}, {}};
  for (int i = 0; i <= n; ++i) {
    BlockOperator inc(a, {c1.dim(i), c2.dim(i)}, {c1.dim(i)});
    inc.set(0, 0, Operator::identity(a, c1.dim(i)));
    BlockOperator proj(a, {c2.dim(i)}, {c1.dim(i), c2.dim(i)});
    proj.set(0, 1, Operator::identity(a, c2.dim(i)));
    s.inclusion.push_back(inc.assemble());
    s.projection.push_back(proj.assemble());
  }
  return s;
}

MilnorReport milnor_check(const ShortExactSequence& s, double tol) {
  require(s.sub.algebra() == Algebra::Scalar && s.middle.algebra() == Algebra::Scalar &&
              s.quotient.algebra() == Algebra::Scalar,
          ErrorKind::AlgebraMismatch, "the long-sequence check is implemented for scalar complexes only");
  int n = std::max({s.sub.top_degree(), s.middle.top_degree(), s.quotient.top_degree()});
  HilbertComplex sub = pad_to(s.sub, n), mid = pad_to(s.middle, n), quo = pad_to(s.quotient, n);
  require(static_cast<int>(s.inclusion.size()) == n + 1 && static_cast<int>(s.projection.size()) == n + 1,
          ErrorKind::DimensionMismatch, "need one inclusion and one projection per degree");

  std::vector<Mat> inc, proj;
  for (int i = 0; i <= n; ++i) {
    const Mat& a = s.inclusion[static_cast<std::size_t>(i)].matrix();
    const Mat& b = s.projection[static_cast<std::size_t>(i)].matrix();
    require(a.rows() == mid.dim(i) && a.cols() == sub.dim(i) && b.rows() == quo.dim(i) && b.cols() == mid.dim(i),
            ErrorKind::DimensionMismatch, "sequence maps in degree " + std::to_string(i) + " have the wrong shape");
    double scale = std::max(1.0, (a.size() ? op_norm(a) : 0.0) * (b.size() ? op_norm(b) : 0.0));
    bool exact = (a.size() == 0 || b.size() == 0 || op_norm(b * a) <= kComplexTol * scale);
    Index ra = a.size() ? count_above(singular_values(a), kSigmaTol * op_norm(a)) : 0;
    Index rb = b.size() ? count_above(singular_values(b), kSigmaTol * op_norm(b)) : 0;
    exact = exact && ra == sub.dim(i) && rb == quo.dim(i) && ra + rb == mid.dim(i);
    require(exact, ErrorKind::NotAMorphism, "sequence is not exact in degree " + std::to_string(i));
    inc.push_back(a);
    proj.push_back(b);
  }
  std::vector<Operator> iops(s.inclusion.begin(), s.inclusion.end()), pops(s.projection.begin(), s.projection.end());
  make_morphism(sub, mid, iops);
  make_morphism(mid, quo, pops);

  MilnorReport r;
  auto hs = hodge_decompose(sub), hm = hodge_decompose(mid), hq = hodge_decompose(quo);
  std::vector<Mat> us, um, uq;
  for (int i = 0; i <= n; ++i) {
    us.push_back(harmonic_basis(hs.harmonic[static_cast<std::size_t>(i)]));
    um.push_back(harmonic_basis(hm.harmonic[static_cast<std::size_t>(i)]));
    uq.push_back(harmonic_basis(hq.harmonic[static_cast<std::size_t>(i)]));
  }
  std::vector<Index> dims;
  std::vector<Operator> d;
  for (int i = 0; i <= n; ++i) {
    Mat bs = basis_or_empty(us, i, sub.dim(i)), bm = basis_or_empty(um, i, mid.dim(i)), bq = basis_or_empty(uq, i, quo.dim(i));
    dims.insert(dims.end(), {bs.cols(), bm.cols(), bq.cols()});
    d.push_back(Operator::scalar(bm.adjoint() * inc[static_cast<std::size_t>(i)] * bs));
    d.push_back(Operator::scalar(bq.adjoint() * proj[static_cast<std::size_t>(i)] * bm));
    if (i < n) {
      // Connecting map: minimal-norm lift through the projection, apply d, pull back through the inclusion.
      const Mat& p = proj[static_cast<std::size_t>(i)];
      const Mat& j = inc[static_cast<std::size_t>(i + 1)];
      Mat lift = p.size() ? pseudo_inverse(p, kSigmaTol * op_norm(p)) : Mat::Zero(p.cols(), p.rows());
      Mat back = j.size() ? pseudo_inverse(j, kSigmaTol * op_norm(j)) : Mat::Zero(j.cols(), j.rows());
      Mat dm = mid.d(i).matrix();
      Mat bs1 = basis_or_empty(us, i + 1, sub.dim(i + 1));
      d.push_back(Operator::scalar(bs1.adjoint() * back * dm * lift * bq));
    }
  }
  r.long_sequence = HilbertComplex(Algebra::Scalar, dims, d);

  r.log_t_sub = log_torsion(sub);
  r.log_t_middle = log_torsion(mid);
  r.log_t_quotient = log_torsion(quo);
  r.log_t_long = log_torsion(r.long_sequence);
  for (int i = 0; i <= n; ++i) {
    HilbertComplex shortseq(Algebra::Scalar, {sub.dim(i), mid.dim(i), quo.dim(i)},
                            {s.inclusion[static_cast<std::size_t>(i)], s.projection[static_cast<std::size_t>(i)]});
    r.short_sequence_sum += (i % 2 ? -1.0 : 1.0) * log_torsion(shortseq);
  }
  r.result = finish(r.log_t_middle, r.log_t_sub + r.log_t_quotient + r.log_t_long - r.short_sequence_sum, tol);
  return r;
}

ComplexMorphism random_isomorphism(Rng& rng, const HilbertComplex& c, double lo, double hi) {
  std::vector<Mat> g, ginv;
  for (int i = 0; i <= c.top_degree(); ++i) {
    g.push_back(well_conditioned_matrix(rng, c.dim(i), lo, hi));
    ginv.push_back(g.back().inverse());
  }
  std::vector<Operator> d, f;
  for (int i = 0; i < c.top_degree(); ++i)
    d.push_back(Operator::constant(c.algebra(), g[static_cast<std::size_t>(i + 1)]) * c.d(i) *
                Operator::constant(c.algebra(), ginv[static_cast<std::size_t>(i)]));
  for (int i = 0; i <= c.top_degree(); ++i) f.push_back(Operator::constant(c.algebra(), g[static_cast<std::size_t>(i)]));
  HilbertComplex target(c.algebra(), c.dims(), std::move(d));
  return make_morphism(c, std::move(target), std::move(f));
}

std::vector<Operator> random_coupling(Rng& rng, const HilbertComplex& c1, const HilbertComplex& c2) {
  require(c1.algebra() == Algebra::Scalar && c2.algebra() == Algebra::Scalar, ErrorKind::AlgebraMismatch,
          "random_coupling: scalar complexes only");
  require(is_acyclic(c2), ErrorKind::NotAcyclic, "random_coupling: second complex must be acyclic");
  int n = std::max(c1.top_degree(), c2.top_degree());
  HilbertComplex p1 = pad_to(c1, n), p2 = pad_to(c2, n);
  std::vector<Operator> f;
  if (n == 0) return f;
  Mat prev = gaussian_matrix(rng, p1.dim(1), p2.dim(0));
  f.push_back(Operator::scalar(prev));
  for (int i = 0; i + 1 < n; ++i) {
    // f_{i+1} = −d1_{i+1} f_i d2_i⁺ + R (I − d2_i d2_i⁺).
    Mat d2 = p2.d(i).matrix(), d1 = p1.d(i + 1).matrix();
    Mat d2p = d2.size() ? pseudo_inverse(d2, kSigmaTol * op_norm(d2)) : Mat::Zero(d2.cols(), d2.rows());
    Mat r = gaussian_matrix(rng, p1.dim(i + 2), p2.dim(i + 1));
    Mat next = -d1 * prev * d2p + r * (Mat::Identity(p2.dim(i + 1), p2.dim(i + 1)) - d2 * d2p);
    f.push_back(Operator::scalar(next));
    prev = next;
  }
  return f;
}

}  // namespace tl
