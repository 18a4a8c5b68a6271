#include "torsionlab/complex.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "torsionlab/errors.hpp"

namespace tl {

namespace {

// Dynamic range beyond which the stacked-matrix SVD no longer resolves the smallest retained value.
constexpr double kStackedRangeLimit = 1e10;

struct FiberSv {
  std::vector<RVec> d;  // singular values of d_q
  std::vector<RVec> b;  // singular values of [d_{q-1}*; d_q]
};

struct Sampling {
  std::vector<double> weights;
  std::vector<FiberSv> fibers;
  std::vector<double> thr;  // kernel threshold per differential
  std::vector<Index> forced;  // ranks fixed by acyclicity, empty otherwise
  double rank_jump_measure = 0.0;
};

Mat stacked(const Mat& prev, const Mat& next, Index rows_prev, Index rows_next, Index cols) {
  Mat b(rows_prev + rows_next, cols);
  if (rows_prev) b.topRows(rows_prev) = prev.adjoint();
  if (rows_next) b.bottomRows(rows_next) = next;
  return b;
}

FiberSv fiber_sv(const HilbertComplex& c, const std::function<Mat(int)>& dq) {
  int n = c.top_degree();
  FiberSv f;
  std::vector<Mat> mats(static_cast<std::size_t>(std::max(n, 0)));
  for (int q = 0; q < n; ++q) {
    mats[static_cast<std::size_t>(q)] = dq(q);
    f.d.push_back(singular_values(mats[static_cast<std::size_t>(q)]));
  }
  for (int q = 0; q <= n; ++q) {
    Mat prev = q > 0 ? mats[static_cast<std::size_t>(q - 1)] : Mat(0, c.dim(q));
    Mat next = q < n ? mats[static_cast<std::size_t>(q)] : Mat(0, c.dim(q));
    f.b.push_back(singular_values(stacked(prev, next, c.dim(q - 1), c.dim(q + 1), c.dim(q))));
  }
  return f;
}

std::vector<Index> ranks(const FiberSv& f, const Sampling& s) {
  if (!s.forced.empty()) return s.forced;
  std::vector<Index> r(f.d.size());
  for (std::size_t q = 0; q < f.d.size(); ++q) r[q] = count_above(f.d[q], s.thr[q]);
  return r;
}

// Per-fiber integrand: log det′Δ⁻_q (q < N) followed by the stacked log det′Δ_q (q ≤ N).
std::vector<double> integrand(const FiberSv& f, const std::vector<Index>& r) {
  std::size_t n = f.d.size();
  std::vector<double> out(2 * n + 1, 0.0);
  for (std::size_t q = 0; q < n; ++q)
    for (Index i = 0; i < r[q]; ++i) out[q] += 2.0 * std::log(f.d[q](i));
  for (std::size_t q = 0; q <= n; ++q) {
    Index k = (q > 0 ? r[q - 1] : 0) + (q < n ? r[q] : 0);
    for (Index i = 0; i < k && i < f.b[q].size(); ++i) out[n + q] += 2.0 * std::log(f.b[q](i));
  }
  return out;
}

Sampling sample_complex(const HilbertComplex& c, const SpectralOptions& opt, std::vector<double>* integral,
                        bool for_hodge = false) {
  Sampling s;
  int n = c.top_degree();
  for (int q = 0; q < n; ++q) s.thr.push_back(kSigmaTol * sup_norm(c.d(q)));
  if (opt.known_acyclic) {
    Index prev = 0;
    for (int q = 0; q < n; ++q) {
      prev = c.dim(q) - prev;
      require(prev >= 0 && prev <= std::min(c.dim(q), c.dim(q + 1)), ErrorKind::NotAcyclic,
              "known_acyclic: dimensions admit no acyclic ranks");
      s.forced.push_back(prev);
    }
    require(c.dim(n) == prev, ErrorKind::NotAcyclic, "known_acyclic: dimensions admit no acyclic ranks");
  }
  if (c.algebra() == Algebra::Scalar) {
    s.weights = {1.0};
    s.fibers.push_back(fiber_sv(c, [&](int q) { return c.d(q).matrix(); }));
  } else {
    std::vector<const Operator*> ptrs;
    for (const auto& d : c.differentials()) ptrs.push_back(&d);
    std::size_t grid = common_grid(ptrs);
    if (grid == 0 && !for_hodge) {
      std::map<double, FiberSv> cache;
      auto res = integrate_adaptive(
          [&](double t) {
            FiberSv f = fiber_sv(c, [&](int q) { return c.d(q).fiber(t); });
            auto v = integrand(f, ranks(f, s));
            cache.emplace(t, std::move(f));
            return v;
          },
          static_cast<std::size_t>(2 * n + 1), opt.adaptive);
      for (const auto& q : res.nodes) {
        s.weights.push_back(q.w);
        s.fibers.push_back(cache.at(q.t));
      }
      if (integral) *integral = res.value;
      return s;
    }
    std::size_t g = grid ? grid : opt.samples;
    for (std::size_t j = 0; j < g; ++j) {
      s.weights.push_back(1.0 / static_cast<double>(g));
      s.fibers.push_back(fiber_sv(c, [&](int q) { return c.d(q).fiber_at(j, g); }));
    }
  }
  // Isolated rank jumps (total measure below kRankJumpTol) are dropped and the weights renormalized.
  std::vector<Index> generic(static_cast<std::size_t>(std::max(n, 0)), 0);
  std::vector<std::vector<Index>> rk;
  for (const auto& f : s.fibers) {
    rk.push_back(ranks(f, s));
    for (std::size_t q = 0; q < generic.size(); ++q) generic[q] = std::max(generic[q], rk.back()[q]);
  }
  std::vector<bool> jump(s.fibers.size(), false);
  for (std::size_t i = 0; i < s.fibers.size(); ++i) {
    jump[i] = rk[i] != generic;
    if (jump[i]) s.rank_jump_measure += s.weights[i];
  }
  if (s.rank_jump_measure > 0 && s.rank_jump_measure < kRankJumpTol) {
    Sampling kept;
    kept.thr = s.thr;
    kept.forced = s.forced;
    kept.rank_jump_measure = s.rank_jump_measure;
    double total = 1.0 - s.rank_jump_measure;
    for (std::size_t i = 0; i < s.fibers.size(); ++i)
      if (!jump[i]) {
        kept.weights.push_back(s.weights[i] / total);
        kept.fibers.push_back(std::move(s.fibers[i]));
      }
    s = std::move(kept);
  }
  if (integral) {
    integral->assign(static_cast<std::size_t>(2 * n + 1), 0.0);
    for (std::size_t i = 0; i < s.fibers.size(); ++i) {
      auto v = integrand(s.fibers[i], ranks(s.fibers[i], s));
      for (std::size_t k = 0; k < v.size(); ++k) (*integral)[k] += s.weights[i] * v[k];
    }
  }
  return s;
}

std::vector<double> betti_from(const HilbertComplex& c, const Sampling& s) {
  int n = c.top_degree();
  std::vector<double> b(static_cast<std::size_t>(n + 1), 0.0);
  for (std::size_t i = 0; i < s.fibers.size(); ++i) {
    auto r = ranks(s.fibers[i], s);
    for (int q = 0; q <= n; ++q) {
      Index k = c.dim(q) - (q > 0 ? r[static_cast<std::size_t>(q - 1)] : 0) - (q < n ? r[static_cast<std::size_t>(q)] : 0);
      b[static_cast<std::size_t>(q)] += s.weights[i] * static_cast<double>(k);
    }
  }
  return b;
}

}  // namespace

HilbertComplex::HilbertComplex(Algebra a, std::vector<Index> dims, std::vector<Operator> diffs, bool validate)
    : algebra_(a), dims_(std::move(dims)), diffs_(std::move(diffs)) {
  require(!dims_.empty(), ErrorKind::InvalidArgument, "complex needs at least one module");
  require(diffs_.size() + 1 == dims_.size(), ErrorKind::DimensionMismatch,
          "complex with " + std::to_string(dims_.size()) + " modules needs " + std::to_string(dims_.size() - 1) +
              " differentials");
  for (std::size_t q = 0; q < diffs_.size(); ++q) {
    diffs_[q] = promote(diffs_[q], a);
    require(diffs_[q].cols() == dims_[q] && diffs_[q].rows() == dims_[q + 1], ErrorKind::DimensionMismatch,
            "differential " + std::to_string(q) + " has shape " + std::to_string(diffs_[q].rows()) + "x" +
                std::to_string(diffs_[q].cols()) + ", expected " + std::to_string(dims_[q + 1]) + "x" +
                std::to_string(dims_[q]));
  }
  if (validate) {
    double defect = d_squared_defect();
    require(defect <= kComplexTol, ErrorKind::NotAComplex,
            "d∘d ≠ 0 (relative defect " + std::to_string(defect) + ")");
  }
}

HilbertComplex HilbertComplex::zero(Algebra a, std::vector<Index> dims) {
  std::vector<Operator> d;
  for (std::size_t q = 0; q + 1 < dims.size(); ++q) d.push_back(Operator::zero(a, dims[q + 1], dims[q]));
  return HilbertComplex(a, std::move(dims), std::move(d), false);
}

Index HilbertComplex::dim(int q) const {
  if (q < 0 || q > top_degree()) return 0;
  return dims_[static_cast<std::size_t>(q)];
}

const Operator& HilbertComplex::d(int q) const {
  require(q >= 0 && q < top_degree(), ErrorKind::InvalidArgument, "differential index out of range");
  return diffs_[static_cast<std::size_t>(q)];
}

Operator HilbertComplex::d_or_zero(int q) const {
  if (q >= 0 && q < top_degree()) return d(q);
  return Operator::zero(algebra_, dim(q + 1), dim(q));
}

double HilbertComplex::d_squared_defect() const {
  double worst = 0.0;
  for (int q = 0; q + 1 < top_degree(); ++q) {
    double num = sup_norm(d(q + 1) * d(q));
    double den = std::max(1.0, sup_norm(d(q + 1)) * sup_norm(d(q)));
    worst = std::max(worst, num / den);
  }
  return worst;
}

double HilbertComplex::euler_characteristic() const {
  double chi = 0;
  for (int q = 0; q <= top_degree(); ++q) chi += (q % 2 ? -1.0 : 1.0) * static_cast<double>(dim(q));
  return chi;
}

std::vector<Operator> laplacians(const HilbertComplex& c) {
  std::vector<Operator> out;
  for (int q = 0; q <= c.top_degree(); ++q) {
    Operator up = c.d_or_zero(q), down = c.d_or_zero(q - 1);
    out.push_back(up.adjoint() * up + down * down.adjoint());
  }
  return out;
}

HodgeData hodge_decompose(const HilbertComplex& c, const SpectralOptions& opt) {
  HodgeData h;
  int n = c.top_degree();
  std::vector<double> thr;
  for (int q = 0; q < n; ++q) thr.push_back(kSigmaTol * sup_norm(c.d(q)));
  std::size_t grid = 1;
  if (c.algebra() == Algebra::CircleFibered) {
    std::vector<const Operator*> ptrs;
    for (const auto& d : c.differentials()) ptrs.push_back(&d);
    grid = common_grid(ptrs);
    if (grid == 0) grid = opt.samples;
  }
  // Generic ranks: the maximal fiber rank of each differential.
  std::vector<std::vector<Mat>> fib(static_cast<std::size_t>(n));
  std::vector<Index> generic(static_cast<std::size_t>(n), 0);
  for (int q = 0; q < n; ++q)
    for (std::size_t j = 0; j < grid; ++j) {
      Mat m = c.algebra() == Algebra::Scalar ? c.d(q).matrix() : c.d(q).fiber_at(j, grid);
      generic[static_cast<std::size_t>(q)] =
          std::max(generic[static_cast<std::size_t>(q)], count_above(singular_values(m), thr[static_cast<std::size_t>(q)]));
      fib[static_cast<std::size_t>(q)].push_back(std::move(m));
    }
  std::vector<bool> jump(grid, false);
  for (int q = 0; q < n; ++q)
    for (std::size_t j = 0; j < grid; ++j)
      if (count_above(singular_values(fib[static_cast<std::size_t>(q)][j]), thr[static_cast<std::size_t>(q)]) <
          generic[static_cast<std::size_t>(q)])
        jump[j] = true;
  for (std::size_t j = 0; j < grid; ++j)
    if (jump[j]) h.rank_jump_measure += 1.0 / static_cast<double>(grid);
  if (h.rank_jump_measure > kRankJumpTol)
    h.warnings.push_back("rank-jump set has measure " + std::to_string(h.rank_jump_measure));

  auto make = [&](std::vector<Mat>&& f, Index r, Index cdim) {
    if (c.algebra() == Algebra::Scalar) return Operator::scalar(std::move(f[0]));
    return Operator::sampled(r, cdim, std::move(f));
  };
  for (int q = 0; q <= n; ++q) {
    Index k = c.dim(q);
    Index rp = q > 0 ? generic[static_cast<std::size_t>(q - 1)] : 0;
    Index rm = q < n ? generic[static_cast<std::size_t>(q)] : 0;
    std::vector<Mat> ph, pp, pm, dp, dm;
    for (std::size_t j = 0; j < grid; ++j) {
      Mat P = Mat::Zero(k, k), M = Mat::Zero(k, k);
      Mat DP = Mat::Zero(rp, rp), DM = Mat::Zero(rm, rm);
      if (q > 0 && rp > 0) {
        Eigen::JacobiSVD<Mat> svd(fib[static_cast<std::size_t>(q - 1)][j], Eigen::ComputeThinU);
        Mat u = svd.matrixU().leftCols(rp);
        P = u * u.adjoint();
        DP = svd.singularValues().head(rp).array().square().matrix().cast<cplx>().asDiagonal();
      }
      if (q < n && rm > 0) {
        Eigen::JacobiSVD<Mat> svd(fib[static_cast<std::size_t>(q)][j], Eigen::ComputeThinV);
        Mat v = svd.matrixV().leftCols(rm);
        M = v * v.adjoint();
        DM = svd.singularValues().head(rm).array().square().matrix().cast<cplx>().asDiagonal();
      }
      ph.push_back(Mat::Identity(k, k) - P - M);
      pp.push_back(std::move(P));
      pm.push_back(std::move(M));
      dp.push_back(std::move(DP));
      dm.push_back(std::move(DM));
    }
    h.harmonic.push_back(make(std::move(ph), k, k));
    h.plus.push_back(make(std::move(pp), k, k));
    h.minus.push_back(make(std::move(pm), k, k));
    h.delta_plus.push_back(make(std::move(dp), rp, rp));
    h.delta_minus.push_back(make(std::move(dm), rm, rm));
  }
  return h;
}

std::vector<double> reduced_betti(const HilbertComplex& c, const SpectralOptions& opt) {
  Sampling s = sample_complex(c, opt, nullptr, true);
  return betti_from(c, s);
}

bool is_acyclic(const HilbertComplex& c, const SpectralOptions& opt) {
  for (double b : reduced_betti(c, opt))
    if (b >= kAcyclicTol) return false;
  return true;
}

TorsionReport torsion(const HilbertComplex& c, const SpectralOptions& opt) {
  TorsionReport r;
  int n = c.top_degree();
  std::vector<double> integral;
  Sampling s = sample_complex(c, opt, &integral);
  r.fibers = s.fibers.size();
  r.rank_jump_measure = s.rank_jump_measure;
  r.reduced_betti = betti_from(c, s);
  r.acyclic = std::all_of(r.reduced_betti.begin(), r.reduced_betti.end(), [](double b) { return b < kAcyclicTol; });

  // Determinant class per degree, from the retained singular values of [d_{q-1}*; d_q].
  for (int q = 0; q <= n; ++q) {
    SpectralMeasure m;
    double range = 1.0;
    for (std::size_t i = 0; i < s.fibers.size(); ++i) {
      auto rk = ranks(s.fibers[i], s);
      Index k = (q > 0 ? rk[static_cast<std::size_t>(q - 1)] : 0) + (q < n ? rk[static_cast<std::size_t>(q)] : 0);
      const RVec& b = s.fibers[i].b[static_cast<std::size_t>(q)];
      k = std::min<Index>(k, b.size());
      m.weights.push_back(s.weights[i]);
      m.sv.push_back(b.head(k));
      if (k > 0) range = std::max(range, b(0) / std::max(b(k - 1), 1e-300));
    }
    finalize_measure(m);
    if (range > kStackedRangeLimit) r.direct_reliable = false;
    DetClassVerdict v;
    if (c.algebra() == Algebra::Scalar) {
      // Finite-dimensional: every complex is of determinant class.
      v.state = DetClass::Yes;
      v.is_determinant_class = true;
      v.diagnostics = "finite-dimensional";
    } else {
      v = determinant_class_check(m);
    }
    if (v.state == DetClass::No)
      throw DivergentDeterminant("torsion: degree " + std::to_string(q) + " is not of determinant class", q);
    r.determinant_class.push_back(std::move(v));
  }

  for (int q = 0; q < n; ++q) r.log_det_reduced.push_back(integral[static_cast<std::size_t>(q)]);
  for (int q = 0; q <= n; ++q) {
    double down = q < n ? r.log_det_reduced[static_cast<std::size_t>(q)] : 0.0;
    double up = q > 0 ? r.log_det_reduced[static_cast<std::size_t>(q - 1)] : 0.0;
    r.log_det_laplacian.push_back(down + up);
    r.log_det_laplacian_direct.push_back(integral[static_cast<std::size_t>(n + q)]);
  }
  for (int q = 0; q <= n; ++q) {
    double sign = (q + 1) % 2 ? -1.0 : 1.0;
    r.log_torsion += 0.5 * sign * q * r.log_det_laplacian[static_cast<std::size_t>(q)];
    r.log_torsion_direct += 0.5 * sign * q * r.log_det_laplacian_direct[static_cast<std::size_t>(q)];
  }
  for (int q = 0; q < n; ++q) r.log_torsion_reduced += 0.5 * (q % 2 ? -1.0 : 1.0) * r.log_det_reduced[static_cast<std::size_t>(q)];
  r.formula_gap = std::abs(r.log_torsion_direct - r.log_torsion_reduced);
  return r;
}

HilbertComplex pad_to(const HilbertComplex& c, int n) {
  if (n <= c.top_degree()) return c;
  std::vector<Index> dims = c.dims();
  std::vector<Operator> d = c.differentials();
  while (static_cast<int>(dims.size()) - 1 < n) {
    d.push_back(Operator::zero(c.algebra(), 0, dims.back()));
    dims.push_back(0);
  }
  return HilbertComplex(c.algebra(), std::move(dims), std::move(d), false);
}

HilbertComplex dual(const HilbertComplex& c) {
  int top = c.top_degree() % 2 ? c.top_degree() : c.top_degree() + 1;
  HilbertComplex p = pad_to(c, top);
  std::vector<Index> dims;
  std::vector<Operator> d;
  for (int j = 0; j <= top; ++j) dims.push_back(p.dim(top - j));
  for (int j = 0; j < top; ++j) d.push_back(p.d(top - 1 - j).adjoint());
  return HilbertComplex(c.algebra(), std::move(dims), std::move(d), false);
}

HilbertComplex suspension(const HilbertComplex& c) {
  std::vector<Index> dims{0};
  std::vector<Operator> d{Operator::zero(c.algebra(), c.dim(0), 0)};
  for (int q = 0; q <= c.top_degree(); ++q) dims.push_back(c.dim(q));
  for (int q = 0; q < c.top_degree(); ++q) d.push_back(-c.d(q));
  return HilbertComplex(c.algebra(), std::move(dims), std::move(d), false);
}

HilbertComplex direct_sum(const HilbertComplex& a, const HilbertComplex& b) {
  require(a.algebra() == b.algebra(), ErrorKind::AlgebraMismatch, "direct_sum: mixed algebras");
  int n = std::max(a.top_degree(), b.top_degree());
  HilbertComplex pa = pad_to(a, n), pb = pad_to(b, n);
  std::vector<Index> dims;
  std::vector<Operator> d;
  for (int q = 0; q <= n; ++q) dims.push_back(pa.dim(q) + pb.dim(q));
  for (int q = 0; q < n; ++q) d.push_back(direct_sum(pa.d(q), pb.d(q)));
  return HilbertComplex(a.algebra(), std::move(dims), std::move(d), false);
}

HilbertComplex tensor_product(const HilbertComplex& a, const HilbertComplex& b) {
  require(a.algebra() == Algebra::Scalar || b.algebra() == Algebra::Scalar, ErrorKind::AlgebraMismatch,
          "tensor_product: two circle-fibered factors are not supported");
  Algebra alg = a.algebra() == Algebra::Scalar ? b.algebra() : a.algebra();
  int na = a.top_degree(), nb = b.top_degree(), n = na + nb;
  // Components of degree k, ordered by p ascending: (p, k − p).
  auto comps = [&](int k) {
    std::vector<std::pair<int, int>> out;
    for (int p = std::max(0, k - nb); p <= std::min(k, na); ++p) out.emplace_back(p, k - p);
    return out;
  };
  std::vector<Index> dims;
  for (int k = 0; k <= n; ++k) {
    Index s = 0;
    for (auto [p, q] : comps(k)) s += a.dim(p) * b.dim(q);
    dims.push_back(s);
  }
  std::vector<Operator> d;
  for (int k = 0; k < n; ++k) {
    auto src = comps(k), dst = comps(k + 1);
    std::vector<Index> rd, cd;
    for (auto [p, q] : dst) rd.push_back(a.dim(p) * b.dim(q));
    for (auto [p, q] : src) cd.push_back(a.dim(p) * b.dim(q));
    BlockOperator blk(alg, rd, cd);
    for (std::size_t j = 0; j < src.size(); ++j) {
      auto [p, q] = src[j];
      for (std::size_t i = 0; i < dst.size(); ++i) {
        auto [p2, q2] = dst[i];
        if (p2 == p + 1 && q2 == q)
          blk.set(i, j, kron(a.d(p), Operator::identity(b.algebra(), b.dim(q))));
        else if (p2 == p && q2 == q + 1)
          blk.set(i, j, scale(kron(Operator::identity(a.algebra(), a.dim(p)), b.d(q)), p % 2 ? -1.0 : 1.0));
      }
    }
    d.push_back(blk.assemble());
  }
  return HilbertComplex(alg, std::move(dims), std::move(d), false);
}

}  // namespace tl
