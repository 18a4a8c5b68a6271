#include "torsionlab/operator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "torsionlab/errors.hpp"

namespace tl {

namespace {

void check_same_algebra(const Operator& a, const Operator& b, const char* what) {
  require(a.algebra() == b.algebra(), ErrorKind::AlgebraMismatch,
          std::string(what) + ": mixed algebras " + algebra_name(a.algebra()) + " and " +
              algebra_name(b.algebra()));
}

cplx phase(int n, double t) {
  double a = 2.0 * std::numbers::pi * n * t;
  return {std::cos(a), std::sin(a)};
}

std::size_t trig_grid(const Operator& op) {
  int lo = 0, hi = 0;
  for (const auto& [n, c] : op.terms()) {
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }
  return std::max<std::size_t>(64, 8 * static_cast<std::size_t>(hi - lo + 1));
}

}  // namespace

const char* algebra_name(Algebra a) { return a == Algebra::Scalar ? "scalar" : "circle_fibered"; }

Operator Operator::scalar(Mat m) {
  Operator op;
  op.algebra_ = Algebra::Scalar;
  op.payload_ = Payload::Matrix;
  op.rows_ = m.rows();
  op.cols_ = m.cols();
  op.matrix_ = std::move(m);
  return op;
}

Operator Operator::trig_poly(Index rows, Index cols, std::map<int, Mat> terms) {
  for (const auto& [n, c] : terms)
    require(c.rows() == rows && c.cols() == cols, ErrorKind::DimensionMismatch,
            "trig_poly: coefficient of frequency " + std::to_string(n) + " has wrong shape");
  Operator op;
  op.algebra_ = Algebra::CircleFibered;
  op.payload_ = Payload::TrigPoly;
  op.rows_ = rows;
  op.cols_ = cols;
  op.terms_ = std::move(terms);
  return op;
}

Operator Operator::sampled(Index rows, Index cols, std::vector<Mat> fibers) {
  require(!fibers.empty(), ErrorKind::InvalidArgument, "sampled: empty fiber list");
  for (const auto& f : fibers)
    require(f.rows() == rows && f.cols() == cols, ErrorKind::DimensionMismatch,
            "sampled: fibers must share one shape");
  Operator op;
  op.algebra_ = Algebra::CircleFibered;
  op.payload_ = Payload::Sampled;
  op.rows_ = rows;
  op.cols_ = cols;
  op.samples_ = std::move(fibers);
  return op;
}

Operator Operator::sample(Index rows, Index cols, std::size_t n, const std::function<Mat(double)>& symbol) {
  std::vector<Mat> fibers(n);
  for (std::size_t j = 0; j < n; ++j) fibers[j] = symbol(static_cast<double>(j) / static_cast<double>(n));
  return sampled(rows, cols, std::move(fibers));
}

Operator Operator::identity(Algebra a, Index k) { return constant(a, Mat::Identity(k, k)); }

Operator Operator::zero(Algebra a, Index rows, Index cols) {
  if (a == Algebra::Scalar) return scalar(Mat::Zero(rows, cols));
  return trig_poly(rows, cols, {});
}

Operator Operator::constant(Algebra a, Mat m) {
  if (a == Algebra::Scalar) return scalar(std::move(m));
  Index r = m.rows(), c = m.cols();
  return trig_poly(r, c, {{0, std::move(m)}});
}

const Mat& Operator::matrix() const {
  require(payload_ == Payload::Matrix, ErrorKind::InvalidArgument, "matrix(): not a scalar operator");
  return matrix_;
}

const std::map<int, Mat>& Operator::terms() const {
  require(payload_ == Payload::TrigPoly, ErrorKind::InvalidArgument, "terms(): not a trig-poly symbol");
  return terms_;
}

const std::vector<Mat>& Operator::samples() const {
  require(payload_ == Payload::Sampled, ErrorKind::InvalidArgument, "samples(): not a sampled symbol");
  return samples_;
}

Mat Operator::fiber(double t) const {
  switch (payload_) {
    case Payload::Matrix:
      return matrix_;
    case Payload::TrigPoly: {
      Mat out = Mat::Zero(rows_, cols_);
      for (const auto& [n, c] : terms_) out += phase(n, t) * c;
      return out;
    }
    case Payload::Sampled: {
      double n = static_cast<double>(samples_.size());
      double u = t - std::floor(t);
      double j = std::round(u * n);
      require(std::abs(u * n - j) < 1e-9, ErrorKind::InvalidArgument,
              "fiber(): t is not on the sample grid of a sampled symbol");
      return samples_[static_cast<std::size_t>(j) % samples_.size()];
    }
  }
  return {};
}

Mat Operator::fiber_at(std::size_t j, std::size_t n) const {
  if (payload_ == Payload::Sampled) {
    require(n == samples_.size(), ErrorKind::InvalidArgument, "fiber_at(): grid size mismatch");
    return samples_[j];
  }
  return fiber(static_cast<double>(j) / static_cast<double>(n));
}

Operator Operator::adjoint() const {
  switch (payload_) {
    case Payload::Matrix:
      return scalar(matrix_.adjoint());
    case Payload::TrigPoly: {
      std::map<int, Mat> t;
      for (const auto& [n, c] : terms_) t[-n] = c.adjoint();
      return trig_poly(cols_, rows_, std::move(t));
    }
    case Payload::Sampled: {
      std::vector<Mat> f;
      f.reserve(samples_.size());
      for (const auto& m : samples_) f.push_back(m.adjoint());
      return sampled(cols_, rows_, std::move(f));
    }
  }
  return {};
}

Operator Operator::resampled(std::size_t n) const {
  require(algebra_ == Algebra::CircleFibered, ErrorKind::AlgebraMismatch, "resampled(): scalar operator");
  if (payload_ == Payload::Sampled) {
    require(n == samples_.size(), ErrorKind::InvalidArgument,
            "resampled(): sampled symbols cannot change grid size");
    return *this;
  }
  std::vector<Mat> f(n);
  for (std::size_t j = 0; j < n; ++j) f[j] = fiber_at(j, n);
  return sampled(rows_, cols_, std::move(f));
}

std::size_t common_grid(const std::vector<const Operator*>& ops) {
  std::size_t n = 0;
  for (const Operator* op : ops) {
    std::size_t m = op->sample_count();
    if (m == 0) continue;
    require(n == 0 || n == m, ErrorKind::InvalidArgument, "sampled symbols on different grids");
    n = m;
  }
  return n;
}

Operator compose(const Operator& a, const Operator& b) {
  check_same_algebra(a, b, "compose");
  require(a.cols() == b.rows(), ErrorKind::DimensionMismatch,
          "compose: inner dimensions " + std::to_string(a.cols()) + " and " + std::to_string(b.rows()));
  if (a.is_scalar()) return Operator::scalar(a.matrix() * b.matrix());
  std::size_t n = common_grid({&a, &b});
  if (n) {
    std::vector<Mat> f(n);
    for (std::size_t j = 0; j < n; ++j) f[j] = a.fiber_at(j, n) * b.fiber_at(j, n);
    return Operator::sampled(a.rows(), b.cols(), std::move(f));
  }
  std::map<int, Mat> t;
  for (const auto& [p, ca] : a.terms())
    for (const auto& [q, cb] : b.terms()) {
      auto it = t.find(p + q);
      if (it == t.end())
        t.emplace(p + q, ca * cb);
      else
        it->second += ca * cb;
    }
  return Operator::trig_poly(a.rows(), b.cols(), std::move(t));
}

Operator add(const Operator& a, const Operator& b) {
  check_same_algebra(a, b, "add");
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::DimensionMismatch, "add: shape mismatch");
  if (a.is_scalar()) return Operator::scalar(a.matrix() + b.matrix());
  std::size_t n = common_grid({&a, &b});
  if (n) {
    std::vector<Mat> f(n);
    for (std::size_t j = 0; j < n; ++j) f[j] = a.fiber_at(j, n) + b.fiber_at(j, n);
    return Operator::sampled(a.rows(), a.cols(), std::move(f));
  }
  std::map<int, Mat> t = a.terms();
  for (const auto& [q, cb] : b.terms()) {
    auto it = t.find(q);
    if (it == t.end())
      t.emplace(q, cb);
    else
      it->second += cb;
  }
  return Operator::trig_poly(a.rows(), a.cols(), std::move(t));
}

Operator scale(const Operator& a, cplx c) {
  switch (a.payload()) {
    case Operator::Payload::Matrix:
      return Operator::scalar(c * a.matrix());
    case Operator::Payload::TrigPoly: {
      std::map<int, Mat> t;
      for (const auto& [n, m] : a.terms()) t.emplace(n, c * m);
      return Operator::trig_poly(a.rows(), a.cols(), std::move(t));
    }
    case Operator::Payload::Sampled: {
      std::vector<Mat> f;
      for (const auto& m : a.samples()) f.push_back(c * m);
      return Operator::sampled(a.rows(), a.cols(), std::move(f));
    }
  }
  return {};
}

Operator adjoint(const Operator& a) { return a.adjoint(); }

Operator kron(const Operator& a, const Operator& b) {
  if (a.is_scalar() && b.is_scalar()) return Operator::scalar(kron(a.matrix(), b.matrix()));
  require(a.is_scalar() || b.is_scalar(), ErrorKind::AlgebraMismatch,
          "kron: two circle-fibered factors would leave the algebra");
  bool left_scalar = a.is_scalar();
  const Operator& s = left_scalar ? a : b;
  const Operator& c = left_scalar ? b : a;
  auto k = [&](const Mat& m) { return left_scalar ? kron(s.matrix(), m) : kron(m, s.matrix()); };
  Index rows = a.rows() * b.rows(), cols = a.cols() * b.cols();
  if (c.payload() == Operator::Payload::Sampled) {
    std::vector<Mat> f;
    for (const auto& m : c.samples()) f.push_back(k(m));
    return Operator::sampled(rows, cols, std::move(f));
  }
  std::map<int, Mat> t;
  for (const auto& [n, m] : c.terms()) t.emplace(n, k(m));
  return Operator::trig_poly(rows, cols, std::move(t));
}

Operator promote(const Operator& op, Algebra a) {
  if (op.algebra() == a) return op;
  require(a == Algebra::CircleFibered, ErrorKind::AlgebraMismatch,
          "promote: circle-fibered operators cannot be viewed as scalar");
  return Operator::constant(a, op.matrix());
}

Operator fiberwise(const Operator& op, const std::function<Mat(const Mat&)>& f, std::size_t n) {
  if (op.is_scalar()) return Operator::scalar(f(op.matrix()));
  std::size_t grid = op.sample_count() ? op.sample_count() : n;
  std::vector<Mat> out(grid);
  for (std::size_t j = 0; j < grid; ++j) out[j] = f(op.fiber_at(j, grid));
  Index r = out[0].rows(), c = out[0].cols();
  return Operator::sampled(r, c, std::move(out));
}

Operator inverse(const Operator& op, std::size_t n) {
  require(op.is_square(), ErrorKind::DimensionMismatch, "inverse: operator is not square");
  return fiberwise(
      op,
      [](const Mat& m) -> Mat {
        RVec s = singular_values(m);
        require(s.size() == 0 || s(s.size() - 1) > kSigmaTol * s(0), ErrorKind::NotInvertible,
                "inverse: singular fiber");
        return m.inverse();
      },
      n);
}

double sup_norm(const Operator& op) {
  if (op.rows() == 0 || op.cols() == 0) return 0.0;
  if (op.is_scalar()) return op_norm(op.matrix());
  std::size_t n = op.sample_count() ? op.sample_count() : trig_grid(op);
  double best = 0.0;
  for (std::size_t j = 0; j < n; ++j) best = std::max(best, op_norm(op.fiber_at(j, n)));
  return best;
}

BlockOperator::BlockOperator(Algebra a, std::vector<Index> row_dims, std::vector<Index> col_dims)
    : algebra_(a), row_dims_(std::move(row_dims)), col_dims_(std::move(col_dims)) {}

void BlockOperator::set(std::size_t i, std::size_t j, const Operator& op) {
  require(i < row_dims_.size() && j < col_dims_.size(), ErrorKind::InvalidArgument, "block index out of range");
  require(op.rows() == row_dims_[i] && op.cols() == col_dims_[j], ErrorKind::DimensionMismatch,
          "block (" + std::to_string(i) + "," + std::to_string(j) + ") has wrong shape");
  blocks_[{i, j}] = promote(op, algebra_);
}

Operator BlockOperator::assemble() const {
  std::vector<Index> r0(row_dims_.size() + 1, 0), c0(col_dims_.size() + 1, 0);
  for (std::size_t i = 0; i < row_dims_.size(); ++i) r0[i + 1] = r0[i] + row_dims_[i];
  for (std::size_t j = 0; j < col_dims_.size(); ++j) c0[j + 1] = c0[j] + col_dims_[j];
  Index rows = r0.back(), cols = c0.back();
  auto place = [&](auto&& get) {
    Mat m = Mat::Zero(rows, cols);
    for (const auto& [ij, op] : blocks_) {
      auto [i, j] = ij;
      if (row_dims_[i] && col_dims_[j]) m.block(r0[i], c0[j], row_dims_[i], col_dims_[j]) = get(op);
    }
    return m;
  };
  if (algebra_ == Algebra::Scalar) return Operator::scalar(place([](const Operator& op) { return op.matrix(); }));
  std::vector<const Operator*> ptrs;
  for (const auto& [ij, op] : blocks_) ptrs.push_back(&op);
  std::size_t n = common_grid(ptrs);
  if (n) {
    std::vector<Mat> f(n);
    for (std::size_t j = 0; j < n; ++j) f[j] = place([&](const Operator& op) { return op.fiber_at(j, n); });
    return Operator::sampled(rows, cols, std::move(f));
  }
  std::set<int> freqs;
  for (const auto& [ij, op] : blocks_)
    for (const auto& [k, c] : op.terms()) freqs.insert(k);
  std::map<int, Mat> t;
  for (int k : freqs)
    t.emplace(k, place([&](const Operator& op) -> Mat {
                auto it = op.terms().find(k);
                return it == op.terms().end() ? Mat(Mat::Zero(op.rows(), op.cols())) : it->second;
              }));
  return Operator::trig_poly(rows, cols, std::move(t));
}

Operator direct_sum(const Operator& a, const Operator& b) {
  check_same_algebra(a, b, "direct_sum");
  BlockOperator blk(a.algebra(), {a.rows(), b.rows()}, {a.cols(), b.cols()});
  blk.set(0, 0, a);
  blk.set(1, 1, b);
  return blk.assemble();
}

}  // namespace tl
