#include "torsionlab/morse.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "torsionlab/errors.hpp"

namespace tl {

namespace {

constexpr double kPositionTol = 1e-12;
constexpr std::size_t kGrid = 4096;

struct CirclePoint {
  std::string id;
  double t;
  int index;
  double value;
};

bool same_position(double a, double b) {
  double d = std::abs(a - b);
  return std::min(d, 1.0 - d) < kPositionTol;
}

std::vector<CirclePoint> circle_points(const MorseDatum& m) {
  require(m.dimension == 1, ErrorKind::InvalidArgument, "not a circle triangulation: dimension != 1");
  std::vector<CirclePoint> pts;
  for (const auto& p : m.points) {
    require(std::isfinite(p.position), ErrorKind::InvalidArgument, "critical point '" + p.id + "' has no position");
    pts.push_back({p.id, p.position, p.index, p.value});
  }
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  return pts;
}

std::string circle_generator(const MorseDatum& m) {
  for (const auto& inc : m.incidences)
    for (const auto& l : inc.word) return l.generator;
  return "g";
}

/// Neighbouring minima of the maximum at sorted position i, lifted around it.
std::pair<double, double> cell_of(const std::vector<CirclePoint>& pts, std::size_t i) {
  std::size_t n = pts.size();
  const auto& l = pts[(i + n - 1) % n];
  const auto& r = pts[(i + 1) % n];
  double sl = l.t < pts[i].t ? l.t : l.t - 1.0;
  double sr = r.t > pts[i].t ? r.t : r.t + 1.0;
  return {sl, sr};
}

Word power_word(const std::string& g, int p) {
  if (p == 0) return {};
  return {Letter{g, p}};
}

MorseDatum triangulate(std::vector<CirclePoint> pts, const std::string& generator) {
  require(pts.size() >= 2 && pts.size() % 2 == 0, ErrorKind::InvalidArgument,
          "circle triangulation needs equally many minima and maxima");
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    require(pts[i].t >= 0.0 && pts[i].t < 1.0, ErrorKind::InvalidArgument, "circle positions must lie in [0, 1)");
    require(pts[i].index == 0 || pts[i].index == 1, ErrorKind::InvalidArgument, "circle indices must be 0 or 1");
    require(pts[i].index != pts[(i + 1) % n].index, ErrorKind::InvalidArgument,
            "minima and maxima must alternate around the circle");
    if (i + 1 < n)
      require(pts[i + 1].t - pts[i].t > kPositionTol, ErrorKind::InvalidArgument, "coincident critical points");
  }
  MorseDatum m;
  m.dimension = 1;
  for (const auto& p : pts) m.points.push_back({p.id, p.index, p.value, p.t});
  for (std::size_t i = 0; i < n; ++i) {
    if (pts[i].index != 1) continue;
    auto [sl, sr] = cell_of(pts, i);
    const auto& l = pts[(i + n - 1) % n];
    const auto& r = pts[(i + 1) % n];
    m.incidences.push_back({l.id, pts[i].id, power_word(generator, static_cast<int>(std::floor(sl))), 1});
    m.incidences.push_back({r.id, pts[i].id, power_word(generator, static_cast<int>(std::floor(sr))), -1});
  }
  validate(m);
  return m;
}

Operator power(const Operator& a, int p, std::size_t n) {
  Operator base = p < 0 ? inverse(a, n) : a;
  Operator out = Operator::identity(a.algebra(), a.rows());
  for (int i = 0; i < std::abs(p); ++i) out = base * out;
  return out;
}

double fk(const Operator& a) { return a.is_scalar() ? std::log(std::abs(a.matrix().determinant())) : fk_log_det(a); }

void require_positive(const Operator& mu, const std::string& what) {
  auto check = [&](const Mat& m) {
    require(hermitian_defect(m) < 1e-10, ErrorKind::NotSelfAdjoint, what + ": not Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    require(m.rows() == 0 || es.eigenvalues().minCoeff() > 0.0, ErrorKind::InvalidArgument,
            what + ": not positive definite");
  };
  if (mu.is_scalar()) {
    check(mu.matrix());
    return;
  }
  std::size_t n = mu.sample_count() ? mu.sample_count() : 256;
  for (std::size_t j = 0; j < n; ++j) check(mu.fiber_at(j, n));
}

Operator sqrt_op(const Operator& mu, bool inverse_root) {
  return fiberwise(mu, [&](const Mat& m) {
    return hermitian_apply(m, [&](double l) { return inverse_root ? 1.0 / std::sqrt(l) : std::sqrt(l); });
  });
}

bool is_identity(const Operator& op) {
  if (op.payload() == Operator::Payload::TrigPoly) {
    const auto& t = op.terms();
    if (t.size() != 1 || t.begin()->first != 0) return false;
    return (t.begin()->second - Mat::Identity(op.rows(), op.cols())).norm() == 0.0;
  }
  if (op.is_scalar()) return (op.matrix() - Mat::Identity(op.rows(), op.cols())).norm() == 0.0;
  return false;
}


/// Lift of `t` into the open cell (sl, sr), or NaN if it is not inside.
double lift_into(double t, double sl, double sr) {
  for (int k = -1; k <= 2; ++k) {
    double s = t + k;
    if (s > sl + kPositionTol && s < sr - kPositionTol) return s;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

struct Match {
  std::size_t point;  // index into the sorted points of the target triangulation
  int winding;        // ⌊lift⌋, the transport exponent
};

/// Point of `tau` at the same position, else the maximum whose open cell contains t.
Match match_point(const std::vector<CirclePoint>& tau, double t) {
  for (std::size_t i = 0; i < tau.size(); ++i)
    if (same_position(tau[i].t, t)) return {i, 0};
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (tau[i].index != 1) continue;
    auto [sl, sr] = cell_of(tau, i);
    double s = lift_into(t, sl, sr);
    if (std::isfinite(s)) return {i, static_cast<int>(std::floor(s))};
  }
  fail(ErrorKind::InvalidArgument, "position not covered by the triangulation");
}

}  // namespace

Word parse_word(const std::string& text) {
  Word w;
  std::string s;
  for (char c : text) s += (c == '*' || c == '.') ? ' ' : c;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    if (tok == "e" || tok == "1") continue;
    auto caret = tok.find('^');
    std::string name = tok.substr(0, caret);
    require(!name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_'), ErrorKind::Parse,
            "bad generator in word '" + text + "'");
    int p = 1;
    if (caret != std::string::npos) {
      std::string e = tok.substr(caret + 1);
      std::size_t used = 0;
      try {
        p = std::stoi(e, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      require(used == e.size() && used > 0, ErrorKind::Parse, "bad exponent in word '" + text + "'");
    }
    if (p == 0) continue;
    if (!w.empty() && w.back().generator == name) {
      w.back().power += p;
      if (w.back().power == 0) w.pop_back();
    } else {
      w.push_back({name, p});
    }
  }
  return w;
}

std::string format_word(const Word& w) {
  if (w.empty()) return "e";
  std::string out;
  for (const auto& l : w) {
    if (!out.empty()) out += ' ';
    out += l.generator;
    if (l.power != 1) out += "^" + std::to_string(l.power);
  }
  return out;
}

Word inverse_word(const Word& w) {
  Word out(w.rbegin(), w.rend());
  for (auto& l : out) l.power = -l.power;
  return out;
}

std::vector<std::size_t> MorseDatum::cells(int q) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i].index == q) out.push_back(i);
  return out;
}

std::size_t MorseDatum::find(const std::string& id) const {
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i].id == id) return i;
  fail(ErrorKind::InvalidArgument, "unknown critical point '" + id + "'");
}

int MorseDatum::max_index() const {
  int m = 0;
  for (const auto& p : points) m = std::max(m, p.index);
  return m;
}

void validate(const MorseDatum& m) {
  require(m.dimension >= 0, ErrorKind::InvalidArgument, "negative dimension");
  std::set<std::string> ids;
  for (const auto& p : m.points) {
    require(!p.id.empty(), ErrorKind::InvalidArgument, "critical point without id");
    require(ids.insert(p.id).second, ErrorKind::InvalidArgument, "duplicate critical point '" + p.id + "'");
    require(p.index >= 0 && p.index <= m.dimension, ErrorKind::InvalidArgument,
            "index of '" + p.id + "' outside 0..dimension");
  }
  for (const auto& inc : m.incidences) {
    const auto& a = m.points[m.find(inc.from)];
    const auto& b = m.points[m.find(inc.to)];
    require(b.index == a.index + 1, ErrorKind::InvalidArgument,
            "incidence " + inc.from + " -> " + inc.to + " does not raise the index by one");
  }
}

MorseDatum circle_datum(double t_min, double t_max, const std::string& generator) {
  auto h = [&](double t) { return (std::cos(2.0 * M_PI * (t - t_max)) + 1.0) / 2.0; };
  return triangulate({{"min", t_min, 0, h(t_min)}, {"max", t_max, 1, h(t_max)}}, generator);
}

MorseDatum circle_triangulation(const std::vector<std::pair<double, int>>& points, const std::string& generator) {
  std::vector<CirclePoint> pts;
  int mins = 0, maxs = 0;
  for (const auto& [t, q] : points) {
    std::string id = q == 0 ? "min" + std::to_string(mins++) : "max" + std::to_string(maxs++);
    pts.push_back({id, t, q, q == 0 ? 0.0 : 1.0});
  }
  return triangulate(std::move(pts), generator);
}

MorseDatum sphere_datum(int n) {
  require(n >= 2, ErrorKind::InvalidArgument, "sphere_datum: dimension must be at least 2");
  MorseDatum m;
  m.dimension = n;
  m.points = {{"south", 0, 0.0}, {"north", n, 1.0}};
  return m;
}

MorseDatum product_datum(const MorseDatum& a, const MorseDatum& b) {
  MorseDatum m;
  m.dimension = a.dimension + b.dimension;
  auto pid = [](const std::string& x, const std::string& y) { return x + "x" + y; };
  for (int p = 0; p <= a.dimension; ++p)
    for (std::size_t i : a.cells(p))
      for (const auto& y : b.points) {
        const auto& x = a.points[i];
        m.points.push_back({pid(x.id, y.id), x.index + y.index, x.value + y.value});
      }
  for (const auto& inc : a.incidences)
    for (const auto& y : b.points) m.incidences.push_back({pid(inc.from, y.id), pid(inc.to, y.id), inc.word, inc.coeff});
  for (const auto& inc : b.incidences)
    for (const auto& x : a.points) {
      int sign = x.index % 2 == 0 ? 1 : -1;
      m.incidences.push_back({pid(x.id, inc.from), pid(x.id, inc.to), inc.word, sign * inc.coeff});
    }
  validate(m);
  return m;
}

MorseDatum dual_triangulation(const MorseDatum& m) {
  MorseDatum d;
  d.dimension = m.dimension;
  for (const auto& p : m.points) d.points.push_back({p.id, m.dimension - p.index, m.dimension - p.value, p.position});
  for (const auto& inc : m.incidences) d.incidences.push_back({inc.to, inc.from, inverse_word(inc.word), inc.coeff});
  validate(d);
  return d;
}

MorseDatum subdivide_circle(const MorseDatum& m, double at, double spacing) {
  auto pts = circle_points(m);
  require(at >= 0.0 && at < 1.0 && spacing > 0.0, ErrorKind::InvalidArgument, "subdivide_circle: bad location");
  double second = std::fmod(at + spacing, 1.0);
  std::size_t n = pts.size();
  std::size_t pred = n - 1;
  for (std::size_t i = 0; i < n; ++i)
    if (pts[i].t < at) pred = i;
  const auto& next = pts[(pred + 1) % n];
  double gap_end = next.t > pts[pred].t ? next.t : next.t + 1.0;
  double lifted_at = at > pts[pred].t ? at : at + 1.0;
  require(!same_position(at, pts[pred].t) && lifted_at + spacing < gap_end - kPositionTol, ErrorKind::InvalidArgument,
          "subdivide_circle: the pair does not fit strictly inside one gap");
  int first = 1 - pts[pred].index;
  std::set<std::string> ids;
  for (const auto& p : pts) ids.insert(p.id);
  int k = 0;
  auto fresh = [&](const char* stem) {
    std::string id;
    do id = std::string(stem) + std::to_string(k++);
    while (ids.count(id));
    ids.insert(id);
    return id;
  };
  pts.push_back({fresh(first == 0 ? "smin" : "smax"), at, first, first == 0 ? 0.0 : 1.0});
  pts.push_back({fresh(first == 0 ? "smax" : "smin"), second, 1 - first, first == 0 ? 1.0 : 0.0});
  return triangulate(std::move(pts), circle_generator(m));
}

Operator Representation::evaluate(const Word& w, std::size_t n) const {
  Operator out = Operator::identity(algebra, dim);
  for (const auto& l : w) {
    auto it = generators.find(l.generator);
    require(it != generators.end(), ErrorKind::InvalidArgument, "representation has no generator '" + l.generator + "'");
    out = out * power(it->second, l.power, n);
  }
  return out;
}

Representation Representation::dual() const {
  Representation r = *this;
  for (auto& [g, op] : r.generators) op = adjoint(inverse(op));
  return r;
}

Representation scalar_representation(const std::string& generator, cplx holonomy) {
  Mat m(1, 1);
  m(0, 0) = holonomy;
  return single_generator(generator, Operator::scalar(m));
}

Representation single_generator(const std::string& generator, const Operator& holonomy) {
  require(holonomy.is_square(), ErrorKind::DimensionMismatch, "holonomy must be square");
  Representation r;
  r.algebra = holonomy.algebra();
  r.dim = holonomy.rows();
  r.generators[generator] = holonomy;
  return r;
}

Representation product_representation(const Representation& a, const Representation& b) {
  Representation r;
  r.algebra = (a.algebra == Algebra::CircleFibered || b.algebra == Algebra::CircleFibered) ? Algebra::CircleFibered
                                                                                           : Algebra::Scalar;
  r.dim = a.dim * b.dim;
  Operator ia = Operator::identity(a.algebra, a.dim), ib = Operator::identity(b.algebra, b.dim);
  for (const auto& [g, op] : a.generators) r.generators[g] = kron(op, ib);
  for (const auto& [g, op] : b.generators) {
    require(!r.generators.count(g), ErrorKind::InvalidArgument, "generator '" + g + "' appears in both factors");
    r.generators[g] = kron(ia, op);
  }
  return r;
}

Operator HermitianStructure::at(double s) const {
  double k = std::floor(s);
  Operator m = base(s - k);
  int w = static_cast<int>(k);
  if (w == 0) return m;
  Operator t = power(holonomy, -w, kGrid);
  return adjoint(t) * m * t;
}

double HermitianStructure::log_det_at(double s) const {
  double k = std::floor(s);
  double u = s - k;
  double ld = log_det ? log_det(u) : fk(base(u));
  if (k != 0.0) ld -= 2.0 * k * fk(holonomy);
  return ld;
}

double HermitianStructure::equivariance_defect() const {
  Operator a_inv = inverse(holonomy, kGrid);
  Operator want = adjoint(a_inv) * base(0.0) * a_inv;
  return sup_norm(base(1.0) - want) / std::max(1.0, sup_norm(want));
}

HermitianStructure identity_structure(const Operator& holonomy) {
  HermitianStructure mu;
  mu.algebra = holonomy.algebra();
  mu.dim = holonomy.rows();
  mu.holonomy = holonomy;
  Operator id = Operator::identity(mu.algebra, mu.dim);
  mu.base = [id](double) { return id; };
  mu.log_det = [](double) { return 0.0; };
  return mu;
}

HermitianStructure canonical_structure(const Operator& holonomy, double t1, double t2, double eps, std::size_t n) {
  require(holonomy.is_square(), ErrorKind::DimensionMismatch, "holonomy must be square");
  require(0.0 < t1 - eps && t1 < t2 && t2 + eps < 1.0, ErrorKind::InvalidArgument,
          "canonical_structure: need 0 < t1 - eps < t1 < t2 < t2 + eps < 1");
  HermitianStructure mu;
  mu.algebra = holonomy.algebra();
  mu.dim = holonomy.rows();
  mu.holonomy = holonomy;
  Operator log_p = fiberwise(
      holonomy * adjoint(holonomy),
      [](const Mat& m) { return hermitian_apply(m, [](double l) { return std::log(l); }); }, n);
  double fk_a = fk(holonomy);
  double len = 1.0 - (t2 - t1) - 2.0 * eps;
  double right = t2 + eps, left = t1 - eps;
  Operator id = Operator::identity(mu.algebra, mu.dim);
  // (AA*)^{−s}: reaches A⁻*A⁻¹ at s = 1, so that A* μ A = I on the far side of the seam.
  auto p_pow = [log_p, n](double s) {
    return fiberwise(
        log_p, [s](const Mat& m) { return hermitian_apply(m, [s](double l) { return std::exp(-s * l); }); }, n);
  };
  Operator a = holonomy;
  mu.base = [=](double u) -> Operator {
    if (u >= left && u <= right) return id;
    if (u > right) return p_pow(smoothstep((u - right) / len));
    return adjoint(a) * p_pow(smoothstep((u + 1.0 - right) / len)) * a;
  };
  mu.log_det = [=](double u) {
    if (u >= left && u <= right) return 0.0;
    if (u > right) return -2.0 * fk_a * smoothstep((u - right) / len);
    return 2.0 * fk_a * (1.0 - smoothstep((u + 1.0 - right) / len));
  };
  return mu;
}

HermitianStructure conformal_structure(const HermitianStructure& mu, std::function<double(double)> phi) {
  HermitianStructure out = mu;
  auto base = mu.base;
  out.base = [base, phi](double u) { return scale(base(u), std::exp(phi(u))); };
  double k = static_cast<double>(mu.dim);
  out.log_det = [mu, phi, k](double u) { return mu.log_det_at(u) + k * phi(u); };
  return out;
}

HermitianStructure sampled_structure(const Operator& holonomy, std::vector<double> t, std::vector<Operator> mu) {
  require(!t.empty() && t.size() == mu.size(), ErrorKind::DimensionMismatch, "sampled_structure: |t| != |mu|");
  for (std::size_t i = 0; i < t.size(); ++i) {
    require(t[i] >= 0.0 && t[i] < 1.0, ErrorKind::InvalidArgument, "sampled_structure: t outside [0, 1)");
    require(i == 0 || t[i] > t[i - 1], ErrorKind::InvalidArgument, "sampled_structure: t not increasing");
    require(mu[i].rows() == holonomy.rows() && mu[i].is_square(), ErrorKind::DimensionMismatch,
            "sampled_structure: sample has the wrong size");
    require_positive(mu[i], "sampled_structure sample " + std::to_string(i));
  }
  HermitianStructure out;
  out.algebra = holonomy.algebra();
  out.dim = holonomy.rows();
  out.holonomy = holonomy;
  Operator a_inv = inverse(holonomy);
  std::vector<double> knots;
  std::vector<Operator> vals;
  knots.push_back(t.back() - 1.0);
  vals.push_back(adjoint(holonomy) * promote(mu.back(), out.algebra) * holonomy);
  for (std::size_t i = 0; i < t.size(); ++i) {
    knots.push_back(t[i]);
    vals.push_back(promote(mu[i], out.algebra));
  }
  knots.push_back(t.front() + 1.0);
  vals.push_back(adjoint(a_inv) * promote(mu.front(), out.algebra) * a_inv);
  out.base = [knots, vals](double u) {
    std::size_t j = 0;
    while (j + 2 < knots.size() && knots[j + 1] <= u) ++j;
    double w = (u - knots[j]) / (knots[j + 1] - knots[j]);
    if (w == 0.0) return vals[j];
    if (w == 1.0) return vals[j + 1];
    return scale(vals[j], 1.0 - w) + scale(vals[j + 1], w);
  };
  return out;
}

double V_function(const HermitianStructure& mu1, const HermitianStructure& mu2, double s) {
  return 0.5 * (mu2.log_det_at(s) - mu1.log_det_at(s));
}

double theta_form(const HermitianStructure& mu, double s, double h) {
  return -0.5 * (mu.log_det_at(s + h) - mu.log_det_at(s - h)) / (2.0 * h);
}

std::vector<Operator> point_weights(const MorseDatum& m, const HermitianStructure& mu) {
  std::vector<Operator> w;
  for (const auto& p : m.points) {
    require(std::isfinite(p.position), ErrorKind::InvalidArgument, "critical point '" + p.id + "' has no position");
    Operator op = mu.at(p.position);
    require_positive(op, "structure at '" + p.id + "'");
    w.push_back(op);
  }
  return w;
}

HilbertComplex build_complex(const MorseDatum& m, const Representation& rho, const std::vector<Operator>& weights) {
  validate(m);
  require(weights.empty() || weights.size() == m.points.size(), ErrorKind::DimensionMismatch,
          "one weight per critical point expected");
  Algebra a = rho.algebra;
  Index k = rho.dim;
  int n = m.dimension;
  std::vector<std::vector<std::size_t>> cells(static_cast<std::size_t>(n) + 1);
  std::vector<std::size_t> slot(m.points.size());
  std::vector<Index> dims;
  for (int q = 0; q <= n; ++q) {
    cells[static_cast<std::size_t>(q)] = m.cells(q);
    for (std::size_t j = 0; j < cells[static_cast<std::size_t>(q)].size(); ++j)
      slot[cells[static_cast<std::size_t>(q)][j]] = j;
    dims.push_back(static_cast<Index>(cells[static_cast<std::size_t>(q)].size()) * k);
  }
  std::vector<std::map<std::pair<std::size_t, std::size_t>, Operator>> blocks(static_cast<std::size_t>(n));
  for (const auto& inc : m.incidences) {
    std::size_t from = m.find(inc.from), to = m.find(inc.to);
    int q = m.points[from].index;
    Operator term = scale(rho.evaluate(inc.word), static_cast<double>(inc.coeff));
    auto key = std::make_pair(slot[to], slot[from]);
    auto& b = blocks[static_cast<std::size_t>(q)];
    auto it = b.find(key);
    if (it == b.end())
      b.emplace(key, term);
    else
      it->second = it->second + term;
  }
  bool weighted = false;
  for (const auto& w : weights) {
    require(w.rows() == k && w.is_square(), ErrorKind::DimensionMismatch, "weight has the wrong size");
    if (!is_identity(w)) weighted = true;
  }
  std::vector<Operator> root, inv_root;
  if (weighted) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      Operator w = promote(weights[i], a);
      require_positive(w, "weight of '" + m.points[i].id + "'");
      root.push_back(sqrt_op(w, false));
      inv_root.push_back(sqrt_op(w, true));
    }
  }
  std::vector<Operator> diffs;
  for (int q = 0; q < n; ++q) {
    const auto& src = cells[static_cast<std::size_t>(q)];
    const auto& dst = cells[static_cast<std::size_t>(q) + 1];
    if (src.empty() || dst.empty()) {
      diffs.push_back(Operator::zero(a, dims[static_cast<std::size_t>(q) + 1], dims[static_cast<std::size_t>(q)]));
      continue;
    }
    BlockOperator b(a, std::vector<Index>(dst.size(), k), std::vector<Index>(src.size(), k));
    for (const auto& [key, op] : blocks[static_cast<std::size_t>(q)]) {
      Operator block = promote(op, a);
      if (weighted) block = root[dst[key.first]] * block * inv_root[src[key.second]];
      b.set(key.first, key.second, block);
    }
    diffs.push_back(b.assemble());
  }
  return HilbertComplex(a, dims, diffs);
}

HilbertComplex build_complex(const MorseDatum& m, const Representation& rho, const HermitianStructure& mu) {
  return build_complex(m, rho, point_weights(m, mu));
}

CheckResult hermitian_anomaly_check(const MorseDatum& m, const Representation& rho, const HermitianStructure& mu1,
                                    const HermitianStructure& mu2, double tol) {
  TorsionReport t1 = torsion(build_complex(m, rho, mu1));
  TorsionReport t2 = torsion(build_complex(m, rho, mu2));
  require(t1.acyclic && t2.acyclic, ErrorKind::NotAcyclic, "hermitian anomaly check needs acyclic complexes");
  double rhs = 0.0;
  for (const auto& p : m.points) rhs += (p.index % 2 == 0 ? 1.0 : -1.0) * V_function(mu1, mu2, p.position);
  CheckResult r;
  r.lhs = t1.log_torsion - t2.log_torsion;
  r.rhs = rhs;
  r.residual = std::abs(r.lhs - r.rhs);
  r.tolerance = tol;
  r.pass = r.residual < tol;
  r.detail = "log T(mu1) - log T(mu2) vs sum (-1)^ind V(mu1, mu2)";
  return r;
}

Operator circle_transport(const Representation& rho, const std::string& generator, double from, double to) {
  int w = static_cast<int>(std::floor(from)) - static_cast<int>(std::floor(to));
  return rho.evaluate(power_word(generator, w));
}

double omega(const MorseDatum& tau1, const MorseDatum& tau2, const MorseDatum& common, const Representation& rho,
             const HermitianStructure& mu) {
  auto p1 = circle_points(tau1), p2 = circle_points(tau2), p0 = circle_points(common);
  std::string g = circle_generator(common);
  require(rho.generators.count(g), ErrorKind::InvalidArgument, "representation has no generator '" + g + "'");
  double fk_a = fk(rho.generators.at(g));
  double total = 0.0;
  for (const auto& x : p0) {
    Match m1 = match_point(p1, x.t), m2 = match_point(p2, x.t);
    // ½ log det(μ(x₁)⁻¹ L* μ(x₂) L) with L = ρ(g)^{k₂ − k₁}.
    double w = (m2.winding - m1.winding) * fk_a +
               0.5 * (mu.log_det_at(p2[m2.point].t) - mu.log_det_at(p1[m1.point].t));
    total += (x.index % 2 == 0 ? 1.0 : -1.0) * w;
  }
  return total;
}

ComplexMorphism subdivision_morphism(const MorseDatum& coarse, const MorseDatum& fine, const Representation& rho,
                                     const HermitianStructure& mu) {
  auto pc = circle_points(coarse);
  std::string g = circle_generator(fine);
  HilbertComplex cc = build_complex(coarse, rho, mu), cf = build_complex(fine, rho, mu);
  Algebra a = rho.algebra;
  Index k = rho.dim;
  std::vector<Operator> f;
  for (int q = 0; q <= 1; ++q) {
    auto xs = coarse.cells(q), ys = fine.cells(q);
    BlockOperator b(a, std::vector<Index>(xs.size(), k), std::vector<Index>(ys.size(), k));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto& x = coarse.points[xs[i]];
      std::size_t sorted = 0;
      while (pc[sorted].id != x.id) ++sorted;
      for (std::size_t j = 0; j < ys.size(); ++j) {
        const auto& y = fine.points[ys[j]];
        double lift = std::numeric_limits<double>::quiet_NaN();
        if (same_position(x.position, y.position)) {
          lift = y.position;
        } else if (q == 1) {
          auto [sl, sr] = cell_of(pc, sorted);
          lift = lift_into(y.position, sl, sr);
        }
        if (!std::isfinite(lift)) continue;
        Operator t = promote(circle_transport(rho, g, lift, x.position), a);
        Operator mx = promote(mu.at(x.position), a), my = promote(mu.at(y.position), a);
        b.set(i, j, sqrt_op(mx, false) * t * sqrt_op(my, true));
      }
    }
    f.push_back(b.assemble());
  }
  return make_morphism(cf, cc, std::move(f));
}

SubdivisionReport subdivision_check(const MorseDatum& coarse, const MorseDatum& fine, const Representation& rho,
                                    const HermitianStructure& mu, double tol) {
  SubdivisionReport r;
  ComplexMorphism a = subdivision_morphism(coarse, fine, rho, mu);
  r.log_t_coarse = log_torsion(a.target);
  r.log_t_fine = log_torsion(a.source);
  TorsionReport cone = torsion(mapping_cone(a).complex);
  require(cone.acyclic, ErrorKind::NotInvertible, "subdivision map is not a cohomology isomorphism");
  r.log_t_cone = cone.log_torsion;
  r.omega_fine_coarse = omega(fine, coarse, fine, rho, mu);
  auto fill = [tol](CheckResult& c, double lhs, double rhs, const char* what) {
    c.lhs = lhs;
    c.rhs = rhs;
    c.residual = std::abs(lhs - rhs);
    c.tolerance = tol;
    c.pass = c.residual < tol;
    c.detail = what;
  };
  fill(r.cone_vs_omega, r.log_t_cone, r.omega_fine_coarse, "log T(C(A)) vs omega(fine, coarse)");
  fill(r.torsion_difference, r.log_t_fine - r.log_t_coarse, r.omega_fine_coarse,
       "log T(fine) - log T(coarse) vs omega(fine, coarse)");
  return r;
}

}  // namespace tl
