#include "torsionlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tl {

namespace {

// Kronrod 15-point abscissae (descending, positive half) and weights; Gauss 7-point weights
// on the odd-indexed abscissae. Values from QUADPACK.
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b;
};

}  // namespace

std::vector<QuadNode> gauss_legendre(int n, double a, double b) {
  std::vector<QuadNode> out(n);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    out[i] = {mid - half * x, half * w};
    out[n - 1 - i] = {mid + half * x, half * w};
  }
  return out;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int panels, int order) {
  double h = (b - a) / panels, sum = 0.0;
  std::vector<QuadNode> ref = gauss_legendre(order, 0.0, 1.0);
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * h;
    for (const auto& q : ref) sum += h * q.w * f(lo + h * q.t);
  }
  return sum;
}

AdaptiveResult integrate_adaptive(const std::function<std::vector<double>(double)>& f, std::size_t dim,
                                  const AdaptiveOptions& opt) {
  AdaptiveResult res;
  res.value.assign(dim, 0.0);
  std::vector<Panel> stack;
  for (std::size_t p = opt.initial_panels; p-- > 0;) {
    double a = static_cast<double>(p) / opt.initial_panels, b = static_cast<double>(p + 1) / opt.initial_panels;
    stack.push_back({a, b});
  }
  std::vector<double> kron(dim), gauss(dim);
  std::vector<std::vector<double>> fx(15);
  while (!stack.empty()) {
    Panel pn = stack.back();
    stack.pop_back();
    double mid = 0.5 * (pn.a + pn.b), half = 0.5 * (pn.b - pn.a);
    double xs[15];
    for (int i = 0; i < 7; ++i) {
      xs[i] = mid - half * kXgk[i];
      xs[14 - i] = mid + half * kXgk[i];
    }
    xs[7] = mid;
    for (int i = 0; i < 15; ++i) fx[i] = f(xs[i]);
    std::fill(kron.begin(), kron.end(), 0.0);
    std::fill(gauss.begin(), gauss.end(), 0.0);
    for (int i = 0; i < 15; ++i) {
      int k = i < 8 ? i : 14 - i;
      for (std::size_t d = 0; d < dim; ++d) {
        kron[d] += kWgk[k] * fx[i][d];
        if (k % 2 == 1) gauss[d] += kWg[k / 2] * fx[i][d];
      }
    }
    double err = 0.0;
    for (std::size_t d = 0; d < dim; ++d) err = std::max(err, half * std::abs(kron[d] - gauss[d]));
    double width = pn.b - pn.a;
    bool accept = err <= opt.tol * width || width <= opt.min_width ||
                  res.panels + stack.size() >= opt.max_panels;
    if (!accept) {
      stack.push_back({mid, pn.b});
      stack.push_back({pn.a, mid});
      continue;
    }
    ++res.panels;
    res.error_estimate += err;
    res.smallest_width = std::min(res.smallest_width, width);
    for (std::size_t d = 0; d < dim; ++d) res.value[d] += half * kron[d];
    for (int i = 0; i < 15; ++i) {
      int k = i < 8 ? i : 14 - i;
      res.nodes.push_back({xs[i], half * kWgk[k]});
    }
  }
  return res;
}

}  // namespace tl
