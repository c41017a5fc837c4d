#pragma once

// Globally adaptive 7/15-point Gauss-Kronrod quadrature over a set of
// initial panels. The integrand is evaluated one panel (15 nodes) at a time
// so that vectorized evaluators can process the nodes together.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace besselp::quad {

struct Panel {
  double a = 0.0;
  double b = 0.0;
  int tag = 0;  // forwarded to the integrand; lets one run cover several integrands
  int depth = 0;
};

struct Options {
  double rel_tol = 1e-10;
  int max_depth = 60;
  std::size_t max_panels = 4000;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  std::size_t panels = 0;
  std::size_t evaluations = 0;
  int deepest = 0;
  bool converged = false;
};

namespace detail {

// Abscissae and weights of the 15-point Kronrod extension of 7-point Gauss.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelEstimate {
  double value;
  double error;
};

// Node order: 0..6 left of center (kXgk[0..6]), 7 center, 8..14 mirrored.
inline void panel_nodes(double a, double b, std::array<double, 15>& nodes) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (std::size_t j = 0; j < 7; ++j) {
    nodes[j] = center - half * kXgk[j];
    nodes[14 - j] = center + half * kXgk[j];
  }
  nodes[7] = center;
}

inline PanelEstimate combine(double a, double b, const std::array<double, 15>& f) {
  const double half = 0.5 * (b - a);
  const double fc = f[7];
  double kronrod = kWgk[7] * fc;
  double gauss = kWg[3] * fc;
  double abs_sum = std::abs(kronrod);
  for (std::size_t j = 0; j < 7; ++j) {
    const double pair = f[j] + f[14 - j];
    kronrod += kWgk[j] * pair;
    abs_sum += kWgk[j] * (std::abs(f[j]) + std::abs(f[14 - j]));
    if (j % 2 == 1) gauss += kWg[j / 2] * pair;
  }
  const double mean = 0.5 * kronrod;
  double asc = kWgk[7] * std::abs(fc - mean);
  for (std::size_t j = 0; j < 7; ++j) {
    asc += kWgk[j] * (std::abs(f[j] - mean) + std::abs(f[14 - j] - mean));
  }
  const double value = kronrod * half;
  const double resabs = abs_sum * std::abs(half);
  const double resasc = asc * std::abs(half);
  double err = std::abs((kronrod - gauss) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return {value, err};
}

}  // namespace detail

// `f(tag, nodes, out)` must fill out[i] with the integrand at nodes[i].
template <class Integrand>
Result integrate(Integrand&& f, std::span<const Panel> initial, const Options& opt) {
  struct Node {
    Panel panel;
    double value;
    double error;
    bool operator<(const Node& o) const { return error < o.error; }
  };

  std::array<double, 15> nodes{};
  std::array<double, 15> values{};
  Result res;
  auto evaluate = [&](const Panel& p) {
    detail::panel_nodes(p.a, p.b, nodes);
    f(p.tag, std::span<const double>(nodes), std::span<double>(values));
    res.evaluations += 15;
    const auto est = detail::combine(p.a, p.b, values);
    return Node{p, est.value, est.error};
  };

  std::priority_queue<Node> heap;
  double total = 0.0;
  double total_err = 0.0;
  for (const Panel& p : initial) {
    if (!(p.b > p.a)) continue;
    Node n = evaluate(p);
    total += n.value;
    total_err += n.error;
    heap.push(n);
  }

  auto recompute = [&] {
    // Rebuild totals from the heap to shed accumulated drift.
    std::vector<Node> items;
    items.reserve(heap.size());
    total = 0.0;
    total_err = 0.0;
    while (!heap.empty()) {
      items.push_back(heap.top());
      heap.pop();
    }
    std::sort(items.begin(), items.end(), [](const Node& l, const Node& r) { return l.value < r.value; });
    for (const Node& n : items) {
      total += n.value;
      total_err += n.error;
    }
    for (Node& n : items) heap.push(n);
  };

  res.converged = true;
  std::size_t since_recompute = 0;
  while (!heap.empty() && total_err > opt.rel_tol * std::abs(total)) {
    if (++since_recompute == 64) {
      recompute();
      since_recompute = 0;
      if (total_err <= opt.rel_tol * std::abs(total)) break;
    }
    const Node worst = heap.top();
    if (worst.panel.depth >= opt.max_depth || heap.size() + 1 > opt.max_panels) {
      res.converged = false;
      break;
    }
    heap.pop();
    const double mid = 0.5 * (worst.panel.a + worst.panel.b);
    const Node left = evaluate({worst.panel.a, mid, worst.panel.tag, worst.panel.depth + 1});
    const Node right = evaluate({mid, worst.panel.b, worst.panel.tag, worst.panel.depth + 1});
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    res.deepest = std::max(res.deepest, worst.panel.depth + 1);
    heap.push(left);
    heap.push(right);
  }

  recompute();
  if (res.converged && total_err > opt.rel_tol * std::abs(total)) res.converged = false;
  res.value = total;
  res.error = total_err;
  res.panels = heap.size();
  return res;
}

}  // namespace besselp::quad
