#include "adhocgrid/random_graphs.hpp"

#include <algorithm>
#include <numeric>

namespace adhocgrid {

CertifiedSample random_certified_network(std::mt19937_64& rng) {
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto uniform_int = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  const int n = uniform_int(2, 12);
  const int ns = uniform_int(1, n - 1);  // keep at least one load

  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<bool> is_source(n, false);
  for (int j = 0; j < ns; ++j) is_source[ids[j]] = true;

  // spanning tree by random attachment, then extra edges (parallel allowed)
  std::vector<std::pair<int, int>> edges;
  for (int k = 1; k < n; ++k) {
    const int other = uniform_int(0, k - 1);
    if (uniform_int(0, 1)) edges.emplace_back(k, other);
    else edges.emplace_back(other, k);
  }
  const int extra = uniform_int(0, std::min(8, 20 - (n - 1)));
  for (int j = 0; j < extra && n >= 2; ++j) {
    int a = uniform_int(0, n - 1);
    int b = uniform_int(0, n - 1);
    if (a == b) b = (b + 1) % n;
    edges.emplace_back(a, b);
  }

  std::vector<LineParams> lines;
  double r_sigma = 0.0;
  double tau_mx = 0.0;
  for (const auto& [a, b] : edges) {
    LineParams ln;
    ln.source_bus = a;
    ln.target_bus = b;
    ln.resistance = uniform(0.02, 0.3);
    const double tau = uniform(5e-6, 8e-5);
    ln.inductance = ln.resistance * tau;
    r_sigma += ln.resistance;
    tau_mx = std::max(tau_mx, tau);
    lines.push_back(ln);
  }

  const double v_ref = 48.0;
  // keep v_min above v_ref/2 so the feasibility rule dominates the voltage band
  const double v_min = v_ref * uniform(0.55, 0.95);

  std::vector<double> droops;
  double r_max = 0.0;
  for (int j = 0; j < ns; ++j) {
    droops.push_back(uniform(0.05, 1.0));
    r_max = std::max(r_max, droops.back());
  }

  const double bound = std::min({v_ref * v_ref / (4.0 * r_sigma),
                                 v_min * (v_ref - v_min) / r_sigma,
                                 v_min * v_min / (r_sigma + r_max)});
  const double p_total = uniform(0.05, 0.995) * bound;

  const int nl = n - ns;
  std::vector<double> weights(nl);
  double wsum = 0.0;
  for (int j = 0; j < nl; ++j) {
    weights[j] = uniform(0.0, 1.0) < 0.2 ? 0.0 : uniform(0.1, 1.0);
    wsum += weights[j];
  }
  if (wsum == 0.0) {
    weights[0] = 1.0;
    wsum = 1.0;
  }

  std::vector<BusParams> buses(n);
  CertifiedSample out{NetworkGraph({SourceParams{1.0, v_ref}}, {}), {}, v_ref, v_min};
  int si = 0, li = 0;
  for (int k = 0; k < n; ++k) {
    if (is_source[k]) {
      buses[k] = SourceParams{droops[si++], v_ref};
    } else {
      LoadParams lp;
      lp.power = p_total * weights[li] / wsum;
      // strict margin over the capacitance rule threshold
      const double c_min = lp.power * tau_mx / (v_min * v_min);
      lp.capacitance = lp.power > 0.0 ? c_min * uniform(1.05, 50.0) : uniform(1e-6, 1e-3);
      buses[k] = lp;
      ++li;
    }
  }

  out.graph = NetworkGraph(std::move(buses), std::move(lines));
  out.envelope.p_sigma = p_total;
  out.envelope.r_sigma = r_sigma;
  out.envelope.v_ref = v_ref;
  out.envelope.v_min = v_min;
  out.envelope.r_max = r_max;
  out.envelope.tau_max = tau_mx;
  for (int k : out.graph.load_buses()) {
    const auto& lp = out.graph.load_at(k);
    out.envelope.loads.emplace_back(lp.power, lp.capacitance);
  }
  return out;
}

}  // namespace adhocgrid
