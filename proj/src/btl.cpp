#include "fairdiv/btl.hpp"

#include "fairdiv/allocators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

namespace fairdiv {

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

bool ObservationGraph::connected() const {
  if (m <= 1) return true;
  DisjointSet ds(m);
  for (auto [j, k] : edges) ds.unite(j, k);
  const int root = ds.find(0);
  for (int v = 1; v < m; ++v)
    if (ds.find(v) != root) return false;
  return true;
}

std::vector<std::vector<int>> ObservationGraph::components() const {
  DisjointSet ds(m);
  for (auto [j, k] : edges) ds.unite(j, k);
  std::vector<std::vector<int>> comps;
  std::vector<int> comp_of(m, -1);
  for (int v = 0; v < m; ++v) {
    const int r = ds.find(v);
    if (comp_of[r] < 0) {
      comp_of[r] = static_cast<int>(comps.size());
      comps.emplace_back();
    }
    comps[comp_of[r]].push_back(v);
  }
  return comps;
}

ObservationGraph sample_er_graph(int m, double p, Stream& rng) {
  if (p < 0.0 || p > 1.0) throw error("sample_er_graph: p must lie in [0,1]");
  ObservationGraph g;
  g.m = m;
  g.p = p;
  for (int j = 0; j < m; ++j)
    for (int k = j + 1; k < m; ++k)
      if (rng.next_double() < p) g.edges.emplace_back(j, k);
  return g;
}

ComparisonData simulate_comparisons(const std::vector<double>& theta,
                                    const ObservationGraph& graph, int K,
                                    Stream& rng) {
  if (K < 1) throw error("simulate_comparisons: K must be >= 1");
  if (static_cast<int>(theta.size()) != graph.m)
    throw error("simulate_comparisons: theta length mismatch");
  ComparisonData data;
  data.graph = graph;
  data.K = K;
  data.y.reserve(graph.edges.size());
  for (auto [j, k] : graph.edges) {
    const double q = sigmoid(theta[j] - theta[k]);
    int wins = 0;
    for (int l = 0; l < K; ++l)
      if (rng.next_bernoulli(q)) ++wins;
    data.y.push_back(static_cast<double>(wins) / K);
  }
  return data;
}

ComparisonData exact_frequencies(const std::vector<double>& theta,
                                 const ObservationGraph& graph) {
  if (static_cast<int>(theta.size()) != graph.m)
    throw error("exact_frequencies: theta length mismatch");
  ComparisonData data;
  data.graph = graph;
  data.K = 1;
  data.y.reserve(graph.edges.size());
  for (auto [j, k] : graph.edges) data.y.push_back(sigmoid(theta[j] - theta[k]));
  return data;
}

void ComparisonData::write_csv(std::ostream& os, int agent) const {
  os << "agent,item_j,item_k,wins_j,K\n";
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    os << agent << ',' << (graph.edges[e].first + 1) << ','
       << (graph.edges[e].second + 1) << ',' << y[e] * K << ',' << K << "\n";
  }
}

ComparisonData ComparisonData::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("agent,", 0) != 0)
    throw error("comparison csv: missing header");
  ComparisonData data;
  int max_item = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw error("comparison csv: expected 5 columns");
    const int j = std::atoi(cells[1].c_str()) - 1;
    const int k = std::atoi(cells[2].c_str()) - 1;
    const double wins = std::strtod(cells[3].c_str(), nullptr);
    const int reps = std::atoi(cells[4].c_str());
    if (j < 0 || k <= j || reps < 1) throw error("comparison csv: bad row");
    data.graph.edges.emplace_back(j, k);
    data.K = reps;
    data.y.push_back(wins / reps);
    max_item = std::max(max_item, k + 1);
  }
  data.graph.m = max_item;
  return data;
}

double PreferenceVector::linf_distance(const PreferenceVector& other) const {
  if (theta.size() != other.theta.size())
    throw error("PreferenceVector: length mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i)
    d = std::max(d, std::abs(theta[i] - other.theta[i]));
  return d;
}

void PreferenceVector::check_centered(double tol) const {
  double s = 0.0;
  for (double v : theta) s += v;
  if (std::abs(s) > tol) throw error("PreferenceVector: not centered");
}

namespace {

double nll(const ComparisonData& data, const std::vector<double>& theta,
           double inv_scale) {
  double f = 0.0;
  for (std::size_t e = 0; e < data.graph.edges.size(); ++e) {
    const auto [j, k] = data.graph.edges[e];
    const double d = theta[j] - theta[k];
    f += data.y[e] * softplus(-d) + (1.0 - data.y[e]) * softplus(d);
  }
  return f * inv_scale;
}

void nll_grad(const ComparisonData& data, const std::vector<double>& theta,
              double inv_scale, std::vector<double>& grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t e = 0; e < data.graph.edges.size(); ++e) {
    const auto [j, k] = data.graph.edges[e];
    const double g = (sigmoid(theta[j] - theta[k]) - data.y[e]) * inv_scale;
    grad[j] += g;
    grad[k] -= g;
  }
}

// Project onto {sum = 0} intersected with the clamp box. Alternating
// projection; the combination converges in a handful of passes because
// the recentering shift shrinks geometrically.
void project(std::vector<double>& theta, double clamp) {
  const double inv_m = 1.0 / static_cast<double>(theta.size());
  for (int pass = 0; pass < 64; ++pass) {
    double mean = 0.0;
    for (double v : theta) mean += v;
    mean *= inv_m;
    bool clamped = false;
    for (double& v : theta) {
      v -= mean;
      if (v > clamp) { v = clamp; clamped = true; }
      else if (v < -clamp) { v = -clamp; clamped = true; }
    }
    if (!clamped) return;
  }
}

}  // namespace

double btl_nll(const ComparisonData& data, const std::vector<double>& theta,
               double mp_scale) {
  return nll(data, theta, 1.0 / mp_scale);
}

double btl_grad_inf(const ComparisonData& data, const std::vector<double>& theta,
                    double mp_scale) {
  std::vector<double> grad(theta.size());
  nll_grad(data, theta, 1.0 / mp_scale, grad);
  double g = 0.0;
  for (double v : grad) g = std::max(g, std::abs(v));
  return g;
}

PreferenceVector mle_estimate(const ComparisonData& data, double mp_scale,
                              const MleOptions& opts) {
  const int m = data.graph.m;
  if (m < 1) throw error("mle_estimate: empty item set");
  if (!(mp_scale > 0.0)) throw error("mle_estimate: mp_scale must be > 0");
  if (!data.graph.connected()) {
    std::ostringstream msg;
    msg << "mle_estimate: observation graph is disconnected; components:";
    for (const auto& comp : data.graph.components()) {
      msg << " {";
      for (std::size_t i = 0; i < comp.size(); ++i)
        msg << (i ? "," : "") << comp[i];
      msg << "}";
    }
    throw error(msg.str());
  }

  const double inv_scale = 1.0 / mp_scale;
  std::vector<double> theta(m, 0.0), grad(m), trial(m);
  double f = nll(data, theta, inv_scale);
  double step = 1.0;
  if (opts.objective_trace) opts.objective_trace->push_back(f);

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    nll_grad(data, theta, inv_scale, grad);
    double gmax = 0.0;
    for (double g : grad) gmax = std::max(gmax, std::abs(g));
    if (gmax <= opts.grad_tol) break;

    // Armijo backtracking from an adaptively grown initial step.
    step *= 2.0;
    bool moved = false;
    while (step > 1e-18) {
      for (int i = 0; i < m; ++i) trial[i] = theta[i] - step * grad[i];
      project(trial, opts.clamp);
      double dir_deriv = 0.0;
      double displacement = 0.0;
      for (int i = 0; i < m; ++i) {
        dir_deriv += grad[i] * (trial[i] - theta[i]);
        displacement = std::max(displacement, std::abs(trial[i] - theta[i]));
      }
      if (displacement == 0.0) {  // pinned against the clamp box
        step *= 0.5;
        continue;
      }
      const double f_trial = nll(data, trial, inv_scale);
      if (f_trial <= f + 1e-4 * dir_deriv) {
        theta.swap(trial);
        f = f_trial;
        moved = true;
        if (opts.objective_trace) opts.objective_trace->push_back(f);
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;  // at the numerical floor (e.g. hard-clamped data)
  }

  PreferenceVector out{std::move(theta)};
  return out;
}

std::vector<PreferenceVector> center_values(const ValuationMatrix& values) {
  std::vector<PreferenceVector> out;
  out.reserve(values.n());
  for (int i = 0; i < values.n(); ++i) {
    double mean = 0.0;
    for (int j = 0; j < values.m(); ++j) mean += values.at(i, j);
    mean /= std::max(1, values.m());
    PreferenceVector pv;
    pv.theta.resize(values.m());
    for (int j = 0; j < values.m(); ++j) pv.theta[j] = values.at(i, j) - mean;
    out.push_back(std::move(pv));
  }
  return out;
}

std::pair<Allocation, BtlDiagnostics> btl_fair_divide(
    const ValuationMatrix& truth, double p, int K, Stream& rng,
    const MleOptions& opts) {
  const int n = truth.n();
  const int m = truth.m();
  if (m < 2) throw error("btl_fair_divide: needs at least two items");
  if (n >= m) throw error("btl_fair_divide: needs n < m");
  if (truth.range() && (truth.range()->first < 0.0 || truth.range()->second > 1.0))
    throw error("btl_fair_divide: truth must lie in [0,1]");

  const auto centered = center_values(truth);
  BtlDiagnostics diag;
  diag.linf_error.resize(n);

  std::vector<double> estimates(static_cast<std::size_t>(n) * m);
  for (int i = 0; i < n; ++i) {
    Stream agent_rng = rng.fork(static_cast<std::uint64_t>(i) + 1);
    ObservationGraph graph = sample_er_graph(m, p, agent_rng);
    int tries = 0;
    while (!graph.connected() && tries < 3) {
      graph = sample_er_graph(m, p, agent_rng);
      ++tries;
      ++diag.graph_retries;
    }
    if (!graph.connected())
      throw error("btl_fair_divide: observation graph stayed disconnected");

    const ComparisonData data =
        simulate_comparisons(centered[i].theta, graph, K, agent_rng);
    const PreferenceVector est =
        mle_estimate(data, static_cast<double>(m) * p, opts);
    diag.linf_error[i] = est.linf_distance(centered[i]);
    for (int j = 0; j < m; ++j) estimates[i * m + j] = est.theta[j];
  }
  diag.max_linf_error =
      *std::max_element(diag.linf_error.begin(), diag.linf_error.end());

  ValuationMatrix est_matrix(n, m, std::move(estimates));
  Allocation alloc = round_robin(est_matrix);
  diag.max_true_envy = envy_report(truth, alloc).max_envy;
  return {std::move(alloc), std::move(diag)};
}

}  // namespace fairdiv
