#pragma once

#include <utility>
#include <vector>

#include "fairdiv/core.hpp"
#include "fairdiv/rng.hpp"

namespace fairdiv {

// 1 / (1 + exp(-t)), stable across the double range; psi(t) + psi(-t) = 1.
double sigmoid(double t);

// Unordered item pairs an agent is asked to compare.
struct ObservationGraph {
  int m = 0;
  std::vector<std::pair<int, int>> edges;  // j < k, unique
  double p = 0.0;                          // sampling probability

  bool connected() const;
  // Vertex sets of the connected components, for error messages.
  std::vector<std::vector<int>> components() const;
};

// Every pair included independently with probability p; consumes exactly
// C(m,2) uniforms so traces replay regardless of the outcome.
ObservationGraph sample_er_graph(int m, double p, Stream& rng);

// Per-edge empirical win frequencies over K repeated comparisons.
struct ComparisonData {
  ObservationGraph graph;
  int K = 1;
  std::vector<double> y;  // aligned with graph.edges; y[e] = wins of j over k / K

  void write_csv(std::ostream& os, int agent = 1) const;
  static ComparisonData read_csv(std::istream& is);
};

// K independent Bernoulli(psi(theta_j - theta_k)) draws per edge.
ComparisonData simulate_comparisons(const std::vector<double>& theta,
                                    const ObservationGraph& graph, int K,
                                    Stream& rng);

// Infinite-sample limit: y[e] = psi(theta_j - theta_k) exactly. Test oracle.
ComparisonData exact_frequencies(const std::vector<double>& theta,
                                 const ObservationGraph& graph);

// Zero-sum preference vector.
struct PreferenceVector {
  std::vector<double> theta;

  double linf_distance(const PreferenceVector& other) const;
  void check_centered(double tol = 1e-9) const;
};

struct MleOptions {
  double grad_tol = 1e-10;
  int max_iters = 100000;
  double clamp = 30.0;  // box guard for separable data
  std::vector<double>* objective_trace = nullptr;  // accepted-iterate values
};

// Negative log-likelihood and its gradient infinity norm at theta.
double btl_nll(const ComparisonData& data, const std::vector<double>& theta,
               double mp_scale);
double btl_grad_inf(const ComparisonData& data, const std::vector<double>& theta,
                    double mp_scale);

// Minimizes the negative log-likelihood
//   -(1/mp_scale) * sum_{(j,k) in E} [ y log psi(d) + (1-y) log(1 - psi(d)) ],
// d = theta_j - theta_k, over the zero-sum hyperplane by projected
// gradient descent with Armijo backtracking. Deterministic from the data
// (zero initialization). Errors on a disconnected observation graph.
PreferenceVector mle_estimate(const ComparisonData& data, double mp_scale,
                              const MleOptions& opts = {});

// theta[i][j] = v[i][j] - mean_l v[i][l]; each row sums to zero.
std::vector<PreferenceVector> center_values(const ValuationMatrix& values);

struct BtlDiagnostics {
  std::vector<double> linf_error;  // per agent, vs the centered truth
  double max_linf_error = 0.0;
  double max_true_envy = 0.0;
  int graph_retries = 0;
};

// Per agent: center -> sample graph -> simulate -> estimate; the stacked
// estimates feed the picking allocator. Truth must lie in [0,1]; needs
// n < m and m >= 2. Disconnected graphs are redrawn up to 3 times.
std::pair<Allocation, BtlDiagnostics> btl_fair_divide(
    const ValuationMatrix& truth, double p, int K, Stream& rng,
    const MleOptions& opts = {});

}  // namespace fairdiv
