#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fairdiv/core.hpp"
#include "fairdiv/rng.hpp"

namespace fairdiv {

struct BalancerParams {
  int n = 1;          // vector dimension
  int m = 1;          // horizon: total vectors the walk may see
  double eps = 0.0;   // per-entry noise bound on observed vectors
  double delta = 0.1; // failure budget
  double C = 0.1;     // subgaussian constant, must stay below 1/8
  double p = 0.5;     // sign parameter in [1/2, 2/3]
};

struct StepRecord {
  int t = 0;
  double sign = 0.0;
  double dot = 0.0;      // <w_t, observed vector>
  double c_t = 0.0;
  bool fail = false;     // fail event at decide time
  double w_inf_after = 0.0;
  std::vector<double> true_vec;
};

// Online signed walk: each observed vector gets a sign in {p, p-1} chosen
// to pull the running sum of the *true* vectors back toward the origin.
// The decide -> reveal order is enforced as a two-phase state machine.
class Balancer {
 public:
  explicit Balancer(const BalancerParams& params);

  // Resume a walk from a recorded state (w, t), e.g. replayed from a
  // step log. No pending sign.
  static Balancer resume(const BalancerParams& params, std::vector<double> w,
                         int t);

  // c_t = (9n / 4C) log(5nm / delta) + eps * n * t at the current step.
  double threshold() const;

  // Samples the sign for an observed vector: p with probability
  // r((1-p) - <w_t, v> / (4 c_t)), p-1 otherwise, where r clamps to [0,1].
  // The sign is held pending until the true vector is revealed.
  double step(std::span<const double> noisy_vec, Stream& rng);

  // w <- w + s_t * true_vec (compensated summation), then t advances.
  void reveal(std::span<const double> true_vec);

  // Inner-product overflow or infinity-norm overflow at the current state.
  bool fail_event(std::span<const double> noisy_vec) const;

  int t() const { return t_; }
  int n() const { return params_.n; }
  double p() const { return params_.p; }
  bool pending() const { return pending_; }
  const std::vector<double>& w() const { return w_; }
  double w_inf_norm() const;
  const BalancerParams& params() const { return params_; }
  const std::vector<StepRecord>& log() const { return log_; }
  long fail_count() const { return fail_count_; }

 private:
  double dot_w(std::span<const double> v) const;

  BalancerParams params_;
  std::vector<double> w_;
  std::vector<double> comp_;  // Kahan compensation per coordinate
  int t_ = 1;
  bool pending_ = false;
  double pending_sign_ = 0.0;
  std::vector<double> pending_noisy_;
  double pending_dot_ = 0.0;
  double pending_ct_ = 0.0;
  bool pending_fail_ = false;
  long fail_count_ = 0;
  std::vector<StepRecord> log_;
};

// Complete full binary tree with k leaves (colors); every internal node
// runs its own Balancer with p = (leaves left) / (leaves under the node)
// and failure budget delta / k. A vector walks root -> leaf, turning
// right on sign p and left on sign p-1; the leaf index is its color.
class ColorTree {
 public:
  ColorTree(int k, int n, int m, double eps, double delta, double C);

  int assign_color(std::span<const double> noisy_vec, Stream& rng);
  void reveal(std::span<const double> true_vec);

  int k() const { return k_; }
  int n() const { return n_; }
  int num_internal() const { return static_cast<int>(nodes_.size()); }
  const Balancer& node(int idx) const { return nodes_[idx].bal; }
  double node_p(int idx) const { return nodes_[idx].bal.p(); }
  int last_path_length() const { return static_cast<int>(last_path_.size()); }

  // Per-color sums of the revealed true vectors (k x n).
  const std::vector<std::vector<double>>& color_sums() const { return sums_; }
  const std::vector<int>& color_counts() const { return counts_; }
  // max over color pairs of || S_i - S_j ||_inf.
  double multicolored_discrepancy() const;
  long fail_count() const;
  int assigned() const { return assigned_; }

  // Step log rows across nodes: (node_id, record), in reveal order.
  struct TaggedRecord {
    int node_id;
    StepRecord rec;
  };
  const std::vector<TaggedRecord>& log() const { return log_; }

 private:
  struct Node {
    Balancer bal;
    int left;   // >= 0: internal node index; < 0: leaf label -(v+1)
    int right;
  };

  int build(int leaf_lo, int leaf_hi, int n, int m, double eps,
            double node_delta, double C);

  int k_;
  int n_;
  std::vector<Node> nodes_;
  std::vector<int> path_;       // pending internal nodes, root first
  std::vector<int> last_path_;
  int pending_color_ = -1;
  int assigned_ = 0;
  std::vector<std::vector<double>> sums_;
  std::vector<int> counts_;
  std::vector<TaggedRecord> log_;
};

struct OnlineEnvyParams {
  double eps = 0.0;
  double delta = 0.1;
  double C = 0.1;
};

// Streams item value columns through a ColorTree with one color per
// agent. Incoming vectors are scaled by 1/sqrt(n) for the walk; envy and
// the reported discrepancy are computed on the unscaled values.
class OnlineEnvyAllocator {
 public:
  OnlineEnvyAllocator(int n, int m, const OnlineEnvyParams& params);

  int decide(std::span<const double> noisy_col, Stream& rng);
  void reveal(std::span<const double> true_col);
  Allocation finish() const;

  double multicolored_discrepancy() const;
  long fail_count() const { return tree_ ? tree_->fail_count() : 0; }
  const ColorTree* tree() const { return tree_.get(); }

 private:
  int n_;
  int m_;
  OnlineEnvyParams params_;
  double scale_;
  std::unique_ptr<ColorTree> tree_;  // null when n == 1
  std::vector<int> owner_;
  int decided_ = 0;
  int revealed_ = 0;
  std::vector<double> scaled_buf_;
  std::vector<std::vector<double>> agent_sums_;  // unscaled true sums
};

struct OnlineEnvyOutcome {
  Allocation alloc;
  double max_envy_true = 0.0;
  double discrepancy = 0.0;    // on unscaled item value vectors
  double envy_bound = 0.0;     // (27 sqrt(n)/C) log(5nm/delta) + 6 m sqrt(n) eps
  long fail_events = 0;
  bool reduction_holds = true;  // max_envy_true <= discrepancy
};

// Convenience driver over precomputed truth/estimate matrices: item j's
// column of `estimates` is observed, the item is placed, then item j's
// true column is revealed.
OnlineEnvyOutcome online_envy_allocate(const ValuationMatrix& truth,
                                       const ValuationMatrix& estimates,
                                       const OnlineEnvyParams& params,
                                       Stream& rng);

// Infinity-norm walk bound at step t: (9 sqrt(n) / 4C) log(5nm/delta) + eps t sqrt(n).
double balancer_inf_bound(const BalancerParams& params, int t);

// Pairwise color bound: (27 sqrt(n) / 2C) log(5nmk/delta) + 6 eps m sqrt(n).
double multicolor_bound(int n, int m, int k, double eps, double delta, double C);

// Envy bound of the online allocator.
double online_envy_bound(int n, int m, double eps, double delta, double C);

}  // namespace fairdiv
