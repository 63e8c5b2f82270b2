#include "fairdiv/discrepancy.hpp"

#include <algorithm>
#include <cmath>

namespace fairdiv {

namespace {

constexpr double kNormTol = 1e-12;

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double ramp(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace

Balancer::Balancer(const BalancerParams& params) : params_(params) {
  if (params_.n < 1 || params_.m < 1) throw error("balancer: bad dimensions");
  if (!(params_.p >= 0.5 && params_.p <= 2.0 / 3.0))
    throw error("balancer: p must lie in [1/2, 2/3]");
  if (!(params_.delta > 0.0 && params_.delta <= 0.5))
    throw error("balancer: delta must lie in (0, 1/2]");
  if (!(params_.C > 0.0 && params_.C < 0.125))
    throw error("balancer: C must lie in (0, 1/8)");
  if (params_.eps < 0.0) throw error("balancer: eps must be >= 0");
  w_.assign(params_.n, 0.0);
  comp_.assign(params_.n, 0.0);
}

Balancer Balancer::resume(const BalancerParams& params, std::vector<double> w,
                          int t) {
  Balancer b(params);
  if (static_cast<int>(w.size()) != params.n)
    throw error("balancer: resume state dimension mismatch");
  if (t < 1) throw error("balancer: resume step index must be >= 1");
  b.w_ = std::move(w);
  b.t_ = t;
  return b;
}

double Balancer::threshold() const {
  const double n = params_.n;
  const double m = params_.m;
  return (9.0 * n / (4.0 * params_.C)) * std::log(5.0 * n * m / params_.delta) +
         params_.eps * n * t_;
}

double Balancer::dot_w(std::span<const double> v) const {
  double s = 0.0;
  for (int i = 0; i < params_.n; ++i) s += w_[i] * v[i];
  return s;
}

double Balancer::step(std::span<const double> noisy_vec, Stream& rng) {
  if (pending_) throw error("balancer: step called twice without reveal");
  if (static_cast<int>(noisy_vec.size()) != params_.n)
    throw error("balancer: vector dimension mismatch");
  if (inf_norm(noisy_vec) > 1.0 + params_.eps + kNormTol)
    throw error("balancer: observed vector exceeds norm bound");

  const double ct = threshold();
  const double dot = dot_w(noisy_vec);
  pending_fail_ = fail_event(noisy_vec);
  if (pending_fail_) ++fail_count_;

  const double prob_high = ramp((1.0 - params_.p) - dot / (4.0 * ct));
  const double sign =
      rng.next_bernoulli(prob_high) ? params_.p : params_.p - 1.0;

  pending_ = true;
  pending_sign_ = sign;
  pending_noisy_.assign(noisy_vec.begin(), noisy_vec.end());
  pending_dot_ = dot;
  pending_ct_ = ct;
  return sign;
}

void Balancer::reveal(std::span<const double> true_vec) {
  if (!pending_) throw error("balancer: reveal without a pending sign");
  if (static_cast<int>(true_vec.size()) != params_.n)
    throw error("balancer: vector dimension mismatch");
  if (inf_norm(true_vec) > 1.0 + kNormTol)
    throw error("balancer: true vector exceeds norm bound");
  for (int i = 0; i < params_.n; ++i)
    if (std::abs(true_vec[i] - pending_noisy_[i]) > params_.eps + kNormTol)
      throw error("balancer: revealed vector violates the noise bound");

  for (int i = 0; i < params_.n; ++i) {
    const double y = pending_sign_ * true_vec[i] - comp_[i];
    const double t = w_[i] + y;
    comp_[i] = (t - w_[i]) - y;
    w_[i] = t;
  }

  StepRecord rec;
  rec.t = t_;
  rec.sign = pending_sign_;
  rec.dot = pending_dot_;
  rec.c_t = pending_ct_;
  rec.fail = pending_fail_;
  rec.w_inf_after = w_inf_norm();
  rec.true_vec.assign(true_vec.begin(), true_vec.end());
  log_.push_back(std::move(rec));

  ++t_;
  pending_ = false;
  pending_noisy_.clear();
}

bool Balancer::fail_event(std::span<const double> noisy_vec) const {
  const double ct = threshold();
  const double dot = dot_w(noisy_vec);
  if (dot > 4.0 * (1.0 - params_.p) * ct) return true;
  if (dot < -4.0 * params_.p * ct) return true;
  return w_inf_norm() > ct / std::sqrt(static_cast<double>(params_.n));
}

double Balancer::w_inf_norm() const { return inf_norm(w_); }

ColorTree::ColorTree(int k, int n, int m, double eps, double delta, double C)
    : k_(k), n_(n) {
  if (k < 2) throw error("color tree: needs at least two colors");
  sums_.assign(k, std::vector<double>(n, 0.0));
  counts_.assign(k, 0);
  build(0, k, n, m, eps, delta / k, C);
}

int ColorTree::build(int leaf_lo, int leaf_hi, int n, int m, double eps,
                     double node_delta, double C) {
  const int count = leaf_hi - leaf_lo;
  const int n_left = (count + 1) / 2;
  BalancerParams params;
  params.n = n;
  params.m = m;
  params.eps = eps;
  params.delta = node_delta;
  params.C = C;
  params.p = static_cast<double>(n_left) / count;

  const int idx = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{Balancer(params), 0, 0});

  const int mid = leaf_lo + n_left;
  nodes_[idx].left =
      (n_left == 1) ? -(leaf_lo + 1)
                    : build(leaf_lo, mid, n, m, eps, node_delta, C);
  nodes_[idx].right =
      (count - n_left == 1) ? -(mid + 1)
                            : build(mid, leaf_hi, n, m, eps, node_delta, C);
  return idx;
}

int ColorTree::assign_color(std::span<const double> noisy_vec, Stream& rng) {
  if (pending_color_ >= 0)
    throw error("color tree: assign called twice without reveal");
  path_.clear();
  int cur = 0;
  for (;;) {
    Node& nd = nodes_[cur];
    const double sign = nd.bal.step(noisy_vec, rng);
    path_.push_back(cur);
    const int next = (sign == nd.bal.p()) ? nd.right : nd.left;
    if (next < 0) {
      pending_color_ = -(next + 1);
      return pending_color_;
    }
    cur = next;
  }
}

void ColorTree::reveal(std::span<const double> true_vec) {
  if (pending_color_ < 0) throw error("color tree: reveal without a pending path");
  for (int idx : path_) {
    nodes_[idx].bal.reveal(true_vec);
    log_.push_back({idx, nodes_[idx].bal.log().back()});
  }
  for (int i = 0; i < n_; ++i) sums_[pending_color_][i] += true_vec[i];
  ++counts_[pending_color_];
  ++assigned_;
  last_path_ = path_;
  path_.clear();
  pending_color_ = -1;
}

double ColorTree::multicolored_discrepancy() const {
  double worst = 0.0;
  for (int a = 0; a < k_; ++a)
    for (int b = a + 1; b < k_; ++b) {
      double d = 0.0;
      for (int i = 0; i < n_; ++i)
        d = std::max(d, std::abs(sums_[a][i] - sums_[b][i]));
      worst = std::max(worst, d);
    }
  return worst;
}

long ColorTree::fail_count() const {
  long total = 0;
  for (const auto& nd : nodes_) total += nd.bal.fail_count();
  return total;
}

OnlineEnvyAllocator::OnlineEnvyAllocator(int n, int m,
                                         const OnlineEnvyParams& params)
    : n_(n), m_(m), params_(params), scale_(1.0 / std::sqrt(static_cast<double>(n))) {
  if (n < 1 || m < 0) throw error("online envy: bad dimensions");
  owner_.assign(m, -1);
  agent_sums_.assign(n, std::vector<double>(n, 0.0));
  if (n >= 2 && m >= 1)
    tree_ = std::make_unique<ColorTree>(n, n, m, params.eps * scale_,
                                        params.delta, params.C);
  scaled_buf_.assign(n, 0.0);
}

int OnlineEnvyAllocator::decide(std::span<const double> noisy_col, Stream& rng) {
  if (decided_ != revealed_) throw error("online envy: decide before reveal");
  if (decided_ >= m_) throw error("online envy: stream longer than declared");
  if (static_cast<int>(noisy_col.size()) != n_)
    throw error("online envy: column dimension mismatch");
  int agent = 0;
  if (tree_) {
    for (int i = 0; i < n_; ++i) scaled_buf_[i] = noisy_col[i] * scale_;
    agent = tree_->assign_color(scaled_buf_, rng);
  }
  owner_[decided_] = agent;
  ++decided_;
  return agent;
}

void OnlineEnvyAllocator::reveal(std::span<const double> true_col) {
  if (revealed_ >= decided_) throw error("online envy: reveal before decide");
  if (static_cast<int>(true_col.size()) != n_)
    throw error("online envy: column dimension mismatch");
  const int agent = owner_[revealed_];
  if (tree_) {
    for (int i = 0; i < n_; ++i) scaled_buf_[i] = true_col[i] * scale_;
    tree_->reveal(scaled_buf_);
  }
  for (int i = 0; i < n_; ++i) agent_sums_[agent][i] += true_col[i];
  ++revealed_;
}

Allocation OnlineEnvyAllocator::finish() const {
  if (revealed_ != m_) throw error("online envy: stream ended early");
  return Allocation::from_owners(n_, owner_);
}

double OnlineEnvyAllocator::multicolored_discrepancy() const {
  double worst = 0.0;
  for (int a = 0; a < n_; ++a)
    for (int b = a + 1; b < n_; ++b) {
      double d = 0.0;
      for (int i = 0; i < n_; ++i)
        d = std::max(d, std::abs(agent_sums_[a][i] - agent_sums_[b][i]));
      worst = std::max(worst, d);
    }
  return worst;
}

OnlineEnvyOutcome online_envy_allocate(const ValuationMatrix& truth,
                                       const ValuationMatrix& estimates,
                                       const OnlineEnvyParams& params,
                                       Stream& rng) {
  if (truth.n() != estimates.n() || truth.m() != estimates.m())
    throw error("online envy: truth/estimate shape mismatch");
  const int n = truth.n();
  const int m = truth.m();

  OnlineEnvyAllocator alloc(n, m, params);
  std::vector<double> noisy(n), exact(n);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      noisy[i] = estimates.at(i, j);
      exact[i] = truth.at(i, j);
    }
    alloc.decide(noisy, rng);
    alloc.reveal(exact);
  }

  OnlineEnvyOutcome out{alloc.finish()};
  out.max_envy_true = envy_report(truth, out.alloc).max_envy;
  out.discrepancy = alloc.multicolored_discrepancy();
  out.envy_bound = online_envy_bound(n, m, params.eps, params.delta, params.C);
  out.fail_events = alloc.fail_count();
  out.reduction_holds = out.max_envy_true <= out.discrepancy + 1e-12;
  return out;
}

double balancer_inf_bound(const BalancerParams& params, int t) {
  const double n = params.n;
  return (9.0 * std::sqrt(n) / (4.0 * params.C)) *
             std::log(5.0 * n * params.m / params.delta) +
         params.eps * t * std::sqrt(n);
}

double multicolor_bound(int n, int m, int k, double eps, double delta, double C) {
  const double rn = std::sqrt(static_cast<double>(n));
  return (27.0 * rn / (2.0 * C)) *
             std::log(5.0 * static_cast<double>(n) * m * k / delta) +
         6.0 * eps * m * rn;
}

double online_envy_bound(int n, int m, double eps, double delta, double C) {
  const double rn = std::sqrt(static_cast<double>(n));
  return (27.0 * rn / C) * std::log(5.0 * static_cast<double>(n) * m / delta) +
         6.0 * m * rn * eps;
}

}  // namespace fairdiv
