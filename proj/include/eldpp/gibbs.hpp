#ifndef ELDPP_GIBBS_HPP
#define ELDPP_GIBBS_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eldpp/ensemble.hpp"
#include "eldpp/error.hpp"
#include "eldpp/linalg.hpp"
#include "eldpp/random.hpp"
#include "eldpp/sampling.hpp"

namespace eldpp {

struct GibbsConfig {
  /// Empty: up-down moves on the varying-size law. Set: swap moves at |X| = m.
  std::optional<Index> fixed_size;
  Index burn_in = 100;
  Index thin = 1;
  Index iterations = 1000;
  /// Accepted moves between full recomputations of the bordered inverse.
  Index rebuild_every = 1000;

  static GibbsConfig up_down(Index burn_in, Index thin, Index iterations) {
    return GibbsConfig{std::nullopt, burn_in, thin, iterations};
  }
  static GibbsConfig swap(Index m, Index burn_in, Index thin, Index iterations) {
    return GibbsConfig{m, burn_in, thin, iterations};
  }
};

struct GibbsDiagnostics {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rebuilds = 0;
  std::uint64_t drift_checks = 0;
  /// Largest relative gap between an incremental determinant ratio and the
  /// same ratio recomputed from scratch.
  double max_ratio_discrepancy = 0.0;
};

/// Single-site Gibbs sampler (Barker acceptance p'/(p + p')) on the bordered
/// determinant. Keeps the inverse of the current bordered matrix and updates
/// it by bordering, deflation, or a rank-two change for swaps.
///
/// The model must outlive the sampler.
class GibbsSampler {
 public:
  GibbsSampler(const Nnp& nnp, const GibbsConfig& config, const SampleSet& start)
      : nnp_(&nnp), config_(config), n_(nnp.n()), p_(nnp.p()) {
    validate();
    reset(start);
  }

  /// Starts from one exact mixture draw.
  GibbsSampler(const Nnp& nnp, const GibbsConfig& config, Rng& rng)
      : nnp_(&nnp), config_(config), n_(nnp.n()), p_(nnp.p()) {
    validate();
    reset(config_.fixed_size ? sample_ele_fixed(nnp, *config_.fixed_size, rng)
                             : sample_ele(nnp, rng));
  }

  void reset(const SampleSet& start) {
    start.check_bound(n_);
    if (config_.fixed_size && static_cast<Index>(start.size()) != *config_.fixed_size)
      fail(ErrorKind::InvalidArgument, "start state has the wrong size for swap moves");
    item_slot_.assign(static_cast<std::size_t>(n_), -1);
    slot_item_.clear();
    for (int i : start) {
      item_slot_[i] = static_cast<int>(slot_item_.size());
      slot_item_.push_back(i);
    }
    for (Index c = 0; c < p_; ++c) slot_item_.push_back(static_cast<int>(-1 - c));
    size_ = static_cast<Index>(start.size());
    inv_.resize(n_ + p_, n_ + p_);
    rebuild();
  }

  SampleSet state() const {
    std::vector<int> items;
    items.reserve(static_cast<std::size_t>(size_));
    for (int s : slot_item_)
      if (s >= 0) items.push_back(s);
    return SampleSet(std::move(items));
  }

  /// Membership bit mask; requires n <= 64.
  std::uint64_t mask() const {
    std::uint64_t bits = 0;
    for (int s : slot_item_)
      if (s >= 0) bits |= std::uint64_t{1} << s;
    return bits;
  }

  bool contains(int i) const { return item_slot_[i] >= 0; }
  Index size() const { return size_; }
  const GibbsDiagnostics& diagnostics() const { return diag_; }

  /// p(X with i flipped) / p(X) from the maintained inverse, before any
  /// zero-mass guard.
  double flip_ratio(int i) const {
    if (contains(i)) return inv_(item_slot_[i], item_slot_[i]);
    return add_ratio(i, scratch_u_);
  }

  /// p(X - out + in) / p(X) from the maintained inverse.
  double swap_ratio(int out, int in) const {
    SwapTerms t = swap_terms(out, in);
    return t.ratio;
  }

  /// Barker acceptance probability for a ratio of target masses.
  static double acceptance(double ratio) {
    const double r = std::max(ratio, 0.0);
    return r / (1.0 + r);
  }

  /// Acceptance probability of flipping i, including the zero-mass guards.
  double flip_acceptance(int i) const {
    if (!flip_allowed(i)) return 0.0;
    return acceptance(flip_ratio(i));
  }

  double swap_acceptance(int out, int in) const {
    if (!swap_allowed(out, in)) return 0.0;
    return acceptance(swap_ratio(out, in));
  }

  /// One proposal; returns whether it was accepted.
  bool step(Rng& rng) {
    ++diag_.proposed;
    if (config_.fixed_size) {
      if (size_ == 0 || size_ == n_) return false;
      const int out = slot_item_[rng.below(static_cast<std::uint64_t>(size_))];
      int in = 0;
      do {
        in = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_)));
      } while (contains(in));
      if (!swap_allowed(out, in)) return false;
      const SwapTerms t = swap_terms(out, in);
      if (rng.uniform() >= acceptance(t.ratio)) return false;
      accept_swap(out, in, t);
      return true;
    }
    const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_)));
    if (!flip_allowed(i)) return false;
    const double ratio = flip_ratio(i);
    if (rng.uniform() >= acceptance(ratio)) return false;
    accept_flip(i, ratio);
    return true;
  }

  /// n proposals.
  void sweep(Rng& rng) {
    for (Index k = 0; k < n_; ++k) step(rng);
  }

 private:
  struct SwapTerms {
    int slot = -1;
    double a = 0, b = 0, c = 0, ratio = 0;
    Vector w, x;
  };

  void validate() const {
    if (config_.burn_in < 1 || config_.thin < 1 || config_.iterations < 1)
      fail(ErrorKind::InvalidArgument, "burn_in, thin and iterations must be at least 1");
    if (config_.rebuild_every < 1) fail(ErrorKind::InvalidArgument, "rebuild_every must be >= 1");
    if (config_.fixed_size) {
      const Index m = *config_.fixed_size;
      if (m < p_ || m > p_ + nnp_->q())
        fail(ErrorKind::SizeOutOfRange, "swap moves need p <= m <= p + q");
    }
  }

  Index dim() const { return size_ + p_; }

  /// Bordered-matrix entry between ground item i and whatever sits in slot k.
  double coupling(int i, Index k) const {
    const int s = slot_item_[k];
    return s >= 0 ? nnp_->L()(i, s) : nnp_->V()(i, -1 - s);
  }

  double add_ratio(int i, Vector& u) const {
    const Index d = dim();
    if (d == 0) {
      u.resize(0);
      return nnp_->L()(i, i);
    }
    Vector b(d);
    for (Index k = 0; k < d; ++k) b(k) = coupling(i, k);
    u.noalias() = inv_.topLeftCorner(d, d) * b;
    return nnp_->L()(i, i) - b.dot(u);
  }

  SwapTerms swap_terms(int out, int in) const {
    const Index d = dim();
    SwapTerms t;
    t.slot = item_slot_[out];
    t.w.resize(d);
    for (Index k = 0; k < d; ++k) t.w(k) = coupling(in, k) - coupling(out, k);
    t.w(t.slot) = 0.5 * (nnp_->L()(in, in) - nnp_->L()(out, out));
    t.x.noalias() = inv_.topLeftCorner(d, d) * t.w;
    t.a = inv_(t.slot, t.slot);
    t.b = t.x(t.slot);
    t.c = t.w.dot(t.x);
    t.ratio = (1.0 + t.b) * (1.0 + t.b) - t.a * t.c;
    return t;
  }

  bool features_full_rank_without(int out, int in) const {
    if (p_ == 0) return true;
    Matrix rows(size_ - (in < 0 ? 1 : 0), p_);
    Index r = 0;
    for (int s : slot_item_)
      if (s >= 0 && s != out) rows.row(r++) = nnp_->V().row(s);
    if (in >= 0) rows.row(r++) = nnp_->V().row(in);
    return linalg::numerical_rank(rows) == p_;
  }

  bool flip_allowed(int i) const {
    if (contains(i)) {
      if (size_ <= p_) return false;
      return features_full_rank_without(i, -1);
    }
    return size_ < p_ + nnp_->q();
  }

  bool swap_allowed(int out, int in) const { return features_full_rank_without(out, in); }

  void accept_flip(int i, double ratio) {
    ++diag_.accepted;
    const bool check = diag_.accepted % static_cast<std::uint64_t>(config_.rebuild_every) == 0;
    std::vector<int> before;
    if (check) before = state().indices();
    if (contains(i))
      remove_item(i);
    else
      append_item(i);
    if (check) finish_check(before, ratio);
  }

  void accept_swap(int out, int in, const SwapTerms& t) {
    ++diag_.accepted;
    const bool check = diag_.accepted % static_cast<std::uint64_t>(config_.rebuild_every) == 0;
    std::vector<int> before;
    if (check) before = state().indices();
    const Index d = dim();
    const Vector col_s = inv_.col(t.slot).head(d);
    // (C^{-1} + U^T M^{-1} U)^{-1} with C = [[0, 1], [1, 0]]
    const double s11 = t.a, s12 = 1.0 + t.b, s22 = t.c;
    const double det_s = s11 * s22 - s12 * s12;
    const double i11 = s22 / det_s, i12 = -s12 / det_s, i22 = s11 / det_s;
    auto block = inv_.topLeftCorner(d, d);
    block.noalias() -= i11 * col_s * col_s.transpose();
    block.noalias() -= i12 * col_s * t.x.transpose();
    block.noalias() -= i12 * t.x * col_s.transpose();
    block.noalias() -= i22 * t.x * t.x.transpose();
    slot_item_[t.slot] = in;
    item_slot_[in] = t.slot;
    item_slot_[out] = -1;
    // the rank-two update loses several digits when the accepted ratio is
    // small; one Newton step against the true matrix restores them
    const Matrix M = bordered_now();
    Matrix X = inv_.topLeftCorner(d, d);
    X.noalias() += X * (Matrix::Identity(d, d) - M * X);
    inv_.topLeftCorner(d, d) = X;
    if (check) finish_check(before, t.ratio);
  }

  void append_item(int i) {
    const Index d = dim();
    const double s = add_ratio(i, scratch_u_);
    auto block = inv_.topLeftCorner(d, d);
    block.noalias() += scratch_u_ * scratch_u_.transpose() / s;
    inv_.col(d).head(d) = -scratch_u_ / s;
    inv_.row(d).head(d) = -scratch_u_.transpose() / s;
    inv_(d, d) = 1.0 / s;
    item_slot_[i] = static_cast<int>(d);
    slot_item_.push_back(i);
    ++size_;
  }

  void remove_item(int i) {
    const Index d = dim();
    const Index s = item_slot_[i];
    const Index last = d - 1;
    if (s != last) {
      inv_.row(s).head(d).swap(inv_.row(last).head(d));
      inv_.col(s).head(d).swap(inv_.col(last).head(d));
      const int moved = slot_item_[last];
      slot_item_[s] = moved;
      if (moved >= 0) item_slot_[moved] = static_cast<int>(s);
    }
    const double g = inv_(last, last);
    const Vector f = inv_.col(last).head(last);
    inv_.topLeftCorner(last, last).noalias() -= f * f.transpose() / g;
    slot_item_.pop_back();
    item_slot_[i] = -1;
    --size_;
  }

  Matrix bordered_now() const {
    const Index d = dim();
    Matrix m(d, d);
    for (Index k = 0; k < d; ++k)
      for (Index l = 0; l < d; ++l) {
        const int a = slot_item_[k], b = slot_item_[l];
        if (a >= 0 && b >= 0)
          m(k, l) = nnp_->L()(a, b);
        else if (a >= 0)
          m(k, l) = nnp_->V()(a, -1 - b);
        else if (b >= 0)
          m(k, l) = nnp_->V()(b, -1 - a);
        else
          m(k, l) = 0.0;
      }
    return m;
  }

  void rebuild() {
    const Index d = dim();
    ++diag_.rebuilds;
    if (d == 0) return;
    Eigen::FullPivLU<Matrix> lu(bordered_now());
    if (!lu.isInvertible())
      fail(ErrorKind::SingularState, "bordered matrix of the current state is singular");
    inv_.topLeftCorner(d, d) = lu.inverse();
  }

  void finish_check(const std::vector<int>& before, double incremental_ratio) {
    ++diag_.drift_checks;
    const SampleSet prev(before);
    const SampleSet next = state();
    const double d_prev = linalg::saddle_point_det(linalg::principal(nnp_->L(), prev.indices()),
                                                   linalg::rows_of(nnp_->V(), prev.indices()));
    const double d_next = linalg::saddle_point_det(linalg::principal(nnp_->L(), next.indices()),
                                                   linalg::rows_of(nnp_->V(), next.indices()));
    const double fresh = d_next / d_prev;
    const double rel = std::abs(incremental_ratio - fresh) / std::max(std::abs(fresh), 1e-300);
    diag_.max_ratio_discrepancy = std::max(diag_.max_ratio_discrepancy, rel);
    rebuild();
  }

  const Nnp* nnp_;
  GibbsConfig config_;
  Index n_, p_;
  Index size_ = 0;
  std::vector<int> slot_item_;  // item index, or -1 - c for feature column c
  std::vector<int> item_slot_;
  Matrix inv_;
  mutable Vector scratch_u_;
  GibbsDiagnostics diag_;
};

/// Runs burn-in, then calls visit(sampler) once per recorded state.
template <class Visitor>
GibbsDiagnostics gibbs_run(const Nnp& nnp, const GibbsConfig& config, Rng& rng, Visitor&& visit) {
  GibbsSampler chain(nnp, config, rng);
  for (Index k = 0; k < config.burn_in; ++k) chain.sweep(rng);
  for (Index it = 0; it < config.iterations; ++it) {
    for (Index k = 0; k < config.thin; ++k) chain.sweep(rng);
    visit(chain);
  }
  return chain.diagnostics();
}

inline std::vector<SampleSet> gibbs_chain(const Nnp& nnp, const GibbsConfig& config, Rng& rng,
                                          GibbsDiagnostics* diagnostics = nullptr) {
  std::vector<SampleSet> out;
  out.reserve(static_cast<std::size_t>(config.iterations));
  auto diag = gibbs_run(nnp, config, rng, [&](const GibbsSampler& s) { out.push_back(s.state()); });
  if (diagnostics) *diagnostics = diag;
  return out;
}

}  // namespace eldpp

#endif  // ELDPP_GIBBS_HPP
