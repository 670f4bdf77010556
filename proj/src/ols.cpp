#include "spagg/ols.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace spagg {

namespace {

// A factor diagonal at or below this means the selection left the
// positive-definite regime; refactorize, then fall back to full solves.
constexpr double kDiagTol = 1e-10;

}  // namespace

RestrictedFit restricted_ols(const Dataset& data, const SparsityPattern& p) {
  if (p.size() != data.m()) throw std::invalid_argument("pattern size does not match design");
  RestrictedFit fit;
  fit.pattern = p;
  fit.beta = Eigen::VectorXd::Zero(data.m());
  if (p.empty()) {
    fit.error = data.yty();
    fit.rank = 0;
    return fit;
  }
  const std::vector<int> sel = p.support();
  const int k = static_cast<int>(sel.size());
  Eigen::MatrixXd xs(data.n(), k);
  for (int j = 0; j < k; ++j) xs.col(j) = data.x().col(sel[static_cast<std::size_t>(j)]);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xs);
  const Eigen::VectorXd coef = cod.solve(data.y());
  for (int j = 0; j < k; ++j) fit.beta[sel[static_cast<std::size_t>(j)]] = coef[j];
  fit.error = (data.y() - xs * coef).squaredNorm();
  fit.rank = static_cast<int>(cod.rank());
  return fit;
}

IncrementalOls::IncrementalOls(const Dataset& data, int refit_interval)
    : data_(&data), pattern_(data.m()), refit_interval_(refit_interval) {}

IncrementalOls::IncrementalOls(const Dataset& data, const SparsityPattern& start,
                               int refit_interval)
    : data_(&data), pattern_(data.m()), refit_interval_(refit_interval) {
  for (int i : start.support()) flip(i);
}

double IncrementalOls::error() const {
  if (degenerate_) return fallback_fit().error;
  const int k = static_cast<int>(sel_.size());
  return data_->yty() - z_.head(k).squaredNorm();
}

const RestrictedFit& IncrementalOls::fallback_fit() const {
  if (!fallback_) fallback_ = restricted_ols(*data_, pattern_);
  return *fallback_;
}

double IncrementalOls::error_if_flipped(int i) const {
  if (degenerate_) {
    SparsityPattern q = pattern_;
    q.flip(i);
    return restricted_ols(*data_, q).error;
  }
  const int k = static_cast<int>(sel_.size());
  if (!pattern_.test(i)) {
    // extend: d^2 = ||x_i||^2 - ||w||^2 with R'w = X_S'x_i
    Eigen::VectorXd v(k);
    for (int t = 0; t < k; ++t) v[t] = data_->gram_entry(sel_[static_cast<std::size_t>(t)], i);
    const Eigen::VectorXd w =
        rfac_.topLeftCorner(k, k).triangularView<Eigen::Upper>().transpose().solve(v);
    const double d2 = data_->col_sqnorm()[i] - w.squaredNorm();
    if (d2 <= kDiagTol * kDiagTol) {
      // nearly dependent column: the flipped error equals the current one
      // up to the tolerance, but defer to the full solve for correctness
      SparsityPattern q = pattern_;
      q.flip(i);
      return restricted_ols(*data_, q).error;
    }
    const double zk = (data_->xty()[i] - w.dot(z_.head(k))) / std::sqrt(d2);
    return error() - zk * zk;
  }
  // removal: error grows by beta_t^2 / (G^{-1})_tt
  int t = 0;
  while (sel_[static_cast<std::size_t>(t)] != i) ++t;
  const auto rview = rfac_.topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::VectorXd beta_s = rview.solve(z_.head(k));
  const Eigen::VectorXd u = rview.transpose().solve(Eigen::VectorXd::Unit(k, t));
  return error() + beta_s[t] * beta_s[t] / u.squaredNorm();
}

void IncrementalOls::add_column(int j) {
  const int k = static_cast<int>(sel_.size());
  if (rfac_.rows() <= k) {
    const int cap = std::max(8, 2 * (k + 1));
    rfac_.conservativeResize(cap, cap);
    z_.conservativeResize(cap);
  }
  Eigen::VectorXd v(k);
  for (int t = 0; t < k; ++t) v[t] = data_->gram_entry(sel_[static_cast<std::size_t>(t)], j);
  Eigen::VectorXd w(k);
  if (k > 0) {
    w = rfac_.topLeftCorner(k, k).triangularView<Eigen::Upper>().transpose().solve(v);
  }
  const double d2 = data_->col_sqnorm()[j] - w.squaredNorm();
  if (d2 <= kDiagTol * kDiagTol) {
    sel_.push_back(j);
    if (!rebuild()) degenerate_ = true;
    return;
  }
  const double d = std::sqrt(d2);
  rfac_.col(k).head(k) = w;
  rfac_(k, k) = d;
  rfac_.row(k).head(k).setZero();
  z_[k] = (data_->xty()[j] - w.dot(z_.head(k))) / d;
  sel_.push_back(j);
}

void IncrementalOls::remove_position(int t) {
  const int k = static_cast<int>(sel_.size());
  // drop column t, then rotate away the subdiagonal left behind
  for (int c = t; c + 1 < k; ++c) {
    rfac_.col(c).head(k) = rfac_.col(c + 1).head(k);
  }
  for (int c = t; c + 1 < k; ++c) {
    const double a = rfac_(c, c);
    const double b = rfac_(c + 1, c);
    const double r = std::hypot(a, b);
    if (r <= 0.0) continue;
    const double cs = a / r;
    const double sn = b / r;
    for (int cc = c; c + 1 < k && cc + 1 < k; ++cc) {
      const double x0 = rfac_(c, cc);
      const double x1 = rfac_(c + 1, cc);
      rfac_(c, cc) = cs * x0 + sn * x1;
      rfac_(c + 1, cc) = -sn * x0 + cs * x1;
    }
    const double z0 = z_[c];
    const double z1 = z_[c + 1];
    z_[c] = cs * z0 + sn * z1;
    z_[c + 1] = -sn * z0 + cs * z1;
  }
  sel_.erase(sel_.begin() + t);
  const int kk = static_cast<int>(sel_.size());
  bool bad = false;
  for (int c = 0; c < kk; ++c) {
    if (std::abs(rfac_(c, c)) <= kDiagTol) bad = true;
  }
  if (bad && !rebuild()) degenerate_ = true;
}

bool IncrementalOls::rebuild() {
  const int k = static_cast<int>(sel_.size());
  if (rfac_.rows() < k) {
    rfac_.conservativeResize(std::max(8, 2 * k), std::max(8, 2 * k));
    z_.conservativeResize(std::max(8, 2 * k));
  }
  if (k == 0) {
    degenerate_ = false;
    return true;
  }
  Eigen::MatrixXd gram(k, k);
  Eigen::VectorXd rhs(k);
  for (int a = 0; a < k; ++a) {
    rhs[a] = data_->xty()[sel_[static_cast<std::size_t>(a)]];
    for (int b = 0; b <= a; ++b) {
      gram(a, b) = data_->gram_entry(sel_[static_cast<std::size_t>(a)],
                                     sel_[static_cast<std::size_t>(b)]);
      gram(b, a) = gram(a, b);
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) return false;
  Eigen::MatrixXd u = llt.matrixU();
  for (int c = 0; c < k; ++c) {
    if (u(c, c) <= kDiagTol) return false;
  }
  rfac_.topLeftCorner(k, k) = u;
  z_.head(k) = u.triangularView<Eigen::Upper>().transpose().solve(rhs);
  degenerate_ = false;
  return true;
}

void IncrementalOls::flip(int i) {
  fallback_.reset();
  if (degenerate_) {
    pattern_.flip(i);
    if (pattern_.test(i)) {
      sel_.push_back(i);
    } else {
      int t = 0;
      while (sel_[static_cast<std::size_t>(t)] != i) ++t;
      sel_.erase(sel_.begin() + t);
    }
    rebuild();  // leaves degenerate_ set when still rank deficient
    return;
  }
  pattern_.flip(i);
  if (pattern_.test(i)) {
    add_column(i);
  } else {
    int t = 0;
    while (sel_[static_cast<std::size_t>(t)] != i) ++t;
    remove_position(t);
  }
  if (++commits_since_refit_ >= refit_interval_) refit();
}

void IncrementalOls::refit() {
  commits_since_refit_ = 0;
  fallback_.reset();
  if (degenerate_) return;
#ifndef NDEBUG
  const double drifted = error();
#endif
  if (!rebuild()) {
    degenerate_ = true;
    return;
  }
#ifndef NDEBUG
  // drift budget for the incremental updates between refits
  assert(std::abs(drifted - error()) <= 1e-6 * std::max(1.0, error()));
#endif
}

Eigen::VectorXd IncrementalOls::beta() const {
  if (degenerate_) return fallback_fit().beta;
  const int k = static_cast<int>(sel_.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(data_->m());
  if (k == 0) return out;
  const Eigen::VectorXd beta_s =
      rfac_.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(z_.head(k));
  for (int t = 0; t < k; ++t) out[sel_[static_cast<std::size_t>(t)]] = beta_s[t];
  return out;
}

RestrictedFit IncrementalOls::fit() const {
  if (degenerate_) return fallback_fit();
  RestrictedFit f;
  f.beta = beta();
  f.error = error();
  f.pattern = pattern_;
  f.rank = static_cast<int>(sel_.size());
  return f;
}

RestrictedFit ols_update(IncrementalOls& state, int flip) {
  state.flip(flip);
  return state.fit();
}

}  // namespace spagg
