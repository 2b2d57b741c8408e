#include "rdnet/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rdnet/common/errors.hpp"

namespace rdnet::eval {

namespace {

struct Residual {
  double k = 0.0;
  double l = 0.0;
};

Residual residual(const baseline::Peak& a, const baseline::Peak& b, std::size_t rows,
                  std::size_t cols) {
  return {static_cast<double>(wrap_distance(a.k, b.k, rows)),
          static_cast<double>(wrap_distance(a.l, b.l, cols))};
}

void check_axes(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw DomainError("match_and_rmse: axis sizes must be positive");
}

MatchResult finish(MatchResult r) {
  if (r.pairs > 0) {
    r.rmse_k = std::sqrt(r.sum_sq_k / static_cast<double>(r.pairs));
    r.rmse_l = std::sqrt(r.sum_sq_l / static_cast<double>(r.pairs));
  }
  return r;
}

// Missing predictions and the empty-GT case both charge the largest
// possible wrap-around residual.
Residual sentinel(std::size_t rows, std::size_t cols) {
  return {static_cast<double>(rows / 2), static_cast<double>(cols / 2)};
}

MatchResult empty_gt(const baseline::PeakList& pred, std::size_t rows, std::size_t cols) {
  MatchResult r;
  if (pred.empty()) return r;
  const Residual s = sentinel(rows, cols);
  r.flagged = true;
  r.pairs = pred.size();
  r.sum_sq_k = s.k * s.k * static_cast<double>(pred.size());
  r.sum_sq_l = s.l * s.l * static_cast<double>(pred.size());
  for (std::size_t j = 0; j < pred.size(); ++j) r.assignment.emplace_back(MatchResult::npos, j);
  return finish(std::move(r));
}

constexpr std::size_t kExhaustiveLimit = 6;

// Exhaustive search over injective maps gt -> columns.
std::vector<std::size_t> exhaustive_assignment(const std::vector<double>& cost, std::size_t rows,
                                               std::size_t cols) {
  std::vector<std::size_t> perm(cols);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::size_t> best(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(rows));
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i) total += cost[i * cols + perm[i]];
    if (total < best_cost) {
      best_cost = total;
      std::copy_n(perm.begin(), rows, best.begin());
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

std::size_t wrap_distance(std::size_t a, std::size_t b, std::size_t size) {
  a %= size;
  b %= size;
  const std::size_t d = a > b ? a - b : b - a;
  return std::min(d, size - d);
}

std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t rows,
                                          std::size_t cols) {
  if (rows > cols) throw DomainError("solve_assignment: needs rows <= cols");
  if (cost.size() != rows * cols) throw ShapeError("solve_assignment: cost size mismatch");
  if (rows == 0) return {};
  // Shortest augmenting path with potentials (Kuhn-Munkres), 1-based.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<std::size_t> p(cols + 1, 0), way(cols + 1, 0);
  for (std::size_t i = 1; i <= rows; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(cols + 1, inf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * cols + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> out(rows);
  for (std::size_t j = 1; j <= cols; ++j) {
    if (p[j] != 0) out[p[j] - 1] = j - 1;
  }
  return out;
}

MatchResult match_and_rmse(const baseline::PeakList& pred, const baseline::PeakList& gt,
                           std::size_t rows, std::size_t cols) {
  check_axes(rows, cols);
  if (gt.empty()) return empty_gt(pred, rows, cols);

  // Columns: every prediction, then one sentinel per GT peak not coverable.
  const std::size_t n = gt.size();
  const std::size_t n_pred = pred.size();
  const std::size_t n_cols = std::max(n, n_pred);
  const Residual s = sentinel(rows, cols);
  const double sentinel_cost = s.k * s.k + s.l * s.l;
  std::vector<double> cost(n * n_cols, sentinel_cost);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n_pred; ++j) {
      const Residual r = residual(pred[j], gt[i], rows, cols);
      cost[i * n_cols + j] = r.k * r.k + r.l * r.l;
    }
  }
  const auto assign = n_cols <= kExhaustiveLimit ? exhaustive_assignment(cost, n, n_cols)
                                                 : solve_assignment(cost, n, n_cols);

  MatchResult out;
  out.pairs = n;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = assign[i];
    const Residual r = j < n_pred ? residual(pred[j], gt[i], rows, cols) : s;
    out.sum_sq_k += r.k * r.k;
    out.sum_sq_l += r.l * r.l;
    out.assignment.emplace_back(i, j < n_pred ? j : MatchResult::npos);
  }
  return finish(std::move(out));
}

MatchResult match_greedy(const baseline::PeakList& pred, const baseline::PeakList& gt,
                         std::size_t rows, std::size_t cols) {
  check_axes(rows, cols);
  if (gt.empty()) return empty_gt(pred, rows, cols);
  const Residual s = sentinel(rows, cols);
  std::vector<char> gt_used(gt.size(), 0), pred_used(pred.size(), 0);
  MatchResult out;
  out.pairs = gt.size();
  for (std::size_t step = 0; step < std::min(gt.size(), pred.size()); ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (gt_used[i]) continue;
      for (std::size_t j = 0; j < pred.size(); ++j) {
        if (pred_used[j]) continue;
        const Residual r = residual(pred[j], gt[i], rows, cols);
        if (r.k * r.k + r.l * r.l < best) {
          best = r.k * r.k + r.l * r.l;
          bi = i;
          bj = j;
        }
      }
    }
    gt_used[bi] = pred_used[bj] = 1;
    const Residual r = residual(pred[bj], gt[bi], rows, cols);
    out.sum_sq_k += r.k * r.k;
    out.sum_sq_l += r.l * r.l;
    out.assignment.emplace_back(bi, bj);
  }
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt_used[i]) continue;
    out.sum_sq_k += s.k * s.k;
    out.sum_sq_l += s.l * s.l;
    out.assignment.emplace_back(i, MatchResult::npos);
  }
  return finish(std::move(out));
}

RdMap min_max_normalize(const RdMap& map) {
  RdMap out{map.values};
  if (out.values.size() == 0) return out;
  const double lo = out.values.minCoeff();
  const double hi = out.values.maxCoeff();
  if (!(hi > lo)) {
    out.values.setZero();
    return out;
  }
  out.values = (out.values.array() - lo) / (hi - lo);
  return out;
}

double psnr(const RdMap& pred, const RdMap& gt) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
    throw ShapeError("psnr: map shapes differ");
  }
  if (pred.values.size() == 0) throw ShapeError("psnr: empty maps");
  const RdMap a = min_max_normalize(pred);
  const RdMap b = min_max_normalize(gt);
  const double mse = (a.values - b.values).squaredNorm() / static_cast<double>(a.values.size());
  if (mse == 0.0) return kPsnrIdentical;
  return 20.0 * std::log10(1.0 / std::sqrt(mse));
}

}  // namespace rdnet::eval
