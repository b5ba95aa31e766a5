#pragma once

// L0 gradient minimization:
//
//   min_S  sum_p (S_p - I_p)^2 + lambda * #{p : |dx S_p| + |dy S_p| != 0}
//
// solved by half-quadratic splitting. Auxiliary gradients (h, v) are hard
// thresholded per pixel, then S is recovered by a per-channel least-squares
// solve in the Fourier domain, with the penalty beta growing geometrically.
// Gradients are forward differences with periodic wrap-around throughout.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <vector>

#include "isle/image.hpp"

namespace isle {

/// Numerical stand-in for "!= 0" when counting gradient support.
inline constexpr double kSupportEps = 1e-6;

struct SmoothParams {
  double lambda = 0.01;
  double beta0_factor = 2.0;  // beta_0 = beta0_factor * lambda
  double kappa = 2.0;         // beta growth per iteration
  double beta_max = 1e5;

  void validate() const {
    if (!(lambda >= 0.0)) throw ContractError("lambda must be >= 0");
    if (!(beta0_factor > 0.0)) throw ContractError("beta0_factor must be > 0");
    if (!(kappa > 1.0)) throw ContractError("kappa must be > 1");
    if (!(beta_max > 0.0)) throw ContractError("beta_max must be > 0");
    if (lambda > 0.0 && !(beta_max > beta0_factor * lambda)) {
      throw ContractError("beta_max must exceed beta0_factor * lambda");
    }
  }
};

/// Recommended smoothing-weight range; values outside are legal but unusual.
inline constexpr double kLambdaMinRecommended = 0.001;
inline constexpr double kLambdaMaxRecommended = 0.1;

inline bool lambda_in_recommended_range(double lambda) {
  return lambda >= kLambdaMinRecommended && lambda <= kLambdaMaxRecommended;
}

/// Pixels whose summed absolute forward differences (over channels, periodic
/// boundary) exceed `eps`.
template <int C>
std::size_t gradient_support_count(const Image<double, C>& img, double eps = kSupportEps) {
  const int w = img.width();
  const int h = img.height();
  std::size_t count = 0;
  for (int y = 0; y < h; ++y) {
    const int yn = y + 1 == h ? 0 : y + 1;
    for (int x = 0; x < w; ++x) {
      const int xn = x + 1 == w ? 0 : x + 1;
      double s = 0.0;
      for (int c = 0; c < C; ++c) {
        s += std::abs(img(xn, y, c) - img(x, y, c)) + std::abs(img(x, yn, c) - img(x, y, c));
      }
      if (s > eps) ++count;
    }
  }
  return count;
}

/// Value of the L0 objective for `candidate` as a smoothing of `input`.
template <int C>
double l0_objective(const Image<double, C>& input, const Image<double, C>& candidate,
                    double lambda, double eps = kSupportEps) {
  require_same_shape(input, candidate, "l0_objective");
  double fidelity = 0.0;
  auto a = input.data();
  auto b = candidate.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = b[i] - a[i];
    fidelity += d * d;
  }
  return fidelity + lambda * static_cast<double>(gradient_support_count(candidate, eps));
}

namespace detail {

// The FFTW planner is not reentrant; executing an existing plan is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

template <typename T>
struct FftwDeleter {
  void operator()(T* p) const noexcept { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter<T>>;

template <typename T>
FftwBuffer<T> fftw_alloc(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

/// Real-to-complex / complex-to-real 2-D transform pair for one geometry.
class RealFft2d {
 public:
  RealFft2d(int width, int height)
      : width_(width),
        height_(height),
        spectrum_width_(width / 2 + 1),
        real_(fftw_alloc<double>(static_cast<std::size_t>(width) * height)),
        spectrum_(fftw_alloc<fftw_complex>(static_cast<std::size_t>(height) * spectrum_width_)) {
    std::lock_guard lock(fftw_planner_mutex());
    forward_ = fftw_plan_dft_r2c_2d(height, width, real_.get(), spectrum_.get(), FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_2d(height, width, spectrum_.get(), real_.get(), FFTW_ESTIMATE);
  }

  RealFft2d(const RealFft2d&) = delete;
  RealFft2d& operator=(const RealFft2d&) = delete;

  ~RealFft2d() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  [[nodiscard]] std::size_t real_size() const { return static_cast<std::size_t>(width_) * height_; }
  [[nodiscard]] std::size_t spectrum_size() const {
    return static_cast<std::size_t>(height_) * spectrum_width_;
  }
  [[nodiscard]] int spectrum_width() const { return spectrum_width_; }

  double* real() { return real_.get(); }
  fftw_complex* spectrum() { return spectrum_.get(); }

  void forward() { fftw_execute_dft_r2c(forward_, real_.get(), spectrum_.get()); }
  // Unnormalized: the result is scaled by width * height. Clobbers spectrum().
  void inverse() { fftw_execute_dft_c2r(inverse_, spectrum_.get(), real_.get()); }

 private:
  int width_;
  int height_;
  int spectrum_width_;
  FftwBuffer<double> real_;
  FftwBuffer<fftw_complex> spectrum_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

/// Union-find over pixel indices.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

// Squared gradient energy of pixel p, summed over channels.
template <int C>
double gradient_energy(const Image<double, C>& s, int x, int y, int xn, int yn) {
  double e = 0.0;
  for (int c = 0; c < C; ++c) {
    const double gx = s(xn, y, c) - s(x, y, c);
    const double gy = s(x, yn, c) - s(x, y, c);
    e += gx * gx + gy * gy;
  }
  return e;
}

// Piecewise-constant candidate: every pixel carries a region label and each
// region takes the mean of the input over its pixels, the least-squares value
// for that region. Support is counted on labels (distinct regions are assumed
// to have distinct means, which can only over-count).
template <int C>
class Partition {
 public:
  Partition(const Image<double, C>& input, std::vector<std::size_t> labels)
      : input_(input), w_(input.width()), label_(std::move(labels)) {
    relabel();
  }

  // Tie pixels of the half-quadratic iterate whose gradient pair was
  // thresholded to zero to their right and lower neighbours.
  static Partition from_iterate(const Image<double, C>& input, const Image<double, C>& iterate,
                                double threshold) {
    const int w = input.width();
    const int h = input.height();
    DisjointSets sets(input.pixel_count());
    for (int y = 0; y < h; ++y) {
      const int yn = y + 1 == h ? 0 : y + 1;
      for (int x = 0; x < w; ++x) {
        const int xn = x + 1 == w ? 0 : x + 1;
        if (gradient_energy(iterate, x, y, xn, yn) <= threshold) {
          const std::size_t p = static_cast<std::size_t>(y) * w + x;
          sets.unite(p, static_cast<std::size_t>(y) * w + xn);
          sets.unite(p, static_cast<std::size_t>(yn) * w + x);
        }
      }
    }
    std::vector<std::size_t> labels(input.pixel_count());
    for (std::size_t p = 0; p < labels.size(); ++p) labels[p] = sets.find(p);
    return Partition(input, std::move(labels));
  }

  /// Local descent on the L0 objective: region merges, two-way region
  /// splits and single-pixel reassignments, each accepted only if it strictly
  /// lowers the objective.
  void refine(double lambda, int max_rounds = 50) {
    for (int round = 0; round < max_rounds; ++round) {
      bool changed = false;
      while (merge_round(lambda)) changed = true;
      if (split_round(lambda)) changed = true;
      if (pixel_sweep(lambda)) {
        changed = true;
        relabel();
      }
      if (!changed) break;
    }
  }

  [[nodiscard]] Image<double, C> render() const {
    Image<double, C> out(input_.width(), input_.height());
    auto dst = out.data();
    for (std::size_t p = 0; p < label_.size(); ++p) {
      const auto r = label_[p];
      for (int c = 0; c < C; ++c) {
        dst[p * C + c] = std::clamp(sum_[r * C + c] / static_cast<double>(count_[r]), 0.0, 1.0);
      }
    }
    return out;
  }

 private:
  [[nodiscard]] std::size_t right(std::size_t p) const {
    const auto x = static_cast<int>(p % w_);
    return x + 1 == w_ ? p - x : p + 1;
  }
  [[nodiscard]] std::size_t left(std::size_t p) const {
    const auto x = static_cast<int>(p % w_);
    return x == 0 ? p + (w_ - 1) : p - 1;
  }
  [[nodiscard]] std::size_t down(std::size_t p) const {
    const std::size_t n = label_.size();
    return p + w_ >= n ? p + w_ - n : p + w_;
  }
  [[nodiscard]] std::size_t up(std::size_t p) const {
    return p < static_cast<std::size_t>(w_) ? p + label_.size() - w_ : p - w_;
  }

  [[nodiscard]] bool supported(std::size_t q) const {
    return label_[right(q)] != label_[q] || label_[down(q)] != label_[q];
  }

  // Sum of squared deviations from the mean for a region with the given moments.
  [[nodiscard]] static double sse(double n, const double* sum, const double* sumsq) {
    if (n <= 0.0) return 0.0;
    double e = 0.0;
    for (int c = 0; c < C; ++c) e += sumsq[c] - sum[c] * sum[c] / n;
    return e;
  }

  [[nodiscard]] double region_sse(std::size_t r) const {
    return sse(static_cast<double>(count_[r]), &sum_[r * C], &sumsq_[r * C]);
  }

  // Split labels into 4-connected pieces, compact ids, recompute moments.
  void relabel() {
    const std::size_t n = label_.size();
    DisjointSets sets(n);
    for (std::size_t p = 0; p < n; ++p) {
      if (label_[right(p)] == label_[p]) sets.unite(p, right(p));
      if (label_[down(p)] == label_[p]) sets.unite(p, down(p));
    }
    std::vector<std::size_t> compact(n, n);
    std::size_t next = 0;
    for (std::size_t p = 0; p < n; ++p) {
      const auto r = sets.find(p);
      if (compact[r] == n) compact[r] = next++;
      label_[p] = compact[r];
    }
    count_.assign(next, 0);
    sum_.assign(next * C, 0.0);
    sumsq_.assign(next * C, 0.0);
    auto in = input_.data();
    for (std::size_t p = 0; p < n; ++p) {
      const auto r = label_[p];
      ++count_[r];
      for (int c = 0; c < C; ++c) {
        const double v = in[p * C + c];
        sum_[r * C + c] += v;
        sumsq_[r * C + c] += v * v;
      }
    }
  }

  // One round of greedy region merges in order of their pairwise gain. A
  // merge of two groups is charged only the pixels cleared by the pair that
  // proposed it; the true gain can only be larger, so every accepted merge
  // strictly lowers the objective.
  bool merge_round(double lambda) {
    const std::size_t n = label_.size();
    const std::size_t regions = count_.size();
    if (regions < 2) return false;

    struct Contact {
      std::size_t a, b;
      int cleared;
      auto operator<=>(const Contact&) const = default;
    };
    std::vector<Contact> contacts;
    contacts.reserve(n / 4);
    for (std::size_t q = 0; q < n; ++q) {
      const auto x = label_[q];
      const auto r = label_[right(q)];
      const auto d = label_[down(q)];
      const bool fr = r != x;
      const bool fd = d != x;
      if (!fr && !fd) continue;
      const bool single = !fr || !fd || r == d;
      if (fr) contacts.push_back({std::min(x, r), std::max(x, r), single ? 1 : 0});
      if (fd && (!fr || d != r)) contacts.push_back({std::min(x, d), std::max(x, d), single ? 1 : 0});
    }
    std::sort(contacts.begin(), contacts.end());

    struct Candidate {
      double delta;
      std::size_t a, b;
      int cleared;
      auto operator<=>(const Candidate&) const = default;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < contacts.size();) {
      const auto a = contacts[i].a;
      const auto b = contacts[i].b;
      int cleared = 0;
      for (; i < contacts.size() && contacts[i].a == a && contacts[i].b == b; ++i) {
        cleared += contacts[i].cleared;
      }
      const double delta = merged_sse(a, b) - region_sse(a) - region_sse(b) - lambda * cleared;
      if (delta < -kMinGain) candidates.push_back({delta, a, b, cleared});
    }
    if (candidates.empty()) return false;
    std::sort(candidates.begin(), candidates.end());

    DisjointSets sets(regions);
    bool merged_any = false;
    for (const auto& cand : candidates) {
      const auto a = sets.find(cand.a);
      const auto b = sets.find(cand.b);
      if (a == b) continue;
      const double delta = merged_sse(a, b) - region_sse(a) - region_sse(b) - lambda * cand.cleared;
      if (delta >= -kMinGain) continue;
      sets.unite(a, b);
      const auto root = std::min(a, b);
      const auto other = std::max(a, b);
      count_[root] += count_[other];
      for (int c = 0; c < C; ++c) {
        sum_[root * C + c] += sum_[other * C + c];
        sumsq_[root * C + c] += sumsq_[other * C + c];
      }
      merged_any = true;
    }
    for (auto& l : label_) l = sets.find(l);
    relabel();
    return merged_any;
  }

  [[nodiscard]] double merged_sse(std::size_t a, std::size_t b) const {
    double sum[C], sumsq[C];
    for (int c = 0; c < C; ++c) {
      sum[c] = sum_[a * C + c] + sum_[b * C + c];
      sumsq[c] = sumsq_[a * C + c] + sumsq_[b * C + c];
    }
    return sse(static_cast<double>(count_[a] + count_[b]), sum, sumsq);
  }

  // Try splitting every region in two by thresholding its pixels' summed
  // channel values at the region mean; the pieces are the 4-connected parts of
  // each class. Splits only change support inside the split region, so all
  // profitable splits of a round are applied together.
  bool split_round(double lambda) {
    const std::size_t n = label_.size();
    const std::size_t regions = count_.size();
    std::vector<std::size_t> start(regions + 1, 0);
    for (auto l : label_) ++start[l + 1];
    std::partial_sum(start.begin(), start.end(), start.begin());
    std::vector<std::size_t> members(n);
    {
      std::vector<std::size_t> fill(start.begin(), start.end() - 1);
      for (std::size_t p = 0; p < n; ++p) members[fill[label_[p]]++] = p;
    }

    auto in = input_.data();
    auto key = [&](std::size_t p) {
      double k = 0.0;
      for (int c = 0; c < C; ++c) k += in[p * C + c];
      return k;
    };

    std::vector<std::size_t> piece(n, n);
    std::vector<std::size_t> proposal = label_;
    std::vector<std::size_t> stack;
    std::size_t next_label = regions;
    bool split_any = false;

    for (std::size_t r = 0; r < regions; ++r) {
      const std::size_t b = start[r];
      const std::size_t e = start[r + 1];
      if (e - b < 2) continue;
      double mean_key = 0.0;
      for (std::size_t i = b; i < e; ++i) mean_key += key(members[i]);
      mean_key /= static_cast<double>(e - b);
      auto side = [&](std::size_t p) { return key(p) < mean_key; };

      // Flood-fill same-side 4-connected pieces inside the region.
      std::vector<std::size_t> pieces;
      for (std::size_t i = b; i < e; ++i) {
        const auto seed = members[i];
        if (piece[seed] != n) continue;
        const auto id = pieces.size();
        pieces.push_back(seed);
        piece[seed] = id;
        stack.assign(1, seed);
        while (!stack.empty()) {
          const auto q = stack.back();
          stack.pop_back();
          for (const auto nb : {left(q), right(q), up(q), down(q)}) {
            if (label_[nb] == r && piece[nb] == n && side(nb) == side(q)) {
              piece[nb] = id;
              stack.push_back(nb);
            }
          }
        }
      }
      if (pieces.size() < 2) {
        for (std::size_t i = b; i < e; ++i) piece[members[i]] = n;
        continue;
      }

      std::vector<double> cnt(pieces.size(), 0.0), sum(pieces.size() * C, 0.0), sq(pieces.size() * C, 0.0);
      for (std::size_t i = b; i < e; ++i) {
        const auto p = members[i];
        const auto id = piece[p];
        cnt[id] += 1.0;
        for (int c = 0; c < C; ++c) {
          const double v = in[p * C + c];
          sum[id * C + c] += v;
          sq[id * C + c] += v * v;
        }
      }
      // Either split into all pieces, or cut a single piece off the rest.
      const double region_cost = region_sse(r);
      double delta = -region_cost;
      for (std::size_t id = 0; id < pieces.size(); ++id) delta += sse(cnt[id], &sum[id * C], &sq[id * C]);
      int support_change = 0;
      std::vector<int> piece_support(pieces.size(), 0);
      for (std::size_t i = b; i < e; ++i) {
        const auto q = members[i];
        const auto rq = right(q);
        const auto dq = down(q);
        if (label_[rq] != r || label_[dq] != r) continue;
        const auto pq = piece[q], pr = piece[rq], pd = piece[dq];
        if (pq == pr && pq == pd) continue;
        ++support_change;
        ++piece_support[pq];
        if (pr != pq) ++piece_support[pr];
        if (pd != pq && pd != pr) ++piece_support[pd];
      }
      delta += lambda * support_change;

      std::size_t best_piece = pieces.size();
      double best_delta = delta;
      for (std::size_t id = 0; id < pieces.size(); ++id) {
        double rest_sum[C], rest_sq[C];
        for (int c = 0; c < C; ++c) {
          rest_sum[c] = sum_[r * C + c] - sum[id * C + c];
          rest_sq[c] = sumsq_[r * C + c] - sq[id * C + c];
        }
        const double d = sse(cnt[id], &sum[id * C], &sq[id * C]) +
                         sse(static_cast<double>(count_[r]) - cnt[id], rest_sum, rest_sq) - region_cost +
                         lambda * piece_support[id];
        if (d < best_delta) {
          best_delta = d;
          best_piece = id;
        }
      }

      if (best_delta < -kMinGain) {
        for (std::size_t i = b; i < e; ++i) {
          const auto id = piece[members[i]];
          proposal[members[i]] = best_piece == pieces.size() ? next_label + id
                                 : id == best_piece          ? next_label
                                                             : r;
        }
        next_label += pieces.size();
        split_any = true;
      }
      for (std::size_t i = b; i < e; ++i) piece[members[i]] = n;
    }
    if (!split_any) return false;
    label_ = std::move(proposal);
    relabel();
    return true;
  }

  // Raster-order sweep moving single pixels into a neighbouring region or
  // into a fresh region of their own, using exact moment updates.
  bool pixel_sweep(double lambda) {
    const std::size_t n = label_.size();
    bool changed = false;
    auto in = input_.data();
    for (std::size_t p = 0; p < n; ++p) {
      const auto from = label_[p];
      // Pixels whose support depends on the value at p.
      std::size_t affected[3] = {p, 0, 0};
      int n_affected = 1;
      for (const auto q : {left(p), up(p)}) {
        if (std::find(affected, affected + n_affected, q) == affected + n_affected) {
          affected[n_affected++] = q;
        }
      }

      auto support_cost = [&]() {
        int s = 0;
        for (int i = 0; i < n_affected; ++i) s += supported(affected[i]) ? 1 : 0;
        return lambda * s;
      };
      const double base_support = support_cost();

      // SSE change of removing p from its region.
      double rem_sum[C], rem_sq[C];
      for (int c = 0; c < C; ++c) {
        const double v = in[p * C + c];
        rem_sum[c] = sum_[from * C + c] - v;
        rem_sq[c] = sumsq_[from * C + c] - v * v;
      }
      const double n_from = static_cast<double>(count_[from]);
      const double leave = sse(n_from - 1.0, rem_sum, rem_sq) - region_sse(from);

      double best_delta = -kMinGain;
      std::size_t best_to = from;
      const std::size_t neighbours[4] = {label_[left(p)], label_[right(p)], label_[up(p)],
                                         label_[down(p)]};
      const std::size_t fresh = count_.size();
      auto consider = [&](std::size_t to) {
        if (to == from || to == best_to) return;
        double join = 0.0;
        if (to != fresh) {
          double add_sum[C], add_sq[C];
          for (int c = 0; c < C; ++c) {
            const double v = in[p * C + c];
            add_sum[c] = sum_[to * C + c] + v;
            add_sq[c] = sumsq_[to * C + c] + v * v;
          }
          join = sse(static_cast<double>(count_[to]) + 1.0, add_sum, add_sq) - region_sse(to);
        }
        label_[p] = to;
        const double delta = leave + join + support_cost() - base_support;
        label_[p] = from;
        if (delta < best_delta) {
          best_delta = delta;
          best_to = to;
        }
      };
      for (auto to : neighbours) consider(to);
      if (count_[from] > 1) consider(fresh);

      if (best_to == from) continue;
      if (best_to == fresh) {
        count_.push_back(0);
        sum_.resize(sum_.size() + C, 0.0);
        sumsq_.resize(sumsq_.size() + C, 0.0);
      }
      for (int c = 0; c < C; ++c) {
        const double v = in[p * C + c];
        sum_[from * C + c] -= v;
        sumsq_[from * C + c] -= v * v;
        sum_[best_to * C + c] += v;
        sumsq_[best_to * C + c] += v * v;
      }
      --count_[from];
      ++count_[best_to];
      label_[p] = best_to;
      changed = true;
    }
    return changed;
  }

  static constexpr double kMinGain = 1e-12;

  const Image<double, C>& input_;
  int w_;
  std::vector<std::size_t> label_;
  std::vector<std::size_t> count_;
  std::vector<double> sum_;
  std::vector<double> sumsq_;
};

}  // namespace detail

/// Edge-preserving L0 smoothing of `img` at weight `params.lambda`.
/// lambda == 0 and gradient-free inputs are returned unchanged.
template <int C>
Image<double, C> l0_smooth(const Image<double, C>& img, const SmoothParams& params) {
  params.validate();
  if (params.lambda == 0.0 || gradient_support_count(img, 0.0) == 0) return img;

  const int w = img.width();
  const int h = img.height();
  const std::size_t n = img.pixel_count();
  const double norm = 1.0 / static_cast<double>(n);

  detail::RealFft2d fft(w, h);
  const int sw = fft.spectrum_width();
  const std::size_t ns = fft.spectrum_size();

  // |F(dx)|^2 + |F(dy)|^2 for periodic forward differences.
  std::vector<double> laplacian_symbol(ns);
  for (int l = 0; l < h; ++l) {
    const double ey = 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * l / h);
    for (int k = 0; k < sw; ++k) {
      const double ex = 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * k / w);
      laplacian_symbol[static_cast<std::size_t>(l) * sw + k] = ex + ey;
    }
  }

  std::vector<std::vector<std::complex<double>>> input_spectrum(C);
  for (int c = 0; c < C; ++c) {
    double* re = fft.real();
    for (std::size_t p = 0; p < n; ++p) re[p] = img.data()[p * C + c];
    fft.forward();
    input_spectrum[c].resize(ns);
    for (std::size_t i = 0; i < ns; ++i) {
      input_spectrum[c][i] = {fft.spectrum()[i][0], fft.spectrum()[i][1]};
    }
  }

  Image<double, C> s = img;
  std::vector<double> gh(n * C);
  std::vector<double> gv(n * C);
  double beta = params.beta0_factor * params.lambda;
  double last_threshold = params.lambda / beta;

  while (beta <= params.beta_max) {
    const double threshold = params.lambda / beta;
    last_threshold = threshold;

    for (int y = 0; y < h; ++y) {
      const int yn = y + 1 == h ? 0 : y + 1;
      for (int x = 0; x < w; ++x) {
        const int xn = x + 1 == w ? 0 : x + 1;
        const std::size_t p = static_cast<std::size_t>(y) * w + x;
        const bool keep = detail::gradient_energy(s, x, y, xn, yn) > threshold;
        for (int c = 0; c < C; ++c) {
          gh[p * C + c] = keep ? s(xn, y, c) - s(x, y, c) : 0.0;
          gv[p * C + c] = keep ? s(x, yn, c) - s(x, y, c) : 0.0;
        }
      }
    }

    for (int c = 0; c < C; ++c) {
      // Adjoint of the forward difference applied to (h, v).
      double* re = fft.real();
      for (int y = 0; y < h; ++y) {
        const int yp = y == 0 ? h - 1 : y - 1;
        for (int x = 0; x < w; ++x) {
          const int xp = x == 0 ? w - 1 : x - 1;
          const std::size_t p = static_cast<std::size_t>(y) * w + x;
          const std::size_t left = static_cast<std::size_t>(y) * w + xp;
          const std::size_t up = static_cast<std::size_t>(yp) * w + x;
          re[p] = gh[left * C + c] - gh[p * C + c] + gv[up * C + c] - gv[p * C + c];
        }
      }
      fft.forward();
      fftw_complex* spec = fft.spectrum();
      for (std::size_t i = 0; i < ns; ++i) {
        const double denom = 1.0 + beta * laplacian_symbol[i];
        spec[i][0] = (input_spectrum[c][i].real() + beta * spec[i][0]) / denom;
        spec[i][1] = (input_spectrum[c][i].imag() + beta * spec[i][1]) / denom;
      }
      fft.inverse();
      for (std::size_t p = 0; p < n; ++p) s.data()[p * C + c] = re[p] * norm;
    }
    beta *= params.kappa;
  }

  auto partition = detail::Partition<C>::from_iterate(img, s, last_threshold);
  partition.refine(params.lambda);
  auto out = partition.render();
  // The descent is local; near-piecewise-constant inputs can already beat it.
  if (l0_objective(img, img, params.lambda) < l0_objective(img, out, params.lambda)) return img;
  return out;
}

}  // namespace isle
