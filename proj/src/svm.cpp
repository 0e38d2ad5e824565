#include "texwave/svm.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

#include "texwave/error.hpp"
#include "texwave/parallel.hpp"
#include "texwave/wavelet.hpp"

namespace texwave {

double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::Shape, "rbf_kernel: length " + std::to_string(x.size()) + " vs " +
                                      std::to_string(y.size()));
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

double BinarySvm::decision(std::span<const double> x) const {
  double f = bias;
  for (std::size_t i = 0; i < support_vectors.size(); ++i) {
    f += coef[i] * rbf_kernel(support_vectors[i], x, params.gamma);
  }
  return f;
}

namespace {

// Kernel rows keyed by sample index with least-recently-used eviction.
class KernelCache {
 public:
  KernelCache(std::span<const std::vector<double>> x, double gamma, std::size_t capacity)
      : x_(x), gamma_(gamma), capacity_(std::max<std::size_t>(capacity, 2)) {}

  // The returned row stays valid until two further distinct rows are fetched.
  const std::vector<double>& row(std::size_t i) {
    if (auto it = rows_.find(i); it != rows_.end()) {
      order_.splice(order_.begin(), order_, it->second.pos);
      return it->second.values;
    }
    if (rows_.size() >= capacity_) {
      rows_.erase(order_.back());
      order_.pop_back();
    }
    order_.push_front(i);
    Entry& e = rows_[i];
    e.pos = order_.begin();
    e.values.resize(x_.size());
    for (std::size_t t = 0; t < x_.size(); ++t) e.values[t] = rbf_kernel(x_[i], x_[t], gamma_);
    return e.values;
  }

 private:
  struct Entry {
    std::vector<double> values;
    std::list<std::size_t>::iterator pos;
  };

  std::span<const std::vector<double>> x_;
  double gamma_;
  std::size_t capacity_;
  std::list<std::size_t> order_;
  std::unordered_map<std::size_t, Entry> rows_;
};

constexpr double kTau = 1e-12;

}  // namespace

SmoResult solve_smo(std::span<const std::vector<double>> x, std::span<const int> y, const KernelParams& params,
                    const SmoOptions& opt) {
  const std::size_t n = x.size();
  if (n != y.size()) throw Error(ErrorKind::Shape, "smo: sample/label count mismatch");
  if (!(params.c > 0.0) || !(params.gamma > 0.0)) throw Error(ErrorKind::Config, "smo: C and gamma must be > 0");
  for (int label : y) {
    if (label != 1 && label != -1) throw Error(ErrorKind::Config, "smo: labels must be +1 or -1");
  }
  const double c = params.c;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // G = Q alpha - e
  KernelCache cache(x, params.gamma, opt.cache_rows);

  auto in_up = [&](std::size_t t) { return y[t] > 0 ? alpha[t] < c : alpha[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < c; };

  const long budget = static_cast<long>(opt.max_passes) * static_cast<long>(std::max<std::size_t>(n, 1));
  SmoResult res;
  double up_max = 0.0;
  double low_min = 0.0;
  for (;;) {
    std::size_t i = n;
    std::size_t j = n;
    up_max = -std::numeric_limits<double>::infinity();
    low_min = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double score = -y[t] * grad[t];
      if (in_up(t) && score > up_max) {
        up_max = score;
        i = t;
      }
      if (in_low(t) && score < low_min) {
        low_min = score;
        j = t;
      }
    }
    res.max_violation = (i == n || j == n) ? 0.0 : up_max - low_min;
    if (res.max_violation <= opt.tol) {
      res.converged = true;
      break;
    }
    if (res.iterations >= budget) break;
    ++res.iterations;

    const std::vector<double>& ki = cache.row(i);
    const std::vector<double>& kj = cache.row(j);
    const double yi = y[i];
    const double yj = y[j];
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];

    if (y[i] != y[j]) {
      const double quad = std::max(ki[i] + kj[j] - 2.0 * ki[j], kTau);
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      const double quad = std::max(ki[i] + kj[j] - 2.0 * ki[j], kTau);
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        } else if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (yi * ki[t] * dai + yj * kj[t] * daj);
    }
#ifndef NDEBUG
    double feas = 0.0;
    for (std::size_t t = 0; t < n; ++t) feas += alpha[t] * y[t];
    assert(std::abs(feas) <= 1e-9 * std::max(1.0, c));
#endif
  }

  // Bias: average over free multipliers, else the midpoint of the KKT interval.
  double free_sum = 0.0;
  int free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0 && alpha[t] < c) {
      free_sum += -y[t] * grad[t];
      ++free_count;
    }
  }
  double bias = 0.0;
  if (free_count > 0) {
    bias = free_sum / free_count;
  } else if (std::isfinite(up_max) && std::isfinite(low_min)) {
    bias = 0.5 * (up_max + low_min);
  } else {
    bias = std::isfinite(up_max) ? up_max : (std::isfinite(low_min) ? low_min : 0.0);
  }

  double objective = 0.0;
  for (std::size_t t = 0; t < n; ++t) objective += 0.5 * alpha[t] * (1.0 - grad[t]);

  res.machine.params = params;
  res.machine.bias = bias;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      res.machine.support_vectors.push_back(x[t]);
      res.machine.coef.push_back(alpha[t] * y[t]);
    }
  }
  res.alpha = std::move(alpha);
  res.dual_objective = objective;
  return res;
}

BinarySvm train_binary(std::span<const std::vector<double>> x, std::span<const int> y, const KernelParams& params,
                       const SmoOptions& opt) {
  const bool has_pos = std::find(y.begin(), y.end(), 1) != y.end();
  const bool has_neg = std::find(y.begin(), y.end(), -1) != y.end();
  if (x.size() < 2 || !has_pos || !has_neg) {
    throw Error(ErrorKind::Training, "train_binary: both labels are required");
  }
  SmoResult res = solve_smo(x, y, params, opt);
  if (!res.converged) {
    throw ConvergenceError("smo did not converge within " + std::to_string(res.iterations) +
                               " iterations; worst KKT violation " + std::to_string(res.max_violation),
                           res.max_violation);
  }
  return std::move(res.machine);
}

LabeledSet LabeledSet::subset(std::span<const std::size_t> indices) const {
  LabeledSet out;
  out.classes = classes;
  out.x.reserve(indices.size());
  out.y.reserve(indices.size());
  for (std::size_t i : indices) {
    out.x.push_back(x[i]);
    out.y.push_back(y[i]);
  }
  return out;
}

std::vector<double> SvmModel::decision_values(std::span<const double> raw) const {
  const std::vector<double> z = standardizer.apply(raw);
  std::vector<double> out;
  out.reserve(machines.size());
  for (const PairMachine& m : machines) out.push_back(m.svm.decision(z));
  return out;
}

int SvmModel::predict_index(std::span<const double> raw) const {
  const std::vector<double> dv = decision_values(raw);
  std::vector<int> votes(classes.size(), 0);
  for (std::size_t m = 0; m < machines.size(); ++m) {
    ++votes[dv[m] > 0.0 ? machines[m].first : machines[m].second];
  }
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

const std::string& SvmModel::predict(const FeatureVector& v) const {
  if (!(v.layout == layout) || v.values.size() != standardizer.dimension()) {
    throw Error(ErrorKind::Shape, "feature layout " + to_string(v.layout.transform) + "/" +
                                      std::to_string(v.layout.levels) + " does not match model layout " +
                                      to_string(layout.transform) + "/" + std::to_string(layout.levels));
  }
  return classes[predict_index(v.values)];
}

SvmModel train_model(const LabeledSet& data, const FeatureLayout& layout, const KernelParams& params,
                     const SmoOptions& opt, int jobs, bool strict, TrainStats* stats) {
  const int k = static_cast<int>(data.classes.size());
  if (k < 2) throw Error(ErrorKind::Training, "at least two classes are required");
  SvmModel model;
  model.classes = data.classes;
  model.layout = layout;
  model.tree_b_rule = to_string(filter_bank().tree_b_rule);
  model.params = params;
  model.standardizer = fit_standardizer(std::span<const std::vector<double>>(data.x));

  std::vector<std::vector<double>> z = data.x;
  for (auto& v : z) model.standardizer.apply_in_place(v);

  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) pairs.emplace_back(a, b);
  }
  std::vector<SmoResult> results(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t p) {
    const auto [a, b] = pairs[p];
    std::vector<std::vector<double>> px;
    std::vector<int> py;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (data.y[i] == a || data.y[i] == b) {
        px.push_back(z[i]);
        py.push_back(data.y[i] == a ? 1 : -1);
      }
    }
    if (std::find(py.begin(), py.end(), 1) == py.end() || std::find(py.begin(), py.end(), -1) == py.end()) {
      throw Error(ErrorKind::Training, "class '" + data.classes[py.empty() || py[0] != 1 ? a : b] +
                                           "' has no training samples");
    }
    results[p] = solve_smo(px, py, params, opt);
  });

  TrainStats local;
  local.machines = static_cast<int>(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (!results[p].converged) {
      ++local.unconverged;
      if (strict) {
        throw ConvergenceError("smo did not converge for classes '" + data.classes[pairs[p].first] + "' vs '" +
                                   data.classes[pairs[p].second] + "'; worst KKT violation " +
                                   std::to_string(results[p].max_violation),
                               results[p].max_violation);
      }
    }
    model.machines.push_back({pairs[p].first, pairs[p].second, std::move(results[p].machine)});
  }
  if (stats) *stats = local;
  return model;
}

}  // namespace texwave
