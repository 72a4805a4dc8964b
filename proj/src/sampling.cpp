#include "osp/sampling.hpp"

#include "osp/format.hpp"
#include "osp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace osp {

PartialMatrix PartialMatrix::checked(Eigen::MatrixXd values, MaskMatrix mask,
                                     double sampled_fraction) {
  if (values.rows() != values.cols()) {
    throw std::invalid_argument("PartialMatrix: values must be square");
  }
  if (mask.rows() != values.rows() || mask.cols() != values.cols()) {
    throw std::invalid_argument("PartialMatrix: mask shape mismatch");
  }
  if (!(sampled_fraction >= 0.0 && sampled_fraction <= 1.0)) {
    throw std::invalid_argument("PartialMatrix: sampled_fraction must be in [0, 1]");
  }
  const Index n = values.rows();
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (mask(i, j) != mask(j, i)) {
        throw std::invalid_argument("PartialMatrix: mask must be symmetric");
      }
      if (!mask(i, j)) {
        if (values(i, j) != 0.0) {
          throw std::invalid_argument("PartialMatrix: unobserved positions must hold zero");
        }
        continue;
      }
      if (values(i, j) != values(j, i)) {
        throw std::invalid_argument("PartialMatrix: observed values must be symmetric");
      }
      if (i == j && values(i, j) != 0.0) {
        throw std::invalid_argument("PartialMatrix: diagonal values must be zero");
      }
      if (i != j && values(i, j) < 1.0) {
        throw std::invalid_argument("PartialMatrix: observed hop counts must be at least one");
      }
    }
  }
  return PartialMatrix{std::move(values), std::move(mask), sampled_fraction};
}

PartialMatrix sample_random_pairs(const HopDistanceMatrix& h, double fraction,
                                  std::uint64_t seed) {
  const Index n = h.size();
  if (n < 2) {
    throw std::invalid_argument("sample_random_pairs: need at least two nodes");
  }
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("sample_random_pairs: fraction must be in (0, 1]");
  }
  const std::uint64_t total = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1) / 2;
  // The epsilon keeps exact products like 0.1 * 40 from rounding up.
  const double raw = std::ceil(fraction * static_cast<double>(total) - 1e-9);
  std::uint64_t k = raw < 1.0 ? 1 : static_cast<std::uint64_t>(raw);
  k = std::min(k, total);

  std::vector<std::uint64_t> pairs;
  pairs.reserve(total);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      pairs.push_back(static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) +
                      static_cast<std::uint64_t>(j));
    }
  }
  std::mt19937_64 gen(seed);
  for (std::uint64_t t = 0; t < k; ++t) {
    const std::uint64_t pick = t + rng::below(gen, total - t);
    std::swap(pairs[t], pairs[pick]);
  }

  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(n, n);
  MaskMatrix mask = MaskMatrix::Constant(n, n, false);
  mask.diagonal().setConstant(true);
  for (std::uint64_t t = 0; t < k; ++t) {
    const Index i = static_cast<Index>(pairs[t] / static_cast<std::uint64_t>(n));
    const Index j = static_cast<Index>(pairs[t] % static_cast<std::uint64_t>(n));
    values(i, j) = values(j, i) = static_cast<double>(h.entries(i, j));
    mask(i, j) = mask(j, i) = true;
  }
  return PartialMatrix{std::move(values), std::move(mask), fraction};
}

SplitMask split_observed(const PartialMatrix& p, double validation_share,
                         std::uint64_t seed) {
  if (!(validation_share > 0.0 && validation_share < 1.0)) {
    throw std::invalid_argument("split_observed: validation_share must be in (0, 1)");
  }
  const Index n = p.size();
  std::vector<std::pair<Index, Index>> observed;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (p.mask(i, j)) observed.emplace_back(i, j);
    }
  }
  const auto k = static_cast<Index>(observed.size());
  if (k < 2) {
    throw std::invalid_argument("split_observed: need at least two observed pairs");
  }
  std::mt19937_64 gen(seed);
  rng::shuffle(observed, gen);
  const auto rounded = static_cast<Index>(std::llround(validation_share * static_cast<double>(k)));
  const Index val_count = std::clamp<Index>(rounded, 1, k - 1);

  SplitMask split;
  split.train_mask = p.mask;
  split.validation_mask = MaskMatrix::Constant(n, n, false);
  for (Index t = 0; t < val_count; ++t) {
    const auto [i, j] = observed[static_cast<std::size_t>(t)];
    split.train_mask(i, j) = split.train_mask(j, i) = false;
    split.validation_mask(i, j) = split.validation_mask(j, i) = true;
  }
  return split;
}

MaskMatrix unobserved_mask(const PartialMatrix& p) {
  MaskMatrix u = p.mask.unaryExpr([](bool b) { return !b; });
  u.diagonal().setConstant(false);
  return u;
}

Index observed_pair_count(const PartialMatrix& p) {
  Index k = 0;
  const Index n = p.size();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (p.mask(i, j)) ++k;
    }
  }
  return k;
}

void write_partial_csv(const PartialMatrix& p, std::ostream& out) {
  out << "i,j,hop\n";
  const Index n = p.size();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (p.mask(i, j)) {
        out << i << ',' << j << ',' << format_double(p.values(i, j)) << '\n';
      }
    }
  }
}

PartialMatrix read_partial_csv(std::istream& in, Index n) {
  if (n < 2) {
    throw std::invalid_argument("read_partial_csv: need at least two nodes");
  }
  std::string line;
  if (!std::getline(in, line) || line != "i,j,hop") {
    throw std::invalid_argument("read_partial_csv: missing i,j,hop header");
  }
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(n, n);
  MaskMatrix mask = MaskMatrix::Constant(n, n, false);
  mask.diagonal().setConstant(true);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    long long i = 0;
    long long j = 0;
    double hop = 0.0;
    char c1 = 0;
    char c2 = 0;
    if (!(fields >> i >> c1 >> j >> c2 >> hop) || c1 != ',' || c2 != ',') {
      throw std::invalid_argument("read_partial_csv line " + std::to_string(line_no) +
                                  ": expected i,j,hop");
    }
    if (i < 0 || j < 0 || i >= j || j >= n) {
      throw std::invalid_argument("read_partial_csv line " + std::to_string(line_no) +
                                  ": pair out of range");
    }
    values(i, j) = values(j, i) = hop;
    mask(i, j) = mask(j, i) = true;
  }
  PartialMatrix p = PartialMatrix::checked(std::move(values), std::move(mask), 0.0);
  const auto total = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  p.sampled_fraction = static_cast<double>(observed_pair_count(p)) / total;
  return p;
}

}  // namespace osp
