#include "robustlr/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace robustlr {

namespace {

/// Fisher-Yates shuffle of indices [begin, end) within `perm`.
void shuffle_range(std::vector<int>& perm, int begin, int end, RngStream& rng) {
  for (int i = end - 1; i > begin; --i) {
    const int j = begin + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(i) - static_cast<std::uint64_t>(begin) + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
}

}  // namespace

PairedMaskedDataset coupling_adversary(const CouplingSpec& spec, int n, const AdversaryConfig& cfg,
                                       RngStream& rng) {
  if (n < 1) throw std::invalid_argument("coupling_adversary: n must be >= 1");
  if (cfg.eta < 0.0 || cfg.eta > 1.0)
    throw std::invalid_argument("coupling_adversary: eta must be in [0,1]");
  const int d = dimension(spec);
  const long budget = static_cast<long>(std::floor(cfg.eta * static_cast<double>(n)));
  const auto blocks = coefficient_blocks(spec);

  PairedMaskedDataset out;
  out.dataset0.reserve(static_cast<std::size_t>(n));
  out.dataset1.reserve(static_cast<std::size_t>(n));
  out.budget_final.per_coordinate_remaining.assign(static_cast<std::size_t>(d), budget);
  out.budget_final.label_remaining = budget;
  out.edits_per_coordinate.assign(static_cast<std::size_t>(d), 0);
  out.success = true;

  // Per-sample permutations, shared between the two sides and restricted to
  // blocks of constant coefficient: marginals are preserved (beta is
  // block-constant) and each coupled pair's disagreements land on
  // independently chosen columns, which is what concentrates per-column edit
  // counts below the budget.
  std::vector<int> perm(static_cast<std::size_t>(d));
  for (int i = 0; i < n; ++i) {
    const CoupledPair pair = draw_coupled_pair(spec, rng);
    std::iota(perm.begin(), perm.end(), 0);
    for (const auto& [begin, end] : blocks) shuffle_range(perm, begin, end, rng);
    MaskedSample s0, s1;
    s0.x.resize(d);
    s1.x.resize(d);
    s0.present.assign(static_cast<std::size_t>(d), true);
    s1.present.assign(static_cast<std::size_t>(d), true);
    for (int j = 0; j < d; ++j) {
      s0.x[j] = pair.sample0.x[perm[static_cast<std::size_t>(j)]];
      s1.x[j] = pair.sample1.x[perm[static_cast<std::size_t>(j)]];
    }
    s0.y = pair.sample0.y;
    s1.y = pair.sample1.y;

    for (int j = 0; j < d; ++j) {
      if (s0.x[j] == s1.x[j]) continue;
      auto& remaining = out.budget_final.per_coordinate_remaining[static_cast<std::size_t>(j)];
      if (remaining <= 0) {
        out.success = false;
        continue;
      }
      --remaining;
      ++out.edits_per_coordinate[static_cast<std::size_t>(j)];
      if (cfg.mode == CorruptionMode::Erase) {
        s0.present[static_cast<std::size_t>(j)] = false;
        s1.present[static_cast<std::size_t>(j)] = false;
        s0.x[j] = 0.0;
        s1.x[j] = 0.0;
      } else {
        s0.x[j] = s1.x[j];
      }
    }
    if (*s0.y != *s1.y) {
      auto& remaining = out.budget_final.label_remaining;
      if (remaining <= 0) {
        out.success = false;
      } else {
        --remaining;
        ++out.label_edits;
        if (cfg.mode == CorruptionMode::Erase) {
          s0.y.reset();
          s1.y.reset();
        } else {
          s0.y = s1.y;
        }
      }
    }
    out.dataset0.push_back(std::move(s0));
    out.dataset1.push_back(std::move(s1));
  }
  return out;
}

std::vector<MaskedSample> oblivious_erasure(const std::vector<LabeledSample>& data, double eta,
                                            RngStream& rng) {
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("oblivious_erasure: eta must be in [0,1]");
  const auto n = data.size();
  std::vector<MaskedSample> out;
  out.reserve(n);
  for (const auto& s : data) out.push_back(MaskedSample::from_labeled(s));
  if (n == 0 || eta == 0.0) return out;
  const int d = static_cast<int>(data.front().x.size());
  const long cap = static_cast<long>(std::floor(eta * static_cast<double>(n)));

  for (int j = 0; j <= d; ++j) {  // column d stands for the labels
    std::vector<std::size_t> erased;
    for (std::size_t i = 0; i < n; ++i)
      if (rng.uniform() < eta) erased.push_back(i);
    // Clip to the hard per-column budget by un-erasing uniform excess picks.
    while (static_cast<long>(erased.size()) > cap) {
      const std::size_t k = rng.uniform_below(erased.size());
      erased[k] = erased.back();
      erased.pop_back();
    }
    for (std::size_t i : erased) {
      if (j < d) {
        out[i].present[static_cast<std::size_t>(j)] = false;
        out[i].x[j] = 0.0;
      } else {
        out[i].y.reset();
      }
    }
  }
  return out;
}

std::vector<MaskedSample> sign_flip_replacement(const std::vector<LabeledSample>& data, double eta,
                                                RngStream&) {
  if (eta < 0.0 || eta > 1.0)
    throw std::invalid_argument("sign_flip_replacement: eta must be in [0,1]");
  const auto n = data.size();
  std::vector<MaskedSample> out;
  out.reserve(n);
  for (const auto& s : data) out.push_back(MaskedSample::from_labeled(s));
  if (n == 0) return out;
  const int d = static_cast<int>(data.front().x.size());
  const auto flips = static_cast<std::size_t>(std::floor(eta * static_cast<double>(n)));
  if (flips == 0) return out;

  std::vector<std::size_t> order(n);
  for (int j = 0; j < d; ++j) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Stable ordering on (score desc, index asc) keeps the attack deterministic.
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(flips - 1),
                     order.end(), [&](std::size_t a, std::size_t b) {
                       const double sa = std::abs(data[a].y) * std::abs(data[a].x[j]);
                       const double sb = std::abs(data[b].y) * std::abs(data[b].x[j]);
                       if (sa != sb) return sa > sb;
                       return a < b;
                     });
    for (std::size_t k = 0; k < flips; ++k) out[order[k]].x[j] = -out[order[k]].x[j];
  }
  return out;
}

}  // namespace robustlr
