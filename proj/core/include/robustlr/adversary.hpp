#pragma once

#include <vector>

#include "robustlr/coupling.hpp"
#include "robustlr/model.hpp"
#include "robustlr/rng.hpp"

namespace robustlr {

/// Remaining per-coordinate (and label) deletion budgets of the coupling
/// adversary; each starts at floor(eta n).
struct BudgetState {
  std::vector<long> per_coordinate_remaining;
  long label_remaining = 0;
};

enum class CorruptionMode { Erase, Replace };

struct AdversaryConfig {
  double eta = 0.0;       // per-coordinate corruption fraction, in [0, 1]
  double slack_c = 0.1;   // the c of the disagreement premise eta d (1 - c)
  CorruptionMode mode = CorruptionMode::Erase;
};

/// The two datasets produced by the coupling adversary, one per hypothesis.
/// success == true means every disagreement fit in the budget, in which case
/// the datasets are identical entry-by-entry.
struct PairedMaskedDataset {
  std::vector<MaskedSample> dataset0;
  std::vector<MaskedSample> dataset1;
  bool success = false;
  BudgetState budget_final;
  std::vector<long> edits_per_coordinate;
  long label_edits = 0;
};

/// Budgeted adversary: draws one shared coordinate permutation (within
/// constant-coefficient blocks), then n coupled pairs, and removes every
/// disagreeing entry from both sides while budget lasts. Erase mode writes
/// the erasure symbol; replace mode copies side 1's value into side 0.
/// Per-coordinate edits never exceed floor(eta n).
PairedMaskedDataset coupling_adversary(const CouplingSpec& spec, int n, const AdversaryConfig& cfg,
                                       RngStream& rng);

/// MCAR baseline: every covariate entry and label is independently erased
/// with probability eta, then per-column counts are clipped to floor(eta n)
/// by un-erasing uniformly chosen excess entries.
std::vector<MaskedSample> oblivious_erasure(const std::vector<LabeledSample>& data, double eta,
                                            RngStream& rng);

/// Replacement-mode stress adversary: per coordinate j, negates x_j on the
/// floor(eta n) samples with the largest |y| |x_j|. Labels untouched, no
/// erasures.
std::vector<MaskedSample> sign_flip_replacement(const std::vector<LabeledSample>& data, double eta,
                                                RngStream& rng);

}  // namespace robustlr
