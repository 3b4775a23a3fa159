#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "robustlr/model.hpp"

namespace robustlr {

/// JSON-lines dataset format: one object per sample,
///   {"x": [number or null, ...], "y": number or null}
/// null encodes the erasure symbol. Doubles round-trip exactly.
void write_jsonl(std::ostream& os, const std::vector<MaskedSample>& data);
void write_jsonl(const std::string& path, const std::vector<MaskedSample>& data);
void write_jsonl(const std::string& path, const std::vector<LabeledSample>& data);

std::vector<MaskedSample> read_jsonl(std::istream& is);
std::vector<MaskedSample> read_jsonl(const std::string& path);

/// Complete samples only; throws if any entry is missing.
std::vector<LabeledSample> to_labeled(const std::vector<MaskedSample>& data);

struct PairedMaskedDataset;  // adversary.hpp

/// Writes <basepath>_0.jsonl and <basepath>_1.jsonl (one file per
/// hypothesis) plus <basepath>_manifest.json with
/// {success, eta, n, seed, edits_per_coordinate}.
void write_paired_dataset(const PairedMaskedDataset& paired, const std::string& basepath,
                          double eta, std::uint64_t seed);

}  // namespace robustlr
