#include "robustlr/dataset_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "robustlr/adversary.hpp"

namespace robustlr {

using nlohmann::json;

void write_jsonl(std::ostream& os, const std::vector<MaskedSample>& data) {
  for (const auto& s : data) {
    json jx = json::array();
    for (Eigen::Index j = 0; j < s.x.size(); ++j) {
      if (s.present[static_cast<std::size_t>(j)])
        jx.push_back(s.x[j]);
      else
        jx.push_back(nullptr);
    }
    json line = {{"x", std::move(jx)}, {"y", nullptr}};
    if (s.y.has_value()) line["y"] = *s.y;
    os << line.dump() << '\n';
  }
}

void write_jsonl(const std::string& path, const std::vector<MaskedSample>& data) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_jsonl: cannot open " + path);
  write_jsonl(os, data);
}

void write_jsonl(const std::string& path, const std::vector<LabeledSample>& data) {
  std::vector<MaskedSample> masked;
  masked.reserve(data.size());
  for (const auto& s : data) masked.push_back(MaskedSample::from_labeled(s));
  write_jsonl(path, masked);
}

std::vector<MaskedSample> read_jsonl(std::istream& is) {
  std::vector<MaskedSample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line);
    if (!j.contains("x") || !j["x"].is_array() || !j.contains("y"))
      throw std::runtime_error("read_jsonl: malformed record at line " + std::to_string(lineno));
    MaskedSample s;
    const auto& jx = j["x"];
    s.x.resize(static_cast<Eigen::Index>(jx.size()));
    s.present.assign(jx.size(), true);
    for (std::size_t k = 0; k < jx.size(); ++k) {
      if (jx[k].is_null()) {
        s.present[k] = false;
        s.x[static_cast<Eigen::Index>(k)] = 0.0;
      } else {
        s.x[static_cast<Eigen::Index>(k)] = jx[k].get<double>();
      }
    }
    if (!j["y"].is_null()) s.y = j["y"].get<double>();
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<MaskedSample> read_jsonl(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_jsonl: cannot open " + path);
  return read_jsonl(is);
}

void write_paired_dataset(const PairedMaskedDataset& paired, const std::string& basepath,
                          double eta, std::uint64_t seed) {
  write_jsonl(basepath + "_0.jsonl", paired.dataset0);
  write_jsonl(basepath + "_1.jsonl", paired.dataset1);
  json manifest = {{"success", paired.success},
                   {"eta", eta},
                   {"n", paired.dataset0.size()},
                   {"seed", seed},
                   {"edits_per_coordinate", paired.edits_per_coordinate}};
  std::ofstream os(basepath + "_manifest.json");
  if (!os) throw std::runtime_error("write_paired_dataset: cannot open manifest");
  os << manifest.dump(2) << '\n';
}

std::vector<LabeledSample> to_labeled(const std::vector<MaskedSample>& data) {
  std::vector<LabeledSample> out;
  out.reserve(data.size());
  for (const auto& s : data) {
    if (!s.complete()) throw std::runtime_error("to_labeled: dataset contains erased entries");
    out.push_back({s.x, *s.y});
  }
  return out;
}

}  // namespace robustlr
