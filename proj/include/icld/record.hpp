#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "icld/categorize.hpp"

namespace icld {

struct DemoProvenance {
    std::string instance_id;
    std::string presented_label;  // rendered label text (flipped labels show flipped)
    std::optional<double> similarity;
};

// One persisted line of a run artifact: everything needed to rebuild ledgers
// and reports without re-querying the backend.  Deliberately carries no
// timing or timestamps so reruns are byte-identical.
struct RunRecord {
    std::string instance_id;
    std::string variant;
    std::optional<std::string> strategy;
    std::optional<std::uint64_t> seed;
    std::size_t k = 0;
    std::string prompt_hash;
    std::string response_text;
    std::string backend_id;
    bool refusal = false;
    std::optional<Categorization> classification;
    std::optional<SeqCategorization> sequence;
    std::vector<DemoProvenance> demos;
};

nlohmann::json categorization_to_json(const Categorization& c);
Categorization categorization_from_json(const nlohmann::json& j);
nlohmann::json seq_categorization_to_json(const SeqCategorization& c);
SeqCategorization seq_categorization_from_json(const nlohmann::json& j);

nlohmann::json record_to_json(const RunRecord& record);
RunRecord record_from_json(const nlohmann::json& j);

// One compact JSON object per line, keys sorted, no trailing spaces.
std::string record_to_line(const RunRecord& record);
RunRecord record_from_line(const std::string& line);

std::vector<RunRecord> load_records(const std::string& path);
void save_records(const std::string& path, const std::vector<RunRecord>& records);

}  // namespace icld
