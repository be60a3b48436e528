#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace pullin {

/// Doubles formatted with 17 significant digits so artifacts round-trip
/// bit-exactly and identical runs produce identical bytes.
std::string format_double(double value);

std::uint64_t fnv1a_hash(const std::string& text);
std::string hash_hex(std::uint64_t hash);

/// CSV artifact: a config-hash comment line, a header row, then data rows;
/// '.' decimal separator throughout.
class CsvWriter {
public:
    CsvWriter(std::vector<std::string> header, const std::string& config_hash);
    void add_row(std::vector<std::string> cells);
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::string config_hash_;
    std::vector<std::vector<std::string>> rows_;
};

void write_json_artifact(const std::filesystem::path& path, nlohmann::json payload,
                         const std::string& config_hash);

/// Deterministic parallel map: results land in index order regardless of
/// scheduling. Thread count comes from the PULLIN_THREADS environment
/// variable (default 1).
int configured_thread_count();
void parallel_for(int count, int threads, const std::function<void(int)>& body);

}  // namespace pullin
