#include "pullin/artifacts.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace pullin {

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string hash_hex(std::uint64_t hash) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header, const std::string& config_hash)
    : header_(std::move(header)), config_hash_(config_hash) {}

void CsvWriter::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) {
        throw std::invalid_argument("csv row width does not match the header");
    }
    rows_.push_back(std::move(cells));
}

void CsvWriter::write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "# config_hash " << config_hash_ << "\n";
    for (size_t i = 0; i < header_.size(); ++i) {
        out << header_[i] << (i + 1 < header_.size() ? "," : "\n");
    }
    for (const auto& row : rows_) {
        for (size_t i = 0; i < row.size(); ++i) {
            out << row[i] << (i + 1 < row.size() ? "," : "\n");
        }
    }
    if (!out.good()) throw std::runtime_error("failed while writing " + path.string());
}

void write_json_artifact(const std::filesystem::path& path, nlohmann::json payload,
                         const std::string& config_hash) {
    payload["config_hash"] = config_hash;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << payload.dump(2) << "\n";
    if (!out.good()) throw std::runtime_error("failed while writing " + path.string());
}

int configured_thread_count() {
    const char* env = std::getenv("PULLIN_THREADS");
    if (env == nullptr || *env == '\0') return 1;
    const int parsed = std::atoi(env);
    if (parsed <= 1) return 1;
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    return hw > 0 ? std::min(parsed, hw) : parsed;
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < count; i += threads) body(i);
            } catch (...) {
                errors[static_cast<size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
}

}  // namespace pullin
