#include "fediih/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace fediih {

void save_checkpoint(const std::string& bin_path, const std::string& index_path,
                     const std::vector<CheckpointEntry>& entries) {
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw std::runtime_error("save_checkpoint: cannot open " + bin_path);
    nlohmann::json index = nlohmann::json::array();
    size_t offset = 0;
    for (const auto& e : entries) {
        if (static_cast<long>(e.data.size()) != static_cast<long>(e.rows) * e.cols)
            throw std::runtime_error("save_checkpoint: entry '" + e.name + "' data does not match shape");
        bin.write(reinterpret_cast<const char*>(e.data.data()), static_cast<std::streamsize>(e.data.size() * sizeof(double)));
        index.push_back({{"name", e.name}, {"rows", e.rows}, {"cols", e.cols}, {"offset", offset}});
        offset += e.data.size() * sizeof(double);
    }
    if (!bin) throw std::runtime_error("save_checkpoint: write failed for " + bin_path);
    std::ofstream idx(index_path);
    if (!idx) throw std::runtime_error("save_checkpoint: cannot open " + index_path);
    idx << index.dump(2) << '\n';
}

std::map<std::string, CheckpointEntry> load_checkpoint(const std::string& bin_path, const std::string& index_path) {
    std::ifstream idx(index_path);
    if (!idx) throw std::runtime_error("load_checkpoint: cannot open " + index_path);
    nlohmann::json index = nlohmann::json::parse(idx);
    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin) throw std::runtime_error("load_checkpoint: cannot open " + bin_path);

    std::map<std::string, CheckpointEntry> out;
    for (const auto& item : index) {
        CheckpointEntry e;
        e.name = item.at("name").get<std::string>();
        e.rows = item.at("rows").get<int>();
        e.cols = item.at("cols").get<int>();
        size_t offset = item.at("offset").get<size_t>();
        e.data.resize(static_cast<size_t>(e.rows) * e.cols);
        bin.seekg(static_cast<std::streamoff>(offset));
        bin.read(reinterpret_cast<char*>(e.data.data()), static_cast<std::streamsize>(e.data.size() * sizeof(double)));
        if (!bin) throw std::runtime_error("load_checkpoint: short read for entry '" + e.name + "'");
        out[e.name] = std::move(e);
    }
    return out;
}

}  // namespace fediih
