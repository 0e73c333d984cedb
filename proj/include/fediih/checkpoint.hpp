#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace fediih {

// Flat little-endian binary of named double tensors plus a JSON index
// carrying names, shapes and byte offsets.
struct CheckpointEntry {
    std::string name;
    int rows = 0, cols = 0;
    std::vector<double> data;
};

void save_checkpoint(const std::string& bin_path, const std::string& index_path,
                     const std::vector<CheckpointEntry>& entries);

std::map<std::string, CheckpointEntry> load_checkpoint(const std::string& bin_path, const std::string& index_path);

}  // namespace fediih
