#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace sarc::nn {

struct Tensor {
    std::vector<std::int64_t> shape;
    std::vector<float> data;

    std::size_t numel() const;
    bool operator==(const Tensor&) const = default;
};

using TensorMap = std::map<std::string, Tensor>;

// safetensors container: 8-byte little-endian header length, JSON header,
// raw tensor bytes. Reads F32/F16/BF16 into float; writes F32 with names in
// sorted order so output is byte-stable.
TensorMap load_safetensors(const std::filesystem::path& path);
void save_safetensors(const std::filesystem::path& path, const TensorMap& tensors);

}  // namespace sarc::nn
