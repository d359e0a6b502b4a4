#include "sarcbench/nn/tensor.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>

#include "json.hpp"
#include "sarcbench/errors.hpp"
#include "sarcbench/io.hpp"

namespace sarc::nn {

static_assert(std::endian::native == std::endian::little, "safetensors I/O assumes a little-endian host");

std::size_t Tensor::numel() const {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           [](std::size_t a, std::int64_t b) { return a * static_cast<std::size_t>(b); });
}

namespace {

float half_to_float(std::uint16_t h) {
    const std::uint32_t sign = (h & 0x8000u) << 16;
    std::uint32_t exp = (h >> 10) & 0x1F;
    std::uint32_t mant = h & 0x3FF;
    std::uint32_t bits = 0;
    if (exp == 0) {
        if (mant == 0) {
            bits = sign;
        } else {
            exp = 127 - 15 + 1;
            while ((mant & 0x400) == 0) {
                mant <<= 1;
                --exp;
            }
            mant &= 0x3FF;
            bits = sign | (exp << 23) | (mant << 13);
        }
    } else if (exp == 31) {
        bits = sign | 0x7F800000u | (mant << 13);
    } else {
        bits = sign | ((exp + 127 - 15) << 23) | (mant << 13);
    }
    return std::bit_cast<float>(bits);
}

}  // namespace

TensorMap load_safetensors(const std::filesystem::path& path) {
    const std::string bytes = read_text_file(path);
    if (bytes.size() < 8) {
        throw DataError(path.string() + ": too short for a safetensors file");
    }
    std::uint64_t header_len = 0;
    std::memcpy(&header_len, bytes.data(), 8);
    if (header_len > bytes.size() - 8) {
        throw DataError(path.string() + ": header length exceeds file size");
    }
    json header;
    try {
        header = json::parse(bytes.substr(8, header_len));
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": bad safetensors header: " + e.what());
    }
    const std::size_t data_start = 8 + header_len;
    TensorMap out;
    for (const auto& [name, info] : header.items()) {
        if (name == "__metadata__") {
            continue;
        }
        Tensor t;
        t.shape = info.at("shape").get<std::vector<std::int64_t>>();
        const auto offsets = info.at("data_offsets").get<std::vector<std::size_t>>();
        const std::string dtype = info.at("dtype").get<std::string>();
        if (offsets.size() != 2 || offsets[1] < offsets[0] || data_start + offsets[1] > bytes.size()) {
            throw DataError(path.string() + ": bad offsets for tensor " + name);
        }
        const char* src = bytes.data() + data_start + offsets[0];
        const std::size_t nbytes = offsets[1] - offsets[0];
        const std::size_t n = t.numel();
        t.data.resize(n);
        if (dtype == "F32") {
            if (nbytes != n * 4) {
                throw DataError(path.string() + ": size mismatch for tensor " + name);
            }
            std::memcpy(t.data.data(), src, nbytes);
        } else if (dtype == "F16" || dtype == "BF16") {
            if (nbytes != n * 2) {
                throw DataError(path.string() + ": size mismatch for tensor " + name);
            }
            for (std::size_t i = 0; i < n; ++i) {
                std::uint16_t h = 0;
                std::memcpy(&h, src + 2 * i, 2);
                t.data[i] = dtype == "F16" ? half_to_float(h)
                                           : std::bit_cast<float>(static_cast<std::uint32_t>(h) << 16);
            }
        } else {
            // Integer buffers (e.g. position_ids) are not model weights.
            continue;
        }
        out.emplace(name, std::move(t));
    }
    return out;
}

void save_safetensors(const std::filesystem::path& path, const TensorMap& tensors) {
    json header = json::object();
    std::size_t offset = 0;
    for (const auto& [name, t] : tensors) {
        if (t.data.size() != t.numel()) {
            throw std::logic_error("tensor " + name + " data does not match its shape");
        }
        const std::size_t nbytes = t.data.size() * 4;
        header[name] = json{{"dtype", "F32"}, {"shape", t.shape}, {"data_offsets", {offset, offset + nbytes}}};
        offset += nbytes;
    }
    std::string head = header.dump();
    while ((8 + head.size()) % 8 != 0) {
        head.push_back(' ');
    }
    std::string bytes(8, '\0');
    const std::uint64_t len = head.size();
    std::memcpy(bytes.data(), &len, 8);
    bytes += head;
    bytes.reserve(bytes.size() + offset);
    for (const auto& [name, t] : tensors) {
        bytes.append(reinterpret_cast<const char*>(t.data.data()), t.data.size() * 4);
    }
    write_text_file(path, bytes);
}

}  // namespace sarc::nn
