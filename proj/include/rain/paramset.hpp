#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rain {

// Named float32 tensors plus a version counter. This is the interchange and
// checkpoint representation for every learned module; live models convert to
// and from it on save/load.
struct ParamSet {
    struct Tensor {
        std::vector<std::uint32_t> dims;
        std::vector<float> data;

        std::size_t size() const {
            std::size_t n = 1;
            for (auto d : dims) n *= d;
            return n;
        }
    };

    std::map<std::string, Tensor> tensors;
    std::uint32_t version = 0;

    bool has(const std::string& name) const { return tensors.count(name) != 0; }
    void add(const std::string& name, std::vector<std::uint32_t> dims,
             std::vector<float> data);
    const Tensor& get(const std::string& name) const;

    // True when every tensor is finite and names are well-formed.
    bool all_finite() const;
};

// Checkpoint file format "RNCK": magic, u32 tensor count, u32 version, then
// per tensor: u32 name length, name bytes, u32 rank, u32 dims[rank], float32
// data. All integers and floats little-endian. Round-trips bit-exactly.
void save_checkpoint(const ParamSet& params, const std::string& path);
ParamSet load_checkpoint(const std::string& path);

}  // namespace rain
