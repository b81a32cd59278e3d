#include "rain/paramset.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include "rain/errors.hpp"

namespace rain {

namespace {

constexpr char kMagic[4] = {'R', 'N', 'C', 'K'};

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_u32(std::FILE* f, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    if (std::fwrite(b, 1, 4, f) != 4) throw io_error("checkpoint write failed");
}

std::uint32_t read_u32(std::FILE* f) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, f) != 4)
        throw io_error("checkpoint truncated: expected u32");
    return static_cast<std::uint32_t>(b[0]) |
           (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32s(std::FILE* f, const float* p, std::size_t n) {
    // Host is little-endian on every supported target; assert once.
    static_assert(sizeof(float) == 4);
    if (std::fwrite(p, 4, n, f) != n) throw io_error("checkpoint write failed");
}

void read_f32s(std::FILE* f, float* p, std::size_t n) {
    if (std::fread(p, 4, n, f) != n)
        throw io_error("checkpoint truncated: expected tensor data");
}

}  // namespace

void ParamSet::add(const std::string& name, std::vector<std::uint32_t> dims,
                   std::vector<float> data) {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    if (n != data.size())
        throw contract_error("tensor '" + name + "' dims do not match data size");
    if (tensors.count(name))
        throw contract_error("duplicate tensor name '" + name + "'");
    tensors[name] = Tensor{std::move(dims), std::move(data)};
}

const ParamSet::Tensor& ParamSet::get(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end())
        throw contract_error("missing tensor '" + name + "'");
    return it->second;
}

bool ParamSet::all_finite() const {
    for (const auto& [name, t] : tensors) {
        for (float v : t.data)
            if (!std::isfinite(v)) return false;
    }
    return true;
}

void save_checkpoint(const ParamSet& params, const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw io_error("cannot open '" + path + "' for writing");
    if (std::fwrite(kMagic, 1, 4, f.get()) != 4)
        throw io_error("checkpoint write failed");
    write_u32(f.get(), static_cast<std::uint32_t>(params.tensors.size()));
    write_u32(f.get(), params.version);
    for (const auto& [name, t] : params.tensors) {
        write_u32(f.get(), static_cast<std::uint32_t>(name.size()));
        if (std::fwrite(name.data(), 1, name.size(), f.get()) != name.size())
            throw io_error("checkpoint write failed");
        write_u32(f.get(), static_cast<std::uint32_t>(t.dims.size()));
        for (auto d : t.dims) write_u32(f.get(), d);
        write_f32s(f.get(), t.data.data(), t.data.size());
    }
    if (std::fflush(f.get()) != 0) throw io_error("checkpoint flush failed");
}

ParamSet load_checkpoint(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw io_error("cannot open '" + path + "' for reading");
    char magic[4];
    if (std::fread(magic, 1, 4, f.get()) != 4 ||
        std::memcmp(magic, kMagic, 4) != 0)
        throw io_error("'" + path + "' is not a RNCK checkpoint");
    ParamSet ps;
    std::uint32_t count = read_u32(f.get());
    ps.version = read_u32(f.get());
    for (std::uint32_t k = 0; k < count; ++k) {
        std::uint32_t name_len = read_u32(f.get());
        if (name_len > 4096) throw io_error("corrupt checkpoint: name length");
        std::string name(name_len, '\0');
        if (std::fread(name.data(), 1, name_len, f.get()) != name_len)
            throw io_error("checkpoint truncated: tensor name");
        std::uint32_t rank = read_u32(f.get());
        if (rank > 8) throw io_error("corrupt checkpoint: tensor rank");
        std::vector<std::uint32_t> dims(rank);
        std::size_t n = 1;
        for (auto& d : dims) {
            d = read_u32(f.get());
            n *= d;
        }
        std::vector<float> data(n);
        read_f32s(f.get(), data.data(), n);
        ps.add(name, std::move(dims), std::move(data));
    }
    return ps;
}

}  // namespace rain
