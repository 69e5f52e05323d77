#include "tvlm/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <map>

#include "tvlm/errors.hpp"

namespace tvlm {

namespace {

constexpr char kMagic[8] = {'T', 'V', 'L', 'M', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u16(std::ostream& os, std::uint16_t v) {
    char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
    os.write(b, 2);
}

void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

std::uint16_t get_u16(std::istream& is) {
    unsigned char b[2];
    is.read(reinterpret_cast<char*>(b), 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<ParamPtr>& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open checkpoint for writing: " + path);
    os.write(kMagic, 8);
    put_u32(os, kVersion);
    put_u32(os, static_cast<std::uint32_t>(params.size()));
    std::uint64_t offset = 0;
    for (const auto& p : params) {
        if (p->name.size() > 0xffff) throw IoError("parameter name too long: " + p->name);
        put_u16(os, static_cast<std::uint16_t>(p->name.size()));
        os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
        const Shape& s = p->value.shape();
        os.put(static_cast<char>(s.size()));
        for (std::int64_t d : s) put_u64(os, static_cast<std::uint64_t>(d));
        put_u64(os, offset);
        offset += static_cast<std::uint64_t>(p->value.numel()) * 8;
    }
    put_u64(os, offset);
    for (const auto& p : params) {
        for (double v : p->value.values()) put_u64(os, std::bit_cast<std::uint64_t>(v));
    }
    if (!os) throw IoError("write failed for checkpoint: " + path);
}

std::vector<std::pair<std::string, Tensor>> read_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint for reading: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || !std::equal(magic, magic + 8, kMagic)) {
        throw SchemaError("not a checkpoint file (bad magic): " + path);
    }
    const std::uint32_t version = get_u32(is);
    if (version != kVersion) {
        throw SchemaError("checkpoint version mismatch: expected " + std::to_string(kVersion) + ", found " +
                          std::to_string(version));
    }
    const std::uint32_t count = get_u32(is);
    struct Entry {
        std::string name;
        Shape shape;
        std::uint64_t offset;
    };
    std::vector<Entry> manifest;
    manifest.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Entry e;
        const std::uint16_t len = get_u16(is);
        e.name.resize(len);
        is.read(e.name.data(), len);
        const int ndim = is.get();
        for (int d = 0; d < ndim; ++d) e.shape.push_back(static_cast<std::int64_t>(get_u64(is)));
        e.offset = get_u64(is);
        manifest.push_back(std::move(e));
    }
    const std::uint64_t payload_size = get_u64(is);
    if (!is) throw IoError("truncated checkpoint manifest: " + path);
    const std::streampos payload_start = is.tellg();

    std::vector<std::pair<std::string, Tensor>> out;
    out.reserve(count);
    for (const auto& e : manifest) {
        const std::int64_t n = shape_numel(e.shape);
        if (e.offset + static_cast<std::uint64_t>(n) * 8 > payload_size) {
            throw IoError("checkpoint entry '" + e.name + "' extends past payload");
        }
        is.seekg(payload_start + static_cast<std::streamoff>(e.offset));
        Tensor t(e.shape);
        for (std::int64_t i = 0; i < n; ++i) t[i] = std::bit_cast<double>(get_u64(is));
        if (!is) throw IoError("truncated checkpoint payload: " + path);
        out.emplace_back(e.name, std::move(t));
    }
    return out;
}

void load_checkpoint(const std::string& path, const std::vector<ParamPtr>& params) {
    auto entries = read_checkpoint(path);
    std::map<std::string, Tensor*> by_name;
    for (auto& [name, tensor] : entries) {
        if (!by_name.emplace(name, &tensor).second) {
            throw SchemaError("checkpoint has duplicate entry '" + name + "'");
        }
    }
    if (entries.size() != params.size()) {
        throw SchemaError("checkpoint holds " + std::to_string(entries.size()) + " entries but model has " +
                          std::to_string(params.size()) + " parameters");
    }
    for (const auto& p : params) {
        auto it = by_name.find(p->name);
        if (it == by_name.end()) throw SchemaError("checkpoint is missing parameter '" + p->name + "'");
        if (it->second->shape() != p->value.shape()) {
            throw SchemaError("shape mismatch for '" + p->name + "': checkpoint " + it->second->shape_string() +
                              " vs model " + p->value.shape_string());
        }
        p->value = std::move(*it->second);
    }
}

}  // namespace tvlm
