#include "mma/checkpoint.hpp"

#include "mma/error.hpp"
#include "mma/io_util.hpp"

namespace mma {

std::string serialize_params(const ParamStore& params) {
    std::string out;
    out += "MMAR";
    io::put_u32(out, kCheckpointVersion);
    io::put_u32(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& [name, t] : params.entries()) {
        if (name.size() > 0xFFFF) throw ContractError("checkpoint: parameter name too long");
        io::put_u16(out, static_cast<std::uint16_t>(name.size()));
        out += name;
        out.push_back(static_cast<char>(t.rank()));
        for (int d : t.shape()) io::put_u64(out, static_cast<std::uint64_t>(d));
        for (double v : t.value()) io::put_f64(out, v);
    }
    return out;
}

ParamStore deserialize_params(const std::string& bytes) {
    io::BinReader r{bytes, "checkpoint"};
    if (r.str(4) != "MMAR") throw ParseError("checkpoint: bad magic at byte 0");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        throw ParseError("checkpoint: unsupported format version " + std::to_string(version));
    }
    const std::uint32_t count = r.u32();
    ParamStore params;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint16_t name_len = r.u16();
        const std::string name = r.str(name_len);
        const std::uint8_t rank = r.u8();
        std::vector<int> shape(rank);
        std::size_t total = 1;
        for (auto& d : shape) {
            const std::uint64_t v = r.u64();
            d = static_cast<int>(v);
            total *= static_cast<std::size_t>(v);
        }
        std::vector<double> values(total);
        for (auto& v : values) v = r.f64();
        params.add(name, Tensor::from(shape, std::move(values), true));
    }
    if (r.pos != bytes.size()) {
        throw ParseError("checkpoint: trailing bytes at " + std::to_string(r.pos));
    }
    return params;
}

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params) {
    io::atomic_write(path, serialize_params(params));
}

ParamStore load_checkpoint(const std::filesystem::path& path) {
    return deserialize_params(io::read_file(path));
}

}  // namespace mma
