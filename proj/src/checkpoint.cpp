#include <bit>
#include <cstring>
#include <fstream>

#include "slideflow/denoiser.hpp"
#include "slideflow/errors.hpp"
#include "slideflow/hash.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace slideflow {

namespace {

constexpr char kMagic[4] = {'S', 'F', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& buf, T v) {
    char tmp[sizeof(T)];
    std::memcpy(tmp, &v, sizeof(T));
    buf.append(tmp, sizeof(T));
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    template <typename T>
    T get() {
        if (pos + sizeof(T) > buf.size()) throw DataError("checkpoint: truncated file");
        T v;
        std::memcpy(&v, buf.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }
    std::string get_str(std::size_t len) {
        if (pos + len > buf.size()) throw DataError("checkpoint: truncated file");
        std::string s = buf.substr(pos, len);
        pos += len;
        return s;
    }
};

}  // namespace

void save_checkpoint(const DenoiserModel& model, const std::string& path) {
    std::string buf;
    buf.append(kMagic, 4);
    put(buf, kVersion);
    const DenoiserConfig& c = model.config;
    for (std::uint64_t v : {c.layers, c.heads, c.hidden, c.neighbors, c.genes, c.feature_dim,
                            c.time_dim})
        put(buf, v);
    put(buf, c.dropout);
    put(buf, static_cast<std::uint64_t>(model.params.size()));
    for (std::size_t i = 0; i < model.params.size(); ++i) {
        const Tensor2& p = model.params[i];
        const std::string& name = model.names[i];
        put(buf, static_cast<std::uint32_t>(name.size()));
        buf.append(name);
        put(buf, static_cast<std::uint64_t>(p.rows));
        put(buf, static_cast<std::uint64_t>(p.cols));
        buf.append(reinterpret_cast<const char*>(p.data.data()), p.data.size() * sizeof(double));
    }
    put(buf, fnv1a64(buf.data(), buf.size()));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("checkpoint: cannot open '" + path + "' for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw DataError("checkpoint: write failed for '" + path + "'");
}

DenoiserModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("checkpoint: cannot open '" + path + "'");
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 4 + sizeof(std::uint32_t) + sizeof(std::uint64_t))
        throw DataError("checkpoint: truncated file");

    std::string body = buf.substr(0, buf.size() - sizeof(std::uint64_t));
    std::uint64_t stored;
    std::memcpy(&stored, buf.data() + buf.size() - sizeof(std::uint64_t), sizeof(stored));
    if (fnv1a64(body.data(), body.size()) != stored) throw DataError("checkpoint: checksum mismatch");

    Reader r{body};
    if (r.get_str(4) != std::string(kMagic, 4)) throw DataError("checkpoint: bad magic");
    auto version = r.get<std::uint32_t>();
    if (version != kVersion)
        throw DataError("checkpoint: unsupported version " + std::to_string(version));

    DenoiserConfig c;
    c.layers = r.get<std::uint64_t>();
    c.heads = r.get<std::uint64_t>();
    c.hidden = r.get<std::uint64_t>();
    c.neighbors = r.get<std::uint64_t>();
    c.genes = r.get<std::uint64_t>();
    c.feature_dim = r.get<std::uint64_t>();
    c.time_dim = r.get<std::uint64_t>();
    c.dropout = r.get<double>();
    c.validate();

    RngStream scratch(0);
    DenoiserModel model = DenoiserModel::init(c, scratch);
    auto count = r.get<std::uint64_t>();
    if (count != model.params.size())
        throw DataError("checkpoint: parameter count does not match the stored config");
    for (std::size_t i = 0; i < count; ++i) {
        auto name_len = r.get<std::uint32_t>();
        std::string name = r.get_str(name_len);
        auto rows = r.get<std::uint64_t>();
        auto cols = r.get<std::uint64_t>();
        if (name != model.names[i])
            throw DataError("checkpoint: unexpected tensor '" + name + "' (wanted '" +
                            model.names[i] + "')");
        Tensor2& p = model.params[i];
        if (rows != p.rows || cols != p.cols)
            throw DataError("checkpoint: shape mismatch for '" + name + "'");
        std::string raw = r.get_str(p.size() * sizeof(double));
        std::memcpy(p.data.data(), raw.data(), raw.size());
    }
    if (r.pos != body.size()) throw DataError("checkpoint: trailing bytes");
    return model;
}

}  // namespace slideflow
