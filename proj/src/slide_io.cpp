#include <bit>
#include <cstring>
#include <fstream>

#include "slideflow/data.hpp"
#include "slideflow/errors.hpp"
#include "slideflow/hash.hpp"

static_assert(std::endian::native == std::endian::little,
              "slide format assumes a little-endian host");

namespace slideflow {

namespace {

constexpr char kMagic[4] = {'S', 'L', 'B', '1'};
constexpr std::uint64_t kFlagNormalized = 1;

template <typename T>
void put(std::string& buf, T v) {
    char tmp[sizeof(T)];
    std::memcpy(tmp, &v, sizeof(T));
    buf.append(tmp, sizeof(T));
}

void put_str(std::string& buf, const std::string& s) {
    put(buf, static_cast<std::uint32_t>(s.size()));
    buf.append(s);
}

void put_tensor(std::string& buf, const Tensor2& t) {
    buf.append(reinterpret_cast<const char*>(t.data.data()), t.data.size() * sizeof(double));
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    template <typename T>
    T get() {
        if (pos + sizeof(T) > buf.size()) throw DataError("slide: truncated file");
        T v;
        std::memcpy(&v, buf.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }
    std::string get_str(std::size_t n) {
        if (pos + n > buf.size()) throw DataError("slide: truncated file");
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
    Tensor2 get_tensor(std::size_t r, std::size_t c) {
        std::size_t bytes = r * c * sizeof(double);
        if (pos + bytes > buf.size()) throw DataError("slide: truncated file");
        Tensor2 t(r, c);
        std::memcpy(t.data.data(), buf.data() + pos, bytes);
        pos += bytes;
        return t;
    }
};

}  // namespace

void SlideData::validate() const {
    require(coords.rows >= 2, "slide: need at least 2 spots, got " + std::to_string(coords.rows));
    require_shape(coords.cols == 2, "slide: coords must be Nx2");
    require_shape(features.rows == coords.rows && expression.rows == coords.rows,
                  "slide: row counts disagree (coords " + coords.shape_str() + ", features " +
                      features.shape_str() + ", expression " + expression.shape_str() + ")");
    require(expression.cols >= 1 && features.cols >= 1, "slide: need G >= 1 and d_in >= 1");
    require(gene_names.size() == expression.cols,
            "slide: " + std::to_string(gene_names.size()) + " gene names for " +
                std::to_string(expression.cols) + " genes");
    if (!normalized)
        for (double v : expression.data)
            require(v >= 0.0, "slide: raw expression must be non-negative");
}

void save_slide(const SlideData& slide, const std::string& path) {
    slide.validate();
    std::string buf;
    buf.append(kMagic, 4);
    put(buf, static_cast<std::uint64_t>(slide.spots()));
    put(buf, static_cast<std::uint64_t>(slide.genes()));
    put(buf, static_cast<std::uint64_t>(slide.feature_dim()));
    put(buf, static_cast<std::uint64_t>(slide.normalized ? kFlagNormalized : 0));
    put_tensor(buf, slide.coords);
    put_tensor(buf, slide.features);
    put_tensor(buf, slide.expression);
    for (const auto& name : slide.gene_names) put_str(buf, name);
    put_str(buf, slide.id);
    put(buf, fnv1a64(buf.data(), buf.size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("slide: cannot open '" + path + "' for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw DataError("slide: write failed for '" + path + "'");
}

SlideData load_slide(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("slide: cannot open '" + path + "'");
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 4 + 4 * sizeof(std::uint64_t) + sizeof(std::uint64_t))
        throw DataError("slide: truncated file");

    std::uint64_t stored;
    std::memcpy(&stored, buf.data() + buf.size() - sizeof(stored), sizeof(stored));
    if (fnv1a64(buf.data(), buf.size() - sizeof(stored)) != stored)
        throw DataError("slide: checksum mismatch in '" + path + "'");

    std::string body = buf.substr(0, buf.size() - sizeof(stored));
    Reader r{body};
    if (r.get_str(4) != std::string(kMagic, 4)) throw DataError("slide: bad magic in '" + path + "'");
    auto n = r.get<std::uint64_t>();
    auto g = r.get<std::uint64_t>();
    auto d = r.get<std::uint64_t>();
    auto flags = r.get<std::uint64_t>();
    // Sanity bound before allocating: the payload can't exceed the file.
    if (n * (2 + d + g) * sizeof(double) > body.size()) throw DataError("slide: truncated file");

    SlideData s;
    s.normalized = (flags & kFlagNormalized) != 0;
    s.coords = r.get_tensor(n, 2);
    s.features = r.get_tensor(n, d);
    s.expression = r.get_tensor(n, g);
    s.gene_names.reserve(g);
    for (std::uint64_t i = 0; i < g; ++i) s.gene_names.push_back(r.get_str(r.get<std::uint32_t>()));
    s.id = r.get_str(r.get<std::uint32_t>());
    if (r.pos != body.size()) throw DataError("slide: trailing bytes in '" + path + "'");
    s.validate();
    return s;
}

void slide_to_csv(const SlideData& slide, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("slide: cannot open '" + path + "' for writing");
    out << "spot_id,x,y";
    for (const auto& name : slide.gene_names) out << ',' << name;
    out << '\n';
    char num[64];
    for (std::size_t i = 0; i < slide.spots(); ++i) {
        out << i;
        std::snprintf(num, sizeof num, ",%.17g,%.17g", slide.coords.at(i, 0), slide.coords.at(i, 1));
        out << num;
        for (std::size_t j = 0; j < slide.genes(); ++j) {
            std::snprintf(num, sizeof num, ",%.17g", slide.expression.at(i, j));
            out << num;
        }
        out << '\n';
    }
    if (!out) throw DataError("slide: write failed for '" + path + "'");
}

}  // namespace slideflow
