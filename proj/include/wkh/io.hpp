#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wkh/field.hpp"
#include "wkh/grid.hpp"
#include "wkh/solver.hpp"
#include "wkh/weights.hpp"

namespace wkh {

inline constexpr std::uint32_t field_file_version = 1;

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    os.write(b, 4);
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    os.write(b, 8);
}

inline void put_f64(std::ostream& os, double x) { put_u64(os, std::bit_cast<std::uint64_t>(x)); }

inline std::uint32_t get_u32(std::istream& is) {
    char b[4];
    is.read(b, 4);
    if (!is) throw std::runtime_error("field file: unexpected end of data");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
}

inline std::uint64_t get_u64(std::istream& is) {
    char b[8];
    is.read(b, 8);
    if (!is) throw std::runtime_error("field file: unexpected end of data");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
}

inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

// fixed-schema scalar lookup in a small JSON document
inline double json_number(const std::string& text, const std::string& key) {
    const std::string needle = "\"" + key + "\"";
    auto pos = text.find(needle);
    if (pos == std::string::npos)
        throw std::runtime_error("sidecar: missing key \"" + key + "\"");
    pos = text.find(':', pos + needle.size());
    if (pos == std::string::npos) throw std::runtime_error("sidecar: malformed document");
    ++pos;
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    double out = 0.0;
    const auto res = std::from_chars(text.data() + pos, text.data() + text.size(), out);
    if (res.ec != std::errc{}) throw std::runtime_error("sidecar: bad number for \"" + key + "\"");
    return out;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream is(p);
    if (!is) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace detail

// Flat binary layout: magic, version, grid header (little-endian), then the
// row-major node values. Only grid-backed fields are serializable.
inline void write_field(const std::filesystem::path& path, const DistributionField& f) {
    if (!f.is_grid()) throw std::invalid_argument("write_field: grid-backed fields only");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    const GridSpec& g = f.spec();
    os.write("WKHF", 4);
    detail::put_u32(os, field_file_version);
    detail::put_u32(os, static_cast<std::uint32_t>(g.nx));
    detail::put_u32(os, static_cast<std::uint32_t>(g.nv));
    detail::put_u32(os, static_cast<std::uint32_t>(g.layout));
    detail::put_f64(os, g.x_max);
    detail::put_f64(os, g.v_max);
    const auto& vals = f.values();
    detail::put_u64(os, vals.size());
    for (double v : vals) detail::put_f64(os, v);
    if (!os) throw std::runtime_error("write failed for " + path.string());
}

inline DistributionField read_field(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "WKHF")
        throw std::runtime_error("field file: bad magic in " + path.string());
    if (detail::get_u32(is) != field_file_version)
        throw std::runtime_error("field file: unsupported version in " + path.string());
    GridSpec g;
    g.nx = static_cast<int>(detail::get_u32(is));
    g.nv = static_cast<int>(detail::get_u32(is));
    g.layout = static_cast<NodeLayout>(detail::get_u32(is));
    g.x_max = detail::get_f64(is);
    g.v_max = detail::get_f64(is);
    g.validate();
    const std::uint64_t count = detail::get_u64(is);
    if (count != static_cast<std::uint64_t>(g.node_count()))
        throw std::runtime_error("field file: value count does not match the grid");
    std::vector<double> vals(count);
    for (auto& v : vals) v = detail::get_f64(is);
    return DistributionField::grid(g, std::move(vals));
}

inline void write_weights_sidecar(const std::filesystem::path& path, const WeightParams& w,
                                  double t = 0.0) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "{\n  \"t\": %.17g,\n  \"p\": %.17g,\n  \"q\": %.17g,\n  \"alpha\": %.17g,\n"
                  "  \"beta\": %.17g,\n  \"mu\": %.17g\n}\n",
                  t, w.p, w.q, w.alpha, w.beta, w.mu);
    os << buf;
}

inline WeightParams read_weights_sidecar(const std::filesystem::path& path, double* t = nullptr) {
    const std::string text = detail::read_text(path);
    WeightParams w;
    w.p = detail::json_number(text, "p");
    w.q = detail::json_number(text, "q");
    w.alpha = detail::json_number(text, "alpha");
    w.beta = detail::json_number(text, "beta");
    w.mu = detail::json_number(text, "mu");
    if (t) *t = detail::json_number(text, "t");
    return w;
}

// One binary file per stored slice, each with a sidecar carrying the slice
// time and the weight parameters.
inline void write_state(const std::filesystem::path& dir, const PicardState& st,
                        const WeightParams& w) {
    if (st.empty()) throw std::invalid_argument("write_state: empty state");
    std::filesystem::create_directories(dir);
    char name[32];
    for (std::size_t i = 0; i < st.slices.size(); ++i) {
        std::snprintf(name, sizeof name, "slice_%03zu", i);
        write_field(dir / (std::string(name) + ".wkh"), st.slices[i]);
        write_weights_sidecar(dir / (std::string(name) + ".json"), w, st.times[i]);
    }
}

inline PicardState read_state(const std::filesystem::path& dir, WeightParams* w = nullptr) {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(dir))
        for (const auto& e : std::filesystem::directory_iterator(dir))
            if (e.path().extension() == ".wkh") files.push_back(e.path());
    if (files.empty()) throw std::runtime_error("read_state: no slices in " + dir.string());
    std::sort(files.begin(), files.end());
    PicardState st;
    for (const auto& f : files) {
        st.slices.push_back(read_field(f));
        double t = 0.0;
        auto sidecar = f;
        sidecar.replace_extension(".json");
        const WeightParams wp = read_weights_sidecar(sidecar, &t);
        st.times.push_back(t);
        if (w) *w = wp;
    }
    return st;
}

} // namespace wkh
