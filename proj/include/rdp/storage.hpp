#pragma once

// RDPT table files. Little-endian, no padding:
//
//   magic "RDPT" | version u16 | n_bits u8 | k_bits u8 | c f64 | t_hat u32 |
//   l u16 | table_index u16 | m0_tilde u64 | seed u64 |
//   function_id (u16 byte length + UTF-8) | m0 u64 | precomp_invocations u64 |
//   m0 x (len u32, ep u64, sp u64) | CRC-64/XZ of all preceding bytes, u64
//
// Version 1 holds rainbow distinguished point tables. Version 2 holds
// baseline tables; their function_id is "<method>/<function>".

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <boost/crc.hpp>

#include "rdp/error.hpp"
#include "rdp/table.hpp"

namespace rdp::storage {

inline constexpr char kMagic[4] = {'R', 'D', 'P', 'T'};
inline constexpr std::uint16_t kVersionRainbowDp = 1;
inline constexpr std::uint16_t kVersionBaseline = 2;
inline constexpr std::size_t kRecordBytes = 4 + 8 + 8;

/// CRC-64/XZ: polynomial 0x42F0E1EBA9EA3693 (ECMA-182), reflected, init and
/// final xor all ones. Check value for "123456789" is 0x995DC9BBDF1939FA.
inline std::uint64_t crc64(const std::uint8_t* data, std::size_t size) {
    boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, ~0ULL, ~0ULL, true, true> crc;
    crc.process_bytes(data, size);
    return crc.checksum();
}

/// Header fields shared by both file versions.
struct FileHeader {
    std::uint16_t version = kVersionRainbowDp;
    std::uint8_t n_bits = 0;
    std::uint8_t k_bits = 0;
    double c = 0.0;
    std::uint32_t t_hat = 0;
    std::uint16_t l = 0;
    std::uint16_t table_index = 0;
    std::uint64_t m0_tilde = 0;
    std::uint64_t seed = 0;
    std::string function_id;
    std::uint64_t precomp_invocations = 0;

    friend bool operator==(const FileHeader&, const FileHeader&) = default;
};

namespace detail {

class Writer {
public:
    template <typename T>
    void put(T v) {
        static_assert(std::is_integral_v<T>);
        for (std::size_t k = 0; k < sizeof(T); ++k) bytes_.push_back(std::uint8_t(std::uint64_t(v) >> (8 * k)));
    }
    void put_f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
    void put_raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        bytes_.insert(bytes_.end(), b, b + n);
    }
    std::vector<std::uint8_t>& bytes() { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    template <typename T>
    T get(const char* field) {
        need(sizeof(T), field);
        std::uint64_t v = 0;
        for (std::size_t k = 0; k < sizeof(T); ++k) v |= std::uint64_t(bytes_[pos_ + k]) << (8 * k);
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }
    double get_f64(const char* field) { return std::bit_cast<double>(get<std::uint64_t>(field)); }
    std::string get_string(const char* field) {
        const auto n = get<std::uint16_t>(field);
        need(n, field);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    void need(std::size_t n, const char* field) const {
        if (bytes_.size() - pos_ < n) throw LoadError(field, "file truncated");
    }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline std::vector<std::uint8_t> encode(const FileHeader& h, const std::vector<ChainRecord>& records) {
    detail::Writer w;
    w.put_raw(kMagic, 4);
    w.put(h.version);
    w.put(h.n_bits);
    w.put(h.k_bits);
    w.put_f64(h.c);
    w.put(h.t_hat);
    w.put(h.l);
    w.put(h.table_index);
    w.put(h.m0_tilde);
    w.put(h.seed);
    if (h.function_id.size() > 0xffff) throw ConfigError("function_id too long");
    w.put(std::uint16_t(h.function_id.size()));
    w.put_raw(h.function_id.data(), h.function_id.size());
    w.put(std::uint64_t(records.size()));
    w.put(h.precomp_invocations);
    for (const auto& r : records) {
        w.put(r.len);
        w.put(r.ep.value);
        w.put(r.sp.value);
    }
    const auto sum = crc64(w.bytes().data(), w.bytes().size());
    w.put(sum);
    return std::move(w.bytes());
}

/// Parses and integrity-checks a file image. Semantic validation of the
/// header is left to the typed loaders.
inline std::pair<FileHeader, std::vector<ChainRecord>> decode(const std::vector<std::uint8_t>& bytes) {
    detail::Reader r(bytes);
    r.need(4, "magic");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw LoadError("magic", "not an RDPT file");
    (void)r.get<std::uint32_t>("magic");

    FileHeader h;
    h.version = r.get<std::uint16_t>("version");
    if (h.version != kVersionRainbowDp && h.version != kVersionBaseline)
        throw LoadError("version", "unsupported format version " + std::to_string(h.version));
    h.n_bits = r.get<std::uint8_t>("n_bits");
    h.k_bits = r.get<std::uint8_t>("k_bits");
    h.c = r.get_f64("c");
    h.t_hat = r.get<std::uint32_t>("t_hat");
    h.l = r.get<std::uint16_t>("l");
    h.table_index = r.get<std::uint16_t>("table_index");
    h.m0_tilde = r.get<std::uint64_t>("m0_tilde");
    h.seed = r.get<std::uint64_t>("seed");
    h.function_id = r.get_string("function_id");
    const auto m0 = r.get<std::uint64_t>("m0");
    h.precomp_invocations = r.get<std::uint64_t>("precomp_invocations");

    if (m0 > (r.remaining() / kRecordBytes)) throw LoadError("records", "file truncated: header declares " + std::to_string(m0) + " records");
    const std::size_t checksum_at = r.pos() + m0 * kRecordBytes;
    if (bytes.size() - checksum_at < 8) throw LoadError("checksum", "file truncated before checksum");
    if (bytes.size() - checksum_at > 8) throw LoadError("checksum", "trailing bytes after checksum");

    std::vector<ChainRecord> records;
    records.reserve(m0);
    for (std::uint64_t k = 0; k < m0; ++k) {
        ChainRecord rec;
        rec.len = r.get<std::uint32_t>("records");
        rec.ep = Point{r.get<std::uint64_t>("records")};
        rec.sp = Point{r.get<std::uint64_t>("records")};
        records.push_back(rec);
    }
    const auto expected = crc64(bytes.data(), checksum_at);
    const auto stored = r.get<std::uint64_t>("checksum");
    if (expected != stored) throw LoadError("checksum", "checksum mismatch");
    return {std::move(h), std::move(records)};
}

inline void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write to '" + path.string() + "' failed");
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("path", "cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline FileHeader header_of(const PrecompTable& table) {
    const auto& p = table.params;
    FileHeader h;
    h.version = kVersionRainbowDp;
    h.n_bits = std::uint8_t(p.n_bits);
    h.k_bits = std::uint8_t(p.k_bits);
    h.c = p.c;
    h.t_hat = p.t_hat;
    h.l = std::uint16_t(p.l);
    h.table_index = std::uint16_t(table.table_index);
    h.m0_tilde = p.m0_tilde;
    h.seed = p.seed;
    h.function_id = p.function_id;
    h.precomp_invocations = table.precomp_invocations;
    return h;
}

inline std::vector<std::uint8_t> serialize(const PrecompTable& table) { return encode(header_of(table), table.records); }

/// Decodes a version-1 image into a validated table.
inline PrecompTable deserialize(const std::vector<std::uint8_t>& bytes) {
    auto [h, records] = decode(bytes);
    if (h.version != kVersionRainbowDp) throw LoadError("version", "expected a rainbow distinguished point table (version 1)");
    if (h.n_bits == 0 || h.n_bits > 62) throw LoadError("n_bits", "n_bits must be in [1, 62]");
    if (h.k_bits == 0 || h.k_bits >= h.n_bits) throw LoadError("k_bits", "validation failed: k_bits must satisfy 0 < k_bits < n_bits");

    SpaceParams p;
    p.n_bits = h.n_bits;
    p.k_bits = h.k_bits;
    p.c = h.c;
    p.t_hat = h.t_hat;
    p.l = h.l;
    p.m0_tilde = h.m0_tilde;
    p.seed = h.seed;
    p.function_id = h.function_id;
    try {
        p.validate();
        (void)function_kind(p.function_id);
    } catch (const ConfigError& e) {
        throw LoadError("params", std::string("validation failed: ") + e.what());
    }
    if (h.table_index >= p.l) throw LoadError("table_index", "table_index must be < l");
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto& rec = records[k];
        if (rec.len < 1 || rec.len > p.t_hat || rec.ep.value >= p.N() || rec.sp.value >= p.N() || !is_dp(rec.ep, p))
            throw LoadError("records", "record " + std::to_string(k) + " out of range");
        if (k > 0 && record_less(rec, records[k - 1])) throw LoadError("records", "records not sorted by (len, ep, sp)");
    }

    PrecompTable table;
    table.params = std::move(p);
    table.table_index = h.table_index;
    table.records = std::move(records);
    table.precomp_invocations = h.precomp_invocations;
    table.rebuild_index();
    return table;
}

inline void save(const PrecompTable& table, const std::filesystem::path& path) { write_file(path, serialize(table)); }

inline PrecompTable load(const std::filesystem::path& path) { return deserialize(read_file(path)); }

} // namespace rdp::storage
