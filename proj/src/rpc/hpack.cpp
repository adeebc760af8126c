#include "cls/rpc/hpack.hpp"

#include <array>
#include <unordered_map>

namespace cls::rpc {

namespace {

struct Code {
    std::uint32_t bits;
    int len;
};

constexpr Code kHuffman[257] = {
#include "huffman_table.inc"
};

constexpr std::array<std::pair<std::string_view, std::string_view>, 61> kStatic = {{
    {":authority", ""},
    {":method", "GET"},
    {":method", "POST"},
    {":path", "/"},
    {":path", "/index.html"},
    {":scheme", "http"},
    {":scheme", "https"},
    {":status", "200"},
    {":status", "204"},
    {":status", "206"},
    {":status", "304"},
    {":status", "400"},
    {":status", "404"},
    {":status", "500"},
    {"accept-charset", ""},
    {"accept-encoding", "gzip, deflate"},
    {"accept-language", ""},
    {"accept-ranges", ""},
    {"accept", ""},
    {"access-control-allow-origin", ""},
    {"age", ""},
    {"allow", ""},
    {"authorization", ""},
    {"cache-control", ""},
    {"content-disposition", ""},
    {"content-encoding", ""},
    {"content-language", ""},
    {"content-length", ""},
    {"content-location", ""},
    {"content-range", ""},
    {"content-type", ""},
    {"cookie", ""},
    {"date", ""},
    {"etag", ""},
    {"expect", ""},
    {"expires", ""},
    {"from", ""},
    {"host", ""},
    {"if-match", ""},
    {"if-modified-since", ""},
    {"if-none-match", ""},
    {"if-range", ""},
    {"if-unmodified-since", ""},
    {"last-modified", ""},
    {"link", ""},
    {"location", ""},
    {"max-forwards", ""},
    {"proxy-authenticate", ""},
    {"proxy-authorization", ""},
    {"range", ""},
    {"referer", ""},
    {"refresh", ""},
    {"retry-after", ""},
    {"server", ""},
    {"set-cookie", ""},
    {"strict-transport-security", ""},
    {"transfer-encoding", ""},
    {"user-agent", ""},
    {"vary", ""},
    {"via", ""},
    {"www-authenticate", ""},
}};

const std::unordered_map<std::uint64_t, int>& decode_map() {
    static const auto m = [] {
        std::unordered_map<std::uint64_t, int> out;
        for (int s = 0; s < 257; ++s)
            out.emplace((static_cast<std::uint64_t>(kHuffman[s].len) << 32) | kHuffman[s].bits, s);
        return out;
    }();
    return m;
}

class Reader {
public:
    explicit Reader(std::string_view d) : d_(d) {}
    bool done() const { return pos_ >= d_.size(); }
    std::uint8_t peek() const {
        if (done()) throw HpackError("truncated header block");
        return static_cast<std::uint8_t>(d_[pos_]);
    }
    std::uint8_t next() {
        const auto b = peek();
        ++pos_;
        return b;
    }

    std::uint64_t integer(int prefix_bits) {
        const std::uint64_t mask = (1u << prefix_bits) - 1;
        std::uint64_t v = next() & mask;
        if (v < mask) return v;
        for (int shift = 0;; shift += 7) {
            if (shift > 56) throw HpackError("integer overflow");
            const auto b = next();
            v += static_cast<std::uint64_t>(b & 0x7f) << shift;
            if (!(b & 0x80)) return v;
        }
    }

    std::string string() {
        const bool huff = peek() & 0x80;
        const auto len = integer(7);
        if (len > d_.size() - pos_) throw HpackError("string exceeds block");
        const auto raw = d_.substr(pos_, len);
        pos_ += len;
        return huff ? huffman_decode(raw) : std::string(raw);
    }

private:
    std::string_view d_;
    std::size_t pos_ = 0;
};

void put_integer(std::string& out, std::uint64_t v, int prefix_bits, std::uint8_t first) {
    const std::uint64_t mask = (1u << prefix_bits) - 1;
    if (v < mask) {
        out.push_back(static_cast<char>(first | v));
        return;
    }
    out.push_back(static_cast<char>(first | mask));
    v -= mask;
    while (v >= 0x80) {
        out.push_back(static_cast<char>((v & 0x7f) | 0x80));
        v >>= 7;
    }
    out.push_back(static_cast<char>(v));
}

void put_string(std::string& out, std::string_view s, bool huffman) {
    if (huffman) {
        const auto h = huffman_encode(s);
        put_integer(out, h.size(), 7, 0x80);
        out += h;
    } else {
        put_integer(out, s.size(), 7, 0x00);
        out += s;
    }
}

std::size_t entry_size(const Header& h) { return h.first.size() + h.second.size() + 32; }

}  // namespace

std::string huffman_encode(std::string_view in) {
    std::string out;
    std::uint64_t acc = 0;
    int bits = 0;
    for (unsigned char c : in) {
        const auto& code = kHuffman[c];
        acc = (acc << code.len) | code.bits;
        bits += code.len;
        while (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<char>(acc >> bits));
        }
        acc &= (std::uint64_t{1} << bits) - 1;
    }
    if (bits > 0) out.push_back(static_cast<char>((acc << (8 - bits)) | ((1u << (8 - bits)) - 1)));
    return out;
}

std::string huffman_decode(std::string_view in) {
    const auto& m = decode_map();
    std::string out;
    std::uint64_t code = 0;
    int len = 0;
    for (unsigned char byte : in) {
        for (int b = 7; b >= 0; --b) {
            code = (code << 1) | ((byte >> b) & 1u);
            ++len;
            if (len < 5) continue;
            if (auto it = m.find((static_cast<std::uint64_t>(len) << 32) | code); it != m.end()) {
                if (it->second == 256) throw HpackError("EOS in huffman string");
                out.push_back(static_cast<char>(it->second));
                code = 0;
                len = 0;
            } else if (len > 30) {
                throw HpackError("invalid huffman code");
            }
        }
    }
    // Padding: at most 7 bits, all ones.
    if (len > 7 || code != (std::uint64_t{1} << len) - 1) throw HpackError("invalid huffman padding");
    return out;
}

Header HpackDecoder::lookup(std::uint64_t index) const {
    if (index == 0) throw HpackError("index 0");
    if (index <= kStatic.size()) return {std::string(kStatic[index - 1].first), std::string(kStatic[index - 1].second)};
    const auto d = index - kStatic.size() - 1;
    if (d >= table_.size()) throw HpackError("index out of range");
    return table_[d];
}

void HpackDecoder::evict_to(std::size_t cap) {
    while (size_ > cap && !table_.empty()) {
        size_ -= entry_size(table_.back());
        table_.pop_back();
    }
}

void HpackDecoder::insert(Header h) {
    const auto sz = entry_size(h);
    if (sz > max_size_) {
        table_.clear();
        size_ = 0;
        return;
    }
    evict_to(max_size_ - sz);
    size_ += sz;
    table_.push_front(std::move(h));
}

HeaderList HpackDecoder::decode(std::string_view block) {
    HeaderList out;
    Reader r(block);
    bool fields_seen = false;
    while (!r.done()) {
        const auto b = r.peek();
        if (b & 0x80) {
            out.push_back(lookup(r.integer(7)));
            fields_seen = true;
        } else if ((b & 0xc0) == 0x40) {
            const auto idx = r.integer(6);
            std::string name = idx ? lookup(idx).first : r.string();
            Header h{std::move(name), r.string()};
            out.push_back(h);
            insert(std::move(h));
            fields_seen = true;
        } else if ((b & 0xe0) == 0x20) {
            if (fields_seen) throw HpackError("table size update after header field");
            const auto sz = r.integer(5);
            if (sz > limit_) throw HpackError("table size update above limit");
            max_size_ = sz;
            evict_to(max_size_);
        } else {
            // Literal without indexing (0000) or never indexed (0001).
            const auto idx = r.integer(4);
            std::string name = idx ? lookup(idx).first : r.string();
            out.emplace_back(std::move(name), r.string());
            fields_seen = true;
        }
    }
    return out;
}

std::string HpackEncoder::encode(const HeaderList& headers) const {
    std::string out;
    for (const auto& [name, value] : headers) {
        std::size_t full = 0, name_only = 0;
        for (std::size_t i = 0; i < kStatic.size(); ++i) {
            if (kStatic[i].first != name) continue;
            if (!name_only) name_only = i + 1;
            if (kStatic[i].second == value) {
                full = i + 1;
                break;
            }
        }
        if (full) {
            put_integer(out, full, 7, 0x80);
        } else if (name_only) {
            put_integer(out, name_only, 4, 0x00);
            put_string(out, value, huffman_);
        } else {
            out.push_back(0x00);
            put_string(out, name, huffman_);
            put_string(out, value, huffman_);
        }
    }
    return out;
}

}  // namespace cls::rpc
