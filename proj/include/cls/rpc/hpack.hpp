#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cls::rpc {

using Header = std::pair<std::string, std::string>;
using HeaderList = std::vector<Header>;

class HpackError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string huffman_encode(std::string_view in);
/// Throws HpackError on invalid padding or an encoded EOS.
std::string huffman_decode(std::string_view in);

/// Header block decoder with its dynamic table. One per connection direction.
class HpackDecoder {
public:
    explicit HpackDecoder(std::size_t max_table_size = 4096) : max_size_(max_table_size), limit_(max_table_size) {}

    HeaderList decode(std::string_view block);

    std::size_t table_size() const { return size_; }
    std::size_t table_entries() const { return table_.size(); }

private:
    Header lookup(std::uint64_t index) const;
    void insert(Header h);
    void evict_to(std::size_t cap);

    std::deque<Header> table_;  // newest first
    std::size_t size_ = 0;
    std::size_t max_size_;  // current, set by size updates
    std::size_t limit_;     // ceiling advertised in SETTINGS
};

/// Stateless encoder: every field is a literal without indexing, with the
/// name indexed from the static table when possible.
class HpackEncoder {
public:
    explicit HpackEncoder(bool huffman = false) : huffman_(huffman) {}
    std::string encode(const HeaderList& headers) const;

private:
    bool huffman_;
};

}  // namespace cls::rpc
