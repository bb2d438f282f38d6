#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace staug {

// 64-bit FNV-1a. Stable across platforms; used for dataset and plan fingerprints.
class Fnv1a {
public:
    void update(std::string_view bytes);
    void update(const void* data, std::size_t size);
    void update_u64(std::uint64_t v);
    void update_double(double v);

    std::uint64_t digest() const { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::uint64_t fnv1a(std::string_view bytes);
std::string to_hex(std::uint64_t v);

} // namespace staug
