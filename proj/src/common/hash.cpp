#include "staug/common/hash.hpp"

#include <cstdio>
#include <cstring>

namespace staug {

void Fnv1a::update(const void* data, std::size_t size)
{
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        state_ ^= p[i];
        state_ *= 0x100000001b3ULL;
    }
}

void Fnv1a::update(std::string_view bytes) { update(bytes.data(), bytes.size()); }

void Fnv1a::update_u64(std::uint64_t v)
{
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<unsigned char>(v >> (8 * i));
    }
    update(b, 8);
}

void Fnv1a::update_double(double v)
{
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    update_u64(bits);
}

std::string Fnv1a::hex() const { return to_hex(state_); }

std::uint64_t fnv1a(std::string_view bytes)
{
    Fnv1a h;
    h.update(bytes);
    return h.digest();
}

std::string to_hex(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace staug
