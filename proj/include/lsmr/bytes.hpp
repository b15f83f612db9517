#pragma once

#include <cstdint>
#include <cstring>
#include <utility>
#include <string>
#include <string_view>

#include "lsmr/command.hpp"

namespace lsmr::bytes {

inline void put(std::string& out, std::uint64_t v) {
    out.append(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void put(std::string& out, std::string_view s) {
    put(out, static_cast<std::uint64_t>(s.size()));
    out.append(s);
}
inline void put(std::string& out, CommandId id) {
    put(out, (static_cast<std::uint64_t>(id.submitter) << 32) | id.seq);
}
inline void put(std::string& out, const IdSet& ids) {
    put(out, static_cast<std::uint64_t>(ids.size()));
    for (CommandId id : ids) put(out, id);
}
inline void put(std::string& out, const DepsValue& v) {
    put(out, static_cast<std::uint64_t>(v.kind));
    if (v.is_committed()) put(out, v.ids);
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// splitmix finalizer, used to derive a second independent hash lane
inline std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Two hash lanes over 8-byte words; much faster than fnv1a on long state strings.
inline std::pair<std::uint64_t, std::uint64_t> hash128(std::string_view s) {
    std::uint64_t a = 0x243f6a8885a308d3ull ^ s.size();
    std::uint64_t b = 0x13198a2e03707344ull;
    std::size_t i = 0;
    for (; i + 8 <= s.size(); i += 8) {
        std::uint64_t w;
        std::memcpy(&w, s.data() + i, 8);
        a = (a ^ w) * 0x9fb21c651e98df25ull;
        a ^= a >> 29;
        b = (b + w) * 0xc2b2ae3d27d4eb4full;
        b = (b << 31) | (b >> 33);
    }
    std::uint64_t tail = 0;
    std::memcpy(&tail, s.data() + i, s.size() - i);
    return {mix(a ^ tail), mix(b + tail + 0x9e37)};
}

}  // namespace lsmr::bytes
