#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vitalsel/core/error.hpp"

namespace vitalsel {

// Binary chromosome over the feature catalog; bit i set selects feature i.
class FeatureMask {
public:
    FeatureMask() = default;
    explicit FeatureMask(std::size_t n, bool value = false) : bits_(n, value ? 1 : 0) {}

    static FeatureMask from_string(std::string_view s)
    {
        FeatureMask m(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] != '0' && s[i] != '1') {
                throw InvalidArgument("FeatureMask: expected only '0'/'1' characters");
            }
            m.bits_[i] = s[i] == '1' ? 1 : 0;
        }
        return m;
    }

    static FeatureMask from_indices(std::size_t n, std::span<const std::size_t> set)
    {
        FeatureMask m(n);
        for (auto i : set) {
            require(i < n, "FeatureMask: index out of range");
            m.bits_[i] = 1;
        }
        return m;
    }

    [[nodiscard]] std::size_t size() const { return bits_.size(); }
    [[nodiscard]] bool operator[](std::size_t i) const { return bits_[i] != 0; }
    void set(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }
    void flip(std::size_t i) { bits_[i] ^= 1; }

    [[nodiscard]] std::size_t count() const
    {
        std::size_t c = 0;
        for (auto b : bits_) {
            c += b;
        }
        return c;
    }

    [[nodiscard]] bool none() const { return count() == 0; }

    [[nodiscard]] std::vector<std::size_t> indices() const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < bits_.size(); ++i) {
            if (bits_[i] != 0) {
                out.push_back(i);
            }
        }
        return out;
    }

    [[nodiscard]] std::string to_string() const
    {
        std::string s(bits_.size(), '0');
        for (std::size_t i = 0; i < bits_.size(); ++i) {
            if (bits_[i] != 0) {
                s[i] = '1';
            }
        }
        return s;
    }

    // Bit i of the integer becomes bit i of the mask.
    static FeatureMask from_bits(std::uint64_t value, std::size_t n)
    {
        FeatureMask m(n);
        for (std::size_t i = 0; i < n && i < 64; ++i) {
            m.bits_[i] = (value >> i) & 1U;
        }
        return m;
    }

    // True when every selected bit of *this is also selected in other.
    [[nodiscard]] bool is_subset_of(const FeatureMask& other) const
    {
        require(size() == other.size(), "FeatureMask: length mismatch");
        for (std::size_t i = 0; i < bits_.size(); ++i) {
            if (bits_[i] != 0 && other.bits_[i] == 0) {
                return false;
            }
        }
        return true;
    }

    friend bool operator==(const FeatureMask&, const FeatureMask&) = default;
    friend auto operator<=>(const FeatureMask&, const FeatureMask&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

} // namespace vitalsel
