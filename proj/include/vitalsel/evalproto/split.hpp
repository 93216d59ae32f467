#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "vitalsel/core/error.hpp"
#include "vitalsel/core/random.hpp"

namespace vitalsel {

// Disjoint subject partition. The test group (and, during selection, the
// validation group) is the set of users the identification model must tell apart.
struct SplitSpec {
    std::vector<int> train_subjects;
    std::vector<int> validation_subjects;
    std::vector<int> test_subjects;
    int group_size = 4;

    [[nodiscard]] bool disjoint() const
    {
        std::set<int> seen;
        for (const auto* part : {&train_subjects, &validation_subjects, &test_subjects}) {
            for (int s : *part) {
                if (!seen.insert(s).second) {
                    return false;
                }
            }
        }
        return true;
    }

    friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

// Uniform random partition into (train, validation, test) of the given sizes.
// Each part is returned sorted.
inline SplitSpec split_subjects(std::span<const int> subject_ids, std::uint64_t seed, std::array<int, 3> sizes = {42, 4, 4})
{
    for (int s : sizes) {
        require(s >= 0, "split_subjects: negative part size");
    }
    const auto total = static_cast<std::size_t>(sizes[0] + sizes[1] + sizes[2]);
    if (total != subject_ids.size()) {
        throw InvalidArgument("split_subjects: sizes sum to " + std::to_string(total) + " but " + std::to_string(subject_ids.size()) +
                              " subjects were given");
    }
    std::vector<int> ids(subject_ids.begin(), subject_ids.end());
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
        throw InvalidArgument("split_subjects: duplicate subject id");
    }
    auto rng = make_rng(seed, {0x73706c6974ULL});
    std::shuffle(ids.begin(), ids.end(), rng);

    SplitSpec out;
    auto take = [&](std::size_t from, int n) {
        std::vector<int> part(ids.begin() + static_cast<std::ptrdiff_t>(from), ids.begin() + static_cast<std::ptrdiff_t>(from) + n);
        std::sort(part.begin(), part.end());
        return part;
    };
    out.train_subjects = take(0, sizes[0]);
    out.validation_subjects = take(static_cast<std::size_t>(sizes[0]), sizes[1]);
    out.test_subjects = take(static_cast<std::size_t>(sizes[0] + sizes[1]), sizes[2]);
    out.group_size = sizes[2];
    return out;
}

} // namespace vitalsel
