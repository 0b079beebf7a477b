#pragma once

#include <vector>

namespace icpovm {

/// Partition of the site indices {0..N-1} into disjoint covering groups,
/// each of size at most m_max. Groups are kept sorted ascending and ordered
/// by their smallest element (canonical form).
struct Partition {
    std::vector<std::vector<int>> groups;
    int m_max = 1;

    static Partition singletons(int n_sites);
    static Partition single_group(int n_sites);
    /// Sorts into canonical form and checks disjoint cover + size bound.
    void validate(int n_sites);

    int n_sites() const;
};

}  // namespace icpovm
