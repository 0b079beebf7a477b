#include "icpovm/partition.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace icpovm {

Partition Partition::singletons(int n_sites) {
    Partition p;
    p.m_max = 1;
    for (int i = 0; i < n_sites; ++i) {
        p.groups.push_back({i});
    }
    return p;
}

Partition Partition::single_group(int n_sites) {
    Partition p;
    p.m_max = n_sites;
    std::vector<int> all(n_sites);
    std::iota(all.begin(), all.end(), 0);
    p.groups.push_back(std::move(all));
    return p;
}

void Partition::validate(int n) {
    std::vector<bool> seen(n, false);
    for (auto& g : groups) {
        if (g.empty()) {
            throw std::invalid_argument("Partition: empty group");
        }
        if (static_cast<int>(g.size()) > m_max) {
            throw std::invalid_argument("Partition: group exceeds m_max");
        }
        std::sort(g.begin(), g.end());
        for (int q : g) {
            if (q < 0 || q >= n || seen[q]) {
                throw std::invalid_argument("Partition: groups must disjointly cover 0..N-1");
            }
            seen[q] = true;
        }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw std::invalid_argument("Partition: groups do not cover all sites");
    }
    std::sort(groups.begin(), groups.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

int Partition::n_sites() const {
    int n = 0;
    for (const auto& g : groups) {
        n += static_cast<int>(g.size());
    }
    return n;
}

}  // namespace icpovm
