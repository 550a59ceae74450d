#pragma once

// Hunt-Szymanski longest common subsequence.
//
// For every element of `a` the positions in `b` holding an equal element are
// visited in descending order, and a threshold array thresh[k] (the smallest
// b-position ending a common subsequence of length k+1) is updated by binary
// search. Running time is O((r + n) log n) where r is the number of matching
// position pairs, which is what makes comparing long, mostly distinct test
// outputs cheap.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

namespace mfmine::harness {

struct MatchPair {
    std::size_t a;
    std::size_t b;

    friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

namespace detail {

template <class T, class Hash, class Eq>
std::unordered_map<T, std::vector<std::size_t>, Hash, Eq> match_lists(std::span<const T> b) {
    std::unordered_map<T, std::vector<std::size_t>, Hash, Eq> lists;
    lists.reserve(b.size());
    for (std::size_t j = b.size(); j-- > 0;) {
        lists[b[j]].push_back(j);  // descending positions
    }
    return lists;
}

}  // namespace detail

template <class T, class Hash = std::hash<T>, class Eq = std::equal_to<T>>
std::size_t lcs_length(std::span<const T> a, std::span<const T> b) {
    if (a.empty() || b.empty()) {
        return 0;
    }
    const auto lists = detail::match_lists<T, Hash, Eq>(b);
    std::vector<std::size_t> thresh;
    for (const auto& x : a) {
        const auto it = lists.find(x);
        if (it == lists.end()) {
            continue;
        }
        for (const std::size_t j : it->second) {
            const auto k = std::lower_bound(thresh.begin(), thresh.end(), j);
            if (k == thresh.end()) {
                thresh.push_back(j);
            } else if (*k > j) {
                *k = j;
            }
        }
    }
    return thresh.size();
}

/// One longest common subsequence as ascending (a, b) index pairs.
template <class T, class Hash = std::hash<T>, class Eq = std::equal_to<T>>
std::vector<MatchPair> lcs_pairs(std::span<const T> a, std::span<const T> b) {
    if (a.empty() || b.empty()) {
        return {};
    }
    const auto lists = detail::match_lists<T, Hash, Eq>(b);

    struct Node {
        std::size_t a;
        std::size_t b;
        std::ptrdiff_t prev;
    };
    std::vector<Node> nodes;
    std::vector<std::size_t> thresh;
    std::vector<std::ptrdiff_t> link;  // link[k]: node ending the current length-(k+1) chain

    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto it = lists.find(a[i]);
        if (it == lists.end()) {
            continue;
        }
        for (const std::size_t j : it->second) {
            const auto pos = std::lower_bound(thresh.begin(), thresh.end(), j);
            const auto k = static_cast<std::size_t>(pos - thresh.begin());
            if (pos != thresh.end() && *pos <= j) {
                continue;
            }
            const std::ptrdiff_t prev = k > 0 ? link[k - 1] : -1;
            nodes.push_back({i, j, prev});
            const auto id = static_cast<std::ptrdiff_t>(nodes.size() - 1);
            if (pos == thresh.end()) {
                thresh.push_back(j);
                link.push_back(id);
            } else {
                *pos = j;
                link[k] = id;
            }
        }
    }

    std::vector<MatchPair> out(thresh.size());
    std::ptrdiff_t cur = link.empty() ? -1 : link.back();
    for (std::size_t k = out.size(); k-- > 0;) {
        out[k] = {nodes[static_cast<std::size_t>(cur)].a, nodes[static_cast<std::size_t>(cur)].b};
        cur = nodes[static_cast<std::size_t>(cur)].prev;
    }
    return out;
}

template <class T>
std::size_t lcs_length(const std::vector<T>& a, const std::vector<T>& b) {
    return lcs_length<T>(std::span<const T>(a), std::span<const T>(b));
}

template <class T>
std::vector<MatchPair> lcs_pairs(const std::vector<T>& a, const std::vector<T>& b) {
    return lcs_pairs<T>(std::span<const T>(a), std::span<const T>(b));
}

}  // namespace mfmine::harness
