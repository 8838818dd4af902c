#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "spectrace/errors.hpp"
#include "spectrace/hash.hpp"
#include "spectrace/text.hpp"

namespace spectrace {

using EmbedFn = std::function<std::vector<double>(std::string_view)>;

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline double l2_norm(const std::vector<double>& v) {
    return std::sqrt(dot(v, v));
}

inline void l2_normalize(std::vector<double>& v) {
    double n = l2_norm(v);
    if (n > 0.0) {
        for (auto& x : v) x /= n;
    }
}

// Stored vectors are unit-norm, so cosine reduces to the dot product.
inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double na = l2_norm(a), nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

// Deterministic hash-projection embedder: each token maps onto a fixed
// pseudo-random direction seeded by its hash; the text embedding is the
// normalized token sum. Texts with overlapping vocabulary land close,
// disjoint vocabularies land near-orthogonal. Stands in for external
// embedding models in tests and offline runs.
inline EmbedFn make_hash_embedder(int dim) {
    return [dim](std::string_view text) -> std::vector<double> {
        if (dim <= 0) throw EmbeddingFailure("embedding dimension must be positive");
        std::vector<double> acc(static_cast<std::size_t>(dim), 0.0);
        bool any = false;
        for (const auto& tok : tokens(text)) {
            any = true;
            std::uint64_t state = fnv1a64(tok);
            for (int i = 0; i < dim; ++i) {
                std::uint64_t r = splitmix64(state);
                // map to [-1, 1)
                acc[std::size_t(i)] += double(std::int64_t(r >> 11)) / double(1ll << 52) - 1.0;
            }
        }
        if (!any) {
            acc[0] = 1.0; // canonical unit vector for empty text
            return acc;
        }
        l2_normalize(acc);
        return acc;
    };
}

} // namespace spectrace
