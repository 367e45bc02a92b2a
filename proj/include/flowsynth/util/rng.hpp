#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowsynth {

// Deterministic random stream. Distributions are derived from the raw engine
// output by hand so that results are identical across standard libraries and
// so the number of engine draws per sample is fixed (needed to restore a
// stream from a saved draw count).
class Rng {
public:
    Rng() : Rng(0) {}
    explicit Rng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t draws() const { return draws_; }

    std::uint64_t next_u64() {
        ++draws_;
        return eng_();
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0, 1): endpoints excluded so log/log-log transforms stay finite
    double uniform_open() {
        double u = uniform();
        if (u < 1e-12) u = 1e-12;
        if (u > 1.0 - 1e-12) u = 1.0 - 1e-12;
        return u;
    }

    // standard normal via Box-Muller; always consumes exactly two engine draws
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Gumbel(0,1) sample: -log(-log(U))
    double gumbel() { return -std::log(-std::log(uniform_open())); }

    // unbiased integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Fisher-Yates
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices from [0, n), order arising from a partial shuffle
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

    // restore to a previously recorded draw count
    void restore(std::uint64_t draw_count) {
        eng_.seed(seed_);
        eng_.discard(draw_count);
        draws_ = draw_count;
    }

private:
    std::uint64_t seed_ = 0;
    std::uint64_t draws_ = 0;
    std::mt19937_64 eng_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Named substreams derived from one master seed. Every stochastic choice in a
// run draws from a named stream, so turning a component off never shifts the
// randomness seen by the others.
class RngHub {
public:
    RngHub() : RngHub(0) {}
    explicit RngHub(std::uint64_t master_seed) : master_(master_seed) {}

    std::uint64_t master_seed() const { return master_; }

    Rng& stream(const std::string& name) {
        auto it = streams_.find(name);
        if (it == streams_.end()) {
            it = streams_.emplace(name, Rng(derive_seed(name))).first;
        }
        return it->second;
    }

    std::uint64_t derive_seed(const std::string& name) const {
        return splitmix64(master_ ^ fnv1a64(name));
    }

    std::map<std::string, std::uint64_t> draw_counts() const {
        std::map<std::string, std::uint64_t> out;
        for (const auto& [name, rng] : streams_) out[name] = rng.draws();
        return out;
    }

    void restore(const std::map<std::string, std::uint64_t>& counts) {
        for (const auto& [name, n] : counts) stream(name).restore(n);
    }

private:
    std::uint64_t master_;
    std::map<std::string, Rng> streams_;
};

}  // namespace flowsynth
