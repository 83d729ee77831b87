#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tcnlm/array.hpp"

namespace tcnlm {

// Deterministic random stream. Normal draws use explicit Box-Muller instead
// of std::normal_distribution, whose output sequence is implementation
// defined; every draw here depends only on the seed.
class RngStream {
public:
    explicit RngStream(uint64_t seed) : engine_(seed) {}

    double uniform() {  // [0, 1)
        return (engine_() >> 11) * (1.0 / 9007199254740992.0);  // 53 random bits
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(engine_() % static_cast<uint64_t>(hi - lo + 1));
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 1e-300) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    Array normal_array(int rows, int cols, double stddev = 1.0, double mean = 0.0) {
        Array a(rows, cols);
        for (int i = 0; i < a.size(); ++i) a[i] = mean + stddev * normal();
        return a;
    }

    Array uniform_array(int rows, int cols, double lo, double hi) {
        Array a(rows, cols);
        for (int i = 0; i < a.size(); ++i) a[i] = uniform(lo, hi);
        return a;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {  // Fisher-Yates
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = engine_() % i;
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace tcnlm
