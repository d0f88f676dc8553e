#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dynet::detail {

/// Binary indexed tree over nonnegative weights with weighted sampling.
template <class T>
class Fenwick {
public:
    explicit Fenwick(std::size_t n)
        : tree_(n + 1, T{})
        , value_(n, T{})
    {
        while (top_ * 2 <= n)
            top_ *= 2;
    }

    std::size_t size() const { return value_.size(); }
    T value(std::size_t i) const { return value_[i]; }
    T total() const { return total_; }

    void add(std::size_t i, T delta)
    {
        value_[i] += delta;
        total_ += delta;
        for (std::size_t x = i + 1; x < tree_.size(); x += x & (~x + 1))
            tree_[x] += delta;
    }

    void set(std::size_t i, T v) { add(i, v - value_[i]); }

    /// Smallest index whose inclusive prefix sum exceeds `target`, for
    /// 0 <= target < total().
    std::size_t find(T target) const
    {
        std::size_t pos = 0;
        for (std::size_t step = top_; step > 0; step /= 2) {
            const std::size_t next = pos + step;
            if (next < tree_.size() && tree_[next] <= target) {
                pos = next;
                target -= tree_[next];
            }
        }
        if (pos >= value_.size())
            pos = value_.size() - 1;
        // Skip zero-weight slots that rounding may land on.
        std::size_t fwd = pos;
        while (value_[fwd] <= T{} && fwd + 1 < value_.size())
            ++fwd;
        if (value_[fwd] > T{})
            return fwd;
        while (pos > 0 && value_[pos] <= T{})
            --pos;
        return pos;
    }

private:
    std::vector<T> tree_;
    std::vector<T> value_;
    T total_{};
    std::size_t top_ = 1;
};

} // namespace dynet::detail
