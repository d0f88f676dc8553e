#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "dynet/core_model.hpp"
#include "dynet/errors.hpp"

namespace dynet::detail {

/// Two indexed lists (off / on) over a dense pair universe with O(1)
/// insert, erase, toggle and uniform pick.
class PairPool {
public:
    explicit PairPool(pair_t universe)
    {
        if (universe > std::numeric_limits<std::uint32_t>::max())
            throw ResourceLimitExceeded("pair universe too large for the indexed pair pool");
        where_.assign(universe, kNone);
        slot_.assign(universe, 0);
    }

    std::size_t size(bool on) const { return lists_[on].size(); }
    pair_t at(bool on, std::size_t k) const { return lists_[on][k]; }
    bool contains(pair_t id) const { return where_[id] != kNone; }

    void insert(pair_t id, bool on)
    {
        where_[id] = on ? 1 : 0;
        slot_[id] = static_cast<std::uint32_t>(lists_[on].size());
        lists_[on].push_back(id);
    }

    void erase(pair_t id)
    {
        const bool on = where_[id] == 1;
        auto& list = lists_[on];
        const std::size_t k = slot_[id];
        const pair_t last = list.back();
        list[k] = last;
        slot_[last] = static_cast<std::uint32_t>(k);
        list.pop_back();
        where_[id] = kNone;
    }

    void toggle(pair_t id)
    {
        const bool on = where_[id] == 1;
        erase(id);
        insert(id, !on);
    }

private:
    static constexpr std::uint8_t kNone = 2;
    std::vector<std::uint8_t> where_;
    std::vector<std::uint32_t> slot_;
    std::vector<pair_t> lists_[2];
};

} // namespace dynet::detail
