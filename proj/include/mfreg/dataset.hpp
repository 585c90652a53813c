#ifndef MFREG_DATASET_HPP
#define MFREG_DATASET_HPP

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mfreg/errors.hpp"

namespace mfreg {

struct Observation {
    std::size_t user;
    std::size_t item;
    double rating;

    friend bool operator==(const Observation& a, const Observation& b) {
        return a.user == b.user && a.item == b.item && a.rating == b.rating;
    }
};

// Sparse observed ratings over dense user/item indices, plus the bijection
// back to the external IDs they were loaded from. Immutable after
// construction; adjacency lists (per-user and per-item observation indices,
// sorted by the opposite index) are built once so that trainers and
// diagnostics can traverse both ways.
class RatingsDataset {
public:
    RatingsDataset() = default;

    // Validates every stored invariant: index ranges, duplicate pairs,
    // rating bounds, ID map sizes. external user/item id vectors map dense
    // index -> external id; pass empty vectors to use identity ids.
    static RatingsDataset make(std::size_t num_users, std::size_t num_items,
                               std::vector<Observation> observations,
                               double r_min, double r_max,
                               std::vector<std::int64_t> user_ids = {},
                               std::vector<std::int64_t> item_ids = {}) {
        RatingsDataset d;
        d.num_users_ = num_users;
        d.num_items_ = num_items;
        d.observations_ = std::move(observations);
        d.r_min_ = r_min;
        d.r_max_ = r_max;
        if (r_min > r_max)
            throw contract_error("rating bounds inverted: r_min > r_max");

        if (user_ids.empty()) {
            user_ids.resize(num_users);
            for (std::size_t i = 0; i < num_users; ++i) user_ids[i] = static_cast<std::int64_t>(i);
        }
        if (item_ids.empty()) {
            item_ids.resize(num_items);
            for (std::size_t j = 0; j < num_items; ++j) item_ids[j] = static_cast<std::int64_t>(j);
        }
        if (user_ids.size() != num_users || item_ids.size() != num_items)
            throw contract_error("ID map size does not match num_users/num_items");
        d.user_ids_ = std::move(user_ids);
        d.item_ids_ = std::move(item_ids);
        for (std::size_t i = 0; i < d.user_ids_.size(); ++i) {
            if (!d.user_index_.emplace(d.user_ids_[i], i).second)
                throw contract_error("user ID map is not injective");
        }
        for (std::size_t j = 0; j < d.item_ids_.size(); ++j) {
            if (!d.item_index_.emplace(d.item_ids_[j], j).second)
                throw contract_error("item ID map is not injective");
        }

        std::unordered_set<std::uint64_t> seen;
        seen.reserve(d.observations_.size() * 2);
        for (const Observation& o : d.observations_) {
            if (o.user >= num_users)
                throw contract_error("observation user index " + std::to_string(o.user) +
                                     " out of range [0," + std::to_string(num_users) + ")");
            if (o.item >= num_items)
                throw contract_error("observation item index " + std::to_string(o.item) +
                                     " out of range [0," + std::to_string(num_items) + ")");
            if (!(o.rating >= r_min && o.rating <= r_max))
                throw contract_error("rating " + std::to_string(o.rating) + " outside [" +
                                     std::to_string(r_min) + "," + std::to_string(r_max) + "]");
            std::uint64_t key = static_cast<std::uint64_t>(o.user) * num_items + o.item;
            if (!seen.insert(key).second)
                throw contract_error("duplicate (user,item) observation pair");
        }

        d.build_adjacency();
        return d;
    }

    std::size_t num_users() const { return num_users_; }
    std::size_t num_items() const { return num_items_; }
    double r_min() const { return r_min_; }
    double r_max() const { return r_max_; }
    std::span<const Observation> observations() const { return observations_; }
    std::size_t size() const { return observations_.size(); }
    bool empty() const { return observations_.empty(); }

    // Indices into observations() for the ratings of user i, sorted by item.
    std::span<const std::size_t> user_observations(std::size_t i) const {
        return {user_adj_.data() + user_off_[i], user_off_[i + 1] - user_off_[i]};
    }
    // Indices into observations() for the ratings of item j, sorted by user.
    std::span<const std::size_t> item_observations(std::size_t j) const {
        return {item_adj_.data() + item_off_[j], item_off_[j + 1] - item_off_[j]};
    }
    std::size_t user_degree(std::size_t i) const { return user_off_[i + 1] - user_off_[i]; }
    std::size_t item_degree(std::size_t j) const { return item_off_[j + 1] - item_off_[j]; }

    std::int64_t user_external_id(std::size_t index) const { return user_ids_[index]; }
    std::int64_t item_external_id(std::size_t index) const { return item_ids_[index]; }
    const std::vector<std::int64_t>& user_ids() const { return user_ids_; }
    const std::vector<std::int64_t>& item_ids() const { return item_ids_; }

    bool has_user_id(std::int64_t ext) const { return user_index_.count(ext) != 0; }
    bool has_item_id(std::int64_t ext) const { return item_index_.count(ext) != 0; }
    std::size_t user_index_of(std::int64_t ext) const { return user_index_.at(ext); }
    std::size_t item_index_of(std::int64_t ext) const { return item_index_.at(ext); }

    double mean_rating() const {
        if (observations_.empty()) return 0.0;
        double s = 0.0;
        for (const Observation& o : observations_) s += o.rating;
        return s / static_cast<double>(observations_.size());
    }

    // Same dims, bounds and ID maps, different observation list. Used by
    // train/test splitting so both halves agree on the index space.
    RatingsDataset with_observations(std::vector<Observation> obs) const {
        return make(num_users_, num_items_, std::move(obs), r_min_, r_max_, user_ids_, item_ids_);
    }

private:
    void build_adjacency() {
        user_off_.assign(num_users_ + 1, 0);
        item_off_.assign(num_items_ + 1, 0);
        for (const Observation& o : observations_) {
            ++user_off_[o.user + 1];
            ++item_off_[o.item + 1];
        }
        for (std::size_t i = 0; i < num_users_; ++i) user_off_[i + 1] += user_off_[i];
        for (std::size_t j = 0; j < num_items_; ++j) item_off_[j + 1] += item_off_[j];

        user_adj_.resize(observations_.size());
        item_adj_.resize(observations_.size());
        std::vector<std::size_t> ucur(user_off_.begin(), user_off_.end() - 1);
        std::vector<std::size_t> icur(item_off_.begin(), item_off_.end() - 1);
        // Visit observations in item-major order so each user's list comes out
        // sorted by item index, and vice versa. Sorted adjacency makes every
        // per-row summation independent of the observation list order.
        std::vector<std::size_t> tmp_off(item_off_);
        std::vector<std::size_t> item_sorted(observations_.size());
        for (std::size_t n = 0; n < observations_.size(); ++n)
            item_sorted[tmp_off[observations_[n].item]++] = n;
        for (std::size_t pos = 0; pos < item_sorted.size(); ++pos) {
            std::size_t n = item_sorted[pos];
            user_adj_[ucur[observations_[n].user]++] = n;
        }
        std::vector<std::size_t> tmp_uoff(user_off_);
        std::vector<std::size_t> user_sorted(observations_.size());
        for (std::size_t n = 0; n < observations_.size(); ++n)
            user_sorted[tmp_uoff[observations_[n].user]++] = n;
        for (std::size_t pos = 0; pos < user_sorted.size(); ++pos) {
            std::size_t n = user_sorted[pos];
            item_adj_[icur[observations_[n].item]++] = n;
        }
    }

    std::size_t num_users_ = 0;
    std::size_t num_items_ = 0;
    double r_min_ = 0.0;
    double r_max_ = 0.0;
    std::vector<Observation> observations_;
    std::vector<std::int64_t> user_ids_;
    std::vector<std::int64_t> item_ids_;
    std::unordered_map<std::int64_t, std::size_t> user_index_;
    std::unordered_map<std::int64_t, std::size_t> item_index_;
    std::vector<std::size_t> user_off_, user_adj_;
    std::vector<std::size_t> item_off_, item_adj_;
};

} // namespace mfreg

#endif
