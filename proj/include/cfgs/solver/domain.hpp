#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace cfgs::solver {

struct Interval {
    std::int64_t lo;
    std::int64_t hi;
    friend bool operator==(const Interval&, const Interval&) = default;
};

// A set of integers as sorted, disjoint, non-adjacent closed intervals.
// The int64 limits stand for the unbounded ends.
class NumericSet {
public:
    static constexpr std::int64_t kMin = std::numeric_limits<std::int64_t>::min();
    static constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();

    NumericSet() = default;  // empty
    static NumericSet all() { return range(kMin, kMax); }
    static NumericSet range(std::int64_t lo, std::int64_t hi);
    static NumericSet point(std::int64_t v) { return range(v, v); }
    static NumericSet from_intervals(std::vector<Interval> intervals);

    bool empty() const noexcept { return intervals_.empty(); }
    bool contains(std::int64_t v) const;
    bool is_point() const noexcept { return intervals_.size() == 1 && intervals_[0].lo == intervals_[0].hi; }
    bool bounded() const noexcept { return !empty() && min() != kMin && max() != kMax; }
    std::int64_t min() const { return intervals_.front().lo; }
    std::int64_t max() const { return intervals_.back().hi; }
    // Number of members, saturating at uint64 max.
    std::uint64_t size() const;
    const std::vector<Interval>& intervals() const noexcept { return intervals_; }

    NumericSet intersect(const NumericSet& other) const;
    NumericSet unite(const NumericSet& other) const;
    NumericSet without(std::int64_t v) const;
    NumericSet at_least(std::int64_t v) const { return intersect(range(v, kMax)); }
    NumericSet at_most(std::int64_t v) const { return intersect(range(kMin, v)); }
    // Member closest to `v`, preferring the smaller on ties.
    std::int64_t nearest(std::int64_t v) const;

    // "[17,90]", "[17,24] ∪ [26,90]", "∅"; unbounded ends print as -inf/inf.
    std::string str() const;

    friend bool operator==(const NumericSet&, const NumericSet&) = default;

private:
    void normalize();
    std::vector<Interval> intervals_;
};

// Allowed values of one categorical variable, in declared domain order.
class SymbolSet {
public:
    SymbolSet() = default;
    explicit SymbolSet(std::vector<std::string> allowed);

    bool empty() const noexcept { return allowed_.empty(); }
    bool contains(const std::string& s) const;
    std::size_t size() const noexcept { return allowed_.size(); }
    const std::vector<std::string>& values() const noexcept { return allowed_; }
    SymbolSet without(const std::string& s) const;
    SymbolSet intersect(const SymbolSet& other) const;

    std::string str() const;  // "{male,female}"

    friend bool operator==(const SymbolSet&, const SymbolSet&) = default;

private:
    std::vector<std::string> allowed_;
};

}  // namespace cfgs::solver
