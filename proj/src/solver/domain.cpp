#include "cfgs/solver/domain.hpp"

#include <algorithm>

namespace cfgs::solver {

NumericSet NumericSet::range(std::int64_t lo, std::int64_t hi) {
    NumericSet s;
    if (lo <= hi) s.intervals_.push_back({lo, hi});
    return s;
}

NumericSet NumericSet::from_intervals(std::vector<Interval> intervals) {
    NumericSet s;
    s.intervals_ = std::move(intervals);
    s.normalize();
    return s;
}

void NumericSet::normalize() {
    std::erase_if(intervals_, [](const Interval& i) { return i.lo > i.hi; });
    std::sort(intervals_.begin(), intervals_.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> merged;
    for (const auto& i : intervals_) {
        // Adjacent when the previous upper bound is exactly one below.
        if (!merged.empty() && (merged.back().hi == kMax || i.lo <= merged.back().hi + 1)) {
            merged.back().hi = std::max(merged.back().hi, i.hi);
        } else {
            merged.push_back(i);
        }
    }
    intervals_ = std::move(merged);
}

bool NumericSet::contains(std::int64_t v) const {
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), v,
                               [](std::int64_t x, const Interval& i) { return x < i.lo; });
    if (it == intervals_.begin()) return false;
    --it;
    return v <= it->hi;
}

std::uint64_t NumericSet::size() const {
    std::uint64_t total = 0;
    for (const auto& i : intervals_) {
        const auto width = static_cast<std::uint64_t>(i.hi) - static_cast<std::uint64_t>(i.lo);
        if (width == std::numeric_limits<std::uint64_t>::max()) return width;
        const auto n = width + 1;
        if (total > std::numeric_limits<std::uint64_t>::max() - n) return std::numeric_limits<std::uint64_t>::max();
        total += n;
    }
    return total;
}

NumericSet NumericSet::intersect(const NumericSet& other) const {
    NumericSet out;
    std::size_t a = 0, b = 0;
    while (a < intervals_.size() && b < other.intervals_.size()) {
        const auto lo = std::max(intervals_[a].lo, other.intervals_[b].lo);
        const auto hi = std::min(intervals_[a].hi, other.intervals_[b].hi);
        if (lo <= hi) out.intervals_.push_back({lo, hi});
        if (intervals_[a].hi < other.intervals_[b].hi) ++a;
        else ++b;
    }
    return out;
}

NumericSet NumericSet::unite(const NumericSet& other) const {
    NumericSet out;
    out.intervals_ = intervals_;
    out.intervals_.insert(out.intervals_.end(), other.intervals_.begin(), other.intervals_.end());
    out.normalize();
    return out;
}

NumericSet NumericSet::without(std::int64_t v) const {
    NumericSet out;
    for (const auto& i : intervals_) {
        if (v < i.lo || v > i.hi) {
            out.intervals_.push_back(i);
            continue;
        }
        if (i.lo < v) out.intervals_.push_back({i.lo, v - 1});
        if (v < i.hi) out.intervals_.push_back({v + 1, i.hi});
    }
    return out;
}

std::int64_t NumericSet::nearest(std::int64_t v) const {
    std::int64_t best = intervals_.front().lo;
    std::uint64_t best_d = std::numeric_limits<std::uint64_t>::max();
    for (const auto& i : intervals_) {
        const std::int64_t c = std::clamp(v, i.lo, i.hi);
        const std::uint64_t d = c >= v ? static_cast<std::uint64_t>(c) - static_cast<std::uint64_t>(v)
                                       : static_cast<std::uint64_t>(v) - static_cast<std::uint64_t>(c);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

std::string NumericSet::str() const {
    if (intervals_.empty()) return "∅";
    auto bound = [](std::int64_t v) {
        if (v == kMin) return std::string("-inf");
        if (v == kMax) return std::string("inf");
        return std::to_string(v);
    };
    std::string out;
    for (std::size_t k = 0; k < intervals_.size(); ++k) {
        if (k) out += " ∪ ";
        out += "[" + bound(intervals_[k].lo) + "," + bound(intervals_[k].hi) + "]";
    }
    return out;
}

SymbolSet::SymbolSet(std::vector<std::string> allowed) {
    for (auto& s : allowed)
        if (!contains(s)) allowed_.push_back(std::move(s));
}

bool SymbolSet::contains(const std::string& s) const {
    return std::find(allowed_.begin(), allowed_.end(), s) != allowed_.end();
}

SymbolSet SymbolSet::without(const std::string& s) const {
    SymbolSet out = *this;
    std::erase(out.allowed_, s);
    return out;
}

SymbolSet SymbolSet::intersect(const SymbolSet& other) const {
    SymbolSet out;
    for (const auto& s : allowed_)
        if (other.contains(s)) out.allowed_.push_back(s);
    return out;
}

std::string SymbolSet::str() const {
    std::string out = "{";
    for (std::size_t i = 0; i < allowed_.size(); ++i) {
        if (i) out += ",";
        out += allowed_[i];
    }
    return out + "}";
}

}  // namespace cfgs::solver
