#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gibbsgate {

// Thrown when an exhaustive scan would exceed its documented size guard.
struct budget_exceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an internal cross-check fails (oracle disagreement, identity
// violation). Reaching this means a bug, not bad input.
struct invariant_violation : std::logic_error {
    using std::logic_error::logic_error;
};

// Dense row-major grid over a finite product space. Index order is (x, y):
// x selects the row, y the column.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(std::size_t rows, std::size_t cols, T value = T())
        : rows_(rows), cols_(cols), data_(rows * cols, value) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    T& operator()(std::size_t x, std::size_t y) { return data_[x * cols_ + y]; }
    const T& operator()(std::size_t x, std::size_t y) const { return data_[x * cols_ + y]; }

    T& at_flat(std::size_t i) { return data_[i]; }
    const T& at_flat(std::size_t i) const { return data_[i]; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    bool same_shape(const Grid& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using RealGrid = Grid<double>;
using BoolGrid = Grid<std::uint8_t>;

// A single point of the product space.
struct Cell {
    std::size_t x = 0;
    std::size_t y = 0;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Measurable subset of the product space, stored as a membership mask.
struct Event {
    BoolGrid member;

    Event() = default;
    Event(std::size_t rows, std::size_t cols, bool fill = false)
        : member(rows, cols, fill ? 1 : 0) {}

    bool contains(std::size_t x, std::size_t y) const { return member(x, y) != 0; }
    void set(std::size_t x, std::size_t y, bool v = true) { member(x, y) = v ? 1 : 0; }

    std::size_t rows() const { return member.rows(); }
    std::size_t cols() const { return member.cols(); }

    Event complement() const {
        Event out(rows(), cols());
        for (std::size_t i = 0; i < member.size(); ++i)
            out.member.at_flat(i) = member.at_flat(i) ? 0 : 1;
        return out;
    }

    friend Event operator|(const Event& a, const Event& b) {
        Event out(a.rows(), a.cols());
        for (std::size_t i = 0; i < a.member.size(); ++i)
            out.member.at_flat(i) = (a.member.at_flat(i) || b.member.at_flat(i)) ? 1 : 0;
        return out;
    }
    friend Event operator&(const Event& a, const Event& b) {
        Event out(a.rows(), a.cols());
        for (std::size_t i = 0; i < a.member.size(); ++i)
            out.member.at_flat(i) = (a.member.at_flat(i) && b.member.at_flat(i)) ? 1 : 0;
        return out;
    }
    friend bool operator==(const Event& a, const Event& b) { return a.member == b.member; }

    bool subset_of(const Event& other) const {
        for (std::size_t i = 0; i < member.size(); ++i)
            if (member.at_flat(i) && !other.member.at_flat(i)) return false;
        return true;
    }

    bool empty() const {
        for (std::size_t i = 0; i < member.size(); ++i)
            if (member.at_flat(i)) return false;
        return true;
    }
};

// Product event U x V given by its two marginal index masks.
struct Rectangle {
    std::vector<std::uint8_t> u;
    std::vector<std::uint8_t> v;

    Event event() const {
        Event out(u.size(), v.size());
        for (std::size_t i = 0; i < u.size(); ++i)
            for (std::size_t j = 0; j < v.size(); ++j)
                if (u[i] && v[j]) out.set(i, j);
        return out;
    }

    friend bool operator==(const Rectangle&, const Rectangle&) = default;
};

inline Event event_from_cells(std::size_t rows, std::size_t cols,
                              std::initializer_list<Cell> cells) {
    Event out(rows, cols);
    for (const Cell& c : cells) out.set(c.x, c.y);
    return out;
}

} // namespace gibbsgate
