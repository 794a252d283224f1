#pragma once

#include <cassert>
#include <utility>
#include <variant>

namespace mols {

// Minimal value-or-error carrier (std::expected is C++23).
template <class T, class E>
class Expected {
public:
    Expected(T value) : slot_(std::in_place_index<0>, std::move(value)) {}
    Expected(E error) : slot_(std::in_place_index<1>, std::move(error)) {}

    bool ok() const { return slot_.index() == 0; }
    explicit operator bool() const { return ok(); }

    T &value() {
        assert(ok());
        return std::get<0>(slot_);
    }
    const T &value() const {
        assert(ok());
        return std::get<0>(slot_);
    }
    const E &error() const {
        assert(!ok());
        return std::get<1>(slot_);
    }

private:
    std::variant<T, E> slot_;
};

} // namespace mols
