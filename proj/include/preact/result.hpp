#pragma once

#include <stdexcept>
#include <type_traits>
#include <utility>
#include <variant>

namespace preact {

// Small value-or-error carrier for operations whose failure is part of the
// normal contract (parsing, file ingestion, validation).
template <typename T, typename E>
class Result {
    static_assert(!std::is_same_v<T, E>, "Result needs distinct value and error types");

public:
    Result(T value) : data_(std::in_place_index<0>, std::move(value)) {}
    Result(E error) : data_(std::in_place_index<1>, std::move(error)) {}

    static Result ok(T value) { return Result(std::move(value)); }
    static Result err(E error) { return Result(std::move(error)); }

    bool has_value() const { return data_.index() == 0; }
    explicit operator bool() const { return has_value(); }

    T& value() {
        ensure_value();
        return std::get<0>(data_);
    }
    const T& value() const {
        ensure_value();
        return std::get<0>(data_);
    }
    E& error() {
        ensure_error();
        return std::get<1>(data_);
    }
    const E& error() const {
        ensure_error();
        return std::get<1>(data_);
    }

    T& operator*() { return value(); }
    const T& operator*() const { return value(); }
    T* operator->() { return &value(); }
    const T* operator->() const { return &value(); }

private:
    void ensure_value() const {
        if (data_.index() != 0) throw std::logic_error("Result: accessed value of an error result");
    }
    void ensure_error() const {
        if (data_.index() != 1) throw std::logic_error("Result: accessed error of a value result");
    }

    std::variant<T, E> data_;
};

}  // namespace preact
