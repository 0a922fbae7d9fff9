#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace typeiii {

// Malformed model formula. offset() is the byte position in the input text.
class formula_error : public std::runtime_error {
public:
    formula_error(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// Problems with input data: missing columns, unparseable values, unknown factors.
class data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical precondition failed (non-pd matrix, negative SS beyond rounding, ...).
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The requested statistic does not exist for this layout (e.g. MWSM with empty cells).
class undefined_statistic : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace typeiii
