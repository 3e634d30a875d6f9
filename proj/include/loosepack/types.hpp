#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace loosepack {

// Vertex labels are 0-based; the dummy closing vertex uses label n.
using Vertex = std::uint32_t;

// Exact rank / count type. Wide enough for C(10^6, 8) (145 bits); checked
// so that arithmetic beyond 256 bits throws instead of wrapping.
using Rank = boost::multiprecision::number<
    boost::multiprecision::cpp_int_backend<256, 256, boost::multiprecision::unsigned_magnitude,
                                           boost::multiprecision::checked, void>>;

inline constexpr unsigned kMaxUniformity = 8;
inline constexpr std::uint64_t kMaxRankedVertices = 1'000'000;

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when an operation would need ranks outside the exact domain
// (n <= 10^6, k <= 8) or a count that does not fit the sampling path.
class RangeError : public Error {
public:
    explicit RangeError(const std::string& msg) : Error(msg) {}
};

class ParamError : public Error {
public:
    ParamError(std::string field, const std::string& msg)
        : Error(field + ": " + msg), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

inline std::string to_string(const Rank& r) { return r.str(); }

}  // namespace loosepack
