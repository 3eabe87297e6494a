#ifndef CHARGE_COMMON_HPP
#define CHARGE_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace charge
{

using vertex_id = std::uint32_t;

inline constexpr vertex_id invalid_vertex = std::numeric_limits<vertex_id>::max();
inline constexpr double inf = std::numeric_limits<double>::infinity();
inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();
inline constexpr double epsilon = 1e-9;

inline bool approx_equal(double a, double b, double tol = epsilon)
{
    if (a == b)
        return true;
    return std::abs(a - b) <= tol;
}

class validation_error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

} // namespace charge

#endif
