#include "parlearn/field.hpp"

#include <string>

#include "parlearn/error.hpp"

namespace parlearn {

bool is_prime(std::uint64_t q) noexcept
{
    if (q < 2)
        return false;
    if (q < 4)
        return true;
    if (q % 2 == 0)
        return false;
    for (std::uint64_t d = 3; d * d <= q; d += 2)
        if (q % d == 0)
            return false;
    return true;
}

FieldCtx::FieldCtx(std::int64_t q) : q_(0)
{
    if (q >= static_cast<std::int64_t>(kMaxModulus))
        throw Error(Errc::TooLarge, "modulus " + std::to_string(q) + " exceeds 2^32");
    if (q < 2 || !is_prime(static_cast<std::uint64_t>(q)))
        throw Error(Errc::NotPrime, "modulus " + std::to_string(q) + " is not prime");
    q_ = static_cast<std::uint64_t>(q);
}

Elem FieldCtx::reduce(std::int64_t x) const noexcept
{
    const auto m = static_cast<std::int64_t>(q_);
    std::int64_t r = x % m;
    if (r < 0)
        r += m;
    return static_cast<Elem>(r);
}

Elem FieldCtx::pow(Elem a, std::uint64_t e) const noexcept
{
    Elem result = 1 % q_;
    Elem base = a % q_;
    while (e) {
        if (e & 1)
            result = mul(result, base);
        base = mul(base, base);
        e >>= 1;
    }
    return result;
}

Elem FieldCtx::inv(Elem a) const
{
    if (a % q_ == 0)
        throw Error(Errc::ZeroInverse, "inverse of zero in F_" + std::to_string(q_));
    // extended Euclid on (a, q)
    std::int64_t t = 0, new_t = 1;
    std::int64_t r = static_cast<std::int64_t>(q_), new_r = static_cast<std::int64_t>(a % q_);
    while (new_r != 0) {
        const std::int64_t quot = r / new_r;
        std::int64_t tmp = t - quot * new_t;
        t = new_t;
        new_t = tmp;
        tmp = r - quot * new_r;
        r = new_r;
        new_r = tmp;
    }
    return reduce(t);
}

} // namespace parlearn
