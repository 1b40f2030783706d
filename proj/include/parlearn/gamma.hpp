#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace parlearn {

/// Tolerance applied outward when a real band edge is turned into an integer.
inline constexpr double kBandSlack = 1e-6;

/// floor(x + slack): largest integer not clearly above x.
std::int64_t floor_out(double x) noexcept;
/// ceil(x - slack): smallest integer not clearly below x.
std::int64_t ceil_out(double x) noexcept;

/// Strictly increasing approximation band gamma: R+ -> R+ with gamma(x) > x
/// for x > 1, plus the derived Gamma(x) = gamma(gamma(x)) and
/// Delta(x) = min(Gamma(x), n).
///
/// Kinds: affine c*x (c > 1), power x^e (e > 1), and a table of sample
/// points joined piecewise-linearly through the origin and extended past the
/// last point with the final slope.
class GammaSpec {
public:
    enum class Kind { Affine, Power, Table };

    static GammaSpec affine(double c, std::size_t n_cap = 0);
    static GammaSpec power(double e, std::size_t n_cap = 0);
    static GammaSpec table(std::vector<std::pair<double, double>> points, std::size_t n_cap = 0);

    /// "affine:2", "power:1.5", "table:1:2,2:5,4:11". Throws ParseError.
    static GammaSpec parse(std::string_view descriptor, std::size_t n_cap = 0);
    std::string descriptor() const;

    Kind kind() const noexcept { return kind_; }
    std::size_t n_cap() const noexcept { return n_cap_; }
    GammaSpec with_cap(std::size_t n) const;

    /// gamma(x). Throws OutOfDomain for x <= 0.
    double eval(double x) const;
    /// gamma^{-1}(y): closed form for affine and power, bisection for tables.
    double inverse(double y) const;
    /// Bisection inverse, to absolute tolerance 1e-9; usable for every kind.
    double inverse_bisect(double y) const;
    double big_gamma(double x) const { return eval(eval(x)); }
    /// min(Gamma(x), n_cap); requires n_cap > 0.
    double delta_cap(double x) const;
    double delta_cap(double x, std::size_t n) const;

    friend bool operator==(const GammaSpec&, const GammaSpec&) = default;

private:
    GammaSpec(Kind kind, double param, std::vector<std::pair<double, double>> points, std::size_t n_cap);
    void validate() const;

    Kind kind_;
    double param_;
    std::vector<std::pair<double, double>> points_;
    std::size_t n_cap_;
};

} // namespace parlearn
