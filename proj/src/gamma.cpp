#include "parlearn/gamma.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "parlearn/error.hpp"

namespace parlearn {

namespace {

double parse_double(std::string_view s)
{
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw Error(Errc::ParseError, "bad number '" + std::string(s) + "' in gamma descriptor");
    return v;
}

std::string format_double(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace

std::int64_t floor_out(double x) noexcept { return static_cast<std::int64_t>(std::floor(x + kBandSlack)); }
std::int64_t ceil_out(double x) noexcept { return static_cast<std::int64_t>(std::ceil(x - kBandSlack)); }

GammaSpec::GammaSpec(Kind kind, double param, std::vector<std::pair<double, double>> points, std::size_t n_cap)
    : kind_(kind), param_(param), points_(std::move(points)), n_cap_(n_cap)
{
}

GammaSpec GammaSpec::affine(double c, std::size_t n_cap)
{
    if (!(c > 1.0))
        throw Error(Errc::OutOfDomain, "affine gamma needs c > 1");
    GammaSpec g(Kind::Affine, c, {}, n_cap);
    g.validate();
    return g;
}

GammaSpec GammaSpec::power(double e, std::size_t n_cap)
{
    if (!(e > 1.0))
        throw Error(Errc::OutOfDomain, "power gamma needs e > 1");
    GammaSpec g(Kind::Power, e, {}, n_cap);
    g.validate();
    return g;
}

GammaSpec GammaSpec::table(std::vector<std::pair<double, double>> points, std::size_t n_cap)
{
    if (points.empty())
        throw Error(Errc::OutOfDomain, "table gamma needs at least one point");
    double px = 0, py = 0;
    for (const auto& [x, y] : points) {
        if (!(x > px) || !(y > py))
            throw Error(Errc::OutOfDomain, "table gamma points must be strictly increasing from the origin");
        px = x;
        py = y;
    }
    GammaSpec g(Kind::Table, 0, std::move(points), n_cap);
    g.validate();
    return g;
}

void GammaSpec::validate() const
{
    // probe grid: strictly increasing, gamma(x) > x past 1, inverse round trip
    double prev = 0;
    for (double x = 0.25; x <= 256.0; x *= 1.25) {
        const double y = eval(x);
        if (!(y > prev))
            throw Error(Errc::OutOfDomain, "gamma is not strictly increasing near x = " + format_double(x));
        if (x > 1.0 && !(y > x))
            throw Error(Errc::OutOfDomain, "gamma(x) <= x at x = " + format_double(x));
        if (std::abs(inverse(y) - x) > 1e-6)
            throw Error(Errc::OutOfDomain, "gamma inverse does not round trip at x = " + format_double(x));
        prev = y;
    }
}

GammaSpec GammaSpec::parse(std::string_view descriptor, std::size_t n_cap)
{
    const auto colon = descriptor.find(':');
    if (colon == std::string_view::npos)
        throw Error(Errc::ParseError, "gamma descriptor '" + std::string(descriptor) + "' lacks ':'");
    const auto kind = descriptor.substr(0, colon);
    const auto rest = descriptor.substr(colon + 1);
    if (kind == "affine")
        return affine(parse_double(rest), n_cap);
    if (kind == "power")
        return power(parse_double(rest), n_cap);
    if (kind == "table") {
        std::vector<std::pair<double, double>> pts;
        std::string_view r = rest;
        while (!r.empty()) {
            const auto comma = r.find(',');
            const auto item = r.substr(0, comma);
            const auto sep = item.find(':');
            if (sep == std::string_view::npos)
                throw Error(Errc::ParseError, "table point '" + std::string(item) + "' must be x:y");
            pts.emplace_back(parse_double(item.substr(0, sep)), parse_double(item.substr(sep + 1)));
            if (comma == std::string_view::npos)
                break;
            r = r.substr(comma + 1);
        }
        return table(std::move(pts), n_cap);
    }
    throw Error(Errc::ParseError, "unknown gamma kind '" + std::string(kind) + "'");
}

std::string GammaSpec::descriptor() const
{
    switch (kind_) {
    case Kind::Affine: return "affine:" + format_double(param_);
    case Kind::Power: return "power:" + format_double(param_);
    case Kind::Table: {
        std::string s = "table:";
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (i)
                s += ',';
            s += format_double(points_[i].first) + ":" + format_double(points_[i].second);
        }
        return s;
    }
    }
    return "";
}

GammaSpec GammaSpec::with_cap(std::size_t n) const
{
    GammaSpec g = *this;
    g.n_cap_ = n;
    return g;
}

double GammaSpec::eval(double x) const
{
    if (!(x > 0))
        throw Error(Errc::OutOfDomain, "gamma evaluated at non-positive x");
    switch (kind_) {
    case Kind::Affine: return param_ * x;
    case Kind::Power: return std::pow(x, param_);
    case Kind::Table: {
        double x0 = 0, y0 = 0;
        for (const auto& [x1, y1] : points_) {
            if (x <= x1)
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            x0 = x1;
            y0 = y1;
        }
        // past the last point: continue the final segment
        const auto n = points_.size();
        const double xa = n > 1 ? points_[n - 2].first : 0.0;
        const double ya = n > 1 ? points_[n - 2].second : 0.0;
        return y0 + (y0 - ya) / (x0 - xa) * (x - x0);
    }
    }
    return x;
}

double GammaSpec::inverse(double y) const
{
    if (!(y > 0))
        throw Error(Errc::OutOfDomain, "gamma inverse at non-positive y");
    switch (kind_) {
    case Kind::Affine: return y / param_;
    case Kind::Power: return std::pow(y, 1.0 / param_);
    case Kind::Table: return inverse_bisect(y);
    }
    return y;
}

double GammaSpec::inverse_bisect(double y) const
{
    if (!(y > 0))
        throw Error(Errc::OutOfDomain, "gamma inverse at non-positive y");
    double lo = 0, hi = 1;
    while (eval(hi) < y)
        hi *= 2;
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (eval(mid) < y)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double GammaSpec::delta_cap(double x) const
{
    if (n_cap_ == 0)
        throw Error(Errc::OutOfDomain, "delta_cap needs an n cap");
    return delta_cap(x, n_cap_);
}

double GammaSpec::delta_cap(double x, std::size_t n) const
{
    return std::min(big_gamma(x), static_cast<double>(n));
}

} // namespace parlearn
