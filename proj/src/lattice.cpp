#include "warm/lattice.hpp"

#include <boost/multiprecision/integer.hpp>

#include <limits>
#include <stdexcept>

namespace warm {

namespace {

BigInt big_gcd(BigInt a, BigInt b) {
    while (b != 0) {
        BigInt t = a % b;
        a = std::move(b);
        b = std::move(t);
    }
    return a;
}

}  // namespace

Rational::Rational(BigInt num, BigInt den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_ == 0) throw std::invalid_argument("rational: zero denominator");
    if (den_ < 0) {
        den_ = -den_;
        num_ = -num_;
    }
    if (num_ <= 0) throw std::invalid_argument("rational: reach base must be positive");
    BigInt g = big_gcd(num_, den_);
    num_ /= g;
    den_ /= g;
}

Rational Rational::parse(const std::string& text) try {
    if (text.empty()) throw std::invalid_argument("rational: empty string");
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        BigInt p(text.substr(0, slash));
        BigInt q(text.substr(slash + 1));
        return Rational(p, q);
    }
    auto dot = text.find('.');
    if (dot == std::string::npos) {
        return Rational(BigInt(text), 1);
    }
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    std::size_t frac_len = text.size() - dot - 1;
    if (frac_len == 0) return Rational(BigInt(digits), 1);
    BigInt den = 1;
    for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
    return Rational(BigInt(digits), den);
} catch (const std::runtime_error&) {
    // cpp_int rejects malformed digit strings with a runtime_error
    throw std::invalid_argument("rational: cannot parse '" + text + "'");
}

double Rational::to_double() const {
    return num_.convert_to<double>() / den_.convert_to<double>();
}

std::string Rational::to_string() const {
    if (den_ == 1) return num_.str();
    return num_.str() + "/" + den_.str();
}

ModelParams::ModelParams(Rational a_, double beta_, double gamma_, std::uint64_t seed_)
    : a(std::move(a_)), beta(beta_), gamma(gamma_), seed(seed_) {
    if (a.num() <= a.den()) throw std::invalid_argument("model: requires a > 1");
    if (!(beta > 1.0)) throw std::invalid_argument("model: requires beta > 1");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("model: requires gamma in (0,1)");
}

BigInt reach(std::uint32_t h, const Rational& a) {
    // floor(p^h / q^h); both operands positive so integer division floors.
    BigInt p = boost::multiprecision::pow(a.num(), h);
    if (a.den() == 1) return p;
    BigInt q = boost::multiprecision::pow(a.den(), h);
    return p / q;
}

std::int64_t reach_i64(std::uint32_t h, const Rational& a) {
    BigInt r = reach(h, a);
    if (r > std::numeric_limits<std::int64_t>::max()) {
        throw std::overflow_error("reach(" + std::to_string(h) + ") exceeds 64-bit range");
    }
    return r.convert_to<std::int64_t>();
}

std::vector<NodeId> out_neighbors(const NodeId& v, const Rational& a) {
    BigInt r = reach(v.h, a);
    if (r > 1u << 26) {
        throw std::length_error("out_neighbors: neighborhood too large to materialize");
    }
    std::int64_t ri = r.convert_to<std::int64_t>();
    std::vector<NodeId> out;
    out.reserve(static_cast<std::size_t>(2 * ri + 1));
    for (std::int64_t d = -ri; d <= ri; ++d) {
        out.emplace_back(v.x + d, v.h + 1);
    }
    return out;
}

std::pair<BigInt, BigInt> neighborhood_overlap(const NodeId& l, const NodeId& r,
                                               const Rational& a) {
    if (l.h != r.h) throw std::invalid_argument("neighborhood_overlap: layer mismatch");
    BigInt width = 2 * reach(l.h, a) + 1;
    BigInt dx = l.x >= r.x ? BigInt(l.x - r.x) : BigInt(r.x - l.x);
    BigInt inter = width - dx;
    if (inter < 0) inter = 0;
    BigInt uni = 2 * width - inter;
    return {uni, inter};
}

}  // namespace warm
