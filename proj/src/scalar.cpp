#include "birkhoff/scalar.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <sstream>

namespace birkhoff {

std::string to_string(Backend b)
{
    return b == Backend::exact ? "exact" : "float";
}

Backend backend_from_string(std::string_view s)
{
    if (s == "exact") return Backend::exact;
    if (s == "float" || s == "floating") return Backend::floating;
    throw std::invalid_argument("unknown backend '" + std::string(s) + "' (expected exact|float)");
}

unsigned FloatPrecision::bits_ = FloatPrecision::default_bits;

namespace {
const bool precision_initialised = [] {
    FloatPrecision::set_bits(FloatPrecision::default_bits);
    return true;
}();
} // namespace

unsigned FloatPrecision::bits() noexcept
{
    return bits_;
}

void FloatPrecision::set_bits(unsigned bits)
{
    if (bits < minimum_bits)
        throw std::invalid_argument("float backend needs at least " + std::to_string(minimum_bits) +
                                    " mantissa bits, got " + std::to_string(bits));
    bits_ = bits;
    // boost counts precision in decimal digits.
    const auto digits10 = static_cast<unsigned>(std::ceil(bits * 0.30102999566398120));
    Real::default_precision(digits10);
}

namespace {

std::string trim(std::string_view s)
{
    auto b = s.begin();
    auto e = s.end();
    while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
    return std::string(b, e);
}

bool is_plain_decimal(const std::string &s)
{
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    bool digit = false, dot = false;
    for (; i < s.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(s[i])))
            digit = true;
        else if (s[i] == '.' && !dot)
            dot = true;
        else
            return false;
    }
    return digit;
}

Rational parse_decimal(const std::string &s)
{
    const bool neg = s[0] == '-';
    std::string body = (s[0] == '-' || s[0] == '+') ? s.substr(1) : s;
    const auto dot = body.find('.');
    std::string digits = body;
    std::size_t frac = 0;
    if (dot != std::string::npos) {
        frac = body.size() - dot - 1;
        digits = body.substr(0, dot) + body.substr(dot + 1);
    }
    if (digits.empty()) digits = "0";
    mpz_class num(digits, 10);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac);
    Rational r(num, den);
    r.canonicalize();
    return neg ? Rational(-r) : r;
}

} // namespace

Rational ScalarTraits<ExactScalar>::from_ratio(std::int64_t p, std::int64_t q)
{
    if (q == 0) throw std::domain_error("zero denominator");
    Rational r(mpz_class(static_cast<long>(p)), mpz_class(static_cast<long>(q)));
    r.canonicalize();
    return r;
}

Rational ScalarTraits<ExactScalar>::parse(std::string_view text)
{
    const std::string s = trim(text);
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
        const std::string num = trim(s.substr(0, slash));
        const std::string den = trim(s.substr(slash + 1));
        if (!is_plain_decimal(num) || !is_plain_decimal(den))
            throw BackendError("not an exact rational: '" + s + "'");
        Rational r = parse_decimal(num) / parse_decimal(den);
        r.canonicalize();
        return r;
    }
    if (is_plain_decimal(s)) return parse_decimal(s);
    throw BackendError("value '" + s + "' is not representable on the exact backend");
}

std::string ScalarTraits<ExactScalar>::render(const Rational &v)
{
    return v.get_num().get_str() + "/" + v.get_den().get_str();
}

double ScalarTraits<ExactScalar>::log_abs(const Rational &v)
{
    if (v == 0) return -HUGE_VAL;
    long en = 0, ed = 0;
    const double mn = mpz_get_d_2exp(&en, v.get_num_mpz_t());
    const double md = mpz_get_d_2exp(&ed, v.get_den_mpz_t());
    return std::log(std::fabs(mn)) - std::log(md) + static_cast<double>(en - ed) * std::log(2.0);
}

Rational ScalarTraits<ExactScalar>::sqrt(const Rational &v)
{
    if (v < 0) throw BackendError("sqrt of negative rational");
    mpz_class n, d;
    mpz_sqrt(n.get_mpz_t(), v.get_num_mpz_t());
    mpz_sqrt(d.get_mpz_t(), v.get_den_mpz_t());
    if (n * n != v.get_num() || d * d != v.get_den())
        throw BackendError("sqrt(" + render(v) + ") is irrational; use the float backend");
    return Rational(n, d);
}

Rational ScalarTraits<ExactScalar>::exp(const Rational &v)
{
    if (v == 0) return Rational(1);
    throw BackendError("exp(" + render(v) + ") is irrational; supply an exact override or use the float backend");
}

Rational ScalarTraits<ExactScalar>::log(const Rational &v)
{
    if (v == 1) return Rational(0);
    throw BackendError("log(" + render(v) + ") is irrational");
}

Real ScalarTraits<FloatScalar>::from_ratio(std::int64_t p, std::int64_t q)
{
    if (q == 0) throw std::domain_error("zero denominator");
    return Real(static_cast<long long>(p)) / Real(static_cast<long long>(q));
}

Real ScalarTraits<FloatScalar>::parse(std::string_view text)
{
    std::string s = trim(text);
    bool neg = false;
    if (!s.empty() && s[0] == '-' && s.find('(') != std::string::npos) {
        neg = true;
        s = trim(s.substr(1));
    }
    auto wrapped = [&](std::string_view fn) -> std::optional<std::string> {
        if (s.size() > fn.size() + 2 && s.compare(0, fn.size(), fn) == 0 && s[fn.size()] == '(' && s.back() == ')')
            return s.substr(fn.size() + 1, s.size() - fn.size() - 2);
        return std::nullopt;
    };
    Real out;
    if (auto arg = wrapped("sqrt")) {
        out = boost::multiprecision::sqrt(parse(*arg));
    } else if (auto arg = wrapped("exp")) {
        out = boost::multiprecision::exp(parse(*arg));
    } else if (s.find('/') != std::string::npos) {
        const auto slash = s.find('/');
        out = parse(s.substr(0, slash)) / parse(s.substr(slash + 1));
    } else {
        if (s.empty()) throw BackendError("empty numeric literal");
        try {
            out = Real(s);
        } catch (const std::exception &) {
            throw BackendError("cannot parse '" + s + "' as a number");
        }
    }
    return neg ? Real(-out) : out;
}

std::string ScalarTraits<FloatScalar>::render(const Real &v)
{
    const auto digits = static_cast<std::streamsize>(std::ceil(FloatPrecision::bits() * 0.30102999566398120));
    return v.str(digits, std::ios_base::scientific);
}

double ScalarTraits<FloatScalar>::log_abs(const Real &v)
{
    if (v == 0) return -HUGE_VAL;
    return boost::multiprecision::log(boost::multiprecision::abs(v)).convert_to<double>();
}

bool ScalarTraits<FloatScalar>::negligible(const Real &v, const Real &scale)
{
    const Real eps = boost::multiprecision::ldexp(Real(1), -static_cast<int>(FloatPrecision::bits()) + 16);
    return boost::multiprecision::abs(v) <= eps * boost::multiprecision::abs(scale);
}

} // namespace birkhoff
