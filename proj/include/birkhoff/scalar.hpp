// Coefficient fields for truncated Poisson series.
//
// Two backends are provided: Gaussian rationals (exact, GMP) and complex
// numbers over MPFR floats with a run-time mantissa size. Both are wrapped in
// the same Complex<T> value type so the series algebra is written once.

#ifndef BIRKHOFF_SCALAR_HPP
#define BIRKHOFF_SCALAR_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

#include <boost/multiprecision/mpfr.hpp>

namespace birkhoff {

using Rational = mpq_class;
using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                           boost::multiprecision::et_off>;

enum class Backend { exact, floating };

std::string to_string(Backend b);
Backend backend_from_string(std::string_view s);

/// Thrown when a value cannot be represented in the requested backend
/// (e.g. asking the exact backend for sqrt(2)).
class BackendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Process-wide mantissa size for the float backend. Values created after a
/// change carry the new precision.
class FloatPrecision {
public:
    static constexpr unsigned default_bits = 256;
    static constexpr unsigned minimum_bits = 128;

    static unsigned bits() noexcept;
    static void set_bits(unsigned bits);

private:
    static unsigned bits_;
};

/// Restores the previous float precision on scope exit.
class PrecisionGuard {
public:
    explicit PrecisionGuard(unsigned bits) : saved_(FloatPrecision::bits())
    {
        FloatPrecision::set_bits(bits);
    }
    ~PrecisionGuard() { FloatPrecision::set_bits(saved_); }
    PrecisionGuard(const PrecisionGuard &) = delete;
    PrecisionGuard &operator=(const PrecisionGuard &) = delete;

private:
    unsigned saved_;
};

template <class T>
struct Complex {
    T re{};
    T im{};

    Complex() = default;
    Complex(T r) : re(std::move(r)), im(0) {}
    Complex(T r, T i) : re(std::move(r)), im(std::move(i)) {}

    [[nodiscard]] bool is_zero() const { return re == 0 && im == 0; }
    [[nodiscard]] bool is_real() const { return im == 0; }
    [[nodiscard]] Complex conj() const { return {re, -im}; }

    Complex &operator+=(const Complex &o)
    {
        re += o.re;
        im += o.im;
        return *this;
    }
    Complex &operator-=(const Complex &o)
    {
        re -= o.re;
        im -= o.im;
        return *this;
    }
    Complex &operator*=(const Complex &o)
    {
        T r = re * o.re - im * o.im;
        T i = re * o.im + im * o.re;
        re = std::move(r);
        im = std::move(i);
        return *this;
    }
    Complex &operator/=(const Complex &o)
    {
        T den = o.re * o.re + o.im * o.im;
        if (den == 0) throw std::domain_error("complex division by zero");
        T r = (re * o.re + im * o.im) / den;
        T i = (im * o.re - re * o.im) / den;
        re = std::move(r);
        im = std::move(i);
        return *this;
    }

    friend Complex operator+(Complex a, const Complex &b) { return a += b; }
    friend Complex operator-(Complex a, const Complex &b) { return a -= b; }
    friend Complex operator*(Complex a, const Complex &b) { return a *= b; }
    friend Complex operator/(Complex a, const Complex &b) { return a /= b; }
    friend Complex operator-(const Complex &a) { return {-a.re, -a.im}; }
    friend bool operator==(const Complex &a, const Complex &b) { return a.re == b.re && a.im == b.im; }
    friend bool operator!=(const Complex &a, const Complex &b) { return !(a == b); }

    /// Multiplication by the imaginary unit.
    [[nodiscard]] Complex times_i() const { return {-im, re}; }
};

using ExactScalar = Complex<Rational>;
using FloatScalar = Complex<Real>;

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<ExactScalar> {
    using real_type = Rational;
    static constexpr Backend backend = Backend::exact;

    static Rational from_int(std::int64_t v) { return Rational(static_cast<long>(v)); }
    static Rational from_ratio(std::int64_t p, std::int64_t q);
    static Rational from_double(double v) { return Rational(v); }
    /// Accepts "p/q", integers and plain decimals ("-2.1" is -21/10 exactly).
    static Rational parse(std::string_view text);
    static std::string render(const Rational &v);
    static double to_double(const Rational &v) { return v.get_d(); }
    static double log_abs(const Rational &v);
    static Rational abs(const Rational &v) { return ::abs(v); }
    static Rational sqrt(const Rational &v);
    static Rational exp(const Rational &v);
    static Rational log(const Rational &v);
    static bool negligible(const Rational &v, const Rational &) { return v == 0; }
    static unsigned precision_bits() { return 0; }
};

template <>
struct ScalarTraits<FloatScalar> {
    using real_type = Real;
    static constexpr Backend backend = Backend::floating;

    static Real from_int(std::int64_t v) { return Real(static_cast<long long>(v)); }
    static Real from_ratio(std::int64_t p, std::int64_t q);
    static Real from_double(double v) { return Real(v); }
    /// Accepts everything the exact parser accepts plus "sqrt(x)", "-sqrt(x)",
    /// "exp(x)" and scientific notation.
    static Real parse(std::string_view text);
    static std::string render(const Real &v);
    static double to_double(const Real &v) { return v.convert_to<double>(); }
    static double log_abs(const Real &v);
    static Real abs(const Real &v) { return boost::multiprecision::abs(v); }
    static Real sqrt(const Real &v) { return boost::multiprecision::sqrt(v); }
    static Real exp(const Real &v) { return boost::multiprecision::exp(v); }
    static Real log(const Real &v) { return boost::multiprecision::log(v); }
    /// |v| below scale * 2^-(p - 16).
    static bool negligible(const Real &v, const Real &scale);
    static unsigned precision_bits() { return FloatPrecision::bits(); }
};

template <class S>
using RealOf = typename ScalarTraits<S>::real_type;

template <class S>
S make_real(RealOf<S> v)
{
    return S(std::move(v), RealOf<S>(0));
}

template <class S>
S imaginary_unit()
{
    return S(RealOf<S>(0), RealOf<S>(1));
}

/// Squared modulus, in the backend's real type.
template <class S>
RealOf<S> norm2(const S &z)
{
    return z.re * z.re + z.im * z.im;
}

} // namespace birkhoff

#endif
