#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace ielab {

using Rational = boost::multiprecision::cpp_rational;

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

template <class T>
inline double to_double(const T& v) {
    if constexpr (is_exact_v<T>)
        return v.template convert_to<double>();
    else
        return static_cast<double>(v);
}

template <class T>
inline T from_rational(const Rational& r) {
    if constexpr (is_exact_v<T>)
        return r;
    else
        return r.convert_to<double>();
}

template <class T>
inline T scalar_from(double v);

// "0.8", "-3", "1/3", "2.5e-3" -> exact value of the decimal text
inline Rational parse_rational(std::string_view s) {
    auto bad = [&] { return std::invalid_argument("not a rational number: '" + std::string(s) + "'"); };
    if (s.empty()) throw bad();
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        auto num = parse_rational(s.substr(0, slash));
        auto den = parse_rational(s.substr(slash + 1));
        if (den == 0) throw bad();
        return num / den;
    }
    bool neg = false;
    std::size_t i = 0;
    if (s[i] == '+' || s[i] == '-') neg = s[i++] == '-';
    boost::multiprecision::cpp_int mant = 0;
    long exp10 = 0;
    bool digits = false, dot = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c >= '0' && c <= '9') {
            mant = mant * 10 + (c - '0');
            digits = true;
            if (dot) --exp10;
        } else if (c == '.' && !dot) {
            dot = true;
        } else if (c == 'e' || c == 'E') {
            long e = 0;
            auto rest = s.substr(i + 1);
            if (!rest.empty() && rest[0] == '+') rest.remove_prefix(1);
            auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), e);
            if (ec != std::errc() || p != rest.data() + rest.size()) throw bad();
            exp10 += e;
            break;
        } else {
            throw bad();
        }
    }
    if (!digits) throw bad();
    Rational r(mant);
    boost::multiprecision::cpp_int p10 = boost::multiprecision::pow(boost::multiprecision::cpp_int(10),
                                                                    static_cast<unsigned>(std::labs(exp10)));
    if (exp10 >= 0)
        r *= p10;
    else
        r /= p10;
    return neg ? Rational(-r) : r;
}

// shortest round-trip decimal of v, read exactly: 0.8 -> 4/5
inline Rational rational_from_double(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite number");
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return parse_rational(std::string_view(buf, static_cast<std::size_t>(p - buf)));
}

template <class T>
inline T scalar_from(double v) {
    if constexpr (is_exact_v<T>)
        return rational_from_double(v);
    else
        return v;
}

inline std::string to_string(const Rational& r) {
    auto num = boost::multiprecision::numerator(r);
    auto den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

// slack below which two float values count as tied
template <class T>
inline T tie_tolerance(const T& scale) {
    if constexpr (is_exact_v<T>) {
        (void)scale;
        return T(0);
    } else {
        return 1e-12 * std::max(1.0, std::abs(scale));
    }
}

template <class T>
inline T abs_value(const T& v) {
    return v < 0 ? T(-v) : v;
}

// integer power by squaring; exponent small in practice
template <class T>
inline T ipow(T base, unsigned long e) {
    T out(1);
    while (e) {
        if (e & 1u) out *= base;
        e >>= 1u;
        if (e) base *= base;
    }
    return out;
}

}  // namespace ielab
