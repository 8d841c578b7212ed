#ifndef BIRKHOFF_MONOMIAL_HPP
#define BIRKHOFF_MONOMIAL_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace birkhoff {

/// Raised when objects with different numbers of degrees of freedom meet.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// xi^u eta^v in d degrees of freedom. Storage is u_1..u_d followed by
/// v_1..v_d.
class Monomial {
public:
    Monomial() = default;
    explicit Monomial(int dof) : exps_(static_cast<std::size_t>(2 * dof), 0)
    {
        if (dof < 1) throw DimensionError("degrees of freedom must be >= 1");
    }
    Monomial(const std::vector<int> &u, const std::vector<int> &v) : Monomial(static_cast<int>(u.size()))
    {
        if (u.size() != v.size()) throw DimensionError("exponent vectors u and v differ in length");
        for (std::size_t j = 0; j < u.size(); ++j) {
            if (u[j] < 0 || v[j] < 0) throw std::invalid_argument("negative exponent");
            exps_[j] = static_cast<std::uint16_t>(u[j]);
            exps_[j + u.size()] = static_cast<std::uint16_t>(v[j]);
        }
    }

    static Monomial xi(int dof, int j, int power = 1)
    {
        Monomial m(dof);
        m.set_u(j, power);
        return m;
    }
    static Monomial eta(int dof, int j, int power = 1)
    {
        Monomial m(dof);
        m.set_v(j, power);
        return m;
    }
    /// I_j^power = (xi_j eta_j)^power.
    static Monomial action(int dof, int j, int power = 1)
    {
        Monomial m(dof);
        m.set_u(j, power);
        m.set_v(j, power);
        return m;
    }
    static Monomial from_action_index(const std::vector<int> &idx) { return Monomial(idx, idx); }

    [[nodiscard]] int dof() const noexcept { return static_cast<int>(exps_.size() / 2); }
    [[nodiscard]] int u(int j) const { return exps_[static_cast<std::size_t>(j)]; }
    [[nodiscard]] int v(int j) const { return exps_[static_cast<std::size_t>(j + dof())]; }
    void set_u(int j, int e) { exps_.at(static_cast<std::size_t>(j)) = static_cast<std::uint16_t>(e); }
    void set_v(int j, int e) { exps_.at(static_cast<std::size_t>(j + dof())) = static_cast<std::uint16_t>(e); }

    [[nodiscard]] int degree() const noexcept
    {
        return std::accumulate(exps_.begin(), exps_.end(), 0);
    }
    [[nodiscard]] bool is_action() const
    {
        const int d = dof();
        for (int j = 0; j < d; ++j)
            if (u(j) != v(j)) return false;
        return true;
    }
    /// Exponent of I_j that can be factored out: min(u_j, v_j).
    [[nodiscard]] int action_power(int j) const { return std::min(u(j), v(j)); }

    [[nodiscard]] std::vector<int> u_vector() const { return {exps_.begin(), exps_.begin() + dof()}; }
    [[nodiscard]] std::vector<int> v_vector() const { return {exps_.begin() + dof(), exps_.end()}; }
    /// u - v.
    [[nodiscard]] std::vector<long long> exchange() const
    {
        std::vector<long long> out(static_cast<std::size_t>(dof()));
        for (int j = 0; j < dof(); ++j) out[static_cast<std::size_t>(j)] = u(j) - v(j);
        return out;
    }
    /// Exponents of the complex-conjugate monomial (u and v swapped).
    [[nodiscard]] Monomial conjugate() const
    {
        Monomial m(dof());
        for (int j = 0; j < dof(); ++j) {
            m.set_u(j, v(j));
            m.set_v(j, u(j));
        }
        return m;
    }
    [[nodiscard]] const std::vector<std::uint16_t> &raw() const noexcept { return exps_; }

    friend Monomial operator*(const Monomial &a, const Monomial &b)
    {
        if (a.exps_.size() != b.exps_.size()) throw DimensionError("monomial dimension mismatch");
        Monomial m = a;
        for (std::size_t i = 0; i < m.exps_.size(); ++i) m.exps_[i] = static_cast<std::uint16_t>(m.exps_[i] + b.exps_[i]);
        return m;
    }
    friend bool operator==(const Monomial &a, const Monomial &b) { return a.exps_ == b.exps_; }
    friend bool operator!=(const Monomial &a, const Monomial &b) { return !(a == b); }

    [[nodiscard]] std::string to_string() const;

private:
    std::vector<std::uint16_t> exps_;
};

/// Graded lexicographic order: total degree first, then exponents compared
/// left to right with the larger exponent first.
struct GradedLex {
    bool operator()(const Monomial &a, const Monomial &b) const
    {
        const int da = a.degree();
        const int db = b.degree();
        if (da != db) return da < db;
        return std::lexicographical_compare(a.raw().begin(), a.raw().end(), b.raw().begin(), b.raw().end(),
                                            [](std::uint16_t x, std::uint16_t y) { return x > y; });
    }
};

/// Exponents m_1..m_d of I_1^m_1 ... I_d^m_d.
using ActionIndex = std::vector<int>;

struct ActionIndexOrder {
    bool operator()(const ActionIndex &a, const ActionIndex &b) const
    {
        return GradedLex{}(Monomial::from_action_index(a), Monomial::from_action_index(b));
    }
};

inline int action_degree(const ActionIndex &idx)
{
    return std::accumulate(idx.begin(), idx.end(), 0);
}

inline std::string Monomial::to_string() const
{
    std::string out;
    auto put = [&](const char *name, int j, int e) {
        if (e == 0) return;
        if (!out.empty()) out += '*';
        out += name;
        out += std::to_string(j + 1);
        if (e > 1) out += '^' + std::to_string(e);
    };
    for (int j = 0; j < dof(); ++j) put("xi", j, u(j));
    for (int j = 0; j < dof(); ++j) put("eta", j, v(j));
    return out.empty() ? "1" : out;
}

} // namespace birkhoff

#endif
