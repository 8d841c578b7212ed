#ifndef BIRKHOFF_FREQUENCY_HPP
#define BIRKHOFF_FREQUENCY_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "birkhoff/monomial.hpp"
#include "birkhoff/scalar.hpp"

namespace birkhoff {

using IntVector = std::vector<long long>;

/// Integer span of a finite set of vectors, kept in row echelon form so that
/// membership is an exact test.
class IntegerLattice {
public:
    IntegerLattice() = default;
    IntegerLattice(int dimension, const std::vector<IntVector> &generators);

    [[nodiscard]] bool contains(const IntVector &m) const;
    [[nodiscard]] int rank() const noexcept { return static_cast<int>(basis_.size()); }
    [[nodiscard]] int dimension() const noexcept { return dimension_; }

private:
    int dimension_ = 0;
    std::vector<IntVector> basis_;
    std::vector<int> pivots_;
};

enum class Resonance { resonant, nonresonant };

template <class S>
struct NearResonance {
    IntVector relation;
    RealOf<S> gap;
};

/// Frequencies together with the integer relations the caller declares to
/// hold. Resonance decisions consult the declared lattice only.
template <class S>
class FrequencyVector {
public:
    using real_type = RealOf<S>;

    FrequencyVector() = default;
    explicit FrequencyVector(std::vector<real_type> values, std::vector<IntVector> lattice = {},
                             std::vector<NearResonance<S>> near = {});

    [[nodiscard]] int dof() const noexcept { return static_cast<int>(values_.size()); }
    [[nodiscard]] const std::vector<real_type> &values() const noexcept { return values_; }
    [[nodiscard]] const real_type &operator[](int j) const { return values_.at(static_cast<std::size_t>(j)); }
    [[nodiscard]] const std::vector<IntVector> &relations() const noexcept { return relations_; }
    [[nodiscard]] const std::vector<NearResonance<S>> &near_resonances() const noexcept { return near_; }
    [[nodiscard]] const IntegerLattice &lattice() const noexcept { return lattice_; }

    /// <m, omega>.
    [[nodiscard]] real_type dot(const IntVector &m) const;
    [[nodiscard]] bool in_lattice(const IntVector &m) const;

private:
    std::vector<real_type> values_;
    std::vector<IntVector> relations_;
    std::vector<NearResonance<S>> near_;
    IntegerLattice lattice_;
};

template <class S>
struct Pairing {
    RealOf<S> pairing;
    Resonance resonance;
};

/// <omega, u - v> and the lattice-exact resonance class of the monomial.
template <class S>
Pairing<S> frequency_pairing(const Monomial &m, const FrequencyVector<S> &omega)
{
    if (m.dof() != omega.dof())
        throw DimensionError("monomial has " + std::to_string(m.dof()) + " degrees of freedom, frequency vector " +
                             std::to_string(omega.dof()));
    const IntVector k = m.exchange();
    Pairing<S> out{omega.dot(k), Resonance::nonresonant};
    if (omega.in_lattice(k)) out.resonance = Resonance::resonant;
    return out;
}

extern template class FrequencyVector<ExactScalar>;
extern template class FrequencyVector<FloatScalar>;

} // namespace birkhoff

#endif
