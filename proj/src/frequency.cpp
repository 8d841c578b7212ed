#include "birkhoff/frequency.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <numeric>

namespace birkhoff {

namespace {

long long checked(__int128 v)
{
    if (v > std::numeric_limits<long long>::max() || v < std::numeric_limits<long long>::min())
        throw std::overflow_error("integer lattice reduction overflowed 64 bits");
    return static_cast<long long>(v);
}

// row_a <- row_a - q * row_b
void axpy(IntVector &a, const IntVector &b, long long q)
{
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = checked(static_cast<__int128>(a[i]) - static_cast<__int128>(q) * b[i]);
}

} // namespace

IntegerLattice::IntegerLattice(int dimension, const std::vector<IntVector> &generators) : dimension_(dimension)
{
    std::vector<IntVector> rows;
    for (const auto &g : generators) {
        if (static_cast<int>(g.size()) != dimension)
            throw DimensionError("lattice vector has length " + std::to_string(g.size()) + ", expected " +
                                 std::to_string(dimension));
        if (std::all_of(g.begin(), g.end(), [](long long x) { return x == 0; }))
            throw std::invalid_argument("declared lattice vectors must be nonzero");
        rows.push_back(g);
    }
    // Integer row echelon form by repeated Euclidean reduction per column.
    std::size_t top = 0;
    for (int col = 0; col < dimension && top < rows.size(); ++col) {
        const auto c = static_cast<std::size_t>(col);
        while (true) {
            std::size_t best = rows.size();
            for (std::size_t r = top; r < rows.size(); ++r)
                if (rows[r][c] != 0 && (best == rows.size() || std::llabs(rows[r][c]) < std::llabs(rows[best][c])))
                    best = r;
            if (best == rows.size()) break;
            std::swap(rows[top], rows[best]);
            bool reduced = true;
            for (std::size_t r = top + 1; r < rows.size(); ++r) {
                if (rows[r][c] == 0) continue;
                axpy(rows[r], rows[top], rows[r][c] / rows[top][c]);
                if (rows[r][c] != 0) reduced = false;
            }
            if (reduced) break;
        }
        if (top < rows.size() && rows[top][c] != 0) {
            if (rows[top][c] < 0)
                for (auto &x : rows[top]) x = -x;
            pivots_.push_back(col);
            basis_.push_back(rows[top]);
            ++top;
        }
    }
}

bool IntegerLattice::contains(const IntVector &m) const
{
    if (static_cast<int>(m.size()) != dimension_) throw DimensionError("lattice membership: dimension mismatch");
    IntVector rest = m;
    std::size_t next = 0;
    for (int col = 0; col < dimension_; ++col) {
        const auto c = static_cast<std::size_t>(col);
        if (next < pivots_.size() && pivots_[next] == col) {
            const long long p = basis_[next][c];
            if (rest[c] % p != 0) return false;
            axpy(rest, basis_[next], rest[c] / p);
            ++next;
        } else if (rest[c] != 0) {
            return false;
        }
    }
    return true;
}

template <class S>
FrequencyVector<S>::FrequencyVector(std::vector<real_type> values, std::vector<IntVector> lattice,
                                    std::vector<NearResonance<S>> near)
    : values_(std::move(values)), relations_(std::move(lattice)), near_(std::move(near))
{
    if (values_.empty()) throw DimensionError("frequency vector must have at least one component");
    lattice_ = IntegerLattice(dof(), relations_);
    for (const auto &rel : relations_) {
        const real_type residual = dot(rel);
        real_type scale = 0;
        for (std::size_t j = 0; j < rel.size(); ++j)
            scale += ScalarTraits<S>::abs(values_[j]) * ScalarTraits<S>::from_int(std::llabs(rel[j]));
        if (!ScalarTraits<S>::negligible(residual, scale)) {
            std::string txt;
            for (auto x : rel) txt += (txt.empty() ? "" : ",") + std::to_string(x);
            throw std::invalid_argument("declared relation (" + txt + ") does not annihilate omega: <m,omega> = " +
                                        ScalarTraits<S>::render(residual));
        }
    }
    for (const auto &nr : near_)
        if (static_cast<int>(nr.relation.size()) != dof()) throw DimensionError("near-resonance vector length");
}

template <class S>
typename FrequencyVector<S>::real_type FrequencyVector<S>::dot(const IntVector &m) const
{
    if (static_cast<int>(m.size()) != dof()) throw DimensionError("integer vector length differs from omega");
    real_type acc = 0;
    for (std::size_t j = 0; j < m.size(); ++j)
        if (m[j] != 0) acc += ScalarTraits<S>::from_int(m[j]) * values_[j];
    return acc;
}

template <class S>
bool FrequencyVector<S>::in_lattice(const IntVector &m) const
{
    if (std::all_of(m.begin(), m.end(), [](long long x) { return x == 0; })) return true;
    return lattice_.rank() > 0 && lattice_.contains(m);
}

template class FrequencyVector<ExactScalar>;
template class FrequencyVector<FloatScalar>;

} // namespace birkhoff
