// Resonance sequences (k_n, l_n) from continued fractions and the desk-scale
// profile that replaces the double-exponential thresholds.

#ifndef BIRKHOFF_SEQUENCE_HPP
#define BIRKHOFF_SEQUENCE_HPP

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "birkhoff/frequency.hpp"
#include "birkhoff/scalar.hpp"

namespace birkhoff {

enum class SequenceMode { liouville, rational, theorem_b, exact_resonant };

std::string to_string(SequenceMode m);
SequenceMode sequence_mode_from_string(const std::string &s);

class SequenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ScaleProfileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Desk-scale surrogates for the constants of the constructions. Every
/// ordering the arguments rely on is checked by validate_orderings.
struct ScaleProfile {
    std::string name = "default";
    /// Mode L: 0 < |gap_n| < 10^-(n + gap_offset).
    int gap_offset = 2;
    /// The fixed value of the transverse action (bold I).
    double action_level = 1e-4;
    /// Mode B lower bound on k_n.
    long long k_min = 1;
    /// k-hat = floor((1 + epsilon) l).
    double epsilon = 0.005;
    /// Escape must happen within slack * prediction.
    double escape_slack = 2.0;
    /// Control runs integrate for this multiple of the prediction.
    double control_factor = 10.0;

    [[nodiscard]] double gap_threshold(int n) const { return std::pow(10.0, -(n + gap_offset)); }
};

struct OrderingCheck {
    std::string name;
    double lhs = 0;
    double rhs = 0;
    bool holds = false;
};

template <class S>
struct SequenceEntry {
    int n = 0;
    long long k = 0;
    long long l = 0;
    /// k omega_1 + l omega_2 (k omega_1 - l omega_2 for same-sign omega).
    RealOf<S> gap;
    RealOf<S> a;
    std::optional<RealOf<S>> b;
    RealOf<S> zeta = RealOf<S>(1);
    std::optional<RealOf<S>> i4;
    std::optional<long long> khat;
    /// Smallest |k(omega_1 + I4) + l omega_2| over 0 < k + l <= k_{n-1} + l_{n-1}.
    std::optional<RealOf<S>> nr_separation;
    /// Stand-in for the gap in closed-form predictions only.
    std::optional<RealOf<S>> gap_surrogate;

    [[nodiscard]] const RealOf<S> &effective_gap() const { return gap_surrogate ? *gap_surrogate : gap; }
};

struct SequenceOverrides {
    std::map<int, std::string> a;
    std::map<int, std::string> zeta;
    std::map<int, long long> khat;
    std::map<int, std::string> gap;
};

struct SequenceRequest {
    int count = 1;
    SequenceMode mode = SequenceMode::theorem_b;
    int first_index = 0;
    ScaleProfile profile;
    SequenceOverrides overrides;
    /// Convergents examined before giving up.
    int max_convergents = 80;
};

template <class S>
struct ResonanceSequence {
    FrequencyVector<S> omega;
    SequenceMode mode = SequenceMode::theorem_b;
    ScaleProfile profile;
    bool same_sign = false;
    std::vector<SequenceEntry<S>> entries;

    [[nodiscard]] const SequenceEntry<S> &entry(int n) const
    {
        for (const auto &e : entries)
            if (e.n == n) return e;
        throw std::out_of_range("resonance sequence has no entry with index " + std::to_string(n));
    }
};

/// Best rational approximations p/q of x > 0 (continued-fraction convergents).
template <class S>
std::vector<std::pair<long long, long long>> convergents(const RealOf<S> &x, int max_terms);

template <class S>
ResonanceSequence<S> resonance_sequence(const FrequencyVector<S> &omega, const SequenceRequest &req);

/// a = bold I * a_n, and the orderings the escape argument uses:
/// a < 1, |gap_n| <= a^2, bold I * n * ln k_n <= bold I^0.9, b_j <= a_j ln k_n (j < n).
template <class S>
std::vector<OrderingCheck> ordering_checks(const ResonanceSequence<S> &seq, int n);

/// Throws ScaleProfileError naming every violated ordering.
template <class S>
void validate_orderings(const ResonanceSequence<S> &seq, int n);

extern template std::vector<std::pair<long long, long long>> convergents<ExactScalar>(const Rational &, int);
extern template std::vector<std::pair<long long, long long>> convergents<FloatScalar>(const Real &, int);
extern template ResonanceSequence<ExactScalar> resonance_sequence(const FrequencyVector<ExactScalar> &,
                                                                  const SequenceRequest &);
extern template ResonanceSequence<FloatScalar> resonance_sequence(const FrequencyVector<FloatScalar> &,
                                                                  const SequenceRequest &);
extern template std::vector<OrderingCheck> ordering_checks(const ResonanceSequence<ExactScalar> &, int);
extern template std::vector<OrderingCheck> ordering_checks(const ResonanceSequence<FloatScalar> &, int);
extern template void validate_orderings(const ResonanceSequence<ExactScalar> &, int);
extern template void validate_orderings(const ResonanceSequence<FloatScalar> &, int);

} // namespace birkhoff

#endif
