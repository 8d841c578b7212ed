#ifndef BIRKHOFF_SERIES_IO_HPP
#define BIRKHOFF_SERIES_IO_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "birkhoff/series.hpp"

namespace birkhoff {

using json = nlohmann::ordered_json;

template <class S>
json scalar_to_json(const S &c)
{
    return json{{"re", ScalarTraits<S>::render(c.re)}, {"im", ScalarTraits<S>::render(c.im)}};
}

template <class S>
S scalar_from_json(const json &j)
{
    auto part = [](const json &v) {
        if (v.is_string()) return ScalarTraits<S>::parse(v.get<std::string>());
        if (v.is_number_integer()) return ScalarTraits<S>::from_int(v.get<long long>());
        if (v.is_number()) return ScalarTraits<S>::parse(v.dump());
        throw std::invalid_argument("numeric field must be a string or a number");
    };
    return S(part(j.at("re")), j.contains("im") ? part(j.at("im")) : RealOf<S>(0));
}

/// Canonical form {d, N, backend, terms:[{u, v, re, im}]}, graded-lex order.
template <class S>
json series_to_json(const Series<S> &s)
{
    json out;
    out["d"] = s.dof();
    out["N"] = s.order();
    out["backend"] = to_string(Series<S>::backend());
    if (s.backend() == Backend::floating) out["precision_bits"] = FloatPrecision::bits();
    if (!s.pair_caps().empty()) out["pair_caps"] = s.pair_caps();
    out["real"] = s.reality_flag();
    json terms = json::array();
    for (const auto &[m, c] : s.terms()) {
        json t;
        t["u"] = m.u_vector();
        t["v"] = m.v_vector();
        t["re"] = ScalarTraits<S>::render(c.re);
        t["im"] = ScalarTraits<S>::render(c.im);
        terms.push_back(std::move(t));
    }
    out["terms"] = std::move(terms);
    return out;
}

template <class S>
Series<S> series_from_json(const json &j)
{
    const auto backend = backend_from_string(j.at("backend").get<std::string>());
    if (backend != Series<S>::backend())
        throw BackendError("series was written by the " + to_string(backend) + " backend");
    Series<S> s(j.at("d").get<int>(), j.at("N").get<int>(), j.value("pair_caps", std::vector<int>{}));
    for (const auto &t : j.at("terms")) {
        const Monomial m(t.at("u").get<std::vector<int>>(), t.at("v").get<std::vector<int>>());
        if (!s.admits(m)) throw std::invalid_argument("term " + m.to_string() + " exceeds the truncation");
        s.add_term(m, scalar_from_json<S>(t));
    }
    if (j.value("real", false)) s.mark_real();
    return s;
}

} // namespace birkhoff

#endif
