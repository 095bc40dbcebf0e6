#pragma once

#include <nlohmann/json.hpp>

#include <cstdio>
#include <map>
#include <ostream>
#include <string>

#include "mfunc/global.hpp"

namespace mfunc {

using ParamMap = std::map<std::string, std::string>;

namespace detail {

// Round-trip formatting, stable across runs of the same build.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_param_header(std::ostream& os, const ParamMap& params) {
    for (const auto& [key, value] : params) {
        os << "# " << key << " = " << value << "\n";
    }
}

}  // namespace detail

// CSV columns: x, re, im, err.  The configuration is embedded as '#' header
// lines so every artifact records how it was produced.
inline void write_csv(std::ostream& os, const TransformTable& t, const ParamMap& params) {
    detail::write_param_header(os, params);
    os << "x,re,im,err\n";
    for (std::size_t i = 0; i < t.x.size(); ++i) {
        os << detail::fmt_double(t.x[i]) << ',' << detail::fmt_double(t.values[i].real()) << ','
           << detail::fmt_double(t.values[i].imag()) << ',' << detail::fmt_double(t.err[i])
           << "\n";
    }
}

// CSV columns: u, density, err.
inline void write_csv(std::ostream& os, const DensityGrid& g, const ParamMap& params) {
    detail::write_param_header(os, params);
    os << "u,density,err\n";
    for (std::size_t i = 0; i < g.u.size(); ++i) {
        os << detail::fmt_double(g.u[i]) << ',' << detail::fmt_double(g.values[i]) << ','
           << detail::fmt_double(g.err[i]) << "\n";
    }
}

inline nlohmann::json to_json(const TransformTable& t, const ParamMap& params) {
    nlohmann::json j;
    j["params"] = params;
    j["x"] = t.x;
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (const auto& v : t.values) {
        re.push_back(v.real());
        im.push_back(v.imag());
    }
    j["re"] = re;
    j["im"] = im;
    j["err"] = t.err;
    return j;
}

inline nlohmann::json to_json(const DensityGrid& g, const ParamMap& params) {
    nlohmann::json j;
    j["params"] = params;
    j["u"] = g.u;
    j["density"] = g.values;
    j["err"] = g.err;
    j["mass"] = g.mass;
    return j;
}

}  // namespace mfunc
